import math
import random

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from qwdr.network import QueueSnapshot
from qwdr.oracle import LinearProgramInstance, lp_solve_exact, qp_project_exact
from qwdr.solver import (
    HalfspaceConstraint,
    IncrementalGradientAscent,
    SolverConfig,
    WeightConfig,
    gradient,
    lemma1_bound,
    node_constraints,
    project_onto_halfspace,
    project_pair,
    solve_allocation,
    weight,
)
from qwdr.stochastic import ChannelModel, fixed_channel

from .factories import single_link_model, tandem_model


class WeightTests(SimpleTestCase):

    def test_at_threshold(self):
        cfg = WeightConfig(a1=0.2, a2=2.0)
        self.assertAlmostEqual(weight(50.0, 50.0, cfg), 1.1, delta=1e-12)

    def test_supremum(self):
        cfg = WeightConfig(a1=0.2, a2=2.0)
        self.assertAlmostEqual(weight(1e6, 50.0, cfg), 1.2, delta=1e-12)
        self.assertAlmostEqual(weight(60.0, 50.0, cfg), 1.2, delta=1e-6)
        self.assertAlmostEqual(weight(-1e6, 50.0, cfg), 1.0, delta=1e-12)

    def test_unweighted(self):
        cfg = WeightConfig(a1=0.0, a2=2.0)
        for x in (0.0, 10.0, 1e9):
            self.assertEqual(weight(x, 5.0, cfg), 1.0)
        self.assertEqual(weight(100.0, None, WeightConfig()), 1.0)

    def test_bounds(self):
        cfg = WeightConfig(a1=0.2, a2=2.0)
        for x in np.linspace(0.0, 100.0, 201):
            w = weight(float(x), 50.0, cfg)
            self.assertTrue(1.0 <= w <= 1.2)

    def test_thresholds_from_targets(self):
        model = tandem_model(rate=2.5, target=40)
        cfg = WeightConfig.for_model(model)
        self.assertAlmostEqual(cfg.threshold(3), 100.0)

    def test_invalid(self):
        with self.assertRaises(ValueError):
            WeightConfig(a1=-0.1)
        with self.assertRaises(ValueError):
            WeightConfig(argument='link')


class GradientTests(SimpleTestCase):

    def setUp(self):
        self.model = single_link_model()
        self.channel_model = ChannelModel(links=self.model.links, mean_gain=(1.0,), gain_model='fixed')

    def test_weighted_gradient(self):
        queues = QueueSnapshot(model=self.model, lengths={(1, 2): 10})
        channel = fixed_channel(self.channel_model, [math.exp(2.0) - 1.0])
        cfg = WeightConfig(a1=0.2, a2=2.0, thresholds={2: 10})
        self.assertAlmostEqual(gradient(1, queues, channel, cfg), 22.0)

    def test_zero_backlog(self):
        queues = QueueSnapshot(model=self.model, lengths={})
        channel = fixed_channel(self.channel_model, [10.0])
        self.assertEqual(gradient(1, queues, channel, WeightConfig()), 0.0)

    def test_zero_rate(self):
        queues = QueueSnapshot(model=self.model, lengths={(1, 2): 7})
        channel = fixed_channel(self.channel_model, [0.0])
        self.assertEqual(gradient(1, queues, channel, WeightConfig()), 0.0)

    def test_node_argument_uses_local_queue(self):
        model = tandem_model(target=10)
        channel = fixed_channel(
            ChannelModel(links=model.links, mean_gain=(1.0, 1.0), gain_model='fixed'),
            [math.e - 1.0, math.e - 1.0],
        )
        queues = QueueSnapshot(model=model, lengths={(1, 3): 6, (2, 3): 9})
        thresholds = {3: 15.0}
        network = WeightConfig(thresholds=thresholds, argument='network')
        node = WeightConfig(thresholds=thresholds, argument='node')
        # Q^f = 15 на пороге, Q_2^f = 9 ниже порога
        self.assertAlmostEqual(gradient(2, queues, channel, network), 1.1 * 9)
        self.assertLess(gradient(2, queues, channel, node), 1.1 * 9)


class ProjectionTests(SimpleTestCase):

    def test_halfspace_projection(self):
        constraint = HalfspaceConstraint(support=(0, 1, 2))
        assert_allclose(project_onto_halfspace([0.9, 0.3, 0.4], constraint), [0.7, 0.1, 0.2])

    def test_halfspace_unchanged_when_satisfied(self):
        constraint = HalfspaceConstraint(support=(0, 1))
        self.assertEqual(project_onto_halfspace([0.2, 0.3, 5.0], constraint), [0.2, 0.3, 5.0])

    def test_pair_both_active(self):
        a = HalfspaceConstraint(support=(0, 1))
        b = HalfspaceConstraint(support=(1, 2))
        assert_allclose(project_pair([1.2, 0.9, 0.8], a, b), [0.7, 0.3, 0.7], atol=1e-12)

    def test_pair_matches_exact_projection(self):
        rng = random.Random(20240601)
        for _ in range(1000):
            n = rng.choice((2, 3))
            # Обновлённая координата 0 входит в оба ограничения
            a_support = [0]
            b_support = [0]
            for k in range(1, n):
                side = rng.choice(('a', 'b', 'both', 'none'))
                if side in ('a', 'both'):
                    a_support.append(k)
                if side in ('b', 'both'):
                    b_support.append(k)
            a = HalfspaceConstraint(support=tuple(a_support))
            b = HalfspaceConstraint(support=tuple(b_support))
            point = [rng.uniform(-0.5, 1.5) for _ in range(n)]

            projected = np.array(project_pair(point, a, b, n_rep=10))
            exact = qp_project_exact(point, [a, b])
            self.assertLess(np.linalg.norm(projected - exact), 1e-6, msg=f'{point} {a_support} {b_support}')

    def test_node_constraints(self):
        constraints = node_constraints([(1, 2, 3), (2, 3, 3)])
        self.assertEqual(constraints[2].support, (0, 1))
        self.assertEqual(constraints[1].support, (0,))
        self.assertEqual(constraints[3].support, (1,))


def random_instance(rng):
    """Случайный набор до 4 элементов на узлах 1..4 с весами в [0, 20]."""
    size = rng.randint(1, 4)
    elements = []
    while len(elements) < size:
        i, j = rng.sample(range(1, 5), 2)
        element = (i, j, len(elements) + 10)
        elements.append(element)
    gradients = [rng.uniform(0.0, 20.0) for _ in elements]
    return elements, gradients


class GapBoundTests(SimpleTestCase):

    def test_bound_value(self):
        self.assertAlmostEqual(lemma1_bound(1e-4, 2, 10), 0.009)
        self.assertEqual(lemma1_bound(1e-4, 3, 0.0), 0.0)

    def test_lp_dominates_feasible_points(self):
        rng = random.Random(7)
        np_rng = np.random.default_rng(7)
        for _ in range(20):
            elements, gradients = random_instance(rng)
            instance = LinearProgramInstance.from_elements(elements, gradients)
            best, optimizer = lp_solve_exact(instance)
            self.assertTrue(instance.is_feasible(optimizer))
            self.assertAlmostEqual(instance.objective(optimizer), best)
            for _ in range(1000):
                x = np_rng.uniform(0.0, 1.0, len(elements))
                for h in instance.constraints:
                    load = x[list(h.support)].sum()
                    if load > 1:
                        x[list(h.support)] /= load
                self.assertLessEqual(instance.objective(x), best + 1e-9)

    def test_gap_within_bound(self):
        # Оценка асимптотическая: шаг масштабируется под c1, циклы идут до
        # попадания лучшей итерации в окрестность оптимума
        rng = random.Random(2024)
        for _ in range(200):
            elements, gradients = random_instance(rng)
            c1 = max(gradients)
            if c1 == 0:
                continue
            best, _ = lp_solve_exact(LinearProgramInstance.from_elements(elements, gradients))
            config = SolverConfig(alpha=0.01 / c1, cycles=15)
            ascent = IncrementalGradientAscent(elements, gradients, config)
            bound = lemma1_bound(config.alpha, len(elements), c1)

            best_seen = -math.inf
            history = []
            for _ in range(5000):
                ascent.cycle()
                best_seen = max(best_seen, ascent.objective())
                history.append(best_seen)
                if best_seen >= best - bound:
                    break
            self.assertGreaterEqual(best_seen, best - bound, msg=f'{elements} {gradients}')
            self.assertEqual(history, sorted(history))

    def test_default_parameters_stay_feasible_and_below_optimum(self):
        # α = 1e-4 и 15 циклов из нуля; крупные градиенты включают проекции
        rng = random.Random(15)
        config = SolverConfig(alpha=1e-4, cycles=15)
        for n in range(200):
            elements, gradients = random_instance(rng)
            gradients = [g * 10 ** (n % 5) for g in gradients]
            instance = LinearProgramInstance.from_elements(elements, gradients)
            best, _ = lp_solve_exact(instance)
            ascent = IncrementalGradientAscent(elements, gradients, config)
            ascent.run()
            s = ascent.finalize()
            self.assertEqual(ascent.steps, 15 * len(elements))
            self.assertTrue(instance.is_feasible(s), msg=f'{elements} {gradients}')
            self.assertLessEqual(instance.objective(s), best + 1e-9 * max(1.0, best))

    def test_run_matches_stepwise_ascent(self):
        rng = random.Random(31)
        for n in range(200):
            elements, gradients = random_instance(rng)
            gradients = [g * 10 ** (n % 4) for g in gradients]
            fast = IncrementalGradientAscent(elements, gradients, SolverConfig())
            fast.run()
            stepwise = IncrementalGradientAscent(elements, gradients, SolverConfig())
            stepwise.run(trace=[])
            self.assertEqual(fast.s, stepwise.s)
            self.assertEqual(fast.steps, stepwise.steps)

    def test_finalized_point_feasible(self):
        rng = random.Random(99)
        for _ in range(100):
            elements, gradients = random_instance(rng)
            ascent = IncrementalGradientAscent(elements, gradients, SolverConfig())
            ascent.run()
            s = ascent.finalize()
            instance = LinearProgramInstance.from_elements(elements, gradients)
            self.assertTrue(instance.is_feasible(s))


class SolveAllocationTests(SimpleTestCase):

    def setUp(self):
        self.model = tandem_model(target=10)
        self.channel = fixed_channel(
            ChannelModel(links=self.model.links, mean_gain=(1.0, 1.0), gain_model='fixed'),
            [math.exp(4.5) - 1.0] * 2,
        )

    def solve(self, q1, q2):
        queues = QueueSnapshot(model=self.model, lengths={(1, 3): q1, (2, 3): q2})
        return solve_allocation(
            queues, self.channel, self.model, SolverConfig(), WeightConfig.for_model(self.model)
        )

    def test_zero_backlog_gives_zero_vector(self):
        result = self.solve(0, 0)
        self.assertEqual(result.allocation.values, (0.0, 0.0))
        self.assertEqual(result.objective, 0.0)

    def test_zero_backlog_element_masked(self):
        result = self.solve(3, 8)
        self.assertEqual(result.allocation.fraction(1, 2, 3), 0.0)
        self.assertGreater(result.allocation.fraction(2, 3, 3), 0.0)

    def test_feasible_for_random_queues(self):
        rng = random.Random(5)
        for _ in range(200):
            result = self.solve(rng.randint(0, 5000), rng.randint(0, 5000))
            values = result.allocation.values
            self.assertTrue(all(0.0 <= x <= 1.0 + 1e-9 for x in values))
            self.assertLessEqual(sum(values), 1.0 + 1e-9)
            for x, backlog in zip(values, result.backlogs):
                if backlog == 0:
                    self.assertEqual(x, 0.0)

    def test_diagnostics(self):
        result = self.solve(40, 10)
        self.assertAlmostEqual(result.c1, max(result.gradients))
        self.assertAlmostEqual(result.bound, lemma1_bound(1e-4, 2, result.c1))
        self.assertEqual(result.allocation[1], result.allocation.values[0])

    def test_gradients_match_single_element_gradient(self):
        queues = QueueSnapshot(model=self.model, lengths={(1, 3): 40, (2, 3): 10})
        cfg = WeightConfig.for_model(self.model)
        result = solve_allocation(queues, self.channel, self.model, SolverConfig(), cfg)
        for k in (1, 2):
            self.assertEqual(result.gradients[k - 1], gradient(k, queues, self.channel, cfg))
