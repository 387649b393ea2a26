import math
import os
from unittest import skipUnless

import numpy as np
from django.test import SimpleTestCase

from qwdr.network import InvariantViolation, QueueMatrix
from qwdr.oracle import build_capacity_query, capacity_membership
from qwdr.scheduler import (
    InfeasibleAllocation,
    ReviewClock,
    ServiceLog,
    SlotSchedule,
    create_schedule,
    next_review_period,
    run,
    step_slot,
)
from qwdr.stochastic import draw_channel

from .factories import arrivals_for, fixed_channel_model, run_config, single_link_model, tandem_model

SLOW = os.environ.get('QWDR_SLOW_TESTS') == '1'
STABILITY_HORIZON = 100_000 if SLOW else 20_000


class ReviewPeriodTests(SimpleTestCase):

    def test_examples(self):
        self.assertEqual(next_review_period(0, 0.01), 1)
        self.assertEqual(next_review_period(171, 0.01), 1)
        self.assertEqual(next_review_period(10_000, 0.01), 5)

    def test_matches_formula(self):
        for total in (0, 50, 500, 5000, 123456):
            expected = math.ceil(max(1.0, math.log(1 + 0.01 * total)))
            self.assertEqual(next_review_period(total, 0.01), expected)

    def test_negative_queue(self):
        with self.assertRaises(ValueError):
            next_review_period(-1, 0.01)

    def test_clock(self):
        clock = ReviewClock(k0=0.01)
        self.assertEqual(clock.open(0, 0), 1)
        self.assertEqual(clock.open(1, 10_000), 5)
        self.assertEqual((clock.index, clock.start, clock.next), (1, 1, 6))


class CreateScheduleTests(SimpleTestCase):

    def test_single_link_half(self):
        schedule = create_schedule([0.5], single_link_model(), 10)
        self.assertEqual(schedule.counts, (5,))
        self.assertEqual(sum(len(slot) for slot in schedule.active), 5)

    def test_zero_fraction(self):
        schedule = create_schedule([0.0], single_link_model(), 10)
        self.assertEqual(schedule.counts, (0,))

    def test_shared_node_disjoint_slots(self):
        model = tandem_model()
        schedule = create_schedule([0.5, 0.5], model, 10)
        self.assertEqual(schedule.counts, (5, 5))
        first = {t for t, slot in enumerate(schedule.active) if 0 in slot}
        second = {t for t, slot in enumerate(schedule.active) if 1 in slot}
        self.assertFalse(first & second)
        for slot in schedule.active:
            model.check_activation(slot)

    def test_quota_rounding(self):
        schedule = create_schedule([0.3], single_link_model(), 10)
        self.assertEqual(schedule.counts, (3,))
        schedule = create_schedule([0.45], single_link_model(), 10)
        self.assertEqual(schedule.counts, (5,))

    def test_quota_bounds(self):
        model = single_link_model()
        for s in np.linspace(0.0, 1.0, 41):
            for period in (1, 3, 7, 10):
                count = create_schedule([float(s)], model, period).counts[0]
                self.assertLessEqual(count, math.ceil(s * period - 1e-12))
                self.assertGreaterEqual(count, math.floor(s * period + 1e-12))

    def test_infeasible_rejected(self):
        with self.assertRaises(InfeasibleAllocation):
            create_schedule([0.7, 0.7], tandem_model(), 10)
        with self.assertRaises(InfeasibleAllocation):
            create_schedule([1.5], single_link_model(), 10)
        with self.assertRaises(InfeasibleAllocation):
            create_schedule([-0.1], single_link_model(), 10)

    def test_slot_outside_review(self):
        schedule = create_schedule([1.0], single_link_model(), 2, start=10)
        self.assertEqual(schedule.active_at(11), (0,))
        with self.assertRaises(ValueError):
            schedule.active_at(12)


class StepSlotTests(SimpleTestCase):

    def setUp(self):
        self.model = single_link_model()
        self.channel = draw_channel(fixed_channel_model(self.model), 0)

    def test_serve_then_arrivals(self):
        queues = QueueMatrix(self.model)
        queues.enqueue(1, 2, [0, 0, 0])
        schedule = create_schedule([1.0], self.model, 1, start=4)
        touched, deliveries = step_slot(queues, schedule, self.channel, {(1, 2): 2}, 4)
        self.assertEqual(len(deliveries), 3)
        self.assertEqual(queues.length(1, 2), 2)
        self.assertEqual(list(queues.dequeue(1, 2, 2)), [4, 4])
        self.assertEqual(touched, {(1, 2)})

    def test_idle_slot(self):
        queues = QueueMatrix(self.model)
        schedule = create_schedule([0.0], self.model, 1)
        _, deliveries = step_slot(queues, schedule, self.channel, {(1, 2): 3}, 0)
        self.assertEqual(deliveries, [])
        self.assertEqual(queues.length(1, 2), 3)

    def test_relay_chain(self):
        model = tandem_model()
        gain = math.exp(2.5) - 1.0
        channel = draw_channel(fixed_channel_model(model, gain=gain), 0)
        queues = QueueMatrix(model)
        log = ServiceLog(model)
        schedule = SlotSchedule(start=0, length=3, active=((), (0,), (1,)), quotas=(1.0, 1.0), counts=(1, 1))

        step_slot(queues, schedule, channel, {(1, 3): 5}, 0, log)
        step_slot(queues, schedule, channel, {}, 1, log)
        self.assertEqual((queues.length(1, 3), queues.length(2, 3)), (3, 2))
        log.check_balance(queues)

        _, deliveries = step_slot(queues, schedule, channel, {}, 2, log)
        self.assertEqual((queues.length(1, 3), queues.length(2, 3)), (3, 0))
        self.assertEqual(deliveries, [(3, 2), (3, 2)])
        log.check_balance(queues)
        log.check_conservation(queues)
        self.assertEqual(log.served, [2, 2])

    def test_balance_violation_detected(self):
        model = tandem_model()
        queues = QueueMatrix(model)
        log = ServiceLog(model)
        queues.enqueue(1, 3, [0])
        with self.assertRaises(InvariantViolation):
            log.check_balance(queues)


class RunTests(SimpleTestCase):

    def simulate(self, model, horizon, seed=2, **kwargs):
        return run(
            model,
            run_config(model, horizon=horizon, **kwargs),
            fixed_channel_model(model),
            arrivals_for(model, seed=seed),
        )

    def test_zero_arrivals(self):
        output = self.simulate(tandem_model(rate=0.0), 300)
        self.assertEqual(output.final_queue, 0)
        self.assertEqual(output.total_queue_max, 0)
        self.assertEqual(len(output.reviews), 300)
        self.assertTrue(all(r.end - r.start == 1 for r in output.reviews))

    def test_single_link_delay_near_one_slot(self):
        model = single_link_model(rate=1.0)
        output = self.simulate(model, 20_000)
        delays = output.log.delays[2]
        mean = sum(d * c for d, c in delays.items()) / sum(delays.values())
        self.assertAlmostEqual(mean, 1.0, delta=0.05)

    def test_same_seeds_same_output(self):
        model = tandem_model(rate=1.8)
        first = self.simulate(model, 2000, schedule_trace=True)
        second = self.simulate(model, 2000, schedule_trace=True)
        self.assertEqual(first.schedule, second.schedule)
        self.assertEqual(first.queue_samples, second.queue_samples)
        self.assertEqual(first.log.delays, second.log.delays)
        third = self.simulate(model, 2000, seed=3, schedule_trace=True)
        self.assertNotEqual(first.queue_samples, third.queue_samples)

    def test_schedule_trace_is_interference_free(self):
        model = tandem_model(rate=1.8)
        output = self.simulate(model, 3000, schedule_trace=True)
        per_slot = {}
        for slot, i, j, f in output.schedule:
            per_slot.setdefault(slot, []).append(model.link_flow_index.position(i, j, f))
        for positions in per_slot.values():
            model.check_activation(positions)
        self.assertTrue(output.log.delivered[3] > 0)

    def test_review_log_and_samples(self):
        output = self.simulate(tandem_model(rate=1.5), 1000, queue_sample_interval=50)
        self.assertEqual(len(output.queue_samples), 20)
        self.assertEqual(output.reviews[0].start, 0)
        for previous, current in zip(output.reviews, output.reviews[1:]):
            self.assertEqual(previous.end, current.start)


class StabilityTests(SimpleTestCase):
    """Тандем с фиксированным каналом floor(μ) = 4: граница области при λ = 2."""

    def simulate(self, rate):
        model = tandem_model(rate=rate)
        channel_model = fixed_channel_model(model)
        capacity = capacity_membership(build_capacity_query(model, channel_model, samples=1))
        output = run(
            model,
            run_config(model, horizon=STABILITY_HORIZON, queue_sample_interval=10),
            channel_model,
            arrivals_for(model),
        )
        totals = np.array([total for _, total, _ in output.queue_samples], dtype=float)
        return capacity, output, totals

    def test_inside_capacity_is_stable(self):
        capacity, output, totals = self.simulate(1.5)
        self.assertEqual(capacity.status, 'inside')
        self.assertLess(output.total_queue_max, 200)
        fifth = len(totals) // 5
        middle = totals[2 * fifth:3 * fifth].mean()
        late = totals[4 * fifth:].mean()
        self.assertLess(abs(late - middle), max(0.1 * middle, 1.0))

    def test_outside_capacity_grows(self):
        capacity, output, totals = self.simulate(2.5)
        self.assertEqual(capacity.status, 'outside')
        self.assertGreater(output.final_queue, 0.1 * STABILITY_HORIZON)
        quarter = len(totals) // 4
        slots = np.arange(len(totals))[-quarter:] * 10
        slope = np.polyfit(slots, totals[-quarter:], 1)[0]
        self.assertGreater(slope, 0.3)

    @skipUnless(SLOW, 'set QWDR_SLOW_TESTS=1 for full-length runs')
    def test_outside_capacity_exceeds_ten_thousand(self):
        _, output, _ = self.simulate(2.5)
        self.assertGreater(output.final_queue, 10_000)
