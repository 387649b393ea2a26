from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from qwdr.network import (
    FlowSpec,
    InvariantViolation,
    QueueMatrix,
    QueueSnapshot,
    UnknownLinkFlow,
    build_interference_sets,
    build_link_flow_index,
    build_network,
    differential_backlog,
)

from .factories import tandem_model


class InterferenceSetTests(SimpleTestCase):

    def test_single_link(self):
        sets = build_interference_sets([(1, 2)])
        self.assertEqual(sets, {1: frozenset({(1, 2)}), 2: frozenset({(1, 2)})})

    def test_tandem_middle_node_holds_both_links(self):
        sets = build_interference_sets([(1, 2), (2, 3)])
        self.assertEqual(sets[2], frozenset({(1, 2), (2, 3)}))
        self.assertEqual(sets[1], frozenset({(1, 2)}))

    def test_star_hub(self):
        spokes = [(0, n) for n in range(1, 5)]
        sets = build_interference_sets(spokes)
        self.assertEqual(sets[0], frozenset(spokes))
        self.assertEqual(len(sets), 5)

    def test_every_link_in_exactly_its_endpoint_sets(self):
        links = [(1, 2), (2, 3), (3, 1), (2, 4)]
        sets = build_interference_sets(links)
        for link in links:
            holders = {node for node, members in sets.items() if link in members}
            self.assertEqual(holders, set(link))


class LinkFlowIndexTests(SimpleTestCase):

    def test_tandem_route(self):
        index = build_link_flow_index([FlowSpec(3, (1, 2, 3), 1.0)])
        self.assertEqual(len(index), 2)
        self.assertEqual(index.phi(1, 2, 3), 1)
        self.assertEqual(index.phi(2, 3, 3), 2)
        self.assertEqual(index.element(2), (2, 3, 3))

    def test_lexicographic_order(self):
        flows = [FlowSpec(4, (2, 3, 4), 1.0), FlowSpec(3, (1, 2, 3), 1.0)]
        index = build_link_flow_index(flows)
        self.assertEqual(list(index), [(1, 2, 3), (2, 3, 3), (2, 3, 4), (3, 4, 4)])

    def test_no_flows(self):
        self.assertEqual(len(build_link_flow_index([])), 0)

    def test_duplicate_triple_rejected(self):
        flows = [FlowSpec(3, (1, 2, 3), 1.0), FlowSpec(3, (1, 2, 3), 2.0)]
        with self.assertRaises(ValidationError):
            build_link_flow_index(flows)

    def test_unknown_element(self):
        index = build_link_flow_index([FlowSpec(2, (1, 2), 1.0)])
        with self.assertRaises(KeyError):
            index.phi(2, 1, 2)
        with self.assertRaises(UnknownLinkFlow):
            index.element(5)


class BuildNetworkTests(SimpleTestCase):

    def test_route_through_missing_link(self):
        flow = FlowSpec(3, (1, 2, 3), 1.0)
        with self.assertRaises(ValidationError) as ctx:
            build_network([1, 2, 3], [(1, 2)], [flow])
        errors = ctx.exception.message_dict
        self.assertIn('flows[0].route', errors)
        self.assertIn('2->3', errors['flows[0].route'][0])

    def test_negative_rate(self):
        flow = FlowSpec(2, (1, 2), -1.0)
        with self.assertRaises(ValidationError) as ctx:
            build_network([1, 2], [(1, 2)], [flow])
        self.assertIn('flows[0].arrival_rate', ctx.exception.message_dict)

    def test_route_must_end_at_destination(self):
        flow = FlowSpec(5, (1, 2), 1.0)
        with self.assertRaises(ValidationError) as ctx:
            build_network([1, 2], [(1, 2)], [flow])
        self.assertIn('flows[0].route', ctx.exception.message_dict)

    def test_queue_keys_skip_destination(self):
        model = tandem_model()
        self.assertEqual(model.queue_keys, ((1, 3), (2, 3)))
        self.assertEqual(model.incident_elements(2), (0, 1))

    def test_check_activation(self):
        model = tandem_model()
        model.check_activation([0])
        with self.assertRaises(InvariantViolation):
            model.check_activation([0, 1])


class QueueTests(SimpleTestCase):

    def setUp(self):
        self.model = tandem_model()

    def snapshot(self, q1, q2):
        return QueueSnapshot(model=self.model, lengths={(1, 3): q1, (2, 3): q2})

    def test_differential_backlog(self):
        self.assertEqual(differential_backlog(self.snapshot(5, 2), 1, 2, 3), 3)
        self.assertEqual(differential_backlog(self.snapshot(2, 5), 1, 2, 3), 0)

    def test_destination_counts_as_empty(self):
        self.assertEqual(differential_backlog(self.snapshot(0, 4), 2, 3, 3), 4)

    def test_unknown_triple(self):
        with self.assertRaises(KeyError):
            differential_backlog(self.snapshot(1, 1), 1, 3, 3)

    def test_fifo_and_derived_totals(self):
        queues = QueueMatrix(self.model)
        queues.enqueue(1, 3, [0, 1, 2])
        queues.enqueue(2, 3, [5])
        self.assertEqual(queues.dequeue(1, 3, 2), [0, 1])
        self.assertEqual(queues.head(1, 3), 2)
        self.assertEqual(queues.flow_backlog(3), 2)
        self.assertEqual(queues.total(), 2)
        self.assertEqual(queues.snapshot().length(2, 3), 1)

    def test_no_queue_at_destination(self):
        queues = QueueMatrix(self.model)
        with self.assertRaises(InvariantViolation):
            queues.enqueue(3, 3, [0])
