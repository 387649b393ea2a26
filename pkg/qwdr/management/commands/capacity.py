from qwdr.management.base import QWDRCommand
from qwdr.oracle import build_capacity_query, capacity_membership
from qwdr.scenarios import load_scenario


class Command(QWDRCommand):
    help = 'Проверяет, лежат ли интенсивности потоков в области пропускной способности'

    def add_arguments(self, parser):
        parser.add_argument('scenario', help='путь к JSON-файлу сценария')
        parser.add_argument('--samples', type=int, default=None, help='число выборок состояния канала')

    def handle(self, *args, **options):
        config = load_scenario(options['scenario'])
        samples = options['samples'] or config.parameters['capacity_channel_samples']
        query = build_capacity_query(config.model, config.channel_model(), samples=samples)
        result = capacity_membership(query, tolerance=config.parameters['capacity_tolerance'])

        self.stdout.write(
            f"{result.status}: slack {result.slack:.6g} "
            f"({result.states} channel states, {result.activation_sets} activation sets)"
        )
        for (node, flow_id), slack in sorted(result.key_slack.items()):
            self.stdout.write(f"  node {node} flow {flow_id}: {slack:.6g}")
