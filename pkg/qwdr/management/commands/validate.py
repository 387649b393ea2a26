from qwdr.management.base import QWDRCommand
from qwdr.scenarios import load_scenario


class Command(QWDRCommand):
    help = 'Проверяет файл сценария и печатает разрешённую конфигурацию'

    def add_arguments(self, parser):
        parser.add_argument('scenario', help='путь к JSON-файлу сценария')

    def handle(self, *args, **options):
        config = load_scenario(options['scenario'])
        model = config.model
        self.stdout.write(
            f"{config.name}: {len(model.nodes)} nodes, {len(model.links)} links, "
            f"{len(model.flows)} flows, |K|={model.size}"
        )
        for flow in model.flows:
            target = '-' if flow.delay_target is None else f"{flow.delay_target:g}"
            self.stdout.write(
                f"  {flow.label}: route {'->'.join(map(str, flow.route))}, "
                f"rate {flow.arrival_rate:g}, target {target}"
            )
        for name, value in sorted(config.parameters.items()):
            self.stdout.write(f"  {name} = {value}")
        self.stdout.write(self.style.SUCCESS('Scenario is valid'))
