from pathlib import Path

from django.conf import settings

from qwdr.experiments import qos_table
from qwdr.management.base import QWDRCommand
from qwdr.scenarios import paper15_rows


class Command(QWDRCommand):
    help = 'Строит таблицу задержек 15-узлового сценария по наборам целей'

    def add_arguments(self, parser):
        parser.add_argument('--rows', type=int, nargs='+', default=None, choices=paper15_rows())
        parser.add_argument('--slots', type=int, default=None, help='горизонт в слотах')
        parser.add_argument('--replications', type=int, default=None)
        parser.add_argument('--seed', type=int, default=1, help='первое зерно повторов')
        parser.add_argument('--workers', type=int, default=1)
        parser.add_argument('--out', default=None, help='каталог для таблицы и прогонов')

    def handle(self, *args, **options):
        replications = options['replications'] or settings.QWDR_DEFAULTS['replications']
        out_dir = Path(options['out'] or settings.QWDR_OUTPUT_DIR / 'qos_table')
        table, comparisons = qos_table(
            rows=options['rows'],
            horizon=options['slots'],
            replications=replications,
            base_seed=options['seed'],
            out_dir=out_dir,
            workers=options['workers'],
        )
        self.write_frame(table)
        for row, report in comparisons.items():
            self.stdout.write(f"\nRow {row} against unweighted:")
            self.write_frame(report)
        self.stdout.write(self.style.SUCCESS(f"Outputs in {out_dir}"))
