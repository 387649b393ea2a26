import time
from pathlib import Path

from django.conf import settings

from qwdr.experiments import mean_metrics, run_replications, run_scenario
from qwdr.management.base import QWDRCommand
from qwdr.metrics import compare_runs, delays_frame, write_json
from qwdr.models import ExperimentRun
from qwdr.scenarios import load_scenario


class Command(QWDRCommand):
    help = 'Запускает симуляцию QWDR для файла сценария'

    def add_arguments(self, parser):
        parser.add_argument('scenario', help='путь к JSON-файлу сценария')
        parser.add_argument('--slots', type=int, default=None, help='горизонт в слотах')
        parser.add_argument('--seed', type=int, default=None, help='зерно канала и поступлений')
        parser.add_argument('--mode', choices=['qwdr', 'unweighted'], default=None)
        parser.add_argument('--out', default=None, help='каталог для файлов прогона')
        parser.add_argument('--replications', type=int, default=1, help='число повторов с разными зёрнами')
        parser.add_argument('--workers', type=int, default=1, help='число процессов для повторов')
        parser.add_argument('--compare', action='store_true', help='также прогнать без весов и сравнить')
        parser.add_argument('--save', action='store_true', help='сохранить прогон в базе')

    def _overrides(self, options):
        overrides = {}
        if options['slots'] is not None:
            overrides['horizon_slots'] = options['slots']
        if options['seed'] is not None:
            overrides['channel_seed'] = options['seed']
            overrides['arrival_seed'] = options['seed']
        if options['mode'] is not None:
            overrides['mode'] = options['mode']
        return overrides

    def _execute(self, scenario, out_dir, options):
        started = time.perf_counter()
        if options['replications'] > 1:
            runs = run_replications(
                scenario, options['replications'], out_dir=out_dir, workers=options['workers']
            )
            metrics = mean_metrics(runs)
            if out_dir is not None:
                out_dir.mkdir(parents=True, exist_ok=True)
                write_json(out_dir / 'summary.json', metrics.to_dict())
        else:
            metrics = run_scenario(scenario, out_dir)
        wall_time = time.perf_counter() - started
        if options['save']:
            run = ExperimentRun.from_metrics(metrics, wall_time=wall_time)
            self.stdout.write(f"Saved run #{run.pk}")
        return metrics, wall_time

    def handle(self, *args, **options):
        scenario = load_scenario(options['scenario'], overrides=self._overrides(options))
        out_dir = Path(options['out'] or settings.QWDR_OUTPUT_DIR / scenario.name)

        metrics, wall_time = self._execute(scenario, out_dir / scenario.mode, options)
        self.stdout.write(
            f"{scenario.name} [{scenario.mode}] {metrics.horizon} slots in {wall_time:.1f}s, "
            f"max total queue {metrics.max_total_queue}"
        )
        self.write_frame(delays_frame(metrics))

        if options['compare']:
            other_mode = 'unweighted' if scenario.mode == 'qwdr' else 'qwdr'
            other, _ = self._execute(
                scenario.with_parameters(mode=other_mode), out_dir / other_mode, options
            )
            baseline, weighted = (other, metrics) if other_mode == 'unweighted' else (metrics, other)
            report = compare_runs(baseline, weighted)
            report.to_csv(out_dir / 'compare.csv', index=False, lineterminator='\n')
            self.stdout.write('')
            self.write_frame(report)
        self.stdout.write(self.style.SUCCESS(f"Outputs in {out_dir}"))
