import json
from pathlib import Path

from qwdr.management.base import QWDRCommand
from qwdr.scenarios import make_paper15_scenario, paper15_rows, to_document


class Command(QWDRCommand):
    help = 'Выводит встроенный сценарий на 15 узлов с целями выбранной строки'

    def add_arguments(self, parser):
        parser.add_argument('--row', type=int, default=2, choices=paper15_rows())
        parser.add_argument('--seed', type=int, default=None)
        parser.add_argument('--out', default=None, help='файл для JSON-документа (по умолчанию stdout)')

    def handle(self, *args, **options):
        config = make_paper15_scenario(seed=options['seed'], row=options['row'])
        text = json.dumps(to_document(config), indent=2, ensure_ascii=False) + '\n'
        if options['out']:
            Path(options['out']).write_text(text, encoding='utf-8')
            self.stdout.write(self.style.SUCCESS(f"Scenario written to {options['out']}"))
        else:
            self.stdout.write(text, ending='')
