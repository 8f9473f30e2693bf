from django.conf import settings
from django.core.management.base import CommandError

from tcgame.allocation import EXPERIMENT_RULES, AllocationRule
from tcgame.management.base import USAGE_ERROR, TcCommand, positive_int
from tcgame.services import ExperimentService, render_csv, render_json, write_reports

EXPERIMENT_RULE_CHOICES = [rule.value.lower() for rule in EXPERIMENT_RULES]


class Command(TcCommand):
    help = 'Monte Carlo core-membership fractions of the allocation rules on random TC situations'

    def add_arguments(self, parser):
        parser.add_argument('--n', type=positive_int, nargs='+', default=[3], help='Player counts, e.g. --n 3 4 5')
        parser.add_argument('--trials', type=positive_int, default=None, help='Random situations per player count')
        parser.add_argument('--seed', type=int, default=None, help='Master RNG seed')
        parser.add_argument('--rules', type=str.lower, nargs='+', choices=EXPERIMENT_RULE_CHOICES, default=None,
                            help='Rules to evaluate (default: all)')
        parser.add_argument('--workers', type=positive_int, default=None, help='Worker processes')
        parser.add_argument('--out', help='Write the report here instead of stdout')
        parser.add_argument('--progress', action='store_true', help='Show a progress bar on stderr')
        self.add_format_argument(parser, choices=('csv', 'json'))

    def run(self, *args, **options):
        if any(n < 2 for n in options['n']):
            raise CommandError('--n values must be at least 2', returncode=USAGE_ERROR)

        trials = options['trials'] or settings.TC_EXPERIMENT['TRIALS']
        rules = [AllocationRule.from_name(name) for name in options['rules']] if options['rules'] else None
        service = ExperimentService(seed=options['seed'], workers=options['workers'], progress=options['progress'])

        reports = [service.run(n, trials, rules) for n in options['n']]

        if options['out']:
            write_reports(reports, options['out'], options['format'])
            for report in reports:
                fractions = ', '.join(f"{rule} {outcome.fraction:.4f}" for rule, outcome in report.outcomes.items())
                self.stdout.write(f"n={report.n_players}: {fractions}")
            self.stdout.write(f"seed: {service.seed}")
            self.stdout.write(f"report written to {options['out']}")
            return

        text = render_csv(reports) if options['format'] == 'csv' else render_json(reports)
        self.stdout.write(text, ending='')
        self.stderr.write(f"seed: {service.seed}")
