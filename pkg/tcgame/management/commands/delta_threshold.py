from django.conf import settings

from tcgame.allocation import core_check, mse_delta, mse_delta_threshold
from tcgame.exceptions import DegenerateAllocationError
from tcgame.games import build_delta_game, build_game, max_feasible_delta
from tcgame.management.base import TcCommand, fmt, positive_int


class Command(TcCommand):
    help = 'Largest feasible pay-back share delta and the delta up to which (1 - delta) MSE stays in the core'

    def add_arguments(self, parser):
        self.add_scenario_argument(parser)
        parser.add_argument('--steps', type=positive_int,
                            help='Also scan this many delta values below the feasibility bound')
        self.add_format_argument(parser)

    def run(self, *args, **options):
        theta = self.load_scenario(options['scenario']).situation
        game = build_game(theta)
        try:
            bound = max_feasible_delta(game)
        except DegenerateAllocationError:
            bound = None
        try:
            threshold = mse_delta_threshold(theta, game)
        except DegenerateAllocationError:
            threshold = None

        # Without a feasible delta there is nothing to scan.
        scan = self._scan(theta, game, bound, options['steps']) if options['steps'] and bound is not None else []

        if options['format'] == 'json':
            self.write_json({
                'max_feasible_delta': bound,
                'mse_delta_threshold': threshold,
                'scan': [{'delta': delta, 'in_core': in_core, 'worst_deficit': deficit}
                         for delta, in_core, deficit in scan],
            })
            return

        self.stdout.write(f"max feasible delta:  {'undefined' if bound is None else fmt(bound)}")
        self.stdout.write(f"MSE delta threshold: {'undefined' if threshold is None else fmt(threshold)}")
        if scan:
            self.stdout.write('')
            self.print_table(
                ['delta', '(1-delta)MSE in core', 'worst deficit'],
                [[fmt(delta), 'yes' if in_core else 'no', fmt(deficit)] for delta, in_core, deficit in scan],
            )

    @staticmethod
    def _scan(theta, game, bound, steps):
        upper = min(bound, 1.0)
        if upper <= 0.0:
            return []
        rows = []
        for k in range(1, steps + 1):
            delta = upper * k / (steps + 1)
            report = core_check(build_delta_game(game, delta), mse_delta(theta, game, delta), settings.TC_CORE_TOLERANCE)
            rows.append((delta, report.in_core, report.worst_violation.deficit))
        return rows
