from django.conf import settings

from tcgame.allocation import core_check
from tcgame.games import build_game
from tcgame.management.base import RULE_CHOICES, TcCommand, fmt, open_unit_interval
from tcgame.serializers import AllocationSerializer, CoreReportSerializer


class Command(TcCommand):
    help = 'Evaluate allocation rules on the scenario game and test core membership'

    def add_arguments(self, parser):
        self.add_scenario_argument(parser)
        parser.add_argument('--rule', type=str.lower, choices=RULE_CHOICES,
                            help='Allocation rule; defaults to every rule listed in the scenario')
        parser.add_argument('--delta', type=open_unit_interval, help='Pay-back share for mse-delta, in (0, 1)')
        parser.add_argument('--verbose', action='store_true', help='List every violated coalition')
        self.add_format_argument(parser)

    def run(self, *args, **options):
        scenario = self.load_scenario(options['scenario'])
        theta = scenario.situation
        game = build_game(theta)
        delta = self.resolve_delta(options['delta'], scenario)

        results = []
        for rule in self.resolve_rules(options['rule'], scenario):
            allocation, target = self.evaluate_rule(rule, theta, game, delta)
            report = core_check(target, allocation, settings.TC_CORE_TOLERANCE, verbose=options['verbose'])
            results.append((allocation, report))

        if options['format'] == 'json':
            data = [
                {'allocation': AllocationSerializer(allocation).data, 'core': CoreReportSerializer(report).data}
                for allocation, report in results
            ]
            # A single --rule prints one object, a scenario rule list prints a list.
            self.write_json(data[0] if options['rule'] is not None else data)
            return

        for index, (allocation, report) in enumerate(results):
            if index:
                self.stdout.write('')
            self.write_allocation(allocation, report, verbose=options['verbose'])

    def write_allocation(self, allocation, report, verbose=False):
        self.stdout.write(f"rule: {allocation.rule.value}")
        self.print_table(['player', 'payoff'], [[i + 1, fmt(x)] for i, x in enumerate(allocation.payoffs)])
        for key, value in allocation.metadata.items():
            if key == 'phi_closed_form':
                continue
            self.stdout.write(f"{key}: {'undefined' if value is None else fmt(value)}")
        self.write_core_report(report, verbose=verbose)
