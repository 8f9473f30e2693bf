from django.conf import settings

from tcgame.allocation import core_check, custom_allocation
from tcgame.games import build_delta_game, build_game
from tcgame.management.base import RULE_CHOICES, TcCommand, fmt_vector, open_unit_interval
from tcgame.serializers import CoreReportSerializer


class Command(TcCommand):
    help = 'Test whether rule-generated or hand-written allocations lie in the core'

    def add_arguments(self, parser):
        self.add_scenario_argument(parser)
        source = parser.add_mutually_exclusive_group()
        source.add_argument('--payoffs', type=float, nargs='+', help='Explicit payoff per player')
        source.add_argument('--rule', type=str.lower, choices=RULE_CHOICES,
                            help='Allocation rule; without --payoffs or --rule the scenario rules are checked')
        parser.add_argument('--delta', type=open_unit_interval,
                            help='Check custom payoffs against the delta game; default delta for mse-delta')
        parser.add_argument('--tolerance', type=float, default=None, help='Absolute core tolerance')
        parser.add_argument('--verbose', action='store_true', help='List every violated coalition')
        self.add_format_argument(parser)

    def run(self, *args, **options):
        scenario = self.load_scenario(options['scenario'])
        theta = scenario.situation
        game = build_game(theta)
        tolerance = options['tolerance'] if options['tolerance'] is not None else settings.TC_CORE_TOLERANCE

        if options['payoffs'] is not None:
            allocation = custom_allocation(game, options['payoffs'])
            target = build_delta_game(game, options['delta']) if options['delta'] is not None else game
            checks = [(allocation, target)]
        else:
            delta = self.resolve_delta(options['delta'], scenario)
            checks = [
                self.evaluate_rule(rule, theta, game, delta)
                for rule in self.resolve_rules(options['rule'], scenario)
            ]

        results = [
            (allocation, core_check(target, allocation, tolerance, verbose=options['verbose']))
            for allocation, target in checks
        ]

        if options['format'] == 'json':
            data = [CoreReportSerializer(report).data for _, report in results]
            from_scenario = options['payoffs'] is None and options['rule'] is None
            self.write_json(data if from_scenario else data[0])
            return

        for index, (allocation, report) in enumerate(results):
            if index:
                self.stdout.write('')
            self.stdout.write(f"{allocation.rule.value} {fmt_vector(allocation.payoffs)}")
            self.write_core_report(report, verbose=options['verbose'])
