from tcgame.coalitions import coalition_sizes, format_coalition
from tcgame.games import build_delta_game, build_game, check_properties
from tcgame.management.base import TcCommand, fmt, open_unit_interval
from tcgame.serializers import GameSerializer


class Command(TcCommand):
    help = 'Coalition values of the TC game, or of its delta game with --delta'

    def add_arguments(self, parser):
        self.add_scenario_argument(parser)
        parser.add_argument('--delta', type=open_unit_interval, help='Share of coalition worth paid back, in (0, 1)')
        parser.add_argument('--properties', action='store_true',
                            help='Also report monotonicity, superadditivity and convexity')
        self.add_format_argument(parser)

    def run(self, *args, **options):
        scenario = self.load_scenario(options['scenario'])
        game = build_game(scenario.situation)
        delta = self.resolve_delta(options['delta'], scenario)
        if delta is not None:
            game = build_delta_game(game, delta)
        properties = check_properties(game) if options['properties'] else None

        if options['format'] == 'json':
            data = dict(GameSerializer(game).data)
            if properties is not None:
                data['properties'] = {
                    'monotonic': properties.monotonic,
                    'superadditive': properties.superadditive,
                    'convex': properties.convex,
                }
            self.write_json(data)
            return

        sizes = coalition_sizes(game.n)
        order = sorted(range(len(game.values)), key=lambda mask: (sizes[mask], mask))
        title = f"delta game, delta = {delta}" if delta is not None else 'game'
        self.stdout.write(f"{game.n}-player {title}")
        self.print_table(['coalition', 'value'], [[format_coalition(mask), fmt(game.values[mask])] for mask in order])
        if properties is not None:
            self.stdout.write('')
            for line in properties.describe():
                self.stdout.write(line)
