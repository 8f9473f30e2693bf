from tcgame.management.base import TcCommand, fmt, fmt_vector
from tcgame.serializers import TcSituationSerializer
from tcgame.situations import collaboration_gain, market_state, nash_residual, optimal_prices


class Command(TcCommand):
    help = 'Status-quo market shares and profits, and the collaborative optimum of the grand coalition'

    def add_arguments(self, parser):
        self.add_scenario_argument(parser)
        self.add_format_argument(parser)

    def run(self, *args, **options):
        theta = self.load_scenario(options['scenario']).situation
        status_quo = market_state(theta)
        optimum = optimal_prices(theta)
        collaborative = market_state(theta, optimum.prices)
        gain = collaboration_gain(theta)

        if options['format'] == 'json':
            self.write_json({
                'situation': TcSituationSerializer(theta).data,
                'status_quo': {
                    'shares': status_quo.shares.tolist(),
                    'outside_share': status_quo.outside_share,
                    'profits': status_quo.profits.tolist(),
                },
                'optimum': {
                    'prices': optimum.prices.tolist(),
                    'shares': collaborative.shares.tolist(),
                    'profits': collaborative.profits.tolist(),
                    'joint_profit': optimum.joint_profit,
                },
                'collaboration_gain': gain,
                'nash_residual': nash_residual(theta),
            })
            return

        rows = [
            [i + 1, fmt(theta.p[i]), fmt(theta.c[i]), fmt(status_quo.shares[i]), fmt(status_quo.profits[i]),
             fmt(optimum.prices[i]), fmt(collaborative.shares[i]), fmt(collaborative.profits[i])]
            for i in range(theta.n)
        ]
        self.print_table(['operator', 'p', 'c', 'share', 'profit', 'p*', 'share*', 'profit*'], rows)
        self.stdout.write('')
        self.stdout.write(f"status-quo shares:  {fmt_vector(status_quo.shares)}")
        self.stdout.write(f"status-quo profits: {fmt_vector(status_quo.profits)}")
        self.stdout.write(f"optimal prices p*:  {fmt_vector(optimum.prices)}")
        self.stdout.write(f"joint profit P*:    {fmt(optimum.joint_profit)}")
        self.stdout.write(f"collaboration gain: {fmt(gain)}")
