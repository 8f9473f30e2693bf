"""
Randomized invariant suites over situations drawn from the experiment grid.

Draw counts are reduced unless TC_FULL_SUITES is set.
"""

from functools import lru_cache

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from tcgame.allocation import (
    core_check,
    iprop,
    market_share_price,
    mprop,
    mse,
    mse_delta,
    mse_delta_threshold,
    shapley,
)
from tcgame.coalitions import coalition_members, grand_coalition
from tcgame.exceptions import DegenerateAllocationError
from tcgame.games import build_delta_game, build_game, coalition_value, is_superadditive
from tcgame.numerics import oracle_optimize
from tcgame.services import GridSpec, random_situation, trial_generator
from tcgame.situations import (
    benchmark_situation,
    coalition_objective,
    collaboration_gain,
    d_aggregate,
    market_state,
    nash_residual,
    optimal_prices,
)

SEED = 4242


def draw_count():
    return 10_000 if settings.TC_FULL_SUITES else 1_000


@lru_cache(maxsize=None)
def situations(n, count):
    return tuple(random_situation(trial_generator(SEED + n, index), n) for index in range(count))


class RandomSituationTest(SimpleTestCase):
    def test_equilibrium_and_margins(self):
        for theta in situations(3, draw_count()):
            self.assertLessEqual(nash_residual(theta), 1e-8)
            self.assertTrue(np.all(theta.p - theta.c > 1.0 / theta.beta))

    def test_parameters_on_grid(self):
        grid = GridSpec()
        for theta in situations(3, draw_count()):
            self.assertTrue(set(theta.c.tolist()) <= set(grid.cost_grid))
            self.assertTrue(set(theta.alpha.tolist()) <= set(grid.alpha_grid))
            self.assertIn(theta.beta, grid.beta_grid)


class MarketInvariantTest(SimpleTestCase):
    def test_share_normalization_and_profit(self):
        for theta in situations(3, draw_count()):
            state = market_state(theta)
            self.assertAlmostEqual(state.total_share + state.outside_share, 1.0, places=12)
            self.assertTrue(np.all((state.shares > 0) & (state.shares < 1)))
            np.testing.assert_allclose(state.profits, (theta.p - theta.c) * state.shares, atol=1e-12)

    def test_optimum_keeps_total_share_and_gains(self):
        for theta in situations(3, draw_count()):
            grand = grand_coalition(theta.n)
            optimum = optimal_prices(theta)
            status_quo = d_aggregate(theta, grand)
            self.assertLessEqual(abs(d_aggregate(theta, grand, optimum.prices) - status_quo), 1e-10 * max(1.0, status_quo))
            self.assertGreaterEqual(collaboration_gain(theta), -1e-12)

    def test_benchmark_has_no_gain(self):
        for theta in situations(3, draw_count())[:200]:
            self.assertAlmostEqual(collaboration_gain(benchmark_situation(theta)), 0.0, delta=1e-9)


class GameInvariantTest(SimpleTestCase):
    def test_superadditive(self):
        for n in (3, 4):
            for theta in situations(n, draw_count()):
                self.assertTrue(is_superadditive(build_game(theta)))

    def test_singleton_and_grand_consistency(self):
        for theta in situations(3, draw_count()):
            game = build_game(theta)
            np.testing.assert_allclose(game.singleton_values(), market_state(theta).profits, atol=1e-10)
            self.assertLessEqual(abs(game.grand_value - optimal_prices(theta).joint_profit), 1e-12)


class OracleAgreementTest(SimpleTestCase):
    def test_closed_forms_match_brute_force(self):
        resolution = settings.TC_ORACLE['RESOLUTION']
        for n in (2, 3):
            for theta in situations(n, 50):
                for mask in range(1, 1 << n):
                    members = coalition_members(mask)
                    _, value = oracle_optimize(
                        coalition_objective(theta, mask),
                        d_aggregate(theta, mask),
                        theta.alpha[members],
                        theta.beta,
                        resolution=resolution,
                    )
                    closed_form = coalition_value(theta, mask)
                    self.assertLessEqual(value, closed_form + 1e-9)
                    self.assertAlmostEqual(value, closed_form, delta=1e-3)


class AllocationInvariantTest(SimpleTestCase):
    def test_every_rule_is_efficient(self):
        for theta in situations(3, draw_count()):
            game = build_game(theta)
            for allocation in (mprop(theta, game), shapley(game), mse(theta, game)):
                self.assertAlmostEqual(allocation.total, game.grand_value, delta=1e-9)
            try:
                self.assertAlmostEqual(iprop(game).total, game.grand_value, delta=1e-9 * max(1.0, abs(game.grand_value)))
            except DegenerateAllocationError:
                pass

    def test_mse_is_in_core(self):
        for n in (3, 4, 5):
            for theta in situations(n, draw_count()):
                game = build_game(theta)
                report = core_check(game, mse(theta, game))
                self.assertTrue(report.in_core, f"n={n} {theta.to_dict()} worst {report.worst_violation}")

    def test_mse_exchanges_no_net_share(self):
        for theta in situations(3, draw_count()):
            shares = market_state(theta).shares
            collaborative = market_state(theta, optimal_prices(theta).prices).shares
            self.assertLessEqual(abs(float(np.sum(collaborative - shares))), 1e-12)

    def test_phi_forms_agree(self):
        for theta in situations(3, draw_count()):
            definitional, closed_form = market_share_price(theta, build_game(theta))
            self.assertLessEqual(abs(definitional - closed_form), 1e-10)

    def test_scaled_mse_in_core_up_to_threshold(self):
        for theta in situations(3, draw_count()):
            game = build_game(theta)
            threshold = mse_delta_threshold(theta, game)
            if not 0.0 < threshold < 1.0:
                continue
            for delta in (threshold / 2.0, threshold):
                report = core_check(build_delta_game(game, delta), mse_delta(theta, game, delta))
                self.assertTrue(report.in_core, f"delta={delta} {theta.to_dict()}")
