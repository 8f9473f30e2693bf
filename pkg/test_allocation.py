import numpy as np
from django.test import SimpleTestCase

from tcgame.allocation import (
    Allocation,
    AllocationRule,
    allocate,
    core_check,
    custom_allocation,
    iprop,
    market_share_price,
    mprop,
    mse,
    mse_delta,
    mse_delta_threshold,
    shapley,
)
from tcgame.coalitions import coalition_mask, subset_sums
from tcgame.exceptions import DegenerateAllocationError, DimensionError, DomainError, GameKindError
from tcgame.games import Game, build_delta_game, build_game
from tcgame.situations import TcSituation, market_state

GOLDEN = 5e-4


def three_operators():
    return TcSituation(p=[6.0, 8.0, 15.0], c=[8.0, 4.0, 1.0], alpha=[1.0, 0.5, 1.5], beta=0.36)


class ProportionalRulesTest(SimpleTestCase):
    def setUp(self):
        self.theta = three_operators()
        self.game = build_game(self.theta)

    def test_iprop(self):
        allocation = iprop(self.game)
        self.assertIs(allocation.rule, AllocationRule.IPROP)
        np.testing.assert_allclose(allocation.payoffs, [-42.101, 24.859, 19.029], atol=GOLDEN)
        self.assertAlmostEqual(allocation.total, self.game.grand_value, places=9)

    def test_iprop_degenerate(self):
        with self.assertRaises(DegenerateAllocationError):
            iprop(Game(n=2, values=[0.0, 1.0, -1.0, 3.0]))

    def test_iprop_single_and_symmetric(self):
        self.assertEqual(iprop(Game(n=1, values=[0.0, 2.5])).payoffs.tolist(), [2.5])
        np.testing.assert_allclose(iprop(Game(n=2, values=[0.0, 1.0, 1.0, 5.0])).payoffs, [2.5, 2.5])

    def test_mprop(self):
        allocation = mprop(self.theta, self.game)
        np.testing.assert_allclose(allocation.payoffs, [1.314, 0.388, 0.085], atol=GOLDEN)
        self.assertAlmostEqual(allocation.total, self.game.grand_value, places=9)

    def test_mprop_equal_shares(self):
        theta = TcSituation(p=[3.0, 3.0], c=[1.0, 2.0], alpha=[1.0, 1.0], beta=0.5)
        game = build_game(theta)
        allocation = mprop(theta, game)
        self.assertAlmostEqual(allocation.payoffs[0], allocation.payoffs[1], places=12)

    def test_mprop_size_mismatch(self):
        with self.assertRaises(DimensionError):
            mprop(TcSituation(p=[1.0], c=[0.5], alpha=[0.0], beta=1.0), self.game)


class ShapleyTest(SimpleTestCase):
    def test_three_operators(self):
        game = build_game(three_operators())
        allocation = shapley(game)
        np.testing.assert_allclose(allocation.payoffs, [0.407, 0.392, 0.989], atol=GOLDEN)
        self.assertAlmostEqual(allocation.total, game.grand_value, places=12)

    def test_single_player(self):
        self.assertEqual(shapley(Game(n=1, values=[0.0, 4.0])).payoffs.tolist(), [4.0])

    def test_additive_game(self):
        weights = [0.5, -1.0, 2.0, 3.5]
        np.testing.assert_allclose(shapley(Game(n=4, values=subset_sums(weights))).payoffs, weights, atol=1e-12)

    def test_null_player(self):
        # Player 3 adds nothing to any coalition.
        values = [0.0, 1.0, 2.0, 6.0, 0.0, 1.0, 2.0, 6.0]
        payoffs = shapley(Game(n=3, values=values)).payoffs
        self.assertAlmostEqual(payoffs[2], 0.0, places=12)
        np.testing.assert_allclose(payoffs[:2], [2.5, 3.5])


class MarketShareExchangeTest(SimpleTestCase):
    def setUp(self):
        self.theta = three_operators()
        self.game = build_game(self.theta)

    def test_three_operators(self):
        allocation = mse(self.theta, self.game)
        self.assertAlmostEqual(allocation.metadata['phi'], 3.202, delta=1e-3)
        np.testing.assert_allclose(allocation.payoffs, [0.738, 0.296, 0.753], atol=GOLDEN)
        self.assertAlmostEqual(allocation.total, self.game.grand_value, places=9)

    def test_phi_forms_agree(self):
        definitional, closed_form = market_share_price(self.theta, self.game)
        self.assertAlmostEqual(definitional, closed_form, delta=1e-10)

    def test_constant_margin_one_over_beta(self):
        theta = TcSituation(p=[5.0, 7.0], c=[5.0 - 1 / 0.5, 7.0 - 1 / 0.5], alpha=[1.0, 2.0], beta=0.5)
        allocation = mse(theta, build_game(theta))
        self.assertAlmostEqual(allocation.metadata['phi'], 0.0, places=10)
        np.testing.assert_allclose(allocation.payoffs, market_state(theta).profits, atol=1e-10)

    def test_in_core(self):
        self.assertTrue(core_check(self.game, mse(self.theta, self.game)).in_core)

    def test_needs_plain_game(self):
        with self.assertRaises(GameKindError):
            mse(self.theta, build_delta_game(self.game, 0.1))


class DeltaMarketShareExchangeTest(SimpleTestCase):
    def setUp(self):
        self.theta = three_operators()
        self.game = build_game(self.theta)

    def test_scaled_payoffs(self):
        allocation = mse_delta(self.theta, self.game, 0.08)
        self.assertIs(allocation.rule, AllocationRule.MSE_DELTA)
        np.testing.assert_allclose(allocation.payoffs, [0.679, 0.272, 0.693], atol=GOLDEN)
        self.assertEqual(allocation.metadata['delta'], 0.08)
        self.assertAlmostEqual(allocation.metadata['threshold'], 0.124, delta=GOLDEN)

    def test_threshold(self):
        self.assertAlmostEqual(mse_delta_threshold(self.theta, self.game), 0.124, delta=GOLDEN)

    def test_in_core_of_delta_game(self):
        report = core_check(build_delta_game(self.game, 0.08), mse_delta(self.theta, self.game, 0.08))
        self.assertTrue(report.in_core)

    def test_small_delta_approaches_mse(self):
        plain = mse(self.theta, self.game).payoffs
        np.testing.assert_allclose(mse_delta(self.theta, self.game, 1e-9).payoffs, plain, atol=1e-8)

    def test_delta_range(self):
        for delta in (0.0, 1.0, 2.0):
            with self.assertRaises(DomainError):
                mse_delta(self.theta, self.game, delta)

    def test_threshold_zero_when_mse_equals_stand_alone(self):
        theta = TcSituation(p=[5.0, 7.0], c=[3.0, 5.0], alpha=[1.0, 2.0], beta=0.5)
        self.assertAlmostEqual(mse_delta_threshold(theta, build_game(theta)), 0.0, places=10)


class CoreCheckTest(SimpleTestCase):
    def setUp(self):
        self.theta = three_operators()
        self.game = build_game(self.theta)

    def test_iprop_blocked_by_first_two_operators(self):
        report = core_check(self.game, iprop(self.game), verbose=True)
        self.assertFalse(report.in_core)
        self.assertFalse(report.individually_rational)
        self.assertIn(coalition_mask([0, 1]), [violation.mask for violation in report.violations])
        pair = next(v for v in report.violations if v.mask == coalition_mask([0, 1]))
        self.assertAlmostEqual(pair.deficit, 0.230 + 17.242, delta=5e-3)

    def test_mprop_blocked_by_third_operator(self):
        report = core_check(self.game, mprop(self.theta, self.game), verbose=True)
        self.assertFalse(report.in_core)
        self.assertIn(coalition_mask([2]), [violation.mask for violation in report.violations])

    def test_shapley_not_in_core(self):
        report = core_check(self.game, shapley(self.game))
        self.assertFalse(report.in_core)
        self.assertEqual(report.violations, ())

    def test_worst_violation_is_largest_deficit(self):
        report = core_check(self.game, iprop(self.game), verbose=True)
        deficits = [violation.deficit for violation in report.violations]
        self.assertEqual(report.worst_violation.deficit, max(deficits))

    def test_inefficient_allocation(self):
        payoffs = mse(self.theta, self.game).payoffs + 0.01
        report = core_check(self.game, custom_allocation(self.game, payoffs))
        self.assertFalse(report.in_core)
        self.assertAlmostEqual(report.efficiency_gap, 0.03, places=12)

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionError):
            core_check(self.game, Allocation(payoffs=[1.0, 2.0], rule=AllocationRule.CUSTOM))
        with self.assertRaises(DimensionError):
            custom_allocation(self.game, [1.0])


class AllocateTest(SimpleTestCase):
    def test_dispatch(self):
        theta = three_operators()
        game = build_game(theta)
        for rule in ('I-PROP', 'M-PROP', 'SHAPLEY', 'MSE'):
            self.assertEqual(allocate(rule, theta, game).rule.value, rule)
        self.assertIs(allocate('MSE-DELTA', theta, game, 0.08).rule, AllocationRule.MSE_DELTA)
        with self.assertRaises(DomainError):
            allocate('MSE-DELTA', theta, game)

    def test_rule_names(self):
        self.assertIs(AllocationRule.from_name('mse-delta'), AllocationRule.MSE_DELTA)
        with self.assertRaises(DomainError):
            AllocationRule.from_name('nucleolus')
