"""
Allocation rules for TC games and the core-membership test.

Rules:
- I-PROP: split v(N) in proportion to stand-alone profits v({i}).
- M-PROP: split v(N) in proportion to status-quo market shares.
- SHAPLEY: average marginal contribution over all orderings.
- MSE: collaborative profit plus a transfer of phi per unit of market share
  given up, where phi is the extra collaborative return per unit of share.
- MSE-DELTA: (1 - delta) MSE, for the game that pays a fraction delta back.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from .coalitions import coalition_sizes, format_coalition, subset_sums
from .exceptions import DegenerateAllocationError, DimensionError, DomainError
from .situations import benchmark_situation, market_state, optimal_prices

logger = logging.getLogger('tcgame')

CORE_TOLERANCE = 1e-9
DEGENERATE_THRESHOLD = 1e-12
PHI_AGREEMENT = 1e-10


class AllocationRule(str, Enum):
    IPROP = 'I-PROP'
    MPROP = 'M-PROP'
    SHAPLEY = 'SHAPLEY'
    MSE = 'MSE'
    MSE_DELTA = 'MSE-DELTA'
    CUSTOM = 'CUSTOM'

    @classmethod
    def from_name(cls, name):
        """Accepts tags in any case, e.g. ``mse-delta`` or ``I-PROP``."""
        try:
            return cls(name.strip().upper())
        except ValueError:
            raise DomainError(f"unknown allocation rule '{name}'") from None


# Rules the Monte Carlo harness can evaluate on a plain game
EXPERIMENT_RULES = (AllocationRule.IPROP, AllocationRule.MPROP, AllocationRule.SHAPLEY, AllocationRule.MSE)


@dataclass(frozen=True, eq=False)
class Allocation:
    payoffs: np.ndarray
    rule: AllocationRule
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        payoffs = np.array(self.payoffs, dtype=float)
        if payoffs.ndim != 1:
            raise DimensionError(f"payoffs must be a vector, got shape {payoffs.shape}")
        payoffs.setflags(write=False)
        object.__setattr__(self, 'payoffs', payoffs)
        object.__setattr__(self, 'rule', AllocationRule(self.rule))

    @property
    def total(self):
        return float(self.payoffs.sum())


class CoreViolation(NamedTuple):
    mask: int
    deficit: float

    def __str__(self):
        return f"{format_coalition(self.mask)} short by {self.deficit:.3f}"


class CoreReport(NamedTuple):
    """
    Outcome of ``core_check``.

    ``worst_violation`` is the coalition with the largest deficit
    v(M) - x(M), whether or not it exceeds the tolerance. ``violations``
    lists every coalition beyond tolerance, but only for verbose checks.
    """
    in_core: bool
    worst_violation: CoreViolation
    tolerance: float
    efficiency_gap: float
    individually_rational: bool
    violations: tuple = ()


def _check_size(game, theta):
    if theta.n != game.n:
        raise DimensionError(f"situation has {theta.n} operators but the game has {game.n} players")


def iprop(game):
    """Individual-proportional rule. Undefined when the stand-alone profits sum to zero."""
    singles = game.singleton_values()
    denominator = float(singles.sum())
    if abs(denominator) < DEGENERATE_THRESHOLD:
        raise DegenerateAllocationError(
            f"I-PROP is undefined: stand-alone profits sum to {denominator:.3e}"
        )
    return Allocation(payoffs=singles / denominator * game.grand_value, rule=AllocationRule.IPROP)


def mprop(theta, game):
    """Market-share-proportional rule."""
    _check_size(game, theta)
    shares = market_state(theta).shares
    return Allocation(payoffs=shares / shares.sum() * game.grand_value, rule=AllocationRule.MPROP)


def shapley(game):
    """Exact Shapley value by enumeration of all coalitions with factorial weights."""
    n = game.n
    sizes = coalition_sizes(n)
    weights = np.array([math.factorial(s) * math.factorial(n - 1 - s) for s in range(n)], dtype=float)
    weights /= math.factorial(n)

    masks = np.arange(len(game.values))
    payoffs = np.empty(n)
    for player in range(n):
        bit = 1 << player
        without = masks[(masks & bit) == 0]
        marginal = game.values[without | bit] - game.values[without]
        payoffs[player] = float(np.dot(weights[sizes[without]], marginal))
    return Allocation(payoffs=payoffs, rule=AllocationRule.SHAPLEY)


def market_share_price(theta, game):
    """
    phi, the extra collaborative return per unit of market share.

    Returns (definitional, closed_form). The definitional value compares v(N)
    with the zero-gain benchmark's grand-coalition worth; the closed form is
    (ln(D(c) / D(p)) - 1) / beta.
    """
    state = market_state(theta)
    total_share = state.total_share
    benchmark_value = optimal_prices(benchmark_situation(theta)).joint_profit
    definitional = (game.grand_value - benchmark_value) / total_share

    utilities_cost = theta.utilities(theta.c).sum()
    utilities_status_quo = theta.utilities(theta.p).sum()
    closed_form = (math.log(utilities_cost / utilities_status_quo) - 1.0) / theta.beta
    return definitional, closed_form


def mse(theta, game):
    """
    Market share exchange rule.

    MSE_i = (p*_i - c_i) s*_i - phi (s*_i - s_i): the profit operator i makes
    at the collaborative prices, corrected by phi for every unit of market
    share it gains (pays) or gives up (receives).
    """
    game.require_plain('MSE')
    _check_size(game, theta)

    optimum = optimal_prices(theta)
    collaborative = market_state(theta, optimum.prices)
    status_quo = market_state(theta)
    phi, phi_closed_form = market_share_price(theta, game)
    if abs(phi - phi_closed_form) > PHI_AGREEMENT * (1.0 + abs(phi)):
        logger.warning(f"mse: definitional phi {phi!r} and closed form {phi_closed_form!r} disagree")

    payoffs = collaborative.profits - phi * (collaborative.shares - status_quo.shares)
    return Allocation(
        payoffs=payoffs,
        rule=AllocationRule.MSE,
        metadata={'phi': phi, 'phi_closed_form': phi_closed_form},
    )


def mse_delta_threshold(theta, game):
    """1 - max_i v({i}) / MSE_i: up to this delta, (1 - delta) MSE stays in the core of the delta game."""
    payoffs = mse(theta, game).payoffs
    if np.any(np.abs(payoffs) < DEGENERATE_THRESHOLD):
        raise DegenerateAllocationError("the delta threshold is undefined: an MSE payoff is zero")
    return 1.0 - float(np.max(game.singleton_values() / payoffs))


def mse_delta(theta, game, delta):
    """(1 - delta) MSE of the plain game, an allocation for its delta game."""
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    base = mse(theta, game)
    try:
        threshold = mse_delta_threshold(theta, game)
    except DegenerateAllocationError:
        threshold = None
    return Allocation(
        payoffs=(1.0 - delta) * base.payoffs,
        rule=AllocationRule.MSE_DELTA,
        metadata={'phi': base.metadata['phi'], 'delta': float(delta), 'threshold': threshold},
    )


def custom_allocation(game, payoffs):
    allocation = Allocation(payoffs=payoffs, rule=AllocationRule.CUSTOM)
    if len(allocation.payoffs) != game.n:
        raise DimensionError(f"expected {game.n} payoffs, got {len(allocation.payoffs)}")
    return allocation


def allocate(rule, theta, game, delta=None):
    """
    Evaluate ``rule`` on the plain ``game`` of ``theta``.

    MSE-DELTA needs ``delta``; its allocation belongs to the delta game.
    """
    rule = AllocationRule(rule)
    if rule is AllocationRule.IPROP:
        return iprop(game)
    if rule is AllocationRule.MPROP:
        return mprop(theta, game)
    if rule is AllocationRule.SHAPLEY:
        return shapley(game)
    if rule is AllocationRule.MSE:
        return mse(theta, game)
    if rule is AllocationRule.MSE_DELTA:
        if delta is None:
            raise DomainError("MSE-DELTA needs a delta")
        return mse_delta(theta, game, delta)
    raise DomainError(f"{rule.value} is not a computable rule")


def core_check(game, allocation, tolerance=CORE_TOLERANCE, verbose=False):
    """
    Test efficiency and coalitional stability of ``allocation`` in ``game``.

    Every one of the 2**n coalitions is compared at once through subset
    sums of the payoffs.
    """
    payoffs = allocation.payoffs
    if len(payoffs) != game.n:
        raise DimensionError(f"allocation has {len(payoffs)} payoffs but the game has {game.n} players")

    deficits = game.values - subset_sums(payoffs)
    worst_mask = 1 + int(np.argmax(deficits[1:]))
    worst = CoreViolation(mask=worst_mask, deficit=float(deficits[worst_mask]))

    efficiency_gap = float(payoffs.sum()) - game.grand_value
    singleton_deficits = game.singleton_values() - payoffs
    stable = worst.deficit <= tolerance
    in_core = stable and abs(efficiency_gap) <= tolerance

    violations = ()
    if verbose:
        bad = np.flatnonzero(deficits > tolerance)
        violations = tuple(CoreViolation(mask=int(mask), deficit=float(deficits[mask])) for mask in bad)

    return CoreReport(
        in_core=in_core,
        worst_violation=worst,
        tolerance=tolerance,
        efficiency_gap=efficiency_gap,
        individually_rational=bool(np.all(singleton_deficits <= tolerance)),
        violations=violations,
    )
