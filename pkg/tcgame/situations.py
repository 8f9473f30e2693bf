"""
Transport-choice (TC) situations and the logit market they describe.

A situation theta = (N, p, c, alpha, beta) fixes prices p, unit costs c,
alternative-specific constants alpha and the common price sensitivity beta.
Travellers choose operator i with the multinomial-logit probability
exp(alpha_i - beta p_i) / (1 + D(p)), where D(x) = sum_i exp(alpha_i - beta x_i)
and the 1 is the no-buy option.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .coalitions import check_mask, coalition_members, grand_coalition
from .exceptions import DimensionError, DomainError
from .numerics import SolverConfig, fixed_point, lambert_w0

logger = logging.getLogger('tcgame')

EQUILIBRIUM_TOLERANCE = 1e-8


def _frozen_vector(values, name):
    vector = np.array(values, dtype=float)
    if vector.ndim != 1:
        raise DimensionError(f"{name} must be a vector, got shape {vector.shape}")
    vector.setflags(write=False)
    return vector


@dataclass(frozen=True, eq=False)
class TcSituation:
    """
    One market instance. Vectors are stored as read-only float arrays.

    ``equilibrium=True`` additionally asserts that p solves the Nash
    first-order conditions, which only randomly generated situations claim.
    """
    p: np.ndarray
    c: np.ndarray
    alpha: np.ndarray
    beta: float
    equilibrium: bool = False

    def __post_init__(self):
        for name in ('p', 'c', 'alpha'):
            object.__setattr__(self, name, _frozen_vector(getattr(self, name), name))
        object.__setattr__(self, 'beta', float(self.beta))

        if not len(self.p) == len(self.c) == len(self.alpha):
            raise DimensionError(
                f"p, c and alpha must have equal lengths, got {len(self.p)}, {len(self.c)}, {len(self.alpha)}"
            )
        if len(self.p) == 0:
            raise DimensionError("a situation needs at least one operator")
        if not (np.all(np.isfinite(self.p)) and np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.alpha))):
            raise DomainError("p, c and alpha must be finite")
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise DomainError(f"beta must be a positive number, got {self.beta}")

        if self.equilibrium:
            residual = nash_residual(self)
            if residual > EQUILIBRIUM_TOLERANCE:
                raise DomainError(f"prices are flagged as equilibrium but the Nash residual is {residual:.3e}")

    @property
    def n(self):
        return len(self.p)

    def utilities(self, prices=None):
        """exp(alpha_i - beta x_i) for every operator, at ``prices`` (default p)."""
        prices = self.p if prices is None else np.asarray(prices, dtype=float)
        return np.exp(self.alpha - self.beta * prices)

    def with_prices(self, prices, equilibrium=False):
        return replace(self, p=prices, equilibrium=equilibrium)

    def to_dict(self):
        return {
            'p': self.p.tolist(),
            'c': self.c.tolist(),
            'alpha': self.alpha.tolist(),
            'beta': self.beta,
        }


@dataclass(frozen=True, eq=False)
class MarketState:
    """Shares and profits of every operator at one price vector."""
    prices: np.ndarray
    shares: np.ndarray
    outside_share: float
    profits: np.ndarray

    @property
    def total_share(self):
        return float(self.shares.sum())

    @property
    def total_profit(self):
        return float(self.profits.sum())


class CollaborativeOptimum(NamedTuple):
    prices: np.ndarray
    joint_profit: float


def d_aggregate(theta, coalition, x=None):
    """
    D^M(x) = sum over members i of M of exp(alpha_i - beta x_i).

    ``x`` is a full price vector (default p). The empty coalition gives 0.
    """
    check_mask(coalition, theta.n)
    members = coalition_members(coalition)
    if not members:
        return 0.0
    return float(np.sum(theta.utilities(x)[members]))


def market_state(theta, prices=None):
    """Logit market shares and operator profits at ``prices`` (default: the status quo p)."""
    prices = theta.p if prices is None else _frozen_vector(prices, 'prices')
    if len(prices) != theta.n:
        raise DimensionError(f"expected {theta.n} prices, got {len(prices)}")

    weights = theta.utilities(prices)
    denominator = 1.0 + weights.sum()
    shares = weights / denominator
    profits = (prices - theta.c) * shares
    shares.setflags(write=False)
    profits.setflags(write=False)
    return MarketState(prices=prices, shares=shares, outside_share=1.0 / denominator, profits=profits)


def nash_map(c, alpha, beta):
    """
    Right-hand side of the equilibrium condition

        p_i = c_i + (1 + W(exp(alpha_i - 1 - beta c_i) / A_i(p))) / beta,
        A_i(p) = 1 + sum_{j != i} exp(alpha_j - beta p_j).
    """
    c = np.asarray(c, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    numerator = np.exp(alpha - 1.0 - beta * c)

    def rhs(p):
        weights = np.exp(alpha - beta * p)
        others = 1.0 + weights.sum() - weights
        return c + (1.0 + lambert_w0(numerator / others)) / beta

    return rhs


def nash_residual(theta):
    """max_i |p_i - RHS_i(p)| of the equilibrium condition."""
    rhs = nash_map(theta.c, theta.alpha, theta.beta)
    return float(np.max(np.abs(theta.p - rhs(theta.p))))


def nash_prices(n, c, alpha, beta, config=None):
    """
    Nash-equilibrium prices of n competing operators.

    Solves the simultaneous Lambert-W system by fixed-point iteration,
    starting from c + 2 / beta. Raises ConvergenceError if the solver gives up.
    """
    c = np.asarray(c, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if c.shape != (n,) or alpha.shape != (n,):
        raise DimensionError(f"nash_prices: c and alpha must have length {n}")
    if not beta > 0:
        raise DomainError(f"nash_prices: beta must be positive, got {beta}")

    config = config or SolverConfig()
    prices = fixed_point(nash_map(c, alpha, beta), c + 2.0 / beta, config)
    logger.debug(f"nash_prices: solved {n}-operator equilibrium, margins {np.round(prices - c, 4).tolist()}")
    return prices


def optimal_prices(theta):
    """
    Collaborative optimum of the grand coalition under a fixed total market share:

        p*_i = c_i + ln(D(c) / D(p)) / beta,
        P*   = D(p) / (beta (D(p) + 1)) * ln(D(c) / D(p)).
    """
    grand = grand_coalition(theta.n)
    d_status_quo = d_aggregate(theta, grand, theta.p)
    d_cost = d_aggregate(theta, grand, theta.c)
    log_ratio = math.log(d_cost / d_status_quo)

    prices = theta.c + log_ratio / theta.beta
    joint_profit = d_status_quo / (theta.beta * (d_status_quo + 1.0)) * log_ratio
    return CollaborativeOptimum(prices=prices, joint_profit=joint_profit)


def collaboration_gain(theta):
    """Joint profit at p* minus the summed status-quo profits (never negative)."""
    return optimal_prices(theta).joint_profit - market_state(theta).total_profit


def benchmark_situation(theta):
    """The zero-gain benchmark with constant margin 1 / beta and the same prices p."""
    return TcSituation(p=theta.p, c=theta.p - 1.0 / theta.beta, alpha=theta.alpha, beta=theta.beta)


def coalition_objective(theta, mask):
    """
    Joint profit of coalition ``mask`` when its members charge x and outsiders keep p.

    Returns a vectorized function of an (m, |M|) array of member price rows.
    Unlike the closed form, the logit denominator is recomputed from x.
    """
    members = coalition_members(check_mask(mask, theta.n))
    if not members:
        raise DimensionError("coalition_objective needs a non-empty coalition")
    outsiders = [i for i in range(theta.n) if i not in members]
    outside_weight = float(np.sum(theta.utilities()[outsiders])) if outsiders else 0.0
    alpha = theta.alpha[members]
    cost = theta.c[members]

    def objective(prices):
        prices = np.atleast_2d(prices)
        weights = np.exp(alpha - theta.beta * prices)
        denominator = 1.0 + weights.sum(axis=1) + outside_weight
        return ((prices - cost) * weights).sum(axis=1) / denominator

    return objective
