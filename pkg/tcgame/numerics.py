"""
Scalar special functions and generic solvers shared by the tcgame modules.

- ``lambert_w0``: principal branch of the Lambert W function (Halley iteration).
- ``fixed_point``: damped fixed-point iteration with automatic step halving.
- ``oracle_optimize``: brute-force maximizer over the market-share simplex,
  used as an independent check of the closed-form optima.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceError, DimensionError, DomainError

logger = logging.getLogger('tcgame')

BRANCH_POINT = -math.exp(-1.0)
_MIN_DAMPING = 1e-6
_MAX_ORACLE_POINTS = 10_000_000


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rule and step size for ``fixed_point``."""
    tolerance: float = 1e-10
    max_iterations: int = 10_000
    damping: float = 1.0

    def __post_init__(self):
        if not self.tolerance > 0:
            raise DomainError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise DomainError(f"max_iterations must be at least 1, got {self.max_iterations}")
        if not 0 < self.damping <= 1:
            raise DomainError(f"damping must lie in (0, 1], got {self.damping}")


def lambert_w0(x, tolerance=1e-12, max_iterations=100):
    """
    Principal branch W0 of the Lambert W function, i.e. w with w * exp(w) = x.

    Accepts a scalar or an array; a scalar input returns a Python float.
    Seeds with log(1 + x) for x >= 0 and with the branch-point series
    -1 + q - q^2/3 + 11 q^3 / 72, q = sqrt(2 (e x + 1)), for x < 0, then runs
    Halley's method until the relative step drops below ``tolerance``. An
    iterate whose residual is already at rounding level is accepted as is.
    """
    values = np.asarray(x, dtype=float)
    shape = values.shape
    values = np.atleast_1d(values).ravel()

    if not np.all(np.isfinite(values)):
        raise DomainError("lambert_w0 is only defined for finite arguments")
    if np.any(values < BRANCH_POINT - 1e-15):
        raise DomainError(f"lambert_w0 requires x >= -1/e, got min(x) = {values.min()!r}")
    values = np.maximum(values, BRANCH_POINT)

    w = np.empty_like(values)
    positive = values >= 0.0
    w[positive] = np.log1p(values[positive])
    q = np.sqrt(np.maximum(2.0 * (math.e * values[~positive] + 1.0), 0.0))
    w[~positive] = -1.0 + q - q * q / 3.0 + 11.0 / 72.0 * q ** 3

    # At the branch point itself W = -1 and Halley's denominator vanishes.
    active = math.e * values + 1.0 > 1e-15
    w[~active] = -1.0

    # Near the branch point Halley's step amplifies rounding noise in the
    # residual, so also stop once the residual is at rounding level or the
    # step has stopped shrinking.
    floor = 4.0 * np.finfo(float).eps * np.maximum(1.0, np.abs(values))
    last_step = np.full_like(values, np.inf)
    for _ in range(max_iterations):
        if not active.any():
            break
        indices = np.flatnonzero(active)
        wa = w[indices]
        ew = np.exp(wa)
        f = wa * ew - values[indices]
        settled = np.abs(f) <= floor[indices]
        wp1 = wa + 1.0
        step = f / (ew * wp1 - (wa + 2.0) * f / (2.0 * wp1))
        small = np.abs(f) <= tolerance * np.maximum(1.0, np.abs(values[indices]))
        stalled = small & (np.abs(step) >= last_step[indices])
        moving = ~(settled | stalled)
        w[indices[moving]] = wa[moving] - step[moving]
        last_step[indices] = np.abs(step)
        done = settled | stalled | (np.abs(step) <= tolerance * (1.0 + np.abs(w[indices])))
        active[indices[done]] = False

    if active.any():
        worst = float(np.max(np.abs(w[active] * np.exp(w[active]) - values[active])))
        raise ConvergenceError("lambert_w0: Halley iteration did not converge", max_iterations, worst)

    w = np.maximum(w, -1.0)

    if shape == ():
        return float(w[0])
    return w.reshape(shape)


def fixed_point(mapping, start, config=None):
    """
    Solve x = mapping(x) by damped iteration x <- (1 - d) x + d mapping(x).

    The damping factor d starts at ``config.damping`` and is halved whenever
    the sup-norm residual grows. Returns the first iterate whose residual
    ||mapping(x) - x||_inf is within ``config.tolerance``.
    """
    config = config or SolverConfig()
    x = np.atleast_1d(np.array(start, dtype=float))
    damping = config.damping
    previous = math.inf
    residual = math.inf

    for iteration in range(1, config.max_iterations + 1):
        image = np.atleast_1d(np.asarray(mapping(x), dtype=float))
        if image.shape != x.shape:
            raise DimensionError(f"fixed_point: map returned shape {image.shape}, expected {x.shape}")

        residual = float(np.max(np.abs(image - x)))
        if not math.isfinite(residual):
            raise ConvergenceError("fixed_point: residual became non-finite", iteration, residual)
        if residual <= config.tolerance:
            logger.debug(f"fixed_point: converged after {iteration} iterations (residual {residual:.2e})")
            return x

        if residual > previous:
            damping = max(damping / 2.0, _MIN_DAMPING)
        previous = residual
        x = (1.0 - damping) * x + damping * image

    raise ConvergenceError("fixed_point: no convergence", config.max_iterations, residual)


def oracle_optimize(objective, share_budget, alphas, beta, resolution=200, rounds=3, shrink=10.0):
    """
    Brute-force maximizer of ``objective`` subject to sum_i exp(alpha_i - beta x_i) = share_budget.

    Feasible prices are parametrized by weights w on the simplex scaled to
    ``share_budget``, with x_i = (alpha_i - ln w_i) / beta, so every candidate
    is feasible by construction. Each round evaluates a grid of ``resolution``
    cell centres per free weight and the next round searches a box ``shrink``
    times narrower around the best point found.

    ``objective`` is vectorized: it receives an (m, k) array of candidate
    price rows and returns m objective values.

    Returns (best_prices, best_value).
    """
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    if alphas.ndim != 1 or alphas.size == 0:
        raise DimensionError("oracle_optimize: alphas must be a non-empty vector")
    if not share_budget > 0:
        raise DomainError(f"oracle_optimize: share_budget must be positive, got {share_budget}")
    if not beta > 0:
        raise DomainError(f"oracle_optimize: beta must be positive, got {beta}")
    if resolution < 100:
        raise DomainError(f"oracle_optimize: resolution must be at least 100, got {resolution}")

    k = alphas.size
    free = k - 1
    if resolution ** free > _MAX_ORACLE_POINTS:
        raise DomainError(f"oracle_optimize: a {k}-player grid at resolution {resolution} is too large")

    def evaluate(fractions):
        prices = (alphas - np.log(share_budget * fractions)) / beta
        values = np.asarray(objective(prices), dtype=float)
        if values.shape != (fractions.shape[0],):
            raise DimensionError(f"oracle_optimize: objective returned shape {values.shape}")
        return prices, values

    if free == 0:
        prices, values = evaluate(np.ones((1, 1)))
        return prices[0], float(values[0])

    lower = np.zeros(free)
    upper = np.ones(free)
    best_prices, best_value, best_point = None, -math.inf, None

    for _ in range(rounds):
        axes = [lo + (np.arange(resolution) + 0.5) * (hi - lo) / resolution for lo, hi in zip(lower, upper)]
        grid = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1).reshape(-1, free)
        last = 1.0 - grid.sum(axis=1)
        feasible = last > 0.0
        if not feasible.any():
            break
        points = grid[feasible]
        fractions = np.column_stack([points, last[feasible]])
        prices, values = evaluate(fractions)
        values = np.where(np.isfinite(values), values, -math.inf)

        index = int(np.argmax(values))
        if values[index] > best_value:
            best_value = float(values[index])
            best_prices = prices[index]
            best_point = points[index]

        width = (upper - lower) / shrink
        lower = np.clip(best_point - width / 2.0, 0.0, 1.0)
        upper = np.clip(best_point + width / 2.0, 0.0, 1.0)

    return best_prices, best_value
