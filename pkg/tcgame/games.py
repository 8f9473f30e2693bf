"""
Cooperative TC games.

The worth of coalition M is the largest joint profit its members reach by
re-pricing while keeping their total market share fixed and outsiders'
prices frozen. It has the closed form

    v(M) = D^M(p) / (beta (D^N(p) + 1)) * ln(D^M(c) / D^M(p)).

Games are stored densely: ``values[mask]`` for every one of the 2**n masks.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from .coalitions import (
    MAX_PLAYERS,
    check_mask,
    coalition_sizes,
    format_coalition,
    grand_coalition,
    subset_sums,
)
from .exceptions import (
    DegenerateAllocationError,
    DimensionError,
    DomainError,
    EmptyCoalitionError,
    GameKindError,
    GameSizeError,
)
from .situations import d_aggregate

logger = logging.getLogger('tcgame')

PROPERTY_TOLERANCE = 1e-9


class GameKind(str, Enum):
    PLAIN = 'plain'
    DELTA = 'delta'


@dataclass(frozen=True, eq=False)
class Game:
    """A TU game on n players with a read-only value array indexed by coalition mask."""
    n: int
    values: np.ndarray
    kind: GameKind = GameKind.PLAIN
    delta: Optional[float] = None
    source: Optional[object] = None

    def __post_init__(self):
        if not 1 <= self.n <= MAX_PLAYERS:
            raise GameSizeError(f"a game needs between 1 and {MAX_PLAYERS} players, got {self.n}")
        values = np.array(self.values, dtype=float)
        if values.shape != (1 << self.n,):
            raise DimensionError(f"a {self.n}-player game needs {1 << self.n} values, got shape {values.shape}")
        if values[0] != 0.0:
            raise DomainError(f"the empty coalition must be worth 0, got {values[0]}")
        if not np.all(np.isfinite(values)):
            raise DomainError("coalition values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

        kind = GameKind(self.kind)
        object.__setattr__(self, 'kind', kind)
        if kind is GameKind.DELTA:
            if self.delta is None or not 0.0 < self.delta < 1.0:
                raise DomainError(f"a delta game needs delta in (0, 1), got {self.delta}")
            object.__setattr__(self, 'delta', float(self.delta))
        elif self.delta is not None:
            raise GameKindError("a plain game carries no delta")

    @property
    def grand(self):
        return grand_coalition(self.n)

    @property
    def grand_value(self):
        return float(self.values[self.grand])

    def value(self, mask):
        return float(self.values[check_mask(mask, self.n)])

    def singleton_values(self):
        return self.values[[1 << i for i in range(self.n)]]

    def require_plain(self, operation):
        if self.kind is not GameKind.PLAIN:
            raise GameKindError(f"{operation} needs a plain game, got a {self.kind.value} game")


class PropertyReport(NamedTuple):
    """
    Structural properties of a game.

    Witnesses are the first violation in scan order, or None:
    ``monotonic_witness`` is (M, K) with M a strict subset of K and v(M) > v(K);
    ``superadditive_witness`` is disjoint (M, K) with v(M) + v(K) > v(M | K);
    ``convex_witness`` is (i, M, K) with M inside K, i outside K and
    v(M + i) - v(M) > v(K + i) - v(K).
    """
    monotonic: bool
    superadditive: bool
    convex: bool
    monotonic_witness: Optional[tuple]
    superadditive_witness: Optional[tuple]
    convex_witness: Optional[tuple]
    tolerance: float

    def describe(self):
        lines = []
        for name in ('monotonic', 'superadditive', 'convex'):
            holds = getattr(self, name)
            witness = getattr(self, f'{name}_witness')
            line = f"{name}: {'yes' if holds else 'no'}"
            if witness is not None:
                if name == 'convex':
                    player, small, large = witness
                    line += f" (player {player + 1}, M={format_coalition(small)}, K={format_coalition(large)})"
                else:
                    line += f" (M={format_coalition(witness[0])}, K={format_coalition(witness[1])})"
            lines.append(line)
        return lines


def coalition_value(theta, mask):
    """Worth of one non-empty coalition of ``theta``."""
    check_mask(mask, theta.n)
    if mask == 0:
        raise EmptyCoalitionError("the empty coalition has no closed-form worth; it is 0 by definition")
    d_status_quo = d_aggregate(theta, mask, theta.p)
    d_cost = d_aggregate(theta, mask, theta.c)
    d_total = d_aggregate(theta, grand_coalition(theta.n), theta.p)
    return d_status_quo / (theta.beta * (d_total + 1.0)) * math.log(d_cost / d_status_quo)


def build_game(theta):
    """The plain TC game of ``theta``, every coalition evaluated at once."""
    if theta.n > MAX_PLAYERS:
        raise GameSizeError(f"{theta.n} players exceed the enumeration bound of {MAX_PLAYERS}")

    d_status_quo = subset_sums(theta.utilities(theta.p))
    d_cost = subset_sums(theta.utilities(theta.c))
    d_total = d_status_quo[-1]

    values = np.zeros_like(d_status_quo)
    values[1:] = d_status_quo[1:] / (theta.beta * (d_total + 1.0)) * np.log(d_cost[1:] / d_status_quo[1:])
    return Game(n=theta.n, values=values, kind=GameKind.PLAIN, source=theta)


def build_delta_game(game, delta):
    """
    The TC-delta game: every coalition of two or more players gives up a
    fraction ``delta`` of its worth. Singletons and the empty set keep theirs.
    """
    if game.kind is GameKind.DELTA:
        raise GameKindError("the game is already delta-scaled")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")

    sizes = coalition_sizes(game.n)
    values = np.where(sizes >= 2, (1.0 - delta) * game.values, game.values)
    return Game(n=game.n, values=values, kind=GameKind.DELTA, delta=delta, source=game.source)


def max_feasible_delta(game):
    """Largest share of v(N) that can be paid back while every player keeps its stand-alone profit."""
    game.require_plain('max_feasible_delta')
    grand_value = game.grand_value
    if grand_value <= 0.0:
        raise DegenerateAllocationError(f"the delta bound needs v(N) > 0, got {grand_value:.6g}")
    return 1.0 - float(game.singleton_values().sum()) / grand_value


def _first_violation(violations):
    """Smallest (mask, player) over per-player boolean arrays, or None."""
    best = None
    for player, bad in violations:
        hits = np.flatnonzero(bad)
        if hits.size and (best is None or hits[0] < best[0]):
            best = (int(hits[0]), player)
    return best


def _monotonicity_witness(values, masks, n, tolerance):
    # Chains of single-player steps between non-empty coalitions cover every M inside K.
    violations = []
    for player in range(n):
        bit = 1 << player
        bad = ((masks & bit) == 0) & (masks != 0)
        bad &= values > values[masks | bit] + tolerance
        violations.append((player, bad))
    first = _first_violation(violations)
    if first is None:
        return None
    small, player = first
    return small, small | (1 << player)


def _submasks(mask):
    """Every submask of ``mask`` in increasing order."""
    bits = [1 << i for i in range(mask.bit_length()) if mask >> i & 1]
    return subset_sums(bits).astype(np.int64)


def _superadditivity_witness(values, tolerance):
    grand = len(values) - 1
    for first in range(1, len(values)):
        partners = _submasks(grand ^ first)
        partners = partners[partners > first]
        if not partners.size:
            continue
        bad = partners[values[first] + values[partners] > values[first | partners] + tolerance]
        if bad.size:
            return first, int(bad[0])
    return None


def _convexity_witness(values, masks, n, tolerance):
    # Increasing marginals along single-player steps give them for every M inside K.
    for player in range(n):
        bit = 1 << player
        marginal = values[masks | bit] - values
        violations = []
        for other in range(n):
            if other == player:
                continue
            step = 1 << other
            bad = (masks & (bit | step)) == 0
            bad &= marginal > marginal[masks | step] + tolerance
            violations.append((other, bad))
        first = _first_violation(violations)
        if first is not None:
            small, other = first
            return player, small, small | (1 << other)
    return None


def is_superadditive(game, tolerance=PROPERTY_TOLERANCE):
    return _superadditivity_witness(game.values, tolerance) is None


def check_properties(game, tolerance=PROPERTY_TOLERANCE):
    """
    Monotonicity, superadditivity and convexity with additive ``tolerance``.

    Monotonicity compares non-empty coalitions only. Convexity uses
    v(K + i) - v(K) >= v(M + i) - v(M) for all M inside K inside N minus i.
    Both are checked one added player at a time, so the tolerance applies
    per step. Superadditivity enumerates the submasks of each complement.
    """
    masks = np.arange(len(game.values))
    monotone = _monotonicity_witness(game.values, masks, game.n, tolerance)
    superadditive = _superadditivity_witness(game.values, tolerance)
    convex = _convexity_witness(game.values, masks, game.n, tolerance)
    report = PropertyReport(
        monotonic=monotone is None,
        superadditive=superadditive is None,
        convex=convex is None,
        monotonic_witness=monotone,
        superadditive_witness=superadditive,
        convex_witness=convex,
        tolerance=tolerance,
    )
    logger.debug(f"check_properties: {'; '.join(report.describe())}")
    return report
