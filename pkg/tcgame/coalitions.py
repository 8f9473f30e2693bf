"""
Coalitions as bit masks over the player set.

Bit i of a CoalitionMask is set when player i (0-based) belongs to the
coalition. Dense per-coalition arrays are indexed by mask, so index 0 is the
empty coalition and index 2**n - 1 is the grand coalition.
"""

import numpy as np

from .exceptions import DimensionError, GameSizeError

CoalitionMask = int

MAX_PLAYERS = 24


def grand_coalition(n):
    return (1 << n) - 1


def check_mask(mask, n):
    if not 0 <= mask < (1 << n):
        raise DimensionError(f"coalition mask {mask} is not a subset of {n} players")
    return mask


def coalition_mask(players):
    """Mask of the given 0-based player indices."""
    mask = 0
    for player in players:
        mask |= 1 << int(player)
    return mask


def coalition_members(mask):
    """0-based player indices of ``mask`` in increasing order."""
    members = []
    index = 0
    while mask:
        if mask & 1:
            members.append(index)
        mask >>= 1
        index += 1
    return members


def format_coalition(mask):
    """Human-readable coalition with 1-based players, e.g. ``{1,3}``; the empty one is ``{}``."""
    return '{' + ','.join(str(i + 1) for i in coalition_members(mask)) + '}'


def subset_sums(weights):
    """
    Array s of length 2**n with s[mask] = sum of weights over the members of mask.

    Built by doubling: the block of masks containing player i is the block
    without it shifted by weights[i].
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1:
        raise DimensionError("subset_sums expects a vector of per-player weights")
    if weights.size > MAX_PLAYERS:
        raise GameSizeError(f"{weights.size} players exceed the enumeration bound of {MAX_PLAYERS}")
    sums = np.zeros(1)
    for weight in weights:
        sums = np.concatenate([sums, sums + weight])
    return sums


def coalition_sizes(n):
    """Array of length 2**n with the number of members of each mask."""
    return subset_sums(np.ones(n)).astype(int)
