"""Coalitions as machine-word bit sets.

A coalition over ``n`` players is a Python ``int`` (or ``np.int64`` inside
arrays) whose bit ``i`` is set iff player ``i`` belongs to it. ``n`` is capped
at 32, so every coalition fits in the low half of a signed 64-bit word and
numpy bit operations never see the sign bit.

Text form is a bitstring of length ``n`` with player 0 as the leftmost
character, e.g. ``{0, 2}`` over 4 players is ``"1010"``.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable

import numpy as np

from .errors import ParameterError

MAX_PLAYERS = 32

_BYTE_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


def check_players(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise ParameterError(f"player count must be an integer, got {n!r}")
    n = int(n)
    if not 1 <= n <= MAX_PLAYERS:
        raise ParameterError(f"player count must lie in [1, {MAX_PLAYERS}], got {n}")
    return n


def check_coalition(mask: int, n: int) -> int:
    mask = int(mask)
    if mask < 0 or mask >> n:
        raise ParameterError(f"coalition {mask:#x} has bits outside players 0..{n - 1}")
    return mask


def popcount(mask: int) -> int:
    return int(mask).bit_count()


def popcount_array(masks) -> np.ndarray:
    """Vectorised population count for non-negative masks below 2**32."""
    m = np.asarray(masks, dtype=np.int64)
    return (
        _BYTE_POPCOUNT[m & 0xFF]
        + _BYTE_POPCOUNT[(m >> 8) & 0xFF]
        + _BYTE_POPCOUNT[(m >> 16) & 0xFF]
        + _BYTE_POPCOUNT[(m >> 24) & 0xFF]
    )


def from_players(players: Iterable[int]) -> int:
    mask = 0
    for p in players:
        mask |= 1 << int(p)
    return mask


def to_players(mask: int) -> tuple[int, ...]:
    mask = int(mask)
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def to_bitstring(mask: int, n: int) -> str:
    mask = int(mask)
    return "".join("1" if (mask >> i) & 1 else "0" for i in range(n))


def from_bitstring(text: str) -> int:
    if not text or any(c not in "01" for c in text):
        raise ParameterError(f"not a coalition bitstring: {text!r}")
    mask = 0
    for i, c in enumerate(text):
        if c == "1":
            mask |= 1 << i
    return mask


def all_coalitions(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.int64)


def coalitions_of_size(n: int, s: int) -> np.ndarray:
    """All size-``s`` coalitions in ascending mask order."""
    if s < 0 or s > n:
        return np.empty(0, dtype=np.int64)
    if n <= 20:
        masks = all_coalitions(n)
        return masks[popcount_array(masks) == s]
    masks = np.fromiter(
        (sum(1 << i for i in c) for c in combinations(range(n), s)), dtype=np.int64
    )
    masks.sort()
    return masks


def interaction_sets(n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """All ``k``-subsets of ``n`` players in colex order.

    Colex order of ``k``-subsets coincides with ascending mask value. Returns
    ``(masks, elements)`` where ``elements[r]`` lists the players of the
    ``r``-th set in increasing order.
    """
    if not 0 <= k <= n:
        raise ParameterError(f"order k={k} must lie in [0, n={n}]")
    elems = np.array(list(combinations(range(n), k)), dtype=np.int64).reshape(-1, k)
    masks = (np.int64(1) << elems).sum(axis=1) if k else np.zeros(1, dtype=np.int64)
    order = np.argsort(masks, kind="stable")
    return masks[order], elems[order]
