"""Cardinal interaction indices: weights, exact values and n-SII aggregation.

A cardinal interaction index (CII) of order ``k`` scores every ``k``-set ``K`` as

    I_K = sum over S disjoint from K of  lambda_{k,|S|} * Delta_K(S)

where ``Delta_K(S) = sum_{W subset K} (-1)**(k-|W|) v(S | W)``. The kinds
differ only in the weight profile ``lambda``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .coalitions import (
    all_coalitions,
    check_coalition,
    from_bitstring,
    from_players,
    interaction_sets,
    popcount,
    popcount_array,
    to_bitstring,
)
from .errors import GameFormatError, ParameterError
from .game import SoumGame
from .strata import StrataTable, aggregate

EXACT_MAX_PLAYERS = 20


class IndexKind(str, enum.Enum):
    SII = "SII"
    STI = "STI"
    FSI = "FSI"
    BII = "BII"
    SV = "SV"

    @classmethod
    def parse(cls, text) -> "IndexKind":
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).upper())
        except ValueError:
            raise ParameterError(f"unknown index kind {text!r}") from None

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class WeightProfile:
    """``lambda_{k,l}`` for ``l = 0..n-k`` of one index, kept as exact rationals."""

    n: int
    k: int
    kind: IndexKind
    exact: tuple[Fraction, ...]

    @property
    def weights(self) -> np.ndarray:
        return np.array([float(w) for w in self.exact])

    @property
    def coefficients(self) -> np.ndarray:
        """``C(n-k, l) * lambda_{k,l}``: the weight of stratum size ``l`` in the aggregate."""
        m = self.n - self.k
        return np.array([float(comb(m, ell) * w) for ell, w in enumerate(self.exact)])


def _lambda(kind: IndexKind, n: int, k: int, ell: int) -> Fraction:
    if kind is IndexKind.SII:
        return Fraction(1, (n - k + 1) * comb(n - k, ell))
    if kind is IndexKind.STI:
        return Fraction(k, n * comb(n - 1, ell))
    if kind is IndexKind.FSI:
        lead = Fraction(factorial(2 * k - 1), factorial(k - 1) ** 2)
        return lead * Fraction(
            factorial(n - ell - 1) * factorial(ell + k - 1), factorial(n + k - 1)
        )
    if kind is IndexKind.BII:
        return Fraction(1, 2 ** (n - k))
    return Fraction(1, n * comb(n - 1, ell))  # SV


@lru_cache(maxsize=None)
def cii_weights(kind, n: int, k: int) -> WeightProfile:
    kind = IndexKind.parse(kind)
    if not 1 <= k <= n:
        raise ParameterError(f"order k={k} must lie in [1, n={n}]")
    if kind is IndexKind.SV and k != 1:
        raise ParameterError("the Shapley value is only defined at order k=1")
    exact = tuple(_lambda(kind, n, k, ell) for ell in range(n - k + 1))
    return WeightProfile(n, k, kind, exact)


@dataclass(eq=False)
class EstimateMap:
    """Scores for every ``k``-set, keys ascending (colex order)."""

    n: int
    k: int
    kind: IndexKind
    keys: np.ndarray
    scores: np.ndarray

    def __post_init__(self):
        self.keys = np.asarray(self.keys, dtype=np.int64)
        self.scores = np.asarray(self.scores, dtype=np.float64)
        if self.keys.shape != self.scores.shape or self.keys.size != comb(self.n, self.k):
            raise ParameterError(
                f"an order-{self.k} map over {self.n} players needs {comb(self.n, self.k)} entries"
            )
        if np.any(popcount_array(self.keys) != self.k):
            raise ParameterError(f"every key must have cardinality {self.k}")

    def __len__(self) -> int:
        return int(self.keys.size)

    def __getitem__(self, key) -> float:
        mask = key if isinstance(key, (int, np.integer)) else from_players(key)
        pos = int(np.searchsorted(self.keys, mask))
        if pos >= self.keys.size or self.keys[pos] != mask:
            raise KeyError(key)
        return float(self.scores[pos])

    def items(self):
        return zip((int(k) for k in self.keys), (float(s) for s in self.scores))

    def as_dict(self) -> dict[int, float]:
        return dict(self.items())

    def scaled(self, c: float) -> "EstimateMap":
        return EstimateMap(self.n, self.k, self.kind, self.keys, self.scores * c)


def discrete_derivative(game, K: int, S: int) -> float:
    """``Delta_K(S)``; performs exactly ``2**|K|`` evaluations of ``game``."""
    K, S = int(K), int(S)
    if K & S:
        raise ParameterError("S and K must be disjoint")
    k = popcount(K)
    total = 0.0
    W = K
    while True:
        term = game.value(S | W)
        total += -term if (k - popcount(W)) % 2 else term
        if W == 0:
            break
        W = (W - 1) & K
    return total


def exact_strata(game, k: int, values: np.ndarray | None = None) -> StrataTable:
    """Exact stratum means for order ``k`` from one pass over all ``2**n`` coalitions."""
    n = game.n
    if n > EXACT_MAX_PLAYERS:
        raise ParameterError(f"exact enumeration is capped at n={EXACT_MAX_PLAYERS}, got {n}")
    masks = all_coalitions(n)
    if values is None:
        values = game.values(masks)
    table = StrataTable.empty(n, k)
    table.add_explicit(masks, popcount_array(masks), values)
    table.mark_explicit(range(n + 1))
    return table


def exact_cii_many(game, requests: Iterable[tuple]) -> dict[tuple[int, IndexKind], EstimateMap]:
    """Ground truth for several ``(kind, k)`` pairs sharing one enumeration."""
    n = game.n
    if n > EXACT_MAX_PLAYERS:
        raise ParameterError(f"exact enumeration is capped at n={EXACT_MAX_PLAYERS}, got {n}")
    requests = [(IndexKind.parse(kind), int(k)) for kind, k in requests]
    for kind, k in requests:
        cii_weights(kind, n, k)
    values = game.values(all_coalitions(n))
    tables: dict[int, StrataTable] = {}
    out = {}
    for kind, k in requests:
        if k not in tables:
            tables[k] = exact_strata(game, k, values)
        t = tables[k]
        scores = aggregate(t.est, k, cii_weights(kind, n, k).coefficients)
        out[(k, kind)] = EstimateMap(n, k, kind, t.masks, scores)
    return out


def exact_cii(game, kind, k: int) -> EstimateMap:
    kind = IndexKind.parse(kind)
    return exact_cii_many(game, [(kind, k)])[(k, kind)]


def unanimity_scores(kind, n: int, k: int) -> np.ndarray:
    """``I_K(u_T)`` for ``K`` inside ``T`` as a function of ``t = |T|`` (0 for ``t < k``)."""
    w = cii_weights(kind, n, k).exact
    out = np.zeros(n + 1)
    for t in range(k, n + 1):
        total = Fraction(0)
        for ell in range(t - k, n - k + 1):
            total += comb(n - t, ell - (t - k)) * w[ell]
        out[t] = float(total)
    return out


def soum_exact_cii(game: SoumGame, kind, k: int) -> EstimateMap:
    """Closed form by linearity over the unanimity terms; no enumeration of coalitions."""
    kind = IndexKind.parse(kind)
    n = game.n
    per_size = unanimity_scores(kind, n, k)
    keys, _ = interaction_sets(n, k)
    T = game.subsets
    term_weight = game.coefficients * per_size[popcount_array(T)]
    scores = np.zeros(keys.size)
    chunk = max(1, (1 << 22) // max(1, T.size))
    for lo in range(0, keys.size, chunk):
        K = keys[lo : lo + chunk]
        inside = (K[:, None] & ~T[None, :]) == 0
        scores[lo : lo + chunk] = inside @ term_weight
    return EstimateMap(n, k, kind, keys, scores)


@lru_cache(maxsize=None)
def bernoulli_number(m: int) -> Fraction:
    """Exact Bernoulli number with ``B_1 = -1/2``.

    That sign is the one that makes n-SII efficient; the recurrence is
    ``sum_{j=0}^{m} C(m+1, j) B_j = 0``.
    """
    if not 0 <= m <= 32:
        raise ParameterError(f"Bernoulli numbers are provided for 0 <= m <= 32, got {m}")
    if m == 0:
        return Fraction(1)
    acc = sum(comb(m + 1, j) * bernoulli_number(j) for j in range(m))
    return -acc / (m + 1)


def nsii_aggregate(sii_per_order: Mapping[int, EstimateMap], k_max: int) -> dict[int, float]:
    """n-SII scores for every set of size ``1..k_max`` from SII maps of orders ``1..k_max``.

    Built bottom-up: start from the order-1 values, and at each order ``m``
    keep the SII of the ``m``-sets while every smaller set ``K`` gains
    ``B_{m-|K|}`` times the SII of each ``m``-superset.
    """
    missing = [m for m in range(1, k_max + 1) if m not in sii_per_order]
    if missing:
        raise ParameterError(f"SII maps missing for orders {missing}")
    phi: dict[int, float] = dict(sii_per_order[1].items())
    for m in range(2, k_max + 1):
        top = sii_per_order[m]
        bern = [float(bernoulli_number(j)) for j in range(m + 1)]
        for T, score in top.items():
            sub = (T - 1) & T
            while sub:
                phi[sub] = phi[sub] + bern[m - popcount(sub)] * score
                sub = (sub - 1) & T
            phi[T] = score
    return phi


def write_estimate_csv(emap: EstimateMap, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"n={emap.n},k={emap.k},kind={emap.kind.value}\n")
        for key, score in emap.items():
            fh.write(f"{to_bitstring(key, emap.n)},{score!r}\n")


def read_estimate_csv(path) -> EstimateMap:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    try:
        head = dict(part.split("=", 1) for part in lines[0].strip().split(","))
        n, k, kind = int(head["n"]), int(head["k"]), IndexKind.parse(head["kind"])
    except (IndexError, KeyError, ValueError):
        raise GameFormatError(f"{path}: header must read 'n=<int>,k=<int>,kind=<kind>'") from None
    keys, scores = [], []
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        try:
            bits, num = raw.strip().split(",")
            if len(bits) != n:
                raise ValueError
            keys.append(check_coalition(from_bitstring(bits), n))
            scores.append(float(num))
        except (ValueError, ParameterError):
            raise GameFormatError(f"{path}:{lineno}: bad row {raw!r}") from None
    order = np.argsort(keys)
    try:
        return EstimateMap(n, k, kind, np.array(keys)[order], np.array(scores)[order])
    except ParameterError as exc:
        raise GameFormatError(f"{path}: {exc}") from None
