"""SVARM-IQ: stratified estimation of cardinal interaction indices.

Every evaluated coalition ``A`` falls into exactly one stratum of every
interaction set ``K`` (``W = A & K``, ``l = |A| - |W|``), so a single oracle
call refines ``C(n, k)`` stratum means per maintained order. Coalition sizes
near the border are enumerated exhaustively; the remaining sizes are sampled.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import comb
from typing import Sequence

import numpy as np

from . import _kernels
from .coalitions import coalitions_of_size, popcount
from .errors import BudgetExceededError, ParameterError
from .index import EstimateMap, IndexKind, cii_weights
from .strata import StrataTable, aggregate, alternating_sums

# sampled coalitions are evaluated and routed in blocks of this many draws
_LOOP_CHUNK = 1 << 14


@dataclass(frozen=True)
class SizeDistribution:
    n: int
    exact: tuple[Fraction, ...]
    name: str = "custom"

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([float(p) for p in self.exact])

    def __getitem__(self, s: int) -> Fraction:
        return self.exact[s]

    def is_symmetric(self) -> bool:
        return all(self.exact[s] == self.exact[self.n - s] for s in range(self.n + 1))


def _check_dist_n(n: int) -> None:
    if n < 4:
        raise ParameterError(f"size distributions need n >= 4, got n={n}")


def size_distribution_uniform(n: int) -> SizeDistribution:
    _check_dist_n(n)
    p = [Fraction(1, n - 3) if 2 <= s <= n - 2 else Fraction(0) for s in range(n + 1)]
    return SizeDistribution(n, tuple(p), "uniform")


def pairs_beta(n: int) -> Fraction:
    _check_dist_n(n)
    if n % 2 == 0:
        return Fraction(n * n - 2 * n, 2 * (n * n - 4 * n + 2))
    return Fraction(n - 1, 2 * (n - 3))


def size_distribution_pairs(n: int) -> SizeDistribution:
    """Size distribution tailored to pairwise interactions (heavier at the borders)."""
    beta = pairs_beta(n)
    p = []
    for s in range(n + 1):
        if not 2 <= s <= n - 2:
            p.append(Fraction(0))
        elif 2 * s <= n - 1:
            p.append(beta / (s * (s - 1)))
        else:
            p.append(beta / ((n - s) * (n - s - 1)))
    return SizeDistribution(n, tuple(p), "pairs")


@dataclass(frozen=True)
class BorderPlan:
    n: int
    budget: int
    s_exp: int
    leftover: int
    exact_p: tuple[Fraction, ...]

    @property
    def explicit_sizes(self) -> tuple[int, ...]:
        return tuple(s for s in range(self.n + 1) if s <= self.s_exp or s >= self.n - self.s_exp)

    @property
    def implicit_sizes(self) -> tuple[int, ...]:
        return tuple(range(self.s_exp + 1, self.n - self.s_exp))

    @property
    def border_calls(self) -> int:
        return sum(comb(self.n, s) for s in self.explicit_sizes)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([float(p) for p in self.exact_p])


def plan_borders(n: int, budget: int, dist: SizeDistribution, max_border: int | None = None) -> BorderPlan:
    """Choose ``s_exp`` and the renormalised size distribution; no evaluations.

    ``max_border`` optionally caps ``s_exp`` (it never drops below 1).
    """
    budget = int(budget)
    if dist.n != n:
        raise ParameterError(f"size distribution is over n={dist.n}, game has n={n}")
    if budget < 2 * n + 2:
        raise ParameterError(f"budget {budget} is below the {2 * n + 2} border evaluations required")
    if not dist.is_symmetric():
        raise ParameterError("border computation requires a symmetric size distribution")
    if max_border is not None and max_border < 1:
        raise ParameterError(f"max_border must be at least 1, got {max_border}")

    s_exp = 1
    left = budget - 2 * n - 2
    p = list(dist.exact)
    rim = p[0] + p[1] + p[n - 1] + p[n]
    p[0] = p[1] = p[n - 1] = p[n] = Fraction(0)
    if rim:
        p = [x / (1 - rim) for x in p]
    uniform = [Fraction(1, n + 1)] * (n + 1)

    while (
        2 * (s_exp + 1) <= n
        and (max_border is None or s_exp < max_border)
        and comb(n, s_exp + 1) <= p[s_exp + 1] * left
    ):
        s_exp += 1
        if 2 * s_exp == n:
            left -= comb(n, s_exp)
            p = uniform
        elif 2 * s_exp == n - 1:
            left -= 2 * comb(n, s_exp)
            p = uniform
        else:
            left -= 2 * comb(n, s_exp)
            old = p[s_exp]
            p[s_exp] = p[n - s_exp] = Fraction(0)
            p = [x / (1 - 2 * old) for x in p]
    if not range(s_exp + 1, n - s_exp):
        p = [Fraction(0)] * (n + 1)
    return BorderPlan(n, budget, s_exp, left, tuple(p))


def stratum_assign(A: int, K: int) -> tuple[int, int]:
    """``(W, l)`` of the stratum of ``K`` that coalition ``A`` belongs to."""
    W = int(A) & int(K)
    return W, popcount(int(A)) - popcount(W)


def update_mean(old_mean: float, count: int, value: float) -> float:
    return (old_mean * count + value) / (count + 1)


def implicit_strata_count(n: int, k: int, s_exp: int) -> int:
    """Number of sampled strata ``|I_imp|`` for order ``k``, i.e. the warm-up cost."""
    total = 0
    for w in range(k + 1):
        width = n - max(k, s_exp + 1 + w) - max(0, s_exp + 1 - w) + 1
        total += comb(k, w) * max(0, width)
    return comb(n, k) * total


def compute_borders(oracle, plan: BorderPlan, tables: Sequence[StrataTable]) -> int:
    """Evaluate every coalition of every explicit size once and fill the explicit strata.

    Returns the number of oracle calls, ``plan.border_calls``.
    """
    n = plan.n
    calls = 0
    for s in sorted(plan.explicit_sizes):
        masks = coalitions_of_size(n, s)
        values = oracle.values(masks)
        calls += masks.size
        sizes = np.full(masks.size, s, dtype=np.int64)
        for t in tables:
            t.add_explicit(masks, sizes, values)
    for t in tables:
        t.mark_explicit(plan.explicit_sizes)
    return calls


def _complements(n: int, elements: np.ndarray) -> np.ndarray:
    """Players outside each set, ascending; shape ``(n_sets, n - k)``."""
    inside = np.zeros((elements.shape[0], n), dtype=bool)
    np.put_along_axis(inside, elements, True, axis=1)
    return np.nonzero(~inside)[1].reshape(elements.shape[0], -1)


def _pattern_masks(elements: np.ndarray) -> np.ndarray:
    """Coalition mask of every subset pattern ``w`` of every set; shape ``(n_sets, 2**k)``."""
    k = elements.shape[1]
    w = np.arange(1 << k)
    bits = (w[None, :, None] >> np.arange(k)[None, None, :]) & 1
    return (bits * (np.int64(1) << elements[:, None, :])).sum(axis=2)


def warmup(oracle, table: StrataTable, rng: np.random.Generator) -> int:
    """Seed every implicit stratum with one uniform member; returns the evaluation count."""
    n, k = table.n, table.k
    cells = np.argwhere(table.implicit_cells())
    cost = cells.shape[0] * table.masks.size
    if cost == 0:
        return 0
    if oracle.remaining < cost:
        raise BudgetExceededError(
            f"warm-up needs {cost} evaluations, only {oracle.remaining} remain"
        )
    rows = np.repeat(np.arange(table.masks.size), cells.shape[0])
    w = np.tile(cells[:, 0], table.masks.size)
    ell = np.tile(cells[:, 1], table.masks.size)
    pool = n - k
    picks = _kernels.draw_subsets(rng.random((rows.size, max(pool, 1))), ell, pool)
    comp = _complements(n, table.elements)
    S = np.zeros(rows.size, dtype=np.int64)
    for j in range(pool):
        S |= ((picks >> j) & 1) << comp[rows, j]
    A = S | _pattern_masks(table.elements)[rows, w]
    values = oracle.values(A)
    table.est[rows, w, ell] = values
    table.cnt[rows, w, ell] = 1
    return cost


def choose_distribution(n: int, orders: Sequence[int]) -> SizeDistribution:
    if 2 in orders and max(orders) <= 2:
        return size_distribution_pairs(n)
    return size_distribution_uniform(n)


@dataclass
class EstimatorConfig:
    orders: Sequence[int] = (2,)
    kinds: Sequence = (IndexKind.SII,)
    warmup: bool = False
    seed: int = 0
    max_border: int | None = None

    def __post_init__(self):
        self.orders = tuple(sorted({int(k) for k in self.orders}))
        self.kinds = tuple(dict.fromkeys(IndexKind.parse(x) for x in self.kinds))
        if not self.orders:
            raise ParameterError("at least one order is required")
        if not self.kinds:
            raise ParameterError("at least one index kind is required")

    def requests(self) -> list[tuple[int, IndexKind]]:
        return [(k, kind) for k in self.orders for kind in self.kinds]


@dataclass
class SvarmDiagnostics:
    budget: int
    s_exp: int
    leftover_budget: int
    sample_budget: int
    calls_borders: int
    calls_warmup: int
    calls_loop: int
    empty_strata: int
    unused_budget: int
    seed: int
    distribution: str
    orders: tuple = field(default_factory=tuple)

    @property
    def calls_total(self) -> int:
        return self.calls_borders + self.calls_warmup + self.calls_loop

    def as_dict(self) -> dict:
        out = asdict(self)
        out["orders"] = " ".join(str(k) for k in self.orders)
        out["calls_total"] = self.calls_total
        return out

    def write_csv(self, path) -> None:
        row = self.as_dict()
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(row))
            writer.writeheader()
            writer.writerow(row)


@dataclass(eq=False)
class SvarmResult:
    estimates: dict
    diagnostics: SvarmDiagnostics
    tables: dict
    plan: BorderPlan

    def __getitem__(self, key) -> EstimateMap:
        k, kind = key
        return self.estimates[(int(k), IndexKind.parse(kind))]


def run_svarm_iq(oracle, config: EstimatorConfig) -> SvarmResult:
    """Run the estimator until the oracle's budget is spent.

    All requested orders share the same evaluations; every requested kind is
    read off the same strata at the end.
    """
    n = oracle.n
    if n < 4:
        raise ParameterError(f"SVARM-IQ needs n >= 4, got n={n}")
    for k, kind in config.requests():
        cii_weights(kind, n, k)
    budget = oracle.remaining
    dist = choose_distribution(n, config.orders)
    plan = plan_borders(n, budget, dist, config.max_border)
    rng = np.random.default_rng(config.seed)

    tables = {k: StrataTable.empty(n, k) for k in config.orders}
    calls_borders = compute_borders(oracle, plan, list(tables.values()))

    calls_warmup = 0
    if config.warmup:
        for k in config.orders:
            calls_warmup += warmup(oracle, tables[k], rng)

    sample_budget = oracle.remaining
    calls_loop = 0
    unused = 0
    implicit = plan.implicit_sizes
    if sample_budget > 0 and implicit:
        sizes_all = rng.choice(n + 1, size=sample_budget, p=plan.probabilities)
        for lo in range(0, sample_budget, _LOOP_CHUNK):
            sizes = sizes_all[lo : lo + _LOOP_CHUNK].astype(np.int64)
            masks = _kernels.draw_subsets(rng.random((sizes.size, n)), sizes, n)
            values = oracle.values(masks)
            calls_loop += masks.size
            for t in tables.values():
                t.add_samples(masks, sizes, values)
    else:
        unused = sample_budget

    estimates = {}
    for k, kind in config.requests():
        t = tables[k]
        scores = aggregate(t.est, k, cii_weights(kind, n, k).coefficients)
        estimates[(k, kind)] = EstimateMap(n, k, kind, t.masks, scores)

    diag = SvarmDiagnostics(
        budget=budget,
        s_exp=plan.s_exp,
        leftover_budget=plan.leftover,
        sample_budget=sample_budget,
        calls_borders=calls_borders,
        calls_warmup=calls_warmup,
        calls_loop=calls_loop,
        empty_strata=sum(t.empty_implicit_count() for t in tables.values()),
        unused_budget=unused,
        seed=int(config.seed),
        distribution=dist.name,
        orders=config.orders,
    )
    return SvarmResult(estimates, diag, tables, plan)


def aggregate_pairs_check(table: StrataTable) -> EstimateMap:
    """Pairwise SII read off a ``k = 2`` table by the four-case formula.

    ``(1/(n-1)) * sum_l (I^{ij} - I^{i} - I^{j} + I^{})``; agrees bit for bit
    with the generic aggregation.
    """
    if table.k != 2:
        raise ParameterError(f"the pairwise formula needs a k=2 table, got k={table.k}")
    n = table.n
    inner = alternating_sums(table.est, 2)
    scores = float(Fraction(1, n - 1)) * inner.sum(axis=1)
    return EstimateMap(n, 2, IndexKind.SII, table.masks, scores)

