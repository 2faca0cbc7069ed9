"""Error metrics, brute-force stratum statistics, error bounds and budget sweeps."""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from math import comb
from typing import Sequence

import numpy as np

from .coalitions import all_coalitions, popcount_array
from .errors import ParameterError
from .game import BudgetedOracle, SoumGame, derive_seed
from .index import EstimateMap, IndexKind, WeightProfile, exact_cii_many, soum_exact_cii
from .strata import StrataTable
from .svarmiq import (
    BorderPlan,
    EstimatorConfig,
    choose_distribution,
    implicit_strata_count,
    plan_borders,
    run_svarm_iq,
)

STATS_MAX_PLAYERS = 16
METHODS = ("svarm-iq", "perm-sii", "perm-sti")


def _check_maps(est: EstimateMap, gt: EstimateMap) -> None:
    if est.n != gt.n or est.k != gt.k or not np.array_equal(est.keys, gt.keys):
        raise ParameterError("estimate and ground truth must share n, k and keys")


def mse(est: EstimateMap, gt: EstimateMap) -> float:
    _check_maps(est, gt)
    return float(np.mean((est.scores - gt.scores) ** 2))


def top_keys(emap: EstimateMap, m: int) -> np.ndarray:
    """Keys of the ``m`` largest ``|score|``; ties go to the smaller key."""
    order = np.lexsort((emap.keys, -np.abs(emap.scores)))
    return emap.keys[order[:m]]


def prec_at(est: EstimateMap, gt: EstimateMap, m: int = 10) -> float:
    _check_maps(est, gt)
    if m < 1:
        raise ParameterError(f"m must be positive, got {m}")
    m = min(m, len(gt))
    hits = np.intersect1d(top_keys(est, m), top_keys(gt, m)).size
    return hits / m


def gamma_factor(n: int, k: int) -> float:
    if k < 2:
        raise ParameterError(f"the sample-count constant is defined for k >= 2, got k={k}")
    if n < 4:
        raise ParameterError(f"the sample-count constant needs n >= 4, got n={n}")
    if k == 2:
        return float(2 * (n - 1) ** 2)
    return float(n ** (k - 1) * (n - k + 1) ** 2)


@dataclass(eq=False)
class StrataStats:
    """Population variance and range of every stratum of one order, sets in colex order.

    Only cells flagged in ``implicit`` (shape ``(2**k, n-k+1)``) enter the bounds.
    """

    n: int
    k: int
    masks: np.ndarray
    variance: np.ndarray
    range: np.ndarray
    implicit: np.ndarray

    @property
    def range_sums(self) -> np.ndarray:
        """``R_K`` for every set: the summed range over its implicit strata."""
        return (self.range * self.implicit[None]).sum(axis=(1, 2))

    def row(self, K) -> int:
        pos = int(np.searchsorted(self.masks, int(K)))
        if pos >= self.masks.size or self.masks[pos] != int(K):
            raise ParameterError(f"{K} is not an interaction set of order {self.k}")
        return pos


def strata_statistics(game, k: int, plan: BorderPlan) -> StrataStats:
    """Enumerate every stratum once; variances use a second pass around the mean."""
    n = game.n
    if n > STATS_MAX_PLAYERS:
        raise ParameterError(f"stratum statistics are capped at n={STATS_MAX_PLAYERS}, got {n}")
    table = StrataTable.empty(n, k)
    table.mark_explicit(plan.explicit_sizes)
    masks = all_coalitions(n)
    vals = game.values(masks)
    sizes = popcount_array(masks)
    n_ell = n - k + 1
    cells = (1 << k) * n_ell
    pow2 = np.int64(1) << np.arange(k, dtype=np.int64)
    var = np.zeros(table.est.shape)
    rng_ = np.zeros(table.est.shape)
    for r, members in enumerate(table.elements):
        bits = (masks[:, None] >> members[None, :]) & 1
        flat = (bits @ pow2) * n_ell + sizes - bits.sum(axis=1)
        count = np.bincount(flat, minlength=cells)
        mean = np.bincount(flat, weights=vals, minlength=cells) / count
        dev = vals - mean[flat]
        var[r] = (np.bincount(flat, weights=dev * dev, minlength=cells) / count).reshape(-1, n_ell)
        hi = np.full(cells, -np.inf)
        lo = np.full(cells, np.inf)
        np.maximum.at(hi, flat, vals)
        np.minimum.at(lo, flat, vals)
        rng_[r] = (hi - lo).reshape(-1, n_ell)
    return StrataStats(n, k, table.masks, var, rng_, table.implicit_cells())


def _bound_terms(stats: StrataStats, weights: WeightProfile) -> np.ndarray:
    if weights.n != stats.n or weights.k != stats.k:
        raise ParameterError("weight profile and stratum statistics disagree on (n, k)")
    return weights.coefficients


def variance_bounds(stats: StrataStats, weights: WeightProfile, sample_budget: int, gamma: float) -> np.ndarray:
    """The variance bound for every set at once."""
    if sample_budget <= 0:
        raise ParameterError(f"the bounds need a positive sample budget, got {sample_budget}")
    coef = _bound_terms(stats, weights)
    inner = (stats.variance * stats.implicit[None] * (coef**2)[None, None, :]).sum(axis=(1, 2))
    return gamma / sample_budget * inner


def variance_bound(stats, weights, sample_budget, gamma, K) -> float:
    """``(gamma/B~) * sum_W sum_l C(n-k,l)**2 lambda_l**2 sigma**2`` over implicit strata of ``K``."""
    return float(variance_bounds(stats, weights, sample_budget, gamma)[stats.row(K)])


def chebyshev_bound(stats, weights, sample_budget, gamma, K, eps: float) -> float:
    if eps <= 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    return variance_bound(stats, weights, sample_budget, gamma, K) / eps**2


def hoeffding_bound(stats, weights, sample_budget, gamma, K, eps: float) -> float:
    """Range-based tail bound for ``|I^_K - I_K| >= eps``; raw value, may exceed 1.

    Strata with zero range are left out: their estimate is exact once seeded,
    and the union bound only needs the strata with positive range.
    """
    if eps <= 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    if sample_budget <= 0:
        raise ParameterError(f"the bounds need a positive sample budget, got {sample_budget}")
    coef = _bound_terms(stats, weights)
    r = stats.row(K)
    R = float(stats.range_sums[r])
    if R == 0.0:
        return 0.0
    live = stats.implicit & (stats.range[r] > 0)
    ells = np.nonzero(live)[1]
    floor_m = math.floor(sample_budget / (2 * gamma))
    lead = math.exp(-sample_budget / (2 * gamma**2))
    total = 0.0
    for ell in ells:
        a = 2 * eps**2 / (coef[ell] ** 2 * R**2)
        # q**m / (1/q - 1) = q**(m+1) / (1 - q) with q = exp(-a); no overflow for large a
        total += lead + 2 * math.exp(-a * (floor_m + 1)) / -math.expm1(-a)
    return total


def clip_probability(value: float) -> tuple[float, bool]:
    """Report a probability bound: ``(min(1, value), value > 1)``."""
    return (min(1.0, value), value > 1.0)


def leftover_budget(budget: int, plan: BorderPlan, warmup_cost: int) -> int:
    """``B~ = B - sum over explicit sizes of C(n, s) - |I_imp|``; must be positive."""
    out = int(budget) - plan.border_calls - int(warmup_cost)
    if out <= 0:
        raise ParameterError(
            f"no budget left for sampling: B={budget}, borders={plan.border_calls}, warm-up={warmup_cost}"
        )
    return out


def bound_setup(n: int, k: int, budget: int, max_border: int | None = None, warmup: bool = True):
    """Border plan, warm-up cost and ``B~`` SVARM-IQ would use for one order ``k``."""
    plan = plan_borders(n, budget, choose_distribution(n, (k,)), max_border)
    cost = implicit_strata_count(n, k, plan.s_exp) if warmup else 0
    return plan, cost, leftover_budget(budget, plan, cost)


def repeat_svarm_iq(game, k: int, kind, budget: int, runs: int, master_seed: int, **config) -> np.ndarray:
    """Scores of ``runs`` independent runs, shape ``(runs, C(n,k))``."""
    kind = IndexKind.parse(kind)
    out = np.empty((runs, comb(game.n, k)))
    for r in range(runs):
        cfg = EstimatorConfig(orders=(k,), kinds=(kind,), seed=derive_seed(master_seed, r), **config)
        out[r] = run_svarm_iq(BudgetedOracle(game, budget), cfg).estimates[(k, kind)].scores
    return out


# ---------------------------------------------------------------- sweeps


@dataclass
class SweepRecord:
    method: str
    kind: str
    order: int
    budget: int
    run: int
    seed: int
    mse: float
    prec_at_10: float
    calls: int
    wall_ms: float


@dataclass
class AggregateRow:
    method: str
    kind: str
    order: int
    budget: int
    mse_mean: float
    mse_se: float
    prec_mean: float
    prec_se: float


def method_requests(method: str, kinds, orders) -> list[tuple[int, IndexKind]]:
    if method == "svarm-iq":
        return [(k, IndexKind.parse(kind)) for k in orders for kind in kinds]
    if method == "perm-sii":
        return [(k, IndexKind.SII) for k in orders]
    if method == "perm-sti":
        return [(k, IndexKind.STI) for k in orders]
    raise ParameterError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


def ground_truth(game, requests) -> dict:
    requests = list(dict.fromkeys(requests))
    if isinstance(game, SoumGame):
        return {(k, kind): soum_exact_cii(game, kind, k) for k, kind in requests}
    if game.n > STATS_MAX_PLAYERS:
        raise ParameterError(
            f"ground truth for a non-SOUM game is limited to n <= {STATS_MAX_PLAYERS}, got {game.n}"
        )
    return exact_cii_many(game, [(kind, k) for k, kind in requests])


def run_method(game, method: str, budget: int, seed: int, kinds, orders, warmup=False, max_border=None):
    """One run of ``method``; returns ``({(k, kind): EstimateMap}, calls)``."""
    from .baselines import permutation_sii, permutation_sti

    if method == "svarm-iq":
        oracle = BudgetedOracle(game, budget)
        cfg = EstimatorConfig(orders=orders, kinds=kinds, warmup=warmup, seed=seed, max_border=max_border)
        return run_svarm_iq(oracle, cfg).estimates, oracle.calls_used
    fn = permutation_sii if method == "perm-sii" else permutation_sti
    out, calls = {}, 0
    for k, kind in method_requests(method, kinds, orders):
        oracle = BudgetedOracle(game, budget)
        out[(k, kind)] = fn(oracle, k, seed).estimate
        calls += oracle.calls_used
    return out, calls


def _sweep_task(args):
    game, method, budget, run, seed, kinds, orders, warmup, max_border, truth = args
    t0 = time.perf_counter()
    maps, calls = run_method(game, method, budget, seed, kinds, orders, warmup, max_border)
    wall = (time.perf_counter() - t0) * 1e3
    recs = []
    for (k, kind), emap in maps.items():
        gt = truth[(k, kind)]
        recs.append(
            SweepRecord(method, kind.value, k, budget, run, seed, mse(emap, gt), prec_at(emap, gt, 10), calls, wall)
        )
    return recs


def run_sweep(
    game,
    methods: Sequence[str],
    kinds: Sequence,
    orders: Sequence[int],
    budgets: Sequence[int],
    runs: int,
    master_seed: int,
    warmup: bool = False,
    max_border: int | None = None,
    jobs: int = 1,
) -> tuple[list[SweepRecord], list[AggregateRow]]:
    """Every method at every budget, ``runs`` times; run ``r`` uses ``derive_seed(master_seed, r)``."""
    if runs < 1:
        raise ParameterError(f"runs must be positive, got {runs}")
    kinds = [IndexKind.parse(x) for x in kinds]
    orders = [int(k) for k in orders]
    requests = [req for m in methods for req in method_requests(m, kinds, orders)]
    truth = ground_truth(game, requests)
    tasks = [
        (game, m, int(b), r, derive_seed(master_seed, r), kinds, orders, warmup, max_border, truth)
        for m in methods
        for b in budgets
        for r in range(runs)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_sweep_task, tasks))
    else:
        chunks = [_sweep_task(t) for t in tasks]
    records = [rec for chunk in chunks for rec in chunk]
    return records, aggregate_records(records)


def _se(x: np.ndarray) -> float:
    return float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else float("nan")


def aggregate_records(records: Sequence[SweepRecord]) -> list[AggregateRow]:
    groups: dict[tuple, list[SweepRecord]] = {}
    for rec in records:
        groups.setdefault((rec.method, rec.kind, rec.order, rec.budget), []).append(rec)
    rows = []
    for (method, kind, order, budget), recs in groups.items():
        e = np.array([r.mse for r in recs])
        p = np.array([r.prec_at_10 for r in recs])
        rows.append(AggregateRow(method, kind, order, budget, float(e.mean()), _se(e), float(p.mean()), _se(p)))
    return rows


def _write_rows(rows, cls, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f.name for f in fields(cls)])
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in astuple(row)])


def write_records_csv(records, path) -> None:
    _write_rows(records, SweepRecord, path)


def write_aggregate_csv(rows, path) -> None:
    _write_rows(rows, AggregateRow, path)


def _read_rows(cls, path):
    casts = {f.name: {"str": str, "int": int, "float": float}[f.type] for f in fields(cls)}
    with open(path, newline="", encoding="utf-8") as fh:
        return [cls(**{name: cast(raw[name]) for name, cast in casts.items()}) for raw in csv.DictReader(fh)]


def read_aggregate_csv(path) -> list[AggregateRow]:
    return _read_rows(AggregateRow, path)


def read_records_csv(path) -> list[SweepRecord]:
    return _read_rows(SweepRecord, path)
