"""Permutation-sampling baselines for SII and top-order STI.

Both draw uniform permutations and average discrete derivatives. Coalitions
are cached within a permutation (cache hits cost nothing) and never across
permutations.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .coalitions import interaction_sets, popcount_array
from .errors import BudgetExceededError, ParameterError
from .index import EstimateMap, IndexKind


@dataclass
class BaselineDiagnostics:
    method: str
    budget: int
    calls: int
    permutations: int
    partial: bool
    never_updated: int
    seed: int

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(eq=False)
class BaselineResult:
    estimate: EstimateMap
    counts: np.ndarray
    diagnostics: BaselineDiagnostics


def _prefixes(perm: np.ndarray) -> np.ndarray:
    """``prefix[t]`` is the mask of the first ``t`` players of ``perm``."""
    bits = np.int64(1) << perm.astype(np.int64)
    return np.concatenate(([0], np.cumsum(bits))).astype(np.int64)


def _signs(k: int) -> np.ndarray:
    w = np.arange(1 << k)
    return np.where((k - popcount_array(w)) % 2, -1.0, 1.0)


def _patterns(members: np.ndarray) -> np.ndarray:
    """Masks ``W`` for every pattern ``w`` over each row of ``members``: ``(rows, 2**k)``."""
    k = members.shape[1]
    w = np.arange(1 << k)
    bits = (w[None, :, None] >> np.arange(k)[None, None, :]) & 1
    return (bits * (np.int64(1) << members[:, None, :].astype(np.int64))).sum(axis=2)


def sii_window_coalitions(perm, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Interaction sets and coalitions ``S | W`` of every consecutive window of ``perm``.

    Returns ``(K, A)`` with ``K`` of shape ``(n-k+1,)`` and ``A`` of shape
    ``(n-k+1, 2**k)``; ``S`` is the prefix before the window.
    """
    perm = np.asarray(perm, dtype=np.int64)
    n = perm.size
    prefix = _prefixes(perm)
    starts = np.arange(n - k + 1)
    members = perm[starts[:, None] + np.arange(k)[None, :]]
    pats = _patterns(members)
    return pats[:, -1], prefix[starts][:, None] | pats


def sti_predecessors(perm, elements: np.ndarray) -> np.ndarray:
    """Mask of the players preceding the first member of each set in ``perm``."""
    perm = np.asarray(perm, dtype=np.int64)
    pos = np.empty(perm.size, dtype=np.int64)
    pos[perm] = np.arange(perm.size)
    first = pos[elements].min(axis=1)
    return _prefixes(perm)[first]


def _check(oracle, k: int) -> int:
    n = oracle.n
    if not 1 <= k <= n:
        raise ParameterError(f"order k={k} must lie in [1, n={n}]")
    return n


def permutation_sii(oracle, k: int, seed) -> BaselineResult:
    """SII estimate from consecutive windows of random permutations.

    A window ``K`` at positions ``t..t+k-1`` with prefix ``S`` contributes
    ``Delta_K(S)`` to the running mean of ``K``. A permutation whose windows
    cannot all be paid for is discarded unused: cutting it short would favour
    small prefixes and bias the means.
    """
    n = _check(oracle, k)
    rng = np.random.default_rng(seed)
    keys, _ = interaction_sets(n, k)
    est = np.zeros(keys.size)
    cnt = np.zeros(keys.size, dtype=np.int64)
    signs = _signs(k)
    calls0 = oracle.calls_used
    perms = 0
    partial = False
    while True:
        perm = rng.permutation(n)
        K, A = sii_window_coalitions(perm, k)
        uniq, inv = np.unique(A, return_inverse=True)
        if uniq.size > oracle.remaining:
            partial = oracle.remaining > 0
            break
        vals = oracle.values(uniq)
        perms += 1
        delta = vals[inv.reshape(A.shape)] @ signs
        rows = np.searchsorted(keys, K)
        c = cnt[rows]
        est[rows] = (est[rows] * c + delta) / (c + 1)
        cnt[rows] = c + 1
    if perms == 0:
        raise BudgetExceededError(f"budget of {oracle.remaining} cannot pay for a single permutation")
    diag = BaselineDiagnostics(
        method="perm-sii",
        budget=oracle.budget - calls0,
        calls=oracle.calls_used - calls0,
        permutations=perms,
        partial=partial,
        never_updated=int((cnt == 0).sum()),
        seed=int(seed),
    )
    return BaselineResult(EstimateMap(n, k, IndexKind.SII, keys, est), cnt, diag)


def permutation_sti(oracle, k: int, seed, top_order: int | None = None) -> BaselineResult:
    """Top-order STI estimate: every ``K`` is updated from each permutation with
    ``Delta_K`` at the players preceding ``K``'s first member.

    A permutation whose coalitions cannot all be paid for is discarded unused.
    """
    n = _check(oracle, k)
    if top_order is not None and k != top_order:
        raise ParameterError(
            f"only the top order STI is estimated by permutation sampling (k={k}, top={top_order})"
        )
    rng = np.random.default_rng(seed)
    keys, elements = interaction_sets(n, k)
    pats = _patterns(elements)
    signs = _signs(k)
    est = np.zeros(keys.size)
    calls0 = oracle.calls_used
    perms = 0
    partial = False
    while True:
        perm = rng.permutation(n)
        A = sti_predecessors(perm, elements)[:, None] | pats
        uniq, inv = np.unique(A, return_inverse=True)
        if uniq.size > oracle.remaining:
            partial = oracle.remaining > 0
            break
        vals = oracle.values(uniq)
        delta = vals[inv.reshape(A.shape)] @ signs
        est = (est * perms + delta) / (perms + 1)
        perms += 1
    if perms == 0:
        raise BudgetExceededError(f"budget of {oracle.remaining} cannot pay for a single permutation")
    diag = BaselineDiagnostics(
        method="perm-sti",
        budget=oracle.budget - calls0,
        calls=oracle.calls_used - calls0,
        permutations=perms,
        partial=partial,
        never_updated=0,
        seed=int(seed),
    )
    counts = np.full(keys.size, perms, dtype=np.int64)
    return BaselineResult(EstimateMap(n, k, IndexKind.STI, keys, est), counts, diag)
