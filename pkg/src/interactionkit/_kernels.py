"""Hot inner loops: routing coalition values into strata and drawing subsets.

Every kernel exists twice: a loop version compiled with numba and a
vectorised numpy version. Both perform the same floating-point operations in
the same per-stratum order, so the two backends agree to the last bit for
sampled strata and to summation-order rounding for explicit strata.

Strata arrays have shape ``(n_sets, 2**k, n - k + 1)``: row ``r`` is the
``r``-th interaction set in colex order, the middle index encodes ``W`` as a
bit pattern over the positions of that set's sorted members, the last index
is the stratum size ``l``.
"""

import numpy as np

from ._backend import USE_NUMBA, njit


def _route_explicit_loop(coalitions, sizes, values, elements, inv_binom, est, cnt):
    m = coalitions.shape[0]
    n_sets, k = elements.shape
    for b in range(m):
        a = coalitions[b]
        v = values[b]
        s = sizes[b]
        for r in range(n_sets):
            w = 0
            wc = 0
            for j in range(k):
                if (a >> elements[r, j]) & 1:
                    w |= 1 << j
                    wc += 1
            ell = s - wc
            est[r, w, ell] += v * inv_binom[ell]
            cnt[r, w, ell] += 1


def _route_samples_loop(coalitions, sizes, values, elements, est, cnt):
    m = coalitions.shape[0]
    n_sets, k = elements.shape
    for b in range(m):
        a = coalitions[b]
        v = values[b]
        s = sizes[b]
        for r in range(n_sets):
            w = 0
            wc = 0
            for j in range(k):
                if (a >> elements[r, j]) & 1:
                    w |= 1 << j
                    wc += 1
            ell = s - wc
            c = cnt[r, w, ell]
            est[r, w, ell] = (est[r, w, ell] * c + v) / (c + 1)
            cnt[r, w, ell] = c + 1


def _draw_subsets_loop(uniforms, sizes, pool):
    m = uniforms.shape[0]
    out = np.zeros(m, dtype=np.int64)
    perm = np.empty(pool, dtype=np.int64)
    for b in range(m):
        for i in range(pool):
            perm[i] = i
        mask = 0
        for i in range(sizes[b]):
            j = i + int(np.floor(uniforms[b, i] * (pool - i)))
            t = perm[i]
            perm[i] = perm[j]
            perm[j] = t
            mask |= 1 << perm[i]
        out[b] = mask
    return out


def _stratum_index(coalitions, elements_row, sizes):
    k = elements_row.shape[0]
    bits = (coalitions[:, None] >> elements_row[None, :]) & 1
    w = bits @ (np.int64(1) << np.arange(k, dtype=np.int64))
    return w, sizes - bits.sum(axis=1)


def _route_explicit_numpy(coalitions, sizes, values, elements, inv_binom, est, cnt):
    n_sets, k = elements.shape
    n_ell = est.shape[2]
    cells = est.shape[1] * n_ell
    for r in range(n_sets):
        w, ell = _stratum_index(coalitions, elements[r], sizes)
        flat = w * n_ell + ell
        contrib = values * inv_binom[ell]
        # bincount accumulates in input order, matching the loop kernel
        est[r] += np.bincount(flat, weights=contrib, minlength=cells).reshape(-1, n_ell)
        cnt[r] += np.bincount(flat, minlength=cells).reshape(-1, n_ell)


def _route_samples_numpy(coalitions, sizes, values, elements, est, cnt):
    n_sets, k = elements.shape
    rows = np.arange(n_sets)
    pow2 = np.int64(1) << np.arange(k, dtype=np.int64)
    for b in range(coalitions.shape[0]):
        bits = (coalitions[b] >> elements) & 1
        w = bits @ pow2
        ell = sizes[b] - bits.sum(axis=1)
        c = cnt[rows, w, ell]
        est[rows, w, ell] = (est[rows, w, ell] * c + values[b]) / (c + 1)
        cnt[rows, w, ell] = c + 1


def _draw_subsets_numpy(uniforms, sizes, pool):
    m = uniforms.shape[0]
    perm = np.tile(np.arange(pool, dtype=np.int64), (m, 1))
    rows = np.arange(m)
    top = int(sizes.max()) if m else 0
    for i in range(top):
        j = i + np.floor(uniforms[:, i] * (pool - i)).astype(np.int64)
        held = perm[rows, i].copy()
        perm[rows, i] = perm[rows, j]
        perm[rows, j] = held
    taken = np.arange(pool)[None, :] < sizes[:, None]
    return np.where(taken, np.int64(1) << perm, 0).sum(axis=1).astype(np.int64)


route_explicit_numba = njit(_route_explicit_loop)
route_samples_numba = njit(_route_samples_loop)
draw_subsets_numba = njit(_draw_subsets_loop)

route_explicit_numpy = _route_explicit_numpy
route_samples_numpy = _route_samples_numpy
draw_subsets_numpy = _draw_subsets_numpy

if USE_NUMBA:
    _route_explicit = route_explicit_numba
    _route_samples = route_samples_numba
    _draw_subsets = draw_subsets_numba
else:
    _route_explicit = route_explicit_numpy
    _route_samples = route_samples_numpy
    _draw_subsets = draw_subsets_numpy


def route_explicit(coalitions, sizes, values, elements, inv_binom, est, cnt):
    """Add ``value / C(n-k, l)`` of each coalition to its stratum of every set, in place."""
    _route_explicit(
        np.ascontiguousarray(coalitions, dtype=np.int64),
        np.ascontiguousarray(sizes, dtype=np.int64),
        np.ascontiguousarray(values, dtype=np.float64),
        elements,
        inv_binom,
        est,
        cnt,
    )


def route_samples(coalitions, sizes, values, elements, est, cnt):
    """Fold each sampled value into its stratum's running mean for every set, in place."""
    _route_samples(
        np.ascontiguousarray(coalitions, dtype=np.int64),
        np.ascontiguousarray(sizes, dtype=np.int64),
        np.ascontiguousarray(values, dtype=np.float64),
        elements,
        est,
        cnt,
    )


def draw_subsets(uniforms, sizes, pool):
    """Partial Fisher-Yates: row ``b`` picks ``sizes[b]`` of ``pool`` positions.

    ``uniforms`` is an ``(m, pool)`` array of U[0, 1) draws consumed in column
    order; the result is a bit mask over positions ``0..pool-1``.
    """
    return _draw_subsets(
        np.ascontiguousarray(uniforms, dtype=np.float64),
        np.ascontiguousarray(sizes, dtype=np.int64),
        int(pool),
    )
