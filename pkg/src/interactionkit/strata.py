"""Dense storage of stratum means and their aggregation into interaction scores.

For an interaction set ``K`` of order ``k``, a subset ``W`` of ``K`` and a size
``l`` in ``0..n-k``, the stratum mean is the average of ``v(S | W)`` over all
``S`` disjoint from ``K`` with ``|S| = l``. Any cardinal interaction index is a
fixed linear combination of these means, which is what :func:`aggregate`
evaluates.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from . import _kernels
from .coalitions import interaction_sets, popcount_array


def subset_order(k: int) -> np.ndarray:
    """Summation order over ``W``: largest subsets first, then ascending pattern.

    For ``k = 2`` this is ``{i,j}, {i}, {j}, {}``.
    """
    w = np.arange(1 << k)
    return w[np.lexsort((w, -popcount_array(w)))]


@dataclass(eq=False)
class StrataTable:
    """All stratum estimates and sample counters for one order ``k``.

    ``est`` and ``cnt`` have shape ``(C(n,k), 2**k, n-k+1)``; ``explicit[w, l]``
    marks strata whose coalition size ``l + |W|`` was enumerated exhaustively
    (the flag depends only on ``(w, l)``, not on the set).
    """

    n: int
    k: int
    masks: np.ndarray
    elements: np.ndarray
    est: np.ndarray
    cnt: np.ndarray
    explicit: np.ndarray

    @classmethod
    def empty(cls, n: int, k: int) -> "StrataTable":
        masks, elements = interaction_sets(n, k)
        shape = (masks.size, 1 << k, n - k + 1)
        return cls(
            n=n,
            k=k,
            masks=masks,
            elements=elements,
            est=np.zeros(shape),
            cnt=np.zeros(shape, dtype=np.int64),
            explicit=np.zeros(shape[1:], dtype=bool),
        )

    @property
    def w_sizes(self) -> np.ndarray:
        return popcount_array(np.arange(1 << self.k))

    @property
    def stratum_sizes(self) -> np.ndarray:
        """Coalition size ``l + |W|`` of every ``(w, l)`` cell."""
        return self.w_sizes[:, None] + np.arange(self.n - self.k + 1)[None, :]

    @property
    def inv_binom(self) -> np.ndarray:
        m = self.n - self.k
        return np.array([1.0 / comb(m, ell) for ell in range(m + 1)])

    def w_mask(self, row: int, w: int) -> int:
        """The coalition ``W`` encoded by pattern ``w`` on set ``row``."""
        out = 0
        for j, p in enumerate(self.elements[row]):
            if (w >> j) & 1:
                out |= 1 << int(p)
        return out

    def mark_explicit(self, sizes) -> None:
        self.explicit = np.isin(self.stratum_sizes, np.asarray(list(sizes)))

    def add_explicit(self, coalitions, sizes, values) -> None:
        _kernels.route_explicit(
            coalitions, sizes, values, self.elements, self.inv_binom, self.est, self.cnt
        )

    def add_samples(self, coalitions, sizes, values) -> None:
        _kernels.route_samples(coalitions, sizes, values, self.elements, self.est, self.cnt)

    def implicit_cells(self) -> np.ndarray:
        return ~self.explicit

    def empty_implicit_count(self) -> int:
        return int(((self.cnt == 0) & ~self.explicit[None]).sum())


def alternating_sums(est: np.ndarray, k: int) -> np.ndarray:
    """``sum_W (-1)**(k-|W|) est[:, W, l]`` per set and size, in :func:`subset_order`."""
    sizes = popcount_array(np.arange(1 << k))
    order = subset_order(k)
    first = order[0]
    inner = est[:, first, :] * (-1.0) ** (k - sizes[first])
    for w in order[1:]:
        if (k - sizes[w]) % 2:
            inner = inner - est[:, w, :]
        else:
            inner = inner + est[:, w, :]
    return inner


def aggregate(est: np.ndarray, k: int, coefficients: np.ndarray) -> np.ndarray:
    """Interaction scores ``sum_l coef[l] * sum_W (-1)**(k-|W|) est[:, W, l]``.

    ``coefficients[l]`` is ``C(n-k, l) * lambda_{k,l}``. A constant coefficient
    profile (SII at k = 2 and any order-1 Shapley kind among them) is factored
    out of the sum.
    """
    inner = alternating_sums(est, k)
    coefficients = np.asarray(coefficients, dtype=np.float64)
    if np.all(coefficients == coefficients[0]):
        return coefficients[0] * inner.sum(axis=1)
    return (inner * coefficients[None, :]).sum(axis=1)
