"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--n 12] [--k 2] [--samples 20000] [--repeat 5]

Each kernel is compiled once before timing. Both backends are also checked
for agreement on the same inputs.
"""

import argparse
import timeit

import numpy as np

from interactionkit import _kernels
from interactionkit._backend import HAVE_NUMBA
from interactionkit.coalitions import all_coalitions, popcount_array
from interactionkit.game import soum_generate
from interactionkit.strata import StrataTable


def _fresh(n, k):
    t = StrataTable.empty(n, k)
    return t, t.est, t.cnt


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--samples", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    n, k = args.n, args.k
    rng = np.random.default_rng(0)
    game = soum_generate(n, 50, 0)
    masks = all_coalitions(n)
    sizes = popcount_array(masks)
    values = game.values(masks)
    s_sizes = rng.integers(2, n - 1, size=args.samples).astype(np.int64)
    uniforms = rng.random((args.samples, n))
    s_masks = _kernels.draw_subsets_numpy(uniforms, s_sizes, n)
    s_values = game.values(s_masks)

    cases = {
        "route_explicit (2^n coalitions)": (
            lambda fn: (lambda: fn(masks, sizes, values, *_explicit_args(n, k))),
            _kernels.route_explicit_numba,
            _kernels.route_explicit_numpy,
        ),
        f"route_samples ({args.samples} draws)": (
            lambda fn: (lambda: fn(s_masks, s_sizes, s_values, *_sample_args(n, k))),
            _kernels.route_samples_numba,
            _kernels.route_samples_numpy,
        ),
        f"draw_subsets ({args.samples} draws)": (
            lambda fn: (lambda: fn(uniforms, s_sizes, n)),
            _kernels.draw_subsets_numba,
            _kernels.draw_subsets_numpy,
        ),
    }

    print(f"n={n} k={k}  best of {args.repeat}")
    print(f"{'kernel':38s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for name, (make, fast, slow) in cases.items():
        make(fast)()  # compile
        tf = min(timeit.repeat(make(fast), number=1, repeat=args.repeat)) * 1e3
        ts = min(timeit.repeat(make(slow), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:38s} {tf:10.2f} {ts:10.2f} {ts / tf:7.1f}x")

    t1, e1, c1 = _fresh(n, k)
    t2, e2, c2 = _fresh(n, k)
    _kernels.route_samples_numba(s_masks, s_sizes, s_values, t1.elements, e1, c1)
    _kernels.route_samples_numpy(s_masks, s_sizes, s_values, t2.elements, e2, c2)
    same = np.array_equal(e1, e2) and np.array_equal(c1, c2)
    same &= np.array_equal(
        _kernels.draw_subsets_numba(uniforms, s_sizes, n), _kernels.draw_subsets_numpy(uniforms, s_sizes, n)
    )
    print("backends agree bit for bit:", same)


def _explicit_args(n, k):
    t, est, cnt = _fresh(n, k)
    return t.elements, t.inv_binom, est, cnt


def _sample_args(n, k):
    t, est, cnt = _fresh(n, k)
    return t.elements, est, cnt


if __name__ == "__main__":
    main()
