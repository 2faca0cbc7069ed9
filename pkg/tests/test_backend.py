import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from interactionkit import _kernels
from interactionkit._backend import BACKEND, HAVE_NUMBA
from interactionkit.coalitions import popcount_array
from interactionkit.strata import StrataTable

pytestmark = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


def _tables(n, k):
    return StrataTable.empty(n, k), StrataTable.empty(n, k)


@settings(max_examples=30, deadline=None)
@given(st.integers(4, 10), st.integers(1, 3), st.integers(0, 2**32))
def test_route_samples_agree(n, k, seed):
    rng = np.random.default_rng(seed)
    coal = rng.integers(0, 1 << n, size=500)
    vals = rng.normal(size=500)
    a, b = _tables(n, k)
    for kernel, t in ((_kernels.route_samples_numba, a), (_kernels.route_samples_numpy, b)):
        kernel(coal, popcount_array(coal), vals, t.elements, t.est, t.cnt)
    assert np.array_equal(a.est, b.est)
    assert np.array_equal(a.cnt, b.cnt)


@settings(max_examples=30, deadline=None)
@given(st.integers(4, 10), st.integers(1, 3), st.integers(0, 2**32))
def test_route_explicit_agree(n, k, seed):
    rng = np.random.default_rng(seed)
    coal = np.arange(1 << n, dtype=np.int64)
    vals = rng.normal(size=coal.size)
    a, b = _tables(n, k)
    for kernel, t in ((_kernels.route_explicit_numba, a), (_kernels.route_explicit_numpy, b)):
        kernel(coal, popcount_array(coal), vals, t.elements, t.inv_binom, t.est, t.cnt)
    assert np.allclose(a.est, b.est, rtol=0, atol=1e-12)
    assert np.array_equal(a.cnt, b.cnt)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 20), st.integers(0, 2**32))
def test_draw_subsets_agree(pool, seed):
    rng = np.random.default_rng(seed)
    sizes = rng.integers(0, pool + 1, size=300)
    u = rng.random((300, pool))
    a = _kernels.draw_subsets_numba(u, sizes, pool)
    b = _kernels.draw_subsets_numpy(u, sizes, pool)
    assert np.array_equal(a, b)
    assert np.array_equal(popcount_array(a), sizes)
    assert np.all(a < (1 << pool))


def test_default_backend():
    expected = "numpy" if os.environ.get("INTERACTIONKIT_DISABLE_NUMBA", "") in {"1", "true", "yes", "on"} else "numba"
    assert BACKEND == expected


def test_disable_flag_gives_identical_estimates():
    code = (
        "from interactionkit import _backend, run_svarm_iq, EstimatorConfig, BudgetedOracle, soum_generate\n"
        "g = soum_generate(9, 40, 3)\n"
        "r = run_svarm_iq(BudgetedOracle(g, 300), EstimatorConfig(orders=(2, 3), seed=4))\n"
        "print(_backend.BACKEND)\n"
        "print(repr(r.estimates[(2, 'SII')].scores.tolist()))\n"
    )
    out = {}
    for flag in ("0", "1"):
        env = dict(os.environ, INTERACTIONKIT_DISABLE_NUMBA=flag)
        proc = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
        assert proc.returncode == 0, proc.stderr
        out[flag] = proc.stdout.splitlines()
    assert out["0"][0] == "numba" and out["1"][0] == "numpy"
    a, b = (np.array(eval(out[f][1])) for f in ("0", "1"))
    assert np.allclose(a, b, rtol=0, atol=1e-12)
