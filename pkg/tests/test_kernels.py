from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest

from empchoice import _pykernels, kernels
from empchoice.classes import build_dominance_dag

try:
    from empchoice import _ckernels
except ImportError:  # extension not built
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")


def _index(rng, n, batch):
    return np.array([rng.permutation(n) for _ in range(batch)], dtype=np.int64)


def _same(a, b):
    return all(np.array_equal(np.asarray(x), np.asarray(y)) for x, y in zip(a, b))


def test_backend_is_reported():
    assert kernels.BACKEND in ("cython", "python")
    assert "python" in kernels.available_backends()


@needs_ext
def test_threshold_backends_agree(rng):
    for _ in range(50):
        n = int(rng.integers(2, 30))
        ranks = rng.integers(0, 6, n)
        n_ranks = int(ranks.max()) + 1
        zu = int(rng.integers(1, n))
        idx = _index(rng, n, 9)
        args = (ranks, n_ranks, idx, zu, 1.0 / zu, 1.0 / (n - zu))
        assert _same(_pykernels.threshold_batch(*args), _ckernels.threshold_batch(*args))


@needs_ext
@pytest.mark.parametrize("dim", [1, 2, 3])
def test_closure_backends_agree(dim, rng):
    for _ in range(40):
        n = int(rng.integers(2, 15))
        dag = build_dominance_dag(rng.integers(0, 4, (n, dim)).astype(float))
        zu = int(rng.integers(1, n))
        idx = _index(rng, n, 6)
        args = (dag.index, dag.n_nodes, dag.edges, idx, zu, 1.0 / zu, 1.0 / (n - zu))
        assert _same(_pykernels.closure_batch(*args), _ckernels.closure_batch(*args))


def test_pure_python_fallback_selected_by_env():
    env = dict(os.environ, EMPCHOICE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import empchoice.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_results_identical_under_fallback(table1):
    code = ("from empchoice import *; from empchoice.harness import data_path;"
            "p = load_protocol(data_path('prompting.csv'));"
            "r = membership_test(p, 'neutral', None, FsdIsotoneIndicators(), TestConfig(n_resamples=300));"
            "print([x.p_value for x in r.pairwise], [x.observed.value for x in r.pairwise])")
    outs = []
    for flag in ("1", ""):
        env = dict(os.environ)
        env.pop("EMPCHOICE_PURE_PYTHON", None)
        if flag:
            env["EMPCHOICE_PURE_PYTHON"] = flag
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                                   text=True, check=True).stdout)
    assert outs[0] == outs[1]
