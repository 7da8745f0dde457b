import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from besovlab import _core_py, _kernels
from besovlab.halfline import PiecewisePower

_core = pytest.importorskip("besovlab._core", reason="compiled backend not built")


def test_backend_selected_at_import():
    assert _kernels.BACKEND == _core.BACKEND != _core_py.BACKEND
    env = dict(os.environ, BESOVLAB_PURE="1")
    out = subprocess.run(
        [sys.executable, "-c", "from besovlab import _kernels; print(_kernels.BACKEND)"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert out.stdout.strip() == _core_py.BACKEND


def _flat():
    g = PiecewisePower.continuous_powers(2.0, np.geomspace(1e-2, 1e2, 7), np.linspace(2.0, 0.25, 8))
    h = PiecewisePower([1.0], [((4.0, 0.75, 0), (-2.0, 1.0, 0)), ((2.0, 0.0, 0), (1.0, 0.25, 1))])
    return g._flat, h._flat


def test_pl_eval_parity():
    ts = np.geomspace(1e-5, 1e5, 2001)
    for breaks, offs, coef, expo, logp in _flat():
        a = _core.pl_eval(breaks, offs, coef, expo, logp, ts)
        b = _core_py.pl_eval(breaks, offs, coef, expo, logp, ts)
        np.testing.assert_allclose(a, b, rtol=1e-14)
        for t in (1e-3, 1.0, 7.5):
            assert _core.pl_eval_scalar(breaks, offs, coef, expo, logp, t) == pytest.approx(
                _core_py.pl_eval_scalar(breaks, offs, coef, expo, logp, t), rel=1e-14
            )
            assert _core.seg_index(breaks, t) == _core_py.seg_index(breaks, t)


def test_seg_root_parity():
    _, (_, offs, coef, expo, logp) = _flat()
    for y in np.linspace(0.05, 1.9, 37):
        a = _core.seg_root(offs, coef, expo, logp, 0, y, 1e-12, 1.0, 1e-15)
        b = _core_py.seg_root(offs, coef, expo, logp, 0, y, 1e-12, 1.0, 1e-15)
        assert a == pytest.approx(b, rel=1e-13)
        assert _core_py.seg_eval(offs, coef, expo, logp, 0, a) == pytest.approx(y, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(
    st.tuples(st.integers(1, 4), st.integers(1, 20), st.integers(1, 4)),
    st.integers(1, 4),
    st.sampled_from([1.0, 1.5, 2.0, 3.0]),
    st.integers(0, 2**16),
)
def test_kdiff_parity(shape, k, p, seed):
    a3 = np.random.default_rng(seed).standard_normal(shape)
    shifts = np.arange(1, shape[1] + 3, dtype=np.int64)
    for m in (1, shape[1]):
        np.testing.assert_allclose(_core.kdiff(a3, k, m), _core_py.kdiff(a3, k, m), rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(
        _core.kdiff_power_sums(a3, k, shifts, p), _core_py.kdiff_power_sums(a3, k, shifts, p), rtol=1e-12
    )
