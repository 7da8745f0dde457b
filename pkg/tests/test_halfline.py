import math

import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st
from scipy import integrate

from besovlab.errors import PreconditionError
from besovlab.halfline import (
    Inverter,
    LogGrid,
    PiecewisePower,
    SampledHalflineFunction,
    evaluate,
    fit_piecewise_power,
    inverse,
    min_envelope,
    weighted_calL_norm,
)

MIN_T_1 = PiecewisePower.powers([1.0], [1.0, 1.0], [1.0, 0.0])


def quad_norm(g, a, theta):
    """Independent oracle: adaptive quadrature in log t, split at the breaks.

    The log-range is cut 400 units beyond the outer breaks; every test instance
    decays at least like exp(-0.1 |x|) there, so the cut-off is below 1e-17.
    """
    inner = [math.log(b) for b in g.breaks] or [0.0]
    edges = [inner[0] - 400.0] + inner + [inner[-1] + 400.0]
    edges = sorted(set(edges))
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(
            lambda x: (math.exp(-a * x) * float(g(math.exp(x)))) ** theta, lo, hi, epsabs=0, epsrel=1e-12, limit=500
        )
        total += val
    return total ** (1 / theta)


def test_evaluate_examples():
    assert evaluate(MIN_T_1, 0.25) == 0.25
    assert evaluate(MIN_T_1, 4.0) == 1.0
    assert evaluate(PiecewisePower.monomial(2.0, 3.0), 2.0) == 16.0


def test_inverse_examples():
    assert inverse(PiecewisePower.monomial(1.0, 3.0), 8.0) == pytest.approx(2.0, rel=1e-15)
    g = PiecewisePower.powers([1.0], [1.0, 1.0], [1.0, 2.0])
    assert inverse(g, 4.0) == pytest.approx(2.0, rel=1e-15)
    with pytest.raises(PreconditionError):
        inverse(MIN_T_1, 0.5)


def test_calL_norm_examples():
    assert weighted_calL_norm(MIN_T_1, 0.5, 2) == pytest.approx(math.sqrt(2), rel=1e-14)
    assert weighted_calL_norm(MIN_T_1, 0.5, math.inf) == pytest.approx(1.0, rel=1e-14)
    assert weighted_calL_norm(PiecewisePower.monomial(1.0, 0.5), 0.5, 2) == math.inf


def test_log_segment_is_exact():
    # t^{-1} * t on (0,1] gives a flat integrand; the closed form involves a logarithm
    g = PiecewisePower.powers([1.0, 4.0], [1.0, 1.0, 4.0], [2.0, 1.0, 0.0])
    assert weighted_calL_norm(g, 1.0, 1) == pytest.approx(quad_norm(g, 1.0, 1), rel=1e-10)


def test_min_envelope_examples():
    one, t = PiecewisePower.monomial(1.0, 0.0), PiecewisePower.monomial(1.0, 1.0)
    m = min_envelope(t, one)
    assert list(m.breaks) == [1.0]
    m2 = min_envelope(PiecewisePower.monomial(1.0, 2.0), t)
    assert list(m2.breaks) == [1.0]
    assert m2(0.5) == 0.25 and m2(3.0) == 3.0
    pts = np.geomspace(1e-3, 1e3, 50)
    assert np.array_equal(min_envelope(t, t)(pts), t(pts))


def test_fit_examples():
    grid = LogGrid(1e-2, 1e2, 8)
    s = SampledHalflineFunction.sample(np.sqrt, grid)
    fit = fit_piecewise_power(s)
    assert fit.n_segments == 1
    c, e, m = fit.terms[0][0]
    assert e == pytest.approx(0.5, rel=1e-13) and c == pytest.approx(1.0, rel=1e-13)
    two = fit_piecewise_power(SampledHalflineFunction([1.0, 10.0], [1.0, 100.0]))
    assert two.terms[0][0][:2] == pytest.approx((1.0, 2.0), rel=1e-14)
    with pytest.raises(PreconditionError):
        fit_piecewise_power(SampledHalflineFunction([1.0, 2.0], [0.0, 1.0]))


def test_continuity_enforced():
    with pytest.raises(PreconditionError):
        PiecewisePower.powers([1.0], [1.0, 2.0], [1.0, 1.0])


@st.composite
def integrable_pieces(draw, a=0.5):
    """Continuous piecewise powers with t^{-a} g integrable at both ends."""
    m = draw(st.integers(0, 4))
    breaks = sorted(x / 10 for x in draw(st.lists(st.integers(-20, 20), min_size=m, max_size=m, unique=True)))
    inner = draw(st.lists(st.floats(0.05, 2.5), min_size=max(m - 1, 0), max_size=max(m - 1, 0)))
    first = draw(st.floats(a + 0.1, a + 2.0))
    last = draw(st.floats(0.0, a - 0.1))
    exps = [first] + inner + [last] if m else [first]
    if not m:
        return None
    c0 = draw(st.floats(0.1, 10))
    return PiecewisePower.continuous_powers(c0, [10.0**b for b in breaks], exps)


@settings(max_examples=40, deadline=None)
@given(integrable_pieces(), st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_calL_norm_matches_quadrature(g, theta):
    if g is None:
        return
    assert weighted_calL_norm(g, 0.5, theta) == pytest.approx(quad_norm(g, 0.5, theta), rel=1e-9)


@st.composite
def increasing_pieces(draw):
    m = draw(st.integers(0, 5))
    breaks = sorted(x / 10 for x in draw(st.lists(st.integers(-30, 30), min_size=m, max_size=m, unique=True)))
    exps = draw(st.lists(st.floats(0.1, 4.0), min_size=m + 1, max_size=m + 1))
    return PiecewisePower.continuous_powers(draw(st.floats(0.01, 100)), [10.0**b for b in breaks], exps)


@settings(max_examples=60, deadline=None)
@given(increasing_pieces(), st.floats(-6, 6))
def test_inverse_roundtrip(g, logt):
    t = 10.0**logt
    assert inverse(g, float(g(t))) == pytest.approx(t, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(increasing_pieces(), increasing_pieces(), increasing_pieces())
@example(  # near-equal exponents with a far-away crossing
    PiecewisePower.monomial(1.0, 1.0),
    PiecewisePower.monomial(1.0, 3.4375),
    PiecewisePower.continuous_powers(1.0, [1.0, 10**0.1, 10**0.2, 10.0], [1.0, 1.0, 1.0, 1.0, 3.4453125]),
)
def test_min_envelope_laws(a, b, c):
    pts = np.geomspace(1e-4, 1e4, 1000)
    ab, ba = min_envelope(a, b), min_envelope(b, a)
    np.testing.assert_allclose(ab(pts), ba(pts), rtol=1e-12)
    np.testing.assert_allclose(min_envelope(ab, c)(pts), min_envelope(a, min_envelope(b, c))(pts), rtol=1e-12)
    np.testing.assert_allclose(min_envelope(a, a)(pts), a(pts), rtol=1e-12)
    np.testing.assert_allclose(ab(pts), np.minimum(a(pts), b(pts)), rtol=1e-12)


@settings(max_examples=30, deadline=None)
@given(increasing_pieces())
def test_fit_reproduces_piecewise_power(g):
    nodes = np.unique(np.concatenate((np.geomspace(1e-4, 1e4, 33), g.breaks)))
    fit = fit_piecewise_power(SampledHalflineFunction(nodes, g(nodes)))
    pts = np.geomspace(1e-5, 1e5, 400)
    np.testing.assert_allclose(fit(pts), g(pts), rtol=1e-10)


def test_inverter_range_check():
    inv = Inverter(PiecewisePower.monomial(1.0, 2.0))
    assert inv(9.0) == pytest.approx(3.0, rel=1e-15)
    with pytest.raises(PreconditionError):
        inv(0.0)


def test_sampled_function_csv_roundtrip():
    s = SampledHalflineFunction([0.5, 1.0, 2.0], [1.0, 2.0, 2.5], monotone=True)
    back = SampledHalflineFunction.from_csv(s.to_csv())
    assert np.array_equal(back.nodes, s.nodes) and np.array_equal(back.values, s.values)
    assert s.at(0.75) == 1.0 and s.at(0.1) == 0.0


def test_loggrid_nodes():
    g = LogGrid(1e-3, 1e3, 16)
    nodes = g.nodes
    assert nodes[0] == 1e-3 and nodes[-1] == 1e3 and nodes.size == 97
    assert LogGrid.parse("0.5:8:4") == LogGrid(0.5, 8.0, 4.0)
    with pytest.raises(PreconditionError):
        LogGrid(1.0, 0.5)
