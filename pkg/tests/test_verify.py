import math

import numpy as np
import pytest

from besovlab.errors import AdmissibilityError, PreconditionError
from besovlab.grid_fn import GridFunction
from besovlab.params import derive, embedding_target
from besovlab.verify import (
    CheckConfig,
    FamilySpec,
    builtin_family,
    check_limit,
    check_metrics,
    check_nolimit,
    dilation_sweep,
    lambda_set,
    parse_family,
    relative_change,
    reports_to_csv,
    run_check,
    split_norm,
)

PISO = derive(2, (0.5, 0.5), (1, 1), (math.inf, math.inf))
PAN = derive(2, (0.5, 0.25), (1, 1), (2, math.inf))
WORKED = derive(2, (1, 3), (2, 2), (1, math.inf))


def test_box_is_all_ones():
    f = builtin_family(FamilySpec("box"))
    assert np.all(f.samples == 1.0) and f.extents == (1.0, 1.0)


def test_hat_rising_edge_is_linear():
    f = builtin_family(FamilySpec("hat", extents=(1.0,), lam=(1.0,), res=(16,)))
    edge = f.samples[:3]
    assert np.allclose(np.diff(edge), edge[1] - edge[0]) and edge[1] > edge[0]


def test_bspline_one_is_hat():
    a = builtin_family(parse_family("bspline(1)"))
    b = builtin_family(parse_family("hat"))
    np.testing.assert_allclose(a.samples, b.samples, atol=1e-15)
    assert parse_family("bspline(3)").label == "bspline(3)"


def test_bump_profile_vanishes_at_ends():
    f = builtin_family(FamilySpec("bump", res=(64, 8)))
    assert f.samples.max() <= 1 and f.samples[0, 0] < 1e-4


def test_family_validation():
    with pytest.raises(PreconditionError):
        FamilySpec("box", res=(4, 32))
    with pytest.raises(PreconditionError):
        FamilySpec("box", lam=(32.0, 1.0))
    with pytest.raises(PreconditionError):
        FamilySpec("sawtooth")


def test_dilation_only_moves_geometry():
    base = FamilySpec("hat", res=(16, 16))
    a, b = builtin_family(base), builtin_family(base.with_lam((4.0, 0.25)))
    assert np.array_equal(a.samples, b.samples) and b.spacing == (4 / 16, 0.25 / 16)


@pytest.mark.parametrize("check", ["limit", "nolimit", "metrics"])
def test_zero_function_reports_zero(check):
    zero = GridFunction(np.zeros((16, 16)), (1 / 16, 1 / 16), (0.0, 0.0))
    if check == "limit":
        rep = check_limit(zero, PISO, (1, 1))
    elif check == "nolimit":
        rep = check_nolimit(zero, PAN, 1.1, 1.0, 1.0, (1, 1))
    else:
        rep = check_metrics(zero, PISO, embedding_target(PISO, (1.2, 1.2)), 0, (1, 1))
    assert rep.lhs == 0 and rep.rhs_sum == 0 and rep.ratio_sum is None
    assert "0/0" in rep.csv_row()


def test_limit_box_closed_form():
    f = builtin_family(FamilySpec("box"))
    rep = check_limit(f, PISO, (1, 1))
    assert rep.meta["q_star"] == pytest.approx(4 / 3, rel=1e-15)
    # f* = 1 on (0, 1], so the weak-type norm is 1; each axis seminorm is sup 2 min(h,1) h^{-1/2} = 2
    assert rep.lhs == pytest.approx(1.0, rel=1e-14)
    assert rep.meta["seminorms"] == pytest.approx((2.0, 2.0), rel=1e-12)
    assert rep.rhs_prod == pytest.approx(2.0, rel=1e-12) and rep.rhs_sum == pytest.approx(4.0, rel=1e-12)
    assert rep.ratio_prod == pytest.approx(0.5, rel=1e-12)


def test_limit_needs_limit_exponent():
    with pytest.raises(AdmissibilityError):
        check_limit(builtin_family(FamilySpec("bump")), WORKED, (2, 4))


def test_limit_dilation_drift():
    cfg = CheckConfig("limit", PISO, (1, 1))
    sweep = dilation_sweep(FamilySpec("hat"), [(4.0, 0.25), (1.0, 1.0)], cfg)
    assert sweep.drift <= 0.10
    same = sweep.reports[1]
    assert same.ratio_prod == sweep.base.ratio_prod and same.lhs == sweep.base.lhs


def test_metrics_dilation_drift():
    cfg = CheckConfig("metrics", PISO, (1, 1), target=embedding_target(PISO, (1.2, 1.2)))
    sweep = dilation_sweep(FamilySpec("box"), [(2.0, 1.0)], cfg)
    assert sweep.drift <= 0.10
    assert sweep.to_csv().startswith("check,family,lam,")


def test_metrics_box_isotropic_finite():
    f = builtin_family(FamilySpec("box"))
    T = embedding_target(PISO, (1.2, 1.2))
    rep = check_metrics(f, PISO, T, 0, (1, 1))
    assert 0 < rep.ratio_prod < math.inf and 0 < rep.ratio_sum < math.inf
    assert rep.meta["amgm_holds"] and rep.meta["lorentz_monotone"]
    assert sum(rep.meta["weights"]) == pytest.approx(1.0, rel=1e-14)


def test_metrics_worked_set_on_bump():
    f = builtin_family(FamilySpec("bump"))
    T = embedding_target(WORKED, (4, 4))
    rep = check_metrics(f, WORKED, T, 0, (2, 4))
    assert rep.meta["theta_prime"] == pytest.approx(12 / 11, rel=1e-15)
    assert 0 < rep.ratio_prod < math.inf
    assert rep.meta["amgm_holds"] and rep.meta["lorentz_monotone"]


def test_metrics_target_order_check():
    T = embedding_target(WORKED, (4, 4))
    with pytest.raises(PreconditionError):
        check_metrics(builtin_family(FamilySpec("bump")), WORKED, T, 0, (2, 4), k_target=0)


@pytest.mark.parametrize("family", ["box", "hat"])
def test_resolution_convergence(family):
    cfgs = [
        CheckConfig("limit", PISO, (1, 1)),
        CheckConfig("metrics", PISO, (1, 1), target=embedding_target(PISO, (1.2, 1.2))),
    ]
    for cfg in cfgs:
        a = run_check(FamilySpec(family, res=(32, 32)), cfg)
        b = run_check(FamilySpec(family, res=(64, 64)), cfg)
        assert relative_change(b.ratio_prod, a.ratio_prod) <= 0.10


def test_nolimit_box_resolution_stability():
    ratios = []
    for N in (16, 32, 64):
        rep = check_nolimit(builtin_family(FamilySpec("box", res=(N, N))), PAN, 1.1, 1.0, 1.0, (1, 1))
        ratios.append(rep.ratio_sum)
    assert max(ratios) / min(ratios) - 1 <= 0.15


def test_nolimit_small_second_index_grows():
    f = builtin_family(FamilySpec("hat"))
    ratios = [check_nolimit(f, PAN, 1.1, s, 1.0, (1, 1)).ratio_sum for s in (1.0, 0.5, 0.25, 0.125)]
    assert all(math.isfinite(x) for x in ratios)
    assert all(a < b for a, b in zip(ratios, ratios[1:]))


def test_nolimit_admissibility():
    f = builtin_family(FamilySpec("box"))
    with pytest.raises(PreconditionError):
        check_nolimit(f, PAN, 0.9, 1.0, 1.0, (1, 1))


def test_split_norm_box():
    # box: f* = 1 on (0, 1], y* = 1, so the L^1 part vanishes
    value, y = split_norm(builtin_family(FamilySpec("box")), 2.0)
    assert y == 1.0 and value == pytest.approx(1.0, rel=1e-14)


def test_lambda_set_and_csv():
    lams = lambda_set(-1, 1, 2)
    assert len(lams) == 9 and (0.5, 2.0) in lams
    rep = run_check(FamilySpec("box"), CheckConfig("limit", PISO, (1, 1)))
    text = reports_to_csv([rep])
    assert text.splitlines()[1].startswith("limit,box,1;1,")
    assert "meta.q_star" in rep.summary()
