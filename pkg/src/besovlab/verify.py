"""Desk-scale checks of the embedding inequalities on analytic families.

Each check returns a :class:`VerificationReport` with the left side, a sum-form
and a product-form right side, and their ratios.  The product forms are exactly
homogeneous under anisotropic dilations, so ``dilation_sweep`` can test them
without knowing any constant.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline

from .construct import _ratio, pointwise_estimate
from .errors import PreconditionError
from .grid_fn import GridFunction, lorentz_norm, rearrangement
from .halfline import LogGrid
from .params import AnisoParams, EmbeddingTarget, limit_exponent, recip
from .smoothness import (
    Metric,
    aniso_seminorms,
    besov_seminorm,
    default_hgrid,
    default_tgrid,
)

FAMILIES = ("box", "hat", "bspline", "bump")
BUMP_POWER = 4
LAMBDA_RANGE = (2.0**-4, 2.0**4)


@dataclass(frozen=True)
class FamilySpec:
    """A built-in test function: ``name`` in ``box|hat|bspline|bump``.

    ``degree`` is only used by ``bspline``.  The reference function lives on
    ``[0, extents]``; the dilation ``lam`` maps it to ``[0, extents * lam]``.
    """

    name: str
    extents: tuple = (1.0, 1.0)
    lam: tuple = (1.0, 1.0)
    res: tuple = (32, 32)
    degree: int = 1

    def __post_init__(self):
        if self.name not in FAMILIES:
            raise PreconditionError(f"unknown family {self.name!r}; expected one of {', '.join(FAMILIES)}")
        n = len(self.res)
        if not (len(self.extents) == len(self.lam) == n):
            raise PreconditionError("extents, lam and res need one entry per axis")
        if any(int(N) < 8 for N in self.res):
            raise PreconditionError("resolution must be at least 8 cells per axis")
        lo, hi = LAMBDA_RANGE
        if any(not lo <= float(l) <= hi for l in self.lam):
            raise PreconditionError("dilation components must lie in [2^-4, 2^4]")
        if any(not float(e) > 0 for e in self.extents):
            raise PreconditionError("extents must be positive")
        if self.name == "bspline" and self.degree < 0:
            raise PreconditionError("bspline degree must be >= 0")

    @property
    def label(self) -> str:
        return f"bspline({self.degree})" if self.name == "bspline" else self.name

    def with_lam(self, lam) -> "FamilySpec":
        return FamilySpec(self.name, self.extents, tuple(float(x) for x in lam), self.res, self.degree)

    def with_res(self, res) -> "FamilySpec":
        return FamilySpec(self.name, self.extents, self.lam, tuple(int(x) for x in res), self.degree)


def parse_family(text: str, **kw) -> FamilySpec:
    """``box``, ``hat``, ``bump`` or ``bspline(d)``."""
    s = text.strip().lower()
    if s.startswith("bspline"):
        inner = s[len("bspline"):].strip("() ")
        return FamilySpec("bspline", degree=int(inner or 1), **kw)
    return FamilySpec(s, **kw)


def _profile(spec: FamilySpec, u: np.ndarray) -> np.ndarray:
    """1-D profile on reference coordinates ``u`` in (0, 1)."""
    if spec.name == "box":
        return np.ones_like(u)
    if spec.name == "hat":
        return 1.0 - np.abs(2.0 * u - 1.0)
    if spec.name == "bump":
        return np.clip(1.0 - (2.0 * u - 1.0) ** 2, 0.0, None) ** BUMP_POWER
    d = spec.degree
    if d == 0:
        return np.ones_like(u)
    element = BSpline.basis_element(np.linspace(0.0, 1.0, d + 2), extrapolate=False)
    return np.nan_to_num(element(u))


def builtin_family(spec: FamilySpec) -> GridFunction:
    """Tensor-product samples at cell midpoints.

    Samples depend only on the resolution, the dilation only scales the cell
    geometry, so ``f_lam(x) = f(x / lam)`` holds exactly at the sample level.
    """
    profiles = [_profile(spec, (np.arange(N) + 0.5) / N) for N in spec.res]
    samples = profiles[0]
    for prof in profiles[1:]:
        samples = np.multiply.outer(samples, prof)
    lengths = tuple(float(e) * float(l) for e, l in zip(spec.extents, spec.lam))
    return GridFunction.on_box(samples, lengths)


# --- reports -----------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return "0/0"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (tuple, list)):
        return ";".join(_fmt(v) for v in x)
    if isinstance(x, (int, float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


@dataclass
class VerificationReport:
    """One instance of one check.

    ``ratio_sum = lhs / rhs_sum`` and ``ratio_prod = lhs / rhs_prod``; a ratio of
    ``None`` marks ``0/0``.
    """

    check: str
    lhs: float
    rhs_sum: float
    rhs_prod: float
    ratio_sum: float | None
    ratio_prod: float | None
    params: dict
    meta: dict = field(default_factory=dict)
    family: str = ""
    lam: tuple = ()

    CSV_HEADER = "check,family,lam,lhs,rhs_sum,rhs_prod,ratio_sum,ratio_prod"

    def csv_row(self) -> str:
        return ",".join(
            [self.check, self.family, _fmt(tuple(self.lam)), _fmt(self.lhs), _fmt(self.rhs_sum),
             _fmt(self.rhs_prod), _fmt(self.ratio_sum), _fmt(self.ratio_prod)]
        )

    def summary(self) -> str:
        lines = [f"check = {self.check}"]
        if self.family:
            lines.append(f"family = {self.family}")
        if self.lam:
            lines.append(f"lam = {_fmt(tuple(self.lam))}")
        for key in ("lhs", "rhs_sum", "rhs_prod", "ratio_sum", "ratio_prod"):
            lines.append(f"{key} = {_fmt(getattr(self, key))}")
        for key, val in self.params.items():
            lines.append(f"param.{key} = {_fmt(val)}")
        for key, val in self.meta.items():
            lines.append(f"meta.{key} = {_fmt(val)}")
        return "\n".join(lines) + "\n"


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    buf.write(VerificationReport.CSV_HEADER + "\n")
    for rep in reports:
        buf.write(rep.csv_row() + "\n")
    return buf.getvalue()


def _param_dict(params: AnisoParams) -> dict:
    return {
        "n": params.n,
        "r_j": tuple(float(x) for x in params.r_j),
        "p_j": tuple(float(x) for x in params.p_j),
        "theta_j": tuple(float(x) for x in params.theta_j),
        "r": float(params.r),
        "p": float(params.p),
        "theta": float(params.theta),
    }


def _orders(k, n):
    k = tuple(int(x) for x in k) if np.ndim(k) else (int(k),) * n
    if len(k) != n:
        raise PreconditionError(f"orders need {n} entries")
    return k


def hgrids(f: GridFunction, ppd: float = 16) -> list:
    """Default per-axis h-grids at ``ppd`` points per decade."""
    return [default_hgrid(f, j, ppd) for j in range(f.n)]


def _grids(f, grids):
    if grids is None:
        return hgrids(f)
    if isinstance(grids, (int, float)):
        return hgrids(f, float(grids))
    if isinstance(grids, LogGrid):
        return [grids] * f.n
    return list(grids)


def _weighted_product(values, weights):
    if any(v == 0 for v, w in zip(values, weights) if w > 0):
        return 0.0
    return math.prod(v**w for v, w in zip(values, weights))


def _meta_from(semis) -> dict:
    return {
        "seminorms": tuple(s.value for s in semis),
        "kappa_hat": tuple(s.kappa_hat for s in semis),
        "h_range": tuple(x for s in semis for x in (s.h_min, s.h_max)),
        "tail_exact": all(s.tail_exact for s in semis),
    }


# --- checks ------------------------------------------------------------------


def check_limit(f: GridFunction, params: AnisoParams, k, grids=None) -> VerificationReport:
    """``||f||_{q*, theta}`` against ``prod_j b_j^{r/(n r_j)}``."""
    q_star = float(limit_exponent(params))
    n = params.n
    k = _orders(k, n)
    semis = aniso_seminorms(f, params, k, _grids(f, grids))
    b = [s.value for s in semis]
    w = [float(params.r) / (n * float(rj)) for rj in params.r_j]
    lhs = lorentz_norm(rearrangement(f), q_star, float(params.theta))
    prod = _weighted_product(b, w)
    total = math.fsum(b)
    meta = {"q_star": q_star, "orders": k, **_meta_from(semis), "weights": tuple(w)}
    return VerificationReport("limit", lhs, total, prod, _ratio(lhs, total), _ratio(lhs, prod), _param_dict(params), meta)


def split_norm(f: GridFunction, p0: float):
    """Upper proxy for ``||f||_{L^1 + L^{p0}}`` by truncating at ``y* = f*(1)``.

    Returns ``(value, y_star)``.  For this model the proxy exceeds the infimum
    by at most a factor 2.
    """
    if not p0 > 0:
        raise PreconditionError("p0 must be positive")
    y = float(rearrangement(f)(1.0))
    a = np.abs(f.samples)
    vol = f.cell_volume
    big = np.clip(a - y, 0.0, None)
    small = np.minimum(a, y)
    g1 = float(np.sum(big) * vol)
    hp = float((np.sum(small**p0) * vol) ** (1.0 / p0)) if p0 < math.inf else float(small.max(initial=0.0))
    return g1 + hp, y


def check_nolimit(f: GridFunction, params: AnisoParams, q, s, p0, k, grids=None) -> VerificationReport:
    """``||f||_{q,s}`` against ``||f||_{L^1+L^{p0}} + prod_j b_j^{r/(n r_j)}``."""
    n = params.n
    bound = recip(params.p) - params.r / params.n
    if not 1.0 / p0 > bound:
        raise PreconditionError(f"1/p0 > 1/p - r/n violated (1/p0 = {1.0 / p0:.17g}, 1/p - r/n = {float(bound):.17g})")
    if not max(1.0, p0) < q < math.inf:
        raise PreconditionError(f"max(1, p0) < q < inf violated (q = {q:.17g})")
    if not 1.0 / q > bound:
        raise PreconditionError(f"1/q > 1/p - r/n violated (1/q = {1.0 / q:.17g}, 1/p - r/n = {float(bound):.17g})")
    if not s > 0:
        raise PreconditionError("s must be positive")
    k = _orders(k, n)
    semis = aniso_seminorms(f, params, k, _grids(f, grids))
    w = [float(params.r) / (n * float(rj)) for rj in params.r_j]
    prod = _weighted_product([x.value for x in semis], w)
    split, y_star = split_norm(f, p0)
    lhs = lorentz_norm(rearrangement(f), q, s)
    total = split + prod
    meta = {
        "q": q, "s": s, "p0": p0, "y_star": y_star, "split_norm": split,
        "split_factor_bound": 2.0, "orders": k, **_meta_from(semis),
    }
    return VerificationReport("nolimit", lhs, total, prod, _ratio(lhs, total), _ratio(lhs, prod), _param_dict(params), meta)


def metrics_delta(params: AnisoParams, q1) -> float:
    """Equalisation slack for the different-metrics setting, capped by the standalone one."""
    extra = (recip(q1) - recip(params.p) + params.r / params.n) / 2
    return float(min(params.lemma_delta(), extra))


def check_metrics(
    f: GridFunction, params: AnisoParams, target: EmbeddingTarget, j: int, k, grids=None, k_target=None
) -> VerificationReport:
    """Axis-``j`` (0-based) embedding of different metrics.

    The left side uses the Lorentz ``(q_j, 1)`` metric; the product right side is
    ``b_j^{kappa_j} prod_i b_i^{r (1-kappa_j)/(n r_i)}``.  Also records the
    weighted arithmetic mean of the factors and the left side in the weaker
    ``(q_j, q_j)`` metric.
    """
    n = params.n
    if not 0 <= j < n:
        raise PreconditionError(f"axis index must be in [0, {n})")
    k = _orders(k, n)
    alpha = float(target.alpha[j])
    kt = k[j] if k_target is None else int(k_target)
    if not kt > alpha:
        raise PreconditionError(f"target order k={kt} must exceed alpha_{j + 1}={alpha:.17g}")
    grids = _grids(f, grids)
    semis = aniso_seminorms(f, params, k, grids)
    b = [x.value for x in semis]
    q = float(target.q_j[j])
    tp = float(target.theta_prime[j])
    strong = besov_seminorm(f, j, alpha, q, tp, kt, grids[j], metric=Metric.lorentz(q, 1.0))
    weak = besov_seminorm(f, j, alpha, q, tp, kt, grids[j], metric=Metric.lorentz(q, q))
    kap = float(target.kappa[j])
    w = [float(params.r) * (1 - kap) / (n * float(ri)) for ri in params.r_j]
    w[j] += kap
    prod = _weighted_product(b, w)
    mean = math.fsum(wi * bi for wi, bi in zip(w, b))
    total = math.fsum(b)
    lhs = strong.value
    meta = {
        "axis": j + 1, "q": q, "alpha": alpha, "kappa": kap, "theta_prime": tp, "orders": k,
        "target_order": kt, "weights": tuple(w), "weighted_mean": mean, "lhs_weak": weak.value,
        "amgm_holds": total >= mean * (1 - 1e-12) and mean >= prod * (1 - 1e-12),
        "lorentz_monotone": weak.value <= lhs * (1 + 1e-12),
        **_meta_from(semis),
    }
    return VerificationReport("metrics", lhs, total, prod, _ratio(lhs, total), _ratio(lhs, prod), _param_dict(params), meta)


# --- sweeps ------------------------------------------------------------------


@dataclass
class CheckConfig:
    """Which check to run and its inputs; ``hppd`` sets the h-grid density."""

    which: str
    params: AnisoParams
    k: tuple
    target: EmbeddingTarget | None = None
    axis: int = 0
    q: float | None = None
    s: float | None = None
    p0: float | None = None
    hppd: float = 16


def run_check(spec: FamilySpec, cfg: CheckConfig) -> VerificationReport:
    f = builtin_family(spec)
    grids = hgrids(f, cfg.hppd)
    if cfg.which == "limit":
        rep = check_limit(f, cfg.params, cfg.k, grids)
    elif cfg.which == "metrics":
        if cfg.target is None:
            raise PreconditionError("metrics check needs a target")
        rep = check_metrics(f, cfg.params, cfg.target, cfg.axis, cfg.k, grids)
    elif cfg.which == "nolimit":
        rep = check_nolimit(f, cfg.params, cfg.q, cfg.s, cfg.p0, cfg.k, grids)
    else:
        raise PreconditionError(f"unknown check {cfg.which!r}")
    rep.family = spec.label
    rep.lam = tuple(spec.lam)
    rep.meta["res"] = tuple(spec.res)
    rep.meta["hppd"] = cfg.hppd
    return rep


def lambda_set(lo_exp: int = -3, hi_exp: int = 3, n: int = 2) -> list:
    """All per-axis combinations of powers of two."""
    axis = [2.0**e for e in range(lo_exp, hi_exp + 1)]
    grids = np.meshgrid(*([axis] * n), indexing="ij")
    return [tuple(float(g.flat[i]) for g in grids) for i in range(grids[0].size)]


@dataclass
class SweepResult:
    reports: list
    base: VerificationReport
    drift: float

    def to_csv(self) -> str:
        return reports_to_csv(self.reports)


def dilation_sweep(spec: FamilySpec, lams, cfg: CheckConfig) -> SweepResult:
    """Run ``cfg`` on ``spec`` dilated by every ``lam``.

    ``drift`` is the largest ``|ratio_prod / ratio_prod(base) - 1|`` with the
    undilated instance as base.
    """
    base = run_check(spec.with_lam((1.0,) * len(spec.res)), cfg)
    reports = [run_check(spec.with_lam(lam), cfg) for lam in lams]
    drift = 0.0
    for rep in reports:
        if rep.ratio_prod == base.ratio_prod:
            continue
        drift = max(drift, relative_change(rep.ratio_prod, base.ratio_prod))
    return SweepResult(reports, base, drift)


def relative_change(a, b) -> float:
    """``|a/b - 1|`` with ``0/0 -> 0``."""
    if a is None and b is None:
        return 0.0
    if a is None or b is None or b == 0:
        return math.inf
    return abs(a / b - 1.0)


# --- rearrangement lemmas -------------------------------------------------------


@dataclass
class LemmaReport:
    """Max-over-t empirical constants, one per ``xi``."""

    check: str
    family: str
    xis: tuple
    constants: tuple
    sigma_norm: float
    seminorm_product: float
    norm_ratio: float | None
    meta: dict = field(default_factory=dict)

    @property
    def spread(self) -> float:
        """``max / min - 1`` over the reported constants."""
        c = [x for x in self.constants]
        if not c or min(c) <= 0:
            return math.inf if c and max(c) > 0 else 0.0
        return max(c) / min(c) - 1.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# check={self.check} family={self.family} norm_ratio={_fmt(self.norm_ratio)}\n")
        buf.write("xi,max_c\n")
        for x, c in zip(self.xis, self.constants):
            buf.write(f"{x:.17g},{c:.17g}\n")
        return buf.getvalue()


def _lemma(f, params, k, xis, tgrid, which, label, delta):
    k = _orders(k, params.n)
    tgrid = default_tgrid(f) if tgrid is None else tgrid
    consts, last = [], None
    for xi in xis:
        rep = pointwise_estimate(f, params, xi, k, tgrid, delta=delta)
        consts.append(rep.max_c_sigma if which == "lemma4" else rep.max_c_two_term)
        last = rep
    meta = {"orders": k, "t_range": (tgrid.t_min, tgrid.t_max), "delta": last.system.delta}
    return LemmaReport(which, label, tuple(float(x) for x in xis), tuple(consts), last.sigma_norm, last.seminorm_product, last.norm_ratio, meta)


def check_lemma1(f: GridFunction, params: AnisoParams, k, xi: float = 2.0, tgrid=None, label: str = "", delta=None) -> LemmaReport:
    """Minimal constant of the two-term bound with ``s = xi t`` and balanced ``delta_j(t)``."""
    return _lemma(f, params, k, (xi,), tgrid, "lemma1", label, delta)


def check_lemma4(f: GridFunction, params: AnisoParams, k, xis=(1.5, 2.0, 4.0), tgrid=None, label: str = "", delta=None) -> LemmaReport:
    """Minimal ``c`` with ``f*(t) <= (2^k' - 1) f*(xi t) + c sigma(t)``, per ``xi``."""
    return _lemma(f, params, k, tuple(xis), tgrid, "lemma4", label, delta)
