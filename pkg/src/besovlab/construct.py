"""Majorants, the equilibrium system and rearrangement estimates.

``majorize`` builds a regularised majorant of a non-decreasing function by two
Hardy-type averages, exactly per segment.  ``equilibrium`` balances several
such majorants: for each ``t`` it finds ``delta_j(t)`` with product ``t`` at
which all ``t^{-1/p_j} phi_j(delta_j)`` coincide, the common value being
``sigma(t)``.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError, VerificationError
from .grid_fn import GridFunction, rearrangement
from .halfline import (
    Inverter,
    LogGrid,
    PiecewisePower,
    _antiderivative,
    _canonical,
    _eval_terms,
    _integral_terms,
    _scale,
    _shift,
    _vanishes_at,
    fit_piecewise_power,
    weighted_calL_norm,
)
from .params import AnisoParams, recip
from .smoothness import Metric, Modulus, default_hgrid, modulus, seminorm_from_modulus

MONO_RTOL = 1e-9
RESIDUAL_TOL = 1e-8


# --- majorant ---------------------------------------------------------------


@dataclass
class MajorantResult:
    phi: PiecewisePower
    phi1: PiecewisePower
    psi: PiecewisePower
    alpha: float
    delta: float
    theta: float
    norm_psi: float
    norm_phi: float
    ratio: float
    chain_bound: float
    dominates: bool
    decreasing_cert: bool
    increasing_cert: bool
    worst_violation: float

    @property
    def certified(self) -> bool:
        return self.dominates and self.decreasing_cert and self.increasing_cert

    def to_csv(self, points=None) -> str:
        pts = self.phi.check_points(per_segment=2, span=2) if points is None else points
        buf = io.StringIO()
        buf.write(f"# alpha={self.alpha:.17g} delta={self.delta:.17g} theta={self.theta:.17g}\n")
        buf.write(f"# ratio={self.ratio:.17g} chain_bound={self.chain_bound:.17g}\n")
        buf.write("t,psi,phi\n")
        for t, a, b in zip(pts, self.psi(pts), self.phi(pts)):
            buf.write(f"{t:.17g},{a:.17g},{b:.17g}\n")
        return buf.getvalue()


def _hardy_upper(psi: PiecewisePower, A: float) -> PiecewisePower:
    """``A t^A int_t^inf u^{-A} psi(u) du/u`` per segment."""
    m = psi.n_segments
    shifted = [_shift(seg, -A) for seg in psi.terms]
    # the first segment's own integral is never needed (it may diverge at 0)
    pieces = [0.0] + [_integral_terms(shifted[k], *psi.bounds(k)) for k in range(1, m)]
    if not _vanishes_at(_antiderivative(shifted[-1]), math.inf) or any(not math.isfinite(x) for x in pieces):
        raise PreconditionError("divergent defining integral: psi t^{-alpha-delta} not integrable at infinity")
    segs = []
    for k in range(m):
        after = math.fsum(pieces[k + 1:])
        G = _antiderivative(shifted[k])
        hi = psi.bounds(k)[1]
        top = 0.0 if hi == math.inf else float(_eval_terms(G, hi))
        terms = [(A * (after + top), A, 0)] + list(_scale(_shift(G, A), -A))
        segs.append(_canonical(terms))
    return PiecewisePower(psi.breaks, segs, check=False)


def _hardy_lower(phi1: PiecewisePower, B: float, scale: float) -> PiecewisePower:
    """``scale t^B int_0^t u^{-B} phi1(u) du/u`` per segment."""
    m = phi1.n_segments
    shifted = [_shift(seg, -B) for seg in phi1.terms]
    if not _vanishes_at(_antiderivative(shifted[0]), 0):
        raise PreconditionError("divergent defining integral: phi1 t^{-alpha+delta} not integrable at 0")
    pieces = [_integral_terms(shifted[k], *phi1.bounds(k)) for k in range(m - 1)]
    segs = []
    for k in range(m):
        before = math.fsum(pieces[:k])
        H = _antiderivative(shifted[k])
        lo = phi1.bounds(k)[0]
        bottom = 0.0 if lo == 0 else float(_eval_terms(H, lo))
        terms = [(scale * (before - bottom), B, 0)] + list(_scale(_shift(H, B), scale))
        segs.append(_canonical(terms))
    return PiecewisePower(phi1.breaks, segs, check=False)


def _monotone(values, increasing: bool, rtol: float):
    """Worst relative violation of node-to-node monotonicity."""
    v = np.asarray(values, dtype=float)
    scale = np.maximum(np.abs(v[1:]), np.abs(v[:-1]))
    step = (v[1:] - v[:-1]) if not increasing else (v[:-1] - v[1:])
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(scale > 0, step / scale, 0.0)
    worst = float(np.max(rel, initial=0.0))
    return worst <= rtol, worst


def majorize(psi: PiecewisePower, alpha: float, delta: float, theta: float, check_points: int = 1000) -> MajorantResult:
    """Regularised majorant ``phi >= psi`` with controlled growth.

    ``phi t^{-alpha-delta}`` is non-increasing, ``phi t^{-alpha+delta}`` is
    non-decreasing and ``||t^{-alpha} phi|| <= 2(alpha+delta)/delta ||t^{-alpha} psi||``
    in ``L^theta(dt/t)``.
    """
    if not (alpha > 0 and delta > 0):
        raise PreconditionError("alpha and delta must be positive")
    if not theta >= 1:
        raise PreconditionError("theta must be >= 1")
    if psi.is_zero:
        raise PreconditionError("psi must not vanish identically")
    if not psi.is_nondecreasing():
        raise PreconditionError("psi must be non-negative and non-decreasing")
    norm_psi = weighted_calL_norm(psi, alpha, theta)
    if theta < math.inf and not math.isfinite(norm_psi):
        raise PreconditionError("t^{-alpha} psi is not in L^theta(dt/t)")
    if not psi.trailing_exponent() < alpha + delta:
        raise PreconditionError("divergent defining integral: trailing exponent of psi >= alpha + delta")
    A, B = alpha + delta, alpha - delta
    phi1 = _hardy_upper(psi, A)
    phi = _hardy_lower(phi1, B, 2 * delta)
    phi._check_continuity()

    if psi.breaks.size:
        lo, hi = psi.breaks[0] / 1e3, psi.breaks[-1] * 1e3
    else:
        lo, hi = 1e-3, 1e3
    pts = np.unique(np.concatenate((np.geomspace(lo, hi, check_points), psi.breaks)))
    vpsi, vphi = np.asarray(psi(pts)), np.asarray(phi(pts))
    dominates = bool(np.all(vphi >= vpsi * (1 - MONO_RTOL)))
    dec_ok, dec_worst = _monotone(vphi * pts ** (-A), False, MONO_RTOL)
    inc_ok, inc_worst = _monotone(vphi * pts ** (-B), True, MONO_RTOL)
    norm_phi = weighted_calL_norm(phi, alpha, theta)
    ratio = norm_phi / norm_psi if norm_psi > 0 else math.nan
    return MajorantResult(
        phi, phi1, psi, alpha, delta, theta, norm_psi, norm_phi, ratio, 2 * A / delta,
        dominates, dec_ok, inc_ok, max(dec_worst, inc_worst),
    )


# --- equilibrium --------------------------------------------------------------


class _Balancer:
    """Solves the balance conditions at a single ``t``."""

    def __init__(self, phis, params: AnisoParams, rtol: float = 1e-12):
        self.phis = list(phis)
        self.n = params.n
        self.p = [float(x) for x in params.p_j]
        self.beta_n = float(params.beta[-1])
        self.inverters = [Inverter(g) for g in self.phis[:-1]]
        self.rtol = rtol

    def split(self, s, t):
        """``delta_j`` for ``j < n`` given ``delta_n = s``."""
        base = float(self.phis[-1](s))
        out = []
        for j, inv in enumerate(self.inverters):
            y = t ** (1.0 / self.p[j] - 1.0 / self.p[-1]) * base
            out.append(inv(y))
        return out

    def big_phi(self, s, t):
        return s * math.prod(self.split(s, t))

    def solve(self, t, guess=None):
        s0 = guess if guess is not None else t**self.beta_n
        lo = hi = s0
        if self.big_phi(s0, t) < t:
            for _ in range(2000):
                hi *= 2
                if self.big_phi(hi, t) >= t:
                    break
            else:
                raise VerificationError(f"bracket failure at t={t:.17g}", t)
            lo = hi / 2
        else:
            for _ in range(2000):
                lo /= 2
                if self.big_phi(lo, t) < t:
                    break
            else:
                raise VerificationError(f"bracket failure at t={t:.17g}", t)
            hi = lo * 2
        a, b = math.log(lo), math.log(hi)
        tol = math.log1p(self.rtol)
        while b - a > tol:
            mid = 0.5 * (a + b)
            if mid == a or mid == b:
                break
            if self.big_phi(math.exp(mid), t) < t:
                a = mid
            else:
                b = mid
        s = math.exp(0.5 * (a + b))
        deltas = self.split(s, t) + [s]
        sigma = t ** (-1.0 / self.p[-1]) * float(self.phis[-1](s))
        return sigma, deltas

    def residuals(self, t, sigma, deltas):
        r6 = abs(math.prod(deltas) / t - 1.0)
        r7 = [abs(t ** (-1.0 / pj) * float(g(d)) / sigma - 1.0) for pj, g, d in zip(self.p, self.phis, deltas)]
        return r6, r7


@dataclass
class EquilibriumSystem:
    t: np.ndarray
    sigma: np.ndarray
    deltas: np.ndarray  # shape (n, len(t))
    residual_product: np.ndarray
    residual_balance: np.ndarray  # shape (n, len(t))
    delta: float
    params: AnisoParams = field(repr=False)
    certificates: dict = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return float(max(self.residual_product.max(initial=0.0), self.residual_balance.max(initial=0.0)))

    def to_csv(self) -> str:
        n = self.deltas.shape[0]
        buf = io.StringIO()
        buf.write(f"# delta={self.delta:.17g} max_residual={self.max_residual:.17g}\n")
        buf.write("t,sigma," + ",".join(f"delta_{j + 1}" for j in range(n)) + "\n")
        for i, t in enumerate(self.t):
            row = [t, self.sigma[i]] + [self.deltas[j, i] for j in range(n)]
            buf.write(",".join(f"{x:.17g}" for x in row) + "\n")
        return buf.getvalue()


def check_growth(phi: PiecewisePower, r: float, delta: float, tol: float = MONO_RTOL) -> bool:
    """``phi t^{-r+delta}`` non-decreasing and ``phi t^{-r-delta}`` non-increasing."""
    lo, hi = phi.log_slope_range()
    return lo >= r - delta - tol and hi <= r + delta + tol


def equilibrium(phis, params: AnisoParams, delta: float | None, tgrid: LogGrid, rtol: float = 1e-12) -> EquilibriumSystem:
    """Balance ``t^{-1/p_j} phi_j(delta_j(t))`` under ``prod_j delta_j(t) = t`` on ``tgrid``."""
    phis = list(phis)
    n = params.n
    if len(phis) != n:
        raise PreconditionError(f"need {n} functions, got {len(phis)}")
    if any(not b > 0 for b in params.beta):
        raise PreconditionError("all beta_j must be positive")
    dmax = float(params.lemma_delta())
    if delta is None:
        delta = dmax
    if not 0 < delta <= dmax * (1 + 1e-12):
        raise PreconditionError(
            f"0 < delta <= (1/2) min_j beta_j r_j violated (delta = {delta:.17g}, bound = {dmax:.17g})"
        )
    for j, g in enumerate(phis):
        if not g.is_strictly_increasing():
            raise PreconditionError(f"phi_{j + 1} is not strictly increasing")
        if not check_growth(g, float(params.r_j[j]), delta):
            lo, hi = g.log_slope_range()
            raise PreconditionError(
                f"phi_{j + 1} growth certificate failed: log-slope range [{lo:.6g}, {hi:.6g}] "
                f"not within [r_{j + 1} - delta, r_{j + 1} + delta]"
            )
    solver = _Balancer(phis, params, rtol)
    ts = tgrid.nodes
    sig = np.empty(ts.size)
    dl = np.empty((n, ts.size))
    r6 = np.empty(ts.size)
    r7 = np.empty((n, ts.size))
    guess = None
    for i, t in enumerate(ts):
        if guess is not None:
            guess = guess * (t / ts[i - 1]) ** float(params.beta[-1])
        sigma, deltas = solver.solve(float(t), guess)
        guess = deltas[-1]
        res6, res7 = solver.residuals(float(t), sigma, deltas)
        if res6 > RESIDUAL_TOL or max(res7) > RESIDUAL_TOL:
            raise VerificationError(
                f"residual above tolerance at t={t:.17g}: product {res6:.3g}, balance {max(res7):.3g}", float(t)
            )
        sig[i], dl[:, i], r6[i], r7[:, i] = sigma, deltas, res6, res7
    system = EquilibriumSystem(ts, sig, dl, r6, r7, float(delta), params)
    system.certificates = certify(system)
    failed = [k for k, (ok, _) in system.certificates.items() if not ok]
    if failed:
        raise VerificationError(f"monotonicity certificate failed: {', '.join(failed)}")
    return system


def certify(system: EquilibriumSystem, rtol: float = MONO_RTOL) -> dict:
    """Node-to-node growth checks for sigma and each delta_j."""
    p = system.params
    t, d = system.t, system.delta
    a = float(recip(p.p) - p.r / p.n)
    out = {
        "sigma_up": _monotone(system.sigma * t ** (a + d), True, rtol),
        "sigma_down": _monotone(system.sigma * t ** (a - d), False, rtol),
    }
    for j in range(p.n):
        b = float(p.beta[j])
        out[f"delta_{j + 1}_up"] = _monotone(system.deltas[j] * t ** (-b / 3), True, rtol)
        out[f"delta_{j + 1}_down"] = _monotone(system.deltas[j] * t ** (-3 * b), False, rtol)
    return out


# --- norm checks ------------------------------------------------------------


def _extended_integral(fn, nodes, values, theta, max_decades=40.0, ppd=4.0):
    """``|| g ||`` in ``L^theta(dt/t)`` from samples plus power-law tails.

    The samples are extended outward by ``fn`` until the local exponent has
    settled; the remainder is integrated as a pure power law, or is ``inf`` when
    that power law is not integrable.
    """
    t = list(nodes)
    g = list(values)
    step = 10 ** (1.0 / ppd)
    tails = {}
    for side in ("low", "high"):
        prev_slope = None
        added = 0
        while True:
            if side == "high":
                tn = t[-1] * step
                gn = fn(tn)
                t.append(tn)
                g.append(gn)
                a, b = (t[-2], g[-2]), (t[-1], g[-1])
            else:
                tn = t[0] / step
                gn = fn(tn)
                t.insert(0, tn)
                g.insert(0, gn)
                a, b = (t[1], g[1]), (t[0], g[0])
            added += 1
            if b[1] <= 0 or a[1] <= 0:
                tails[side] = (0.0, 0.0)
                break
            slope = math.log(b[1] / a[1]) / math.log(b[0] / a[0])
            settled = prev_slope is not None and abs(slope - prev_slope) < 1e-7
            if settled or added > max_decades * ppd:
                tails[side] = (slope, b[1])
                break
            prev_slope = slope
    order = np.argsort(t)
    t = np.asarray(t)[order]
    g = np.asarray(g)[order]
    slope_lo, g_lo = tails["low"]
    slope_hi, g_hi = tails["high"]
    if theta == math.inf:
        if (g_hi > 0 and slope_hi > 1e-9) or (g_lo > 0 and slope_lo < -1e-9):
            return math.inf, t, g
        return float(g.max()), t, g
    x = np.log(t)
    body = float(np.sum(0.5 * (g[1:] ** theta + g[:-1] ** theta) * np.diff(x)))
    rem = 0.0
    for slope, gv, sign in ((slope_hi, g_hi, -1), (slope_lo, g_lo, 1)):
        if gv == 0:
            continue
        if sign * slope <= 1e-9:
            return math.inf, t, g
        rem += gv**theta / (abs(slope) * theta)
    return (body + rem) ** (1.0 / theta), t, g


@dataclass
class SigmaNormReport:
    sigma_norm: float
    product_bound: float
    ratio: float | None
    axis_norms: list
    phi_norms: list
    axis_ratios: list
    divergent: list

    def lines(self):
        out = [f"sigma_norm,{self.sigma_norm:.17g}", f"product_bound,{self.product_bound:.17g}", f"ratio,{_fmt(self.ratio)}"]
        for j, (a, b, c) in enumerate(zip(self.axis_norms, self.phi_norms, self.axis_ratios), start=1):
            out.append(f"axis_norm_{j},{a:.17g}")
            out.append(f"phi_norm_{j},{b:.17g}")
            out.append(f"axis_ratio_{j},{_fmt(c)}")
        return out


def _fmt(x):
    return "0/0" if x is None else f"{x:.17g}"


def _ratio(a, b):
    if a == 0 and b == 0:
        return None
    if b == 0:
        return math.inf
    return a / b


def sigma_norm_check(system: EquilibriumSystem | None, phis, params: AnisoParams) -> SigmaNormReport:
    """Both sides of the sigma-norm inequality and of the per-axis bounds."""
    n = params.n
    phis = list(phis)
    if any(g.is_zero for g in phis):
        return SigmaNormReport(0.0, 0.0, None, [0.0] * n, [0.0] * n, [None] * n, [])
    if system is None:
        raise PreconditionError("a certified system is required for non-zero functions")
    solver = _Balancer(phis, params)
    a = float(recip(params.p) - params.r / params.n)
    theta = float(params.theta)
    cache = {}

    def solve(t):
        if t not in cache:
            cache[t] = solver.solve(t)
        return cache[t]

    divergent = []
    sigma_norm, _, _ = _extended_integral(
        lambda t: t**a * solve(t)[0], system.t, system.t**a * system.sigma, theta
    )
    if not math.isfinite(sigma_norm):
        divergent.append("sigma_norm")
    norms = [weighted_calL_norm(g, float(params.r_j[j]), float(params.theta_j[j])) for j, g in enumerate(phis)]
    product_bound = math.prod(N ** (float(params.r) / (n * float(params.r_j[j]))) for j, N in enumerate(norms))
    if not math.isfinite(product_bound):
        divergent.append("product_bound")
    axis_norms, axis_ratios = [], []
    for j, g in enumerate(phis):
        rj = float(params.r_j[j])
        vals = np.asarray(g(system.deltas[j])) * system.deltas[j] ** (-rj)

        def fn(t, j=j, g=g, rj=rj):
            d = solve(t)[1][j]
            return float(g(d)) * d ** (-rj)

        val, _, _ = _extended_integral(fn, system.t, vals, float(params.theta_j[j]))
        axis_norms.append(val)
        axis_ratios.append(_ratio(val, norms[j]))
        if not math.isfinite(val):
            divergent.append(f"axis_norm_{j + 1}")
        if not math.isfinite(norms[j]):
            divergent.append(f"phi_norm_{j + 1}")
    return SigmaNormReport(sigma_norm, product_bound, _ratio(sigma_norm, product_bound), axis_norms, norms, axis_ratios, divergent)


def holder_identity_error(system: EquilibriumSystem, phis) -> float:
    """Max relative gap between ``t^a sigma`` and the product of per-axis factors."""
    p = system.params
    a = float(recip(p.p) - p.r / p.n)
    lhs = system.t**a * system.sigma
    rhs = np.ones_like(lhs)
    for j, g in enumerate(phis):
        rj = float(p.r_j[j])
        d = system.deltas[j]
        rhs *= (np.asarray(g(d)) * d ** (-rj)) ** (float(p.r) / (p.n * rj))
    return float(np.max(np.abs(lhs / rhs - 1.0)))


# --- rearrangement estimates ----------------------------------------------------


@dataclass
class BoundReport:
    fstar_t: float
    fstar_s: float
    jump_factor: float
    bound: float
    min_constant: float

    @property
    def holds_with_unit_constant(self) -> bool:
        return self.fstar_t <= self.jump_factor * self.fstar_s + self.bound


def _omega_at(mod, delta):
    if isinstance(mod, Modulus):
        return mod.exact(delta)
    return mod.at(delta, "step")


def rearrangement_bound(f: GridFunction, moduli, t: float, s: float, deltas, k, p) -> BoundReport:
    """Structural two-term bound for ``f*(t)`` with unit constant.

    Returns ``max_i t^{-1/p_i} (s/t)^{k_i} omega_i(delta_i)`` together with the
    minimal ``C`` for which
    ``f*(t) <= (2^k - 1) f*(s) + C * bound`` holds, ``k = max k_i``.
    """
    if not 0 < t < s:
        raise PreconditionError("rearrangement_bound requires 0 < t < s")
    deltas = [float(d) for d in deltas]
    if abs(math.prod(deltas) / t - 1.0) > 1e-10:
        raise PreconditionError("prod_i delta_i = t violated")
    n = f.n
    k = tuple(k) if np.ndim(k) else (int(k),) * n
    p = tuple(p) if np.ndim(p) else (float(p),) * n
    R = rearrangement(f)
    ft, fs = float(R(t)), float(R(s))
    kmax = max(k)
    jump = 2**kmax - 1
    bound = max(
        t ** (-1.0 / p[i]) * (s / t) ** k[i] * _omega_at(moduli[i], deltas[i]) for i in range(n)
    )
    excess = ft - jump * fs
    if excess <= 0:
        c = 0.0
    elif bound == 0:
        c = math.inf
    else:
        c = excess / bound
    return BoundReport(ft, fs, jump, bound, c)


@dataclass
class PointwiseReport:
    t: np.ndarray
    fstar: np.ndarray
    fstar_xi: np.ndarray
    sigma: np.ndarray
    c_sigma: np.ndarray
    c_two_term: np.ndarray
    xi: float
    max_c_sigma: float
    max_c_two_term: float
    sigma_norm: float
    seminorm_product: float
    norm_ratio: float
    system: EquilibriumSystem = field(repr=False)
    majorants: list = field(repr=False, default_factory=list)
    moduli: list = field(repr=False, default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# xi={self.xi:.17g} max_c_sigma={self.max_c_sigma:.17g} max_c_two_term={self.max_c_two_term:.17g}\n")
        buf.write(f"# sigma_norm={self.sigma_norm:.17g} seminorm_product={self.seminorm_product:.17g} norm_ratio={self.norm_ratio:.17g}\n")
        buf.write("t,fstar,fstar_xi,sigma,c_sigma,c_two_term\n")
        for row in zip(self.t, self.fstar, self.fstar_xi, self.sigma, self.c_sigma, self.c_two_term):
            buf.write(",".join(f"{x:.17g}" for x in row) + "\n")
        return buf.getvalue()


def pointwise_estimate(
    f: GridFunction, params: AnisoParams, xi: float, k, tgrid: LogGrid, hgrids=None, delta: float | None = None
) -> PointwiseReport:
    """Empirical constants of the pointwise rearrangement estimate.

    Moduli are fitted, majorized and balanced; for each ``t`` the minimal
    ``c(t)`` with ``f*(t) <= (2^k' - 1) f*(xi t) + c(t) sigma(t)`` is reported,
    along with the same numerator over the two-term structural bound evaluated
    at the balanced ``delta_j(t)``.
    """
    if not xi > 1:
        raise PreconditionError("xi must be > 1")
    n = f.n
    k = tuple(k) if np.ndim(k) else (int(k),) * n
    if delta is None:
        delta = float(params.lemma_delta())
    moduli, majorants = [], []
    for j in range(n):
        grid = default_hgrid(f, j) if hgrids is None else (hgrids if isinstance(hgrids, LogGrid) else hgrids[j])
        mod = modulus(f, j, k[j], Metric.lp(float(params.p_j[j])), grid)
        psi = fit_piecewise_power(mod)
        maj = majorize(psi, float(params.r_j[j]), delta, float(params.theta_j[j]))
        if not maj.certified:
            raise VerificationError(f"majorant certificate failed on axis {j + 1}")
        moduli.append(mod)
        majorants.append(maj)
    phis = [m.phi for m in majorants]
    system = equilibrium(phis, params, delta, tgrid)
    R = rearrangement(f)
    ts = system.t
    fst = np.asarray(R(ts))
    fxi = np.asarray(R(xi * ts))
    kp = max(k)
    excess = np.maximum(fst - (2**kp - 1) * fxi, 0.0)
    c_sigma = excess / system.sigma
    struct = np.zeros_like(ts)
    for j in range(n):
        pj = float(params.p_j[j])
        struct = np.maximum(struct, ts ** (-1.0 / pj) * xi ** k[j] * moduli[j].exact(system.deltas[j]))
    with np.errstate(divide="ignore", invalid="ignore"):
        c_two_term = np.where(excess > 0, excess / struct, 0.0)
    report = sigma_norm_check(system, phis, params)
    semis = [seminorm_from_modulus(moduli[j], float(params.r_j[j]), float(params.theta_j[j])) for j in range(n)]
    seminorm_product = math.prod(
        s.value ** (float(params.r) / (n * float(params.r_j[j]))) for j, s in enumerate(semis)
    )
    return PointwiseReport(
        ts, fst, fxi, system.sigma, c_sigma, c_two_term, float(xi),
        float(c_sigma.max(initial=0.0)), float(np.max(c_two_term, initial=0.0)),
        report.sigma_norm, seminorm_product, _ratio(report.sigma_norm, seminorm_product), system, majorants, moduli,
    )
