"""Finite differences, moduli of continuity and directional Besov seminorms.

Shifts are restricted to integer multiples of the cell spacing so that every
difference of a cell function is again a cell function, computed exactly.
Axes are 0-based.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import comb

from . import _kernels
from .errors import PreconditionError
from .grid_fn import GridFunction, lorentz_norm, lp_norm, rearrangement
from .halfline import LogGrid, SampledHalflineFunction

SNAP_RTOL = 1e-9


@dataclass(frozen=True)
class Metric:
    """``L^p`` (``kind='lp'``) or Lorentz ``L^{q,s}`` (``kind='lorentz'``)."""

    kind: str
    p: float = 1.0
    q: float = 1.0
    s: float = 1.0

    @classmethod
    def lp(cls, p):
        if not p >= 1 or p == math.inf:
            raise PreconditionError("L^p metric requires 1 <= p < inf")
        return cls("lp", p=float(p))

    @classmethod
    def lorentz(cls, q, s):
        if not (q > 0 and s > 0):
            raise PreconditionError("Lorentz metric requires q, s > 0")
        return cls("lorentz", q=float(q), s=float(s))

    @property
    def scale_exponent(self) -> float:
        """Exponent of the total measure under dilation (``1/p`` or ``1/q``)."""
        return 1.0 / (self.p if self.kind == "lp" else self.q)

    def norm(self, f: GridFunction) -> float:
        if self.kind == "lp":
            return lp_norm(f, self.p)
        return lorentz_norm(rearrangement(f), self.q, self.s)

    def __str__(self):
        return f"L^{self.p:g}" if self.kind == "lp" else f"L^({self.q:g},{self.s:g})"


def _as_metric(metric) -> Metric:
    if isinstance(metric, Metric):
        return metric
    return Metric.lp(metric)


def binomial_weights(k: int) -> np.ndarray:
    return np.array([(-1) ** (k - i) * comb(k, i, exact=True) for i in range(k + 1)], dtype=float)


def _axis_view(f: GridFunction, j: int) -> np.ndarray:
    """Samples reshaped to (before, N_j, after)."""
    shape = f.shape
    before = math.prod(shape[:j])
    after = math.prod(shape[j + 1:])
    return np.ascontiguousarray(f.samples.reshape(before, shape[j], after))


def _check_axis(f, j):
    if not 0 <= j < f.n:
        raise PreconditionError(f"axis {j} outside 0..{f.n - 1}")


def shift_multiple(f: GridFunction, j: int, h: float) -> int:
    """``h / spacing_j`` as an integer; raises if ``h`` is not a grid multiple."""
    if not h > 0:
        raise PreconditionError("h must be positive")
    x = h / f.spacing[j]
    m = round(x)
    if m < 1 or abs(x - m) > SNAP_RTOL * max(1.0, x):
        raise PreconditionError(f"h={h:.17g} is not a positive multiple of spacing {f.spacing[j]:.17g}")
    return int(m)


def difference(f: GridFunction, j: int, k: int, h: float) -> GridFunction:
    """``sum_i (-1)^(k-i) C(k,i) f(x + i h e_j)`` on the enlarged grid."""
    _check_axis(f, j)
    if k < 1:
        raise PreconditionError("difference order k must be >= 1")
    m = shift_multiple(f, j, h)
    out = _kernels.kdiff(_axis_view(f, j), k, m)
    shape = list(f.shape)
    shape[j] += k * m
    origin = list(f.origin)
    origin[j] -= k * m * f.spacing[j]
    return GridFunction(out.reshape(shape), f.spacing, tuple(origin))


def _lorentz_sorted(mags_desc, vol, q, s):
    """Lorentz norm of a cell function from its sorted magnitudes."""
    v = mags_desc[mags_desc > 0]
    if v.size == 0:
        return 0.0
    if s == math.inf:
        idx = np.arange(1, v.size + 1)
        return float(np.max((idx * vol) ** (1.0 / q) * v))
    e = s / q
    idx = np.arange(v.size + 1, dtype=float)
    inc = np.empty(v.size)
    inc[0] = 1.0
    inc[1:] = idx[1:-1] ** e * np.expm1(e * np.log1p(1.0 / idx[1:-1]))
    total = np.sum(v**s * inc) * vol**e * (q / s)
    return float(total ** (1.0 / s))


def difference_norms(f: GridFunction, j: int, k: int, metric, m_max: int) -> np.ndarray:
    """``||Delta_j^k(m * spacing_j) f||`` for ``m = 1..m_max``."""
    _check_axis(f, j)
    if k < 1:
        raise PreconditionError("difference order k must be >= 1")
    metric = _as_metric(metric)
    a3 = _axis_view(f, j)
    shifts = np.arange(1, m_max + 1, dtype=np.int64)
    vol = f.cell_volume
    if metric.kind == "lp":
        sums = _kernels.kdiff_power_sums(a3, k, shifts, metric.p)
        return (np.asarray(sums) * vol) ** (1.0 / metric.p)
    out = np.empty(m_max)
    for i, m in enumerate(shifts):
        d = np.abs(_kernels.kdiff(a3, k, int(m))).ravel()
        d = -np.sort(-d)
        out[i] = _lorentz_sorted(d, vol, metric.q, metric.s)
    return out


class Modulus(SampledHalflineFunction):
    """Sampled modulus of continuity, with the norm of every shift it saw.

    ``norms[m - 1]`` is the difference norm at ``h = m * spacing`` for
    ``m = 1..separation``; for ``m >= separation`` the shifted copies are
    disjoint and the norm no longer changes.
    """

    def __init__(self, nodes, values, spacing, norms, separation, k, metric):
        super().__init__(nodes, values, monotone=True)
        self.spacing = spacing
        self.norms = np.asarray(norms, dtype=float)
        self.separation = separation
        self.k = k
        self.metric = metric

    @property
    def sup(self) -> float:
        """``sup_h ||Delta(h) f||`` over all admissible shifts."""
        return float(self.norms.max(initial=0.0))

    def running(self) -> np.ndarray:
        return np.maximum.accumulate(self.norms)

    def exact(self, delta):
        """``omega(delta)`` of the sampled-shift model at any ``delta > 0``."""
        m = np.floor(np.asarray(delta, dtype=float) / self.spacing * (1 + SNAP_RTOL)).astype(int)
        m = np.clip(m, 0, self.separation)
        run = np.concatenate(([0.0], self.running()))
        out = run[m]
        return out if out.ndim else float(out)

    def to_csv(self, header=None) -> str:
        buf = io.StringIO()
        buf.write(f"# modulus order={self.k} metric={self.metric} spacing={self.spacing:.17g}\n")
        if header:
            for line in header:
                buf.write(f"# {line}\n")
        buf.write("h,omega\n")
        for h, w in zip(self.nodes, self.values):
            buf.write(f"{h:.17g},{w:.17g}\n")
        return buf.getvalue()


def snap_nodes(nodes, spacing: float) -> np.ndarray:
    """Nearest positive grid multiples of ``spacing`` (as integers), deduplicated."""
    m = np.rint(np.asarray(nodes, dtype=float) / spacing).astype(np.int64)
    return np.unique(m[m >= 1])


def modulus(f: GridFunction, j: int, k: int, metric, grid: LogGrid) -> Modulus:
    """Running maximum of difference norms over shifts ``h <= delta``."""
    _check_axis(f, j)
    metric = _as_metric(metric)
    s = f.spacing[j]
    mult = snap_nodes(grid.nodes, s)
    if mult.size == 0:
        raise PreconditionError(
            f"no admissible shift: every grid node is below the spacing {s:.17g}"
        )
    sep = f.shape[j]
    norms = difference_norms(f, j, k, metric, sep)
    run = np.maximum.accumulate(norms)
    values = run[np.minimum(mult, sep) - 1]
    return Modulus(mult * s, values, s, norms, sep, k, metric)


def default_hgrid(f: GridFunction, j: int, ppd: float = 16, below: float = 1.0, above: float = 64.0) -> LogGrid:
    """``[below * spacing_j, above * extent_j]``; scales with the function."""
    return LogGrid(below * f.spacing[j], above * f.extents[j], ppd)


def default_tgrid(f: GridFunction, ppd: float = 16, below: float = 2.0**-5, above: float = 64.0) -> LogGrid:
    return LogGrid(below * f.cell_volume, above * f.support_measure, ppd)


@dataclass
class SeminormResult:
    """Seminorm split into its three parts.

    For ``theta < inf`` the parts are integrals of the ``theta``-th power and
    ``value = (truncated + tail + extrapolated) ** (1/theta)``; for
    ``theta = inf`` they are suprema and ``value`` is their maximum.
    """

    value: float
    truncated: float
    tail: float
    extrapolated: float
    kappa_hat: float
    theta: float
    r: float
    h_min: float
    h_max: float
    tail_exact: bool
    modulus: Modulus = field(repr=False, default=None)

    @property
    def total(self) -> float:
        if self.theta == math.inf:
            return max(self.truncated, self.tail, self.extrapolated)
        return self.truncated + self.tail + self.extrapolated

    def summary_lines(self):
        return [
            f"value,{self.value:.17g}",
            f"truncated,{self.truncated:.17g}",
            f"tail,{self.tail:.17g}",
            f"extrapolated,{self.extrapolated:.17g}",
            f"kappa_hat,{self.kappa_hat:.17g}",
            f"theta,{self.theta:.17g}",
            f"r,{self.r:.17g}",
            f"h_min,{self.h_min:.17g}",
            f"h_max,{self.h_max:.17g}",
            f"tail_exact,{int(self.tail_exact)}",
        ]

    def to_csv(self) -> str:
        body = self.modulus.to_csv() if self.modulus is not None else ""
        return body + "# summary\n" + "\n".join(self.summary_lines()) + "\n"


def fit_small_h_exponent(mod: SampledHalflineFunction, decades: float = 1.0) -> float:
    """Least-squares log-log slope of the modulus over its first decade."""
    h, w = mod.nodes, mod.values
    sel = (h <= h[0] * 10**decades * (1 + 1e-12)) & (w > 0)
    if np.count_nonzero(sel) < 2:
        sel = w > 0
        idx = np.nonzero(sel)[0][:2]
        if idx.size < 2:
            return math.inf
        sel = np.zeros_like(sel)
        sel[idx] = True
    x, y = np.log(h[sel]), np.log(w[sel])
    return float(np.polyfit(x, y, 1)[0])


def _log_trapezoid(h, g):
    """Trapezoid rule for ``int g dh/h`` on nodes ``h``."""
    if h.size < 2:
        return 0.0
    x = np.log(h)
    return float(np.sum(0.5 * (g[1:] + g[:-1]) * np.diff(x)))


def seminorm_from_modulus(mod: Modulus, r: float, theta: float) -> SeminormResult:
    if not r > 0:
        raise PreconditionError("r must be positive")
    if not theta >= 1:
        raise PreconditionError("theta must be >= 1")
    h, w = mod.nodes, mod.values
    h_min, h_max = float(h[0]), float(h[-1])
    tail_exact = h_max >= mod.separation * mod.spacing * (1 - SNAP_RTOL)
    w_inf = mod.sup
    if w_inf == 0:
        return SeminormResult(0.0, 0.0, 0.0, 0.0, math.inf, theta, r, h_min, h_max, tail_exact, mod)
    kappa = fit_small_h_exponent(mod)
    w0 = float(w[0])

    if theta == math.inf:
        m = np.arange(1, mod.separation + 1)
        hm = m * mod.spacing
        inside = (hm >= h_min * (1 - SNAP_RTOL)) & (hm <= h_max * (1 + SNAP_RTOL))
        cands = [np.max(h ** (-r) * w)]
        if np.any(inside):
            cands.append(np.max(hm[inside] ** (-r) * mod.running()[inside]))
        truncated = float(max(cands))
        tail = w_inf * h_max ** (-r)
        if w0 == 0:
            extrap = 0.0
        elif kappa < r:
            extrap = math.inf
        else:
            extrap = w0 * h_min ** (-r)
        value = max(truncated, tail, extrap)
        return SeminormResult(value, truncated, tail, extrap, kappa, theta, r, h_min, h_max, tail_exact, mod)

    g = (h ** (-r) * w) ** theta
    truncated = _log_trapezoid(h, g)
    tail = w_inf**theta * h_max ** (-r * theta) / (r * theta)
    if w0 == 0:
        extrap = 0.0
    elif kappa <= r:
        extrap = math.inf
    else:
        extrap = (w0 * h_min ** (-r)) ** theta / ((kappa - r) * theta)
    total = truncated + tail + extrap
    value = total ** (1.0 / theta)
    return SeminormResult(value, truncated, tail, extrap, kappa, theta, r, h_min, h_max, tail_exact, mod)


def besov_seminorm(
    f: GridFunction, j: int, r: float, p: float, theta: float, k: int, grid: LogGrid | None = None, metric=None
) -> SeminormResult:
    """``|| h^{-r} omega_j^k(f; h) ||`` in ``L^theta(dh/h)``.

    The integral is split into the trapezoid part on the grid, an analytic
    bound for ``h > h_max`` from ``omega <= sup_h ||Delta(h) f||``, and a power
    law fitted to the first decade of the modulus for ``h < h_min``.  ``metric``
    overrides ``L^p`` (e.g. a Lorentz metric).
    """
    if not k > r:
        raise PreconditionError(f"difference order k={k} must exceed r={r}")
    if metric is None:
        if not p >= 1:
            raise PreconditionError("p must be >= 1")
        metric = Metric.lp(p)
    if grid is None:
        grid = default_hgrid(f, j)
    mod = modulus(f, j, k, metric, grid)
    return seminorm_from_modulus(mod, r, theta)


def _grid_for(grids, f, j):
    if grids is None:
        return default_hgrid(f, j)
    if isinstance(grids, LogGrid):
        return grids
    return grids[j]


def aniso_seminorms(f: GridFunction, params, k, grids=None):
    """Per-axis seminorm results for ``params`` (an ``AnisoParams``)."""
    k = tuple(k) if np.ndim(k) else (int(k),) * f.n
    if len(k) != f.n or params.n != f.n:
        raise PreconditionError("orders and parameters must match the dimension")
    out = []
    for j in range(f.n):
        r, p, theta = float(params.r_j[j]), float(params.p_j[j]), float(params.theta_j[j])
        if not k[j] > r:
            raise PreconditionError(f"k_{j + 1}={k[j]} must exceed r_{j + 1}={r}")
        out.append(besov_seminorm(f, j, r, p, theta, k[j], _grid_for(grids, f, j)))
    return out


def aniso_seminorm_sum(f: GridFunction, params, k, grids=None) -> float:
    return float(sum(res.value for res in aniso_seminorms(f, params, k, grids)))


def default_orders(params) -> tuple:
    """Smallest integer ``k_j > r_j`` per axis."""
    return tuple(int(math.floor(float(r))) + 1 for r in params.r_j)
