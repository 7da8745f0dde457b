"""Exact calculus on the half line (0, inf).

The carrier is :class:`PiecewisePower`: on each log-segment the function is a
short sum of terms ``c * t**e * log(t)**m``.  A single term per segment is the
plain piecewise power law; several terms (and logarithmic factors) appear as
soon as a power law is pushed through a Hardy-type integral, so the class is
closed under those integrals and every norm below has a closed form or a
segment-local quadrature.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from math import factorial, inf

import numpy as np
from scipy import integrate, optimize

from . import _kernels
from .errors import PreconditionError

EXP_TOL = 1e-12  # exponents closer than this are treated as equal
CONT_RTOL = 1e-12


@dataclass(frozen=True)
class LogGrid:
    """Geometric grid on [t_min, t_max] with at least ``ppd`` nodes per decade."""

    t_min: float
    t_max: float
    ppd: float = 16

    def __post_init__(self):
        if not (self.t_min > 0 and self.t_max > self.t_min):
            raise PreconditionError("LogGrid requires 0 < t_min < t_max")
        if self.ppd < 4:
            raise PreconditionError("LogGrid requires at least 4 points per decade")

    @property
    def decades(self) -> float:
        return math.log10(self.t_max / self.t_min)

    @property
    def nodes(self) -> np.ndarray:
        count = max(1, math.ceil(self.ppd * self.decades - 1e-9))
        nodes = np.geomspace(self.t_min, self.t_max, count + 1)
        nodes[0], nodes[-1] = self.t_min, self.t_max
        return nodes

    def refined(self, factor: float = 2) -> "LogGrid":
        return LogGrid(self.t_min, self.t_max, self.ppd * factor)

    @classmethod
    def parse(cls, text: str) -> "LogGrid":
        """Parse ``min:max:ppd``."""
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be min:max:ppd, got {text!r}")
        return cls(float(parts[0]), float(parts[1]), float(parts[2]))


class SampledHalflineFunction:
    """Non-negative values on strictly increasing positive nodes."""

    def __init__(self, nodes, values, monotone: bool = False):
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape or nodes.size < 1:
            raise PreconditionError("nodes and values must be equal-length 1-D arrays")
        if np.any(nodes <= 0) or np.any(np.diff(nodes) <= 0):
            raise PreconditionError("nodes must be positive and strictly increasing")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise PreconditionError("values must be finite and non-negative")
        if monotone and np.any(np.diff(values) < 0):
            raise PreconditionError("monotone flag set but values decrease")
        self.nodes = nodes
        self.values = values
        self.monotone = monotone
        self.nodes.setflags(write=False)
        self.values.setflags(write=False)

    @classmethod
    def sample(cls, fn, grid: LogGrid, monotone: bool = False):
        nodes = grid.nodes
        return cls(nodes, np.asarray(fn(nodes), dtype=float), monotone)

    def __len__(self):
        return self.nodes.size

    def at(self, t, mode: str = "step"):
        """Value at arbitrary ``t``.

        ``step`` returns the value of the last node ``<= t`` (0 below the first
        node), which is a lower bound for a non-decreasing function;
        ``loglog`` interpolates linearly in log-log coordinates and holds the
        end values constant outside the nodes.
        """
        t = np.asarray(t, dtype=float)
        if mode == "step":
            idx = np.searchsorted(self.nodes, t, side="right") - 1
            out = np.where(idx >= 0, self.values[np.clip(idx, 0, None)], 0.0)
        elif mode == "loglog":
            if np.any(self.values <= 0):
                raise PreconditionError("loglog interpolation needs positive values")
            out = np.exp(np.interp(np.log(t), np.log(self.nodes), np.log(self.values)))
        else:
            raise ValueError(f"unknown mode {mode!r}")
        return out if out.ndim else float(out)

    def to_csv(self, header=None) -> str:
        buf = io.StringIO()
        if header:
            for line in header:
                buf.write(f"# {line}\n")
        buf.write("t,value\n")
        for t, v in zip(self.nodes, self.values):
            buf.write(f"{t:.17g},{v:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, monotone: bool = False):
        rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
        if rows and not _is_number(rows[0].split(",")[0]):
            rows = rows[1:]
        data = np.array([[float(x) for x in ln.split(",")[:2]] for ln in rows])
        return cls(data[:, 0], data[:, 1], monotone)


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


# --- term algebra ---------------------------------------------------------
# A term is a tuple (c, e, m): c * t**e * log(t)**m with integer m >= 0.


def _canonical(terms):
    """Merge terms with equal (e, m) and drop zero coefficients."""
    merged = []
    for c, e, m in sorted(terms, key=lambda x: (x[1], x[2])):
        if merged and merged[-1][2] == m and abs(merged[-1][1] - e) <= EXP_TOL:
            c0, e0, _ = merged[-1]
            merged[-1] = (c0 + c, e0, m)
        else:
            merged.append((float(c), float(e), int(m)))
    return tuple(x for x in merged if x[0] != 0.0)


def _eval_terms(terms, t):
    t = np.asarray(t, dtype=float)
    lt = np.log(t)
    acc = np.zeros_like(t)
    for c, e, m in terms:
        term = c * t**e
        if m:
            term = term * lt**m
        acc = acc + term
    return acc


def _tderiv_terms(terms):
    """Terms of t * d/dt."""
    out = []
    for c, e, m in terms:
        if abs(e) > EXP_TOL:
            out.append((c * e, e, m))
        if m:
            out.append((c * m, e, m - 1))
    return _canonical(out)


def _antiderivative(terms):
    """Terms of F with dF = (sum of terms) dt/t."""
    out = []
    for c, e, m in terms:
        if abs(e) <= EXP_TOL:
            out.append((c / (m + 1), 0.0, m + 1))
        else:
            for i in range(m + 1):
                coef = c * (-1) ** i * factorial(m) / factorial(m - i) / e ** (i + 1)
                out.append((coef, e, m - i))
    return _canonical(out)


def _shift(terms, a):
    """Multiply by t**a."""
    return _canonical([(c, e + a, m) for c, e, m in terms])


def _scale(terms, s):
    return _canonical([(c * s, e, m) for c, e, m in terms])


def _dominant(terms, end):
    """Term dominating as t -> 0 (end=0) or t -> inf (end=inf)."""
    live = [x for x in terms if x[0] != 0.0]
    if not live:
        return (0.0, 0.0, 0)
    if end == 0:
        emin = min(e for _, e, _ in live)
        cand = [x for x in live if abs(x[1] - emin) <= EXP_TOL]
    else:
        emax = max(e for _, e, _ in live)
        cand = [x for x in live if abs(x[1] - emax) <= EXP_TOL]
    return max(cand, key=lambda x: x[2])


def _limit(terms, end):
    c, e, m = _dominant(terms, end)
    if c == 0.0:
        return 0.0
    if end == 0:
        if e > EXP_TOL:
            return 0.0
        if abs(e) <= EXP_TOL and not m:
            return c
        return math.copysign(inf, c * (-1) ** m)
    if e < -EXP_TOL:
        return 0.0
    if abs(e) <= EXP_TOL and not m:
        return c
    return math.copysign(inf, c)


def _vanishes_at(terms, end):
    """True when every term tends to 0 at the given end."""
    for c, e, m in terms:
        if c == 0.0:
            continue
        if end == 0 and not e > EXP_TOL:
            return False
        if end == inf and not e < -EXP_TOL:
            return False
    return True


def _integral_terms(terms, lo, hi):
    """Exact integral of sum(terms) dt/t over (lo, hi); inf if divergent."""
    F = _antiderivative(terms)
    if hi == inf:
        if not _vanishes_at(F, inf):
            return inf
        upper = 0.0
    else:
        upper = float(_eval_terms(F, hi))
    if lo == 0:
        if not _vanishes_at(F, 0):
            return inf
        lower = 0.0
    else:
        lower = float(_eval_terms(F, lo))
    return upper - lower


class PiecewisePower:
    """Function on (0, inf) that is a sum of power-log terms per segment.

    Segment ``k`` covers ``(breaks[k-1], breaks[k]]`` with ``breaks[-1] = 0``
    and ``breaks[m] = inf`` implied.  Use :meth:`powers` for the plain form
    ``c_k * t**e_k``.
    """

    def __init__(self, breaks, terms, check: bool = True):
        breaks = np.asarray(breaks, dtype=float).ravel()
        terms = tuple(_canonical(seg) for seg in terms)
        if len(terms) != breaks.size + 1:
            raise PreconditionError("need exactly one term list per segment")
        if np.any(breaks <= 0) or np.any(np.diff(breaks) <= 0) or not np.all(np.isfinite(breaks)):
            raise PreconditionError("breakpoints must be positive, finite, strictly increasing")
        self.breaks = breaks
        self.breaks.setflags(write=False)
        self.terms = terms
        offs = [0]
        coef, expo, logp = [], [], []
        for seg in terms:
            for c, e, m in seg:
                coef.append(c)
                expo.append(e)
                logp.append(m)
            offs.append(len(coef))
        self._flat = (
            np.ascontiguousarray(breaks),
            np.asarray(offs, dtype=np.int64),
            np.asarray(coef, dtype=float),
            np.asarray(expo, dtype=float),
            np.asarray(logp, dtype=np.int64),
        )
        if check:
            self._check_continuity()

    # construction ----------------------------------------------------------
    @classmethod
    def powers(cls, breaks, coefs, exps, check: bool = True):
        coefs = np.atleast_1d(np.asarray(coefs, dtype=float))
        exps = np.atleast_1d(np.asarray(exps, dtype=float))
        if coefs.shape != exps.shape:
            raise PreconditionError("coefs and exps must have equal length")
        return cls(breaks, [[(c, e, 0)] for c, e in zip(coefs, exps)], check=check)

    @classmethod
    def monomial(cls, c: float, e: float):
        return cls([], [[(c, e, 0)]])

    @classmethod
    def continuous_powers(cls, c0: float, breaks, exps):
        """Continuous piecewise power law from the first coefficient and all exponents."""
        breaks = np.asarray(breaks, dtype=float)
        exps = np.asarray(exps, dtype=float)
        coefs = [float(c0)]
        for b, e_prev, e in zip(breaks, exps[:-1], exps[1:]):
            coefs.append(coefs[-1] * b ** (e_prev - e))
        return cls.powers(breaks, coefs, exps)

    def _check_continuity(self):
        for k, b in enumerate(self.breaks):
            left = float(_eval_terms(self.terms[k], b))
            right = float(_eval_terms(self.terms[k + 1], b))
            scale = sum(abs(float(_eval_terms([x], b))) for x in self.terms[k] + self.terms[k + 1])
            if abs(left - right) > CONT_RTOL * scale:
                raise PreconditionError(
                    f"discontinuity at breakpoint {b:.17g}: {left:.17g} vs {right:.17g}"
                )

    # basic properties --------------------------------------------------------
    @property
    def n_segments(self) -> int:
        return len(self.terms)

    @property
    def single_term(self) -> bool:
        return all(len(seg) <= 1 and all(m == 0 for _, _, m in seg) for seg in self.terms)

    @property
    def is_zero(self) -> bool:
        return all(len(seg) == 0 for seg in self.terms)

    def bounds(self, k):
        lo = 0.0 if k == 0 else float(self.breaks[k - 1])
        hi = inf if k == self.breaks.size else float(self.breaks[k])
        return lo, hi

    def leading_exponent(self) -> float:
        return _dominant(self.terms[0], 0)[1]

    def trailing_exponent(self) -> float:
        return _dominant(self.terms[-1], inf)[1]

    def limit(self, end):
        return _limit(self.terms[0] if end == 0 else self.terms[-1], end)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise PreconditionError("PiecewisePower is defined for t > 0 only")
        if t.ndim == 0:
            return _kernels.pl_eval_scalar(*self._flat, float(t))
        return _kernels.pl_eval(*self._flat, t)

    def __repr__(self):
        return f"PiecewisePower(breaks={self.breaks.tolist()}, terms={list(self.terms)})"

    # algebra -------------------------------------------------------------------
    def times_power(self, a: float) -> "PiecewisePower":
        """t**a * g(t)."""
        return PiecewisePower(self.breaks, [_shift(s, a) for s in self.terms], check=False)

    def scaled(self, s: float) -> "PiecewisePower":
        return PiecewisePower(self.breaks, [_scale(seg, s) for seg in self.terms], check=False)

    def dilated(self, lam: float) -> "PiecewisePower":
        """t -> g(t / lam)."""
        ll = math.log(lam)
        segs = []
        for seg in self.terms:
            out = []
            for c, e, m in seg:
                base = c * lam ** (-e)
                # log(t/lam)**m expanded binomially
                for i in range(m + 1):
                    out.append((base * math.comb(m, i) * (-ll) ** (m - i), e, i))
            segs.append(out)
        return PiecewisePower(self.breaks * lam, segs, check=False)

    def simplify(self, rtol: float = 1e-12) -> "PiecewisePower":
        """Drop breakpoints whose neighbouring segments carry the same terms."""
        keep_b, keep_t = [], [self.terms[0]]
        for k, b in enumerate(self.breaks):
            nxt = self.terms[k + 1]
            if _same_terms(keep_t[-1], nxt, rtol):
                continue
            keep_b.append(b)
            keep_t.append(nxt)
        return PiecewisePower(keep_b, keep_t, check=False)

    def tderiv(self) -> "PiecewisePower":
        """t * g'(t)."""
        return PiecewisePower(self.breaks, [_tderiv_terms(s) for s in self.terms], check=False)

    def check_points(self, per_segment: int = 8, span: float = 4.0) -> np.ndarray:
        """Log-spaced probe points covering every segment and both tails."""
        if self.breaks.size:
            lo, hi = self.breaks[0] / 10**span, self.breaks[-1] * 10**span
        else:
            lo, hi = 10**-span, 10**span
        pts = [np.geomspace(lo, hi, 64)]
        edges = np.concatenate(([lo], self.breaks, [hi]))
        for a, b in zip(edges[:-1], edges[1:]):
            pts.append(np.geomspace(a, b, per_segment + 2)[1:-1])
        pts.append(self.breaks)
        return np.unique(np.concatenate(pts))

    def log_slope_range(self, points=None):
        """Range of t g'(t) / g(t) over probe points and asymptotic ends."""
        if self.is_zero:
            return (0.0, 0.0)
        if self.single_term:
            exps = [seg[0][1] for seg in self.terms if seg]
            return (min(exps), max(exps))
        pts = self.check_points() if points is None else np.asarray(points)
        vals = np.asarray(self(pts))
        der = np.asarray(self.tderiv()(pts))
        with np.errstate(divide="ignore", invalid="ignore"):
            slopes = der / vals
        slopes = list(slopes[np.isfinite(slopes)])
        slopes.append(self.leading_exponent())
        slopes.append(self.trailing_exponent())
        return (min(slopes), max(slopes))

    def is_nondecreasing(self, rtol: float = 1e-12) -> bool:
        if self.single_term:
            return all(not seg or (seg[0][0] > 0 and seg[0][1] >= 0) for seg in self.terms)
        return self.log_slope_range()[0] >= -rtol

    def is_strictly_increasing(self) -> bool:
        if self.is_zero:
            return False
        if self.single_term:
            return all(seg and seg[0][0] > 0 and seg[0][1] > 0 for seg in self.terms)
        pts = self.check_points(per_segment=16)
        vals = np.asarray(self(pts))
        return bool(np.all(np.diff(vals) > 0)) and self.log_slope_range(pts)[0] > 0

    # serialization -----------------------------------------------------------------
    def header_lines(self):
        lines = ["breaks=" + ",".join(f"{b:.17g}" for b in self.breaks)]
        for k, seg in enumerate(self.terms):
            body = ";".join(f"{c:.17g}*t^{e:.17g}*log^{m}" for c, e, m in seg)
            lines.append(f"segment {k}: {body}")
        return lines

    def to_csv(self, grid: LogGrid | None = None) -> str:
        pts = grid.nodes if grid is not None else self.check_points(per_segment=2, span=2)
        return SampledHalflineFunction(pts, np.maximum(self(pts), 0.0)).to_csv(self.header_lines())


def _same_terms(a, b, rtol):
    if len(a) != len(b):
        return False
    for (c1, e1, m1), (c2, e2, m2) in zip(a, b):
        if m1 != m2 or abs(e1 - e2) > EXP_TOL or abs(c1 - c2) > rtol * max(abs(c1), abs(c2)):
            return False
    return True


# --- operations -------------------------------------------------------------


def evaluate(g: PiecewisePower, t: float) -> float:
    if not t > 0:
        raise PreconditionError("evaluate requires t > 0")
    return float(g(t))


def inverse(g: PiecewisePower, y: float, rtol: float = 1e-15) -> float:
    """Unique ``t`` with ``g(t) = y`` for strictly increasing ``g``."""
    if not y > 0:
        raise PreconditionError("inverse requires y > 0")
    if not g.is_strictly_increasing():
        raise PreconditionError("inverse requires a strictly increasing function")
    lo_lim, hi_lim = g.limit(0), g.limit(inf)
    if not (lo_lim < y < hi_lim):
        raise PreconditionError(f"y={y:.17g} outside the range ({lo_lim:.17g}, {hi_lim:.17g})")
    return _inverse_unchecked(g, y, rtol)


def _inverse_unchecked(g, y, rtol=1e-15, break_values=None):
    flat = g._flat
    if break_values is None:
        break_values = g(g.breaks) if g.breaks.size else np.empty(0)
    k = int(np.searchsorted(break_values, y, side="left"))
    seg = g.terms[k]
    if len(seg) == 1 and seg[0][2] == 0:
        c, e, _ = seg[0]
        return (y / c) ** (1.0 / e)
    lo, hi = g.bounds(k)
    if lo == 0.0:
        lo = hi / 2
        while _kernels.seg_eval(flat[1], flat[2], flat[3], flat[4], k, lo) >= y:
            lo /= 2
    if hi == inf:
        hi = lo * 2
        while _kernels.seg_eval(flat[1], flat[2], flat[3], flat[4], k, hi) < y:
            hi *= 2
    return _kernels.seg_root(flat[1], flat[2], flat[3], flat[4], k, y, lo, hi, rtol)


class Inverter:
    """Cached inverse of a strictly increasing :class:`PiecewisePower`."""

    def __init__(self, g: PiecewisePower, rtol: float = 1e-15):
        if not g.is_strictly_increasing():
            raise PreconditionError("inverse requires a strictly increasing function")
        self.g = g
        self.rtol = rtol
        self.break_values = g(g.breaks) if g.breaks.size else np.empty(0)
        self.range = (g.limit(0), g.limit(inf))

    def __call__(self, y: float) -> float:
        if not (self.range[0] < y < self.range[1]):
            raise PreconditionError(f"y={y:.17g} outside the range {self.range}")
        return _inverse_unchecked(self.g, y, self.rtol, self.break_values)


def _segment_sup(terms, lo, hi):
    """Supremum of sum(terms) over (lo, hi]."""
    cands = []
    if lo == 0:
        cands.append(_limit(terms, 0))
    else:
        cands.append(float(_eval_terms(terms, lo)))
    if hi == inf:
        cands.append(_limit(terms, inf))
    else:
        cands.append(float(_eval_terms(terms, hi)))
    if len(terms) > 1 or any(m for _, _, m in terms):
        a = lo if lo > 0 else (hi / 1e12 if hi < inf else 1e-12)
        b = hi if hi < inf else max(a, 1.0) * 1e12
        xs = np.linspace(math.log(a), math.log(b), 257)
        vals = _eval_terms(terms, np.exp(xs))
        i = int(np.argmax(vals))
        cands.append(float(vals[i]))
        left, right = xs[max(i - 1, 0)], xs[min(i + 1, xs.size - 1)]
        if right > left:
            res = optimize.minimize_scalar(
                lambda x: -float(_eval_terms(terms, math.exp(x))),
                bounds=(left, right),
                method="bounded",
                options={"xatol": 1e-12},
            )
            cands.append(-float(res.fun))
    return max(cands)


def _segment_power_integral(terms, theta, lo, hi):
    """Integral of (sum(terms))**theta dt/t over (lo, hi)."""
    if not terms:
        return 0.0
    if theta == 1:
        return max(_integral_terms(terms, lo, hi), 0.0)
    if len(terms) == 1 and terms[0][2] == 0:
        c, e, _ = terms[0]
        return _integral_terms([(abs(c) ** theta, theta * e, 0)], lo, hi)
    if lo == 0 and not _dominant(terms, 0)[1] > EXP_TOL:
        return inf
    if hi == inf and not _dominant(terms, inf)[1] < -EXP_TOL:
        return inf
    a = -np.inf if lo == 0 else math.log(lo)
    b = np.inf if hi == inf else math.log(hi)

    head = _dominant(terms, 0)
    tail = _dominant(terms, inf)

    def integrand(x):
        if abs(x) < 600:
            return max(float(_eval_terms(terms, math.exp(x))), 0.0) ** theta
        # far out a single term dominates; evaluate it in log space
        c, e, m = head if x < 0 else tail
        if c * x**m <= 0:
            return 0.0
        return math.exp(theta * (math.log(c * x**m) + e * x))

    val, _ = integrate.quad(integrand, a, b, epsabs=0.0, epsrel=1e-13, limit=400)
    return val


def weighted_calL_norm(g: PiecewisePower, a: float, theta: float) -> float:
    """``|| t**(-a) g(t) ||`` in L^theta(dt/t); ``inf`` when divergent."""
    if theta < 1:
        raise PreconditionError("theta must be >= 1")
    h = g.times_power(-a)
    if theta == inf:
        return max(_segment_sup(seg, *h.bounds(k)) for k, seg in enumerate(h.terms))
    total = 0.0
    for k, seg in enumerate(h.terms):
        total += _segment_power_integral(seg, theta, *h.bounds(k))
        if total == inf:
            return inf
    return total ** (1.0 / theta)


def _crossings(t1, t2, lo, hi):
    """Points in (lo, hi) where the two term lists cross."""
    if len(t1) == 1 and len(t2) == 1 and t1[0][2] == 0 and t2[0][2] == 0:
        (c1, e1, _), (c2, e2, _) = t1[0], t2[0]
        if abs(e1 - e2) <= EXP_TOL or c1 <= 0 or c2 <= 0:
            return []
        # log space: near-equal exponents overflow the direct power
        lx = math.log(c2 / c1) / (e1 - e2)
        if abs(lx) > 700:
            return []
        x = math.exp(lx)
        return [x] if lo < x < hi else []
    a = lo if lo > 0 else (hi / 1e12 if hi < inf else 1e-12)
    b = hi if hi < inf else max(a, 1.0) * 1e12
    xs = np.geomspace(a, b, 513)
    d = _eval_terms(t1, xs) - _eval_terms(t2, xs)
    out = []
    for i in np.nonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)[0]:
        f = lambda x: float(_eval_terms(t1, math.exp(x)) - _eval_terms(t2, math.exp(x)))
        out.append(math.exp(optimize.brentq(f, math.log(xs[i]), math.log(xs[i + 1]), xtol=1e-15)))
    return [x for x in out if lo < x < hi]


def min_envelope(g1: PiecewisePower, g2: PiecewisePower) -> PiecewisePower:
    """Pointwise minimum, crossing points becoming breakpoints."""
    merged = np.union1d(g1.breaks, g2.breaks)
    edges = np.concatenate(([0.0], merged, [inf]))
    breaks, terms = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        mid_probe = math.sqrt(a * b) if a > 0 and b < inf else (b / 2 if a == 0 and b < inf else (a * 2 if a > 0 else 1.0))
        k1 = int(np.searchsorted(g1.breaks, mid_probe))
        k2 = int(np.searchsorted(g2.breaks, mid_probe))
        s1, s2 = g1.terms[k1], g2.terms[k2]
        cuts = [a] + sorted(_crossings(s1, s2, a, b)) + [b]
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            if lo > 0 and hi < inf:
                probe = math.sqrt(lo * hi)
            elif lo == 0:
                probe = hi / 2 if hi < inf else 1.0
            else:
                probe = lo * 2
            pick = s1 if float(_eval_terms(s1, probe)) <= float(_eval_terms(s2, probe)) else s2
            if lo > 0:
                breaks.append(lo)
            terms.append(pick)
    return PiecewisePower(breaks, terms, check=False).simplify()


def fit_piecewise_power(s: SampledHalflineFunction) -> PiecewisePower:
    """Log-log linear interpolation through every node, power-law extrapolation."""
    if np.any(s.values <= 0):
        raise PreconditionError("fit_piecewise_power needs strictly positive values")
    if len(s) < 2:
        raise PreconditionError("fit_piecewise_power needs at least two nodes")
    lt, lv = np.log(s.nodes), np.log(s.values)
    keep = np.concatenate(([True], np.diff(lt) > 0))  # nodes one ulp apart share a log
    nodes, lt, lv = s.nodes[keep], lt[keep], lv[keep]
    if lt.size < 2:
        raise PreconditionError("fit_piecewise_power needs at least two distinct nodes")
    exps = np.diff(lv) / np.diff(lt)
    coefs = np.exp(lv[:-1] - exps * lt[:-1])
    return PiecewisePower.powers(nodes[1:-1], coefs, exps, check=False).simplify()
