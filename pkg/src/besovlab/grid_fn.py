"""Piecewise-constant functions on a box of cells, zero outside.

Distribution functions, non-increasing rearrangements and Lebesgue/Lorentz
norms are computed exactly for this model: the rearrangement is a finite step
function whose breakpoints are integer multiples of the cell volume.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import PreconditionError

MAGIC = "ABGF1"


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples on a regular cell grid; one value per cell.

    Parameters
    ----------
    samples : ndarray
        ``n``-dimensional array of finite values, row-major.
    spacing : tuple of float
        Positive cell edge length per axis.
    origin : tuple of float
        Lower corner of the sampled box.
    """

    samples: np.ndarray
    spacing: tuple
    origin: tuple

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float, copy=True)
        if samples.ndim < 1:
            raise PreconditionError("samples must have at least one axis")
        spacing = tuple(float(s) for s in np.atleast_1d(self.spacing))
        origin = tuple(float(o) for o in np.atleast_1d(self.origin))
        if len(spacing) != samples.ndim or len(origin) != samples.ndim:
            raise PreconditionError("spacing and origin need one entry per axis")
        if any(not (s > 0 and math.isfinite(s)) for s in spacing):
            raise PreconditionError("every spacing must be positive and finite")
        if not np.all(np.isfinite(samples)):
            raise PreconditionError("samples must be finite")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "origin", origin)

    @classmethod
    def on_box(cls, samples, lengths, origin=None):
        """Grid covering ``[origin, origin + lengths]`` exactly."""
        samples = np.asarray(samples, dtype=float)
        lengths = np.broadcast_to(np.asarray(lengths, dtype=float), (samples.ndim,))
        spacing = tuple(float(L) / N for L, N in zip(lengths, samples.shape))
        if origin is None:
            origin = (0.0,) * samples.ndim
        return cls(samples, spacing, tuple(origin))

    @property
    def n(self) -> int:
        return self.samples.ndim

    @property
    def shape(self) -> tuple:
        return self.samples.shape

    @property
    def cell_volume(self) -> float:
        return math.prod(self.spacing)

    @property
    def extents(self) -> tuple:
        return tuple(N * s for N, s in zip(self.shape, self.spacing))

    @property
    def support_measure(self) -> float:
        return math.prod(self.extents)

    def dilate(self, lam) -> "GridFunction":
        """``x -> f(x / lam)`` per axis; samples unchanged, geometry scaled."""
        lam = np.broadcast_to(np.asarray(lam, dtype=float), (self.n,))
        return GridFunction(
            self.samples,
            tuple(s * l for s, l in zip(self.spacing, lam)),
            tuple(o * l for o, l in zip(self.origin, lam)),
        )

    def __eq__(self, other):
        if not isinstance(other, GridFunction):
            return NotImplemented
        return (
            self.spacing == other.spacing
            and self.origin == other.origin
            and np.array_equal(self.samples, other.samples)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class StepRearrangement:
    """``f*(t) = values[i]`` on ``(breakpoints[i], breakpoints[i+1]]``, zero after."""

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if b.size != v.size + 1 or b[0] != 0.0:
            raise PreconditionError("breakpoints must start at 0 and outnumber values by one")
        if np.any(np.diff(b) <= 0):
            raise PreconditionError("breakpoints must be strictly increasing")
        if np.any(v < 0) or np.any(np.diff(v) >= 0):
            raise PreconditionError("values must be positive and strictly decreasing")
        b.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    @property
    def support(self) -> float:
        return float(self.breakpoints[-1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breakpoints, t, side="left") - 1
        padded = np.append(self.values, 0.0)
        out = padded[np.clip(idx, 0, self.values.size)]
        return out if out.ndim else float(out)

    def measure_above(self, y: float) -> float:
        """Measure of ``{f* > y}``."""
        count = int(np.count_nonzero(self.values > y))
        return float(self.breakpoints[count])

    def __eq__(self, other):
        if not isinstance(other, StepRearrangement):
            return NotImplemented
        return np.array_equal(self.breakpoints, other.breakpoints) and np.array_equal(
            self.values, other.values
        )

    __hash__ = None

    def to_csv(self) -> str:
        rows = ["t_left,t_right,value"]
        for a, b, v in zip(self.breakpoints[:-1], self.breakpoints[1:], self.values):
            rows.append(f"{a:.17g},{b:.17g},{v:.17g}")
        return "\n".join(rows) + "\n"


def distribution_function(f: GridFunction, y: float) -> float:
    """Measure of ``{|f| > y}``."""
    if not y > 0:
        raise PreconditionError("distribution_function requires y > 0")
    return int(np.count_nonzero(np.abs(f.samples) > y)) * f.cell_volume


def rearrangement(f: GridFunction) -> StepRearrangement:
    mags = np.abs(f.samples).ravel()
    mags = mags[mags > 0]
    if mags.size == 0:
        return StepRearrangement(np.zeros(1), np.zeros(0))
    values, counts = np.unique(mags, return_counts=True)
    values, counts = values[::-1], counts[::-1]
    cum = np.concatenate(([0], np.cumsum(counts)))
    return StepRearrangement(cum * f.cell_volume, values)


def lp_norm(f: GridFunction, p: float) -> float:
    if not p >= 1:
        raise PreconditionError("lp_norm requires p >= 1")
    a = np.abs(f.samples)
    if p == math.inf:
        return float(a.max(initial=0.0))
    s = np.sum(a) if p == 1 else np.sum(a**p)
    return float((s * f.cell_volume) ** (1.0 / p))


def _power_increments(b, e):
    """``b[i+1]**e - b[i]**e`` without cancellation for thin steps."""
    lo, hi = b[:-1], b[1:]
    out = np.empty(lo.size)
    first = lo == 0
    out[first] = hi[first] ** e
    rest = ~first
    out[rest] = lo[rest] ** e * np.expm1(e * np.log1p((hi[rest] - lo[rest]) / lo[rest]))
    return out


def lorentz_norm(R: StepRearrangement, q: float, s: float) -> float:
    """``(int_0^inf (t^{1/q} f*(t))^s dt/t)^{1/s}``, closed form per step.

    ``s = inf`` gives ``sup_t t^{1/q} f*(t)``.
    """
    if not (q > 0 and s > 0):
        raise PreconditionError("lorentz_norm requires q > 0 and s > 0")
    if R.values.size == 0:
        return 0.0
    if s == math.inf:
        return float(np.max(R.breakpoints[1:] ** (1.0 / q) * R.values))
    e = s / q
    total = np.sum(R.values**s * _power_increments(R.breakpoints, e)) * (q / s)
    return float(total ** (1.0 / s))


def lorentz_norm_of(f: GridFunction, q: float, s: float) -> float:
    return lorentz_norm(rearrangement(f), q, s)


# --- file formats -----------------------------------------------------------


def _fmt_list(xs):
    return ",".join(f"{x:.17g}" if isinstance(x, float) else str(x) for x in xs)


def save_abgf(f: GridFunction, path) -> None:
    header = (
        f"{MAGIC} n={f.n} shape={_fmt_list(f.shape)} "
        f"spacing={_fmt_list(f.spacing)} origin={_fmt_list(f.origin)}\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(f.samples, dtype="<f8").tobytes())


def _parse_header(line: str):
    parts = line.split()
    if not parts or parts[0] != MAGIC:
        raise PreconditionError(f"not an {MAGIC} file")
    fields = dict(p.split("=", 1) for p in parts[1:])
    try:
        n = int(fields["n"])
        shape = tuple(int(x) for x in fields["shape"].split(","))
        spacing = tuple(float(x) for x in fields["spacing"].split(","))
        origin = tuple(float(x) for x in fields["origin"].split(","))
    except KeyError as exc:
        raise PreconditionError(f"{MAGIC} header missing field {exc}") from None
    if not (len(shape) == len(spacing) == len(origin) == n):
        raise PreconditionError(f"{MAGIC} header lists disagree with n={n}")
    return shape, spacing, origin


def load_abgf(path) -> GridFunction:
    raw = Path(path).read_bytes()
    nl = raw.index(b"\n")
    shape, spacing, origin = _parse_header(raw[:nl].decode("ascii"))
    data = np.frombuffer(raw[nl + 1:], dtype="<f8")
    if data.size != math.prod(shape):
        raise PreconditionError(f"expected {math.prod(shape)} samples, found {data.size}")
    return GridFunction(data.reshape(shape).astype(float), spacing, origin)


def load_csv(path, shape, spacing, origin=None) -> GridFunction:
    """One sample per line, row-major; ``#`` lines ignored."""
    values = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        values.append(float(line.split(",")[0]))
    shape = tuple(int(x) for x in shape)
    if len(values) != math.prod(shape):
        raise PreconditionError(f"expected {math.prod(shape)} samples, found {len(values)}")
    if origin is None:
        origin = (0.0,) * len(shape)
    return GridFunction(np.array(values).reshape(shape), tuple(spacing), tuple(origin))
