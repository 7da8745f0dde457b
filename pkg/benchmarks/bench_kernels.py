"""Compare the compiled and pure-Python kernel backends.

Run ``python3 benchmarks/bench_kernels.py``; prints one line per kernel with
the best-of-N time of each backend and the speed-up.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from besovlab import _core_py
from besovlab.halfline import PiecewisePower

try:
    from besovlab import _core
except ImportError:  # extension not built
    _core = None


def _cases(rng):
    g = PiecewisePower.continuous_powers(1.0, np.geomspace(1e-3, 1e3, 40), np.linspace(2.0, 0.5, 41))
    # multi-term segments exercise the bisection path
    g2 = PiecewisePower([1.0], [((4.0, 0.75, 0), (-2.0, 1.0, 0)), ((-2.0, 0.0, 0), (4.0, 0.25, 0))])
    breaks, offs, coef, expo, logp = g._flat
    _, offs2, coef2, expo2, logp2 = g2._flat
    ts = np.geomspace(1e-5, 1e5, 20000)
    a3 = rng.standard_normal((64, 64, 64))
    shifts = np.arange(1, 33)
    return {
        "pl_eval (20k points, 41 segments)": lambda m: m.pl_eval(breaks, offs, coef, expo, logp, ts),
        "seg_root (1k solves)": lambda m: [
            m.seg_root(offs2, coef2, expo2, logp2, 0, y, 1e-12, 1.0, 1e-15) for y in np.linspace(0.01, 1.9, 1000)
        ],
        "kdiff_power_sums (64^3, k=2, 32 shifts, p=1)": lambda m: m.kdiff_power_sums(a3, 2, shifts, 1.0),
        "kdiff_power_sums (64^3, k=2, 32 shifts, p=1.5)": lambda m: m.kdiff_power_sums(a3, 2, shifts, 1.5),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _core is None:
        print("compiled backend not built; nothing to compare")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':52s} {'cython [s]':>11s} {'python [s]':>11s} {'speed-up':>9s}")
    for name, fn in _cases(rng).items():
        tc = min(timeit.repeat(lambda: fn(_core), number=1, repeat=args.repeat))
        tp = min(timeit.repeat(lambda: fn(_core_py), number=1, repeat=args.repeat))
        print(f"{name:52s} {tc:11.5f} {tp:11.5f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
