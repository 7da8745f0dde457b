"""Command-line front end.

Exit codes: 0 success, 1 usage or config error, 2 violated precondition or
admissibility condition, 3 failed verification.
"""
from __future__ import annotations

import argparse
import math
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import construct, verify
from .errors import PreconditionError, VerificationError
from .grid_fn import GridFunction, load_abgf, load_csv, rearrangement
from .halfline import LogGrid, PiecewisePower
from .params import derive, embedding_target, limit_exponent, parse_exponent
from .smoothness import aniso_seminorms, default_orders, default_tgrid

EXIT_OK, EXIT_USAGE, EXIT_PRECONDITION, EXIT_VERIFY = 0, 1, 2, 3
VERIFY_VERBS = ("metrics", "limit", "nolimit", "dilation", "lemma1", "lemma4")


class ConfigError(ValueError):
    """Malformed config or command line."""


# --- config ---------------------------------------------------------------------

LIST_KEYS = {"r", "p", "theta", "q", "res", "lam", "extents", "k", "shape", "spacing", "origin",
             "psi_breaks", "psi_exps", "lorentz", "xis", "lam_exps"}
SCALAR_KEYS = {"n", "family", "file", "tol", "xi", "axis", "s", "p0", "alpha", "delta", "m_theta",
               "psi_c0", "check", "hgrid", "tgrid", "out", "hppd"}
PHI_KEY = re.compile(r"^phi(\d+)_(c0|breaks|exps)$")

DEFAULTS = {
    "family": "box",
    "tol": 0.1,
    "xi": 2.0,
    "axis": 1,
    "check": "limit",
    "hppd": 16.0,
    "m_theta": math.inf,
    "lam_exps": [-3, 3],
    "xis": [1.5, 2.0, 4.0],
}


@dataclass
class RunConfig:
    """Validated config; ``defaults`` lists the keys that were filled in."""

    values: dict
    defaults: list = field(default_factory=list)

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)

    @property
    def n(self) -> int:
        return int(self.values["n"])


def _number(text: str):
    try:
        return parse_exponent(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"not a number: {text!r}") from None


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    is_list = raw.startswith("[") and raw.endswith("]")
    if key in LIST_KEYS or PHI_KEY.match(key) and not key.endswith("c0"):
        body = raw[1:-1] if is_list else raw
        items = [x for x in re.split(r"[,\s]+", body.strip()) if x]
        return [_number(x) for x in items]
    if is_list:
        raise ConfigError(f"key {key!r} takes a single value, not a list")
    if key in ("family", "file", "check", "hgrid", "tgrid", "out"):
        return raw
    return _number(raw)


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` and ``key = [a, b, ...]`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (x.strip() for x in line.split("=", 1))
        if key not in LIST_KEYS and key not in SCALAR_KEYS and not PHI_KEY.match(key):
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, raw)
    return _validate(values)


def _validate(values: dict) -> RunConfig:
    if "n" not in values:
        raise ConfigError("missing required key 'n'")
    n = values["n"]
    if not (isinstance(n, (int, float)) and float(n).is_integer() and n >= 1):
        raise ConfigError("n must be a positive integer")
    n = int(n)
    values["n"] = n
    for key in ("r", "p", "theta", "q", "res", "lam", "extents", "k", "shape", "spacing", "origin"):
        if key in values and len(values[key]) != n:
            raise ConfigError(f"{key} has {len(values[key])} entries, expected n={n}")
    for key in ("r", "p", "theta", "q", "res", "lam", "extents", "k", "spacing", "xis", "lorentz"):
        if key in values and any(not x > 0 for x in values[key]):
            raise ConfigError(f"{key} entries must be positive")
    for key in ("tol", "xi", "s", "p0", "alpha", "delta", "m_theta", "hppd"):
        if key in values and not values[key] > 0:
            raise ConfigError(f"{key} must be positive")
    for key in ("hgrid", "tgrid"):
        if key in values:
            values[key] = _grid(values[key])
    defaults = []
    for key, val in DEFAULTS.items():
        if key not in values:
            values[key] = val
            defaults.append(key)
    if "res" not in values:
        values["res"] = [32] * n
        defaults.append("res")
    if "lam" not in values:
        values["lam"] = [1.0] * n
        defaults.append("lam")
    if "extents" not in values:
        values["extents"] = [1.0] * n
        defaults.append("extents")
    return RunConfig(values, defaults)


def _grid(text) -> LogGrid:
    if isinstance(text, LogGrid):
        return text
    try:
        return LogGrid.parse(str(text))
    except (ValueError, PreconditionError) as exc:
        raise ConfigError(f"bad grid {text!r}: {exc}") from None


def _csv_numbers(text: str, what: str):
    try:
        return [parse_exponent(x) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"bad {what} list {text!r}") from None


# --- helpers ----------------------------------------------------------------------


def _need(cfg: RunConfig, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise ConfigError(f"config is missing {', '.join(missing)}")


def _params(cfg: RunConfig, exact: bool = False):
    _need(cfg, "r", "p", "theta")
    return derive(cfg.n, cfg["r"], cfg["p"], cfg["theta"], exact=exact)


def _function(cfg: RunConfig) -> tuple:
    """The configured grid function and a label for reports."""
    path = cfg.get("file")
    if path:
        if str(path).endswith(".csv"):
            _need(cfg, "shape", "spacing")
            return load_csv(path, cfg["shape"], cfg["spacing"], cfg.get("origin")), Path(path).name
        return load_abgf(path), Path(path).name
    spec = _family(cfg)
    return verify.builtin_family(spec), spec.label


def _family(cfg: RunConfig) -> verify.FamilySpec:
    return verify.parse_family(
        cfg["family"],
        extents=tuple(float(x) for x in cfg["extents"]),
        lam=tuple(float(x) for x in cfg["lam"]),
        res=tuple(int(x) for x in cfg["res"]),
    )


def _orders(cfg: RunConfig, params):
    k = cfg.get("k")
    return tuple(int(x) for x in k) if k else default_orders(params)


def _hgrids(cfg: RunConfig, f: GridFunction):
    g = cfg.get("hgrid")
    return [g] * f.n if g is not None else verify.hgrids(f, float(cfg["hppd"]))


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return f"{float(x):.17g}"
    if isinstance(x, (list, tuple)):
        return ",".join(_fmt(v) for v in x)
    if isinstance(x, (int, float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


class Output:
    """Writes named artifacts into ``--out`` or, without it, to stdout."""

    def __init__(self, out_dir):
        self.dir = Path(out_dir) if out_dir else None
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)

    def emit(self, name: str, text: str):
        if self.dir is None:
            sys.stdout.write(text if text.endswith("\n") else text + "\n")
        else:
            (self.dir / name).write_text(text)

    def lines(self, name: str, pairs):
        self.emit(name, "".join(f"{k} = {_fmt(v)}\n" for k, v in pairs))


# --- subcommands ----------------------------------------------------------------------


def cmd_params(cfg, args, out):
    P = _params(cfg, exact=True)
    pairs = [("n", P.n), ("r", P.r), ("p", P.p), ("theta", P.theta), ("beta", list(P.beta)),
             ("beta_sum", P.beta_sum()), ("lemma_delta", P.lemma_delta())]
    try:
        pairs.append(("q_star", limit_exponent(P)))
    except PreconditionError:
        pairs.append(("q_star", "none"))
    out.lines("params.txt", pairs)
    return EXIT_OK


def cmd_target(cfg, args, out):
    P = _params(cfg, exact=True)
    q = _csv_numbers(args.q, "q") if args.q else cfg.get("q")
    if q is None:
        raise ConfigError("target needs q (config key or --q)")
    if len(q) != P.n:
        raise ConfigError(f"q has {len(q)} entries, expected n={P.n}")
    T = embedding_target(P, q)
    out.lines("target.txt", [("q", list(T.q_j)), ("kappa", list(T.kappa)), ("alpha", list(T.alpha)),
                             ("theta_prime", list(T.theta_prime))])
    return EXIT_OK


def cmd_rearrange(cfg, args, out):
    f, _ = _function(cfg)
    out.emit("rearrangement.csv", rearrangement(f).to_csv())
    return EXIT_OK


def cmd_lorentz(cfg, args, out):
    f, label = _function(cfg)
    qs = _csv_numbers(args.lorentz, "lorentz") if args.lorentz else cfg.get("lorentz")
    if not qs or len(qs) != 2:
        raise ConfigError("lorentz needs two indices q,s")
    from .grid_fn import lorentz_norm

    val = lorentz_norm(rearrangement(f), float(qs[0]), float(qs[1]))
    out.lines("lorentz.txt", [("function", label), ("q", qs[0]), ("s", qs[1]), ("norm", val)])
    return EXIT_OK


def cmd_seminorm(cfg, args, out):
    P = _params(cfg)
    f, label = _function(cfg)
    res = aniso_seminorms(f, P, _orders(cfg, P), _hgrids(cfg, f))
    for j, sr in enumerate(res, start=1):
        out.emit(f"seminorm_{j}.csv", sr.to_csv())
    out.lines("seminorm.txt", [("function", label)] + [(f"b_{j}", sr.value) for j, sr in enumerate(res, start=1)]
              + [("sum", math.fsum(sr.value for sr in res))])
    return EXIT_OK


def _piecewise(c0, breaks, exps, what):
    if c0 is None or exps is None:
        raise ConfigError(f"{what} needs c0 and exps")
    breaks = breaks or []
    if len(exps) != len(breaks) + 1:
        raise ConfigError(f"{what}: exps must have one more entry than breaks")
    return PiecewisePower.continuous_powers(float(c0), [float(b) for b in breaks], [float(e) for e in exps])


def cmd_majorize(cfg, args, out):
    _need(cfg, "alpha", "delta")
    psi = _piecewise(cfg.get("psi_c0"), cfg.get("psi_breaks"), cfg.get("psi_exps"), "psi")
    res = construct.majorize(psi, float(cfg["alpha"]), float(cfg["delta"]), float(cfg["m_theta"]))
    out.emit("majorant.csv", res.to_csv())
    out.lines("majorant.txt", [("ratio", res.ratio), ("chain_bound", res.chain_bound),
                               ("certified", str(res.certified).lower())])
    if not res.certified or not res.ratio <= res.chain_bound * (1 + 1e-9):
        raise VerificationError("majorant certificate failed")
    return EXIT_OK


def _phis(cfg, n):
    out = []
    for j in range(1, n + 1):
        out.append(_piecewise(cfg.get(f"phi{j}_c0"), cfg.get(f"phi{j}_breaks"), cfg.get(f"phi{j}_exps"), f"phi{j}"))
    return out


def cmd_equilibrium(cfg, args, out):
    P = _params(cfg)
    phis = _phis(cfg, P.n)
    tgrid = cfg.get("tgrid") or LogGrid(1e-3, 1e3, 16)
    system = construct.equilibrium(phis, P, cfg.get("delta"), tgrid)
    out.emit("equilibrium.csv", system.to_csv())
    rep = construct.sigma_norm_check(system, phis, P)
    out.emit("sigma_norm.txt", "".join(line.replace(",", " = ", 1) + "\n" for line in rep.lines()))
    return EXIT_OK


def _verify_metrics(cfg, args, out, f, label, P):
    q = _csv_numbers(args.q, "q") if args.q else cfg.get("q")
    if q is None or len(q) != P.n:
        raise ConfigError(f"metrics needs q with n={P.n} entries")
    T = embedding_target(P, q)
    rep = verify.check_metrics(f, P, T, int(cfg["axis"]) - 1, _orders(cfg, P), _hgrids(cfg, f))
    rep.family = label
    out.emit("verify_metrics.csv", verify.reports_to_csv([rep]))
    out.emit("verify_metrics.txt", rep.summary())
    if not (rep.meta["amgm_holds"] and rep.meta["lorentz_monotone"]):
        raise VerificationError("arithmetic-geometric mean or Lorentz monotonicity check failed")
    return EXIT_OK


def cmd_verify(cfg, args, out):
    verb = args.verb
    P = _params(cfg)
    if verb == "dilation":
        return _verify_dilation(cfg, args, out, P)
    f, label = _function(cfg)
    if verb == "limit":
        rep = verify.check_limit(f, P, _orders(cfg, P), _hgrids(cfg, f))
    elif verb == "nolimit":
        _need(cfg, "s", "p0")
        q = _csv_numbers(args.q, "q") if args.q else cfg.get("q")
        if not q:
            raise ConfigError("nolimit needs a scalar q")
        rep = verify.check_nolimit(f, P, float(q[0]), float(cfg["s"]), float(cfg["p0"]), _orders(cfg, P), _hgrids(cfg, f))
    elif verb == "metrics":
        return _verify_metrics(cfg, args, out, f, label, P)
    else:
        tgrid = cfg.get("tgrid") or default_tgrid(f)
        delta = cfg.get("delta")
        if verb == "lemma1":
            lr = verify.check_lemma1(f, P, _orders(cfg, P), float(cfg["xi"]), tgrid, label, delta)
        else:
            lr = verify.check_lemma4(f, P, _orders(cfg, P), [float(x) for x in cfg["xis"]], tgrid, label, delta)
        out.emit(f"verify_{verb}.csv", lr.to_csv())
        if not all(math.isfinite(c) for c in lr.constants):
            raise VerificationError("empirical constant is infinite")
        if verb == "lemma4" and not lr.spread <= float(cfg["tol"]):
            raise VerificationError(f"constant spread {lr.spread:.3g} across xi exceeds tolerance {cfg['tol']:.3g}")
        return EXIT_OK
    rep.family = label
    out.emit(f"verify_{verb}.csv", verify.reports_to_csv([rep]))
    out.emit(f"verify_{verb}.txt", rep.summary())
    return EXIT_OK


def _verify_dilation(cfg, args, out, P):
    if cfg.get("file"):
        raise ConfigError("dilation sweeps need a built-in family, not a file")
    which = cfg["check"]
    if which not in ("limit", "metrics"):
        raise ConfigError("check must be 'limit' or 'metrics'")
    target = None
    if which == "metrics":
        q = _csv_numbers(args.q, "q") if args.q else cfg.get("q")
        if q is None or len(q) != P.n:
            raise ConfigError(f"metrics needs q with n={P.n} entries")
        target = embedding_target(P, q)
    lo, hi = (int(x) for x in cfg["lam_exps"])
    spec = _family(cfg)
    ccfg = verify.CheckConfig(which, P, _orders(cfg, P), target, int(cfg["axis"]) - 1, hppd=float(cfg["hppd"]))
    sweep = verify.dilation_sweep(spec, verify.lambda_set(lo, hi, P.n), ccfg)
    out.emit("verify_dilation.csv", sweep.to_csv())
    out.lines("verify_dilation.txt", [("check", which), ("family", spec.label), ("drift", sweep.drift),
                                      ("tol", cfg["tol"])])
    if not sweep.drift <= float(cfg["tol"]):
        raise VerificationError(f"dilation drift {sweep.drift:.3g} exceeds tolerance {cfg['tol']:.3g}")
    return EXIT_OK


COMMANDS = {
    "params": cmd_params,
    "target": cmd_target,
    "rearrange": cmd_rearrange,
    "lorentz": cmd_lorentz,
    "seminorm": cmd_seminorm,
    "majorize": cmd_majorize,
    "equilibrium": cmd_equilibrium,
    "verify": cmd_verify,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", required=True, help="INI-like run config")
    common.add_argument("--tol", type=float, help="verification tolerance")
    common.add_argument("--hgrid", help="h-grid as min:max:ppd")
    common.add_argument("--tgrid", help="t-grid as min:max:ppd")
    common.add_argument("--res", help="spatial resolution c1,c2,...")
    common.add_argument("--out", help="output directory (default: stdout)")
    common.add_argument("--q", help="target exponents q1,q2,...")
    common.add_argument("--lorentz", help="Lorentz indices q,s")

    parser = _Parser(prog="besovlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "verify":
            sp.add_argument("verb", choices=VERIFY_VERBS)
    return parser


def _apply_overrides(cfg: RunConfig, args):
    if args.tol is not None:
        if not args.tol > 0:
            raise ConfigError("--tol must be positive")
        cfg.values["tol"] = args.tol
    for key in ("hgrid", "tgrid"):
        if getattr(args, key):
            cfg.values[key] = _grid(getattr(args, key))
    if args.res:
        res = _csv_numbers(args.res, "res")
        if len(res) != cfg.n or any(not float(x).is_integer() or x < 1 for x in res):
            raise ConfigError(f"--res needs {cfg.n} positive integers")
        cfg.values["res"] = [int(x) for x in res]
    if args.out:
        cfg.values["out"] = args.out


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        cfg = parse_config(text)
        _apply_overrides(cfg, args)
        return COMMANDS[args.command](cfg, args, Output(cfg.get("out")))
    except ConfigError as exc:
        print(f"besovlab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PreconditionError as exc:
        print(f"besovlab: precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except VerificationError as exc:
        print(f"besovlab: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY


def main() -> None:
    sys.exit(run())
