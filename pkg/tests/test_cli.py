"""Exit-code fixtures per subcommand, config parsing and output determinism.

Code 3 is only reachable where a subcommand certifies something against a
tolerance: ``majorize`` and ``equilibrium`` certify invariants that hold by
construction, and ``params``, ``target``, ``rearrange``, ``lorentz`` and
``seminorm`` certify nothing.
"""
import math
import subprocess
import sys
import textwrap

import pytest

from besovlab.cli import ConfigError, parse_config, run

WORKED = """
n = 2
r = [1, 3]
p = [2, 2]
theta = [1, inf]
"""
ISO = """
n = 2
r = [0.5, 0.5]
p = [1, 1]
theta = [inf, inf]
"""
ANISO = """
n = 2
r = [0.5, 0.25]
p = [1, 1]
theta = [2, inf]
"""
PSI = """
n = 1
alpha = 0.5
delta = 0.25
m_theta = 2
psi_c0 = 1
psi_breaks = [1]
psi_exps = [1, 0]
"""
EQUI = WORKED + """
phi1_c0 = 1
phi1_exps = [1]
phi2_c0 = 1
phi2_exps = [3]
tgrid = 1e-3:1e3:8
"""


@pytest.fixture
def cfg(tmp_path):
    def write(text, name="run.cfg"):
        path = tmp_path / name
        path.write_text(textwrap.dedent(text))
        return str(path)

    return write


def code(cfg_path, *argv):
    cmd, *rest = argv
    return run([*cmd.split(), "--config", cfg_path, *rest])


CASES = [
    # (subcommand, config, extra args, expected exit)
    ("params", WORKED, [], 0),
    ("params", WORKED + "q = [4]\n", [], 1),
    ("params", "n = 2\nr = [0.1, 0.1]\np = [1, 10]\ntheta = [1, 1]\n", [], 2),
    ("target", WORKED, ["--q", "4,4"], 0),
    ("target", WORKED, ["--q", "4"], 1),
    ("target", WORKED, ["--q", "2,4"], 2),
    ("rearrange", ISO, [], 0),
    ("rearrange", ISO + "colour = red\n", [], 1),
    ("rearrange", ISO + "res = [4, 4]\n", [], 2),
    ("lorentz", ISO, ["--lorentz", "2,1"], 0),
    ("lorentz", ISO, ["--lorentz", "2"], 1),
    ("lorentz", ISO, ["--lorentz=-1,1"], 2),
    ("seminorm", ISO, [], 0),
    ("seminorm", "n = 2\n", [], 1),
    ("seminorm", ISO + "k = [1, 1]\nfamily = box\n", ["--hgrid", "1e-9:1e-8:8"], 2),
    ("majorize", PSI, [], 0),
    ("majorize", PSI.replace("alpha = 0.5\n", ""), [], 1),
    ("majorize", PSI.replace("psi_exps = [1, 0]", "psi_exps = [1, -1]"), [], 2),
    ("equilibrium", EQUI, [], 0),
    ("equilibrium", WORKED + "phi1_c0 = 1\nphi1_exps = [1]\n", [], 1),
    ("equilibrium", EQUI + "delta = 0.5\n", [], 2),
    ("verify limit", ISO, [], 0),
    ("verify limit", ISO + "check = maybe\nfile = \n", ["--res", "32"], 1),
    ("verify limit", WORKED + "k = [2, 4]\n", [], 2),
    ("verify nolimit", ANISO + "s = 1\np0 = 1\n", ["--q", "1.1"], 0),
    ("verify nolimit", ANISO + "p0 = 1\n", ["--q", "1.1"], 1),
    ("verify nolimit", ANISO + "s = 1\np0 = 1\n", ["--q", "0.9"], 2),
    ("verify metrics", ISO, ["--q", "1.2,1.2"], 0),
    ("verify metrics", ISO, [], 1),
    ("verify metrics", ISO, ["--q", "0.5,1.2"], 2),
    ("verify dilation", ISO + "lam_exps = [-1, 1]\n", [], 0),
    ("verify dilation", ISO + "check = nolimit\n", [], 1),
    ("verify dilation", WORKED + "k = [2, 4]\nlam_exps = [0, 1]\n", [], 2),
    ("verify dilation", ISO + "family = hat\nlam_exps = [-1, 1]\n", ["--tol", "1e-300"], 3),
    ("verify lemma1", ISO + "res = [16, 16]\n", [], 0),
    ("verify lemma1", ISO + "xi = 0\n", [], 1),
    ("verify lemma1", ISO + "res = [16, 16]\nxi = 0.5\n", [], 2),
    ("verify lemma4", ISO + "res = [16, 16]\nfamily = hat\n", ["--tol", "10"], 0),
    ("verify lemma4", ISO + "xis = [2, -1]\n", [], 1),
    ("verify lemma4", ISO + "res = [16, 16]\nxis = [0.5, 2]\n", [], 2),
    ("verify lemma4", ISO + "res = [16, 16]\nfamily = hat\n", [], 3),
]


@pytest.mark.parametrize("command,text,extra,expected", CASES, ids=[f"{c[0]}-{c[3]}-{i}" for i, c in enumerate(CASES)])
def test_exit_codes(cfg, capsys, command, text, extra, expected):
    assert code(cfg(text), command, *extra) == expected
    err = capsys.readouterr().err
    if expected:
        assert err.startswith("besovlab: ")


def test_every_subcommand_has_codes_0_1_2():
    seen = {}
    for command, _, _, expected in CASES:
        seen.setdefault(command, set()).add(expected)
    for command, codes in seen.items():
        assert {0, 1, 2} <= codes, command


def test_params_output(cfg, capsys):
    assert code(cfg(WORKED), "params") == 0
    out = capsys.readouterr().out
    assert "r = 1.5\n" in out and "p = 2\n" in out and "theta = 1.3333333333333333\n" in out
    assert "beta = 0.75,0.25\n" in out


def test_beta_message_names_inequality(cfg, capsys):
    code(cfg("n = 2\nr = [0.1, 0.1]\np = [1, 10]\ntheta = [1, 1]\n"), "params")
    assert "beta_2" in capsys.readouterr().err


def test_target_output(cfg, capsys):
    assert code(cfg(WORKED), "target", "--q", "4,4") == 0
    out = capsys.readouterr().out
    assert "kappa = 0.66666666666666663," in out and "theta_prime = 1.0909090909090908,4" in out


def test_missing_config_is_usage_error(tmp_path):
    assert run(["params", "--config", str(tmp_path / "nope.cfg")]) == 1
    assert run(["bogus", "--config", "x"]) == 1


def test_parse_config_defaults_and_inf():
    rc = parse_config(ISO)
    assert rc["theta"] == [math.inf, math.inf]
    assert "family" in rc.defaults and rc["res"] == [32, 32] and "res" in rc.defaults
    assert rc["hppd"] == 16.0


@pytest.mark.parametrize(
    "text",
    [
        "n = 2\nr = [1]\n",
        "n = 2\nr = [1, -1]\n",
        "n = 2\nn = 2\n",
        "n = 2\nwhatever = 1\n",
        "r = [1, 2]\n",
        "n = 2\ntol = 0\n",
        "n = 2\nhgrid = 1:0.5:8\n",
        "n = 2\nxi = [1, 2]\n",
    ],
)
def test_parse_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_output_is_byte_identical(cfg, tmp_path):
    path = cfg(ISO + "family = hat\nres = [16, 16]\n")
    outs = []
    for name in ("a", "b"):
        d = tmp_path / name
        assert run(["verify", "metrics", "--config", path, "--q", "1.2,1.2", "--out", str(d)]) == 0
        assert run(["seminorm", "--config", path, "--out", str(d)]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    assert outs[0] == outs[1] and len(outs[0]) >= 4


def test_module_entry_point(cfg):
    proc = subprocess.run(
        [sys.executable, "-m", "besovlab", "params", "--config", cfg(WORKED)], capture_output=True, text=True
    )
    assert proc.returncode == 0 and "beta = 0.75,0.25" in proc.stdout
