import subprocess
import sys
from pathlib import Path

import pytest

from inflow_waves import csvio
from inflow_waves.boundary_layer import classify_bl_existence
from inflow_waves.cli import main
from inflow_waves.config import (
    ConfigMissingError,
    ConfigParseError,
    ConfigValidationError,
    parse_config,
)
from inflow_waves.thermo import GasModel, state_with_mach

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_minimal_config_fills_defaults(tmp_path):
    sc = parse_config(write(tmp_path, "[scenario]\nname = bl-classify\n"))
    assert sc.name == "bl-classify"
    assert sc.gas.gamma == 1.4
    assert sc.section("sweep")["mach"] == (0.3, 0.7, 1.0, 1.5, 3.0)
    assert ("gas", "gamma") in sc.filled and ("sweep", "mach") in sc.filled


def test_manifest_echoes_every_default(tmp_path):
    sc = parse_config(write(tmp_path, "[scenario]\nname = simulate\n[grid]\nn = 500\n"))
    echo = sc.echo()
    marked = [line for line in echo if line.endswith("# default")]
    assert len(marked) == len(sc.filled)
    assert "n = 500" in echo


def test_gamma_below_one_is_validation_error(tmp_path):
    p = write(tmp_path, "[scenario]\nname = bl-classify\n\n[gas]\ngamma = 0.9\n")
    with pytest.raises(ConfigValidationError) as info:
        parse_config(p)
    assert info.value.line == 5
    assert "gamma" in str(info.value)


def test_unknown_key_is_parse_error(tmp_path):
    p = write(tmp_path, "[scenario]\nname = bl-classify\n[sweep]\nfoo = 1\n")
    with pytest.raises(ConfigParseError) as info:
        parse_config(p)
    assert "'foo'" in str(info.value) and info.value.line == 4


@pytest.mark.parametrize(
    "text, line",
    [
        ("name = bl-classify\n", 1),
        ("[scenario]\nname = bl-classify\nname = contact\n", 3),
        ("[scenario]\nname = bl-classify\n[bogus]\nx = 1\n", 3),
        ("[scenario]\nname = contact\n[contact]\nn = many\n", 4),
        ("[scenario]\nname = contact\n[sweep]\nv = 1\n", 3),
    ],
)
def test_parse_errors_are_line_anchored(tmp_path, text, line):
    with pytest.raises(ConfigParseError) as info:
        parse_config(write(tmp_path, text))
    assert info.value.line == line


def test_missing_file(tmp_path):
    with pytest.raises(ConfigMissingError):
        parse_config(tmp_path / "nope.ini")


def test_exit_codes(tmp_path, capsys):
    ok = write(tmp_path, "[scenario]\nname = bl-classify\n", "ok.ini")
    assert main(["check", str(ok)]) == 0
    assert main(["check", str(write(tmp_path, "[scenario]\nname = x\n", "a.ini"))]) == 3
    assert main(["check", str(write(tmp_path, "[scenario]\nname = contact\n[contact]\nfoo = 1\n", "b.ini"))]) == 2
    assert main(["check", str(tmp_path / "missing.ini")]) == 4
    # a supersonic far field has no layer: rejected before any work
    bad = write(tmp_path, "[scenario]\nname = bl-solve\n[plus]\nu = 3\n", "c.ini")
    assert main(["run", str(bad), "--out", str(tmp_path / "o")]) == 3
    assert not (tmp_path / "o").exists()


def test_bl_classify_output(tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(CONFIGS / "bl_classify.ini"), "--out", str(out), "--threads", "3"]) == 0
    meta, header, rows = csvio.read_csv(out / "bl_classify.csv")
    assert header == ["mach", "u", "case", "detJ", "lambda1", "lambda2", "lambda_imag"]
    g = GasModel(gamma=1.4)
    for row in rows:
        M, u = float(row[0]), float(row[1])
        s = state_with_mach(1.0, 1.0, M, g, sign=1.0 if u > 0 else -1.0)
        assert row[2] == classify_bl_existence(s, g)
    assert (out / "run_manifest.txt").read_text().count("# default") > 0
    raw = (out / "bl_classify.csv").read_bytes()
    assert b"\r" not in raw


def test_simulate_zero_perturbation_within_budget(tmp_path):
    cfg = write(tmp_path, """[scenario]
name = simulate
[design]
u_star = 0.5
cd_ratio = 0.0
delta_B = 0.01
[grid]
xi_max = 30
n = 301
[solver]
end_time = 5
sample_times = 0, 1, 2, 3, 4, 5
[perturbation]
amplitude = 0.0
""")
    out = tmp_path / "sim"
    assert main(["run", str(cfg), "--out", str(out)]) == 0
    _, header, rows = csvio.read_csv(out / "norms.csv")
    h = 30 / 300
    sup = [float(r[header.index("sup")]) for r in rows]
    assert max(sup) <= 0.1 * h**2


def test_run_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(CONFIGS / "rarefaction.ini"), "--out", str(a)]) == 0
    assert main(["run", str(CONFIGS / "rarefaction.ini"), "--out", str(b), "--threads", "4"]) == 0
    files = sorted(p.name for p in a.iterdir())
    assert files == sorted(p.name for p in b.iterdir())
    for name in files:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_verify_all_without_stability(tmp_path, capsys):
    cfg = write(tmp_path, "[scenario]\nname = verify-all\n[verify]\nstability = false\n")
    out = tmp_path / "v"
    assert main(["run", str(cfg), "--out", str(out), "--threads", "2"]) == 0
    printed = capsys.readouterr().out
    assert printed.count("[PASS]") == 10 and "[FAIL]" not in printed
    _, header, rows = csvio.read_csv(out / "verify_summary.csv")
    assert header == ["criterion", "check", "passed", "quantity", "value"]
    assert {r[2] for r in rows} == {"true"}


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path, "[scenario]\nname = bl-classify\n")
    res = subprocess.run([sys.executable, "-m", "inflow_waves", "check", str(cfg)], capture_output=True, text=True)
    assert res.returncode == 0
    assert "ok" in res.stdout


def test_format_value_round_trip():
    for x in (0.1, 1 / 3, 1e-300, 123456789.125):
        assert float(csvio.format_value(x)) == x
    assert csvio.format_value(float("nan")) == "nan"
    assert csvio.format_value(True) == "true"
