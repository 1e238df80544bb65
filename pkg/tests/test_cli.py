import csv
import json
import os

import pytest
from hypothesis import given, strategies as st

from mixedkan.cli import run
from mixedkan.config import RunConfig, build_params, parse_config
from mixedkan.errors import ConfigurationError
from mixedkan.presets import desk_preset

FAST = ["--cone-samples", "2000"]


# -- config ---------------------------------------------------------------------

@given(st.sampled_from(["desk", "paper"]), st.integers(0, 10**6), st.integers(1, 10**6),
       st.lists(st.integers(1, 10**5), min_size=1, max_size=5))
def test_config_round_trip(preset, seed, samples, horizons):
    cfg = RunConfig(preset=preset, params={"beta": 0.005},
                    experiment={"seed": seed, "samples": samples, "horizons": horizons})
    back = parse_config(cfg.dump())
    assert back == cfg


def test_config_reports_line_and_column():
    with pytest.raises(ConfigurationError, match=r"line \d+, column \d+"):
        parse_config("preset: desk\nparams: {delta: [1, 2\n")


@pytest.mark.parametrize("text", [
    "preset: desk\nbogus: 1\n",
    "params:\n  gamma: 2\n",
    "experiment:\n  samples: many\n",
    "schema_version: 2\n",
    "preset: table\n",
    "- a\n- b\n",
])
def test_config_rejections(text):
    with pytest.raises(ConfigurationError):
        parse_config(text)


def test_build_params_rederives_geometry():
    base = desk_preset()
    same = build_params(parse_config("preset: desk\n"))
    assert same.fingerprint() == base.fingerprint()
    moved = build_params(parse_config("preset: desk\nparams:\n  eps: 0.12\n"))
    assert moved.eps == 0.12 and moved.r is not None
    assert moved.cert_hash is None


# -- command line ------------------------------------------------------------------

def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_certify_ok(tmp_path, capsys):
    out = tmp_path / "cert"
    assert run(["certify", "--preset", "desk", "--out", str(out)] + FAST) == 0
    cert = json.loads((out / "certificate.json").read_text())
    assert cert["passed"] and cert["engineering_grade"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["cert_hash"] == cert["hash"]
    assert "certificate" in capsys.readouterr().out


def test_certify_failure_exit_1(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("preset: desk\nparams:\n  beta: 0.4\n")
    assert run(["certify", "--config", str(cfg), "--out", str(tmp_path / "o")] + FAST) == 1
    assert "beta-window" in capsys.readouterr().err


def test_malformed_config_exit_2(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("preset: desk\nparams: [\n")
    assert run(["certify", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "line" in capsys.readouterr().err


def test_usage_error_exit_2(tmp_path):
    assert run(["lyapunov", "--section", "7"]) == 2
    assert run(["nonsense"]) == 2
    assert run(["basins", "--horizons", "a,b"]) == 2


def test_fixed_points_outputs_carry_hash(tmp_path):
    out = tmp_path / "fp"
    assert run(["fixed-points", "--preset", "desk", "--out", str(out)] + FAST) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    h = manifest["cert_hash"]
    assert h and manifest["tool_version"] and "precision_loss_digits_per_step" in manifest
    for name in manifest["outputs"]:
        path = out / name
        assert path.exists()
        if name.endswith(".json"):
            assert json.loads(path.read_text())["cert_hash"] == h
        elif name.endswith(".csv"):
            rows = _read_csv(path)
            assert rows[0][-1] == "cert_hash" and all(r[-1] == h for r in rows[1:])
            assert path.read_bytes().count(b"\r\n") == len(rows)


def test_basins_writes_plots(tmp_path):
    out = tmp_path / "b"
    code = run(["basins", "--preset", "desk", "--out", str(out), "--samples", "300",
                "--horizons", "10,50"] + FAST)
    assert code in (0, 1)
    names = set(os.listdir(out))
    assert {"basins.json", "basins.csv", "basins.png", "basins.gp", "manifest.json"} <= names
    dat = (out / "basins_section0.dat").read_text()
    assert "cert_hash" in dat


def test_heteroclinic_cli(tmp_path):
    assert run(["heteroclinic", "--preset", "desk", "--out", str(tmp_path / "h")] + FAST) == 0


def test_orbit_cli(tmp_path):
    out = tmp_path / "o"
    assert run(["orbit", "--preset", "desk", "--out", str(out), "--steps", "20",
                "--start", "0.1", "0.2", "0", "0.3", "0.4"] + FAST) == 0
    rows = _read_csv(out / "orbit.csv")
    assert len(rows) == 22 and all(float(r[3]) == 0.0 for r in rows[1:])
