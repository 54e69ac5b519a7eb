import csv
import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pudtai.cli import main
from pudtai.config import DEFAULT_PARAMS, MODES, ConfigError, RunConfig, parse_value, set_path
from pudtai.estimate import improvement_ratio
from pudtai.model import DeviceCalibration


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def test_round_trip_identity():
    cfg = RunConfig.from_dict({"mode": "bootstrap", "seed": 5, "params": {"estimate": {"n_boot": 10}}})
    again = RunConfig.from_json(cfg.to_json())
    assert again == cfg
    assert RunConfig.from_json(again.to_json()).to_json() == cfg.to_json()


@settings(max_examples=30, deadline=None)
@given(
    st.sampled_from(MODES),
    st.integers(0, 2**64 - 1),
    st.floats(0, 3),
    st.lists(st.floats(0.01, 3), min_size=1, max_size=5),
)
def test_round_trip_property(mode, seed, eps, eps_list):
    data = {"mode": mode, "seed": seed, "params": {"signal": {"epsilon": eps}, "sweep": {"epsilons": eps_list}}}
    cfg = RunConfig.from_dict(data)
    assert RunConfig.from_json(cfg.to_json()) == cfg


def test_config_rejections():
    with pytest.raises(ConfigError) as err:
        RunConfig.from_dict({"mode": "bogus"})
    assert err.value.path == "mode"
    with pytest.raises(ConfigError) as err:
        RunConfig.from_dict({"mode": "fisher", "params": {"calibration": {"v_mnius": 0.9}}})
    assert "v_mnius" in err.value.path
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"mode": "fisher", "seed": -1})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"mode": "fisher", "seed": 2**64})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"mode": "fisher", "params": {"grid": {"n": "many"}}})


def test_override_helpers():
    assert parse_value("0.5") == 0.5
    assert parse_value("[1, 2]") == [1, 2]
    assert parse_value("abc") == "abc"
    tree = {}
    set_path(tree, "a.b.c", 3)
    assert tree == {"a": {"b": {"c": 3}}}


def test_compare_mode(tmp_path):
    code, out = _run(tmp_path, "--mode", "compare", "--sweep.epsilons=[0.01, 0.1, 1.0]")
    assert code == 0
    rows = _read(out / "compare.csv")
    assert list(rows[0]) == ["epsilon", "F_Q", "F_SLIVER", "F_DI", "F_PuDTAI", "F_QMTI"]
    assert all(float(r["F_Q"]) == 0.25 for r in rows)
    s = _read(out / "s_factor.csv")[0]
    assert float(s["s"]) == pytest.approx(20.0, abs=0.5)
    curves = _read(out / "s_curves.csv")
    assert {r["instrument"] for r in curves} == {"QMTI", "FT", "PuDTAI"}
    assert sum(r["instrument"] == "QMTI" for r in curves) == DEFAULT_PARAMS["s_curve_points"]


def test_manifest_describes_outputs(tmp_path):
    code, out = _run(tmp_path, "--mode", "probabilities", "--seed", "17")
    assert code == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["library"] == "pudtai" and man["mode"] == "probabilities" and man["seed"] == 17
    digest = hashlib.sha256((out / "probabilities.csv").read_bytes()).hexdigest()
    assert man["files"] == {"probabilities.csv": digest}
    # the manifest alone reproduces the run
    cfg = RunConfig.from_dict(man["config"])
    cfg_path = tmp_path / "again.json"
    cfg_path.write_text(cfg.to_json())
    code, again = _run(tmp_path, "--config", str(cfg_path), name="again")
    assert code == 0
    assert (again / "probabilities.csv").read_bytes() == (out / "probabilities.csv").read_bytes()


def test_bootstrap_byte_identical(tmp_path):
    args = ["--mode", "bootstrap", "--seed", "99", "--estimate.n_boot=20", "--estimate.photons_per_set=5000",
            "--sweep.epsilons=[0.3, 0.5]"]
    code1, a = _run(tmp_path, *args, name="a")
    code2, b = _run(tmp_path, *args, name="b")
    assert code1 == code2 == 0
    assert (a / "bootstrap.csv").read_bytes() == (b / "bootstrap.csv").read_bytes()
    code3, c = _run(tmp_path, *args[:3], "100", *args[4:], name="c")
    assert (a / "bootstrap.csv").read_bytes() != (c / "bootstrap.csv").read_bytes()


def test_twelve_significant_digits(tmp_path):
    code, out = _run(tmp_path, "--mode", "probabilities", "--sweep.epsilons=[0.3]")
    row = _read(out / "probabilities.csv")[0]
    digits = row["p_plus"].replace(".", "").replace("-", "").split("e")[0].lstrip("0")
    assert len(digits) <= 12


def test_sweep_matches_improvement_ratio(tmp_path):
    eps = [0.08, 0.1, 0.2, 0.4, 1.0, 2.0]
    code, out = _run(tmp_path, "--mode", "sweep", f"--sweep.epsilons={eps}")
    assert code == 0
    ratio = np.array([float(r["improvement_ratio"]) for r in _read(out / "sweep.csv")])
    ref = np.array([improvement_ratio(e, DeviceCalibration.measured()) for e in eps])
    np.testing.assert_allclose(ratio, ref, rtol=1e-10)
    assert np.argmax(ratio) == 0
    assert ratio[0] == pytest.approx(20, rel=0.15)


def test_estimate_and_fisher_modes(tmp_path):
    code, out = _run(tmp_path, "--mode", "estimate", "--seed", "3", "--sweep.epsilons=[0.5]")
    assert code == 0
    row = _read(out / "estimate.csv")[0]
    assert float(row["eps_hat"]) == pytest.approx(0.5, abs=0.05)
    code, out = _run(tmp_path, "--mode", "fisher", "--sweep.epsilons=[0.1]", name="f")
    assert code == 0
    row = _read(out / "fisher.csv")[0]
    assert float(row["F_PuDTAI"]) == pytest.approx(float(row["F_minus"]) + float(row["F_plus"]), rel=1e-10)


def test_synthesize_mode(tmp_path):
    code, out = _run(tmp_path, "--mode", "synthesize", "--grid.n=256", "--processor.n_phases=8")
    assert code == 0
    rows = _read(out / "synthesize.csv")
    assert len(rows) == 256
    t = np.array([float(r["t"]) for r in rows])
    avg = np.array([float(r["intensity_phase_avg"]) for r in rows])
    np.testing.assert_allclose(avg, np.sqrt(2 / np.pi) * np.exp(-2 * t**2), atol=1e-10)


def test_pipeline_mode_with_stages(tmp_path):
    code, out = _run(
        tmp_path, "--mode", "pipeline", "--verbose-stages", "--grid.n=512", "--processor.n_phases=2",
        "--sweep.epsilons=[0.5]",
    )
    assert code == 0
    row = _read(out / "pipeline.csv")[0]
    assert float(row["p_minus_sim"]) == pytest.approx(float(row["p_minus_model"]), abs=1e-2)
    stages = sorted(p.name for p in out.glob("stage_*.csv"))
    assert stages[0] == "stage_00_input.csv" and stages[-1] == "stage_06_port_plus.csv"
    man = json.loads((out / "manifest.json").read_text())
    assert set(man["files"]) == {"pipeline.csv", *stages}


def test_invalid_config_exit_code(tmp_path, capsys):
    code, _ = _run(tmp_path, "--mode", "bogus")
    assert code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["path"] == "mode"
    code, _ = _run(tmp_path, "--mode", "fisher", "--calibration.v_minus=1.5")
    assert code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["type"] == "ConfigError"
    assert "v_minus" in err["error"]["path"]
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _ = _run(tmp_path, "--config", str(bad))
    assert code == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "pudtai", "--mode", "nonsense", "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 2
    assert json.loads(proc.stderr)["error"]["type"] == "ConfigError"


def test_thread_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("PUDTAI_NUM_THREADS", "2")
    args = ["--mode", "bootstrap", "--seed", "1", "--estimate.n_boot=8", "--estimate.photons_per_set=2000",
            "--sweep.epsilons=[0.5]"]
    _, a = _run(tmp_path, *args, name="a")
    monkeypatch.setenv("PUDTAI_NUM_THREADS", "1")
    _, b = _run(tmp_path, *args, name="b")
    assert (a / "bootstrap.csv").read_bytes() == (b / "bootstrap.csv").read_bytes()
    monkeypatch.setenv("PUDTAI_NUM_THREADS", "zero")
    code, _ = _run(tmp_path, *args, name="c")
    assert code == 2
