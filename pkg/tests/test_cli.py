import json
import subprocess
import sys

import pytest

from leaderfield import cli
from leaderfield.config import ConfigError, from_dict
from leaderfield.spectral import SpectralCoefficients
from leaderfield.laws import ChaoticFamily, WrappedGaussianLaw


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def files(folder):
    return {p.name: p.read_bytes() for p in sorted(folder.iterdir()) if p.name != "timestamp.json"}


@pytest.mark.parametrize("cmd", ["stationary", "density", "constants", "check-order", "verify-bounds"])
def test_commands_succeed(tmp_path, cmd):
    out = tmp_path / "out"
    assert cli.run([cmd, "--K", "2", "--m2", "1", "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == cmd and all(manifest["checks"].values())
    assert "numpy" in manifest["versions"]
    for name in manifest["artifacts"]:
        assert (out / name).exists()


def test_compare_and_rerun_identical(tmp_path):
    cfg = write(tmp_path, {"seed": 7, "scaling": {"N": [16]}, "times": [0.5],
                           "mc": {"runs": 60}, "indices": [[1], [2]]})
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.run(["compare", "--config", cfg, "--out", str(a)]) == 0
    assert cli.run(["compare", "--config", cfg, "--out", str(b)]) == 0
    assert files(a) == files(b)
    c = tmp_path / "c"
    assert cli.run(["compare", "--config", cfg, "--out", str(c), "--seed", "8"]) == 0
    assert files(a)["manifest.json"] != files(c)["manifest.json"]


def test_invalid_config_exit_2(tmp_path, capsys):
    bad = write(tmp_path, {"seed": 1, "scaling": {"N": [1], "regime": "weird"}, "mystery": 3})
    assert cli.run(["stationary", "--config", bad, "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "scaling.N" in err and "scaling.regime" in err and "mystery" in err
    noseed = write(tmp_path, {"K": 2}, "noseed.json")
    assert cli.run(["stationary", "--config", noseed]) == 2
    (tmp_path / "broken.json").write_text("{")
    assert cli.run(["stationary", "--config", str(tmp_path / "broken.json")]) == 2
    assert cli.run(["stationary", "--config", str(tmp_path / "absent.json")]) == 2


def test_failed_check_exit_1(tmp_path):
    # a chaotic family is not partially ordered with the uniform profile
    fam = SpectralCoefficients.from_function(2, 3, ChaoticFamily(WrappedGaussianLaw(0.5)).coeff)
    path = tmp_path / "fam.json"
    path.write_text(json.dumps(fam.to_json()))
    cfg = write(tmp_path, {"seed": 0, "order": {"families": [str(path)], "profile": {"kind": "uniform"}}})
    out = tmp_path / "o"
    assert cli.run(["check-order", "--config", cfg, "--out", str(out)]) == 1
    assert json.loads((out / "manifest.json").read_text())["checks"] == {"partial_order": False}


def test_runtime_error_exit_1(tmp_path):
    cfg = write(tmp_path, {"seed": 0, "order": {"families": [str(tmp_path / "missing.json")]}})
    assert cli.run(["check-order", "--config", cfg, "--out", str(tmp_path / "o")]) == 1


def test_env_overrides(tmp_path, monkeypatch):
    monkeypatch.setenv("LEADERFIELD_OUT", str(tmp_path / "env"))
    assert cli.run(["constants", "--K", "1"]) == 0
    assert (tmp_path / "env" / "manifest.json").exists()


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "leaderfield", "stationary", "--K", "1",
                        "--out", str(tmp_path / "m")], capture_output=True)
    assert r.returncode == 0
    r = subprocess.run([sys.executable, "-m", "leaderfield", "nonsense"], capture_output=True)
    assert r.returncode == 2


def test_config_validation_messages():
    with pytest.raises(ConfigError) as e:
        from_dict({"seed": -1, "k": 9, "times": [], "mc": {"runs": 1}})
    msg = str(e.value)
    for key in ("seed", "k:", "times", "mc.runs"):
        assert key in msg
    with pytest.raises(ConfigError):
        from_dict({"seed": 0, "scaling": {"regime": "order"}})
    cfg = from_dict({"seed": 3, "scaling": {"N": [32, 64], "regime": "order", "eps": 0.05}})
    assert cfg.scaling.N == [32, 64] and cfg.mc.runs == 200
