import copy
import json
import os

import pytest

from haarlab.cli import main
from haarlab.runner import ConfigError, validate_config

BASE_CONFIG = {
    "lattice": {"dim": 1, "top_level": 0, "leaf_level": -3},
    "mu": {"type": "lognormal", "seed": 11},
    "nu": {"type": "zero_blocks", "fraction": 0.25, "seed": 12},
    "operator": {"type": "random_band", "r": 1, "seed": 13, "amplitude": 1.0,
                 "root_amplitude": 0.5},
    "r": 1,
    "seed": 0,
}


def write_config(tmp_path, config, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config))
    return str(path)


def read_report(out_dir):
    with open(os.path.join(out_dir, "report.json")) as fh:
        return json.load(fh)


def run_cli(tmp_path, config, suite, extra=(), out_name="out"):
    out = str(tmp_path / out_name)
    code = main(["--config", write_config(tmp_path, config),
                 "--suite", suite, "--out", out, *extra])
    return code, out


def test_verify_suite_passes(tmp_path, capsys):
    code, out = run_cli(tmp_path, BASE_CONFIG, "verify")
    assert code == 0
    report = read_report(out)
    assert report["passed"]
    assert all(c["passed"] for c in report["checks"])
    printed = capsys.readouterr().out
    assert "[pass] parseval" in printed
    assert "suite verify: pass" in printed


def test_testing_suite_writes_table(tmp_path):
    code, out = run_cli(tmp_path, BASE_CONFIG, "testing")
    assert code == 0
    with open(os.path.join(out, "testing_constants.csv")) as fh:
        header = fh.readline().strip().split(",")
    assert header[:3] == ["N", "r", "depth"]
    assert "rho" in header


def test_carleson_suite_writes_sequence(tmp_path):
    code, out = run_cli(tmp_path, BASE_CONFIG, "carleson")
    assert code == 0
    assert os.path.exists(os.path.join(out, "carleson_sequence.csv"))
    report = read_report(out)
    consts = report["constants"]
    assert consts["embedding_constant"] <= 4.0 * consts["carleson_constant"] + 1e-9


def test_decompose_suite_passes(tmp_path):
    code, _ = run_cli(tmp_path, BASE_CONFIG, "decompose")
    assert code == 0


def test_reports_deterministic_modulo_timestamp(tmp_path):
    config = dict(BASE_CONFIG, search={"iterations": 25})
    code_a, out_a = run_cli(tmp_path, config, "search", out_name="a")
    code_b, out_b = run_cli(tmp_path, config, "search", out_name="b")
    assert code_a == code_b == 0
    rep_a, rep_b = read_report(out_a), read_report(out_b)
    rep_a.pop("timestamp"), rep_b.pop("timestamp")
    assert rep_a == rep_b
    with open(os.path.join(out_a, "artifact.json")) as fa, \
            open(os.path.join(out_b, "artifact.json")) as fb:
        assert fa.read() == fb.read()


def test_seed_flag_changes_results(tmp_path):
    config = dict(BASE_CONFIG, search={"iterations": 25})
    _, out_a = run_cli(tmp_path, config, "search", out_name="a")
    _, out_b = run_cli(tmp_path, config, "search", extra=["--seed", "99"],
                       out_name="b")
    assert read_report(out_a)["constants"] != read_report(out_b)["constants"]


def test_replay_roundtrip_and_tamper_detection(tmp_path):
    config = dict(BASE_CONFIG, search={"iterations": 25})
    _, out = run_cli(tmp_path, config, "search")
    artifact_path = os.path.join(out, "artifact.json")
    assert main(["--replay", artifact_path,
                 "--out", str(tmp_path / "replay")]) == 0
    with open(artifact_path) as fh:
        artifact = json.load(fh)
    artifact["mu"][0] *= 2.0
    tampered = tmp_path / "tampered.json"
    tampered.write_text(json.dumps(artifact))
    assert main(["--replay", str(tampered),
                 "--out", str(tmp_path / "replay2")]) == 1


def test_invalid_configs_exit_2(tmp_path):
    bad_levels = copy.deepcopy(BASE_CONFIG)
    bad_levels["lattice"]["leaf_level"] = 0
    assert main(["--config", write_config(tmp_path, bad_levels, "bad1.json"),
                 "--out", str(tmp_path / "o1")]) == 2

    missing = {k: v for k, v in BASE_CONFIG.items() if k != "operator"}
    assert main(["--config", write_config(tmp_path, missing, "bad2.json"),
                 "--out", str(tmp_path / "o2")]) == 2

    assert main(["--config", str(tmp_path / "nope.json")]) == 2
    assert main(["--out", str(tmp_path / "o3")]) == 2


def test_bad_tolerance_override_exits_2(tmp_path):
    cfg = write_config(tmp_path, BASE_CONFIG)
    assert main(["--config", cfg, "--tolerance-override", "zero"]) == 2
    assert main(["--config", cfg, "--tolerance-override", "zero=abc"]) == 2


def test_tolerance_override_can_force_failure(tmp_path):
    code, out = run_cli(tmp_path, BASE_CONFIG, "verify",
                        extra=["--tolerance-override", "zero=1e-30"])
    assert code == 1
    assert not read_report(out)["passed"]


def test_validate_config_messages():
    with pytest.raises(ConfigError):
        validate_config({"lattice": {"dim": 1, "top_level": 0,
                                     "leaf_level": -1}})
    with pytest.raises(ConfigError):
        validate_config(dict(BASE_CONFIG, r=-1))


def test_unknown_suite_rejected(tmp_path):
    config = dict(BASE_CONFIG, suite="verify")
    cfg = write_config(tmp_path, config)
    code = main(["--config", cfg, "--suite", "verify",
                 "--out", str(tmp_path / "ok")])
    assert code == 0
    with pytest.raises(SystemExit):
        main(["--config", cfg, "--suite", "bogus"])
