"""End-to-end CLI tests over a miniature pipeline."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from usdrl.cli import main
from usdrl.config import ExperimentConfig, ModelConfig, TrainConfig


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Tiny synth dataset + config + pretrain checkpoint shared by CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    data = root / "data"
    assert main(["synth", "--classes", "2", "--per-class", "6",
                 "--test-per-class", "4", "--frames", "16", "--joints", "4",
                 "--out", str(data), "--seed", "0", "--detection",
                 "--clips", "8"]) == 0
    cfg = ExperimentConfig(
        model=ModelConfig(c_e=8, c_r=8, c_p=4, num_layers=1, num_heads=2),
        train=TrainConfig(epochs=2, batch_size=4, schedule="none"),
    )
    cfg_path = root / "cfg.json"
    cfg.save(cfg_path)
    run = root / "run"
    assert main(["pretrain", "--config", str(cfg_path), "--data", str(data),
                 "--out", str(run)]) == 0
    return {"root": root, "data": data, "cfg": cfg_path,
            "ckpt": run / "checkpoint.bin", "run": run}


def test_synth_writes_splits_and_meta(workspace):
    data = workspace["data"]
    assert len(list((data / "train").glob("*.skl"))) == 12
    assert len(list((data / "test").glob("*.skl"))) == 8
    assert (data / "clips_train").exists()
    meta = json.loads((data / "meta.json").read_text())
    assert meta["classes"] == 2


def test_pretrain_outputs(workspace):
    run = workspace["run"]
    assert workspace["ckpt"].exists()
    assert (run / "metrics.log").stat().st_size > 0
    resolved = json.loads((run / "resolved_config.json").read_text())
    assert resolved["command"] == "pretrain"
    assert resolved["config"]["model"]["c_e"] == 8


def test_probe_and_determinism(workspace, tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    for out in (out_a, out_b):
        code = main(["probe", "--ckpt", str(workspace["ckpt"]), "--data",
                     str(workspace["data"]), "--out", str(out),
                     "--epochs", "20"])
        assert code == 0
    report_a = json.loads((out_a / "report.json").read_text())
    report_b = json.loads((out_b / "report.json").read_text())
    assert report_a["metrics"] == report_b["metrics"]
    assert report_a["checkpoint_digest"]


def test_retrieve(workspace, tmp_path):
    out = tmp_path / "ret"
    assert main(["retrieve", "--ckpt", str(workspace["ckpt"]), "--data",
                 str(workspace["data"]), "--out", str(out), "--k", "3"]) == 0
    report = json.loads((out / "report.json").read_text())
    assert "top1" in report["metrics"]


def test_finetune(workspace, tmp_path):
    out = tmp_path / "ft"
    assert main(["finetune", "--ckpt", str(workspace["ckpt"]), "--data",
                 str(workspace["data"]), "--out", str(out), "--fraction",
                 "0.5", "--epochs", "1"]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["task"] == "semi_supervised"
    assert report["details"]["subset_ids"]


def test_detect(workspace, tmp_path):
    out = tmp_path / "det"
    assert main(["detect", "--ckpt", str(workspace["ckpt"]), "--data",
                 str(workspace["data"]), "--out", str(out),
                 "--epochs", "2"]) == 0
    report = json.loads((out / "report.json").read_text())
    assert "mAP_a" in report["metrics"]
    assert (out / "predictions.txt").exists()


def test_gradcheck_cli(tmp_path):
    out = tmp_path / "gc"
    code = main(["gradcheck", "--components", "dsa_hidden,dense_shift",
                 "--tol", "1e-4", "--out", str(out)])
    assert code == 0
    assert (out / "gradcheck.txt").read_text().count("passed=True") == 2


def test_plot(workspace, tmp_path):
    out = tmp_path / "plots"
    assert main(["plot", "--metrics", str(workspace["run"] / "metrics.log"),
                 "--ckpt", str(workspace["ckpt"]), "--data",
                 str(workspace["data"]), "--out", str(out)]) == 0
    assert (out / "loss_curves.png").exists()
    assert (out / "correlation_matrix.png").exists()


def test_override_sweep_endpoint(workspace, tmp_path):
    out = tmp_path / "alpha1"
    assert main(["pretrain", "--config", str(workspace["cfg"]), "--data",
                 str(workspace["data"]), "--out", str(out),
                 "model.alpha=1.0", "train.epochs=1"]) == 0
    resolved = json.loads((out / "resolved_config.json").read_text())
    assert resolved["config"]["model"]["alpha"] == 1.0
    assert resolved["config"]["model"]["beta"] == 0.0


def test_unknown_override_fails_cleanly(workspace, tmp_path, capsys):
    code = main(["pretrain", "--config", str(workspace["cfg"]), "--data",
                 str(workspace["data"]), "--out", str(tmp_path / "x"),
                 "loss.zeta=1"])
    assert code == 1
    assert "unknown key" in capsys.readouterr().err


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as excinfo:
        main(["transmogrify"])
    assert excinfo.value.code == 2


def test_missing_data_dir_message(workspace, tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("USDRL_DATA_DIR", raising=False)
    code = main(["probe", "--ckpt", str(workspace["ckpt"]), "--out",
                 str(tmp_path / "p")])
    assert code == 1
    assert "USDRL_DATA_DIR" in capsys.readouterr().err


def test_env_data_dir_used(workspace, tmp_path, monkeypatch):
    monkeypatch.setenv("USDRL_DATA_DIR", str(workspace["data"]))
    out = tmp_path / "envp"
    assert main(["retrieve", "--ckpt", str(workspace["ckpt"]), "--out",
                 str(out)]) == 0


def test_module_entry_point(workspace):
    proc = subprocess.run(
        [sys.executable, "-m", "usdrl", "gradcheck", "--components",
         "dense_shift"], capture_output=True, text=True, cwd=workspace["root"])
    assert proc.returncode == 0
    assert "passed=True" in proc.stdout


def test_inputs_not_mutated(workspace):
    data = workspace["data"]
    before = {p.name: p.read_bytes() for p in (data / "train").glob("*.skl")}
    main(["retrieve", "--ckpt", str(workspace["ckpt"]), "--data", str(data),
          "--out", str(workspace["root"] / "tmp_ret")])
    after = {p.name: p.read_bytes() for p in (data / "train").glob("*.skl")}
    assert before == after
