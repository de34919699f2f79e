import json

import numpy as np
import pytest

from colordec.cli import main
from colordec.config import TrainConfig
from colordec.dataset_io import read_dataset
from colordec.net import init_params, save_checkpoint


@pytest.fixture(scope="module")
def tiny_checkpoint(tmp_path_factory):
    path = tmp_path_factory.mktemp("ckpt") / "net.npz"
    params = init_params(12, 8, 3, np.random.default_rng(1))
    params.head_lower.bo[:] = -5.0
    save_checkpoint(path, params, meta={"origin": "cli-test"})
    return path


def test_generate_command(tmp_path, capsys):
    out = tmp_path / "ds.ccnn"
    rc = main(["generate", "--distance", "3", "--p-error", "1e-3", "--count", "25",
               "--t-max", "8", "--mode", "train", "--seed", "4", "--out", str(out)])
    assert rc == 0
    ds = read_dataset(out)
    assert len(ds) == 25
    assert "wrote 25 records" in capsys.readouterr().out


def test_generate_matches_library_bytes(tmp_path):
    from colordec.dataset_io import write_dataset
    from colordec.generate import generate

    out = tmp_path / "cli.ccnn"
    main(["generate", "--distance", "3", "--p-error", "2e-3", "--count", "12",
          "--t-max", "6", "--seed", "11", "--out", str(out)])
    lib = tmp_path / "lib.ccnn"
    ds = generate(3, 2e-3, 12, 1, 6, "train", "RESET", seed=11)
    write_dataset(lib, ds.header, ds.records)
    assert out.read_bytes() == lib.read_bytes()


def test_evaluate_and_fit_commands(tmp_path, tiny_checkpoint):
    data = tmp_path / "test.ccnn"
    assert main(["generate", "--distance", "3", "--p-error", "3e-3", "--count", "50",
                 "--t-max", "20", "--mode", "test", "--seed", "6", "--out", str(data)]) == 0
    csv_out = tmp_path / "curve.csv"
    assert main(["evaluate", "--checkpoint", str(tiny_checkpoint), "--data", str(data),
                 "--out-csv", str(csv_out)]) == 0
    lines = csv_out.read_text().strip().splitlines()
    assert lines[0] == "t,F,err"
    assert len(lines) > 3
    assert csv_out.with_suffix(".png").exists()  # figure alongside the CSV

    fit_out = tmp_path / "fit.json"
    rc = main(["fit", "--in-csv", str(csv_out), "--fix-t0", "--bootstrap", "20",
               "--out", str(fit_out)])
    assert rc == 0
    doc = json.loads(fit_out.read_text())
    assert 0.0 <= doc["epsilon_per_step"] <= 0.5
    assert fit_out.with_suffix(".png").exists()


def test_evaluate_no_plot_flag(tmp_path, tiny_checkpoint):
    data = tmp_path / "t.ccnn"
    main(["generate", "--distance", "3", "--p-error", "3e-3", "--count", "20",
          "--t-max", "10", "--mode", "test", "--seed", "8", "--out", str(data)])
    csv_out = tmp_path / "c.csv"
    assert main(["evaluate", "--checkpoint", str(tiny_checkpoint), "--data", str(data),
                 "--out-csv", str(csv_out), "--no-plot"]) == 0
    assert not csv_out.with_suffix(".png").exists()


def test_train_command(tmp_path, capsys):
    cfg = TrainConfig(distance=3, n_hidden=8, p_train=2e-3, n_train=200, t_min=1,
                      t_max=5, batch_size=8, batches_per_epoch=10, max_epochs=1,
                      p_validation=2e-3, n_validation=60, val_t_max=8,
                      val_n_lengths=3, seed=5)
    cfg_path = tmp_path / "cfg.toml"
    cfg_path.write_text(cfg.to_toml())
    train_path = tmp_path / "train.ccnn"
    val_path = tmp_path / "val.ccnn"
    main(["generate", "--distance", "3", "--p-error", "2e-3", "--count", "200",
          "--t-max", "5", "--seed", "5", "--out", str(train_path)])
    main(["generate", "--distance", "3", "--p-error", "2e-3", "--count", "60",
          "--t-max", "8", "--seed", "6", "--out", str(val_path)])
    ckpt = tmp_path / "out.npz"
    rc = main(["train", "--config", str(cfg_path), "--data", str(train_path),
               "--val", str(val_path), "--out-checkpoint", str(ckpt)])
    assert rc == 0
    assert ckpt.exists()
    assert ckpt.with_suffix(".history.json").exists()


def test_sweep_command(tmp_path, tiny_checkpoint):
    out_dir = tmp_path / "sweep"
    rc = main(["sweep", "--checkpoint", str(tiny_checkpoint), "--distance", "3",
               "--p-grid", "3e-3,5e-3", "--count", "40", "--t-max", "15",
               "--seed", "3", "--bootstrap", "10", "--out-dir", str(out_dir)])
    assert rc == 0
    assert (out_dir / "scaling.csv").exists()
    assert (out_dir / "decay_p0.003.csv").exists()
    assert (out_dir / "decay_p0.005.csv").exists()
    scaling = (out_dir / "scaling.csv").read_text().strip().splitlines()
    assert scaling[0] == "p_phys,eps_L,ci_lo,ci_hi"
    assert len(scaling) == 3
    assert (out_dir / "scaling.png").exists() and (out_dir / "decay.png").exists()
    assert (out_dir / "scaling_fit.json").exists()


def test_error_is_machine_readable(tmp_path, capsys):
    rc = main(["generate", "--distance", "4", "--p-error", "1e-3", "--count", "1",
               "--t-max", "5", "--out", str(tmp_path / "x.ccnn")])
    assert rc == 1
    err = capsys.readouterr().err.strip().splitlines()[-1]
    doc = json.loads(err)
    assert doc["error"] == "ValueError"
    assert "odd" in doc["message"]


def test_fit_command_rejects_flat_data(tmp_path, capsys):
    csv_path = tmp_path / "flat.csv"
    csv_path.write_text("t,F,err\n" + "".join(f"{t},0.5,0.01\n" for t in range(1, 9)))
    rc = main(["fit", "--in-csv", str(csv_path), "--out", str(tmp_path / "f.json")])
    assert rc == 1
    doc = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert doc["error"] == "ValueError"
