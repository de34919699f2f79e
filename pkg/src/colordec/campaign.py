"""Desk-scale experiment orchestration shared by scripts and acceptance tests.

Artifacts (datasets, checkpoint, metrics) live under a run directory and
are reused when present, so the hours-long training happens once; every
consumer re-derives the claims it needs from the stored checkpoint.
"""

from __future__ import annotations

import json
import multiprocessing as mp
from pathlib import Path

import numpy as np

from .config import TrainConfig
from .dataset_io import read_dataset, write_dataset
from .evaluate import evaluate
from .fits import fit_fidelity, fit_powerlaw
from .generate import generate
from .layout import build_layout
from .net import load_checkpoint
from .records import Extractor
from .reference import build_reference_decoder
from .sim import NoiseParams, Runner, rng_for_sample
from .train import train

TEST_SEED_OFFSET = 7001
TEST_COUNT = 1200
TEST_T_MAX = 150


def desk_config(**overrides) -> TrainConfig:
    cfg = TrainConfig()  # defaults are the d=3 desk preset
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return cfg


def ensure_datasets(run_dir: Path, cfg: TrainConfig, workers: int = 2):
    run_dir.mkdir(parents=True, exist_ok=True)
    train_path = run_dir / "train.ccnn"
    val_path = run_dir / "val.ccnn"
    if not train_path.exists():
        ds = generate(cfg.distance, cfg.p_train, cfg.n_train, cfg.t_min, cfg.t_max,
                      "train", "RESET", seed=cfg.seed, workers=workers)
        write_dataset(train_path, ds.header, ds.records)
    if not val_path.exists():
        ds = generate(cfg.distance, cfg.p_validation, cfg.n_validation, 1, cfg.val_t_max,
                      "train", "RESET", seed=cfg.seed + 1, workers=workers,
                      lengths=cfg.validation_lengths())
        write_dataset(val_path, ds.header, ds.records)
    return train_path, val_path


def ensure_checkpoint(run_dir: Path, cfg: TrainConfig, workers: int = 2, log=print) -> Path:
    ckpt = run_dir / "checkpoint.npz"
    if ckpt.exists():
        return ckpt
    train_path, val_path = ensure_datasets(run_dir, cfg, workers=workers)
    result = train(cfg, read_dataset(train_path), read_dataset(val_path), ckpt, log=log)
    with open(run_dir / "history.json", "w") as fh:
        json.dump(result.history, fh, indent=1)
    return ckpt


def test_dataset(cfg: TrainConfig, p_error: float = 1e-3, workers: int = 2):
    """The held-out per-cycle test set; regenerated bit-identically on demand."""
    return generate(cfg.distance, p_error, TEST_COUNT, 1, TEST_T_MAX, "test", "RESET",
                    seed=cfg.seed + TEST_SEED_OFFSET, workers=workers)


def evaluate_campaign(run_dir: Path, cfg: TrainConfig | None = None,
                      workers: int = 2) -> dict:
    """Re-derive the headline number: test eps_L per step at p = 1e-3."""
    cfg = cfg or desk_config()
    params, _, meta = load_checkpoint(run_dir / "checkpoint.npz")
    dataset = test_dataset(cfg, workers=workers)
    series, _ = evaluate(params, dataset)
    fit = fit_fidelity(series, fix_t0=False, bootstrap=100,
                       rng=np.random.default_rng(0))
    return {
        "checkpoint_epoch": meta.get("epoch"),
        "val_epsilon_per_step": meta.get("val_epsilon_per_step"),
        "test_p": 1e-3,
        "test_epsilon_per_step": fit.epsilon_per_step,
        "test_epsilon_ci": fit.epsilon_ci,
    }


# -- reference-decoder Monte Carlo -------------------------------------------

_MC = {}


def _mc_init(distance: int):
    layout = build_layout(distance)
    runner = Runner(layout, "RESET")
    extractor = Extractor(layout, "RESET")
    _MC["runner"] = runner
    _MC["extractor"] = extractor
    _MC["decoder"] = build_reference_decoder(layout, runner, extractor)


def _mc_chunk(args):
    p, T, seed, lo, hi = args
    runner = _MC["runner"]
    extractor = _MC["extractor"]
    decoder = _MC["decoder"]
    noise = NoiseParams(p)
    fails = 0
    for k in range(lo, hi):
        raw = runner.run(T, noise, rng=rng_for_sample(seed, k))
        rec = extractor.extract(raw)
        fails += decoder.decode(rec) != rec.p_true
    return fails


def reference_decoder_scaling(ps=(1e-4, 2e-4, 4e-4), samples: int = 100_000,
                              T: int = 4, seed: int = 515, workers: int = 2,
                              log=print) -> dict:
    """Monte Carlo failure rates of the d=3 lookup decoder plus the free
    log-log slope across the given physical rates."""
    results = []
    if workers <= 1:
        _mc_init(3)
        for i, p in enumerate(ps):
            fails = _mc_chunk((p, T, seed + i, 0, samples))
            results.append((p, fails / samples))
            log(f"p={p:g}: {fails}/{samples}")
    else:
        ctx = mp.get_context("fork")
        with ctx.Pool(workers, initializer=_mc_init, initargs=(3,)) as pool:
            for i, p in enumerate(ps):
                bounds = np.linspace(0, samples, workers + 1, dtype=int)
                jobs = [(p, T, seed + i, int(lo), int(hi))
                        for lo, hi in zip(bounds[:-1], bounds[1:])]
                fails = sum(pool.map(_mc_chunk, jobs))
                results.append((p, fails / samples))
                log(f"p={p:g}: {fails}/{samples}")
    usable = [(p, pf) for p, pf in results if pf > 0]
    _, slope = fit_powerlaw(usable, 3, fix_exponent=False)
    return {"points": results, "slope": slope, "T": T, "samples": samples}
