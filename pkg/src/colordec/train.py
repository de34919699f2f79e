"""Training loop with validation-based model selection.

Mini-batches hold sequences of one length (buckets are dense because
training lengths are uniform on a small range).  After every epoch the
lower head is scored on the validation set, the logical error rate is
extracted with the offset pinned to zero, and the checkpoint is kept
whenever that rate reaches a new minimum.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .config import TrainConfig
from .dataset_io import Dataset
from .fits import FidelitySeries, fit_fidelity
from .net import (LstmDecoderParams, decoder_forward, init_params,
                  loss_and_gradients, save_checkpoint)
from .optim import adam_step, init_adam


class TrainingDiverged(RuntimeError):
    pass


def batch_arrays(records) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stack equal-length records into (delta, delta_f, p_true) arrays."""
    T = records[0].T
    if any(r.T != T for r in records):
        raise ValueError("mini-batch mixes sequence lengths")
    delta = np.stack([np.concatenate([r.delta_s, r.s_flag], axis=1) for r in records])
    delta = np.ascontiguousarray(delta.transpose(1, 0, 2)).astype(np.float64)
    delta_f = np.stack([r.delta_f for r in records]).astype(np.float64)
    p_true = np.array([r.p_true for r in records], dtype=np.float64)
    return delta, delta_f, p_true


def validation_error_rate(params: LstmDecoderParams, val_dataset: Dataset,
                          chunk: int = 256) -> tuple[float, FidelitySeries]:
    """Lower-head logical error rate per step with t0 fixed to zero."""
    groups: dict[int, list] = {}
    for rec in val_dataset.records:
        groups.setdefault(rec.T, []).append(rec)
    ts, fs, ns = [], [], []
    for T in sorted(groups):
        recs = groups[T]
        correct = 0
        for lo in range(0, len(recs), chunk):
            part = recs[lo:lo + chunk]
            delta, delta_f, p_true = batch_arrays(part)
            _, p_low, _ = decoder_forward(params, delta, delta_f)
            pred = (p_low >= 0.5).astype(np.float64)
            correct += int((pred == p_true).sum())
        ts.append(T)
        fs.append(correct / len(recs))
        ns.append(len(recs))
    series = FidelitySeries(np.array(ts), np.array(fs), np.array(ns), np.zeros(len(ts)))
    try:
        fit = fit_fidelity(series, fix_t0=True, bootstrap=0)
    except ValueError:
        # fidelity stuck at 1/2: the network carries no signal yet
        return 0.5, series
    return fit.epsilon_per_step, series


@dataclass
class TrainResult:
    best_epoch: int
    best_val_epsilon: float
    history: list = field(default_factory=list)


def train(config: TrainConfig, train_dataset: Dataset, val_dataset: Dataset,
          out_checkpoint, log=print) -> TrainResult:
    m = train_dataset.header.n_tiles
    d_in = 4 * m
    rng_init = np.random.default_rng(config.seed)
    params = init_params(d_in, config.n_hidden, m, rng_init)
    adam = init_adam(params.tree(), lr=config.learning_rate)
    batch_rng = np.random.default_rng(config.seed + 1)
    drop_rng = np.random.default_rng(config.seed + 2)

    buckets: dict[int, list[int]] = {}
    for i, rec in enumerate(train_dataset.records):
        buckets.setdefault(rec.T, []).append(i)
    lengths = sorted(buckets)
    weights = np.array([len(buckets[T]) for T in lengths], dtype=np.float64)
    weights /= weights.sum()

    best = TrainResult(best_epoch=-1, best_val_epsilon=np.inf)
    records = train_dataset.records
    for epoch in range(1, config.max_epochs + 1):
        t0 = time.time()
        total_loss = 0.0
        for _ in range(config.batches_per_epoch):
            T = lengths[int(batch_rng.choice(len(lengths), p=weights))]
            idx = batch_rng.choice(len(buckets[T]), size=config.batch_size, replace=True)
            batch = [records[buckets[T][int(i)]] for i in idx]
            delta, delta_f, p_true = batch_arrays(batch)
            loss, grads, _, _ = loss_and_gradients(
                params, delta, delta_f, p_true, config.c_reg,
                train=True, dropout_rng=drop_rng, keep_prob=config.keep_prob,
            )
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch}; last batch T={T}, "
                    f"|w| max={max(np.abs(v).max() for v in params.tree().values()):.3g}"
                )
            adam_step(adam, params.tree(), grads)
            total_loss += loss
        mean_loss = total_loss / config.batches_per_epoch
        val_eps, _ = validation_error_rate(params, val_dataset)
        entry = {"epoch": epoch, "loss": mean_loss, "val_epsilon_per_step": val_eps,
                 "seconds": time.time() - t0}
        best.history.append(entry)
        marker = ""
        if val_eps < best.best_val_epsilon:
            best.best_val_epsilon = val_eps
            best.best_epoch = epoch
            save_checkpoint(out_checkpoint, params, adam, meta={
                "epoch": epoch, "val_epsilon_per_step": val_eps,
                "config": json.loads(json.dumps(config.__dict__, default=str)),
                "rng_state": {"batch": batch_rng.bit_generator.state,
                              "dropout": drop_rng.bit_generator.state},
            })
            marker = "  *checkpoint*"
        log(f"epoch {epoch:4d}  loss {mean_loss:.4f}  val eps/step {val_eps:.3e}"
            f"  ({entry['seconds']:.0f}s){marker}")
    return best
