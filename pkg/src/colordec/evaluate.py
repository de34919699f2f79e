"""Test-set evaluation: fidelity versus time from the lower head."""

from __future__ import annotations

import numpy as np

from .dataset_io import Dataset
from .fits import FidelitySeries
from .net import LstmDecoderParams, lstm_forward, _sigmoid
from .records import BranchedSequence


def evaluation_times(t_max: int, max_points: int = 50) -> list[int]:
    """t_n = n*dt < t_max with dt the smallest spacing giving < max_points."""
    dt = 1
    while sum(1 for t in range(dt, t_max, dt)) >= max_points:
        dt += 1
    return list(range(dt, t_max, dt)) or [t_max]


def _head_probability(head, u: np.ndarray, delta_f: np.ndarray) -> np.ndarray:
    inp = np.concatenate([u, delta_f.astype(np.float64)], axis=1)
    hidden = np.maximum(inp @ head.wh.T + head.bh, 0.0)
    return _sigmoid(hidden @ head.wo + head.bo[0])


def evaluate(params: LstmDecoderParams, dataset: Dataset, max_points: int = 50,
             bootstrap: int = 200, seed: int = 0, chunk: int = 128):
    """Decode a per-cycle test dataset at thinned evaluation times.

    One recurrent pass per sequence serves every evaluation time; the
    lower head reads the state at each time together with that time's
    final increment.  Returns (FidelitySeries, correctness matrix).
    """
    records = dataset.records
    if not records or not isinstance(records[0], BranchedSequence):
        raise ValueError("evaluation needs a per-cycle (test mode) dataset")
    t_max = records[0].T
    if any(r.T != t_max for r in records):
        raise ValueError("test records must share one maximum length")
    times = evaluation_times(t_max, max_points)
    correct = np.zeros((len(times), len(records)), dtype=np.uint8)
    for lo in range(0, len(records), chunk):
        part = records[lo:lo + chunk]
        delta = np.stack([np.concatenate([r.delta_s, r.s_flag], axis=1) for r in part])
        delta = np.ascontiguousarray(delta.transpose(1, 0, 2)).astype(np.float64)
        h1, _ = lstm_forward(params.layer1, delta)
        h2, _ = lstm_forward(params.layer2, h1)
        for k, t in enumerate(times):
            u = np.maximum(h2[t - 1], 0.0)
            delta_f = np.stack([r.delta_f[t - 1] for r in part])
            p_low = _head_probability(params.head_lower, u, delta_f)
            pred = (p_low >= 0.5).astype(np.uint8)
            truth = np.array([r.p_true[t - 1] for r in part], dtype=np.uint8)
            correct[k, lo:lo + len(part)] = pred == truth
    fidelity = correct.mean(axis=1)
    n = np.full(len(times), len(records))
    rng = np.random.default_rng(seed)
    err = np.zeros(len(times))
    if bootstrap:
        for k in range(len(times)):
            draws = rng.choice(correct[k], size=(bootstrap, len(records)), replace=True)
            err[k] = draws.mean(axis=1).std()
    series = FidelitySeries(np.array(times), fidelity, n, err)
    return series, correct
