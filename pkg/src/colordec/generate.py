"""Dataset generation: sequence sampling over workers with per-sample streams."""

from __future__ import annotations

import json
import multiprocessing as mp

from .dataset_io import Dataset, DatasetHeader
from .layout import build_layout, layout_to_json
from .records import Extractor
from .sim import NoiseParams, Runner, rng_for_sample

_WORKER = {}


def _init_worker(distance: int, reset_mode: str):
    layout = build_layout(distance)
    runner = Runner(layout, reset_mode)
    _WORKER["runner"] = runner
    _WORKER["extractor"] = Extractor(layout, reset_mode, runner=runner)


def _make_record(args):
    mode, seed, index, p_error, t_value = args
    runner: Runner = _WORKER["runner"]
    extractor: Extractor = _WORKER["extractor"]
    rng = rng_for_sample(seed, index)
    noise = NoiseParams(p_error)
    if mode == "test":
        anc, flg, data = runner.run_branching(t_value, noise, rng=rng)
        return index, extractor.extract_branched(anc, flg, data)
    raw = runner.run(t_value, noise, rng=rng)
    return index, extractor.extract(raw)


def sample_lengths(count: int, t_min: int, t_max: int, seed: int) -> list[int]:
    """Per-record lengths for training data: uniform on [t_min, t_max]."""
    rng = rng_for_sample(seed, 2 ** 63 - 1)
    return [int(t) for t in rng.integers(t_min, t_max + 1, size=count)]


def generate(distance: int, p_error: float, count: int, t_min: int, t_max: int,
             mode: str, reset_mode: str, seed: int, lengths: list[int] | None = None,
             workers: int = 1, progress=None) -> Dataset:
    """Build a dataset; bit-identical for identical arguments.

    mode "train" samples one final readout at each record's length; mode
    "test" runs to t_max and branches a noisy readout after every cycle.
    Explicit ``lengths`` override the uniform draw (validation grids).
    """
    if mode not in ("train", "test"):
        raise ValueError("mode must be train or test")
    if mode == "test":
        lengths = [t_max] * count
    elif lengths is None:
        lengths = sample_lengths(count, t_min, t_max, seed)
    elif len(lengths) != count:
        lengths = [lengths[i % len(lengths)] for i in range(count)]
    layout = build_layout(distance)
    header = DatasetHeader(
        distance=distance, n_tiles=layout.n_tiles, p_error=p_error,
        reset_mode=reset_mode, seed=seed, count=count, mode=mode,
        record_layout="per_cycle" if mode == "test" else "final",
        basis="Z", t_min=t_min, t_max=t_max,
        extra={"layout": json.loads(layout_to_json(layout))},
    )
    jobs = [(mode, seed, i, p_error, lengths[i]) for i in range(count)]
    records: list = [None] * count
    if workers <= 1:
        _init_worker(distance, reset_mode)
        for job in jobs:
            idx, rec = _make_record(job)
            records[idx] = rec
            if progress:
                progress(idx)
    else:
        ctx = mp.get_context("fork")
        with ctx.Pool(workers, initializer=_init_worker, initargs=(distance, reset_mode)) as pool:
            for idx, rec in pool.imap_unordered(_make_record, jobs, chunksize=64):
                records[idx] = rec
                if progress:
                    progress(idx)
    return Dataset(header, records)
