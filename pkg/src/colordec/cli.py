"""Command-line workbench: generate / train / evaluate / fit / sweep.

Report commands write delimited output and, unless --no-plot is given,
render the matching figures next to it.  Errors leave exit code 1 and a
single machine-readable JSON line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path


def _set_deterministic_env():
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, "1")


def _parse_p_grid(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def cmd_generate(args) -> int:
    from .dataset_io import write_dataset
    from .generate import generate

    dataset = generate(
        distance=args.distance, p_error=args.p_error, count=args.count,
        t_min=args.t_min, t_max=args.t_max, mode=args.mode,
        reset_mode=args.reset_mode, seed=args.seed, workers=args.workers,
    )
    write_dataset(args.out, dataset.header, dataset.records)
    print(f"wrote {len(dataset)} records to {args.out}")
    return 0


def cmd_train(args) -> int:
    from .config import TrainConfig
    from .dataset_io import read_dataset
    from .train import train

    config = TrainConfig.from_toml(args.config)
    if config.deterministic:
        _set_deterministic_env()
    train_ds = read_dataset(args.data)
    val_ds = read_dataset(args.val)
    result = train(config, train_ds, val_ds, args.out_checkpoint)
    print(f"best epoch {result.best_epoch}: "
          f"validation eps/step {result.best_val_epsilon:.3e}")
    history_path = Path(args.out_checkpoint).with_suffix(".history.json")
    with open(history_path, "w") as fh:
        json.dump(result.history, fh, indent=1)
    print(f"history written to {history_path}")
    return 0


def _write_series_csv(path, series):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "F", "err"])
        for t, f, e in zip(series.t_cycles, series.fidelity, series.err):
            writer.writerow([int(t), f"{f:.6f}", f"{e:.6f}"])


def _read_series_csv(path):
    import numpy as np

    from .fits import FidelitySeries

    ts, fs, es = [], [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            ts.append(int(row["t"]))
            fs.append(float(row["F"]))
            es.append(float(row["err"]))
    n = np.full(len(ts), 1000)
    return FidelitySeries(np.array(ts), np.array(fs), n, np.array(es))


def cmd_evaluate(args) -> int:
    import numpy as np

    from .dataset_io import read_dataset
    from .evaluate import evaluate
    from .fits import fit_fidelity
    from .net import load_checkpoint

    params, _, _ = load_checkpoint(args.checkpoint)
    dataset = read_dataset(args.data)
    series, _ = evaluate(params, dataset, max_points=args.max_points, seed=args.seed)
    _write_series_csv(args.out_csv, series)
    print(f"wrote {series.t_cycles.size} points to {args.out_csv}")
    if not args.no_plot:
        from .plots import plot_decay

        fit = None
        try:
            fit = fit_fidelity(series, fix_t0=False, bootstrap=0)
        except ValueError:
            pass
        fig_path = Path(args.out_csv).with_suffix(".png")
        label = f"p={dataset.header.p_error:g}"
        plot_decay([(label, series, fit)], fig_path)
        print(f"figure written to {fig_path}")
    return 0


def cmd_fit(args) -> int:
    import numpy as np

    from .fits import fit_fidelity

    series = _read_series_csv(args.in_csv)
    rng = np.random.default_rng(args.seed)
    fit = fit_fidelity(series, fix_t0=args.fix_t0, bootstrap=args.bootstrap, rng=rng)
    doc = {
        "epsilon_per_step": fit.epsilon_per_step,
        "epsilon_per_cycle": fit.epsilon_per_cycle,
        "t0_steps": fit.t0_steps,
        "steps_per_cycle": fit.steps_per_cycle,
        "epsilon_ci": fit.epsilon_ci,
    }
    with open(args.out, "w") as fh:
        json.dump(doc, fh, indent=1)
    print(json.dumps(doc))
    if not args.no_plot:
        from .plots import plot_decay

        plot_decay([("data", series, fit)], Path(args.out).with_suffix(".png"))
    return 0


def _auto_t_max(p: float, prefactor: float = 600.0) -> int:
    """Cycles until the fidelity drops to about 0.6, capped at 10^4."""
    import numpy as np

    eps_step = max(prefactor * p * p, 1e-12)
    eps_cycle = 0.5 * (1 - (1 - 2 * eps_step) ** 20)
    t = np.log(0.2) / np.log(max(1 - 2 * eps_cycle, 1e-12))
    return int(np.clip(t, 20, 10_000))


def cmd_sweep(args) -> int:
    import numpy as np

    from .dataset_io import write_dataset
    from .evaluate import evaluate
    from .fits import fit_fidelity, fit_powerlaw, pseudothreshold
    from .generate import generate
    from .net import load_checkpoint

    params, _, _ = load_checkpoint(args.checkpoint)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    scaling_rows = []
    curves = []
    for k, p in enumerate(_parse_p_grid(args.p_grid)):
        t_max = args.t_max or _auto_t_max(p)
        dataset = generate(args.distance, p, args.count, 1, t_max, "test", "RESET",
                           seed=args.seed + k, workers=args.workers)
        if args.keep_datasets:
            write_dataset(out_dir / f"test_p{p:g}.ccnn", dataset.header, dataset.records)
        series, _ = evaluate(params, dataset, seed=args.seed)
        _write_series_csv(out_dir / f"decay_p{p:g}.csv", series)
        fit = fit_fidelity(series, fix_t0=False, bootstrap=args.bootstrap, rng=rng)
        ci = fit.epsilon_ci or (fit.epsilon_per_step, fit.epsilon_per_step)
        scaling_rows.append((p, fit.epsilon_per_step, ci[0], ci[1]))
        curves.append((f"p={p:g}", series, fit))
        print(f"p={p:g}: eps/step={fit.epsilon_per_step:.3e} ci=({ci[0]:.2e},{ci[1]:.2e})")
    with open(out_dir / "scaling.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["p_phys", "eps_L", "ci_lo", "ci_hi"])
        for row in scaling_rows:
            writer.writerow([f"{v:.6e}" for v in row])
    usable = [(p, e) for p, e, _, _ in scaling_rows if e > 0]
    if len(usable) >= 2:
        c_d, _ = fit_powerlaw(usable, args.distance)
        eps_pseudo = pseudothreshold(c_d, args.distance)
        with open(out_dir / "scaling_fit.json", "w") as fh:
            json.dump({"C_d": c_d, "epsilon_pseudo": eps_pseudo, "d": args.distance}, fh, indent=1)
        print(f"C_{args.distance}={c_d:.4g}  pseudothreshold={eps_pseudo:.4g}")
        if not args.no_plot:
            from .plots import plot_decay, plot_scaling

            plot_decay(curves, out_dir / "decay.png")
            plot_scaling(scaling_rows, args.distance, c_d, out_dir / "scaling.png")
            print(f"figures written to {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="colordec",
                                     description="triangular color-code decoder workbench")
    parser.add_argument("--deterministic", action="store_true",
                        help="force single-threaded numerics for bit-reproducible runs")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a syndrome dataset")
    g.add_argument("--distance", type=int, required=True)
    g.add_argument("--p-error", type=float, required=True)
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--t-min", type=int, default=1)
    g.add_argument("--t-max", type=int, required=True)
    g.add_argument("--mode", choices=["train", "test"], default="train")
    g.add_argument("--reset-mode", choices=["RESET", "NO_RESET"], default="RESET")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", help="train the recurrent decoder")
    t.add_argument("--config", required=True, help="TOML config file")
    t.add_argument("--data", required=True)
    t.add_argument("--val", required=True)
    t.add_argument("--out-checkpoint", required=True)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("evaluate", help="decode a test dataset into a fidelity curve")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--out-csv", required=True)
    e.add_argument("--max-points", type=int, default=50)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--no-plot", action="store_true")
    e.set_defaults(func=cmd_evaluate)

    f = sub.add_parser("fit", help="fit a fidelity CSV to the decay law")
    f.add_argument("--in-csv", required=True)
    f.add_argument("--fix-t0", action="store_true")
    f.add_argument("--bootstrap", type=int, default=200)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", required=True)
    f.add_argument("--no-plot", action="store_true")
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("sweep", help="evaluate + fit over a physical-error grid")
    s.add_argument("--checkpoint", required=True)
    s.add_argument("--distance", type=int, required=True)
    s.add_argument("--p-grid", required=True, help="comma-separated physical rates")
    s.add_argument("--count", type=int, default=1000)
    s.add_argument("--t-max", type=int, default=0, help="0 = auto per rate")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--bootstrap", type=int, default=100)
    s.add_argument("--keep-datasets", action="store_true")
    s.add_argument("--no-plot", action="store_true")
    s.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if "--deterministic" in argv:
        _set_deterministic_env()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
