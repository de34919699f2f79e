"""Desk-scale d=3 training campaign; artifacts land in runs/acceptance_d3/.

Datasets and the checkpoint are reused when present, so re-runs resume
cheaply.  Pass the epoch budget as the first argument (default 150).
"""

import json
import os
import sys
from pathlib import Path

os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")

from colordec.campaign import desk_config, ensure_checkpoint, evaluate_campaign

RUN_DIR = Path(__file__).resolve().parent.parent / "runs" / "acceptance_d3"


def main():
    epochs = int(sys.argv[1]) if len(sys.argv) > 1 else 150
    cfg = desk_config(max_epochs=epochs)
    RUN_DIR.mkdir(parents=True, exist_ok=True)
    with open(RUN_DIR / "config.toml", "w") as fh:
        fh.write(cfg.to_toml())
    ensure_checkpoint(RUN_DIR, cfg, workers=2)
    metrics = evaluate_campaign(RUN_DIR, cfg, workers=2)
    with open(RUN_DIR / "metrics.json", "w") as fh:
        json.dump(metrics, fh, indent=1)
    print(json.dumps(metrics), flush=True)


if __name__ == "__main__":
    main()
