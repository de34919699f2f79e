"""Training configuration: TOML files in, dataclass out."""

from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass
class TrainConfig:
    distance: int = 3
    n_hidden: int = 32
    p_train: float = 1e-3
    n_train: int = 200_000
    t_min: int = 1
    t_max: int = 40
    batch_size: int = 64
    batches_per_epoch: int = 3000
    max_epochs: int = 1000
    learning_rate: float = 1e-3
    c_reg: float = 1e-5
    keep_prob: float = 0.8
    p_validation: float = 1e-4
    n_validation: int = 3000
    val_t_max: int = 1500
    val_n_lengths: int = 30
    seed: int = 12345
    deterministic: bool = True
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.distance < 3 or self.distance % 2 == 0:
            raise ValueError("distance must be an odd integer >= 3")
        for name in ("p_train", "p_validation", "keep_prob"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")
        for name in ("n_train", "t_min", "t_max", "batch_size", "batches_per_epoch",
                     "max_epochs", "n_validation", "val_t_max", "val_n_lengths", "n_hidden"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")

    def validation_lengths(self) -> list[int]:
        """Log-spaced validation grid from 1 to val_t_max."""
        import numpy as np

        grid = np.unique(np.round(np.logspace(0, np.log10(self.val_t_max),
                                              self.val_n_lengths)).astype(int))
        return [int(t) for t in grid]

    @classmethod
    def from_toml(cls, path) -> "TrainConfig":
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
        doc = doc.get("train", doc)
        known = {f for f in cls.__dataclass_fields__ if f != "extra"}
        kwargs = {k: v for k, v in doc.items() if k in known}
        extra = {k: v for k, v in doc.items() if k not in known}
        return cls(**kwargs, extra=extra)

    def to_toml(self) -> str:
        lines = ["[train]"]
        for key, value in asdict(self).items():
            if key == "extra":
                continue
            if isinstance(value, bool):
                lines.append(f"{key} = {'true' if value else 'false'}")
            elif isinstance(value, str):
                lines.append(f'{key} = "{value}"')
            else:
                lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"
