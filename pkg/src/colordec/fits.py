"""Logical-fidelity decay fits, power-law scaling, and pseudothresholds.

Fidelity decays as F(t) = 1/2 + 1/2 (1 - 2 eps)^((t - t0)/t_step); all
rates are reported per step, with the cycle length (20 steps) carried
alongside so per-cycle numbers never get silently mixed in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

STEPS_PER_CYCLE = 20


@dataclass
class FidelitySeries:
    t_cycles: np.ndarray      # strictly increasing cycle counts
    fidelity: np.ndarray      # mean correct-prediction fraction per point
    n_samples: np.ndarray
    err: np.ndarray           # bootstrap standard error per point

    def __post_init__(self):
        self.t_cycles = np.asarray(self.t_cycles, dtype=np.int64)
        self.fidelity = np.asarray(self.fidelity, dtype=np.float64)
        self.n_samples = np.asarray(self.n_samples, dtype=np.int64)
        self.err = np.asarray(self.err, dtype=np.float64)
        if np.any(np.diff(self.t_cycles) <= 0):
            raise ValueError("t must be strictly increasing")
        if np.any((self.fidelity < 0) | (self.fidelity > 1)):
            raise ValueError("fidelity must lie in [0, 1]")


@dataclass
class FitResult:
    epsilon_per_step: float
    t0_steps: float
    steps_per_cycle: int = STEPS_PER_CYCLE
    epsilon_ci: tuple[float, float] | None = None
    extra: dict = field(default_factory=dict)

    @property
    def epsilon_per_cycle(self) -> float:
        return 0.5 * (1.0 - (1.0 - 2.0 * self.epsilon_per_step) ** self.steps_per_cycle)


def fidelity_model(t_steps, eps, t0):
    base = np.clip(1.0 - 2.0 * eps, 1e-15, 1.0)
    return 0.5 + 0.5 * np.power(base, (np.asarray(t_steps, dtype=np.float64) - t0))


def _two_point_estimate(t_steps, f) -> float:
    """Seed eps from the first and last points above 1/2."""
    good = np.nonzero(f > 0.5)[0]
    if good.size < 2:
        return 0.01
    a, b = good[0], good[-1]
    if t_steps[b] == t_steps[a]:
        return 0.01
    slope = (np.log(2 * f[b] - 1) - np.log(2 * f[a] - 1)) / (t_steps[b] - t_steps[a])
    eps = 0.5 * (1.0 - np.exp(slope))
    return float(np.clip(eps, 1e-9, 0.49))


def _nm_fit(t_steps, f, weights, fix_t0: bool, eps0: float, t0_init: float = 0.0):
    def cost(v):
        eps = v[0]
        t0 = t0_init if fix_t0 else v[1]
        if not 0.0 <= eps <= 0.5:
            return 1e9 + abs(eps) * 1e9
        resid = (fidelity_model(t_steps, eps, t0) - f) * weights
        return float(np.dot(resid, resid))

    x0 = np.array([eps0] if fix_t0 else [eps0, t0_init])
    res = minimize(cost, x0, method="Nelder-Mead",
                   options={"xatol": 1e-14, "fatol": 1e-16, "maxiter": 12000, "maxfev": 12000})
    eps = float(np.clip(res.x[0], 0.0, 0.5))
    t0 = t0_init if fix_t0 else float(res.x[1])
    return eps, t0


def fit_fidelity(series: FidelitySeries, fix_t0: bool = False,
                 steps_per_cycle: int = STEPS_PER_CYCLE,
                 bootstrap: int = 200, rng=None) -> FitResult:
    """Least-squares fit of the decay curve; eps is the per-step rate.

    fix_t0 pins the offset to zero (the convention used during training
    validation).  The confidence interval resamples each point's binomial
    counts and refits.
    """
    if series.t_cycles.size < 3:
        raise ValueError("need at least 3 fidelity points")
    if np.all(series.fidelity <= 0.5 + 1e-12):
        raise ValueError("all fidelities at 1/2; data carries no signal")
    t_steps = series.t_cycles.astype(np.float64) * steps_per_cycle
    weights = np.ones_like(series.fidelity)
    eps0 = _two_point_estimate(t_steps, series.fidelity)
    eps, t0 = _nm_fit(t_steps, series.fidelity, weights, fix_t0, eps0)

    ci = None
    if bootstrap and rng is not None:
        draws = []
        n = np.maximum(series.n_samples, 1)
        for _ in range(bootstrap):
            fb = rng.binomial(n, np.clip(series.fidelity, 0.0, 1.0)) / n
            try:
                eb, _ = _nm_fit(t_steps, fb, weights, fix_t0, eps0)
            except Exception:
                continue
            draws.append(eb)
        if draws:
            lo, hi = np.percentile(draws, [2.5, 97.5])
            ci = (float(lo), float(hi))
    return FitResult(eps, t0, steps_per_cycle, epsilon_ci=ci)


def fit_powerlaw(points, d: int, fix_exponent: bool = True):
    """Prefactor C_d of eps_L = C_d * eps_phys^((d+1)/2).

    points: iterable of (eps_phys, eps_L).  With fix_exponent the slope is
    pinned to (d+1)/2 and only log C_d is fitted; otherwise both are free
    and the fitted slope is returned too.  Returns (C_d, slope).
    """
    pts = [(float(p), float(e)) for p, e in points]
    if len(pts) < 2:
        raise ValueError("need at least two points")
    if any(p <= 0 or e <= 0 for p, e in pts):
        raise ValueError("rates must be positive")
    if d % 2 == 0 or d < 3:
        raise ValueError("d must be an odd integer >= 3")
    lx = np.array([np.log(p) for p, _ in pts])
    ly = np.array([np.log(e) for _, e in pts])
    if fix_exponent:
        slope = (d + 1) / 2.0
        logc = float(np.mean(ly - slope * lx))
    else:
        slope, logc = np.polyfit(lx, ly, 1)
        slope = float(slope)
        logc = float(logc)
    return float(np.exp(logc)), slope


def pseudothreshold(c_d: float, d: int) -> float:
    """Physical rate below which the encoded qubit beats a bare qubit."""
    if c_d <= 0:
        raise ValueError("prefactor must be positive")
    if d % 2 == 0 or d < 3:
        raise ValueError("d must be an odd integer >= 3")
    return float(c_d ** (-2.0 / (d - 1)))


def decoder_efficiency(epsilon_optimal: float, epsilon_l: float) -> float:
    """Ratio of the optimal decoder's rate to the achieved rate."""
    if epsilon_optimal <= 0 or epsilon_l <= 0:
        raise ValueError("rates must be positive")
    return epsilon_optimal / epsilon_l
