"""No-reset compensation: predicting check outcomes from the previous cycle.

Without resets, the noiseless outcome of cycle t is a GF(2)-linear
function of d(t-1) = (m(t-1), m_flag(t-1), s(t-1)).  The three matrices
are recovered by driving each coordinate of d with a Pauli insertion,
running one noiseless cycle, and solving the resulting linear system;
contamination between coordinates within the driving cycle is handled by
inverting the full response matrix rather than assuming unit columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gf2 import gf2_inv
from .layout import CodeLayout, pure_error_basis
from .sim import Runner


@dataclass
class CompensationMatrices:
    """Row blocks act on d(t-1) = (m, m_flag, s), each 2m bits."""

    m_ancilla: np.ndarray   # predicts ancilla outcomes m0(t)
    m_flag: np.ndarray      # predicts flag outcomes m0_flag(t)
    syndrome: np.ndarray    # M_s in s(t) = s(t-1) + ds(t) + M_s d(t-1)

    @property
    def dim(self) -> int:
        return self.m_ancilla.shape[1]


# Drive each coordinate with an X inserted between the readout rotation and
# the measurement, so the recorded bit and the surviving qubit state flip
# together, exactly as they do in a real no-reset run.
_DRIVE_STEP = {"x_synd": 8, "z_synd": 18, "x_flag": 7, "z_flag": 17}


def build_compensation_matrices(layout: CodeLayout, runner: Runner | None = None) -> CompensationMatrices:
    if runner is None:
        runner = Runner(layout, "NO_RESET")
    if runner.reset_mode != "NO_RESET":
        raise ValueError("compensation matrices are defined for NO_RESET schedules")
    m = layout.n_tiles
    dim = 6 * m
    pures = pure_error_basis(layout)

    def run_pair(insert_after):
        """Noiseless: init, cycle 1 with insertions, cycle 2; observe."""
        anc1 = np.zeros(2 * m, np.uint8)
        flg1 = np.zeros(2 * m, np.uint8)
        anc2 = np.zeros(2 * m, np.uint8)
        flg2 = np.zeros(2 * m, np.uint8)
        tab = runner.fresh_state()
        runner._run_program(tab, runner._init, (), None)
        runner._run_cycle(tab, (), None, anc_out=anc1, flag_out=flg1, insert_after=insert_after)
        s1 = runner.probe_syndrome(tab)
        runner._run_cycle(tab, (), None, anc_out=anc2, flag_out=flg2)
        s2 = runner.probe_syndrome(tab)
        d1 = np.concatenate([anc1, flg1, s1])
        return d1, np.concatenate([anc2, flg2]), s1, s2

    _, base_obs, base_s1, base_s2 = run_pair(None)
    if base_obs.any() or base_s1.any() or base_s2.any():
        raise AssertionError("noiseless no-reset baseline is not zero; schedule bug")

    drive = np.zeros((dim, dim), np.uint8)      # columns: d(1) per perturbation
    observe = np.zeros((4 * m, dim), np.uint8)  # columns: (m(2), m_flag(2))
    s_delta = np.zeros((2 * m, dim), np.uint8)  # columns: s(2) ^ s(1)

    col = 0
    for kind in ("x_synd", "z_synd", "x_flag", "z_flag"):
        for tile in layout.tiles:
            qubit = tile.ancilla if kind in ("x_synd", "z_flag") else tile.flag
            ins = {_DRIVE_STEP[kind]: [(qubit, "X")]}
            d1, obs, s1, s2 = run_pair(ins)
            drive[:, col] = d1
            observe[:, col] = obs
            s_delta[:, col] = s1 ^ s2
            col += 1
    for bit in range(2 * m):
        pure = pures[bit]
        # boundary insertion sees the rotated data frame: swap x and z parts
        ins_ops = []
        for q in range(layout.n_data):
            x_phys, z_phys = pure.z[q], pure.x[q]
            if x_phys and z_phys:
                ins_ops.append((q, "Y"))
            elif x_phys:
                ins_ops.append((q, "X"))
            elif z_phys:
                ins_ops.append((q, "Z"))
        d1, obs, s1, s2 = run_pair({19: ins_ops})
        drive[:, col] = d1
        observe[:, col] = obs
        s_delta[:, col] = s1 ^ s2
        col += 1

    inv = gf2_inv(drive)
    resp = (observe @ inv) % 2
    m_anc = resp[: 2 * m]
    m_flg = resp[2 * m:]
    # s(2) = s(1) + ds(2) + M_s d(1) with ds(2) = m(2) + M_a d(1)
    ds2 = (observe[: 2 * m] ^ (m_anc @ drive) % 2) % 2
    m_syn = ((s_delta ^ ds2) @ inv) % 2
    return CompensationMatrices(
        m_ancilla=m_anc.astype(np.uint8),
        m_flag=m_flg.astype(np.uint8),
        syndrome=m_syn.astype(np.uint8),
    )
