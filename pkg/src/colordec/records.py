"""Decoder-ready syndrome records from raw measurement data.

delta_s is the cycle-to-cycle increment of the check outcomes.  With
resets this is a plain XOR against the previous cycle (the first cycle
compares against the noiseless reference).  Without resets the increments
and flag bits come from the compensation equations, streamed with only
d(t-1) retained.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compensation import CompensationMatrices, build_compensation_matrices
from .layout import CodeLayout, pure_error_basis
from .sim import RawRun, Runner


@dataclass
class SyndromeSequence:
    """One training-style record: finals sampled at the end only."""

    delta_s: np.ndarray   # (T, 2m)
    s_flag: np.ndarray    # (T, 2m)
    delta_f: np.ndarray   # (m,) final-basis check increments
    p_true: int

    @property
    def T(self) -> int:
        return self.delta_s.shape[0]


@dataclass
class BranchedSequence:
    """Test-style record: a final increment and parity after every cycle."""

    delta_s: np.ndarray   # (T, 2m)
    s_flag: np.ndarray    # (T, 2m)
    delta_f: np.ndarray   # (T, m)
    p_true: np.ndarray    # (T,)

    @property
    def T(self) -> int:
        return self.delta_s.shape[0]


def compute_final_increment_and_parity(layout: CodeLayout, final_bits: np.ndarray,
                                       accumulated_z: np.ndarray) -> tuple[np.ndarray, int]:
    """Final Z-check increment and the gauge-independent true parity.

    delta_f compares the Z-check parities of the data readout against the
    Z syndrome accumulated over the cycles.  p_true is the logical parity
    of the readout corrected by the pure error of its residual syndrome,
    so multiplying the readout by any stabilizer leaves it unchanged.
    """
    m = layout.n_tiles
    final_bits = np.asarray(final_bits, dtype=np.uint8)
    z_par = (layout.z_stabilizers @ final_bits) % 2
    delta_f = (z_par ^ np.asarray(accumulated_z, dtype=np.uint8)).astype(np.uint8)
    pures = pure_error_basis(layout)
    correction = np.zeros(layout.n_data, dtype=np.uint8)
    for i in np.nonzero(z_par)[0]:
        correction ^= pures[m + int(i)].x
    p_true = int((final_bits @ layout.logical_z + correction @ layout.logical_z) % 2)
    return delta_f, p_true


class Extractor:
    """Layout- and mode-bound record extraction."""

    def __init__(self, layout: CodeLayout, reset_mode: str = "RESET",
                 comp: CompensationMatrices | None = None, runner: Runner | None = None):
        self.layout = layout
        self.reset_mode = reset_mode
        self.m = layout.n_tiles
        if reset_mode == "NO_RESET" and comp is None:
            comp = build_compensation_matrices(layout, runner=runner)
        self.comp = comp

    def _increments(self, ancilla_bits: np.ndarray, flag_bits: np.ndarray,
                    initial_d: np.ndarray | None = None):
        """(delta_s, s_flag, final syndrome state) for a full run."""
        T = ancilla_bits.shape[0]
        m2 = 2 * self.m
        delta_s = np.zeros((T, m2), dtype=np.uint8)
        s_flag = np.zeros((T, m2), dtype=np.uint8)
        if self.reset_mode == "RESET":
            prev = np.zeros(m2, dtype=np.uint8)  # noiseless reference outcomes
            for t in range(T):
                delta_s[t] = ancilla_bits[t] ^ prev
                prev = ancilla_bits[t]
            s_flag[:] = flag_bits
            syndrome = delta_s.sum(axis=0) % 2
            return delta_s, s_flag, syndrome.astype(np.uint8)
        comp = self.comp
        d_prev = np.zeros(6 * self.m, dtype=np.uint8) if initial_d is None else initial_d.copy()
        s_prev = d_prev[4 * self.m:].copy()
        for t in range(T):
            m0 = (comp.m_ancilla @ d_prev) % 2
            f0 = (comp.m_flag @ d_prev) % 2
            delta_s[t] = ancilla_bits[t] ^ m0
            s_flag[t] = flag_bits[t] ^ f0
            s_now = (s_prev + delta_s[t] + comp.syndrome @ d_prev) % 2
            d_prev = np.concatenate([ancilla_bits[t], flag_bits[t], s_now]).astype(np.uint8)
            s_prev = s_now.astype(np.uint8)
        return delta_s, s_flag, s_prev

    def extract(self, raw: RawRun, initial_d: np.ndarray | None = None) -> SyndromeSequence:
        if raw.ancilla_bits.shape[1] != 2 * self.m:
            raise ValueError("raw run does not match layout dimensions")
        if raw.reset_mode != self.reset_mode:
            raise ValueError("raw run was produced in a different reset mode")
        delta_s, s_flag, syndrome = self._increments(raw.ancilla_bits, raw.flag_bits, initial_d)
        delta_f, p_true = compute_final_increment_and_parity(
            self.layout, raw.final_data_bits, syndrome[self.m:]
        )
        return SyndromeSequence(delta_s, s_flag, delta_f, p_true)

    def extract_branched(self, ancilla_bits: np.ndarray, flag_bits: np.ndarray,
                         data_bits: np.ndarray) -> BranchedSequence:
        """Extraction for runs with a branched readout after every cycle."""
        T = ancilla_bits.shape[0]
        delta_s, s_flag, _ = self._increments(ancilla_bits, flag_bits)
        delta_f = np.zeros((T, self.m), dtype=np.uint8)
        p_true = np.zeros(T, dtype=np.uint8)
        cum_z = np.zeros(self.m, dtype=np.uint8)
        for t in range(T):
            cum_z ^= delta_s[t, self.m:]
            delta_f[t], p_true[t] = compute_final_increment_and_parity(
                self.layout, data_bits[t], cum_z
            )
        return BranchedSequence(delta_s, s_flag, delta_f, p_true)
