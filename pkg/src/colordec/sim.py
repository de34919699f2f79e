"""Noisy execution of measurement schedules on the stabilizer tableau.

Every schedule op is an error location: single-qubit ops draw X/Y/Z with
probability p/3 each, conditional-phase gates one of the 15 two-qubit
Paulis with p/15 each, measurements flip their outcome with probability p,
and resetting measurements add one more single-qubit location for the
re-preparation.  All locations are independent Bernoulli(p) draws.

Randomness is counter-based: sample k of a dataset keyed by (seed, k)
gets its own Philox stream, so generation is reproducible under any
worker count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .layout import CodeLayout
from .schedule import (
    CircuitSchedule,
    Op,
    build_cycle_schedule,
    build_final_readout,
    build_init_schedule,
)
from .tableau import Tableau

ALL_CHANNELS = frozenset({"prep", "idle", "rotation", "cphase", "measurement"})
_PAULI1 = ("X", "Y", "Z")
_PAULI2 = tuple(
    (p1, p2)
    for p1 in ("I", "X", "Y", "Z")
    for p2 in ("I", "X", "Y", "Z")
    if not (p1 == "I" and p2 == "I")
)

_OP_CHANNEL = {"PREP": "prep", "IDLE": "idle", "H": "rotation", "RESET": "prep"}


@dataclass(frozen=True)
class NoiseParams:
    p_error: float
    enabled_channels: frozenset = ALL_CHANNELS

    def __post_init__(self):
        if not 0.0 <= self.p_error <= 1.0:
            raise ValueError(f"p_error must lie in [0, 1], got {self.p_error}")


@dataclass(frozen=True)
class FaultSlot:
    step: int
    kind: str                 # pauli1 | pauli2 | flip
    qubits: tuple[int, ...]
    channel: str


@dataclass
class RawRun:
    ancilla_bits: np.ndarray      # (T, 2m): X-check bits then Z-check bits
    flag_bits: np.ndarray         # (T, 2m): X flags then Z flags
    final_data_bits: np.ndarray   # (n_data,)
    fault_log: list
    seed: int | None
    T: int
    reset_mode: str
    final_basis: str


def fault_slots(schedule: CircuitSchedule, noise: NoiseParams | None = None) -> list[FaultSlot]:
    """Independent error locations of a schedule, in execution order."""
    channels = ALL_CHANNELS if noise is None else noise.enabled_channels
    slots: list[FaultSlot] = []
    for step in schedule.steps:
        for op in step.ops:
            if op.kind == "CZ":
                if "cphase" in channels:
                    slots.append(FaultSlot(step.index, "pauli2", op.qubits, "cphase"))
            elif op.kind == "MEASURE":
                if "measurement" in channels:
                    slots.append(FaultSlot(step.index, "flip", op.qubits, "measurement"))
                if op.reset and "prep" in channels:
                    slots.append(FaultSlot(step.index, "pauli1", op.qubits, "prep"))
            else:
                channel = _OP_CHANNEL[op.kind]
                if channel in channels:
                    slots.append(FaultSlot(step.index, "pauli1", op.qubits, channel))
    return slots


def inject_errors(schedule: CircuitSchedule, noise: NoiseParams, rng, slots: list[FaultSlot] | None = None):
    """Sample the fault list for one pass of a schedule.

    Returns a list of (slot_index, variant) with ascending slot index.
    """
    if slots is None:
        slots = fault_slots(schedule, noise)
    if noise.p_error == 0.0 or not slots:
        return []
    k = int(rng.binomial(len(slots), noise.p_error))
    if k == 0:
        return []
    chosen = np.sort(rng.choice(len(slots), size=k, replace=False))
    faults = []
    for idx in chosen:
        slot = slots[int(idx)]
        if slot.kind == "pauli1":
            variant = int(rng.integers(0, 3))
        elif slot.kind == "pauli2":
            variant = int(rng.integers(0, 15))
        else:
            variant = 0
        faults.append((int(idx), variant))
    return faults


def rng_for_sample(seed: int, index: int):
    """Splittable per-sample stream: Philox keyed by (seed, index)."""
    return np.random.Generator(np.random.Philox(key=np.array([seed, index], dtype=np.uint64)))


def prepare_logical_zero(layout: CodeLayout) -> Tableau:
    """Tableau of |0_L> on the data block with all check qubits in |0>."""
    n = layout.total_qubits
    tab = Tableau(n)
    for tile in layout.tiles:
        x_bits = np.zeros(n, dtype=np.uint8)
        x_bits[list(tile.data)] = 1
        tab.measure_pauli(x_bits, np.zeros(n, dtype=np.uint8), force=0)
    # the Z-type generators survive with positive sign; verify
    for tile in layout.tiles:
        z_bits = np.zeros(n, dtype=np.uint8)
        z_bits[list(tile.data)] = 1
        outcome, deterministic = tab.measure_pauli(np.zeros(n, dtype=np.uint8), z_bits)
        if not deterministic or outcome != 0:
            raise ValueError("logical-zero preparation failed: dependent generators")
    z_bits = np.zeros(n, dtype=np.uint8)
    z_bits[layout.logical_z.astype(bool).nonzero()[0]] = 1
    outcome, deterministic = tab.measure_pauli(np.zeros(n, dtype=np.uint8), z_bits)
    if not deterministic or outcome != 0:
        raise ValueError("logical-zero preparation failed: logical Z not fixed")
    return tab


def apply_gate(tab: Tableau, op: Op, rng=None, flip: bool = False) -> int | None:
    """Apply one schedule op; returns the outcome bit for MEASURE."""
    if op.kind == "IDLE":
        return None
    if op.kind == "H":
        tab.h(op.qubits[0])
        return None
    if op.kind == "CZ":
        tab.cz(*op.qubits)
        return None
    if op.kind in ("PREP", "RESET"):
        tab.reset(op.qubits[0], rng=rng)
        return None
    if op.kind == "MEASURE":
        out = tab.measure_z(op.qubits[0], rng=rng)
        if op.reset and out:
            tab.apply_pauli(op.qubits[0], "X")
        return out ^ int(flip)
    raise ValueError(f"unknown op kind {op.kind!r}")


@dataclass
class _StepProgram:
    index: int
    h_qubits: tuple[int, ...]
    cz_pairs: tuple[tuple[int, int], ...]
    measures: tuple[Op, ...]
    resets: tuple[int, ...]     # standalone RESET ops


@dataclass
class _Program:
    steps: list[_StepProgram]
    slots: list[FaultSlot]


def _compile(schedule: CircuitSchedule, executable_prep: bool = False) -> _Program:
    steps = []
    for step in schedule.steps:
        hs: list[int] = []
        czs: list[tuple[int, int]] = []
        measures: list[Op] = []
        resets: list[int] = []
        for op in step.ops:
            if op.kind == "H":
                hs.append(op.qubits[0])
            elif op.kind == "CZ":
                czs.append(op.qubits)
            elif op.kind == "MEASURE":
                measures.append(op)
            elif op.kind == "RESET" or (op.kind == "PREP" and executable_prep):
                resets.append(op.qubits[0])
        steps.append(_StepProgram(step.index, tuple(hs), tuple(czs), tuple(measures), tuple(resets)))
    return _Program(steps, fault_slots(schedule))


class Runner:
    """Executes INIT + T cycles + final readout with shared compiled programs.

    The logical-zero state is prepared exactly; PREP ops in the INIT
    schedule act only as error locations for the ideal preparation.
    """

    def __init__(self, layout: CodeLayout, reset_mode: str = "RESET"):
        self.layout = layout
        self.reset_mode = reset_mode
        self.cycle_schedule = build_cycle_schedule(layout, reset_mode)
        self.init_schedule = build_init_schedule(layout, reset_mode)
        self.final_schedules = {b: build_final_readout(layout, b) for b in ("Z", "X")}
        self._cycle = _compile(self.cycle_schedule)
        self._init = _compile(self.init_schedule)
        self._final = {b: _compile(s) for b, s in self.final_schedules.items()}
        self._base = prepare_logical_zero(layout)
        self.reference_outcomes = self._noiseless_reference()

    # exposure for fault-enumeration clients
    @property
    def cycle_slots(self) -> list[FaultSlot]:
        return self._cycle.slots

    @property
    def init_slots(self) -> list[FaultSlot]:
        return self._init.slots

    def final_slots(self, basis: str = "Z") -> list[FaultSlot]:
        return self._final[basis].slots

    def fresh_state(self) -> Tableau:
        return self._base.copy()

    def _noiseless_reference(self) -> dict:
        m = self.layout.n_tiles
        anc = np.zeros(2 * m, dtype=np.uint8)
        flg = np.zeros(2 * m, dtype=np.uint8)
        tab = self.fresh_state()
        self._run_program(tab, self._init, faults=(), rng=None)
        self._run_cycle(tab, faults=(), rng=None, anc_out=anc, flag_out=flg)
        if anc.any() or flg.any():
            raise AssertionError("noiseless first-cycle outcomes are not all zero")
        return {"ancilla": anc, "flag": flg}

    def _run_program(self, tab: Tableau, program: _Program, faults, rng,
                     anc_out=None, flag_out=None, data_out=None,
                     insert_after: dict | None = None, fault_sink=None) -> None:
        m = self.layout.n_tiles
        by_slot = dict(faults)
        flips: dict[int, set[int]] = {}
        paulis: dict[int, list[tuple[int, str, str]]] = {}
        for idx, variant in by_slot.items():
            slot = program.slots[idx]
            if slot.kind == "flip":
                flips.setdefault(slot.step, set()).add(slot.qubits[0])
                if fault_sink is not None:
                    fault_sink.append((slot.step, slot.qubits, "flip"))
            elif slot.kind == "pauli1":
                name = _PAULI1[variant]
                paulis.setdefault(slot.step, []).append((slot.qubits[0], name, slot.channel))
                if fault_sink is not None:
                    fault_sink.append((slot.step, slot.qubits, name))
            else:
                p1, p2 = _PAULI2[variant]
                entry = paulis.setdefault(slot.step, [])
                if p1 != "I":
                    entry.append((slot.qubits[0], p1, "cphase"))
                if p2 != "I":
                    entry.append((slot.qubits[1], p2, "cphase"))
                if fault_sink is not None:
                    fault_sink.append((slot.step, slot.qubits, p1 + p2))
        for step in program.steps:
            if step.h_qubits:
                tab.h_layer(step.h_qubits)
            if step.cz_pairs:
                tab.cz_layer(step.cz_pairs)
            for q in step.resets:
                tab.reset(q, rng=rng)
            step_flips = flips.get(step.index, ())
            for op in step.measures:
                q = op.qubits[0]
                out = tab.measure_z(q, rng=rng)
                if op.reset and out:
                    tab.apply_pauli(q, "X")
                bit = out ^ (1 if q in step_flips else 0)
                kind, idx2 = op.record
                if kind == "x_synd":
                    anc_out[idx2] = bit
                elif kind == "z_synd":
                    anc_out[m + idx2] = bit
                elif kind == "x_flag":
                    flag_out[idx2] = bit
                elif kind == "z_flag":
                    flag_out[m + idx2] = bit
                elif kind == "data":
                    data_out[idx2] = bit
            for q, name, _channel in paulis.get(step.index, ()):
                tab.apply_pauli(q, name)
            if insert_after is not None:
                for q, name in insert_after.get(step.index, ()):
                    tab.apply_pauli(q, name)

    def _run_cycle(self, tab, faults, rng, anc_out, flag_out, insert_after=None, fault_sink=None):
        self._run_program(tab, self._cycle, faults, rng, anc_out=anc_out,
                          flag_out=flag_out, insert_after=insert_after, fault_sink=fault_sink)

    def _run_final(self, tab, basis, faults, rng, data_out, fault_sink=None):
        self._run_program(tab, self._final[basis], faults, rng, data_out=data_out, fault_sink=fault_sink)

    def run(self, T: int, noise: NoiseParams, seed: int | None = None, rng=None,
            forced_faults: dict | None = None, final_basis: str = "Z") -> RawRun:
        """One experiment: ideal |0_L> prep, noisy init/cycles/readout.

        ``forced_faults`` overrides sampling entirely: a dict with keys
        "init", ("cycle", t) for 1-based t, and "final", each a list of
        (slot_index, variant).
        """
        if T < 1:
            raise ValueError("T must be >= 1")
        if rng is None:
            rng = rng_for_sample(0 if seed is None else seed, 0)
        m = self.layout.n_tiles
        anc = np.zeros((T, 2 * m), dtype=np.uint8)
        flg = np.zeros((T, 2 * m), dtype=np.uint8)
        data = np.zeros(self.layout.n_data, dtype=np.uint8)
        log: list = []
        tab = self.fresh_state()

        def faults_for(program: _Program, key):
            if forced_faults is not None:
                return forced_faults.get(key, [])
            return inject_errors(None, noise, rng, slots=program.slots)

        sink = log if noise.p_error > 0 or forced_faults else None
        self._run_program(tab, self._init, faults_for(self._init, "init"), rng, fault_sink=sink)
        for t in range(T):
            self._run_cycle(tab, faults_for(self._cycle, ("cycle", t + 1)), rng,
                            anc_out=anc[t], flag_out=flg[t], fault_sink=sink)
        self._run_final(tab, final_basis, faults_for(self._final[final_basis], "final"),
                        rng, data_out=data, fault_sink=sink)
        return RawRun(anc, flg, data, log, seed, T, self.reset_mode, final_basis)

    def run_branching(self, T_max: int, noise: NoiseParams, seed: int | None = None,
                      rng=None, final_basis: str = "Z"):
        """Cycle loop that branches a noisy final readout after every cycle.

        Returns (ancilla_bits, flag_bits, data_bits) where data_bits has
        shape (T_max, n_data): row t is the readout branched after cycle t+1.
        """
        if rng is None:
            rng = rng_for_sample(0 if seed is None else seed, 0)
        m = self.layout.n_tiles
        anc = np.zeros((T_max, 2 * m), dtype=np.uint8)
        flg = np.zeros((T_max, 2 * m), dtype=np.uint8)
        data = np.zeros((T_max, self.layout.n_data), dtype=np.uint8)
        tab = self.fresh_state()
        self._run_program(tab, self._init, inject_errors(None, noise, rng, slots=self._init.slots), rng)
        final_prog = self._final[final_basis]
        for t in range(T_max):
            self._run_cycle(tab, inject_errors(None, noise, rng, slots=self._cycle.slots), rng,
                            anc_out=anc[t], flag_out=flg[t])
            branch = tab.copy()
            self._run_final(branch, final_basis,
                            inject_errors(None, noise, rng, slots=final_prog.slots),
                            rng, data_out=data[t])
        return anc, flg, data

    def probe_syndrome(self, tab: Tableau) -> np.ndarray:
        """Check-operator signs at a cycle boundary (data frame rotated).

        Returns 2m bits ordered like the syndrome vector: X-check bits are
        read through physical Z-type operators because the boundary state
        carries the Hadamard frame, and vice versa.
        """
        n = self.layout.total_qubits
        m = self.layout.n_tiles
        out = np.zeros(2 * m, dtype=np.uint8)
        for tile in self.layout.tiles:
            bits = np.zeros(n, dtype=np.uint8)
            bits[list(tile.data)] = 1
            zero = np.zeros(n, dtype=np.uint8)
            x_sign, det1 = tab.measure_pauli(zero, bits)   # physical Z_T -> X check
            z_sign, det2 = tab.measure_pauli(bits, zero)   # physical X_T -> Z check
            if not (det1 and det2):
                raise AssertionError("syndrome probe hit a random measurement")
            out[tile.index] = x_sign
            out[m + tile.index] = z_sign
        return out


def run_experiment(layout: CodeLayout, T: int, noise: NoiseParams, seed: int,
                   reset_mode: str = "RESET", final_basis: str = "Z") -> RawRun:
    """Convenience wrapper: deterministic in (layout, T, noise, seed)."""
    runner = Runner(layout, reset_mode)
    return runner.run(T, noise, seed=seed, rng=rng_for_sample(seed, 0), final_basis=final_basis)


def format_fault_log(raw: RawRun) -> str:
    """Debug dump of the sampled faults, one line per fault."""
    lines = [f"# T={raw.T} seed={raw.seed} reset_mode={raw.reset_mode} faults={len(raw.fault_log)}"]
    for step, qubits, what in raw.fault_log:
        lines.append(f"step {step:3d}  qubits {','.join(map(str, qubits)):<7s}  {what}")
    return "\n".join(lines) + "\n"
