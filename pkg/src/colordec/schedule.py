"""Clifford gate programs for one error-correction cycle and readout.

One cycle is exactly 20 steps.  The two check qubits of a tile alternate
roles: the ancilla runs the X-check CZ chain (flagged by its partner),
then the partner runs the Z-check chain (flagged by the ancilla).  Parity
readouts use conditional-phase gates only, so data qubits are Hadamard
conjugated around the X block ("dashed" Hadamards).  Measurements of check
qubits re-prepare them in |0> within the same step when the schedule runs
in RESET mode; the reset counts as an extra error location, not an extra
step, which is what lets both check blocks fit the 20-step budget.

Step map for a weight-6 tile (A = ancilla, F = flag partner, s0..s5 = CZ
slots of the tile's data qubits):

    step  0: CZ(A,s0)             | H(F)
    step  1: CZ(A,F)   flag open
    steps 2-5: CZ(A,s1..s4)
    step  6: CZ(A,F)   flag close
    step  7: CZ(A,s5)             | H(F)
    step  8: H(data), H(A)        | MEASURE(F)  -> X flag bit
    step  9: MEASURE(A) -> X syndrome bit       | H(F)
    step 10: CZ(F,s0)             | H(A)
    step 11: CZ(F,A)   flag open
    steps 12-15: CZ(F,s1..s4)
    step 16: CZ(F,A)   flag close
    step 17: CZ(F,s5)             | H(A)
    step 18: MEASURE(A) -> Z flag bit           | H(F)
    step 19: MEASURE(F) -> Z syndrome bit | H(A), H(data)

The trailing Hadamards prime the next cycle, so data qubits cross cycle
boundaries in the rotated frame; the initialization and final-readout
programs open and close that frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .layout import CodeLayout

N0_STEPS = 20

# CZ time slots within each half of the cycle, indexed by layout slot.
X_SLOT_STEP = {0: 0, 1: 2, 2: 3, 3: 4, 4: 5, 5: 7}
X_FLAG_STEPS = (1, 6)
Z_SLOT_STEP = {0: 10, 1: 12, 2: 13, 3: 14, 4: 15, 5: 17}
Z_FLAG_STEPS = (11, 16)


@dataclass(frozen=True)
class Op:
    kind: str                       # IDLE | PREP | H | CZ | MEASURE | RESET
    qubits: tuple[int, ...]
    reset: bool = False             # MEASURE only: reprepare |0> in-step
    record: tuple[str, int] | None = None  # routing tag for measurement bits


@dataclass(frozen=True)
class GateStep:
    index: int
    ops: tuple[Op, ...]


@dataclass(frozen=True)
class CircuitSchedule:
    kind: str                       # INIT | CYCLE | FINAL_READOUT
    reset_mode: str                 # RESET | NO_RESET
    n_qubits: int
    steps: tuple[GateStep, ...]
    basis: str | None = None        # FINAL_READOUT only
    n0_steps_per_cycle: int = N0_STEPS


def _pad_step(index: int, ops: list[Op], n_qubits: int) -> GateStep:
    used: set[int] = set()
    for op in ops:
        for q in op.qubits:
            if q in used:
                raise ValueError(f"step {index}: qubit {q} used twice")
            used.add(q)
    idle = [Op("IDLE", (q,)) for q in range(n_qubits) if q not in used]
    return GateStep(index, tuple(ops + idle))


def build_cycle_schedule(layout: CodeLayout, reset_mode: str = "RESET") -> CircuitSchedule:
    """The 20-step program measuring all X checks then all Z checks."""
    if reset_mode not in ("RESET", "NO_RESET"):
        raise ValueError(f"unknown reset_mode {reset_mode!r}")
    reset = reset_mode == "RESET"
    n = layout.total_qubits
    data = list(range(layout.n_data))
    per_step: dict[int, list[Op]] = {s: [] for s in range(N0_STEPS)}

    for tile in layout.tiles:
        a, f = tile.ancilla, tile.flag
        per_step[0].append(Op("H", (f,)))
        for slot, q in enumerate(tile.slots):
            if q is None:
                continue
            per_step[X_SLOT_STEP[slot]].append(Op("CZ", (a, q)))
            per_step[Z_SLOT_STEP[slot]].append(Op("CZ", (f, q)))
        for s in X_FLAG_STEPS:
            per_step[s].append(Op("CZ", (a, f)))
        for s in Z_FLAG_STEPS:
            per_step[s].append(Op("CZ", (f, a)))
        per_step[7].append(Op("H", (f,)))
        per_step[8].append(Op("H", (a,)))
        per_step[8].append(Op("MEASURE", (f,), reset=reset, record=("x_flag", tile.index)))
        per_step[9].append(Op("MEASURE", (a,), reset=reset, record=("x_synd", tile.index)))
        per_step[9].append(Op("H", (f,)))
        per_step[10].append(Op("H", (a,)))
        per_step[17].append(Op("H", (a,)))
        per_step[18].append(Op("MEASURE", (a,), reset=reset, record=("z_flag", tile.index)))
        per_step[18].append(Op("H", (f,)))
        per_step[19].append(Op("MEASURE", (f,), reset=reset, record=("z_synd", tile.index)))
        per_step[19].append(Op("H", (a,)))

    for q in data:
        per_step[8].append(Op("H", (q,)))
        per_step[19].append(Op("H", (q,)))

    steps = tuple(_pad_step(s, per_step[s], n) for s in range(N0_STEPS))
    if len(steps) != N0_STEPS:
        raise RuntimeError("gate packing does not fit the 20-step cycle")
    return CircuitSchedule(kind="CYCLE", reset_mode=reset_mode, n_qubits=n, steps=steps)


def build_init_schedule(layout: CodeLayout, reset_mode: str = "RESET") -> CircuitSchedule:
    """Prepare every qubit and enter the rotated frame of the first cycle."""
    n = layout.total_qubits
    prep = [Op("PREP", (q,)) for q in range(n)]
    rotate = [Op("H", (q,)) for q in range(layout.n_data)]
    rotate += [Op("H", (t.ancilla,)) for t in layout.tiles]
    steps = (
        _pad_step(0, prep, n),
        _pad_step(1, rotate, n),
    )
    return CircuitSchedule(kind="INIT", reset_mode=reset_mode, n_qubits=n, steps=steps)


def build_final_readout(layout: CodeLayout, basis: str = "Z") -> CircuitSchedule:
    """Measure every data qubit in the given basis.

    Cycles hand the data qubits over in the Hadamard-rotated frame, so the
    Z-basis program closes the frame with one Hadamard layer while the
    X-basis program measures directly.
    """
    if basis not in ("X", "Z"):
        raise ValueError(f"basis must be X or Z, got {basis!r}")
    n = layout.total_qubits
    measure = [Op("MEASURE", (q,), record=("data", q)) for q in range(layout.n_data)]
    if basis == "Z":
        rotate = [Op("H", (q,)) for q in range(layout.n_data)]
        steps = (_pad_step(0, rotate, n), _pad_step(1, measure, n))
    else:
        steps = (_pad_step(0, measure, n),)
    return CircuitSchedule(kind="FINAL_READOUT", reset_mode="RESET", n_qubits=n, steps=steps, basis=basis)


def dump_schedule(schedule: CircuitSchedule) -> str:
    """Plain-text (step, op, qubits) listing for audit."""
    lines = [f"# kind={schedule.kind} reset_mode={schedule.reset_mode} basis={schedule.basis}"]
    for step in schedule.steps:
        for op in step.ops:
            if op.kind == "IDLE":
                continue
            tag = f" reset" if op.reset else ""
            rec = f" -> {op.record[0]}[{op.record[1]}]" if op.record else ""
            lines.append(f"{step.index:3d} {op.kind:<8s} {','.join(map(str, op.qubits))}{tag}{rec}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Schedule validation: structural checks plus exhaustive hook-fault pushing.


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    max_hook_weight: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations


def _push_pauli(steps, n_qubits, start_step, qubit, pauli, layout):
    """Propagate a single Pauli frame fault through two cycles.

    The fault happens after the ops of ``start_step`` in the first cycle.
    Returns (x_bits, z_bits over data qubits in the plain frame,
    flagged_tiles, syndrome_flips).
    """
    x = [0] * n_qubits
    z = [0] * n_qubits
    if pauli in ("X", "Y"):
        x[qubit] = 1
    if pauli in ("Z", "Y"):
        z[qubit] = 1
    flagged: set[int] = set()
    synd_flips: set[tuple[str, int, int]] = set()
    for cycle in range(2):
        for step in steps:
            if cycle == 0 and step.index <= start_step:
                continue
            for op in step.ops:
                if op.kind == "H":
                    q = op.qubits[0]
                    x[q], z[q] = z[q], x[q]
                elif op.kind == "CZ":
                    a, b = op.qubits
                    z[a] ^= x[b]
                    z[b] ^= x[a]
                elif op.kind == "MEASURE":
                    q = op.qubits[0]
                    if x[q] and op.record is not None:
                        kind, tile = op.record
                        if kind in ("x_flag", "z_flag"):
                            flagged.add(tile)
                        else:
                            synd_flips.add((kind, tile, cycle))
                    if op.reset:
                        x[q] = z[q] = 0
                    else:
                        z[q] = 0
                elif op.kind in ("PREP", "RESET"):
                    q = op.qubits[0]
                    x[q] = z[q] = 0
    # close the rotated frame so weights are counted in the plain frame
    for q in range(layout.n_data):
        x[q], z[q] = z[q], x[q]
    return x[: layout.n_data], z[: layout.n_data], flagged, synd_flips


def _effective_weight(layout: CodeLayout, tile, x_bits, z_bits) -> int:
    """Data-error weight minimized over the source tile's stabilizers."""
    import numpy as np

    x = np.array(x_bits, dtype=np.uint8)
    z = np.array(z_bits, dtype=np.uint8)
    sup = np.zeros(layout.n_data, dtype=np.uint8)
    sup[list(tile.data)] = 1
    best = None
    for use_x in (0, 1):
        for use_z in (0, 1):
            xx = x ^ (sup if use_x else 0)
            zz = z ^ (sup if use_z else 0)
            w = int(np.count_nonzero(xx | zz))
            best = w if best is None else min(best, w)
    return best


def validate_schedule(layout: CodeLayout, schedule: CircuitSchedule) -> ValidationReport:
    """Structural and fault-tolerance diagnostics; report-only."""
    report = ValidationReport()
    n = schedule.n_qubits

    if schedule.kind == "CYCLE" and len(schedule.steps) != schedule.n0_steps_per_cycle:
        report.violations.append(
            f"step-count: cycle has {len(schedule.steps)} steps, expected {schedule.n0_steps_per_cycle}"
        )

    for step in schedule.steps:
        seen: dict[int, int] = {}
        for op in step.ops:
            for q in op.qubits:
                seen[q] = seen.get(q, 0) + 1
        for q, count in seen.items():
            if count > 1:
                report.violations.append(f"disjointness: step {step.index} uses qubit {q} {count} times")
        missing = set(range(n)) - set(seen)
        if missing:
            report.violations.append(f"coverage: step {step.index} leaves qubits {sorted(missing)} without ops")
        if schedule.reset_mode == "NO_RESET":
            for op in step.ops:
                if op.kind == "RESET" or (op.kind == "MEASURE" and op.reset):
                    report.violations.append(f"reset-mode: step {step.index} resets in NO_RESET schedule")

    if schedule.kind != "CYCLE":
        return report

    # Hook containment: any single Pauli fault on a check qubit must leave a
    # data error of effective weight <= 1, or raise that tile's flag.
    for tile in layout.tiles:
        for qubit in (tile.ancilla, tile.flag):
            for start in range(len(schedule.steps)):
                for pauli in ("X", "Y", "Z"):
                    xb, zb, flagged, _ = _push_pauli(
                        schedule.steps, n, start, qubit, pauli, layout
                    )
                    w = _effective_weight(layout, tile, xb, zb)
                    report.max_hook_weight = max(report.max_hook_weight, w)
                    if w > 1 and tile.index not in flagged:
                        report.violations.append(
                            f"hook: {pauli} on qubit {qubit} after step {start} leaves "
                            f"weight-{w} data error without a flag"
                        )
    return report
