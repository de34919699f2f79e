"""Lookup-table decoder built from exhaustive single-fault enumeration.

Every single circuit fault (each Pauli at each gate/idle/prep/reset slot,
every measurement flip) is simulated at several distances from the end of
the run.  Each fault's observable signature, the time-aligned motif of
nonzero (delta_s, flags) rows plus the final increment, maps to its true
parity; colliding signatures take the majority.  Unseen signatures fall
back to the logical parity of the pure error of the observed final
increment.  Built for d=3, where this decoder is the fault-tolerance
oracle: it must decode every single fault correctly.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass

import numpy as np

from .layout import CodeLayout, pure_error_basis
from .records import Extractor, SyndromeSequence
from .sim import NoiseParams, Runner

_BUILD_T = 5
_BUILD_POSITIONS = (1, 2, 3, 4, 5)
_NOISELESS = NoiseParams(0.0)


def _variants(slot) -> int:
    return {"pauli1": 3, "pauli2": 15, "flip": 1}[slot.kind]


def iter_fault_instances(runner: Runner, basis: str = "Z"):
    """All (phase_key, slot_index, variant) single-fault instances."""
    for idx, slot in enumerate(runner.init_slots):
        for var in range(_variants(slot)):
            yield "init", idx, var
    for idx, slot in enumerate(runner.cycle_slots):
        for var in range(_variants(slot)):
            yield "cycle", idx, var
    for idx, slot in enumerate(runner.final_slots(basis)):
        for var in range(_variants(slot)):
            yield "final", idx, var


def _signature(rec: SyndromeSequence):
    rows = np.concatenate([rec.delta_s, rec.s_flag], axis=1)
    nz = np.nonzero(rows.any(axis=1))[0]
    if nz.size == 0:
        motif = ()
        touches_end = False
    else:
        first = int(nz[0])
        motif = tuple((int(t - first), tuple(int(b) for b in rows[t])) for t in nz)
        touches_end = bool(nz[-1] == rows.shape[0] - 1)
    return motif, touches_end, tuple(int(b) for b in rec.delta_f)


@dataclass
class ReferenceDecoder:
    layout: CodeLayout
    table: dict
    fallback_cache: dict

    def decode(self, rec: SyndromeSequence) -> int:
        key = _signature(rec)
        hit = self.table.get(key)
        if hit is not None:
            return hit
        return self._fallback(key[2])

    def _fallback(self, delta_f_key) -> int:
        cached = self.fallback_cache.get(delta_f_key)
        if cached is None:
            m = self.layout.n_tiles
            pures = pure_error_basis(self.layout)
            correction = np.zeros(self.layout.n_data, dtype=np.uint8)
            for i, bit in enumerate(delta_f_key):
                if bit:
                    correction ^= pures[m + i].x
            cached = int((correction @ self.layout.logical_z) % 2)
            self.fallback_cache[delta_f_key] = cached
        return cached


def build_reference_decoder(layout: CodeLayout, runner: Runner | None = None,
                            extractor: Extractor | None = None) -> ReferenceDecoder:
    if layout.distance != 3:
        raise ValueError("the lookup-table reference decoder targets d=3 layouts")
    if runner is None:
        runner = Runner(layout, "RESET")
    if extractor is None:
        extractor = Extractor(layout, "RESET")

    votes: dict = defaultdict(Counter)

    def register(forced):
        raw = runner.run(_BUILD_T, _NOISELESS, seed=0, forced_faults=forced)
        rec = extractor.extract(raw)
        votes[_signature(rec)][rec.p_true] += 1

    register({})
    for phase, idx, var in iter_fault_instances(runner):
        if phase == "cycle":
            for pos in _BUILD_POSITIONS:
                register({("cycle", pos): [(idx, var)]})
        else:
            register({phase: [(idx, var)]})

    table = {}
    for key, counter in votes.items():
        (p0, _), = counter.most_common(1)
        table[key] = int(p0)
    return ReferenceDecoder(layout, table, {})
