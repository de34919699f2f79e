"""Triangular 6,6,6 color-code layouts.

A distance-d patch is a hexagonal tiling clipped to an equilateral triangle.
Lattice sites live at integer coordinates (x, y) with y in [0, 3(d-1)/2] and
x in {y, y+2, ..., 2L-y}; each site is either a data qubit (vertex of the
tiling) or the center of a tile (face).  Every tile hosts two check qubits,
an "ancilla" and a "flag", so the patch uses (3d^2-1)/2 physical qubits.

Indexing convention: data qubits and tiles are enumerated in a single
row-major sweep starting from the triangle's top vertex (descending y,
ascending x).  Check qubits of tile t sit at indices n_data + 2t (ancilla)
and n_data + 2t + 1 (flag).  The logical X/Z representative is the bottom
row of d data qubits.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .gf2 import gf2_solve

# Direction from a tile center to each of its (up to) six data qubits,
# in fixed slot order.  Slots double as the CZ time slots of the
# measurement schedule; a data qubit sees its adjacent tiles through
# directions of a single parity class, so slot assignments never collide.
SLOT_DIRECTIONS: tuple[tuple[int, int], ...] = (
    (2, 0),    # slot 0: east
    (1, 1),    # slot 1: north-east
    (-1, 1),   # slot 2: north-west
    (-2, 0),   # slot 3: west
    (-1, -1),  # slot 4: south-west
    (1, -1),   # slot 5: south-east
)

TILE_COLORS = {0: "green", 1: "blue", 2: "red"}


@dataclass
class PauliOperator:
    """Binary symplectic Pauli: Y has both the x and z bit set."""

    x: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.uint8) % 2
        self.z = np.asarray(self.z, dtype=np.uint8) % 2
        if self.x.shape != self.z.shape:
            raise ValueError("x and z parts must have the same length")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    def commutes_with(self, other: "PauliOperator") -> bool:
        return symplectic_product(self, other) == 0

    def compose(self, other: "PauliOperator") -> "PauliOperator":
        return PauliOperator(self.x ^ other.x, self.z ^ other.z)


def symplectic_product(a: PauliOperator, b: PauliOperator) -> int:
    """0 if the Paulis commute, 1 if they anticommute."""
    return int((np.dot(a.x, b.z) + np.dot(a.z, b.x)) % 2)


@dataclass
class Tile:
    index: int
    center: tuple[int, int]
    color: str
    slots: tuple[int | None, ...]  # slot -> data qubit index (None for idle slots)
    data: tuple[int, ...]          # active data qubits, ascending
    ancilla: int
    flag: int

    @property
    def weight(self) -> int:
        return len(self.data)


@dataclass
class CodeLayout:
    distance: int
    data_coords: tuple[tuple[int, int], ...]
    tiles: tuple[Tile, ...]
    x_stabilizers: np.ndarray  # (n_tiles, n_data) uint8 supports
    z_stabilizers: np.ndarray
    logical_x: np.ndarray      # (n_data,) uint8 support
    logical_z: np.ndarray
    _pure_errors: list[PauliOperator] | None = field(default=None, repr=False)

    @property
    def n_data(self) -> int:
        return len(self.data_coords)

    @property
    def n_tiles(self) -> int:
        return len(self.tiles)

    @property
    def total_qubits(self) -> int:
        return self.n_data + 2 * self.n_tiles

    @property
    def n_syndrome_bits(self) -> int:
        """X-check bits followed by Z-check bits, one pair per tile."""
        return 2 * self.n_tiles

    def ancilla_index(self, tile: int) -> int:
        return self.n_data + 2 * tile

    def flag_index(self, tile: int) -> int:
        return self.n_data + 2 * tile + 1

    def data_class(self, qubit: int) -> int:
        """0 if the qubit's CZ slots are even (0/2/4), 1 if odd (1/3/5)."""
        for tile in self.tiles:
            for slot, q in enumerate(tile.slots):
                if q == qubit:
                    return slot % 2
        raise ValueError(f"qubit {qubit} not in any tile")

    def stabilizer_pauli(self, bit: int) -> PauliOperator:
        """Generator for syndrome bit ``bit`` over data qubits only."""
        m = self.n_tiles
        zeros = np.zeros(self.n_data, dtype=np.uint8)
        if bit < m:
            return PauliOperator(self.x_stabilizers[bit], zeros)
        return PauliOperator(zeros, self.z_stabilizers[bit - m])

    def logical_x_pauli(self) -> PauliOperator:
        return PauliOperator(self.logical_x, np.zeros(self.n_data, dtype=np.uint8))

    def logical_z_pauli(self) -> PauliOperator:
        return PauliOperator(np.zeros(self.n_data, dtype=np.uint8), self.logical_z)


def _site_kind(x: int, y: int) -> str:
    """'tile' when the site is a face center, else 'data'."""
    tile_pos = {0: 2, 1: 0, 2: 1}[y % 3]
    return "tile" if ((x - y) // 2) % 3 == tile_pos else "data"


def build_layout(d: int) -> CodeLayout:
    """Construct the distance-d triangular layout.

    Deterministic: identical d yields a bit-identical layout.
    """
    if d < 3 or d % 2 == 0:
        raise ValueError(f"distance must be an odd integer >= 3, got {d}")
    height = 3 * (d - 1) // 2

    data_index: dict[tuple[int, int], int] = {}
    tile_sites: list[tuple[int, int]] = []
    # single top-down sweep fixes both enumerations
    for y in range(height, -1, -1):
        for x in range(y, 2 * height - y + 1, 2):
            if _site_kind(x, y) == "data":
                data_index[(x, y)] = len(data_index)
            else:
                tile_sites.append((x, y))

    n_data = len(data_index)
    expected = (3 * d * d + 1) // 4
    if n_data != expected:
        raise AssertionError(f"lattice scan produced {n_data} data qubits, expected {expected}")

    tiles = []
    for t, (cx, cy) in enumerate(tile_sites):
        slots: list[int | None] = []
        for dx, dy in SLOT_DIRECTIONS:
            slots.append(data_index.get((cx + dx, cy + dy)))
        members = tuple(sorted(q for q in slots if q is not None))
        if len(members) not in (4, 6):
            raise AssertionError(f"tile at {(cx, cy)} has weight {len(members)}")
        tiles.append(
            Tile(
                index=t,
                center=(cx, cy),
                color=TILE_COLORS[cy % 3],
                slots=tuple(slots),
                data=members,
                ancilla=n_data + 2 * t,
                flag=n_data + 2 * t + 1,
            )
        )

    supports = np.zeros((len(tiles), n_data), dtype=np.uint8)
    for tile in tiles:
        supports[tile.index, list(tile.data)] = 1

    logical = np.zeros(n_data, dtype=np.uint8)
    bottom = [q for (x, y), q in data_index.items() if y == 0]
    logical[bottom] = 1
    if int(logical.sum()) != d:
        raise AssertionError("bottom-row logical representative must have weight d")

    coords = tuple(sorted(data_index, key=data_index.get))
    return CodeLayout(
        distance=d,
        data_coords=coords,
        tiles=tuple(tiles),
        x_stabilizers=supports,
        z_stabilizers=supports.copy(),
        logical_x=logical.copy(),
        logical_z=logical.copy(),
    )


def pure_error_basis(layout: CodeLayout) -> list[PauliOperator]:
    """One pure error per syndrome bit.

    Entry i anticommutes with stabilizer generator i and commutes with all
    others.  X-check bits get Z-type errors, Z-check bits X-type, so
    commutation with the same-type block is automatic.  Gaussian
    elimination prefers low-degree columns, which keeps the
    representatives local (single corner qubits at d=3).
    """
    if layout._pure_errors is not None:
        return layout._pure_errors
    supports = layout.x_stabilizers
    degrees = supports.sum(axis=0)
    pivot_order = sorted(range(layout.n_data), key=lambda q: (degrees[q], q))
    m = layout.n_tiles
    basis: list[PauliOperator] = []
    zeros = np.zeros(layout.n_data, dtype=np.uint8)
    for bit in range(2 * m):
        rhs = np.zeros(m, dtype=np.uint8)
        rhs[bit % m] = 1
        sol = gf2_solve(supports, rhs, pivot_order=pivot_order)
        if sol is None:
            raise ValueError("singular stabilizer system; malformed layout")
        if bit < m:
            basis.append(PauliOperator(zeros.copy(), sol))  # Z-type for X checks
        else:
            basis.append(PauliOperator(sol, zeros.copy()))  # X-type for Z checks
    layout._pure_errors = basis
    return basis


def syndrome_of(layout: CodeLayout, error: PauliOperator) -> np.ndarray:
    """Which check bits an error on the data qubits flips."""
    x_flips = (layout.x_stabilizers @ error.z) % 2   # X checks see Z parts
    z_flips = (layout.z_stabilizers @ error.x) % 2   # Z checks see X parts
    return np.concatenate([x_flips, z_flips]).astype(np.uint8)


def code_distance_bruteforce(layout: CodeLayout, max_weight: int, css_only: bool = False) -> int | None:
    """Minimum weight of an undetectable logical error, or None if it
    exceeds ``max_weight``.

    With ``css_only`` the enumeration is restricted to pure X-type and
    pure Z-type errors, which is exhaustive for the distance of a CSS
    code and keeps d=5 tractable.
    """
    n = layout.n_data
    x_masks = [int("".join(map(str, row[::-1])), 2) for row in layout.x_stabilizers]
    z_masks = [int("".join(map(str, row[::-1])), 2) for row in layout.z_stabilizers]
    logical_mask = int("".join(map(str, layout.logical_z[::-1])), 2)

    def commutes_all(mask: int, checks: list[int]) -> bool:
        return all((mask & c).bit_count() % 2 == 0 for c in checks)

    for weight in range(1, max_weight + 1):
        for qubits in itertools.combinations(range(n), weight):
            base = 0
            for q in qubits:
                base |= 1 << q
            if css_only:
                # X-type: must commute with Z checks; logical iff it
                # anticommutes with logical_z (symmetric for Z-type).
                if commutes_all(base, z_masks) and (base & logical_mask).bit_count() % 2 == 1:
                    return weight
                if commutes_all(base, x_masks) and (base & logical_mask).bit_count() % 2 == 1:
                    return weight
                continue
            for paulis in itertools.product("XYZ", repeat=weight):
                xm = 0
                zm = 0
                for q, p in zip(qubits, paulis):
                    if p != "Z":
                        xm |= 1 << q
                    if p != "X":
                        zm |= 1 << q
                ok = all((zm & c).bit_count() % 2 == 0 for c in x_masks)
                ok = ok and all((xm & c).bit_count() % 2 == 0 for c in z_masks)
                if not ok:
                    continue
                anti = (xm & logical_mask).bit_count() % 2
                anti |= (zm & logical_mask).bit_count() % 2
                if anti:
                    return weight
    return None


def layout_to_json(layout: CodeLayout) -> str:
    """Deterministic text export used for debugging and dataset headers."""
    doc = {
        "distance": layout.distance,
        "n_data": layout.n_data,
        "n_tiles": layout.n_tiles,
        "total_qubits": layout.total_qubits,
        "data_coords": [list(c) for c in layout.data_coords],
        "tiles": [
            {
                "index": t.index,
                "center": list(t.center),
                "color": t.color,
                "data": list(t.data),
                "ancilla": t.ancilla,
                "flag": t.flag,
            }
            for t in layout.tiles
        ],
        "logical_x": layout.logical_x.tolist(),
        "logical_z": layout.logical_z.tolist(),
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))
