"""Dense GF(2) linear algebra on small uint8 matrices."""

from __future__ import annotations

import numpy as np


def gf2_rref(mat: np.ndarray, pivot_order: list[int] | None = None):
    """Reduced row echelon form over GF(2).

    Returns (rref, pivot_cols) where pivot_cols[i] is the pivot column of
    row i.  ``pivot_order`` gives the column preference used when choosing
    pivots; columns earlier in the list are picked first.
    """
    work = np.array(mat, dtype=np.uint8) % 2
    n_rows, n_cols = work.shape
    order = list(range(n_cols)) if pivot_order is None else list(pivot_order)
    pivots: list[int] = []
    used_cols: set[int] = set()
    for row in range(n_rows):
        pivot_col = -1
        for col in order:
            if col in used_cols:
                continue
            if work[row, col]:
                pivot_col = col
                break
        if pivot_col < 0:
            # try to swap up a later row that has a usable pivot
            for other in range(row + 1, n_rows):
                for col in order:
                    if col not in used_cols and work[other, col]:
                        work[[row, other]] = work[[other, row]]
                        pivot_col = col
                        break
                if pivot_col >= 0:
                    break
        if pivot_col < 0:
            pivots.append(-1)
            continue
        used_cols.add(pivot_col)
        pivots.append(pivot_col)
        hits = work[:, pivot_col].astype(bool)
        hits[row] = False
        work[hits] ^= work[row]
    return work, pivots


def gf2_rank(mat: np.ndarray) -> int:
    _, pivots = gf2_rref(mat)
    return sum(1 for p in pivots if p >= 0)


def gf2_solve(mat: np.ndarray, rhs: np.ndarray, pivot_order: list[int] | None = None) -> np.ndarray | None:
    """One particular solution of ``mat @ x = rhs`` over GF(2), or None.

    The solution sets only pivot variables; with ``pivot_order`` sorted by
    ascending column weight this tends to produce low-weight solutions.
    """
    mat = np.asarray(mat, dtype=np.uint8) % 2
    rhs = np.asarray(rhs, dtype=np.uint8) % 2
    aug = np.concatenate([mat, rhs[:, None]], axis=1)
    if pivot_order is None:
        pivot_order = list(range(mat.shape[1]))
    rref, pivots = gf2_rref(aug, pivot_order=pivot_order)
    x = np.zeros(mat.shape[1], dtype=np.uint8)
    for row, col in enumerate(pivots):
        if col < 0 or col == mat.shape[1]:
            if rref[row, -1]:
                return None  # inconsistent row 0 = 1
            continue
        x[col] = rref[row, -1]
    if np.any((mat @ x) % 2 != rhs):
        return None
    return x


def gf2_inv(mat: np.ndarray) -> np.ndarray:
    """Inverse of a square GF(2) matrix; raises ValueError if singular."""
    mat = np.asarray(mat, dtype=np.uint8) % 2
    n = mat.shape[0]
    if mat.shape != (n, n):
        raise ValueError("matrix must be square")
    aug = np.concatenate([mat, np.eye(n, dtype=np.uint8)], axis=1)
    work = aug.copy()
    row = 0
    for col in range(n):
        pivot = None
        for r in range(row, n):
            if work[r, col]:
                pivot = r
                break
        if pivot is None:
            raise ValueError("singular GF(2) matrix")
        work[[row, pivot]] = work[[pivot, row]]
        hits = work[:, col].astype(bool)
        hits[row] = False
        work[hits] ^= work[row]
        row += 1
    return work[:, n:]
