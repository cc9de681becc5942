"""Pure-Python fallback for the hot counting kernels.

Mirrors entrodyn._kernels exactly: same candidate order, same comparisons,
same guard band, so counts and witness sets are bit-identical between the
two backends.  Used automatically when the compiled extension is missing.
"""

from __future__ import annotations

import numpy as np

BACKEND = "pure"


def greedy_separated_coords(orbits: np.ndarray, n: int, eps: float,
                            scale: float, guard: float) -> np.ndarray:
    """First-fit maximal separated subset of a coordinate net.

    ``orbits`` has shape (N, S, D) with wrapped coordinates in [0, 1); the
    Bowen distance over the first ``n`` steps is scale * min-wrap for D = 1
    and scale * max-coordinate-wrap for D = 2.  A candidate is kept when
    every already-kept point exceeds eps + guard at some step.  Returns the
    kept indices in scan order.
    """
    N = orbits.shape[0]
    D = orbits.shape[2]
    thr = eps + guard
    raw_thr = thr / scale  # base-coordinate radius that can still reject

    # Kept points are bucketed on their base position so each candidate only
    # scans kept points within one cell of its own cell.
    cells = int(1.0 / raw_thr) if raw_thr > 0 else 1
    cells = max(1, min(cells, 1024))
    use_grid = cells >= 4

    heads = np.full(cells ** D if use_grid else 1, -1, dtype=np.int64)
    nxt = np.full(N, -1, dtype=np.int64)
    kept: list[int] = []

    base = orbits[:, 0, :]

    def cell_of(q: int) -> int:
        cx = int(base[q, 0] * cells)
        if cx >= cells:
            cx = cells - 1
        if D == 1:
            return cx
        cy = int(base[q, 1] * cells)
        if cy >= cells:
            cy = cells - 1
        return cx * cells + cy

    def rejected_by(p: int, q: int) -> bool:
        # true when all first n steps stay within thr (p and q not separated)
        for j in range(n):
            if D == 1:
                f = abs(orbits[p, j, 0] - orbits[q, j, 0])
                d = scale * min(f, 1.0 - f)
            else:
                f0 = abs(orbits[p, j, 0] - orbits[q, j, 0])
                f1 = abs(orbits[p, j, 1] - orbits[q, j, 1])
                w0 = min(f0, 1.0 - f0)
                w1 = min(f1, 1.0 - f1)
                d = scale * (w0 if w0 > w1 else w1)
            if d > thr:
                return False
        return True

    for q in range(N):
        keep = True
        if use_grid:
            cq = cell_of(q)
            cx, cy = divmod(cq, cells) if D == 2 else (cq, 0)
            for dx in (-1, 0, 1):
                ax = (cx + dx) % cells
                for dy in (-1, 0, 1) if D == 2 else (0,):
                    if D == 2:
                        c = ax * cells + ((cy + dy) % cells)
                    else:
                        c = ax
                    p = heads[c]
                    while p != -1:
                        if rejected_by(p, q):
                            keep = False
                            break
                        p = nxt[p]
                    if not keep:
                        break
                if not keep:
                    break
        else:
            for p in kept:
                if rejected_by(p, q):
                    keep = False
                    break
        if keep:
            kept.append(q)
            if use_grid:
                c = cell_of(q)
                nxt[q] = heads[c]
                heads[c] = q
    return np.asarray(kept, dtype=np.int64)


def greedy_separated_finite(orbit_idx: np.ndarray, n: int, dmat: np.ndarray,
                            eps: float, guard: float) -> np.ndarray:
    """Finite-model variant: orbits are label indices into a distance matrix."""
    N = orbit_idx.shape[0]
    thr = eps + guard
    kept: list[int] = []
    for q in range(N):
        keep = True
        for p in kept:
            separated = False
            for j in range(n):
                if dmat[orbit_idx[p, j], orbit_idx[q, j]] > thr:
                    separated = True
                    break
            if not separated:
                keep = False
                break
        if keep:
            kept.append(q)
    return np.asarray(kept, dtype=np.int64)
