# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled counting kernels.

Semantics match entrodyn._pure line for line: identical candidate order,
comparisons and guard band, so both backends produce bit-identical counts
and witness sets.  The hot loops run without the GIL, letting a thread pool
parallelize independent (epsilon, n) queries.
"""

import numpy as np

BACKEND = "compiled"


cdef inline double _pair_dist(const double* orbits, Py_ssize_t S, Py_ssize_t D,
                              Py_ssize_t p, Py_ssize_t q, Py_ssize_t j,
                              double scale) noexcept nogil:
    cdef double f0, f1, w0, w1
    f0 = orbits[(p * S + j) * D] - orbits[(q * S + j) * D]
    if f0 < 0:
        f0 = -f0
    w0 = f0 if f0 < 1.0 - f0 else 1.0 - f0
    if D == 1:
        return scale * w0
    f1 = orbits[(p * S + j) * D + 1] - orbits[(q * S + j) * D + 1]
    if f1 < 0:
        f1 = -f1
    w1 = f1 if f1 < 1.0 - f1 else 1.0 - f1
    return scale * (w0 if w0 > w1 else w1)


cdef inline bint _rejected_by(const double* orbits, Py_ssize_t S, Py_ssize_t D,
                              Py_ssize_t p, Py_ssize_t q, Py_ssize_t n,
                              double scale, double thr) noexcept nogil:
    cdef Py_ssize_t j
    for j in range(n):
        if _pair_dist(orbits, S, D, p, q, j, scale) > thr:
            return 0
    return 1


def greedy_separated_coords(double[:, :, ::1] orbits, Py_ssize_t n, double eps,
                            double scale, double guard):
    """First-fit maximal separated subset of a coordinate net (see _pure)."""
    cdef Py_ssize_t N = orbits.shape[0]
    cdef Py_ssize_t S = orbits.shape[1]
    cdef Py_ssize_t D = orbits.shape[2]
    cdef double thr = eps + guard
    cdef double raw_thr = thr / scale
    cdef Py_ssize_t cells
    if raw_thr > 0:
        cells = <Py_ssize_t>(1.0 / raw_thr)
    else:
        cells = 1
    if cells < 1:
        cells = 1
    if cells > 1024:
        cells = 1024
    cdef bint use_grid = cells >= 4

    cdef Py_ssize_t ncells = 1
    if use_grid:
        ncells = cells if D == 1 else cells * cells

    heads_arr = np.full(ncells, -1, dtype=np.int64)
    nxt_arr = np.full(N, -1, dtype=np.int64)
    kept_arr = np.empty(N, dtype=np.int64)
    cdef long long[::1] heads = heads_arr
    cdef long long[::1] nxt = nxt_arr
    cdef long long[::1] kept = kept_arr

    cdef const double* O = &orbits[0, 0, 0]
    cdef Py_ssize_t q, cx, cy, ax, ay, c, nkept = 0
    cdef long long p
    cdef int dx, dy
    cdef bint keep
    cdef Py_ssize_t k

    with nogil:
        for q in range(N):
            keep = 1
            if use_grid:
                cx = <Py_ssize_t>(O[q * S * D] * cells)
                if cx >= cells:
                    cx = cells - 1
                if D == 2:
                    cy = <Py_ssize_t>(O[q * S * D + 1] * cells)
                    if cy >= cells:
                        cy = cells - 1
                else:
                    cy = 0
                for dx in range(-1, 2):
                    ax = (cx + dx + cells) % cells
                    if D == 2:
                        for dy in range(-1, 2):
                            ay = (cy + dy + cells) % cells
                            c = ax * cells + ay
                            p = heads[c]
                            while p != -1:
                                if _rejected_by(O, S, D, p, q, n, scale, thr):
                                    keep = 0
                                    break
                                p = nxt[p]
                            if not keep:
                                break
                    else:
                        c = ax
                        p = heads[c]
                        while p != -1:
                            if _rejected_by(O, S, D, p, q, n, scale, thr):
                                keep = 0
                                break
                            p = nxt[p]
                    if not keep:
                        break
            else:
                for k in range(nkept):
                    if _rejected_by(O, S, D, kept[k], q, n, scale, thr):
                        keep = 0
                        break
            if keep:
                kept[nkept] = q
                nkept += 1
                if use_grid:
                    cx = <Py_ssize_t>(O[q * S * D] * cells)
                    if cx >= cells:
                        cx = cells - 1
                    if D == 2:
                        cy = <Py_ssize_t>(O[q * S * D + 1] * cells)
                        if cy >= cells:
                            cy = cells - 1
                        c = cx * cells + cy
                    else:
                        c = cx
                    nxt[q] = heads[c]
                    heads[c] = q
    return kept_arr[:nkept].copy()


def greedy_separated_finite(long long[:, ::1] orbit_idx, Py_ssize_t n,
                            double[:, ::1] dmat, double eps, double guard):
    """Finite-model variant: orbits are label indices into a distance matrix."""
    cdef Py_ssize_t N = orbit_idx.shape[0]
    cdef double thr = eps + guard
    kept_arr = np.empty(N, dtype=np.int64)
    cdef long long[::1] kept = kept_arr
    cdef Py_ssize_t q, j, k, nkept = 0
    cdef long long p
    cdef bint keep, separated
    with nogil:
        for q in range(N):
            keep = 1
            for k in range(nkept):
                p = kept[k]
                separated = 0
                for j in range(n):
                    if dmat[orbit_idx[p, j], orbit_idx[q, j]] > thr:
                        separated = 1
                        break
                if not separated:
                    keep = 0
                    break
            if keep:
                kept[nkept] = q
                nkept += 1
    return kept_arr[:nkept].copy()
