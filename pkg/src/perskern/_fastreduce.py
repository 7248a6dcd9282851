"""Numba kernels for flag-complex enumeration and Z/2 boundary reduction."""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def count_triangles(dm, threshold):
    n = dm.shape[0]
    count = 0
    for i in range(n):
        for j in range(i + 1, n):
            if dm[i, j] > threshold:
                continue
            for k in range(j + 1, n):
                if dm[i, k] <= threshold and dm[j, k] <= threshold:
                    count += 1
    return count


@njit(cache=True)
def fill_triangles(dm, threshold, verts, radii):
    n = dm.shape[0]
    t = 0
    for i in range(n):
        for j in range(i + 1, n):
            dij = dm[i, j]
            if dij > threshold:
                continue
            for k in range(j + 1, n):
                dik = dm[i, k]
                djk = dm[j, k]
                if dik <= threshold and djk <= threshold:
                    diam = dij
                    if dik > diam:
                        diam = dik
                    if djk > diam:
                        diam = djk
                    verts[t, 0] = i
                    verts[t, 1] = j
                    verts[t, 2] = k
                    radii[t] = diam
                    t += 1
    return t


def _debruijn_table():
    magic = 0x03F79D71B4CB0A89
    table = np.zeros(64, dtype=np.int64)
    for k in range(64):
        table[(((1 << k) * magic) & 0xFFFFFFFFFFFFFFFF) >> 58] = k
    return table


_DEBRUIJN = _debruijn_table()
_DEBRUIJN_MAGIC = np.uint64(0x03F79D71B4CB0A89)


@njit(inline="always")
def _highest_bit(word):
    hb = 0
    w = word
    if w & np.uint64(0xFFFFFFFF00000000) != np.uint64(0):
        hb += 32
        w >>= np.uint64(32)
    if w & np.uint64(0xFFFF0000) != np.uint64(0):
        hb += 16
        w >>= np.uint64(16)
    if w & np.uint64(0xFF00) != np.uint64(0):
        hb += 8
        w >>= np.uint64(8)
    if w & np.uint64(0xF0) != np.uint64(0):
        hb += 4
        w >>= np.uint64(4)
    if w & np.uint64(0xC) != np.uint64(0):
        hb += 2
        w >>= np.uint64(2)
    if w & np.uint64(0x2) != np.uint64(0):
        hb += 1
    return hb


@njit(cache=True)
def reduce_boundary(facets, n_rows, cleared):
    """Left-to-right column reduction of one boundary-matrix block over Z/2.

    ``facets[j]`` holds the ascending row indices of column j's initial
    entries; columns flagged in ``cleared`` are skipped (known to reduce to
    zero). Returns the pivot row of each column, -1 for zero columns.

    The working column lives in a dense bitset: adding a stored pivot column
    is one XOR per entry, and because every added entry lies below the pivot
    it cancels, the next pivot is found by a strictly downward scan. Reduced
    pivot columns are stored sparsely (ascending row indices) in a
    grow-on-demand pool for reuse by later columns.
    """
    m, width = facets.shape
    pivot_row = np.full(m, -1, dtype=np.int64)
    owner = np.full(n_rows, -1, dtype=np.int64)
    red_start = np.zeros(n_rows, dtype=np.int64)
    red_len = np.zeros(n_rows, dtype=np.int64)
    pool = np.empty(4 * m + 16, dtype=np.int32)
    pool_used = 0

    one = np.uint64(1)
    zero = np.uint64(0)
    n_words = (n_rows + 63) // 64 + 1
    bits = np.zeros(n_words, dtype=np.uint64)
    touched = np.empty(4096, dtype=np.int64)
    collect = np.empty(n_rows + 1, dtype=np.int32)

    for j in range(m):
        if cleared[j]:
            continue
        nt = 0
        top = 0
        for p in range(width):
            e = facets[j, p]
            w = e >> 6
            bits[w] ^= one << np.uint64(e & 63)
            touched[nt] = w
            nt += 1
            if e > top:
                top = e
        cw = top >> 6
        while True:
            piv = -1
            wi = cw
            while wi >= 0:
                if bits[wi] != zero:
                    piv = wi * 64 + _highest_bit(bits[wi])
                    break
                wi -= 1
            if piv < 0:
                break  # column reduced to zero; bitset is already clean
            cw = wi
            own = owner[piv]
            if own < 0:
                owner[piv] = j
                pivot_row[j] = piv
                # canonical ascending entries from the bitset
                k = 0
                for wq in range(cw + 1):
                    word = bits[wq]
                    base = wq * 64
                    while word != zero:
                        low_bit = word & (~word + one)
                        idx = _DEBRUIJN[(low_bit * _DEBRUIJN_MAGIC) >> np.uint64(58)]
                        collect[k] = base + idx
                        k += 1
                        word ^= low_bit
                if pool_used + k > pool.shape[0]:
                    new_cap = pool.shape[0] * 2
                    while new_cap < pool_used + k:
                        new_cap *= 2
                    new_pool = np.empty(new_cap, dtype=np.int32)
                    new_pool[:pool_used] = pool[:pool_used]
                    pool = new_pool
                red_start[piv] = pool_used
                red_len[piv] = k
                for p in range(k):
                    pool[pool_used + p] = collect[p]
                pool_used += k
                for t in range(nt):
                    bits[touched[t]] = zero
                break
            # add the column that owns this pivot; its top entry cancels piv
            os_ = red_start[piv]
            ol = red_len[piv]
            if nt + ol > touched.shape[0]:
                new_cap = touched.shape[0] * 2
                while new_cap < nt + ol:
                    new_cap *= 2
                new_touched = np.empty(new_cap, dtype=np.int64)
                new_touched[:nt] = touched[:nt]
                touched = new_touched
            for p in range(ol):
                e = pool[os_ + p]
                w = e >> 6
                bits[w] ^= one << np.uint64(e & 63)
                touched[nt] = w
                nt += 1
    return pivot_row
