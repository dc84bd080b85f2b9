"""Compiled inner loop of the optimal-cover dynamic program.

Components ``[l[i], r[i]]`` (sorted, each no longer than ``M``) are grouped
into consecutive runs; a run i..j is covered by one interval of length
``max(m, r[j] - l[i])`` which must not exceed ``M``.  ``f[i]`` is the least
cost of covering components i..n-1:

    f[i] = min( m**s + f[jm(i) + 1],                       span <= m
                min_{jm(i) < j <= jM(i)} (r[j] - l[i])**s + f[j + 1] )

The second minimum is answered by a Li Chao tree whose domain is the
component index i.  Candidate j is valid for a contiguous range of i, so it
is inserted as a segment once f[j + 1] is known.  For 0 <= s <= 1 two
candidates differ by a monotone function of l[i], which is the single
crossing property the tree needs.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _eval(j, i, l, r, f, s):
    return (r[j] - l[i]) ** s + f[j + 1]


@njit(cache=True, nogil=True)
def _add_line(tree, node, lo, hi, j, l, r, f, s):
    while True:
        cur = tree[node]
        if cur < 0:
            tree[node] = j
            return
        mid = (lo + hi) // 2
        if _eval(j, mid, l, r, f, s) < _eval(cur, mid, l, r, f, s):
            tree[node] = j
            j = cur
            cur = tree[node]
        if lo == hi:
            return
        if _eval(j, lo, l, r, f, s) < _eval(cur, lo, l, r, f, s):
            node, hi = 2 * node, mid
        elif _eval(j, hi, l, r, f, s) < _eval(cur, hi, l, r, f, s):
            node, lo = 2 * node + 1, mid + 1
        else:
            return


@njit(cache=True, nogil=True)
def _insert(tree, n, a, b, j, l, r, f, s, stack):
    top = 0
    stack[0, 0], stack[0, 1], stack[0, 2] = 1, 0, n - 1
    top = 1
    while top > 0:
        top -= 1
        node, lo, hi = stack[top, 0], stack[top, 1], stack[top, 2]
        if b < lo or hi < a:
            continue
        if a <= lo and hi <= b:
            _add_line(tree, node, lo, hi, j, l, r, f, s)
            continue
        mid = (lo + hi) // 2
        stack[top, 0], stack[top, 1], stack[top, 2] = 2 * node, lo, mid
        stack[top + 1, 0], stack[top + 1, 1], stack[top + 1, 2] = 2 * node + 1, mid + 1, hi
        top += 2


@njit(cache=True, nogil=True)
def _query(tree, n, i, l, r, f, s):
    node, lo, hi = 1, 0, n - 1
    best = np.inf
    arg = -1
    while True:
        cur = tree[node]
        if cur >= 0:
            v = _eval(cur, i, l, r, f, s)
            if v < best or (v == best and cur > arg):
                best = v
                arg = cur
        if lo == hi:
            return best, arg
        mid = (lo + hi) // 2
        if i <= mid:
            node, hi = 2 * node, mid
        else:
            node, lo = 2 * node + 1, mid + 1


@njit(cache=True, nogil=True)
def solve_runs(l, r, jm, order, hi_of, lo_of, m, s):
    """Return (f, last) where run starting at i ends at component last[i]."""
    n = l.shape[0]
    f = np.zeros(n + 1)
    last = np.empty(n, dtype=np.int64)
    tree = np.full(4 * n + 4, -1, dtype=np.int64)
    stack = np.empty((4 * 64 + 8, 3), dtype=np.int64)
    ms = m ** s
    ptr = 0  # position in order (candidates sorted by decreasing hi_of)
    for i in range(n - 1, -1, -1):
        while ptr < order.shape[0] and hi_of[order[ptr]] >= i:
            j = order[ptr]
            if lo_of[j] <= hi_of[j]:
                _insert(tree, n, lo_of[j], hi_of[j], j, l, r, f, s, stack)
            ptr += 1
        best = np.inf
        arg = -1
        if jm[i] >= i:
            best = ms + f[jm[i] + 1]
            arg = jm[i]
        v, j = _query(tree, n, i, l, r, f, s)
        if j >= 0 and v < best:
            best = v
            arg = j
        f[i] = best
        last[i] = arg
    return f, last
