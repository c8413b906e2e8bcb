"""Compiled kernels for the tridiagonal Sturm (inertia) count.

The pivot recurrence q_i = (d_i - eps) - e^2 / q_{i-1} is evaluated in
double-double arithmetic (error-free transforms, no FMA required).  In
plain doubles the count resolves eigenvalues only to ~eps_mach * ||H||,
which at fine grids (||H|| ~ 4/(mu^2 h^2)) is far coarser than the
bisection tolerances this package promises; the compensated form pushes
that floor below 1 ulp of the eigenvalue itself.  Counting convention:
number of eigenvalues strictly below the shift.
"""

import numpy as np
from numba import njit

_SPLITTER = 134217729.0  # 2**27 + 1


@njit(inline="always")
def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


@njit(inline="always")
def _fast_two_sum(a, b):
    # requires |a| >= |b|
    s = a + b
    err = b - (s - a)
    return s, err


@njit(inline="always")
def _two_prod(a, b):
    p = a * b
    ac = _SPLITTER * a
    ah = ac - (ac - a)
    al = a - ah
    bc = _SPLITTER * b
    bh = bc - (bc - b)
    bl = b - bh
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


@njit(inline="always")
def _dd_add(xh, xl, yh, yl):
    s, e = _two_sum(xh, yh)
    e += xl + yl
    return _fast_two_sum(s, e)


@njit(inline="always")
def _dd_div(xh, xl, yh, yl):
    q1 = xh / yh
    p1, p2 = _two_prod(q1, yh)
    rh, rl = _two_sum(xh, -p1)
    rl += xl - p2 - q1 * yl
    q2 = (rh + rl) / yh
    return _fast_two_sum(q1, q2)


@njit(cache=True, nogil=True)
def sturm_counts(diag, e, shifts):
    """Count eigenvalues strictly below each shift.

    diag: (n,) diagonal; e: scalar off-diagonal; shifts: (m,).
    Near-zero pivots are replaced by -pivmin (standard bisection
    safeguard) so the count stays well defined at exact eigenvalues.
    """
    n = diag.shape[0]
    m = shifts.shape[0]
    out = np.empty(m, dtype=np.int64)
    e2h, e2l = _two_prod(e, e)
    pivmin = 1e-250 * max(abs(e), 1.0)
    for t in range(m):
        eps = shifts[t]
        cnt = 0
        qh, ql = _two_sum(diag[0], -eps)
        if abs(qh) < pivmin:
            qh = -pivmin
            ql = 0.0
        if qh < 0.0:
            cnt += 1
        for i in range(1, n):
            uh, ul = _dd_div(e2h, e2l, qh, ql)
            th, tl = _two_sum(diag[i], -eps)
            qh, ql = _dd_add(th, tl, -uh, -ul)
            if abs(qh) < pivmin:
                qh = -pivmin
                ql = 0.0
            if qh < 0.0:
                cnt += 1
        out[t] = cnt
    return out
