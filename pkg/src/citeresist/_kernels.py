"""Compiled voltage-averaging loops.

The graph is passed as CSR arrays of the symmetric weighted adjacency.  All
kernels release the GIL so batches can run on worker threads.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _row_dot(indptr, indices, data, row, v):
    s = 0.0
    for k in range(indptr[row], indptr[row + 1]):
        s += data[k] * v[indices[k]]
    return s


@njit(cache=True, nogil=True)
def solve_pair(indptr, indices, data, node_w, p, g, eps, max_iter, in_place, history):
    """Iterate voltages from the zero start until the bound gap drops below eps.

    Returns ``(lower, upper, iterations, converged)``.  When ``history`` has
    rows, ``history[t] = (lower, upper)`` is recorded after sweep ``t + 1``.
    """
    n = node_w.shape[0]
    inv_w = 1.0 / node_w
    v = np.zeros(n)
    v[p] = 1.0
    v_new = v.copy()
    lower = 0.0
    upper = np.inf
    it = 0
    converged = False
    while it < max_iter:
        if in_place:
            for i in range(n):
                if i != p and i != g:
                    v[i] = _row_dot(indptr, indices, data, i, v) * inv_w[i]
        else:
            for i in range(n):
                if i != p and i != g:
                    v_new[i] = _row_dot(indptr, indices, data, i, v) * inv_w[i]
            v_new[p] = 1.0
            v_new[g] = 0.0
            v, v_new = v_new, v
        it += 1

        i_from_p = node_w[p] - _row_dot(indptr, indices, data, p, v)
        i_into_g = _row_dot(indptr, indices, data, g, v)
        lower = 1.0 / i_from_p if i_from_p > 0.0 else np.inf
        upper = 1.0 / i_into_g if i_into_g > 0.0 else np.inf
        if it <= history.shape[0]:
            history[it - 1, 0] = lower
            history[it - 1, 1] = upper
        if upper - lower < eps:
            converged = True
            break
    return lower, upper, it, converged


@njit(cache=True, nogil=True)
def solve_pairs(
    indptr, indices, data, node_w, ps, gs, eps, max_iter, in_place,
    out_lower, out_upper, out_iter, out_conv,
):
    no_history = np.empty((0, 2))
    for k in range(ps.shape[0]):
        lo, hi, it, conv = solve_pair(
            indptr, indices, data, node_w, ps[k], gs[k], eps, max_iter, in_place,
            no_history,
        )
        out_lower[k] = lo
        out_upper[k] = hi
        out_iter[k] = it
        out_conv[k] = conv
