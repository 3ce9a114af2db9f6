"""Dual solver for the whitened soft-margin SVM with a free intercept.

The primal being solved is

    min_{w,b}  0.5 ||w||^2 + sum_i C_i [1 - y_i (w^T z_i + b)]_+

whose dual is ``min_a 0.5 a^T Q a - sum(a)`` over ``0 <= a_i <= C_i`` with
the equality constraint ``sum_i a_i y_i = 0`` forced by the unpenalized
intercept.  Single-coordinate moves would break the constraint, so
coordinate descent proceeds in pairs.  Three phases share one O(n p)
scan primitive:

1. randomized pair sweeps move the bulk of the mass to the box bounds;
2. each further scan collects the most violating candidates on both
   sides and pair steps run inside that working set until it is
   internally optimal;
3. iteration stops when the KKT gap

       max_{i in I_up} (y_i - w^T z_i) - min_{j in I_low} (y_j - w^T z_j)

   drops below the tolerance.

The kernel is serial and, for identical inputs, bit-deterministic (sweep
order comes from a fixed seed).
"""

from __future__ import annotations

import numpy as np
from numba import njit

_NEG = -1e300
_POS = 1e300


@njit(cache=True, inline="always")
def _is_up(y_t, alpha_t, C_t):
    if y_t > 0.0:
        return alpha_t < C_t * (1.0 - 1e-12)
    return alpha_t > 1e-12 * C_t


@njit(cache=True, inline="always")
def _is_low(y_t, alpha_t, C_t):
    if y_t < 0.0:
        return alpha_t < C_t * (1.0 - 1e-12)
    return alpha_t > 1e-12 * C_t


@njit(cache=True)
def _pair_step(Z, y, alpha, C, w, i, j):
    """Optimal feasible move along (y_i e_i, -y_j e_j); returns |delta|."""
    p = Z.shape[1]
    fi = y[i]
    fj = y[j]
    d = 0.0
    for c in range(p):
        zi = Z[i, c]
        zj = Z[j, c]
        fi -= zi * w[c]
        fj -= zj * w[c]
        d += (zi - zj) * (zi - zj)
    s = fi - fj

    if y[i] > 0.0:
        cap_pos_i = C[i] - alpha[i]
        cap_neg_i = alpha[i]
    else:
        cap_pos_i = alpha[i]
        cap_neg_i = C[i] - alpha[i]
    if y[j] > 0.0:
        cap_pos_j = alpha[j]
        cap_neg_j = C[j] - alpha[j]
    else:
        cap_pos_j = C[j] - alpha[j]
        cap_neg_j = alpha[j]
    hi = min(cap_pos_i, cap_pos_j)
    lo = min(cap_neg_i, cap_neg_j)

    if d > 1e-300:
        delta = s / d
        if delta > hi:
            delta = hi
        elif delta < -lo:
            delta = -lo
    else:
        # identical points: the objective is linear along the move
        if s > 0.0:
            delta = hi
        elif s < 0.0:
            delta = -lo
        else:
            delta = 0.0
    if delta == 0.0:
        return 0.0

    ai = alpha[i] + y[i] * delta
    aj = alpha[j] - y[j] * delta
    # clamp round-off so box membership tests stay exact
    if ai < 0.0:
        ai = 0.0
    elif ai > C[i]:
        ai = C[i]
    if aj < 0.0:
        aj = 0.0
    elif aj > C[j]:
        aj = C[j]
    alpha[i] = ai
    alpha[j] = aj
    for c in range(p):
        w[c] += delta * (Z[i, c] - Z[j, c])
    return abs(delta)


@njit(cache=True)
def _score_all(Z, y, w, f_all):
    """Fill f_all[t] = y_t - w^T z_t (one O(n p) pass)."""
    n, p = Z.shape
    for t in range(n):
        f = y[t]
        for c in range(p):
            f -= Z[t, c] * w[c]
        f_all[t] = f


@njit(cache=True)
def _subset_solve(Z, y, alpha, C, w, S, tol):
    """Drive the working set S to internal optimality.

    Runs maximal-violating-pair steps restricted to S.  The subset Gram
    matrix is cached once, so after the O(|S| p) setup each step costs
    O(|S| + p): selection over the cached violation values, an O(p)
    update of the global ``w``, and a rank-two Gram-row update of the
    cached values.
    """
    ns = S.shape[0]
    p = Z.shape[1]
    G = np.empty((ns, ns))
    f_vals = np.empty(ns)
    for a in range(ns):
        ta = S[a]
        f = y[ta]
        for c in range(p):
            f -= Z[ta, c] * w[c]
        f_vals[a] = f
        for bq in range(a + 1):
            tb = S[bq]
            acc = 0.0
            for c in range(p):
                acc += Z[ta, c] * Z[tb, c]
            G[a, bq] = acc
            G[bq, a] = acc

    max_iter = 50 * ns
    for _ in range(max_iter):
        best_up = _NEG
        best_low = _POS
        a_best = -1
        b_best = -1
        for s in range(ns):
            t = S[s]
            if _is_up(y[t], alpha[t], C[t]) and f_vals[s] > best_up:
                best_up = f_vals[s]
                a_best = s
            if _is_low(y[t], alpha[t], C[t]) and f_vals[s] < best_low:
                best_low = f_vals[s]
                b_best = s
        if a_best < 0 or b_best < 0 or a_best == b_best:
            break
        if best_up - best_low < tol:
            break
        i = S[a_best]
        j = S[b_best]

        d = G[a_best, a_best] + G[b_best, b_best] - 2.0 * G[a_best, b_best]
        s_val = f_vals[a_best] - f_vals[b_best]
        if y[i] > 0.0:
            cap_pos_i = C[i] - alpha[i]
            cap_neg_i = alpha[i]
        else:
            cap_pos_i = alpha[i]
            cap_neg_i = C[i] - alpha[i]
        if y[j] > 0.0:
            cap_pos_j = alpha[j]
            cap_neg_j = C[j] - alpha[j]
        else:
            cap_pos_j = C[j] - alpha[j]
            cap_neg_j = alpha[j]
        hi = min(cap_pos_i, cap_pos_j)
        lo = min(cap_neg_i, cap_neg_j)
        if d > 1e-300:
            delta = s_val / d
            if delta > hi:
                delta = hi
            elif delta < -lo:
                delta = -lo
        else:
            delta = hi if s_val > 0.0 else (-lo if s_val < 0.0 else 0.0)
        if delta == 0.0:
            break
        ai = alpha[i] + y[i] * delta
        aj = alpha[j] - y[j] * delta
        if ai < 0.0:
            ai = 0.0
        elif ai > C[i]:
            ai = C[i]
        if aj < 0.0:
            aj = 0.0
        elif aj > C[j]:
            aj = C[j]
        alpha[i] = ai
        alpha[j] = aj
        for c in range(p):
            w[c] += delta * (Z[i, c] - Z[j, c])
        for s in range(ns):
            f_vals[s] -= delta * (G[s, a_best] - G[s, b_best])
    return 0


@njit(cache=True)
def smo_solve(Z, y, C, tol, max_passes, seed):
    """Solve the dual; returns (alpha, w, b, gap, passes).

    ``b`` is the intercept of the decision function ``w^T z + b``.  A pass
    is one O(n) sweep over the data.  Each round scores every point,
    splits the KKT violators into the two sides, and either pair-steps a
    random matching of the sides (bulk phase) or, once few violators
    remain, runs the Gram-cached working-set solve to the tolerance.
    """
    n, p = Z.shape
    alpha = np.zeros(n)
    w = np.zeros(p)
    np.random.seed(seed)

    f_all = np.empty(n)
    up_list = np.empty(n, dtype=np.int64)
    low_list = np.empty(n, dtype=np.int64)
    subset_cap = n if n < 32 else min(768, max(128, n // 32))

    passes = 0
    gap = _POS

    while passes < max_passes:
        _score_all(Z, y, w, f_all)
        passes += 1
        m_up = _NEG
        m_low = _POS
        for t in range(n):
            f = f_all[t]
            if f > m_up and _is_up(y[t], alpha[t], C[t]):
                m_up = f
            if f < m_low and _is_low(y[t], alpha[t], C[t]):
                m_low = f
        if m_up <= _NEG or m_low >= _POS:
            gap = 0.0
            break
        gap = m_up - m_low
        if gap < tol:
            break
        # violators relative to the midpoint of the KKT interval
        mid = 0.5 * (m_up + m_low)
        margin = 0.25 * min(gap, tol)
        n_up = 0
        n_low = 0
        for t in range(n):
            f = f_all[t]
            if f > mid + margin and _is_up(y[t], alpha[t], C[t]):
                up_list[n_up] = t
                n_up += 1
            elif f < mid - margin and _is_low(y[t], alpha[t], C[t]):
                low_list[n_low] = t
                n_low += 1
        if n_up == 0 or n_low == 0:
            # midpoint split failed (one-sided round-off); finish on the
            # extreme pair alone
            i_best = -1
            j_best = -1
            for t in range(n):
                if f_all[t] >= m_up and _is_up(y[t], alpha[t], C[t]):
                    i_best = t
                if f_all[t] <= m_low and _is_low(y[t], alpha[t], C[t]):
                    j_best = t
            if i_best < 0 or j_best < 0 or i_best == j_best:
                break
            if _pair_step(Z, y, alpha, C, w, i_best, j_best) == 0.0:
                break
            continue
        if n_up + n_low <= subset_cap:
            S = np.concatenate((up_list[:n_up], low_list[:n_low]))
            _subset_solve(Z, y, alpha, C, w, S, tol)
            passes += 1
            continue
        # bulk phase: random matching of up-side against low-side violators
        np.random.shuffle(up_list[:n_up])
        np.random.shuffle(low_list[:n_low])
        for r in range(min(n_up, n_low)):
            _pair_step(Z, y, alpha, C, w, up_list[r], low_list[r])
        passes += 1

    # rebuild w from alpha in fixed index order to shed per-step drift
    for c in range(p):
        w[c] = 0.0
    for t in range(n):
        a = alpha[t]
        if a != 0.0:
            ya = y[t] * a
            for c in range(p):
                w[c] += ya * Z[t, c]

    # intercept: average of y_t - w^T z_t over free vectors, else midpoint
    # of the KKT interval
    b_sum = 0.0
    n_free = 0
    m_up = _NEG
    m_low = _POS
    for t in range(n):
        f = y[t]
        for c in range(p):
            f -= Z[t, c] * w[c]
        at_lower = alpha[t] <= 1e-12 * C[t]
        at_upper = alpha[t] >= C[t] * (1.0 - 1e-12)
        if not at_lower and not at_upper:
            b_sum += f
            n_free += 1
        up = (y[t] > 0.0 and not at_upper) or (y[t] < 0.0 and not at_lower)
        low = (y[t] < 0.0 and not at_upper) or (y[t] > 0.0 and not at_lower)
        if up and f > m_up:
            m_up = f
        if low and f < m_low:
            m_low = f
    if n_free > 0:
        b = b_sum / n_free
    elif m_up > _NEG and m_low < _POS:
        b = 0.5 * (m_up + m_low)
    else:
        b = 0.0
    return alpha, w, b, gap, passes
