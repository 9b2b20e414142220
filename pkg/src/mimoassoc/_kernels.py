"""Numba kernels for the iteration-heavy inner loops.

Pure-python/numpy reference implementations of the same updates live in
``dual.subgradient_step`` and are tested for agreement with these kernels.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def dual_iterations(R, Rpow, allowed, S, rho, gamma_is_one, p, lam, i_start, n_iter,
                    a, b, best_dual, trace_every, trace_out, early_stop, es_window,
                    es_tol, price_floor):
    """Run projected dual subgradient iterations in place.

    BS prices are projected onto [price_floor, inf) rather than [0, inf):
    with slack user budgets (lambda_k = 0, the common case under heavy
    load) an exactly-zero BS price makes the dual blow up and the next
    subgradient unbounded.  Returns (iterations_done, best_dual,
    n_trace_rows); trace_out rows hold (iteration, dual value, best dual,
    max price change).
    """
    K, J = R.shape
    g = np.empty(K)
    jk = np.empty(K, dtype=np.int64)
    grad_p = np.empty(J)
    n_trace = 0
    window_best = best_dual
    done = 0
    for it in range(n_iter):
        i = i_start + it
        s = a / (b + i)
        # per-user argmax of R / (p + lam); ties resolved to the lowest BS index
        for k in range(K):
            best_w = -1.0
            best_j = -1
            for j in range(J):
                if not allowed[k, j]:
                    continue
                den = p[j] + lam[k]
                if den <= 0.0:
                    raise ZeroDivisionError("price sum p_j + lambda_k hit zero in subgradient step")
                w = R[k, j] / den
                if w > best_w:
                    best_w = w
                    best_j = j
            jk[k] = best_j
            g[k] = Rpow[k, best_j] / (p[best_j] + lam[k]) ** rho
        for j in range(J):
            grad_p[j] = -S[j]
        for k in range(K):
            grad_p[jk[k]] += g[k]
        max_change = 0.0
        for j in range(J):
            newp = p[j] + s * grad_p[j]
            if newp < price_floor:
                newp = price_floor
            c = abs(newp - p[j])
            if c > max_change:
                max_change = c
            p[j] = newp
        for k in range(K):
            newl = lam[k] + s * (g[k] - 1.0)
            if newl < 0.0:
                newl = 0.0
            c = abs(newl - lam[k])
            if c > max_change:
                max_change = c
            lam[k] = newl
        # dual objective at the updated prices
        d = 0.0
        for j in range(J):
            d += S[j] * p[j]
        for k in range(K):
            d += lam[k]
            beta = np.inf
            for j in range(J):
                if not allowed[k, j]:
                    continue
                v = (p[j] + lam[k]) / R[k, j]
                if v < beta:
                    beta = v
            if beta <= 0.0:
                raise ZeroDivisionError("dual objective unbounded: some beta_k hit zero")
            if gamma_is_one:
                d += -np.log(beta) - 1.0
            else:
                d += beta ** (1.0 - rho) / (rho - 1.0)
        if d < best_dual:
            best_dual = d
        done = it + 1
        if trace_every > 0 and (i + 1) % trace_every == 0:
            trace_out[n_trace, 0] = i + 1
            trace_out[n_trace, 1] = d
            trace_out[n_trace, 2] = best_dual
            trace_out[n_trace, 3] = max_change
            n_trace += 1
        if early_stop and (it + 1) % es_window == 0:
            if window_best - best_dual < es_tol:
                break
            window_best = best_dual
    return done, best_dual, n_trace


@njit(cache=True)
def _project_feasible(v, S, mask, sweeps):
    """Dykstra's alternating projections onto {alpha >= 0 on mask,
    row sums <= 1, column sums <= S}."""
    K, J = v.shape
    x = v.copy()
    q_box = np.zeros((K, J))
    q_row = np.zeros((K, J))
    q_col = np.zeros((K, J))
    for _ in range(sweeps):
        for k in range(K):
            for j in range(J):
                y = x[k, j] + q_box[k, j]
                if not mask[k, j] or y < 0.0:
                    y = 0.0
                q_box[k, j] = x[k, j] + q_box[k, j] - y
                x[k, j] = y
        for k in range(K):
            s = 0.0
            for j in range(J):
                s += x[k, j] + q_row[k, j]
            exc = (s - 1.0) / J if s > 1.0 else 0.0
            for j in range(J):
                y = x[k, j] + q_row[k, j] - exc
                q_row[k, j] = x[k, j] + q_row[k, j] - y
                x[k, j] = y
        for j in range(J):
            s = 0.0
            for k in range(K):
                s += x[k, j] + q_col[k, j]
            exc = (s - S[j]) / K if s > S[j] else 0.0
            for k in range(K):
                y = x[k, j] + q_col[k, j] - exc
                q_col[k, j] = x[k, j] + q_col[k, j] - y
                x[k, j] = y
    for k in range(K):
        for j in range(J):
            if not mask[k, j] or x[k, j] < 0.0:
                x[k, j] = 0.0
    return x


@njit(cache=True)
def _pg_utility(alpha, R, gamma):
    K, J = R.shape
    u = 0.0
    for k in range(K):
        r = 0.0
        for j in range(J):
            r += alpha[k, j] * R[k, j]
        if r <= 0.0:
            return -np.inf
        if gamma == 1.0:
            u += np.log(r)
        else:
            u += r ** (1.0 - gamma) / (1.0 - gamma)
    return u


@njit(cache=True)
def pg_ascent(alpha0, R, S, mask, gamma, iters, sweeps):
    """Projected-gradient ascent of the fairness utility over feasible
    activity matrices, with backtracking.  Returns (alpha, utility)."""
    K, J = R.shape
    alpha = _project_feasible(alpha0, S, mask, sweeps)
    f = _pg_utility(alpha, R, gamma)
    rmax = R.max()
    t = 1.0 / (rmax * rmax)
    grad = np.zeros((K, J))
    stall = 0
    for _ in range(iters):
        for k in range(K):
            r = 0.0
            for j in range(J):
                r += alpha[k, j] * R[k, j]
            w = r ** -gamma
            for j in range(J):
                grad[k, j] = w * R[k, j] if mask[k, j] else 0.0
        accepted = False
        fc = f
        cand = alpha
        for _ in range(50):
            cand = _project_feasible(alpha + t * grad, S, mask, sweeps)
            fc = _pg_utility(cand, R, gamma)
            if fc >= f:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        gain = fc - f
        alpha = cand
        f = fc
        t *= 1.4
        if gain < 1e-12 * (1.0 + abs(f)):
            stall += 1
            if stall > 30:
                break
        else:
            stall = 0
    return alpha, f


@njit(cache=True)
def deficit_sequence(weights, n_slots):
    """Largest-remaining-deficit interleaving of components; ties -> lowest index."""
    n = weights.shape[0]
    counts = np.zeros(n, dtype=np.int64)
    seq = np.empty(n_slots, dtype=np.int64)
    for t in range(1, n_slots + 1):
        best = -1.0e300
        pick = 0
        for i in range(n):
            d = weights[i] * t - counts[i]
            if d > best:
                best = d
                pick = i
        seq[t - 1] = pick
        counts[pick] += 1
    return seq
