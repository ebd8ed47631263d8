"""numba implementations of the hot loops.

Every function here has a twin with the same signature and semantics in
``_kernels_numpy``; ``blocknet.kernels`` picks one at import time.
"""
import math

import numpy as np
from numba import njit


@njit(cache=True)
def common_neighbor_counts(indptr, indices, rows, cols, labels, restrict):
    out = np.zeros(rows.shape[0], dtype=np.int64)
    for t in range(rows.shape[0]):
        i = rows[t]
        j = cols[t]
        a = indptr[i]
        a_end = indptr[i + 1]
        b = indptr[j]
        b_end = indptr[j + 1]
        lab = labels[i]
        if restrict and labels[j] != lab:
            continue
        count = 0
        while a < a_end and b < b_end:
            u = indices[a]
            v = indices[b]
            if u == v:
                if not restrict or labels[u] == lab:
                    count += 1
                a += 1
                b += 1
            elif u < v:
                a += 1
            else:
                b += 1
        out[t] = count
    return out


@njit(cache=True)
def _qp_row(a, b, out):
    K = a.shape[0]
    c = np.empty(K)
    top = 0
    for k in range(K):
        c[k] = -0.5 / a[k]
        if b[k] > b[top]:
            top = k
    hi = b[top]
    lo = b[top] - 1.0 / c[top]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        total = 0.0
        for k in range(K):
            v = (b[k] - mid) * c[k]
            if v > 0.0:
                total += v
        if total > 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, abs(mid)):
            break
    lam = 0.5 * (lo + hi)
    # the bracket fixes the active set; solve the multiplier on it exactly
    num = 0.0
    den = 0.0
    for k in range(K):
        if b[k] > lam:
            num += b[k] * c[k]
            den += c[k]
    if den > 0.0:
        lam = (num - 1.0) / den
    total = 0.0
    for k in range(K):
        v = (b[k] - lam) * c[k]
        out[k] = v if v > 0.0 else 0.0
        total += out[k]
    for k in range(K):
        out[k] /= total


@njit(cache=True)
def qp_simplex_rows(A, B):
    n, K = A.shape
    X = np.empty((n, K))
    for i in range(n):
        _qp_row(A[i], B[i], X[i])
    return X


@njit(cache=True)
def omega_naive_loops(xi, adj, codes, logpi):
    n, K = xi.shape
    omega = np.zeros((n, K))
    for i in range(n):
        for k in range(K):
            acc = 0.0
            for j in range(n):
                if j == i:
                    continue
                d = adj[i, j]
                c = codes[i, j]
                for l in range(K):
                    acc += xi[j, l] * logpi[d, c, k, l]
            omega[i, k] = acc
    return omega


@njit(cache=True)
def gibbs_chain(adj, z, codes, alpha_w, alpha_b, beta_w, beta_b, psi, gamma,
                block_ptr, block_nodes, deg_in, counts, code,
                pi, pj, unif, first_step, burn_in, record_every,
                trace, codes_out, track_code):
    n = adj.shape[0]
    P = codes.shape[1]
    rows = 0
    for t in range(pi.shape[0]):
        i = pi[t]
        j = pj[t]
        if i > j:
            i, j = j, i
        within = z[i] == z[j]
        u = alpha_w if within else alpha_b
        for p in range(P):
            if codes[i, p] == codes[j, p]:
                u += beta_w[p] if within else beta_b[p]
        delta = 2.0 * u
        s2 = 0
        tri = 0
        old = adj[i, j]
        if within:
            s2 = deg_in[i] + deg_in[j] - 2 * old
            k = z[i]
            for q in range(block_ptr[k], block_ptr[k + 1]):
                r = block_nodes[q]
                if adj[i, r] and adj[j, r]:
                    tri += 1
            delta += psi * s2 + 4.0 * gamma * tri
        prob = 1.0 / (1.0 + math.exp(-delta)) if delta > -700.0 else 0.0
        new = 1 if unif[t] < prob else 0
        if new != old:
            adj[i, j] = new
            adj[j, i] = new
            sign = 1 if new else -1
            counts[0] += sign
            if within:
                deg_in[i] += sign
                deg_in[j] += sign
                counts[1] += sign * s2
                counts[2] += sign * tri
            if track_code:
                code ^= np.int64(1) << np.int64(i * (2 * n - i - 1) // 2 + (j - i - 1))
        if track_code:
            codes_out[t] = code
        step = first_step + t + 1
        if record_every > 0 and step > burn_in and (step - burn_in) % record_every == 0:
            trace[rows, 0] = step
            trace[rows, 1] = counts[0]
            trace[rows, 2] = counts[1]
            trace[rows, 3] = counts[2]
            rows += 1
    return rows, code
