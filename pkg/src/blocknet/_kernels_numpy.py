"""Pure numpy fallbacks for ``_kernels_numba``.

Vectorized where the algorithm allows it. The Gibbs chain is inherently
sequential, so its fallback is a plain Python loop with identical
arithmetic, which keeps both backends bit-for-bit reproducible.
"""
import math

import numpy as np
import scipy.sparse as sp


def common_neighbor_counts(indptr, indices, rows, cols, labels, restrict):
    n = indptr.shape[0] - 1
    if rows.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    src = np.repeat(np.arange(n), np.diff(indptr))
    dst = indices
    if restrict:
        keep = labels[src] == labels[dst]
        src, dst = src[keep], dst[keep]
    A = sp.csr_matrix((np.ones(src.shape[0], dtype=np.int64), (src, dst)), shape=(n, n))
    if restrict:
        # only common neighbours sharing the label of the first endpoint count
        same = labels[rows] == labels[cols]
        out = np.zeros(rows.shape[0], dtype=np.int64)
        if same.any():
            A2 = A @ A
            out[same] = np.asarray(A2[rows[same], cols[same]]).ravel()
        return out
    return np.asarray((A @ A)[rows, cols]).ravel().astype(np.int64)


def qp_simplex_rows(A, B):
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    n = A.shape[0]
    C = -0.5 / A
    top = np.argmax(B, axis=1)
    rows = np.arange(n)
    hi = B[rows, top].copy()
    lo = hi - 1.0 / C[rows, top]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        total = np.clip((B - mid[:, None]) * C, 0.0, None).sum(axis=1)
        over = total > 1.0
        lo = np.where(over, mid, lo)
        hi = np.where(over, hi, mid)
        if np.all(hi - lo <= 1e-15 * np.maximum(1.0, np.abs(mid))):
            break
    lam = 0.5 * (lo + hi)
    active = B > lam[:, None]
    den = np.where(active, C, 0.0).sum(axis=1)
    num = np.where(active, B * C, 0.0).sum(axis=1)
    ok = den > 0
    lam = np.where(ok, (num - 1.0) / np.where(ok, den, 1.0), lam)
    X = np.clip((B - lam[:, None]) * C, 0.0, None)
    return X / X.sum(axis=1, keepdims=True)


def omega_naive_loops(xi, adj, codes, logpi):
    n, K = xi.shape
    omega = np.zeros((n, K))
    for i in range(n):
        L = logpi[adj[i], codes[i]]  # (n, K, K) tables for each partner j
        L[i] = 0.0
        omega[i] = np.einsum("jkl,jl->k", L, xi)
    return omega


def gibbs_chain(adj, z, codes, alpha_w, alpha_b, beta_w, beta_b, psi, gamma,
                block_ptr, block_nodes, deg_in, counts, code,
                pi, pj, unif, first_step, burn_in, record_every,
                trace, codes_out, track_code):
    n = adj.shape[0]
    P = codes.shape[1]
    rows = 0
    code = int(code)
    for t in range(pi.shape[0]):
        i = int(pi[t])
        j = int(pj[t])
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
        old = int(adj[i, j])
        if within:
            s2 = int(deg_in[i] + deg_in[j]) - 2 * old
            members = block_nodes[block_ptr[z[i]]:block_ptr[z[i] + 1]]
            tri = int(np.count_nonzero(adj[i, members] & adj[j, members]))
            delta += psi * s2 + 4.0 * gamma * tri
        prob = 1.0 / (1.0 + math.exp(-delta)) if delta > -700 else 0.0
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
                code ^= 1 << (i * (2 * n - i - 1) // 2 + (j - i - 1))
        if track_code:
            codes_out[t] = code
        step = first_step + t + 1
        if record_every > 0 and step > burn_in and (step - burn_in) % record_every == 0:
            trace[rows] = (step, counts[0], counts[1], counts[2])
            rows += 1
    return rows, code
