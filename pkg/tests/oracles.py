"""Brute-force reference computations written directly from the model definitions.

Nothing here calls into the package's numerical code; everything works on
dense numpy arrays with explicit loops, so it is slow but easy to audit.
"""
import itertools
import math

import numpy as np


def dense(g):
    a = np.zeros((g.n, g.n), dtype=int)
    for i, j in g.edges.tolist():
        a[i, j] = a[j, i] = 1
    return a


def utility(i, j, x, z, alpha_w, alpha_b, beta_w, beta_b):
    same = [float(x[i][s] == x[j][s]) for s in range(len(x[i]))]
    if z[i] == z[j]:
        return alpha_w + sum(b * s for b, s in zip(beta_w, same))
    return alpha_b + sum(b * s for b, s in zip(beta_b, same))


def potential(adj, x, z, alpha_w, alpha_b, beta_w=(), beta_b=(), psi=0.0, gamma=0.0):
    """Ordered double sums: direct payoffs, within-block 2-paths and triangles."""
    n = adj.shape[0]
    x = [list(r) for r in x] if len(x) else [[] for _ in range(n)]
    q = 0.0
    for i in range(n):
        for j in range(n):
            if i != j and adj[i, j]:
                q += utility(i, j, x, z, alpha_w, alpha_b, beta_w, beta_b)
    # psi * sum_{i} sum_{j<k} g_ij g_ik, all in one block: every 2-star once
    for c in range(n):
        for a in range(n):
            for b in range(a + 1, n):
                if len({a, b, c}) == 3 and adj[c, a] and adj[c, b] and z[a] == z[b] == z[c]:
                    q += psi
    # each within-block triangle carries weight 4 gamma
    for a, b, c in itertools.combinations(range(n), 3):
        if adj[a, b] and adj[b, c] and adj[a, c] and z[a] == z[b] == z[c]:
            q += 4.0 * gamma
    return q


def all_graphs(n):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for bits in range(2 ** len(pairs)):
        adj = np.zeros((n, n), dtype=int)
        for t, (i, j) in enumerate(pairs):
            if bits >> t & 1:
                adj[i, j] = adj[j, i] = 1
        yield bits, adj


def stationary(n, x, z, **params):
    q = np.array([potential(adj, x, z, **params) for _, adj in all_graphs(n)])
    w = np.exp(q - q.max())
    return w / w.sum()


def lower_bound(adj, codes, xi, eta, pi1):
    """Pair sum over i<j and block pairs, plus the entropy term, with plain loops."""
    n, K = xi.shape
    lp1 = np.log(np.clip(pi1, 1e-12, 1 - 1e-12))
    lp0 = np.log(np.clip(1 - pi1, 1e-12, 1 - 1e-12))
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            c = 0
            for s in range(codes.shape[1]):
                if codes[i, s] == codes[j, s]:
                    c |= 1 << s
            for k in range(K):
                for m in range(K):
                    lp = lp1[c, k, m] if adj[i, j] else lp0[c, k, m]
                    total += xi[i, k] * xi[j, m] * lp
    for i in range(n):
        for k in range(K):
            if xi[i, k] > 0:
                total += xi[i, k] * (math.log(eta[k]) - math.log(xi[i, k]))
    return total


def pi_update(adj, codes, xi):
    """Weighted link frequencies by block pair and match pattern, from ordered pairs."""
    n, K = xi.shape
    C = 1 << codes.shape[1]
    num = np.zeros((C, K, K))
    den = np.zeros((C, K, K))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            c = 0
            for s in range(codes.shape[1]):
                if codes[i, s] == codes[j, s]:
                    c |= 1 << s
            w = np.outer(xi[i], xi[j])
            den[c] += w
            num[c] += w * adj[i, j]
    return num, den


def qp_enumerate(a, b):
    """Maximize sum a x^2 + b x on the simplex by trying every support set."""
    K = len(a)
    best, best_x = -np.inf, None
    for r in range(1, K + 1):
        for S in itertools.combinations(range(K), r):
            S = list(S)
            # stationarity on S: 2 a_k x_k + b_k = lam, sum x = 1
            inv = 1.0 / (-2.0 * np.asarray(a)[S])
            lam = (np.sum(np.asarray(b)[S] * inv) - 1.0) / np.sum(inv)
            xs = (np.asarray(b)[S] - lam) * inv
            if np.any(xs < -1e-14):
                continue
            x = np.zeros(K)
            x[S] = np.maximum(xs, 0)
            val = float(np.sum(np.asarray(a) * x * x + np.asarray(b) * x))
            if val > best:
                best, best_x = val, x
    return best_x


def comembership_yule(z1, z2):
    a = b = c = d = 0
    n = len(z1)
    for i in range(n):
        for j in range(i + 1, n):
            t1 = z1[i] == z1[j]
            t2 = z2[i] == z2[j]
            if t1 and t2:
                a += 1
            elif t1:
                b += 1
            elif t2:
                c += 1
            else:
                d += 1
    den = a * d + b * c
    if den == 0:
        return 1.0 if b == 0 and c == 0 else 0.0
    return (a * d - b * c) / den


def logistic_loglik(X, y, beta, offset=0.0):
    eta = X @ beta + offset
    return float(np.sum(y * eta - np.log1p(np.exp(eta))))


def adjusted_rand(z1, z2):
    """Hubert-Arabie adjusted Rand index from the contingency table."""
    _, a = np.unique(z1, return_inverse=True)
    _, b = np.unique(z2, return_inverse=True)
    table = np.zeros((a.max() + 1, b.max() + 1))
    np.add.at(table, (a, b), 1)

    def pairs(v):
        return float((v * (v - 1) / 2).sum())

    index = pairs(table)
    rows, cols = pairs(table.sum(axis=1)), pairs(table.sum(axis=0))
    expected = rows * cols / pairs(np.array([len(z1)]))
    top = (rows + cols) / 2
    if top == expected:
        return 1.0
    return (index - expected) / (top - expected)
