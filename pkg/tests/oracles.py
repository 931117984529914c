"""Reference computations that share no code with the package under test."""

import math

import numpy as np


def jacobi_eigh(S, tol=1e-14, max_sweeps=100):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations."""
    A = np.array(S, dtype=float)
    n = A.shape[0]
    for _ in range(max_sweeps):
        off = math.sqrt(sum(A[i, j] ** 2 for i in range(n) for j in range(n) if i != j))
        if off <= tol * max(1.0, np.abs(A).max()):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if A[p, q] == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * A[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
    return np.sort(np.diag(A))[::-1]


def singular_values(X):
    ev = jacobi_eigh(np.asarray(X).T @ np.asarray(X))
    return np.sqrt(np.clip(ev, 0.0, None))


def dominant_rank1(X, iters=5000, tol=1e-15):
    """Best rank-1 approximation from power iteration on X^T X."""
    X = np.asarray(X, dtype=float)
    v = np.ones(X.shape[1]) / math.sqrt(X.shape[1])
    for _ in range(iters):
        w = X.T @ (X @ v)
        w /= np.linalg.norm(w)
        if np.linalg.norm(w - v) < tol:
            v = w
            break
        v = w
    u = X @ v
    return np.outer(u, v)


def naive_matmul(A, B):
    A, B = np.asarray(A, dtype=float), np.asarray(B, dtype=float)
    out = np.zeros((A.shape[0], B.shape[1]))
    for i in range(A.shape[0]):
        for j in range(B.shape[1]):
            acc = 0.0
            for t in range(A.shape[1]):
                acc += A[i, t] * B[t, j]
            out[i, j] = acc
    return out


def materialize(apply, m, n):
    """Dense p x (mn) matrix of a linear map, one basis matrix at a time."""
    cols = []
    for idx in range(m * n):
        E = np.zeros(m * n)
        E[idx] = 1.0
        cols.append(apply(E.reshape(m, n)))
    return np.stack(cols, axis=1)


def tangent_projection_dense(U, V, X):
    """Projection onto {U B + C V^T} by least squares over an explicit spanning set."""
    m, n = X.shape
    gens = []
    for i in range(U.shape[1]):
        for j in range(n):
            E = np.zeros(n)
            E[j] = 1.0
            gens.append(np.outer(U[:, i], E).ravel())
    for i in range(V.shape[1]):
        for j in range(m):
            E = np.zeros(m)
            E[j] = 1.0
            gens.append(np.outer(E, V[:, i]).ravel())
    G = np.stack(gens, axis=1)
    coef = np.linalg.lstsq(G, X.ravel(), rcond=None)[0]
    return (G @ coef).reshape(m, n)


def golden_section(f, lo, hi, tol=1e-12, max_iter=500):
    """Minimizer of a unimodal function on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def central_difference_gradient(f, X, h=1e-5):
    G = np.zeros_like(X, dtype=float)
    for idx in np.ndindex(X.shape):
        E = np.zeros_like(X, dtype=float)
        E[idx] = h
        G[idx] = (f(X + E) - f(X - E)) / (2.0 * h)
    return G
