"""Reference implementations used as independent test oracles.

Nothing here imports logitpfa; each routine is written from the defining
formula with plain Python or generic numpy/scipy building blocks.
"""
import math
from statistics import NormalDist

import numpy as np
from scipy.optimize import minimize

_STD = NormalDist()


def phi(x):
    """Standard normal CDF via math.erfc (accurate in the lower tail)."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def phi_inv(q):
    return _STD.inv_cdf(q)


def newton_logistic(x, y, tol=1e-14, max_iter=200):
    """Plain Newton-Raphson for (alpha, beta); explicit 2x2 inverse, no safeguards."""
    a, b = 0.0, 0.0
    for _ in range(max_iter):
        g0 = g1 = h00 = h01 = h11 = 0.0
        for xi, yi in zip(x, y):
            pi = 1.0 / (1.0 + math.exp(-(a + b * xi)))
            w = pi * (1.0 - pi)
            g0 += yi - pi
            g1 += xi * (yi - pi)
            h00 += w
            h01 += w * xi
            h11 += w * xi * xi
        det = h00 * h11 - h01 * h01
        da = (h11 * g0 - h01 * g1) / det
        db = (-h01 * g0 + h00 * g1) / det
        a += da
        b += db
        if max(abs(da), abs(db)) < tol:
            break
    return a, b


def loglik(a, b, x, y):
    total = 0.0
    for xi, yi in zip(x, y):
        eta = a + b * xi
        total += yi * eta - (eta + math.log1p(math.exp(-eta)) if eta > 0 else math.log1p(math.exp(eta)))
    return total


def score_rows(x, y, a, b):
    """psi_i = [I^{-1} (1, x_i)' (y_i - pi_i)]_2 with a generic matrix inverse."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    pi = 1.0 / (1.0 + np.exp(-(a + b * x)))
    D = np.column_stack([np.ones_like(x), x])
    info = sum(pi[i] * (1 - pi[i]) * np.outer(D[i], D[i]) for i in range(x.size)) / x.size
    inv = np.linalg.inv(info)
    return np.array([(inv @ D[i] * (y[i] - pi[i]))[1] for i in range(x.size)])


def brute_covariance(psi):
    n, p = psi.shape
    out = np.zeros((p, p))
    for i in range(n):
        for j1 in range(p):
            for j2 in range(p):
                out[j1, j2] += psi[i, j1] * psi[i, j2] / n
    return out


def jacobi_eigen(A, tol=1e-14, sweeps=100):
    """Cyclic Jacobi rotations; returns (eigenvalues, eigenvectors) unsorted."""
    A = np.array(A, dtype=float)
    p = A.shape[0]
    V = np.eye(p)
    for _ in range(sweeps):
        off = math.sqrt(sum(A[i, j] ** 2 for i in range(p) for j in range(p) if i != j))
        if off < tol:
            break
        for i in range(p - 1):
            for j in range(i + 1, p):
                if abs(A[i, j]) < 1e-300:
                    continue
                theta = (A[j, j] - A[i, i]) / (2.0 * A[i, j])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                R = np.eye(p)
                R[i, i] = R[j, j] = c
                R[i, j] = s
                R[j, i] = -s
                A = R.T @ A @ R
                V = V @ R
    return np.diag(A).copy(), V


def trimmed_normal_equations(z, B, fraction=0.9):
    p = len(z)
    order = sorted(range(p), key=lambda j: (abs(z[j]), j))
    keep = order[: int(math.floor(fraction * p))]
    Bs = B[keep]
    return np.linalg.solve(Bs.T @ Bs, Bs.T @ z[keep])


def lad_nelder_mead(z, B, start):
    obj = lambda w: float(np.sum(np.abs(z - B @ w)))
    best = None
    for x0 in (start, np.zeros(B.shape[1])):
        res = minimize(obj, x0, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-12, "maxiter": 50000, "maxfev": 50000})
        if best is None or res.fun < best.fun:
            best = res
    return best.x, best.fun


def fdp_direct(z, b, w, t):
    """Direct evaluation of the principal-factor FDP estimate with math.erfc."""
    p = len(z)
    k = len(w)
    q = phi_inv(t / 2.0)
    r = sum(1 for zj in z if 2.0 * phi(-abs(zj)) <= t)
    mass = 0.0
    for j in range(p):
        eta = sum(b[j][h] * w[h] for h in range(k))
        a = (1.0 - sum(b[j][h] ** 2 for h in range(k))) ** -0.5
        mass += phi(a * (q + eta)) + phi(a * (q - eta))
    v = min(mass, r)
    return r, v, (v / r if r else 0.0)


def adjusted_direct(z, b, w):
    out = []
    for j, zj in enumerate(z):
        eta = sum(b[j][h] * w[h] for h in range(len(w)))
        a = (1.0 - sum(bh ** 2 for bh in b[j])) ** -0.5
        out.append(2.0 * phi(-abs(a * (zj - eta))))
    return out


def random_correlation(rng, p, n=None):
    n = n or max(p + 5, 2 * p)
    A = rng.standard_normal((n, p)) @ rng.standard_normal((p, p))
    C = np.cov(A, rowvar=False)
    d = np.sqrt(np.diag(C))
    C = C / d[:, None] / d[None, :]
    np.fill_diagonal(C, 1.0)
    return 0.5 * (C + C.T)
