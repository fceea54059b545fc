"""Small-scale polyhedral geometry: vertices, extreme rays, hull membership.

Vertex and ray enumeration solve every subset of tight constraints. This
is exponential, but the instances here have at most a couple of dozen
constraints in at most ten dimensions.
"""
import itertools
from math import comb

import numpy as np
from scipy.linalg import null_space

from .errors import InvalidArgument, SizeLimitExceeded
from .lp import linprog

DEDUP_TOL = 1e-9
_CHUNK = 20000


def dedupe(points, tol=DEDUP_TOL):
    """Drop points within ``tol`` (max-norm) of an earlier point."""
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        return points
    kept = []
    for p in points:
        if kept and np.min(np.abs(np.asarray(kept) - p).max(axis=1)) <= tol:
            continue
        kept.append(p)
    return np.asarray(kept)


def _subset_chunks(m, k):
    it = itertools.combinations(range(m), k)
    while True:
        chunk = list(itertools.islice(it, _CHUNK))
        if not chunk:
            return
        yield np.asarray(chunk, dtype=int).reshape(len(chunk), k)


def enumerate_vertices(A, b, A_eq=None, b_eq=None, tol=DEDUP_TOL,
                       max_constraints=None, max_dim=None, max_subsets=5_000_000):
    """Vertices of ``{x : A x <= b, A_eq x = b_eq}`` (assumed bounded)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    n = A.shape[1]
    if A_eq is not None and len(A_eq):
        A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float))
        b_eq = np.asarray(b_eq, dtype=float).ravel()
        x0 = np.linalg.lstsq(A_eq, b_eq, rcond=None)[0]
        if np.abs(A_eq @ x0 - b_eq).max() > 1e-9:
            return np.zeros((0, n))
        N = null_space(A_eq)
    else:
        x0 = np.zeros(n)
        N = np.eye(n)
    k = N.shape[1]
    Az = A @ N
    bz = b - A @ x0
    norms = np.linalg.norm(Az, axis=1)
    live = norms > 1e-12
    if np.any(bz[~live] < -tol):
        return np.zeros((0, n))
    Az = Az[live] / norms[live, None]
    bz = bz[live] / norms[live]
    m = Az.shape[0]
    if (max_constraints is not None and m > max_constraints) or (max_dim is not None and k > max_dim):
        raise SizeLimitExceeded(
            f"vertex enumeration with {m} constraints in {k} dimensions exceeds the limit",
            constraints=m, dim=k)
    if comb(m, k) > max_subsets:
        raise SizeLimitExceeded(f"{comb(m, k)} tight-constraint subsets exceed the limit",
                                subsets=comb(m, k))
    if k == 0:
        return x0[None, :] if np.all(bz >= -tol) else np.zeros((0, n))
    found = []
    for idx in _subset_chunks(m, k):
        M = Az[idx]
        s = np.linalg.svd(M, compute_uv=False)
        ok = s[:, -1] > 1e-10
        if not ok.any():
            continue
        z = np.linalg.solve(M[ok], bz[idx[ok]][..., None])[..., 0]
        feas = np.all(z @ Az.T <= bz + tol, axis=1)
        if feas.any():
            found.append(z[feas])
    if not found:
        return np.zeros((0, n))
    z = dedupe(np.vstack(found), tol)
    return x0 + z @ N.T


def extreme_rays(S, tol=DEDUP_TOL, max_subsets=5_000_000):
    """Unit-norm extreme rays of the pointed cone ``{x : S x >= 0}``."""
    S = np.atleast_2d(np.asarray(S, dtype=float))
    d = S.shape[1]
    norms = np.linalg.norm(S, axis=1)
    S = S[norms > 1e-12] / norms[norms > 1e-12, None]
    if d == 1:
        rays = [r for r in (np.ones(1), -np.ones(1)) if np.all(S @ r >= -tol)]
        return np.asarray(rays).reshape(-1, 1)
    m = S.shape[0]
    if comb(m, d - 1) > max_subsets:
        raise SizeLimitExceeded(f"{comb(m, d - 1)} tight-constraint subsets exceed the limit",
                                subsets=comb(m, d - 1))
    found = []
    for idx in _subset_chunks(m, d - 1):
        M = S[idx]
        _, s, vt = np.linalg.svd(M)
        ok = s[:, -1] > 1e-10
        if not ok.any():
            continue
        v = vt[ok, -1, :]
        vals = v @ S.T
        plus = np.all(vals >= -tol, axis=1)
        minus = np.all(vals <= tol, axis=1)
        found.append(v[plus])
        found.append(-v[minus & ~plus])
    if not found:
        return np.zeros((0, d))
    rays = np.vstack(found)
    rays = rays[np.linalg.norm(rays, axis=1) > 0.5]
    rays = dedupe(rays, tol)
    return _canonical_order(rays)


def _canonical_order(X):
    if len(X) == 0:
        return X
    keys = np.round(X, 9)
    order = np.lexsort(keys.T[::-1])[::-1]
    return X[order]


def hull_residual(points, x, cone=False):
    """L1 distance from ``x`` to the convex hull (or conic hull) of ``points``."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    x = np.asarray(x, dtype=float).ravel()
    k, d = P.shape
    # variables: lambda (k), s_plus (d), s_minus (d)
    A_eq = np.hstack([P.T, np.eye(d), -np.eye(d)])
    b_eq = x
    if not cone:
        A_eq = np.vstack([A_eq, np.concatenate([np.ones(k), np.zeros(2 * d)])])
        b_eq = np.append(b_eq, 1.0)
    c = np.concatenate([np.zeros(k), np.ones(2 * d)])
    res = linprog(c, A_eq=A_eq, b_eq=b_eq)
    if not res.success:
        return np.inf
    return max(res.fun, 0.0)


def in_hull(points, x, tol=DEDUP_TOL, cone=False):
    return hull_residual(points, x, cone=cone) <= tol


def convex_weights(points, x, tol=DEDUP_TOL):
    """Nonnegative weights summing to one with ``weights @ points = x``, or None."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    k = P.shape[0]
    A_eq = np.vstack([P.T, np.ones((1, k))])
    b_eq = np.append(np.asarray(x, dtype=float).ravel(), 1.0)
    res = linprog(np.zeros(k), A_eq=A_eq, b_eq=b_eq)
    if not res.success:
        return None
    w = res.x
    if np.abs(w @ P - x).max() > max(tol, 1e-9):
        return None
    return w


def extreme_points(points, tol=DEDUP_TOL, cone=False):
    """Indices of the points that are not convex (or conic) combinations of the others."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if len(P) == 0:
        raise InvalidArgument("no points given")
    if cone:
        P = P / np.linalg.norm(P, axis=1, keepdims=True)
    keep = []
    for i in range(len(P)):
        dup = [j for j in keep if np.abs(P[j] - P[i]).max() <= tol]
        if dup:
            continue
        others = np.delete(P, i, axis=0)
        others = others[np.abs(others - P[i]).max(axis=1) > tol]
        if len(others) == 0 or not in_hull(others, P[i], tol=tol, cone=cone):
            keep.append(i)
    return np.asarray(keep, dtype=int)
