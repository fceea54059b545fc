"""Dense two-phase tableau simplex.

The linear programs in this package are tiny (at most a few hundred
columns), so a dense tableau is simpler and more predictable than a sparse
revised method. Pricing uses Dantzig's rule; after a run of degenerate
pivots the solver switches to Bland's rule for the remainder of the solve,
which rules out cycling.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InternalError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_DEGENERATE_SWITCH = 30


@dataclass
class LPResult:
    status: str
    x: np.ndarray = None
    fun: float = None
    nit: int = 0

    @property
    def success(self):
        return self.status == OPTIMAL


def _pivot(T, basis, r, j):
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    T[:, j] = 0.0
    T[r, j] = 1.0
    basis[r] = j


def _run(T, basis, ncols, tol, maxiter, nit):
    m = T.shape[0] - 1
    degenerate = 0
    bland = False
    while True:
        if nit >= maxiter:
            raise InternalError("simplex iteration limit reached", iterations=nit)
        red = T[m, :ncols]
        if bland:
            cand = np.flatnonzero(red < -tol)
            if cand.size == 0:
                return OPTIMAL, nit
            j = int(cand[0])
        else:
            j = int(np.argmin(red))
            if red[j] >= -tol:
                return OPTIMAL, nit
        col = T[:m, j]
        pos = col > tol
        if not pos.any():
            return UNBOUNDED, nit
        rhs = np.maximum(T[:m, -1], 0.0)
        ratios = np.full(m, np.inf)
        ratios[pos] = rhs[pos] / col[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + 1e-12 * (1.0 + best))
        if bland:
            r = int(ties[np.argmin(basis[ties])])
        else:
            r = int(ties[np.argmax(col[ties])])
        degenerate = degenerate + 1 if best <= tol else 0
        if degenerate > _DEGENERATE_SWITCH:
            bland = True
        _pivot(T, basis, r, j)
        nit += 1


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, free=(), tol=1e-10,
            maxiter=20000):
    """Minimize ``c @ x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``.

    Variables are nonnegative except those listed in ``free``.
    Returns an :class:`LPResult`; infeasibility and unboundedness are
    reported through ``status`` rather than raised.
    """
    c0 = np.asarray(c, dtype=float).ravel()
    n = c0.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    free = sorted(set(int(i) for i in free))

    c1 = c0
    if free:
        c1 = np.concatenate([c0, -c0[free]])
        A_ub = np.hstack([A_ub, -A_ub[:, free]])
        A_eq = np.hstack([A_eq, -A_eq[:, free]])
    N = c1.size
    mu, me = A_ub.shape[0], A_eq.shape[0]
    m = mu + me

    A = np.zeros((m, N + mu))
    A[:mu, :N] = A_ub
    A[:mu, N:] = np.eye(mu)
    A[mu:, :N] = A_eq
    b = np.concatenate([b_ub, b_eq])
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    art_rows = [i for i in range(m) if i >= mu or neg[i]]
    na = len(art_rows)
    T = np.zeros((m + 1, N + mu + na + 1))
    T[:m, :N + mu] = A
    T[:m, -1] = b
    basis = np.empty(m, dtype=int)
    for i in range(mu):
        if not neg[i]:
            basis[i] = N + i
    for k, i in enumerate(art_rows):
        T[i, N + mu + k] = 1.0
        basis[i] = N + mu + k

    nit = 0
    if na:
        T[m, N + mu:N + mu + na] = 1.0
        for i in art_rows:
            T[m] -= T[i]
        _, nit = _run(T, basis, N + mu + na, tol, maxiter, nit)
        scale = max(1.0, float(np.abs(b).max()) if m else 1.0)
        if -T[m, -1] > 1e-9 * scale:
            return LPResult(INFEASIBLE, nit=nit)
        keep = np.ones(m + 1, dtype=bool)
        for r in range(m):
            if basis[r] >= N + mu:
                row = np.abs(T[r, :N + mu])
                j = int(np.argmax(row)) if row.size else -1
                if j >= 0 and row[j] > 1e-9:
                    _pivot(T, basis, r, j)
                else:
                    keep[r] = False
        T = T[keep]
        basis = basis[keep[:m]]
        m = basis.size
        T = np.hstack([T[:, :N + mu], T[:, -1:]])

    cx = np.concatenate([c1, np.zeros(mu)])
    T[m, :] = 0.0
    T[m, :N + mu] = cx
    for r in range(m):
        T[m] -= cx[basis[r]] * T[r]
    status, nit = _run(T, basis, N + mu, tol, maxiter, nit)
    if status != OPTIMAL:
        return LPResult(status, nit=nit)

    x = np.zeros(N + mu)
    x[basis] = T[:m, -1]
    xs = x[:N]
    xo = xs[:n].copy()
    if free:
        xo[free] -= xs[n:]
    return LPResult(OPTIMAL, x=xo, fun=float(c0 @ xo), nit=nit)


def feasible(A_ub=None, b_ub=None, A_eq=None, b_eq=None, n=None, free=()):
    """Return a feasible point of the constraint system, or None."""
    if n is None:
        n = (A_eq if A_eq is not None else A_ub).shape[1]
    res = linprog(np.zeros(n), A_ub, b_ub, A_eq, b_eq, free=free)
    return res.x if res.success else None
