"""Bipartite states, robustness of entanglement, Bell maxima and nonembeddability thresholds.

Bipartite states on the maximal tensor product of two polytopic GPTs are
matrices ``W`` with ``u_A^T W u_B = 1`` and ``e^T W f >= 0`` for all dual
effect generators ``e``, ``f``. A behaviour is read off as
``P(a, b | x, y) = e_{a|x}^T W f_{b|y}``.
"""
import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from . import gpt as G
from .errors import (InternalError, InvalidArgument, MissingReference, NotABipartiteState,
                     SizeLimitExceeded, UnsupportedRepresentation)
from .lp import linprog
from .polytope import enumerate_vertices, extreme_points

TSIRELSON_WINPROB = 0.5 + 1 / (2 * np.sqrt(2))
CHSH_TAG = "chsh-winprob"
STRATEGY_LIMIT = 10 ** 6
POS_TOL = 1e-9


def _threads():
    raw = os.environ.get("GPT_EMBED_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# ---------------------------------------------------------------- data types

@dataclass(frozen=True, eq=False)
class BipartiteState:
    w: np.ndarray
    gpt_a: G.Gpt
    gpt_b: G.Gpt

    def __post_init__(self):
        W = np.asarray(self.w, dtype=float)
        if W.shape != (self.gpt_a.dim, self.gpt_b.dim):
            raise InvalidArgument(f"state matrix must be {self.gpt_a.dim}x{self.gpt_b.dim}")
        object.__setattr__(self, "w", W)

    def prob(self, e, f):
        return float(np.asarray(e) @ self.w @ np.asarray(f))

    def residuals(self):
        """Normalization and positivity residuals on dual effect generators."""
        norm = abs(self.gpt_a.unit @ self.w @ self.gpt_b.unit - 1.0)
        Ea = G.dual_effect_generators(self.gpt_a)
        Eb = G.dual_effect_generators(self.gpt_b)
        pos = max(0.0, -float((Ea @ self.w @ Eb.T).min()))
        return {"normalization": float(norm), "positivity": pos}

    def is_valid(self, tol=POS_TOL):
        r = self.residuals()
        return r["normalization"] <= 1e-12 and r["positivity"] <= tol

    def to_dict(self):
        return {"w": self.w.tolist(), "gpt_a": G.to_dict(self.gpt_a), "gpt_b": G.to_dict(self.gpt_b)}


def bipartite_from_dict(d):
    try:
        return BipartiteState(np.asarray(d["w"], dtype=float), G.from_dict(d["gpt_a"]),
                              G.from_dict(d["gpt_b"]))
    except (KeyError, TypeError) as exc:
        raise InvalidArgument(f"malformed bipartite state JSON: {exc}") from exc


def product_state(gpt_a, wa, gpt_b, wb):
    return BipartiteState(np.outer(wa, wb), gpt_a, gpt_b)


@dataclass(frozen=True, eq=False)
class BellFunctional:
    """Coefficients ``b[a, b, x, y]`` plus the measurements they refer to.

    ``effects_a[x, a]`` is Alice's effect for outcome a of setting x (same
    for Bob). The effects may be left as None and filled in later with
    :func:`with_measurements`.
    """
    coeffs: np.ndarray
    effects_a: np.ndarray = None
    effects_b: np.ndarray = None
    tag: str = None
    b_q: float = None

    def __post_init__(self):
        b = np.asarray(self.coeffs, dtype=float)
        if b.ndim != 4:
            raise InvalidArgument("coefficients must be indexed [a, b, x, y]")
        object.__setattr__(self, "coeffs", b)
        for name in ("effects_a", "effects_b"):
            v = getattr(self, name)
            if v is not None:
                v = np.asarray(v, dtype=float)
                if v.ndim != 3:
                    raise InvalidArgument(f"{name} must be indexed [setting, outcome, coordinate]")
                object.__setattr__(self, name, v)
        A, B, X, Y = b.shape
        if self.effects_a is not None and self.effects_a.shape[:2] != (X, A):
            raise InvalidArgument("effects_a does not match the coefficient shape")
        if self.effects_b is not None and self.effects_b.shape[:2] != (Y, B):
            raise InvalidArgument("effects_b does not match the coefficient shape")

    @property
    def abs_norm(self):
        return float(np.abs(self.coeffs).sum())

    @property
    def shape(self):
        return self.coeffs.shape

    def value(self, behaviour):
        """Evaluate on a behaviour ``P[a, b, x, y]``."""
        return float(np.sum(self.coeffs * behaviour))

    def to_dict(self):
        out = {"coeffs": self.coeffs.tolist(), "tag": self.tag, "b_q": self.b_q}
        out["effects_a"] = None if self.effects_a is None else self.effects_a.tolist()
        out["effects_b"] = None if self.effects_b is None else self.effects_b.tolist()
        return out


def functional_from_dict(d):
    try:
        return BellFunctional(np.asarray(d["coeffs"], dtype=float),
                              None if d.get("effects_a") is None else np.asarray(d["effects_a"], dtype=float),
                              None if d.get("effects_b") is None else np.asarray(d["effects_b"], dtype=float),
                              tag=d.get("tag"), b_q=d.get("b_q"))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidArgument):
            raise
        raise InvalidArgument(f"malformed functional JSON: {exc}") from exc


# ---------------------------------------------------------------- functionals

def default_measurements(gpt, settings=2):
    """Binary measurements from the effect generators.

    Complementary generator pairs (``g_i + g_j = u``) are used first; if
    there are too few, pairs ``(g_i, u - g_i)`` fill up, and a single pair is
    repeated when nothing else exists.
    """
    gens = gpt.effects
    pairs = []
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            if np.abs(gens[i] + gens[j] - gpt.unit).max() <= 1e-12:
                pairs.append((gens[i], gens[j]))
    for g in gens:
        if len(pairs) >= settings:
            break
        comp = gpt.unit - g
        if np.abs(comp).max() > 1e-12 and np.abs(g).max() > 1e-12 and \
                not any(np.allclose(g, p[0]) or np.allclose(g, p[1]) for p in pairs):
            pairs.append((g, comp))
    if not pairs:
        raise InvalidArgument("no binary measurement available")
    base = len(pairs)
    while len(pairs) < settings:
        pairs.append(pairs[len(pairs) % base])
    return np.array([[a, b] for a, b in pairs[:settings]])


def chsh_coefficients(form="winprob"):
    b = np.zeros((2, 2, 2, 2))
    for a, bb, x, y in itertools.product(range(2), repeat=4):
        if form == "winprob":
            b[a, bb, x, y] = 0.25 if (a ^ bb) == (x & y) else 0.0
        elif form == "correlator":
            b[a, bb, x, y] = (-1) ** (a ^ bb) * (-1 if x == y == 1 else 1)
        else:
            raise InvalidArgument(f"unknown CHSH form {form!r}")
    return b


def chsh(gpt_a=None, gpt_b=None, form="winprob"):
    """CHSH functional; winning-probability form is tagged for the Tsirelson reference."""
    gpt_b = gpt_a if gpt_b is None else gpt_b
    ea = None if gpt_a is None else default_measurements(gpt_a)
    eb = None if gpt_b is None else default_measurements(gpt_b)
    return BellFunctional(chsh_coefficients(form), ea, eb, tag=CHSH_TAG if form == "winprob" else None)


def with_measurements(f, gpt_a, gpt_b):
    """Fill in default measurements for any side that has none."""
    A, B, X, Y = f.shape
    ea = f.effects_a
    eb = f.effects_b
    if ea is None:
        if A != 2:
            raise InvalidArgument("default measurements are binary")
        ea = default_measurements(gpt_a, X)
    if eb is None:
        if B != 2:
            raise InvalidArgument("default measurements are binary")
        eb = default_measurements(gpt_b, Y)
    return BellFunctional(f.coeffs, ea, eb, f.tag, f.b_q)


def _check_measurements(f, gpt_a, gpt_b, tol=1e-12):
    for eff, g, side in ((f.effects_a, gpt_a, "A"), (f.effects_b, gpt_b, "B")):
        if eff.shape[2] != g.dim:
            raise InvalidArgument(f"side {side} effects have the wrong dimension")
        r = float(np.abs(eff.sum(axis=1) - g.unit).max())
        if r > tol:
            raise InvalidArgument(f"side {side} effects do not sum to the unit", residual=r)


def classical_response_measurements(settings, outcomes):
    """Measurements on C_{k^X} whose outcomes are fixed by a hidden deterministic strategy.

    Together with all states of that classical GPT these realize exactly
    the local behaviours for the given numbers of settings and outcomes.
    """
    strategies = list(itertools.product(range(outcomes), repeat=settings))
    n = len(strategies)
    eff = np.zeros((settings, outcomes, n))
    for lam, s in enumerate(strategies):
        for x in range(settings):
            eff[x, s[x], lam] = 1.0
    return eff


def behaviour(f, W):
    """``P[a, b, x, y]`` induced by a bipartite state matrix."""
    return np.einsum("xai,ij,ybj->abxy", f.effects_a, np.asarray(W), f.effects_b)


def _objective(f):
    return np.einsum("abxy,xai,ybj->ij", f.coeffs, f.effects_a, f.effects_b)


# ---------------------------------------------------------------- maxima

def bell_max_gpt(f, gpt_a, gpt_b=None):
    """Maximum of the functional over all bipartite states; returns ``(value, state)``."""
    gpt_b = gpt_a if gpt_b is None else gpt_b
    if not (gpt_a.is_polytopic and gpt_b.is_polytopic):
        raise UnsupportedRepresentation("Bell maxima over the maximal tensor product need polytopic GPTs")
    f = with_measurements(f, gpt_a, gpt_b)
    _check_measurements(f, gpt_a, gpt_b)
    da, db = gpt_a.dim, gpt_b.dim
    C = _objective(f)
    if np.abs(C).max() == 0:
        W = np.outer(G.center_state(gpt_a), G.center_state(gpt_b))
        return 0.0, BipartiteState(W, gpt_a, gpt_b)
    Ea = G.dual_effect_generators(gpt_a)
    Eb = G.dual_effect_generators(gpt_b)
    rows = np.einsum("ki,lj->klij", Ea, Eb).reshape(-1, da * db)
    res = linprog(-C.ravel(), A_ub=-rows, b_ub=np.zeros(len(rows)),
                  A_eq=np.outer(gpt_a.unit, gpt_b.unit).reshape(1, -1), b_eq=[1.0],
                  free=range(da * db))
    if not res.success:
        raise InternalError("bipartite-state LP failed", status=res.status)
    return -res.fun, BipartiteState(res.x.reshape(da, db), gpt_a, gpt_b)


def bell_max_classical(f):
    """Exact local maximum by enumerating deterministic strategies."""
    b = f.coeffs
    A, B, X, Y = b.shape
    total = A ** X * B ** Y
    if total > STRATEGY_LIMIT:
        raise SizeLimitExceeded(f"{total} deterministic strategy pairs exceed the limit",
                                strategies=total)
    best = -np.inf
    ys = np.arange(Y)
    for sa in itertools.product(range(A), repeat=X):
        # T[b, y] = sum_x b[a(x), b, x, y]; Bob answers each y independently
        T = sum(b[sa[x], :, x, :] for x in range(X))
        best = max(best, float(T[:, ys].max(axis=0).sum()))
    return best


def quantum_reference_value(f, supplied=None):
    """``(value, source)`` for the quantum maximum of ``f``."""
    if supplied is not None:
        return float(supplied), "external"
    if f.b_q is not None:
        return float(f.b_q), "external"
    if f.tag == CHSH_TAG:
        return TSIRELSON_WINPROB, "tsirelson"
    raise MissingReference("no quantum reference value for an untagged functional")


# ---------------------------------------------------------------- robustness

def _product_extremes(gpt_a, gpt_b):
    Sa = gpt_a.states[extreme_points(gpt_a.states)]
    Sb = gpt_b.states[extreme_points(gpt_b.states)]
    return np.einsum("ki,lj->klij", Sa, Sb).reshape(-1, gpt_a.dim * gpt_b.dim)


def robustness(state, _products=None):
    """Robustness of entanglement: min total weight of the negative separable part."""
    if not (state.gpt_a.is_polytopic and state.gpt_b.is_polytopic):
        raise UnsupportedRepresentation("robustness needs polytopic GPTs")
    Pi = _product_extremes(state.gpt_a, state.gpt_b) if _products is None else _products
    k = len(Pi)
    A_eq = np.vstack([np.hstack([Pi.T, -Pi.T]), np.concatenate([np.ones(k), -np.ones(k)])])
    b_eq = np.append(state.w.ravel(), 1.0)
    c = np.concatenate([np.zeros(k), np.ones(k)])
    res = linprog(c, A_eq=A_eq, b_eq=b_eq)
    if not res.success:
        raise NotABipartiteState("state is outside the span of product states", status=res.status)
    return max(0.0, float(res.fun))


def bipartite_constraints(gpt_a, gpt_b):
    Ea = G.dual_effect_generators(gpt_a)
    Eb = G.dual_effect_generators(gpt_b)
    rows = np.einsum("ki,lj->klij", Ea, Eb).reshape(-1, gpt_a.dim * gpt_b.dim)
    return rows, np.outer(gpt_a.unit, gpt_b.unit).reshape(1, -1)


def bipartite_vertices(gpt_a, gpt_b=None, max_constraints=24, max_dim=10):
    """Vertices of the bipartite-state polytope, as ``d_A x d_B`` matrices."""
    gpt_b = gpt_a if gpt_b is None else gpt_b
    rows, norm = bipartite_constraints(gpt_a, gpt_b)
    V = enumerate_vertices(-rows, np.zeros(len(rows)), norm, [1.0],
                           max_constraints=max_constraints, max_dim=max_dim)
    return V.reshape(-1, gpt_a.dim, gpt_b.dim)


def self_entangleability(gpt, vertices=None, max_constraints=24, max_dim=10):
    """Maximal robustness over bipartite states of two copies; returns ``(value, vertex_count)``."""
    if not gpt.is_polytopic:
        raise UnsupportedRepresentation("self-entangleability needs a polytopic GPT")
    if vertices is None:
        try:
            vertices = bipartite_vertices(gpt, gpt, max_constraints, max_dim)
        except SizeLimitExceeded as exc:
            raise UnsupportedRepresentation(
                "bipartite vertex enumeration is too large; pass the vertex list explicitly",
                **exc.details) from exc
    vertices = np.asarray(vertices, dtype=float).reshape(-1, gpt.dim, gpt.dim)
    Pi = _product_extremes(gpt, gpt)
    work = lambda W: robustness(BipartiteState(W, gpt, gpt), Pi)
    n = _threads()
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as ex:
            vals = list(ex.map(work, vertices))
    else:
        vals = [work(W) for W in vertices]
    return (max(vals) if vals else 0.0), len(vertices)


def bipartite_from_behaviour(P, gpt_a, gpt_b, effects_a, effects_b, tol=1e-9):
    """Solve ``e_{a|x}^T W f_{b|y} = P[a, b, x, y]`` for W (least squares, checked exact)."""
    P = np.asarray(P, dtype=float)
    ea = np.asarray(effects_a, dtype=float)
    eb = np.asarray(effects_b, dtype=float)
    X, A, da = ea.shape
    Y, B, db = eb.shape
    rows, rhs = [], []
    for x, a, y, b in itertools.product(range(X), range(A), range(Y), range(B)):
        rows.append(np.outer(ea[x, a], eb[y, b]).ravel())
        rhs.append(P[a, b, x, y])
    rows.append(np.outer(gpt_a.unit, gpt_b.unit).ravel())
    rhs.append(1.0)
    M, r = np.array(rows), np.array(rhs)
    w = np.linalg.lstsq(M, r, rcond=None)[0]
    resid = float(np.abs(M @ w - r).max())
    if resid > tol:
        raise NotABipartiteState("behaviour is not realized by any bilinear form", residual=resid)
    W = w.reshape(da, db)
    W[np.abs(W) < 1e-15] = 0.0
    return BipartiteState(W, gpt_a, gpt_b)


def pr_box():
    """The PR behaviour ``P[a, b, x, y] = 1/2`` iff ``a xor b = x y``."""
    P = np.zeros((2, 2, 2, 2))
    for a, b, x, y in itertools.product(range(2), repeat=4):
        P[a, b, x, y] = 0.5 if (a ^ b) == (x & y) else 0.0
    return P


# ---------------------------------------------------------------- bounds

@dataclass
class BoundReport:
    b_aa: float
    b_ref: float
    abs_norm: float
    r_a: float
    threshold: float
    reference: str = "quantum"
    source: str = ""
    message: str = ""

    @property
    def certificate(self):
        return self.threshold > 0

    def to_dict(self):
        return {"b_aa": self.b_aa, "b_ref": self.b_ref, "abs_norm": self.abs_norm, "r_a": self.r_a,
                "threshold": self.threshold, "reference": self.reference, "source": self.source,
                "certificate": self.certificate, "message": self.message}


def threshold_value(b_aa, b_ref, abs_norm, r_a):
    if abs_norm <= 0 or b_aa <= b_ref:
        return 0.0
    return (b_aa - b_ref) / (4 * abs_norm * (1 + 2 * r_a))


def embedding_threshold(f, gpt, reference="quantum", b_ref=None, b_aa=None, r_a=None):
    """Epsilon below which no embedding of ``gpt`` into quantum (or classical) theory exists."""
    if reference not in ("quantum", "classical"):
        raise InvalidArgument("reference must be 'quantum' or 'classical'")
    f = with_measurements(f, gpt, gpt)
    if b_aa is None:
        b_aa = bell_max_gpt(f, gpt, gpt)[0]
    if b_ref is not None:
        source = "external"
    elif reference == "quantum":
        b_ref, source = quantum_reference_value(f)
    else:
        b_ref, source = bell_max_classical(f), "enumeration"
    norm = f.abs_norm
    if norm == 0:
        return BoundReport(float(b_aa), float(b_ref), 0.0, 0.0, 0.0, reference, source,
                           "no certificate from this functional")
    if r_a is None:
        r_a = self_entangleability(gpt)[0]
    thr = threshold_value(b_aa, b_ref, norm, r_a)
    msg = "certified" if thr > 0 else "no certificate from this functional"
    return BoundReport(float(b_aa), float(b_ref), norm, float(r_a), float(thr), reference, source, msg)


def device_polynomial(eps):
    """``g(eps) = 4 eps + 2 sqrt(eps) - eps sqrt(eps) - eps^2 - 1``."""
    r = np.sqrt(eps)
    return 4 * eps + 2 * r - eps * r - eps * eps - 1


def gbit_device_bound(xtol=1e-12):
    """Root of the device polynomial on [0, 1]: the minimal error of any gbit embedding."""
    return float(bisect(device_polynomial, 0.0, 1.0, xtol=xtol))


def behaviour_distance_bound(epsilon, r_a):
    """Per-entry distance between a GPT behaviour and its quantum approximation."""
    if epsilon < 0 or r_a < 0:
        raise InvalidArgument("epsilon and robustness must be nonnegative")
    return 2 * epsilon * (1 + 2 * r_a)
