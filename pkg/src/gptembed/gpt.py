"""GPT data model, canonical constructors, membership and validation.

The pairing between states and effects is always the plain dot product.
Constructors absorb whatever convention factors a theory needs (the gbit's
factor of one half, trace-orthonormal Hermitian coordinates, ...).

Polytopic GPTs are described by generators: states are convex combinations
of ``states`` and the effect set is ``cone(effects) ∩ (unit - cone(effects))``.
Oracle GPTs (quantum, spin factor, quaternionic) decide membership by
eigenvalue or norm tests and carry a fixed, seeded sample of generators for
span checks and sampled estimates.
"""
import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidArgument, SizeLimitExceeded, UnsupportedRepresentation
from .hermitian import chi_vector, hermitian_basis, quaternionic_basis
from .lp import linprog
from .polytope import enumerate_vertices, extreme_rays, hull_residual

POLYTOPIC = "polytopic"
ORACLE_FAMILIES = ("quantum", "spin", "quaternionic")

MEMBER_TOL = 1e-9
VALIDATE_TOL = 1e-12
SAMPLE_SEED = 0
SAMPLE_COUNT = 24


def kind_family(kind):
    """Split a kind string into ``(family, parameter)``."""
    if kind == POLYTOPIC:
        return POLYTOPIC, None
    fam, _, p = str(kind).partition(":")
    if fam in ORACLE_FAMILIES and p.isdigit() and int(p) >= 1:
        return fam, int(p)
    raise InvalidArgument(f"unknown GPT kind {kind!r}")


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Gpt:
    """A GPT given by its unit effect and generator lists.

    ``state_map`` (oracle kinds only) restricts the state set to the image
    of the family's standard state set under that matrix.
    """
    unit: np.ndarray
    states: np.ndarray
    effects: np.ndarray
    kind: str = POLYTOPIC
    unrestricted: bool = False
    state_map: np.ndarray = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        unit = np.asarray(self.unit, dtype=float).ravel()
        d = unit.size
        if d == 0:
            raise InvalidArgument("GPT dimension must be positive")
        try:
            states = np.asarray(self.states, dtype=float).reshape(-1, d)
            effects = np.asarray(self.effects, dtype=float).reshape(-1, d)
        except ValueError as exc:
            raise InvalidArgument(f"generator length does not match dim {d}") from exc
        if not (np.all(np.isfinite(unit)) and np.all(np.isfinite(states)) and np.all(np.isfinite(effects))):
            raise InvalidArgument("GPT entries must be finite")
        fam, p = kind_family(self.kind)
        object.__setattr__(self, "unit", _frozen(unit))
        object.__setattr__(self, "states", _frozen(states))
        object.__setattr__(self, "effects", _frozen(effects))
        object.__setattr__(self, "unrestricted", bool(self.unrestricted))
        if self.state_map is not None:
            if fam == POLYTOPIC:
                raise InvalidArgument("state_map is only meaningful for oracle GPTs")
            object.__setattr__(self, "state_map", _frozen(np.asarray(self.state_map).reshape(d, d)))
        expected = {"quantum": lambda n: n * n, "spin": lambda n: n + 1,
                    "quaternionic": lambda n: 2 * n * n - n}.get(fam)
        if expected is not None and expected(p) != d:
            raise InvalidArgument(f"kind {self.kind} requires dim {expected(p)}, got {d}")

    @property
    def dim(self):
        return self.unit.size

    @property
    def family(self):
        return kind_family(self.kind)

    @property
    def is_polytopic(self):
        return self.kind == POLYTOPIC

    # cached H-descriptions for polytopic membership
    @cached_property
    def state_facets(self):
        if not self.is_polytopic or np.linalg.matrix_rank(self.states) < self.dim:
            return None
        try:
            return extreme_rays(self.states, max_subsets=500_000)
        except SizeLimitExceeded:
            return None

    @cached_property
    def effect_facets(self):
        if not self.is_polytopic or np.linalg.matrix_rank(self.effects) < self.dim:
            return None
        try:
            return extreme_rays(self.effects, max_subsets=500_000)
        except SizeLimitExceeded:
            return None

    @cached_property
    def effect_vertices(self):
        """Vertices of the effect polytope, or None if the enumeration is too large."""
        F = self.effect_facets
        if F is None:
            return None
        A = np.vstack([-F, F])
        b = np.concatenate([np.zeros(len(F)), F @ self.unit])
        try:
            return enumerate_vertices(A, b, max_subsets=200_000)
        except SizeLimitExceeded:
            return None

    @cached_property
    def _inverse_state_map(self):
        return None if self.state_map is None else np.linalg.inv(self.state_map)


# ---------------------------------------------------------------- pairing

def pair(gpt, state, effect):
    """Outcome probability ``(state, effect)`` in the internal convention."""
    s = np.asarray(state, dtype=float).ravel()
    e = np.asarray(effect, dtype=float).ravel()
    if s.size != gpt.dim or e.size != gpt.dim:
        raise InvalidArgument(f"vectors must have length {gpt.dim}")
    return float(s @ e)


def probability_table(gpt):
    return gpt.states @ gpt.effects.T


# ---------------------------------------------------------------- membership

def _rows(v, d):
    V = np.asarray(v, dtype=float)
    single = V.ndim == 1
    V = V.reshape(-1, d)
    return V, single


def _out(r, single):
    return float(r[0]) if single else r


def _psd_residual(H):
    lam = np.linalg.eigvalsh(H)
    return np.maximum(0.0, -lam[..., 0])


def _cone_residual(gpt, V, which):
    fam, p = gpt.family
    if fam == POLYTOPIC:
        F = gpt.state_facets if which == "state" else gpt.effect_facets
        if F is None:
            gens = gpt.states if which == "state" else gpt.effects
            return np.array([hull_residual(gens, x, cone=True) for x in V])
        if len(V) == 0:
            return np.zeros(0)
        return np.maximum(0.0, -(V @ F.T).min(axis=1)) + 0.0
    if fam == "quantum":
        return _psd_residual(hermitian_basis(p).mat(V))
    if fam == "spin":
        return np.maximum(0.0, np.linalg.norm(V[:, 1:], axis=1) - V[:, 0])
    return _psd_residual(quaternionic_basis(p).mat(V))


def state_cone_residual(gpt, v):
    """How far ``v`` lies outside the state cone (0 for members)."""
    V, single = _rows(v, gpt.dim)
    if gpt._inverse_state_map is not None:
        V = V @ gpt._inverse_state_map.T
    return _out(_cone_residual(gpt, V, "state"), single)


def effect_cone_residual(gpt, v):
    V, single = _rows(v, gpt.dim)
    return _out(_cone_residual(gpt, V, "effect"), single)


def state_residual(gpt, v):
    V, single = _rows(v, gpt.dim)
    norm = np.abs(V @ gpt.unit - 1.0)
    return _out(np.maximum(norm, np.atleast_1d(state_cone_residual(gpt, V))), single)


def effect_residual(gpt, v):
    V, single = _rows(v, gpt.dim)
    r = np.maximum(np.atleast_1d(effect_cone_residual(gpt, V)),
                   np.atleast_1d(effect_cone_residual(gpt, gpt.unit - V)))
    return _out(r, single)


def is_state(gpt, v, tol=MEMBER_TOL):
    return np.all(np.atleast_1d(state_residual(gpt, v)) <= tol)


def is_effect(gpt, v, tol=MEMBER_TOL):
    return np.all(np.atleast_1d(effect_residual(gpt, v)) <= tol)


def lp_state_residual(gpt, v):
    """LP-based state-cone residual for polytopic GPTs (independent of the facet cache)."""
    return hull_residual(gpt.states, v, cone=True)


def lp_effect_residual(gpt, v):
    v = np.asarray(v, dtype=float)
    return max(hull_residual(gpt.effects, v, cone=True),
               hull_residual(gpt.effects, gpt.unit - v, cone=True))


# ---------------------------------------------------------------- support functions

def effect_support(gpt, c):
    """``max (c, e)`` over the effect set."""
    c = np.asarray(c, dtype=float).ravel()
    fam, p = gpt.family
    if fam == POLYTOPIC:
        V = gpt.effect_vertices
        if V is not None and len(V):
            return float(max(0.0, (V @ c).max()))
        G = gpt.effects
        k = len(G)
        res = linprog(-np.concatenate([G @ c, np.zeros(k)]),
                      A_eq=np.hstack([G.T, G.T]), b_eq=gpt.unit)
        if not res.success:
            raise InvalidArgument("effect set is empty or unbounded")
        return -res.fun
    if fam == "quantum":
        lam = np.linalg.eigvalsh(hermitian_basis(p).mat(c))
        return float(lam[lam > 0].sum())
    if fam == "spin":
        return float(max(0.0, c[0], 0.5 * (c[0] + np.linalg.norm(c[1:]))))
    lam = np.linalg.eigvalsh(quaternionic_basis(p).mat(c))
    return float(0.5 * lam[lam > 0].sum())


def state_support(gpt, c):
    """``max (w, c)`` over the normalized state set."""
    c = np.asarray(c, dtype=float).ravel()
    fam, p = gpt.family
    if fam == POLYTOPIC:
        return float((gpt.states @ c).max())
    if gpt.state_map is not None:
        c = gpt.state_map.T @ c
    if fam == "quantum":
        return float(np.linalg.eigvalsh(hermitian_basis(p).mat(c))[-1])
    if fam == "spin":
        return float(c[0] + np.linalg.norm(c[1:]))
    return float(np.linalg.eigvalsh(quaternionic_basis(p).mat(c))[-1])


def center_state(gpt):
    """A canonical interior state: the maximally mixed state or the generator barycenter."""
    fam, p = gpt.family
    if fam == "quantum":
        w = hermitian_basis(p).vec(np.eye(p) / p)
    elif fam == "spin":
        w = np.zeros(p + 1)
        w[0] = 1.0
    elif fam == "quaternionic":
        w = quaternionic_basis(p).vec(np.eye(2 * p) / p)
    else:
        return gpt.states.mean(axis=0)
    if gpt.state_map is not None:
        w = gpt.state_map @ w
    return w


# ---------------------------------------------------------------- sampling

def _haar_vectors(n, count, rng):
    z = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _sphere(d, count, rng):
    x = rng.normal(size=(count, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _quaternionic_pure(n, a, b):
    basis = quaternionic_basis(n)
    out = []
    for ai, bi in zip(a, b):
        v = chi_vector(ai, bi)
        out.append(basis.vec(v @ v.conj().T))
    return np.array(out).reshape(-1, basis.dim)


def sample_states(gpt, count, rng):
    """Random extreme (pure) states, or random mixtures for polytopic GPTs."""
    fam, p = gpt.family
    if fam == POLYTOPIC:
        w = rng.dirichlet(np.ones(len(gpt.states)) * 0.5, size=count)
        return w @ gpt.states
    if fam == "quantum":
        psi = _haar_vectors(p, count, rng)
        out = hermitian_basis(p).vec(np.einsum("ki,kj->kij", psi, psi.conj()))
    elif fam == "spin":
        out = np.hstack([np.ones((count, 1)), _sphere(p, count, rng)])
    else:
        z = _haar_vectors(2 * p, count, rng)
        out = _quaternionic_pure(p, z[:, :p], z[:, p:])
    if gpt.state_map is not None:
        out = out @ gpt.state_map.T
    return out


def sample_effects(gpt, count, rng):
    """Random effects with spectra spread over [0, 1] (mixtures of generators for polytopes)."""
    fam, p = gpt.family
    if fam == POLYTOPIC:
        pts = np.vstack([gpt.effects, np.zeros(gpt.dim), gpt.unit])
        w = rng.dirichlet(np.ones(len(pts)) * 0.5, size=count)
        return w @ pts
    if fam == "spin":
        n = rng.random(count)
        r = np.minimum(n, 1 - n) * np.sqrt(rng.random(count))
        return np.hstack([n[:, None], r[:, None] * _sphere(p, count, rng)])
    if fam == "quantum":
        basis = hermitian_basis(p)
        H = basis.mat(rng.normal(size=(count, basis.dim)))
    else:
        basis = quaternionic_basis(p)
        H = basis.mat(rng.normal(size=(count, basis.dim)))
    lam, U = np.linalg.eigh(H)
    lo, hi = lam.min(axis=1, keepdims=True), lam.max(axis=1, keepdims=True)
    mix = rng.random((count, 2))
    a = np.minimum(mix[:, :1], mix[:, 1:])
    b = np.maximum(mix[:, :1], mix[:, 1:])
    f = a + (b - a) * (lam - lo) / np.where(hi - lo > 0, hi - lo, 1.0)
    E = np.einsum("kij,kj,klj->kil", U, f, U.conj())
    return basis.vec(E)


# ---------------------------------------------------------------- validation

@dataclass
class ValidationReport:
    failures: list

    @property
    def ok(self):
        return not self.failures

    def to_dict(self):
        return {"ok": self.ok, "failures": self.failures}


def validate(gpt, tol=VALIDATE_TOL, member_tol=MEMBER_TOL):
    """Check the GPT invariants; failures are returned as data, never raised."""
    fails = []
    norm = gpt.states @ gpt.unit - 1.0
    for i in np.flatnonzero(np.abs(norm) > tol):
        fails.append({"check": "normalization", "state": int(i), "residual": float(abs(norm[i]))})
    P = probability_table(gpt)
    for i, j in zip(*np.nonzero(P < -tol)):
        fails.append({"check": "probability-range", "state": int(i), "effect": int(j),
                      "residual": float(-P[i, j])})
    for i, j in zip(*np.nonzero(P > 1 + tol)):
        fails.append({"check": "probability-range", "state": int(i), "effect": int(j),
                      "residual": float(P[i, j] - 1)})
    if not gpt.is_polytopic:
        r = np.atleast_1d(state_cone_residual(gpt, gpt.states))
        for i in np.flatnonzero(r > member_tol):
            fails.append({"check": "state-membership", "state": int(i), "residual": float(r[i])})
    r = np.atleast_1d(effect_residual(gpt, gpt.effects))
    for i in np.flatnonzero(r > member_tol):
        fails.append({"check": "complement-membership", "effect": int(i), "residual": float(r[i])})
    if len(gpt.states) == 0 or np.linalg.matrix_rank(gpt.states) < gpt.dim:
        fails.append({"check": "state-span", "residual": float(gpt.dim - np.linalg.matrix_rank(gpt.states))})
    if len(gpt.effects) == 0 or np.linalg.matrix_rank(gpt.effects) < gpt.dim:
        fails.append({"check": "effect-span", "residual": float(gpt.dim - np.linalg.matrix_rank(gpt.effects))})
    return ValidationReport(fails)


def dual_effect_generators(gpt):
    """Extreme rays of the cone dual to the state cone, scaled to touch the unit.

    Each ray ``r`` is normalized so that ``max_w (w, r) = 1`` over the states,
    which places it on the boundary of ``{e : 0 <= (w, e) <= 1}``.
    """
    if not gpt.is_polytopic:
        raise UnsupportedRepresentation("dual effect generators need a polytopic GPT")
    rays = extreme_rays(gpt.states)
    scale = (gpt.states @ rays.T).max(axis=0)
    out = rays / scale[:, None]
    out[np.abs(out) < 1e-13] = 0.0
    return out


# ---------------------------------------------------------------- constructors

def make_classical(n):
    if int(n) < 1:
        raise InvalidArgument("classical GPT needs n >= 1")
    n = int(n)
    I = np.eye(n)
    return Gpt(np.ones(n), I, I, unrestricted=True, label=f"classical:{n}")


def make_gbit():
    effects = np.array([[1, 1, 0], [1, -1, 0], [1, 0, 1], [1, 0, -1]], dtype=float)
    alphas = np.array([[1, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1]], dtype=float)
    return Gpt(np.array([2.0, 0.0, 0.0]), alphas / 2, effects, unrestricted=True, label="gbit")


def make_polygon(k):
    if int(k) < 3:
        raise InvalidArgument("polygon needs k >= 3")
    k = int(k)
    t = 2 * np.pi * np.arange(k) / k
    states = np.column_stack([np.ones(k), np.cos(t), np.sin(t)])
    states[np.abs(states) < 1e-15] = 0.0
    shell = Gpt(np.array([1.0, 0.0, 0.0]), states, np.eye(3))
    effects = dual_effect_generators(shell)
    return Gpt(np.array([1.0, 0.0, 0.0]), states, effects, unrestricted=True, label=f"polygon:{k}")


def _quantum_frame(n):
    vecs = [np.eye(n)[i].astype(complex) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            for ph in (1.0, 1j):
                v = np.zeros(n, dtype=complex)
                v[i] = 1.0
                v[j] = ph
                vecs.append(v / np.sqrt(2))
    return np.array(vecs)


def make_quantum(n, samples=SAMPLE_COUNT, seed=SAMPLE_SEED):
    if int(n) < 2:
        raise InvalidArgument("quantum GPT needs n >= 2")
    n = int(n)
    basis = hermitian_basis(n)
    psi = np.vstack([_quantum_frame(n), _haar_vectors(n, samples, np.random.default_rng(seed))])
    P = basis.vec(np.einsum("ki,kj->kij", psi, psi.conj()))
    return Gpt(basis.vec(np.eye(n)), P, P, kind=f"quantum:{n}", unrestricted=True, label=f"quantum:{n}")


def make_spin_factor(d, samples=SAMPLE_COUNT, seed=SAMPLE_SEED):
    """Ball of radius one in the affine slice ``(1, x)``; self-dual.

    ``d = 1`` is returned as the (exact) polytopic segment.
    """
    if int(d) < 1:
        raise InvalidArgument("spin factor needs d >= 1")
    d = int(d)
    unit = np.zeros(d + 1)
    unit[0] = 1.0
    axes = np.vstack([np.eye(d), -np.eye(d)])
    if d == 1:
        pts = np.array([[1.0], [-1.0]])
        kind = POLYTOPIC
    else:
        pts = np.vstack([axes, _sphere(d, samples, np.random.default_rng(seed))])
        kind = f"spin:{d}"
    states = np.hstack([np.ones((len(pts), 1)), pts])
    return Gpt(unit, states, 0.5 * states, kind=kind, unrestricted=True, label=f"spin:{d}")


def _quaternionic_frame(n):
    a, b = [], []
    for i in range(n):
        e = np.zeros(n, dtype=complex)
        e[i] = 1.0
        a.append(e)
        b.append(np.zeros(n, dtype=complex))
    s = 1 / np.sqrt(2)
    for i in range(n):
        for j in range(i + 1, n):
            for qa, qb in ((1.0, 0.0), (1j, 0.0), (0.0, 1.0), (0.0, 1j)):
                va = np.zeros(n, dtype=complex)
                vb = np.zeros(n, dtype=complex)
                va[i] = s
                va[j] += s * qa
                vb[j] += s * qb
                a.append(va)
                b.append(vb)
    return np.array(a), np.array(b)


def make_quaternionic(n, samples=SAMPLE_COUNT, seed=SAMPLE_SEED):
    if int(n) < 2:
        raise InvalidArgument("quaternionic GPT needs n >= 2")
    n = int(n)
    basis = quaternionic_basis(n)
    a, b = _quaternionic_frame(n)
    z = _haar_vectors(2 * n, samples, np.random.default_rng(seed))
    P = np.vstack([_quaternionic_pure(n, a, b), _quaternionic_pure(n, z[:, :n], z[:, n:])])
    unit = basis.vec(np.eye(2 * n))
    return Gpt(unit, P, P, kind=f"quaternionic:{n}", unrestricted=True, label=f"quaternionic:{n}")


def named_gpt(name):
    """Built-in GPTs: gbit, qubit, classical:n, quantum:n, spin:d, quaternionic:n, polygon:k."""
    name = str(name).strip()
    if name == "gbit":
        return make_gbit()
    if name == "qubit":
        return make_quantum(2)
    fam, _, p = name.partition(":")
    makers = {"classical": make_classical, "quantum": make_quantum, "spin": make_spin_factor,
              "quaternionic": make_quaternionic, "polygon": make_polygon}
    if fam in makers and p.isdigit():
        return makers[fam](int(p))
    raise InvalidArgument(f"unknown GPT name {name!r}")


# ---------------------------------------------------------------- JSON

def to_dict(gpt):
    out = {"dim": gpt.dim, "unit": gpt.unit.tolist(), "states": gpt.states.tolist(),
           "effects": gpt.effects.tolist(), "kind": gpt.kind, "unrestricted": gpt.unrestricted}
    if gpt.state_map is not None:
        out["state_map"] = gpt.state_map.tolist()
    if gpt.label:
        out["label"] = gpt.label
    return out


def from_dict(d):
    try:
        dim = int(d["dim"])
        g = Gpt(d["unit"], np.asarray(d["states"], dtype=float).reshape(-1, dim),
                np.asarray(d["effects"], dtype=float).reshape(-1, dim),
                kind=d.get("kind", POLYTOPIC), unrestricted=d.get("unrestricted", False),
                state_map=d.get("state_map"), label=d.get("label", ""))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidArgument):
            raise
        raise InvalidArgument(f"malformed GPT JSON: {exc}") from exc
    if g.dim != dim:
        raise InvalidArgument("declared dim does not match the unit vector")
    return g


def dumps(gpt):
    return json.dumps(to_dict(gpt), sort_keys=True)


def loads(text):
    return from_dict(json.loads(text))


def save(gpt, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(gpt) + "\n")


def load(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
