"""Set-valued classical simulations of GPTs.

A Holevo-style simulation maps every state of A to the set of probability
vectors ``p`` on the vertices of a polytope with ``L p = f(w)``, where the
columns of ``L`` are the vertices and ``f(w) = (1 - eps) w + eps (u, w) mu``
contracts the state set toward ``mu``. Effects are mapped by the single
linear map ``L^T``, so the simulation is always measurement-univalent.
"""
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from . import gpt as G
from .errors import InternalError, InvalidArgument, UnsupportedRepresentation
from .lp import linprog
from .polytope import extreme_points, hull_residual

SUPPORT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Simulation:
    """Classical simulation of ``domain`` on ``n`` vertices.

    ``psi`` is set only for simulations that come from an embedding into a
    classical GPT; their simulating sets are the singletons ``{psi w}``.
    """
    domain: G.Gpt
    vertices: np.ndarray          # dim x n, the matrix L
    center: np.ndarray
    epsilon: float = 0.0
    psi: np.ndarray = None
    effect_matrix: np.ndarray = None

    def __post_init__(self):
        L = np.asarray(self.vertices, dtype=float)
        if L.ndim != 2 or L.shape[0] != self.domain.dim:
            raise InvalidArgument("vertex matrix must have one row per domain coordinate")
        object.__setattr__(self, "vertices", L)
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).ravel())
        if self.effect_matrix is None:
            object.__setattr__(self, "effect_matrix", L.T.copy())

    @property
    def n(self):
        return self.vertices.shape[1]

    @property
    def codomain(self):
        return G.make_classical(self.n)

    @property
    def effect_map(self):
        """The linear map sending effects of A to effects of C_n."""
        return self.effect_matrix

    @property
    def univalent_by_construction(self):
        return self.psi is not None

    def shrink(self, w):
        w = np.asarray(w, dtype=float)
        return (1 - self.epsilon) * w + self.epsilon * np.outer(w @ self.domain.unit, self.center).reshape(w.shape)

    def to_dict(self):
        out = {"domain": G.to_dict(self.domain), "vertices": self.vertices.tolist(),
               "center": self.center.tolist(), "epsilon": self.epsilon, "n": self.n}
        if self.psi is not None:
            out["psi"] = np.asarray(self.psi).tolist()
            out["effect_matrix"] = self.effect_matrix.tolist()
        return out


def simulation_from_dict(d):
    try:
        dom = G.from_dict(d["domain"])
        psi = d.get("psi")
        return Simulation(dom, np.asarray(d["vertices"], dtype=float), d["center"],
                          float(d.get("epsilon", 0.0)),
                          psi=None if psi is None else np.asarray(psi, dtype=float),
                          effect_matrix=None if psi is None else np.asarray(d["effect_matrix"], dtype=float))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidArgument):
            raise
        raise InvalidArgument(f"malformed simulation JSON: {exc}") from exc


def save(sim, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(sim.to_dict(), sort_keys=True) + "\n")


def load(path):
    with open(path, encoding="utf-8") as fh:
        return simulation_from_dict(json.load(fh))


# ---------------------------------------------------------------- sandwich

@dataclass
class SandwichPolytope:
    vertices: np.ndarray
    inner_factor: float
    center: np.ndarray
    directions: int = 0
    history: list = field(default_factory=list)
    inner_ok: bool = True
    outer_ok: bool = True
    inner_residual: float = 0.0
    outer_residual: float = 0.0
    check_directions: int = 0

    def to_dict(self):
        return {"vertices": self.vertices.tolist(), "inner_factor": self.inner_factor,
                "center": self.center.tolist(), "directions": self.directions,
                "history": self.history, "inner_ok": self.inner_ok, "outer_ok": self.outer_ok,
                "inner_residual": self.inner_residual, "outer_residual": self.outer_residual,
                "check_directions": self.check_directions}


def _ball_like(gpt):
    fam, p = gpt.family
    if fam == "spin":
        return p
    if fam == "quantum" and p == 2:
        return 3
    return None


def _directions(k, count):
    """``count`` well-spread unit vectors in R^k (k = 1, 2, 3)."""
    if k == 1:
        return np.array([[1.0], [-1.0]])
    if k == 2:
        t = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(t), np.sin(t)])
    i = np.arange(count) + 0.5
    z = 1 - 2 * i / count
    r = np.sqrt(1 - z * z)
    phi = np.pi * (1 + 5 ** 0.5) * i
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def _boundary(gpt, center, dirs, tol=1e-13):
    """Points where the rays ``center + t dir`` leave the state set (vectorized bisection)."""
    lo = np.zeros(len(dirs))
    hi = np.ones(len(dirs))
    while True:
        out = np.atleast_1d(G.state_cone_residual(gpt, center + hi[:, None] * dirs)) > 0
        if out.all():
            break
        hi = np.where(out, hi, 2 * hi)
        if hi.max() > 1e8:
            raise InvalidArgument("state set is unbounded along a direction")
    while (hi - lo).max() > tol:
        mid = 0.5 * (lo + hi)
        inside = np.atleast_1d(G.state_cone_residual(gpt, center + mid[:, None] * dirs)) <= 0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return center + lo[:, None] * dirs


def sandwich_polytope(gpt, lam, center=None, start=8, max_directions=4096, tol=G.MEMBER_TOL):
    """Polytope P with ``lam (Omega - c) + c  within  P  within  Omega``.

    Vertices are boundary points along N spread directions; N doubles until
    the inner inclusion verifies by LP on ``max(360, 8N)`` check directions.
    """
    lam = float(lam)
    if not 0.0 < lam < 1.0:
        raise InvalidArgument("inner factor must lie in (0, 1)")
    c = G.center_state(gpt) if center is None else np.asarray(center, dtype=float).ravel()
    if gpt.is_polytopic:
        if not G.is_state(gpt, c, tol):
            raise InvalidArgument("center is not a state")
        V = gpt.states[extreme_points(gpt.states)]
        return SandwichPolytope(V, lam, c, directions=len(V), history=[len(V)])
    k = _ball_like(gpt)
    if k is None or k > 3:
        raise UnsupportedRepresentation("sandwich construction needs a ball-type state set of dimension <= 3")
    if abs(c @ gpt.unit - 1) > tol:
        raise InvalidArgument("center is not normalized")
    H = null_space(gpt.unit[None, :]).T      # orthonormal basis of the normalized slice
    probe = _boundary(gpt, c, _directions(k, 64) @ H)
    margin = float(np.linalg.norm(probe - c, axis=1).min())
    if not np.isfinite(margin) or margin < 1e-6 or G.state_cone_residual(gpt, c) > 0:
        raise InvalidArgument("center is not strictly interior", margin=margin)
    history = []
    N = max(int(start), k + 1)
    while True:
        V = _boundary(gpt, c, _directions(k, N) @ H)
        history.append(N)
        M = max(360, 8 * N)
        checks = c + lam * (_boundary(gpt, c, _directions(k, M) @ H) - c)
        res = max(hull_residual(V, x) for x in checks)
        if res <= tol or N >= max_directions:
            break
        N *= 2
    outer = float(np.max(np.atleast_1d(G.state_residual(gpt, V))))
    return SandwichPolytope(V, lam, c, directions=N, history=history,
                            inner_ok=res <= tol, outer_ok=outer <= tol,
                            inner_residual=float(res), outer_residual=outer, check_directions=M)


# ---------------------------------------------------------------- Holevo simulation

def holevo_simulation(gpt, epsilon=0.0, center=None, **kw):
    """Classical simulation on the vertices of the state polytope (or a sandwich polytope)."""
    epsilon = float(epsilon)
    if epsilon < 0:
        raise InvalidArgument("epsilon must be nonnegative")
    if gpt.is_polytopic:
        V = gpt.states[extreme_points(gpt.states)]
        return Simulation(gpt, V.T, G.center_state(gpt), 0.0)
    if epsilon <= 0 or epsilon >= 1:
        raise InvalidArgument("oracle state sets need 0 < epsilon < 1")
    sw = sandwich_polytope(gpt, 1 - epsilon, center, **kw)
    if not (sw.inner_ok and sw.outer_ok):
        raise InternalError("sandwich inclusions could not be certified", history=sw.history)
    return Simulation(gpt, sw.vertices.T, sw.center, epsilon)


def simulation_from_embedding(emb):
    """View an embedding into a classical GPT as a (univalent) simulation."""
    B = emb.codomain
    if not (B.is_polytopic and B.dim == len(B.states)
            and np.allclose(B.states, np.eye(B.dim)) and np.allclose(B.unit, 1.0)):
        raise InvalidArgument("codomain must be a classical GPT")
    # phi^T is a left inverse of psi, so it maps simulating states back onto A
    return Simulation(emb.domain, np.asarray(emb.phi).T, G.center_state(emb.domain), 0.0,
                      psi=np.asarray(emb.psi), effect_matrix=np.asarray(emb.phi))


def _preimage_system(sim, state):
    t = sim.shrink(np.asarray(state, dtype=float).ravel())
    L = sim.vertices
    A_eq = np.vstack([L, np.ones((1, sim.n))])
    b_eq = np.append(t, 1.0)
    return A_eq, b_eq


def preimage(sim, state):
    """A point of Sim(state), or None if the preimage is empty."""
    if sim.psi is not None:
        return sim.psi @ np.asarray(state, dtype=float)
    A_eq, b_eq = _preimage_system(sim, state)
    res = linprog(np.zeros(sim.n), A_eq=A_eq, b_eq=b_eq)
    return res.x if res.success else None


def sim_set_dimension(sim, state):
    """Affine dimension of the simulating set of ``state`` (0 means a single point)."""
    if sim.psi is not None:
        return 0
    A_eq, b_eq = _preimage_system(sim, state)
    n = sim.n
    support = []
    for i in range(n):
        c = np.zeros(n)
        c[i] = -1.0
        res = linprog(c, A_eq=A_eq, b_eq=b_eq)
        if not res.success:
            raise InternalError("state has no simulating set", status=res.status)
        if -res.fun > SUPPORT_TOL:
            support.append(i)
    M = A_eq[:, support]
    return int(len(support) - np.linalg.matrix_rank(M, tol=1e-9))


def is_preparation_multivalent(sim, max_generators=16):
    """Search the barycenter and pairwise midpoints for a state with a non-singleton set.

    Returns ``(found, witness, dimension)``. A negative answer means no
    witness was found among the candidates, not a proof of univalence.
    """
    S = sim.domain.states[:max_generators]
    cands = [S.mean(axis=0)]
    cands += [(S[i] + S[j]) / 2 for i in range(len(S)) for j in range(i + 1, len(S))]
    for w in cands:
        d = sim_set_dimension(sim, w)
        if d >= 1:
            return True, w, d
    return False, None, 0


def check_simulation(sim, samples=0, seed=0):
    """Max probability deviation between A and the simulation.

    Covers every (state generator, effect generator) pair plus ``samples``
    random (state, effect) pairs; the simulating state is an LP preimage.
    """
    A = sim.domain
    rng = np.random.default_rng(seed)
    W = A.states
    E = A.effects
    dev = 0.0
    EC = E @ sim.effect_map.T
    for w in W:
        p = preimage(sim, w)
        if p is None:
            raise InternalError("state generator has no simulating set")
        dev = max(dev, float(np.abs(E @ w - EC @ p).max()))
    if samples:
        Ws = G.sample_states(A, samples, rng)
        Es = G.sample_effects(A, samples, rng)
        for w, e in zip(Ws, Es):
            p = preimage(sim, w)
            if p is None:
                raise InternalError("sampled state has no simulating set")
            dev = max(dev, abs(float(w @ e - (sim.effect_map @ e) @ p)))
    eff_img = EC
    positivity = float(max(0.0, -eff_img.min(), eff_img.max() - 1.0))
    return {"deviation": dev, "effect_range_residual": positivity,
            "pairs": len(W) * len(E) + samples, "seed": seed}
