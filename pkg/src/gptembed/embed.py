"""Epsilon-embeddings between GPTs: verification, transformations, constructions.

An embedding of A into B is a pair of matrices: ``phi`` (dim B x dim A) acts
on effects and ``psi`` (dim B x dim A) acts on states. With the plain dot
pairing, outcome probabilities are preserved exactly iff ``psi.T @ phi = I``.
"""
import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import gpt as G
from .errors import InvalidArgument, PreconditionViolation
from .hermitian import hermitian_basis, quaternionic_basis
from .polytope import extreme_points

DEFAULT_SAMPLES = 256
FACT_TOL = 1e-9


@dataclass
class VerificationReport:
    epsilon: float
    exact: bool
    positivity_ok: bool
    normalization_ok: bool
    unital: bool
    residuals: dict
    samples: int = 0
    seed: int = 0
    facts: dict = field(default_factory=dict)

    def to_dict(self):
        return {"epsilon": self.epsilon, "epsilon_exact": self.exact,
                "positivity_ok": self.positivity_ok, "normalization_ok": self.normalization_ok,
                "unital": self.unital, "residuals": self.residuals,
                "samples": self.samples, "seed": self.seed, "facts": self.facts}


@dataclass(frozen=True, eq=False)
class Embedding:
    domain: G.Gpt
    codomain: G.Gpt
    phi: np.ndarray
    psi: np.ndarray
    report: VerificationReport = None

    def __post_init__(self):
        shape = (self.codomain.dim, self.domain.dim)
        phi = np.array(self.phi, dtype=float)
        psi = np.array(self.psi, dtype=float)
        if phi.shape != shape or psi.shape != shape:
            raise InvalidArgument(f"maps must have shape {shape}, got {phi.shape} and {psi.shape}")
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(psi))):
            raise InvalidArgument("map entries must be finite")
        phi.setflags(write=False)
        psi.setflags(write=False)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "psi", psi)

    @property
    def projector(self):
        """``P = phi psi^T``, idempotent for exact embeddings."""
        return self.phi @ self.psi.T


def _domain_states(A, samples, rng):
    if A.is_polytopic:
        return A.states
    return np.vstack([A.states, G.sample_states(A, samples, rng)])


def _domain_effects(A, samples, rng):
    if A.is_polytopic:
        return A.effects
    return np.vstack([A.effects, G.sample_effects(A, samples, rng)])


def deviation(emb, states=None):
    """Max over effects of the probability deviation, for each given state."""
    A = emb.domain
    W = A.states if states is None else np.atleast_2d(states)
    M = np.eye(A.dim) - emb.psi.T @ emb.phi
    C = W @ M
    if np.abs(C).max() == 0.0:
        return np.zeros(len(W))
    return np.array([max(G.effect_support(A, c), G.effect_support(A, -c)) for c in C])


def verify(emb, samples=DEFAULT_SAMPLES, seed=0, tol=G.MEMBER_TOL, facts=True):
    """Measure epsilon, positivity, normalization and unitality of an embedding.

    For polytopic domains the state maximum runs over all state generators
    and the effect maximum is solved exactly, so epsilon is exact. For oracle
    domains the states are the generator sample plus ``samples`` seeded
    random pure states, so epsilon is a lower bound over that sample.
    """
    A, B = emb.domain, emb.codomain
    rng = np.random.default_rng(seed)
    W = _domain_states(A, samples, rng)
    E = _domain_effects(A, samples, rng)
    eps = float(deviation(emb, W).max())
    imgE = E @ emb.phi.T
    imgW = W @ emb.psi.T
    pos_eff = float(np.max(np.atleast_1d(G.effect_cone_residual(B, imgE)), initial=0.0))
    unit_img = emb.phi @ A.unit
    pos_unit = float(G.effect_residual(B, unit_img))
    pos_state = float(np.max(np.atleast_1d(G.state_cone_residual(B, imgW)), initial=0.0))
    norm_res = float(np.abs(imgW @ B.unit - 1.0).max())
    unital_res = float(np.abs(unit_img - B.unit).max())
    residuals = {"effect_positivity": pos_eff, "unit_image": pos_unit,
                 "state_positivity": pos_state, "normalization": norm_res,
                 "unitality": unital_res}
    rep = VerificationReport(
        epsilon=eps, exact=A.is_polytopic,
        positivity_ok=max(pos_eff, pos_unit, pos_state) <= tol,
        normalization_ok=norm_res <= tol, unital=unital_res <= tol,
        residuals=residuals, samples=0 if A.is_polytopic else samples + len(A.states),
        seed=seed)
    if facts and eps <= tol:
        rep.facts = _facts(emb, rep.unital, samples=min(samples, 64), seed=seed)
    return rep


def verified(emb, **kw):
    """Return a copy of ``emb`` carrying a fresh verification report."""
    return replace(emb, report=verify(emb, **kw))


def _fact(r):
    return {"residual": float(r), "pass": bool(r <= FACT_TOL)}


def _facts(emb, unital, samples=64, seed=0):
    A, B = emb.domain, emb.codomain
    phi, psi = emb.phi, emb.psi
    I = np.eye(A.dim)
    P = phi @ psi.T
    Pd = psi @ phi.T
    out = {
        "psi_T_phi_identity": _fact(np.abs(psi.T @ phi - I).max()),
        "phi_T_psi_identity": _fact(np.abs(phi.T @ psi - I).max()),
        "projector_idempotent": _fact(np.abs(P @ P - P).max()),
        "dual_projector_idempotent": _fact(np.abs(Pd @ Pd - Pd).max()),
    }
    if unital:
        out["projector_fixes_unit"] = _fact(np.abs(P @ B.unit - B.unit).max())
    if A.unrestricted:
        rng = np.random.default_rng(seed + 1)
        EA = _domain_effects(A, samples, rng)
        EB = np.vstack([B.effects, G.sample_effects(B, samples, rng)])
        WB = np.vstack([B.states, G.sample_states(B, samples, rng)])
        mx = lambda r: float(np.max(np.atleast_1d(r), initial=0.0))
        out["phi_cone_image"] = _fact(mx(G.effect_cone_residual(B, EA @ phi.T)))
        # P(B+) lies in phi(A+): P b = phi(psi^T b) with psi^T b in A+
        out["projector_cone_image"] = _fact(mx(G.effect_cone_residual(A, EB @ psi)))
        out["projector_positive"] = _fact(mx(G.effect_cone_residual(B, EB @ P.T)))
        out["phi_dual_positive"] = _fact(mx(G.state_cone_residual(A, WB @ phi)))
    return out


def check_facts(emb, samples=64, seed=0, tol=FACT_TOL):
    """Residuals of the structural identities satisfied by exact embeddings."""
    rep = verify(emb, samples=samples, seed=seed, facts=False)
    if rep.epsilon > tol:
        raise PreconditionViolation("structural checks need an exact embedding",
                                    epsilon=rep.epsilon)
    return {k: v["residual"] for k, v in _facts(emb, rep.unital, samples, seed).items()}


def unitalize(emb, xi=None, tol=G.MEMBER_TOL):
    """Make an embedding unital: ``phi~(a) = phi(a) + (xi, a) (u_B - phi(u_A))``.

    The deviation at most doubles provided ``psi`` sends states to
    normalized states. ``xi`` defaults to the barycenter of the
    domain's state generators.
    """
    A, B = emb.domain, emb.codomain
    xi = A.states.mean(axis=0) if xi is None else np.asarray(xi, dtype=float).ravel()
    if xi.size != A.dim or not G.is_state(A, xi, tol):
        raise InvalidArgument("reference state is not a member of the domain")
    delta = B.unit - emb.phi @ A.unit
    return Embedding(A, B, emb.phi + np.outer(delta, xi), emb.psi)


def compose(first, second):
    """Embedding A -> C from A -> B followed by B -> C."""
    if first.codomain.dim != second.domain.dim:
        raise InvalidArgument("embeddings are not composable")
    return Embedding(first.domain, second.codomain, second.phi @ first.phi, second.psi @ first.psi)


def identity_embedding(gpt):
    return Embedding(gpt, gpt, np.eye(gpt.dim), np.eye(gpt.dim))


# ---------------------------------------------------------------- constructions

def classical_to_quantum(n):
    """Diagonal embedding of C_n into Q_n."""
    n = int(n)
    if n < 2:
        raise InvalidArgument("classical_to_quantum needs n >= 2")
    basis = hermitian_basis(n)
    D = basis.vec(np.array([np.diag(np.eye(n)[i]) for i in range(n)])).T
    return Embedding(G.make_classical(n), G.make_quantum(n), D, D)


def subspace_isometry(n, m):
    """Q_n into Q_m via ``X -> V X V^dagger`` with V the first-n-levels isometry (nonunital)."""
    n, m = int(n), int(m)
    if not m > n >= 2:
        raise InvalidArgument("subspace_isometry needs m > n >= 2")
    V = np.eye(m)[:, :n]
    bn, bm = hermitian_basis(n), hermitian_basis(m)
    M = bm.vec(np.einsum("ij,kjl,ml->kim", V, bn.basis, V)).T
    return Embedding(G.make_quantum(n), G.make_quantum(m), M, M)


_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _kron(factors):
    out = np.eye(1, dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def gamma_matrices(d):
    """d pairwise anticommuting Hermitian involutions on m = ceil(d/2) qubits."""
    d = int(d)
    if d < 1:
        raise InvalidArgument("need d >= 1")
    m = (d + 1) // 2
    out = []
    for i in range(1, d + 1):
        if i % 2:
            j = (i - 1) // 2
            mid = _PAULI["X"]
        else:
            j = i // 2 - 1
            mid = _PAULI["Y"]
        out.append(_kron([_PAULI["Z"]] * j + [mid] + [_PAULI["I"]] * (m - j - 1)))
    return np.array(out)


def spin_factor_embedding(d):
    """Spin factor V_d into Q_{2^m}: ``(n, x) -> n I + sum x_i gamma_i``; states get ``1/2^m``."""
    d = int(d)
    gam = gamma_matrices(d)
    m = (d + 1) // 2
    N = 2 ** m
    basis = hermitian_basis(N)
    mats = np.concatenate([np.eye(N, dtype=complex)[None], gam])
    phi = basis.vec(mats).T
    return Embedding(G.make_spin_factor(d), G.make_quantum(N), phi, phi / N)


def quaternionic_embedding(n):
    """Quaternionic H_n into Q_{2n} through the complex representation; states get a factor 1/2."""
    n = int(n)
    if n < 2:
        raise InvalidArgument("quaternionic_embedding needs n >= 2")
    phi = hermitian_basis(2 * n).vec(quaternionic_basis(n).basis).T
    return Embedding(G.make_quaternionic(n), G.make_quantum(2 * n), phi, phi / 2)


# ---------------------------------------------------------------- channels

def depolarizing(n, p):
    """Qubit/qudit depolarizing channel ``rho -> (1-p) rho + p tr(rho) I/n`` in state coordinates."""
    basis = hermitian_basis(int(n))
    u = basis.vec(np.eye(n))
    return (1 - p) * np.eye(n * n) + p * np.outer(u / n, u)


def pinching(n):
    """Complete dephasing in the computational basis, in state coordinates."""
    basis = hermitian_basis(int(n))
    diag = np.einsum("kii->ki", basis.basis)
    return basis.vec(np.einsum("ki,ij->kij", diag, np.eye(n))).T


def shrink_map(gpt, t, center=None):
    """``w -> t w + (1 - t) (u, w) c``: contraction of the state set toward ``c``."""
    c = G.center_state(gpt) if center is None else np.asarray(center, dtype=float)
    return t * np.eye(gpt.dim) + (1 - t) * np.outer(c, gpt.unit)


def _check_channel(gpt, D, tol, samples, seed):
    rng = np.random.default_rng(seed)
    W = _domain_states(gpt, samples, rng)
    E = _domain_effects(gpt, samples, rng)
    img = W @ D.T
    norm = float(np.abs(img @ gpt.unit - 1.0).max())
    pos = float(np.max(np.atleast_1d(G.state_cone_residual(gpt, img))))
    adj = float(np.max(np.atleast_1d(G.effect_residual(gpt, E @ D))))
    if norm > tol:
        raise PreconditionViolation("map does not preserve normalization", residual=norm)
    if pos > tol:
        raise PreconditionViolation("map is not positive on states", residual=pos)
    if adj > tol:
        raise PreconditionViolation("adjoint map is not positive on effects", residual=adj)
    return img, E @ D


def _sign_fix(U):
    idx = np.argmax(np.abs(U), axis=0)
    sgn = np.sign(U[idx, np.arange(U.shape[1])])
    return U * sgn


def _reduce(states, effects):
    S = states[extreme_points(states)]
    E = effects[np.linalg.norm(effects, axis=1) > 1e-12]
    E = E[extreme_points(E, cone=True)]
    scale = (S @ E.T).max(axis=0)
    E = E / np.where(scale > 1e-12, scale, 1.0)[:, None]
    S = S.copy()
    S[np.abs(S) < 1e-14] = 0.0
    E[np.abs(E) < 1e-14] = 0.0
    return S, E


def decohere(gpt, d_map, tol=G.MEMBER_TOL, samples=64, seed=0):
    """Restrict a GPT to the image of an idempotent decoherence map D.

    Returns ``(A_D, embedding)`` where A_D has states ``D(states)`` and effects
    ``D^T(effects)`` written in coordinates of the image, and the embedding is
    the inclusion of A_D into the original GPT. For oracle inputs the new
    generator lists are the images of the generator sample.
    """
    D = np.asarray(d_map, dtype=float)
    if D.shape != (gpt.dim, gpt.dim):
        raise InvalidArgument(f"decoherence map must be {gpt.dim}x{gpt.dim}")
    idem = float(np.abs(D @ D - D).max())
    if idem > tol:
        raise PreconditionViolation("decoherence map is not idempotent", residual=idem)
    imgW, imgE = _check_channel(gpt, D, tol, samples, seed)
    if not gpt.is_polytopic:
        imgW, imgE = gpt.states @ D.T, gpt.effects @ D
    Ut, s, _ = np.linalg.svd(D.T)
    r = int(np.sum(s > 1e-9 * max(1.0, s[0])))
    U = _sign_fix(Ut[:, :r])
    Y = _sign_fix(np.linalg.svd(D)[0][:, :r])
    psi = Y @ np.linalg.inv(U.T @ Y)
    S, E = _reduce(imgW @ U, imgE @ U)
    unit = U.T @ gpt.unit
    unit[np.abs(unit) < 1e-14] = 0.0
    new = G.Gpt(unit, S, E, unrestricted=gpt.unrestricted,
                label=f"{gpt.label}|decohered" if gpt.label else "")
    return new, Embedding(new, gpt, U, psi)


def noisy_restriction(gpt, channel, tol=G.MEMBER_TOL, samples=64, seed=0):
    """Restrict the state set to its image under an invertible positive channel.

    Effects are unchanged and the identity maps embed the result into the
    original GPT exactly.
    """
    N = np.asarray(channel, dtype=float)
    if N.shape != (gpt.dim, gpt.dim):
        raise InvalidArgument(f"channel must be {gpt.dim}x{gpt.dim}")
    s = np.linalg.svd(N, compute_uv=False)
    if s[-1] <= 1e-12 * max(1.0, s[0]):
        raise PreconditionViolation("channel is singular", residual=float(s[-1]))
    unit_res = float(np.abs(N.T @ gpt.unit - gpt.unit).max())
    if unit_res > tol:
        raise PreconditionViolation("channel does not preserve normalization", residual=unit_res)
    _check_channel(gpt, N, tol, samples, seed)
    Ninv = np.linalg.inv(N)
    rng = np.random.default_rng(seed)
    W = _domain_states(gpt, samples, rng)
    onto = bool(np.max(np.atleast_1d(G.state_cone_residual(gpt, W @ Ninv.T))) <= tol)
    unrestricted = gpt.unrestricted and onto
    label = f"{gpt.label}|restricted" if gpt.label else ""
    if gpt.is_polytopic:
        new = G.Gpt(gpt.unit, gpt.states @ N.T, gpt.effects, unrestricted=unrestricted, label=label)
    else:
        base = np.eye(gpt.dim) if gpt.state_map is None else gpt.state_map
        new = G.Gpt(gpt.unit, gpt.states @ N.T, gpt.effects, kind=gpt.kind,
                    unrestricted=unrestricted, state_map=N @ base, label=label)
    return new, Embedding(new, gpt, np.eye(gpt.dim), np.eye(gpt.dim))


# ---------------------------------------------------------------- JSON

def _gpt_ref(g):
    return G.to_dict(g)


def _gpt_from_ref(ref):
    if isinstance(ref, str):
        return G.named_gpt(ref)
    return G.from_dict(ref)


def to_dict(emb):
    out = {"domain": _gpt_ref(emb.domain), "codomain": _gpt_ref(emb.codomain),
           "phi": emb.phi.tolist(), "psi": emb.psi.tolist()}
    if emb.report is not None:
        out["report"] = emb.report.to_dict()
    return out


def from_dict(d):
    try:
        return Embedding(_gpt_from_ref(d["domain"]), _gpt_from_ref(d["codomain"]),
                         np.asarray(d["phi"], dtype=float), np.asarray(d["psi"], dtype=float))
    except (KeyError, TypeError) as exc:
        raise InvalidArgument(f"malformed embedding JSON: {exc}") from exc


def save(emb, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(to_dict(emb), sort_keys=True) + "\n")


def load(path):
    with open(path, encoding="utf-8") as fh:
        return from_dict(json.load(fh))
