"""Prepare-and-measure noncontextuality scenario with three binary measurements.

Six preparations ``p_{t,b}`` and three binary measurements ``m_t`` (t = 1..3)
are scored by ``A = (1/6) sum_{t,b} P(b | p_{t,b}, m_t)``. Noncontextual
(classical) models obey ``A <= 5/6`` whenever

* the mixtures ``(p_{t,0} + p_{t,1}) / 2`` coincide for all t, and
* the uniform mixture of the three measurements is a fair coin.
"""
from dataclasses import dataclass

import numpy as np

from . import gpt as G
from .errors import InvalidArgument, InvalidScenario
from .hermitian import hermitian_basis

CLASSICAL_MAX = 5.0 / 6.0
SCENARIO_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ContextScenario:
    """States ``states[t, b]``, effects ``effects[t, b]`` and the unit they sum to."""
    states: np.ndarray
    effects: np.ndarray
    unit: np.ndarray
    label: str = ""

    def __post_init__(self):
        S = np.asarray(self.states, dtype=float)
        E = np.asarray(self.effects, dtype=float)
        u = np.asarray(self.unit, dtype=float).ravel()
        if S.shape[:2] != (3, 2) or E.shape[:2] != (3, 2) or S.shape[2] != u.size or E.shape[2] != u.size:
            raise InvalidArgument("scenario needs 3x2 states and effects of matching dimension")
        object.__setattr__(self, "states", S)
        object.__setattr__(self, "effects", E)
        object.__setattr__(self, "unit", u)

    @property
    def dim(self):
        return self.unit.size

    def residuals(self):
        """Operational-equivalence and completeness residuals (max-abs)."""
        mix = 0.5 * (self.states[:, 0] + self.states[:, 1])
        prep = float(np.abs(mix - mix[0]).max())
        meas = float(np.abs(self.effects.mean(axis=0) - 0.5 * self.unit).max())
        comp = float(np.abs(self.effects.sum(axis=1) - self.unit).max())
        return {"preparation": prep, "measurement": meas, "completeness": comp}

    def to_dict(self):
        return {"states": self.states.tolist(), "effects": self.effects.tolist(),
                "unit": self.unit.tolist(), "label": self.label, "residuals": self.residuals()}


def _rebit_projector(theta):
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    return 0.5 * (np.eye(2) + np.cos(theta) * sz + np.sin(theta) * sx)


def rebit_scenario():
    """Rebit trine in the x-z plane plus antipodes; effects are the same projectors."""
    basis = hermitian_basis(2)
    mats = np.array([[_rebit_projector(2 * np.pi * t / 3 + np.pi * b) for b in range(2)]
                     for t in range(3)])
    V = basis.vec(mats)
    V[np.abs(V) < 1e-16] = 0.0
    return ContextScenario(V, V.copy(), basis.vec(np.eye(2)), label="rebit")


def optimal_classical_scenario():
    """A two-outcome classical scenario reaching the noncontextual maximum 5/6."""
    states = np.array([[[1, 0], [0, 1]], [[.5, .5], [.5, .5]], [[0, 1], [1, 0]]], dtype=float)
    e0 = np.array([[1, 0], [.5, .5], [0, 1]], dtype=float)
    effects = np.stack([e0, 1 - e0], axis=1)
    return ContextScenario(states, effects, np.ones(2), label="classical:2")


def check(sc, tol=SCENARIO_TOL):
    r = sc.residuals()
    bad = {k: v for k, v in r.items() if v > tol}
    if bad:
        raise InvalidScenario("operational equivalences do not hold", **bad)
    return r


def evaluate_A(sc, tol=SCENARIO_TOL):
    """``(1/6) sum_{t,b} (w_{t,b}, E_{t,b})``."""
    check(sc, tol)
    return float(np.einsum("tbi,tbi->", sc.states, sc.effects) / 6.0)


def push_through(sc, emb):
    """Image of a scenario under an embedding (states by psi, effects and unit by phi)."""
    if emb.domain.dim != sc.dim:
        raise InvalidArgument("embedding domain does not match the scenario dimension")
    return ContextScenario(sc.states @ emb.psi.T, sc.effects @ emb.phi.T, emb.phi @ sc.unit,
                           label=f"{sc.label}->{emb.codomain.label}" if sc.label else "")


def conjugate(sc, U):
    """Apply ``X -> U X U^dagger`` to every qubit state and effect."""
    basis = hermitian_basis(2)
    U = np.asarray(U, dtype=complex)
    f = lambda V: basis.vec(U @ basis.mat(V) @ U.conj().T)
    return ContextScenario(f(sc.states), f(sc.effects), f(sc.unit), sc.label)


def classical_epsilon_bound(a_value):
    """Lower bound on the error of any embedding into classical theory given score A."""
    a = float(a_value)
    if a > 1 + 1e-12 or a < -1e-12:
        raise InvalidArgument("the score must lie in [0, 1]")
    return max(a - CLASSICAL_MAX, 0.0)


def bias_average(a):
    """``(1/3) sum_t max(a_t, 1 - a_t)``."""
    a = np.asarray(a, dtype=float)
    if a.shape[-1] != 3:
        raise InvalidArgument("need a triple")
    return np.maximum(a, 1 - a).mean(axis=-1)


def demo():
    sc = rebit_scenario()
    A = evaluate_A(sc)
    return {"A": A, "residuals": sc.residuals(), "classical_max": CLASSICAL_MAX,
            "epsilon_bound": classical_epsilon_bound(A)}


def classical_gpt_check(sc, gpt):
    """Membership residuals of a scenario's states and effects in a GPT."""
    S = sc.states.reshape(-1, sc.dim)
    E = sc.effects.reshape(-1, sc.dim)
    return {"states": float(np.max(G.state_residual(gpt, S))),
            "effects": float(np.max(G.effect_residual(gpt, E)))}
