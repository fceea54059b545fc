import numpy as np
import pytest
from hypothesis import given, strategies as st

from gptembed import context as C
from gptembed import embed as E
from gptembed import gpt as G
from gptembed.errors import InvalidArgument, InvalidScenario
from gptembed.hermitian import hermitian_basis


def _random_classical_scenario(rng, n):
    """Random C_n scenario satisfying both operational equivalences."""
    m = rng.dirichlet(np.ones(n))
    d = rng.normal(size=(3, n))
    d -= d.mean(axis=1, keepdims=True)
    d *= min(1.0, float((m / np.abs(d).max(axis=0).clip(1e-12)).min()))
    states = np.stack([m + d, m - d], axis=1)
    f = rng.normal(size=(3, n))
    f -= f.mean(axis=0)
    f *= 0.5 / max(np.abs(f).max(), 1e-12)
    e0 = 0.5 + f
    effects = np.stack([e0, 1 - e0], axis=1)
    return C.ContextScenario(states, effects, np.ones(n))


def _inclusion(n):
    P = np.vstack([np.eye(n), np.zeros((1, n))])
    return E.Embedding(G.make_classical(n), G.make_classical(n + 1), P, P)


def test_rebit_scenario_saturates():
    sc = C.rebit_scenario()
    assert C.evaluate_A(sc) == pytest.approx(1.0, abs=1e-12)
    assert max(sc.residuals().values()) <= 1e-14


def test_rebit_scenario_is_equatorial_and_pure():
    sc = C.rebit_scenario()
    b = hermitian_basis(2)
    for rho in b.mat(sc.states.reshape(6, 4)):
        assert np.abs(rho.imag).max() <= 1e-15
        assert np.trace(rho @ rho).real == pytest.approx(1.0)


def test_uniform_mixture_is_maximally_mixed():
    sc = C.rebit_scenario()
    b = hermitian_basis(2)
    assert np.allclose(b.mat(sc.states.reshape(6, 4).mean(axis=0)), np.eye(2) / 2, atol=1e-15)


def test_maximally_mixed_states_score_half():
    sc = C.rebit_scenario()
    mixed = np.broadcast_to(hermitian_basis(2).vec(np.eye(2) / 2), sc.states.shape)
    assert C.evaluate_A(C.ContextScenario(mixed, sc.effects, sc.unit)) == pytest.approx(0.5)


def test_broken_equivalence_rejected():
    sc = C.rebit_scenario()
    S = sc.states.copy()
    S[0, 0] = S[0, 1]
    with pytest.raises(InvalidScenario):
        C.evaluate_A(C.ContextScenario(S, sc.effects, sc.unit))


def test_shape_checked():
    with pytest.raises(InvalidArgument):
        C.ContextScenario(np.zeros((2, 2, 4)), np.zeros((3, 2, 4)), np.zeros(4))


def test_optimal_classical_scenario():
    sc = C.optimal_classical_scenario()
    assert C.evaluate_A(sc) == pytest.approx(5 / 6)
    r = C.classical_gpt_check(sc, G.make_classical(2))
    assert r["states"] <= 1e-12 and r["effects"] <= 1e-12


@given(st.integers(0, 10_000), st.integers(2, 5))
def test_classical_scenarios_obey_bound(seed, n):
    rng = np.random.default_rng(seed)
    sc = _random_classical_scenario(rng, n)
    r = C.classical_gpt_check(sc, G.make_classical(n))
    assert r["states"] <= 1e-9 and r["effects"] <= 1e-9
    emb = _inclusion(n)
    assert E.verify(emb).epsilon <= 1e-12
    assert C.evaluate_A(C.push_through(sc, emb)) <= 5 / 6 + 1e-9


def test_push_through_classical_to_quantum_preserves_score():
    sc = C.optimal_classical_scenario()
    out = C.push_through(sc, E.classical_to_quantum(2))
    assert C.evaluate_A(out) == pytest.approx(5 / 6, abs=1e-12)


def test_push_through_dimension_mismatch():
    with pytest.raises(InvalidArgument):
        C.push_through(C.rebit_scenario(), E.classical_to_quantum(2))


@pytest.mark.parametrize("a, expected", [(1.0, 1 / 6), (5 / 6, 0.0), (0.9, 0.9 - 5 / 6), (0.5, 0.0)])
def test_classical_epsilon_bound(a, expected):
    assert C.classical_epsilon_bound(a) == pytest.approx(expected, abs=1e-15)


def test_classical_epsilon_bound_range():
    with pytest.raises(InvalidArgument):
        C.classical_epsilon_bound(1.5)


def test_bias_average_values():
    assert C.bias_average([1, 0.5, 0]) == pytest.approx(5 / 6)
    assert C.bias_average([0.5, 0.5, 0.5]) == 0.5
    with pytest.raises(InvalidArgument):
        C.bias_average([1, 2])


@given(st.lists(st.floats(0, 1), min_size=6, max_size=6), st.floats(0, 1))
def test_bias_average_convex(v, mu):
    a, b = np.array(v[:3]), np.array(v[3:])
    lhs = C.bias_average(mu * a + (1 - mu) * b)
    assert lhs <= mu * C.bias_average(a) + (1 - mu) * C.bias_average(b) + 1e-12


def test_bias_average_max_on_slice():
    g = np.linspace(0, 1, 121)
    a1, a2 = np.meshgrid(g, g)
    a3 = 1.5 - a1 - a2
    ok = (a3 >= 0) & (a3 <= 1)
    vals = C.bias_average(np.stack([a1[ok], a2[ok], a3[ok]], axis=-1))
    assert vals.max() == pytest.approx(5 / 6, abs=1e-12)
    # vertices of the slice are the permutations of (1, 1/2, 0)
    assert C.bias_average(np.array([[0, 0.5, 1], [0.5, 1, 0]])).tolist() == pytest.approx([5 / 6] * 2)


@given(st.integers(0, 10_000))
def test_score_unitarily_invariant(seed):
    rng = np.random.default_rng(seed)
    Z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    U, _ = np.linalg.qr(Z)
    sc = C.rebit_scenario()
    assert abs(C.evaluate_A(C.conjugate(sc, U)) - C.evaluate_A(sc)) <= 1e-12


def test_demo():
    d = C.demo()
    assert d["A"] == pytest.approx(1.0) and d["epsilon_bound"] == pytest.approx(1 / 6)
