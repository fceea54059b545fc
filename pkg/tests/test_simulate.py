import numpy as np
import pytest
from hypothesis import given, strategies as st

from gptembed import embed as E
from gptembed import gpt as G
from gptembed import simulate as S
from gptembed.errors import InvalidArgument, UnsupportedRepresentation


def _classical_probs(sim, w, e):
    p = S.preimage(sim, w)
    return float((sim.effect_map @ e) @ p)


def test_gbit_simulation_on_four_vertices():
    gb = G.make_gbit()
    sim = S.holevo_simulation(gb)
    assert sim.n == 4 and sim.epsilon == 0.0
    r = S.check_simulation(sim, samples=200, seed=1)
    assert r["deviation"] <= 1e-12 and r["effect_range_residual"] <= 1e-12


def test_gbit_center_and_vertex_sets():
    sim = S.holevo_simulation(G.make_gbit())
    assert S.sim_set_dimension(sim, G.center_state(sim.domain)) == 1
    for v in sim.domain.states:
        assert S.sim_set_dimension(sim, v) == 0


def test_gbit_is_multivalent():
    found, w, d = S.is_preparation_multivalent(S.holevo_simulation(G.make_gbit()))
    assert found and d >= 1
    assert G.is_state(G.make_gbit(), w)


def test_classical_trit_is_its_own_simulation():
    c3 = G.make_classical(3)
    sim = S.holevo_simulation(c3)
    assert sim.n == 3
    assert S.check_simulation(sim)["deviation"] <= 1e-12
    assert not S.is_preparation_multivalent(sim)[0]


def test_embedding_gives_univalent_simulation():
    sim = S.simulation_from_embedding(E.identity_embedding(G.make_classical(3)))
    assert sim.univalent_by_construction
    assert not S.is_preparation_multivalent(sim)[0]
    assert S.check_simulation(sim)["deviation"] <= 1e-12
    with pytest.raises(InvalidArgument):
        S.simulation_from_embedding(E.classical_to_quantum(2))


def test_disc_sandwich_geometry():
    disc = G.make_spin_factor(2)
    lam = 0.95
    sw = S.sandwich_polytope(disc, lam)
    N = sw.directions
    assert sw.inner_ok and sw.outer_ok
    # a regular N-gon inscribed in the unit circle has inradius cos(pi/N)
    assert np.cos(np.pi / N) >= lam
    r = np.linalg.norm(sw.vertices[:, 1:] - sw.center[1:], axis=1)
    assert np.allclose(r, 1.0, atol=1e-9)


def test_disc_simulation_within_epsilon():
    disc = G.make_spin_factor(2)
    eps = 0.05
    sim = S.holevo_simulation(disc, eps)
    r = S.check_simulation(sim, samples=1000, seed=7)
    assert r["pairs"] >= 1000
    assert r["deviation"] <= eps + 1e-9
    assert r["effect_range_residual"] <= 1e-9


def test_sandwich_history_doubles():
    sw = S.sandwich_polytope(G.make_spin_factor(2), 0.99)
    h = sw.history
    assert h[0] == 8 and all(b == 2 * a for a, b in zip(h, h[1:]))
    assert np.cos(np.pi / h[-1]) >= 0.99


def test_bloch_ball_sandwich():
    sw = S.sandwich_polytope(G.make_quantum(2), 0.8)
    assert sw.inner_ok and sw.outer_ok and sw.check_directions >= 360


def test_sandwich_of_polytope_is_itself():
    sq = G.make_gbit()
    sw = S.sandwich_polytope(sq, 0.5)
    assert len(sw.vertices) == 4


def test_sandwich_unsupported():
    with pytest.raises(UnsupportedRepresentation):
        S.sandwich_polytope(G.make_quantum(3), 0.9)
    with pytest.raises(UnsupportedRepresentation):
        S.sandwich_polytope(G.make_spin_factor(4), 0.9)


def test_sandwich_invalid_arguments():
    disc = G.make_spin_factor(2)
    with pytest.raises(InvalidArgument):
        S.sandwich_polytope(disc, 1.0)
    with pytest.raises(InvalidArgument):
        S.sandwich_polytope(disc, 0.9, center=[1.0, 1.0, 0.0])
    with pytest.raises(InvalidArgument):
        S.holevo_simulation(disc, 0.0)


def test_simulation_json_round_trip(tmp_path):
    sim = S.holevo_simulation(G.make_gbit())
    S.save(sim, tmp_path / "s.json")
    back = S.load(tmp_path / "s.json")
    assert np.array_equal(back.vertices, sim.vertices) and back.n == 4


@given(st.integers(0, 10_000), st.floats(0.0, 1.0))
def test_simulating_sets_respect_mixtures(seed, p):
    gb = G.make_gbit()
    sim = S.holevo_simulation(gb)
    rng = np.random.default_rng(seed)
    w1, w2 = G.sample_states(gb, 2, rng)
    m1, m2 = S.preimage(sim, w1), S.preimage(sim, w2)
    mix = p * m1 + (1 - p) * m2
    # the mixture of simulating states simulates the mixture
    assert np.allclose(sim.vertices @ mix, sim.shrink(p * w1 + (1 - p) * w2), atol=1e-9)
    assert mix.min() >= -1e-9 and mix.sum() == pytest.approx(1.0)


@given(st.integers(0, 10_000), st.sampled_from(["gbit", "polygon:5", "classical:3"]))
def test_polytope_simulation_reproduces_probabilities(seed, name):
    g = G.named_gpt(name)
    sim = S.holevo_simulation(g)
    rng = np.random.default_rng(seed)
    w = G.sample_states(g, 1, rng)[0]
    e = G.sample_effects(g, 1, rng)[0]
    assert _classical_probs(sim, w, e) == pytest.approx(float(w @ e), abs=1e-9)
    q = sim.effect_map @ e
    assert q.min() >= -1e-9 and q.max() <= 1 + 1e-9
