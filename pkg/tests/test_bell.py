import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gptembed import bell as B
from gptembed import gpt as G
from gptembed.errors import (InvalidArgument, MissingReference, NotABipartiteState,
                             SizeLimitExceeded, UnsupportedRepresentation)

GBIT = G.make_gbit()
C2 = G.make_classical(2)


_VERTS = []


def _vertices():
    if not _VERTS:
        _VERTS.append(B.bipartite_vertices(GBIT))
    return _VERTS[0]


def _pr_state():
    f = B.chsh(GBIT)
    return B.bipartite_from_behaviour(B.pr_box(), GBIT, GBIT, f.effects_a, f.effects_b)


def _local_behaviour_oracle(P, f):
    """Independent local check: brute-force search over local deterministic mixtures by LP (scipy)."""
    from scipy.optimize import linprog
    A, Bo, X, Y = P.shape
    strats = [(sa, sb) for sa in itertools.product(range(A), repeat=X)
              for sb in itertools.product(range(Bo), repeat=Y)]
    cols = []
    for sa, sb in strats:
        D = np.zeros_like(P)
        for x, y in itertools.product(range(X), range(Y)):
            D[sa[x], sb[y], x, y] = 1
        cols.append(D.ravel())
    M = np.array(cols).T
    res = linprog(np.zeros(len(strats)), A_eq=np.vstack([M, np.ones(len(strats))]),
                  b_eq=np.append(P.ravel(), 1), method="highs")
    return res.status == 0


# ---- functionals and maxima

def test_chsh_norm_and_shape():
    f = B.chsh(GBIT)
    assert f.abs_norm == 2.0 and f.shape == (2, 2, 2, 2)
    assert np.allclose(f.effects_a.sum(axis=1), GBIT.unit)


def test_chsh_gbit_reaches_pr_box():
    val, W = B.bell_max_gpt(B.chsh(GBIT), GBIT)
    assert val == pytest.approx(1.0, abs=1e-9)
    assert W.is_valid()


def test_chsh_classical_bits_equal_enumeration():
    f = B.chsh(C2)
    val, W = B.bell_max_gpt(f, C2)
    assert val == pytest.approx(0.75, abs=1e-9)
    assert B.bell_max_classical(f) == 0.75


def test_zero_functional():
    f = B.BellFunctional(np.zeros((2, 2, 2, 2)))
    assert B.bell_max_gpt(f, GBIT)[0] == 0.0
    rep = B.embedding_threshold(f, GBIT, b_ref=0.0, r_a=0.5)
    assert rep.threshold == 0.0 and not rep.certificate


def test_correlator_form_classical_max_is_two():
    assert B.bell_max_classical(B.BellFunctional(B.chsh_coefficients("correlator"))) == 2.0


def test_single_setting_functional():
    b = np.zeros((2, 2, 1, 1))
    b[1, 0, 0, 0] = 0.7
    b[0, 0, 0, 0] = 0.2
    assert B.bell_max_classical(B.BellFunctional(b)) == pytest.approx(0.7)


def test_unknown_chsh_form():
    with pytest.raises(InvalidArgument):
        B.chsh_coefficients("xor")


def test_ordering_classical_quantum_gbit():
    f = B.chsh(GBIT)
    c = B.bell_max_classical(f)
    q, src = B.quantum_reference_value(f)
    g = B.bell_max_gpt(f, GBIT)[0]
    assert c < q < g and src == "tsirelson"
    assert q == pytest.approx(0.5 + np.sqrt(2) / 4, abs=1e-15)


def test_quantum_reference_external_and_missing():
    f = B.BellFunctional(B.chsh_coefficients())
    assert B.quantum_reference_value(f, 0.9) == (0.9, "external")
    assert B.quantum_reference_value(B.BellFunctional(f.coeffs, b_q=0.8))[1] == "external"
    with pytest.raises(MissingReference):
        B.quantum_reference_value(f)


def test_strategy_limit():
    f = B.BellFunctional(np.zeros((2, 2, 10, 11)))
    with pytest.raises(SizeLimitExceeded):
        B.bell_max_classical(f)


def test_bell_max_rejects_oracle_gpt():
    with pytest.raises(UnsupportedRepresentation):
        B.bell_max_gpt(B.chsh(), G.make_quantum(2))


def test_bad_measurements_rejected():
    ea = np.array([[[1, 0, 0], [0.5, 0, 0]]] * 2)
    f = B.BellFunctional(B.chsh_coefficients(), ea, ea)
    with pytest.raises(InvalidArgument):
        B.bell_max_gpt(f, GBIT)


@given(st.integers(0, 10_000), st.integers(1, 2), st.integers(2, 3))
def test_lp_on_classical_response_gpt_matches_enumeration(seed, X, k):
    rng = np.random.default_rng(seed)
    coeffs = rng.normal(size=(k, k, X, X))
    eff = B.classical_response_measurements(X, k)
    n = eff.shape[2]
    ca = G.make_classical(n)
    f = B.BellFunctional(coeffs, eff, eff)
    lp = B.bell_max_gpt(f, ca, ca)[0]
    assert lp == pytest.approx(B.bell_max_classical(f), abs=1e-9)


@given(st.integers(0, 10_000))
def test_lp_on_bits_never_beats_enumeration(seed):
    rng = np.random.default_rng(seed)
    f = B.chsh(C2)
    f = B.BellFunctional(rng.normal(size=(2, 2, 2, 2)), f.effects_a, f.effects_b)
    val, W = B.bell_max_gpt(f, C2)
    assert val <= B.bell_max_classical(f) + 1e-9
    assert _local_behaviour_oracle(B.behaviour(f, W.w), f)


# ---- robustness

def test_pr_box_robustness():
    W = _pr_state()
    assert W.is_valid()
    assert B.robustness(W) == pytest.approx(0.5, abs=1e-7)


def test_product_states_are_separable(rng):
    for _ in range(10):
        wa, wb = G.sample_states(GBIT, 2, rng)
        assert B.robustness(B.product_state(GBIT, wa, GBIT, wb)) <= 1e-9


def test_mixture_of_products_is_separable():
    s = GBIT.states
    W = 0.5 * np.outer(s[0], s[1]) + 0.5 * np.outer(s[2], s[3])
    assert B.robustness(B.BipartiteState(W, GBIT, GBIT)) <= 1e-9


def test_robustness_outside_span():
    W = np.zeros((3, 3))
    W[0, 0] = 0.25
    W[1, 2] = 5.0
    ok = B.BipartiteState(W, GBIT, GBIT)
    assert B.robustness(ok) > 0
    c = G.make_classical(2)
    bad_gpt = G.Gpt(np.array([1.0, 1.0]), np.array([[1.0, 0.0]]), c.effects)
    with pytest.raises(NotABipartiteState):
        B.robustness(B.BipartiteState(np.array([[0.0, 1.0], [0.0, 0.0]]), bad_gpt, bad_gpt))


def test_two_gbit_polytope_vertices():
    V = B.bipartite_vertices(GBIT)
    assert len(V) == 24
    f = B.chsh(GBIT)
    kinds = {"deterministic": 0, "pr": 0}
    for W in V:
        P = B.behaviour(f, W)
        if set(np.round(P.ravel(), 9)) <= {0.0, 1.0}:
            kinds["deterministic"] += 1
        elif np.allclose(np.sort(P.ravel()), np.sort(B.pr_box().ravel())):
            kinds["pr"] += 1
    assert kinds == {"deterministic": 16, "pr": 8}


def test_self_entangleability():
    val, count = B.self_entangleability(GBIT)
    assert val == pytest.approx(0.5, abs=1e-7) and count == 24
    assert B.self_entangleability(G.make_classical(3))[0] <= 1e-9


def test_self_entangleability_threads(monkeypatch):
    monkeypatch.setenv("GPT_EMBED_THREADS", "4")
    assert B.self_entangleability(GBIT)[0] == pytest.approx(0.5, abs=1e-7)


def test_self_entangleability_size_limit():
    with pytest.raises(UnsupportedRepresentation):
        B.self_entangleability(G.make_polygon(8))


@given(st.integers(0, 10_000), st.floats(0, 1))
def test_robustness_convex(seed, mu):
    V = _vertices()
    rng = np.random.default_rng(seed)
    w1 = np.tensordot(rng.dirichlet(np.ones(len(V))), V, axes=1)
    w2 = V[rng.integers(len(V))]
    r = lambda W: B.robustness(B.BipartiteState(W, GBIT, GBIT))
    assert r(mu * w1 + (1 - mu) * w2) <= mu * r(w1) + (1 - mu) * r(w2) + 1e-7


@given(st.integers(0, 10_000))
def test_robustness_zero_iff_local(seed):
    # two-gbit states are separable exactly when their CHSH-basis behaviour is local
    V = _vertices()
    rng = np.random.default_rng(seed)
    W = np.tensordot(rng.dirichlet(0.3 * np.ones(len(V))), V, axes=1)
    f = B.chsh(GBIT)
    sep = B.robustness(B.BipartiteState(W, GBIT, GBIT)) <= 1e-9
    assert sep == _local_behaviour_oracle(B.behaviour(f, W), f)


# ---- thresholds and bounds

def test_quantum_threshold():
    rep = B.embedding_threshold(B.chsh(GBIT), GBIT)
    assert rep.threshold == pytest.approx((2 - np.sqrt(2)) / 64, abs=1e-6)
    assert rep.certificate and rep.source == "tsirelson" and rep.abs_norm == 2.0


def test_classical_threshold():
    rep = B.embedding_threshold(B.chsh(GBIT), GBIT, reference="classical")
    assert rep.threshold == pytest.approx(1 / 64, abs=1e-6)


def test_classical_bit_has_no_certificate():
    rep = B.embedding_threshold(B.chsh(C2), C2)
    assert rep.threshold == 0.0 and rep.message == "no certificate from this functional"


def test_threshold_rejects_reference():
    with pytest.raises(InvalidArgument):
        B.embedding_threshold(B.chsh(GBIT), GBIT, reference="boxworld")


def test_threshold_formula():
    assert B.threshold_value(1.0, 0.75, 2.0, 0.5) == 1 / 64
    assert B.threshold_value(0.7, 0.75, 2.0, 0.5) == 0.0


def test_device_bound():
    root = B.gbit_device_bound()
    assert root == pytest.approx(0.101416, abs=1e-5)
    assert abs(B.device_polynomial(root)) <= 1e-9
    assert B.device_polynomial(0.0) == -1.0 and B.device_polynomial(1.0) == 3.0


def test_behaviour_distance_bound():
    assert B.behaviour_distance_bound(0.0, 3.0) == 0.0
    assert B.behaviour_distance_bound(0.01, 0.5) == pytest.approx(0.04)
    with pytest.raises(InvalidArgument):
        B.behaviour_distance_bound(-1, 0)


def test_chsh_slack_chain():
    # eight quarter-weight entries, each off by at most the per-entry bound
    eps = 0.003
    slack = 8 * 0.25 * B.behaviour_distance_bound(2 * eps, 0.5)
    assert slack == pytest.approx(16 * eps)
    assert 1 - slack <= B.TSIRELSON_WINPROB or eps < (1 - B.TSIRELSON_WINPROB) / 16


# ---- JSON

def test_state_and_functional_round_trip():
    W = _pr_state()
    back = B.bipartite_from_dict(W.to_dict())
    assert np.array_equal(back.w, W.w)
    f = B.chsh(GBIT)
    g = B.functional_from_dict(f.to_dict())
    assert g.tag == f.tag and np.array_equal(g.effects_a, f.effects_a)
    with pytest.raises(InvalidArgument):
        B.functional_from_dict({"coeffs": [1, 2]})
