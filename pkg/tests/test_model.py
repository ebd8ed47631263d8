import numpy as np
import oracles
import pytest
from conftest import random_graph
from hypothesis import given, settings
from hypothesis import strategies as st

from blocknet import BlockAssignment, Graph, ModelParams, change_stats, direct_utility, exact_stationary, potential
from blocknet.errors import CapacityError
from blocknet.model import graph_code, graph_from_code, independent_link_probs, toggle


def params_dict(p):
    return dict(alpha_w=p.alpha_w, alpha_b=p.alpha_b, beta_w=tuple(p.beta_w), beta_b=tuple(p.beta_b),
                psi=p.psi, gamma=p.gamma)


def random_params(rng, P, scale=1.0):
    return ModelParams(rng.uniform(-scale, scale), rng.uniform(-scale, scale),
                       rng.uniform(-scale, scale, P), rng.uniform(-scale, scale, P),
                       rng.uniform(-scale, scale), rng.uniform(-scale, scale))


def test_unordered_convention_roundtrip():
    p = ModelParams(0.3, -1.0, [0.5], [0.25], psi=0.1, gamma=0.2)
    u = p.to_unordered(["city"])
    assert u == {"within_edges": 0.6, "within_two_stars": 0.1, "within_triangles": 0.8,
                 "within_same_city": 1.0, "between_edges": -2.0, "between_same_city": 0.5}
    back = ModelParams.from_unordered(u)
    assert np.allclose(back.beta_w, p.beta_w) and back.gamma == pytest.approx(p.gamma)


def test_direct_utility():
    p = ModelParams(1.0, -1.0, [2.0], [3.0])
    assert direct_utility(p, [1], [1], True) == 3.0
    assert direct_utility(p, [1], [0], False) == -1.0


def test_potential_triangle(triangle):
    p = ModelParams(0.3, 0.0, psi=0.1, gamma=0.2)
    z = np.zeros(3, dtype=int)
    assert potential(triangle, None, z, p) == pytest.approx(6 * 0.3 + 3 * 0.1 + 4 * 0.2)


def test_between_block_pairs_have_no_externalities(triangle):
    p = ModelParams(0.3, 0.3, psi=5.0, gamma=5.0)
    z = np.array([0, 1, 2])
    assert potential(triangle, None, z, p) == pytest.approx(6 * 0.3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_potential_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 9))
    g = random_graph(rng, n, rng.uniform(0.2, 0.8))
    x = rng.integers(0, 2, (n, 2))
    z = rng.integers(0, 2, n)
    p = random_params(rng, 2)
    assert potential(g, x, z, p) == pytest.approx(oracles.potential(oracles.dense(g), x, z, **params_dict(p)), abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31))
def test_change_statistic_is_potential_difference(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 15))
    g = random_graph(rng, n, rng.uniform(0.1, 0.9))
    x = rng.integers(0, 3, (n, 1))
    z = rng.integers(0, 3, n)
    p = random_params(rng, 1)
    i, j = rng.choice(n, 2, replace=False)
    _, delta = change_stats(g, x, z, p, i, j)
    on = g if g.has_edge(i, j) else toggle(g, i, j)
    off = toggle(on, i, j)
    assert delta == pytest.approx(potential(on, x, z, p) - potential(off, x, z, p), abs=1e-10)


def test_change_stats_triangle_dyad(triangle):
    stats, delta = change_stats(triangle, None, np.zeros(3, dtype=int), ModelParams(0.0, 0.0, psi=1.0, gamma=1.0), 0, 1)
    assert (stats.two_star_count, stats.triangle_count) == (2, 1)
    assert delta == pytest.approx(2 + 4)


def test_graph_codes_roundtrip(rng):
    for _ in range(20):
        g = random_graph(rng, 5, 0.5)
        assert graph_from_code(graph_code(g), 5) == g


def test_exact_stationary_matches_brute_force(rng):
    n = 4
    x = rng.integers(0, 2, (n, 1))
    z = np.array([0, 0, 1, 1])
    p = random_params(rng, 1)
    table = exact_stationary(n, x, z, p)
    assert table.probs.sum() == pytest.approx(1.0)
    assert np.allclose(table.probs, oracles.stationary(n, x, z, **params_dict(p)), atol=1e-12)


def test_exact_stationary_guard():
    with pytest.raises(CapacityError):
        exact_stationary(6, None, np.zeros(6, dtype=int), ModelParams(0, 0))


def test_independent_links_factorize(rng):
    n = 4
    z = np.array([0, 0, 1, 1])
    x = rng.integers(0, 2, (n, 1))
    p = ModelParams(-0.4, 0.7, [0.3], [-0.2])
    table = exact_stationary(n, x, z, p)
    dyads, probs = independent_link_probs(p, x, z, n)
    for code in range(64):
        bits = (code >> np.arange(6)) & 1
        expected = np.prod(np.where(bits == 1, probs, 1 - probs))
        assert table.probs[code] == pytest.approx(expected, rel=1e-10)


def test_block_assignment_validation():
    with pytest.raises(ValueError):
        BlockAssignment(np.array([0, 3]), 2)
    b = BlockAssignment.from_labels(["x", "y", "x"])
    assert b.K == 2 and b.z.tolist() == [0, 1, 0]


def test_toggle_is_involution(rng):
    g = random_graph(rng, 8, 0.4)
    assert toggle(toggle(g, 2, 5), 2, 5) == g
    assert toggle(Graph.empty(3), 0, 2).m == 1
