import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bpergm.generators import EXAMPLE_GRAPHS, four_cycles_k, four_fan, even_cycle, southern_women, star
from bpergm.graph import from_edges, new_graph
from bpergm.statistics import (Model, Term, TermError, TermKind, change_value, default_terms, model_change,
                               model_stats, parse_term_token, stat_value)

from oracles import EXAMPLE_VALUES, EXAMPLE_TERMS, EXAMPLE_TOL, brute_c4, random_graph

AB_PAIRS = [
    ("TwoPathsA", "TwoPathsB"), ("B1Star2", "B2Star2"), ("AltStarsA[2]", "AltStarsB[2]"),
    ("GwDegreeA[1]", "GwDegreeB[1]"), ("AltKCyclesA[3]", "AltKCyclesB[3]"),
    ("AltK4CyclesA[2]", "AltK4CyclesB[2]"), ("FourCyclesNodePowerA[0.3]", "FourCyclesNodePowerB[0.3]"),
]


def all_terms():
    shapes = {"AltStars": (1.5, 2, 5), "GwDegree": (0, 0.5, 1), "AltKCycles": (1.5, 2, 5),
              "AltK4Cycles": (2, 5), "FourCyclesNodePower": (0.1, 0.2, 0.5, 1)}
    out = []
    for kind in TermKind:
        base = next((k for k in shapes if kind.name.startswith(k)), None)
        if base is None:
            out.append(Term(kind))
        else:
            out += [Term(kind, float(s)) for s in shapes[base]]
    return out


def sv(g, token):
    return stat_value(g, Term.parse(token))


@pytest.mark.parametrize("name", list(EXAMPLE_VALUES))
def test_example_graph_values(name):
    g = EXAMPLE_GRAPHS[name]()
    row = EXAMPLE_VALUES[name]
    assert (g.n_a, g.n_b) == row[:2]
    for token, expected in zip(EXAMPLE_TERMS, row[2:]):
        assert sv(g, token) == pytest.approx(expected, abs=EXAMPLE_TOL), token


def test_spot_values():
    g = four_fan(5)
    assert sv(g, "FourCyclesNodePowerA[0.5]") == pytest.approx(math.sqrt(5) + 5, abs=1e-12)
    assert sv(g, "FourCyclesNodePowerB[0.5]") == pytest.approx(10)
    assert sv(g, "Edges") == 20
    assert sv(southern_women(), "FourCycles") == brute_c4(southern_women())


@pytest.mark.parametrize("k", range(1, 11))
@pytest.mark.parametrize("alpha", [0.2, 0.5, 1.0])
def test_four_fan_closed_forms(k, alpha):
    g = four_fan(k)
    assert sv(g, "Edges") == 4 * k
    assert sv(g, "FourCycles") == k
    assert sv(g, f"FourCyclesNodePowerA[{alpha}]") == pytest.approx(k ** alpha + k, rel=1e-12)
    assert sv(g, f"FourCyclesNodePowerB[{alpha}]") == pytest.approx(2 * k, rel=1e-12)


def test_change_examples():
    empty = new_graph(2, 2)
    m = Model.parse(["Edges", "TwoPathsA", "TwoPathsB", "FourCycles", "AltKCyclesA[2]", "AltK4CyclesB[2]"])
    assert list(model_change(empty, m, 0, 0)) == [1, 0, 0, 0, 0, 0]
    path = from_edges(2, 2, [(0, 0), (1, 0), (1, 1)])
    assert change_value(path, Term.parse("FourCycles"), 0, 1) == 1
    k23_minus = from_edges(2, 3, [(a, b) for a in range(2) for b in range(3) if (a, b) != (1, 2)])
    expected = sv(four_cycles_k(3), "FourCyclesNodePowerB[0.5]") - sv(k23_minus, "FourCyclesNodePowerB[0.5]")
    # K_{2,3} - (a1, b2) keeps one four-cycle, so B-nodes 0 and 1 each carry 1
    assert sv(k23_minus, "FourCyclesNodePowerB[0.5]") == 2
    assert expected == pytest.approx(4.24264 - 2, abs=1e-5)
    assert change_value(k23_minus, Term.parse("FourCyclesNodePowerB[0.5]"), 1, 2) == pytest.approx(expected, rel=1e-12)


def test_change_rejects_present_dyad():
    with pytest.raises(ValueError):
        change_value(four_cycles_k(3), Term.parse("Edges"), 0, 0)


def test_change_matches_full_difference():
    rng = np.random.default_rng(5)
    terms = all_terms()
    for _ in range(150):
        n_a, n_b = (int(x) for x in rng.integers(1, 16, size=2))
        g = random_graph(rng, n_a, n_b, rng.uniform(0.05, 0.7))
        absent = [(a, b) for a in range(n_a) for b in range(n_b) if not g.has_edge(a, b)]
        if not absent:
            continue
        a, b = absent[rng.integers(len(absent))]
        before = [stat_value(g, t) for t in terms]
        deltas = [change_value(g, t, a, b) for t in terms]
        g.add_edge(a, b)
        for t, d, z0 in zip(terms, deltas, before):
            assert d == pytest.approx(stat_value(g, t) - z0, rel=1e-9, abs=1e-9), str(t)


def test_model_change_shares_work_without_changing_results():
    rng = np.random.default_rng(8)
    m = Model.parse(["AltKCyclesA[2]", "AltK4CyclesA[2]", "AltKCyclesB[5]", "AltK4CyclesB[5]", "FourCycles",
                     "FourCyclesNodePowerA[0.5]", "FourCyclesNodePowerB[0.5]"])
    for _ in range(30):
        g = random_graph(rng, 9, 7, 0.4)
        a, b = int(rng.integers(9)), int(rng.integers(7))
        if g.has_edge(a, b):
            continue
        assert list(model_change(g, m, a, b)) == [change_value(g, t, a, b) for t in m.terms]


def test_model_stats_examples():
    assert list(model_stats(EXAMPLE_GRAPHS["four-cycle"](), Model.parse(["Edges", "FourCycles"]))) == [4, 1]
    assert model_stats(four_fan(2), Model(())).shape == (0,)


def test_sum_with_variant_rejected():
    with pytest.raises(TermError):
        Model.parse(["FourCyclesNodePowerA[0.5]", "FourCyclesNodePowerB[0.5]", "FourCyclesNodePowerSum[0.5]"])
    with pytest.raises(TermError):
        Model.parse(["Edges", "Edges=1"])
    # different alphas are independent statistics
    Model.parse(["FourCyclesNodePowerA[0.5]", "FourCyclesNodePowerSum[0.2]"])


@pytest.mark.parametrize("token", ["AltStarsA[1]", "AltKCyclesB[0.5]", "FourCyclesNodePowerA[0]",
                                   "FourCyclesNodePowerB[1.5]", "GwDegreeA[-1]", "Edges[2]", "Nope",
                                   "AltStarsA[x]", "Edges=abc"])
def test_invalid_terms(token):
    with pytest.raises(TermError):
        parse_term_token(token)


def test_term_names_round_trip():
    for t in default_terms() + all_terms():
        assert Term.parse(str(t)) == t
    assert str(Term.parse("FourCyclesNodePowerB[0.2]")) == "FourCyclesNodePowerB[0.2]"
    assert str(Term.parse("AltKCyclesA")) == "AltKCyclesA[2]"
    t, theta = parse_term_token("AltStarsB[2]=-0.4")
    assert (str(t), theta) == ("AltStarsB[2]", -0.4)


def test_model_theta_length_checked():
    with pytest.raises(TermError):
        Model((Term.parse("Edges"),), np.array([1.0, 2.0]))


# -- identities ---------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10), st.integers(1, 10), st.floats(0.05, 0.8), st.integers(0, 2**32 - 1))
def test_identities(n_a, n_b, p, seed):
    g = random_graph(np.random.default_rng(seed), n_a, n_b, p)
    for alpha in (0.1, 0.5, 0.9):
        total = sv(g, f"FourCyclesNodePowerSum[{alpha}]")
        assert total == pytest.approx(sv(g, f"FourCyclesNodePowerA[{alpha}]") + sv(g, f"FourCyclesNodePowerB[{alpha}]"),
                                      rel=1e-12, abs=1e-12)
    assert sv(g, "FourCyclesNodePowerSum[1]") == pytest.approx(4 * sv(g, "FourCycles"), rel=1e-12)
    for lam in (1.5, 2, 7):
        assert sv(g, f"AltK4CyclesA[{lam}]") == pytest.approx(-(sv(g, f"AltKCyclesA[{lam}]") - sv(g, "TwoPathsA")),
                                                            rel=1e-12, abs=1e-9)
        assert sv(g, f"AltK4CyclesB[{lam}]") == pytest.approx(-(sv(g, f"AltKCyclesB[{lam}]") - sv(g, "TwoPathsB")),
                                                            rel=1e-12, abs=1e-9)
    t = g.transpose()
    for ta, tb in AB_PAIRS:
        assert sv(g, ta) == pytest.approx(sv(t, tb), rel=1e-12, abs=1e-12)
        assert sv(g, tb) == pytest.approx(sv(t, ta), rel=1e-12, abs=1e-12)


def random_tree(rng, n_a, n_b):
    """Random spanning tree of a bipartite node set (attach each new node to an existing one)."""
    nodes = [("A", 0)]
    edges = []
    pending = [("A", i) for i in range(1, n_a)] + [("B", j) for j in range(n_b)]
    rng.shuffle(pending)
    for mode, idx in pending:
        partners = [u for u in nodes if u[0] != mode]
        if not partners:
            pending.append((mode, idx))
            continue
        p = partners[rng.integers(len(partners))]
        edges.append((idx, p[1]) if mode == "A" else (p[1], idx))
        nodes.append((mode, idx))
    return from_edges(n_a, n_b, edges)


def test_zero_on_cycle_free_graphs():
    rng = np.random.default_rng(2)
    graphs = [random_tree(rng, int(rng.integers(1, 12)), int(rng.integers(1, 12))) for _ in range(30)]
    graphs += [even_cycle(h) for h in range(3, 9)] + [star(9), star(6, "B")]
    for g in graphs:
        for token in ("FourCycles", "FourCyclesNodePowerA[0.5]", "FourCyclesNodePowerB[0.2]",
                      "AltK4CyclesA[2]", "AltK4CyclesB[5]"):
            assert sv(g, token) == 0, (token, g)


def test_adding_edges_never_decreases_four_cycles():
    rng = np.random.default_rng(4)
    g = new_graph(8, 8)
    prev = 0
    for a, b in rng.permutation([(a, b) for a in range(8) for b in range(8)]):
        g.add_edge(int(a), int(b))
        now = g.total_c4()
        assert now >= prev
        prev = now
    assert prev == math.comb(8, 2) ** 2
