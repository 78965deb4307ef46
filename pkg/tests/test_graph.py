import io
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bpergm.generators import (SOUTHERN_WOMEN_EDGES, four_cycle, four_cycles_k, four_fan, even_cycle,
                               southern_women, star)
from bpergm.graph import (BipartiteGraph, GraphFormatError, Mode, from_edges, load_graph, new_graph,
                          node_a, node_b, parse_edge_list, save_graph)

from oracles import brute_c4, brute_l2, random_graph


def check_invariants(g: BipartiteGraph) -> None:
    da, db = g.degrees_a(), g.degrees_b()
    assert sum(da) == sum(db) == g.edge_count
    pairs_b = g.l2_pairs(Mode.B)
    pairs_a = g.l2_pairs(Mode.A)
    assert all(m >= 1 for m in pairs_b.values())
    assert sum(pairs_b.values()) == sum(comb(d, 2) for d in da)
    assert sum(pairs_a.values()) == sum(comb(d, 2) for d in db)
    for (u, v), m in pairs_b.items():
        assert m == g.l2(node_b(v), node_b(u))
        assert m <= min(db[u], db[v])
    through_a, through_b = brute_l2(g)
    assert pairs_b == through_a
    assert pairs_a == through_b


def test_new_graph_empty():
    g = new_graph(2, 2)
    assert g.edge_count == 0
    assert g.l2_pairs(Mode.A) == {} and g.l2_pairs(Mode.B) == {}
    sw = new_graph(18, 14)
    assert (sw.n_a, sw.n_b, sw.n_dyads) == (18, 14, 252)
    z = new_graph(0, 0)
    assert z.edge_count == 0 and list(z.edges()) == []


def test_toggle_builds_four_cycle():
    g = new_graph(2, 2)
    for a, b in [(0, 0), (0, 1), (1, 0), (1, 1)]:
        assert g.toggle_edge(a, b) is True
    assert g.l2(node_b(0), node_b(1)) == 2
    assert g.l2(node_a(0), node_a(1)) == 2
    assert g == four_cycle()


def test_double_toggle_is_identity():
    rng = np.random.default_rng(3)
    g = random_graph(rng, 7, 9, 0.4)
    before = g.copy()
    for a, b in [(0, 0), (3, 5), (6, 8)]:
        g.toggle_edge(a, b)
        g.toggle_edge(a, b)
    assert g == before


def test_k23_two_paths():
    g = four_cycles_k(3)
    assert g.l2(node_a(0), node_a(1)) == 3
    assert g.l2_pairs(Mode.B) == {(0, 1): 2, (0, 2): 2, (1, 2): 2}


def test_l2_examples_and_errors():
    assert four_cycle().l2(node_b(0), node_b(1)) == 2
    s = star(9)
    assert all(s.l2(node_b(i), node_b(j)) == 1 for i in range(9) for j in range(i + 1, 9))
    assert new_graph(2, 2).l2(node_a(0), node_a(1)) == 0
    with pytest.raises(ValueError):
        four_cycle().l2(node_a(0), node_b(1))
    with pytest.raises(ValueError):
        four_cycle().l2(node_a(1), node_a(1))


def test_c4_at_node_examples():
    k23 = four_cycles_k(3)
    assert k23.c4_at_node(node_a(0)) == k23.c4_at_node(node_a(1)) == 3
    fan = four_fan(3)
    assert fan.c4_at_node(node_a(0)) == 3
    assert [fan.c4_at_node(node_a(i)) for i in (1, 2, 3)] == [1, 1, 1]
    ring = even_cycle(5)
    assert all(ring.c4_at_node(node_a(i)) == 0 and ring.c4_at_node(node_b(i)) == 0 for i in range(5))


def test_total_c4_examples():
    assert four_cycle().total_c4() == 1
    assert four_fan(7).total_c4() == 7
    assert southern_women().total_c4() == brute_c4(southern_women())


def test_index_errors():
    g = new_graph(2, 3)
    with pytest.raises(IndexError):
        g.toggle_edge(2, 0)
    with pytest.raises(IndexError):
        g.toggle_edge(0, 3)
    with pytest.raises(IndexError):
        g.c4_at_node(node_b(5))


def test_random_toggle_sequences_match_recount():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n_a, n_b = rng.integers(1, 31, size=2)
        g = new_graph(int(n_a), int(n_b))
        for _ in range(int(rng.integers(1, 400))):
            g.toggle_edge(int(rng.integers(n_a)), int(rng.integers(n_b)))
        check_invariants(g)
        assert 4 * g.total_c4() == sum(g.c4_at_node(node_a(i)) for i in range(g.n_a)) + \
            sum(g.c4_at_node(node_b(j)) for j in range(g.n_b))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.lists(st.tuples(st.integers(0, 7), st.integers(0, 7)), max_size=80))
def test_total_c4_brute_force_small(n_a, n_b, toggles):
    g = new_graph(n_a, n_b)
    for a, b in toggles:
        g.toggle_edge(a % n_a, b % n_b)
    assert g.total_c4() == brute_c4(g)
    check_invariants(g)


# -- edge-list I/O ---------------------------------------------------------

def test_southern_women_fixture():
    g = southern_women()
    assert (g.n_a, g.n_b, g.edge_count) == (18, 14, SOUTHERN_WOMEN_EDGES)


def test_round_trip(tmp_path):
    for g in (southern_women(), four_fan(3), new_graph(3, 4)):
        path = tmp_path / "g.txt"
        save_graph(g, path)
        assert load_graph(path) == g
        buf = io.StringIO()
        save_graph(g, buf)
        buf.seek(0)
        assert load_graph(buf) == g


def test_parse_accepts_comments_and_crlf():
    g = parse_edge_list("# header\r\n2 2\r\n0 0\r\n\r\n# mid\r\n1 1\r\n")
    assert sorted(g.edges()) == [(0, 0), (1, 1)]
    assert parse_edge_list("3 4\n").edge_count == 0


@pytest.mark.parametrize("text, line, fragment", [
    ("18 14\n18 0\n", 2, "A-index 18 out of range"),
    ("2 2\n0 2\n", 2, "B-index"),
    ("2 2\n0 0\n0 0\n", 3, "duplicate edge"),
    ("2 2\n0\n", 2, "expected two integers"),
    ("2 x\n", 1, "non-integer"),
    ("# nothing\n", None, "missing header"),
])
def test_parse_errors(text, line, fragment):
    with pytest.raises(GraphFormatError) as exc:
        parse_edge_list(text)
    assert exc.value.line == line
    assert fragment in str(exc.value)


def test_transpose_swaps_modes():
    g = from_edges(2, 3, [(0, 0), (0, 2), (1, 2)])
    t = g.transpose()
    assert (t.n_a, t.n_b) == (3, 2)
    assert sorted(t.edges()) == [(0, 0), (2, 0), (2, 1)]
