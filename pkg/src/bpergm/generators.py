"""Small named bipartite graphs and the bundled Southern Women network."""
from __future__ import annotations

from importlib import resources

from .graph import BipartiteGraph, from_edges, parse_edge_list

SOUTHERN_WOMEN_EDGES = 89


def two_path() -> BipartiteGraph:
    """One A-node joined to two B-nodes."""
    return from_edges(1, 2, [(0, 0), (0, 1)])


def four_cycle() -> BipartiteGraph:
    return complete_bipartite(2, 2)


def complete_bipartite(n_a: int, n_b: int) -> BipartiteGraph:
    return from_edges(n_a, n_b, ((a, b) for a in range(n_a) for b in range(n_b)))


def four_cycles_k(k: int) -> BipartiteGraph:
    """K_{2,k}: two A-nodes sharing k B-neighbours (C(k, 2) four-cycles)."""
    return complete_bipartite(2, k)


def even_cycle(half_length: int) -> BipartiteGraph:
    """Simple cycle of length ``2 * half_length`` alternating A and B nodes."""
    if half_length < 2:
        raise ValueError("a bipartite cycle needs at least two nodes per mode")
    n = half_length
    edges = [(i, i) for i in range(n)] + [((i + 1) % n, i) for i in range(n)]
    return from_edges(n, n, edges)


def star(k: int, hub_mode: str = "A") -> BipartiteGraph:
    """Hub joined to ``k`` leaves in the other mode."""
    if hub_mode == "A":
        return from_edges(1, k, ((0, j) for j in range(k)))
    return from_edges(k, 1, ((i, 0) for i in range(k)))


def four_fan(k: int) -> BipartiteGraph:
    """``k`` four-cycles sharing a single central A-node (A-node 0).

    Four-cycle ``i`` is 0 - b(2i) - a(i+1) - b(2i+1) - 0, so N_A = k + 1 and
    N_B = 2k. ``four_fan(1)`` is a single four-cycle.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    edges = []
    for i in range(k):
        b0, b1 = 2 * i, 2 * i + 1
        edges += [(0, b0), (0, b1), (i + 1, b0), (i + 1, b1)]
    return from_edges(k + 1, 2 * k, edges)


def southern_women() -> BipartiteGraph:
    """The Southern Women network: 18 women (A) by 14 events (B)."""
    text = resources.files(__package__).joinpath("data").joinpath("southern_women.txt").read_text()
    g = parse_edge_list(text)
    if g.edge_count != SOUTHERN_WOMEN_EDGES:
        raise RuntimeError(f"Southern Women fixture has {g.edge_count} edges, expected 89")
    return g


EXAMPLE_GRAPHS = {
    "two-path": two_path,
    "four-cycle": four_cycle,
    "four-cycles-3": lambda: four_cycles_k(3),
    "ten-cycle": lambda: even_cycle(5),
    "nine-star": lambda: star(9),
    "four-fan-3": lambda: four_fan(3),
}

BUILTIN_GRAPHS = {"southern-women": southern_women, **EXAMPLE_GRAPHS}
