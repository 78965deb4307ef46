"""Bipartite graph storage with incrementally maintained two-path tables.

Node sets are called A and B. Nodes are zero-based integers within their own
mode. Every toggle keeps two sparse, symmetric tables up to date:

* ``l2`` between B-nodes, counting two-paths centred on A-nodes;
* ``l2`` between A-nodes, counting two-paths centred on B-nodes.

Pairs with no two-paths are never stored.
"""
from __future__ import annotations

import enum
import io
import os
from dataclasses import dataclass
from math import comb
from typing import Iterable, Iterator, TextIO


class Mode(enum.Enum):
    A = "A"
    B = "B"

    @property
    def other(self) -> "Mode":
        return Mode.B if self is Mode.A else Mode.A


@dataclass(frozen=True, order=True)
class NodeRef:
    mode: Mode
    index: int


def node_a(index: int) -> NodeRef:
    return NodeRef(Mode.A, index)


def node_b(index: int) -> NodeRef:
    return NodeRef(Mode.B, index)


class GraphFormatError(ValueError):
    """Raised for malformed edge-list input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BipartiteGraph:
    """Mutable two-mode graph.

    Parameters
    ----------
    n_a, n_b : int
        Sizes of node sets A and B.
    """

    __slots__ = ("n_a", "n_b", "_nbr_a", "_nbr_b", "_l2_a", "_l2_b", "_edge_count")

    def __init__(self, n_a: int, n_b: int):
        if n_a < 0 or n_b < 0:
            raise ValueError("node set sizes must be non-negative")
        self.n_a = int(n_a)
        self.n_b = int(n_b)
        self._nbr_a: list[set[int]] = [set() for _ in range(self.n_a)]
        self._nbr_b: list[set[int]] = [set() for _ in range(self.n_b)]
        # _l2_a[j][l]: two-paths j - i - l through A-nodes i (j, l in B)
        self._l2_a: list[dict[int, int]] = [{} for _ in range(self.n_b)]
        # _l2_b[i][k]: two-paths i - j - k through B-nodes j (i, k in A)
        self._l2_b: list[dict[int, int]] = [{} for _ in range(self.n_a)]
        self._edge_count = 0

    # -- basic queries -------------------------------------------------

    @property
    def edge_count(self) -> int:
        return self._edge_count

    @property
    def n_dyads(self) -> int:
        return self.n_a * self.n_b

    def _check(self, a: int, b: int) -> None:
        if not 0 <= a < self.n_a:
            raise IndexError(f"A-index {a} out of range [0, {self.n_a})")
        if not 0 <= b < self.n_b:
            raise IndexError(f"B-index {b} out of range [0, {self.n_b})")

    def has_edge(self, a: int, b: int) -> bool:
        self._check(a, b)
        return b in self._nbr_a[a]

    def neighbours(self, u: NodeRef) -> frozenset[int]:
        """Cross-mode neighbour indices of ``u``."""
        self._check_node(u)
        nbrs = self._nbr_a if u.mode is Mode.A else self._nbr_b
        return frozenset(nbrs[u.index])

    def degree(self, u: NodeRef) -> int:
        self._check_node(u)
        nbrs = self._nbr_a if u.mode is Mode.A else self._nbr_b
        return len(nbrs[u.index])

    def degrees_a(self) -> list[int]:
        return [len(s) for s in self._nbr_a]

    def degrees_b(self) -> list[int]:
        return [len(s) for s in self._nbr_b]

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges as ``(a, b)`` in lexicographic order."""
        for a in range(self.n_a):
            for b in sorted(self._nbr_a[a]):
                yield a, b

    def _check_node(self, u: NodeRef) -> None:
        size = self.n_a if u.mode is Mode.A else self.n_b
        if not 0 <= u.index < size:
            raise IndexError(f"{u.mode.value}-index {u.index} out of range [0, {size})")

    # -- mutation ------------------------------------------------------

    def toggle_edge(self, a: int, b: int) -> bool:
        """Flip dyad ``(a, b)``; returns whether the edge is now present.

        Cost is O(deg(a) + deg(b)).
        """
        self._check(a, b)
        nbr_a, nbr_b = self._nbr_a[a], self._nbr_b[b]
        if b in nbr_a:
            nbr_a.discard(b)
            nbr_b.discard(a)
            _bump_row(self._l2_a, b, nbr_a, -1)
            _bump_row(self._l2_b, a, nbr_b, -1)
            self._edge_count -= 1
            return False
        _bump_row(self._l2_a, b, nbr_a, +1)
        _bump_row(self._l2_b, a, nbr_b, +1)
        nbr_a.add(b)
        nbr_b.add(a)
        self._edge_count += 1
        return True

    def add_edge(self, a: int, b: int) -> None:
        if self.has_edge(a, b):
            raise ValueError(f"edge ({a}, {b}) already present")
        self.toggle_edge(a, b)

    def remove_edge(self, a: int, b: int) -> None:
        if not self.has_edge(a, b):
            raise ValueError(f"edge ({a}, {b}) not present")
        self.toggle_edge(a, b)

    # -- two-paths and four-cycles -------------------------------------

    def l2(self, u: NodeRef, v: NodeRef) -> int:
        """Number of two-paths between same-mode nodes ``u`` and ``v``."""
        if u.mode is not v.mode:
            raise ValueError("l2 is defined only for same-mode node pairs")
        if u.index == v.index:
            raise ValueError("l2 requires two distinct nodes")
        self._check_node(u)
        self._check_node(v)
        return self.l2_row(u).get(v.index, 0)

    def l2_row(self, u: NodeRef) -> dict[int, int]:
        """Read-only view of the nonzero two-path counts from ``u``.

        B-node rows count two-paths through A-nodes and vice versa.
        """
        table = self._l2_a if u.mode is Mode.B else self._l2_b
        return table[u.index]

    def c4_at_node(self, u: NodeRef) -> int:
        """Number of distinct four-cycles through ``u``."""
        self._check_node(u)
        return sum(comb(m, 2) for m in self.l2_row(u).values() if m >= 2)

    def total_c4(self) -> int:
        """Total number of four-cycles."""
        # Each four-cycle has exactly one B-pair joined by two two-paths.
        return sum(
            comb(m, 2)
            for j, row in enumerate(self._l2_a)
            for l, m in row.items()
            if l > j and m >= 2
        )

    def l2_pairs(self, mode: Mode) -> dict[tuple[int, int], int]:
        """All stored two-path counts between nodes of ``mode`` as ``{(u, v): m}``, u < v."""
        table = self._l2_a if mode is Mode.B else self._l2_b
        return {(u, v): m for u, row in enumerate(table) for v, m in row.items() if v > u}

    # -- whole-graph operations ----------------------------------------

    def copy(self) -> "BipartiteGraph":
        g = BipartiteGraph(self.n_a, self.n_b)
        g._nbr_a = [set(s) for s in self._nbr_a]
        g._nbr_b = [set(s) for s in self._nbr_b]
        g._l2_a = [dict(r) for r in self._l2_a]
        g._l2_b = [dict(r) for r in self._l2_b]
        g._edge_count = self._edge_count
        return g

    def transpose(self) -> "BipartiteGraph":
        """Same graph with the roles of A and B swapped."""
        return from_edges(self.n_b, self.n_a, ((b, a) for a, b in self.edges()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return (
            self.n_a == other.n_a
            and self.n_b == other.n_b
            and self._nbr_a == other._nbr_a
            and self._l2_a == other._l2_a
            and self._l2_b == other._l2_b
        )

    def __repr__(self) -> str:
        return f"BipartiteGraph(n_a={self.n_a}, n_b={self.n_b}, edges={self._edge_count})"


def _bump_row(table: list[dict[int, int]], centre_other: int, partners: Iterable[int], step: int) -> None:
    row = table[centre_other]
    for p in partners:
        if p == centre_other:
            continue
        other_row = table[p]
        m = row.get(p, 0) + step
        if m:
            row[p] = m
            other_row[centre_other] = m
        else:
            del row[p]
            del other_row[centre_other]


def new_graph(n_a: int, n_b: int) -> BipartiteGraph:
    return BipartiteGraph(n_a, n_b)


def from_edges(n_a: int, n_b: int, edges: Iterable[tuple[int, int]]) -> BipartiteGraph:
    g = BipartiteGraph(n_a, n_b)
    for a, b in edges:
        g.add_edge(a, b)
    return g


# -- edge-list I/O ------------------------------------------------------

def parse_edge_list(text: str) -> BipartiteGraph:
    """Parse the native edge-list format.

    First non-comment line is ``"N_A N_B"``; each following non-empty line is
    ``"a b"``. Lines starting with ``#`` are ignored, CRLF is accepted.
    """
    g: BipartiteGraph | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"expected two integers, got {raw!r}", lineno)
        try:
            x, y = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"non-integer field in {raw!r}", lineno) from None
        if g is None:
            if x < 0 or y < 0:
                raise GraphFormatError("node set sizes must be non-negative", lineno)
            g = BipartiteGraph(x, y)
            continue
        if not 0 <= x < g.n_a:
            raise GraphFormatError(f"A-index {x} out of range [0, {g.n_a})", lineno)
        if not 0 <= y < g.n_b:
            raise GraphFormatError(f"B-index {y} out of range [0, {g.n_b})", lineno)
        if g.has_edge(x, y):
            raise GraphFormatError(f"duplicate edge ({x}, {y})", lineno)
        g.toggle_edge(x, y)
    if g is None:
        raise GraphFormatError("missing header line 'N_A N_B'")
    return g


def format_edge_list(g: BipartiteGraph) -> str:
    lines = [f"{g.n_a} {g.n_b}"]
    lines.extend(f"{a} {b}" for a, b in g.edges())
    return "\n".join(lines) + "\n"


def load_graph(source: str | os.PathLike | TextIO) -> BipartiteGraph:
    """Load a graph from a path or an open text stream."""
    if isinstance(source, io.TextIOBase) or hasattr(source, "read"):
        return parse_edge_list(source.read())
    with open(source, "r", newline="") as fh:
        return parse_edge_list(fh.read())


def save_graph(g: BipartiteGraph, sink: str | os.PathLike | TextIO) -> None:
    text = format_edge_list(g)
    if hasattr(sink, "write"):
        sink.write(text)
        return
    with open(sink, "w", newline="\n") as fh:
        fh.write(text)
