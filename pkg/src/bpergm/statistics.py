"""ERGM term catalogue: full statistics and exact change statistics.

Mode conventions
----------------
* ``TwoPaths``, ``AltKCycles`` and ``AltK4Cycles`` with suffix A count
  two-paths *centred on* A-nodes, i.e. they sum over pairs of B-nodes.
* Star, degree and ``FourCyclesNodePower`` terms with suffix A sum over
  A-nodes.

Change statistics are always for *adding* an absent dyad ``(a, b)``.
"""
from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .graph import BipartiteGraph, Mode, NodeRef


class TermKind(enum.Enum):
    Edges = 0
    TwoPathsA = 1
    TwoPathsB = 2
    B1Star2 = 3
    B2Star2 = 4
    AltStarsA = 5
    AltStarsB = 6
    GwDegreeA = 7
    GwDegreeB = 8
    AltKCyclesA = 9
    AltKCyclesB = 10
    AltK4CyclesA = 11
    AltK4CyclesB = 12
    FourCycles = 13
    FourCyclesNodePowerA = 14
    FourCyclesNodePowerB = 15
    FourCyclesNodePowerSum = 16


_LAMBDA_KINDS = {
    TermKind.AltStarsA, TermKind.AltStarsB,
    TermKind.AltKCyclesA, TermKind.AltKCyclesB,
    TermKind.AltK4CyclesA, TermKind.AltK4CyclesB,
}
_ALPHA_KINDS = {
    TermKind.FourCyclesNodePowerA, TermKind.FourCyclesNodePowerB, TermKind.FourCyclesNodePowerSum,
}
_DECAY_KINDS = {TermKind.GwDegreeA, TermKind.GwDegreeB}

DEFAULT_SHAPES = {
    **{k: 2.0 for k in _LAMBDA_KINDS},
    **{k: 0.5 for k in _ALPHA_KINDS},
    **{k: 1.0 for k in _DECAY_KINDS},
}

_TOKEN = re.compile(r"^\s*([A-Za-z0-9]+)\s*(?:\[\s*([^\]]*)\s*\])?\s*(?:=\s*(\S+))?\s*$")


class TermError(ValueError):
    pass


def _fmt_shape(x: float) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


@dataclass(frozen=True)
class Term:
    """A statistic identifier with optional shape parameter.

    ``shape`` is lambda for alternating terms, alpha for node-power terms and
    the decay for geometrically weighted degree terms.
    """

    kind: TermKind
    shape: float | None = None

    def __post_init__(self):
        kind = self.kind
        if kind in DEFAULT_SHAPES:
            if self.shape is None:
                raise TermError(f"{kind.name} requires a shape parameter")
            s = float(self.shape)
            object.__setattr__(self, "shape", s)
            if not math.isfinite(s):
                raise TermError(f"{kind.name}: shape must be finite")
            if kind in _LAMBDA_KINDS and not s > 1:
                raise TermError(f"{kind.name}: lambda must be > 1, got {s}")
            if kind in _ALPHA_KINDS and not 0 < s <= 1:
                raise TermError(f"{kind.name}: alpha must be in (0, 1], got {s}")
            if kind in _DECAY_KINDS and not s >= 0:
                raise TermError(f"{kind.name}: decay must be >= 0, got {s}")
        elif self.shape is not None:
            raise TermError(f"{kind.name} takes no shape parameter")

    @classmethod
    def parse(cls, token: str) -> "Term":
        """Parse ``"Kind"`` or ``"Kind[shape]"``; missing shapes take defaults."""
        term, theta = parse_term_token(token)
        if theta is not None:
            raise TermError(f"unexpected coefficient in term {token!r}")
        return term

    def __str__(self) -> str:
        if self.shape is None:
            return self.kind.name
        return f"{self.kind.name}[{_fmt_shape(self.shape)}]"


def parse_term_token(token: str) -> tuple[Term, float | None]:
    """Parse ``"Kind[shape]=theta"``; shape and theta are optional."""
    m = _TOKEN.match(token)
    if not m:
        raise TermError(f"malformed term {token!r}")
    name, shape, theta = m.groups()
    try:
        kind = TermKind[name]
    except KeyError:
        raise TermError(f"unknown term kind {name!r}") from None
    try:
        shape_val = float(shape) if shape else DEFAULT_SHAPES.get(kind)
        theta_val = float(theta) if theta is not None else None
    except ValueError:
        raise TermError(f"non-numeric value in term {token!r}") from None
    return Term(kind, shape_val), theta_val


def default_terms() -> list[Term]:
    return [Term(k, DEFAULT_SHAPES.get(k)) for k in TermKind]


@dataclass(frozen=True)
class Model:
    """Ordered terms with one coefficient each."""

    terms: tuple[Term, ...]
    theta: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        terms = tuple(self.terms)
        object.__setattr__(self, "terms", terms)
        theta = np.zeros(len(terms)) if self.theta is None else np.array(self.theta, dtype=float)
        if theta.shape != (len(terms),):
            raise TermError(f"theta has length {theta.size}, model has {len(terms)} terms")
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        seen = set()
        for t in terms:
            key = (t.kind, t.shape)
            if key in seen:
                raise TermError(f"duplicate term {t}")
            seen.add(key)
        sums = {t.shape for t in terms if t.kind is TermKind.FourCyclesNodePowerSum}
        parts = {t.shape for t in terms
                 if t.kind in (TermKind.FourCyclesNodePowerA, TermKind.FourCyclesNodePowerB)}
        if sums & parts:
            raise TermError("FourCyclesNodePowerSum cannot be combined with its A or B variant")

    @classmethod
    def parse(cls, tokens: Iterable[str]) -> "Model":
        terms, thetas = [], []
        for tok in tokens:
            term, theta = parse_term_token(tok)
            terms.append(term)
            thetas.append(0.0 if theta is None else theta)
        return cls(tuple(terms), np.array(thetas))

    def with_theta(self, theta: Sequence[float]) -> "Model":
        return Model(self.terms, np.asarray(theta, dtype=float))

    def names(self) -> list[str]:
        return [str(t) for t in self.terms]

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other):
        if not isinstance(other, Model):
            return NotImplemented
        return self.terms == other.terms and np.array_equal(self.theta, other.theta)

    def __hash__(self):
        return hash((self.terms, self.theta.tobytes()))


# -- full statistics ------------------------------------------------------

def _pow(x: float, alpha: float) -> float:
    # 0^alpha = 0 for node-power terms
    return math.exp(alpha * math.log(x)) if x > 0 else 0.0


def _alt_two_path_sum(g: BipartiteGraph, mode: Mode, lam: float) -> float:
    r = 1.0 - 1.0 / lam
    return lam * sum(1.0 - r ** m for m in g.l2_pairs(mode).values())


def _alt_k4_sum(g: BipartiteGraph, mode: Mode, lam: float) -> float:
    # equals TwoPaths - AltKCycles; pairs with one two-path contribute exactly 0
    r = 1.0 - 1.0 / lam
    return float(sum(m - lam * (1.0 - r ** m) for m in g.l2_pairs(mode).values() if m >= 2))


def _node_power(g: BipartiteGraph, mode: Mode, alpha: float) -> float:
    n = g.n_a if mode is Mode.A else g.n_b
    return sum(_pow(g.c4_at_node(NodeRef(mode, i)), alpha) for i in range(n))


def _alt_stars(degrees: list[int], lam: float) -> float:
    r = 1.0 - 1.0 / lam
    return lam * lam * sum(r ** d - 1.0 + d / lam for d in degrees)


def _gw_degree(degrees: list[int], decay: float) -> float:
    r = 1.0 - math.exp(-decay)
    return math.exp(decay) * sum(1.0 - r ** d for d in degrees)


def stat_value(g: BipartiteGraph, t: Term) -> float:
    """Value of the statistic ``t`` on ``g``."""
    k, s = t.kind, t.shape
    if k is TermKind.Edges:
        return float(g.edge_count)
    if k in (TermKind.TwoPathsA, TermKind.B1Star2):
        return float(sum(comb(d, 2) for d in g.degrees_a()))
    if k in (TermKind.TwoPathsB, TermKind.B2Star2):
        return float(sum(comb(d, 2) for d in g.degrees_b()))
    if k is TermKind.AltStarsA:
        return _alt_stars(g.degrees_a(), s)
    if k is TermKind.AltStarsB:
        return _alt_stars(g.degrees_b(), s)
    if k is TermKind.GwDegreeA:
        return _gw_degree(g.degrees_a(), s)
    if k is TermKind.GwDegreeB:
        return _gw_degree(g.degrees_b(), s)
    # centred on A means summing over B-node pairs
    if k is TermKind.AltKCyclesA:
        return _alt_two_path_sum(g, Mode.B, s)
    if k is TermKind.AltKCyclesB:
        return _alt_two_path_sum(g, Mode.A, s)
    if k is TermKind.AltK4CyclesA:
        return _alt_k4_sum(g, Mode.B, s)
    if k is TermKind.AltK4CyclesB:
        return _alt_k4_sum(g, Mode.A, s)
    if k is TermKind.FourCycles:
        return float(g.total_c4())
    if k is TermKind.FourCyclesNodePowerA:
        return _node_power(g, Mode.A, s)
    if k is TermKind.FourCyclesNodePowerB:
        return _node_power(g, Mode.B, s)
    if k is TermKind.FourCyclesNodePowerSum:
        return _node_power(g, Mode.A, s) + _node_power(g, Mode.B, s)
    raise TermError(f"unhandled term {t}")


# -- change statistics ----------------------------------------------------

def _delta_c4(g: BipartiteGraph, a: int, b: int) -> int:
    row = g.l2_row(NodeRef(Mode.B, b))
    return sum(row.get(l, 0) for l in g.neighbours(NodeRef(Mode.A, a)))


def _delta_alt_k_cycles(g: BipartiteGraph, t: Term, a: int, b: int) -> float:
    r = 1.0 - 1.0 / t.shape
    if t.kind in (TermKind.AltKCyclesA, TermKind.AltK4CyclesA):
        row = g.l2_row(NodeRef(Mode.B, b))
        return sum(r ** row.get(l, 0) for l in g.neighbours(NodeRef(Mode.A, a)))
    row = g.l2_row(NodeRef(Mode.A, a))
    return sum(r ** row.get(k, 0) for k in g.neighbours(NodeRef(Mode.B, b)))


def _delta_node_power(g: BipartiteGraph, mode: Mode, alpha: float, a: int, b: int,
                      d_c4: int) -> float:
    # Node u of the toggled dyad gains every new cycle; each neighbour k of
    # the other endpoint gains L2(k, u). No node lies in N(a) and N(b) at once
    # in a bipartite graph, so the general one-mode correction term vanishes.
    if mode is Mode.A:
        u, other = NodeRef(Mode.A, a), NodeRef(Mode.B, b)
    else:
        u, other = NodeRef(Mode.B, b), NodeRef(Mode.A, a)
    c4_u = g.c4_at_node(u)
    delta = _pow(c4_u + d_c4, alpha) - _pow(c4_u, alpha)
    row = g.l2_row(u)
    for k in g.neighbours(other):
        m = row.get(k, 0)
        if m:
            c4_k = g.c4_at_node(NodeRef(mode, k))
            delta += _pow(c4_k + m, alpha) - _pow(c4_k, alpha)
    return delta


def _check_absent(g: BipartiteGraph, a: int, b: int) -> None:
    if g.has_edge(a, b):
        raise ValueError(f"dyad ({a}, {b}) is present; change statistics are for additions")


def change_value(g: BipartiteGraph, t: Term, a: int, b: int) -> float:
    """``stat_value(g + (a, b), t) - stat_value(g, t)`` for an absent dyad."""
    _check_absent(g, a, b)
    return _change(g, t, a, b, {})


def _change(g: BipartiteGraph, t: Term, a: int, b: int, cache: dict) -> float:
    k, s = t.kind, t.shape
    if k is TermKind.Edges:
        return 1.0
    if k in (TermKind.TwoPathsA, TermKind.B1Star2):
        return float(g.degree(NodeRef(Mode.A, a)))
    if k in (TermKind.TwoPathsB, TermKind.B2Star2):
        return float(g.degree(NodeRef(Mode.B, b)))
    if k in (TermKind.AltStarsA, TermKind.AltStarsB):
        d = g.degree(NodeRef(Mode.A, a) if k is TermKind.AltStarsA else NodeRef(Mode.B, b))
        return s * (1.0 - (1.0 - 1.0 / s) ** d)
    if k in (TermKind.GwDegreeA, TermKind.GwDegreeB):
        d = g.degree(NodeRef(Mode.A, a) if k is TermKind.GwDegreeA else NodeRef(Mode.B, b))
        return (1.0 - math.exp(-s)) ** d
    if k in (TermKind.AltKCyclesA, TermKind.AltKCyclesB,
             TermKind.AltK4CyclesA, TermKind.AltK4CyclesB):
        side = "A" if k in (TermKind.AltKCyclesA, TermKind.AltK4CyclesA) else "B"
        key = ("altk", side, s)
        if key not in cache:
            cache[key] = _delta_alt_k_cycles(g, t, a, b)
        d_alt = cache[key]
        if k is TermKind.AltK4CyclesA:
            return 0.0 - (d_alt - g.degree(NodeRef(Mode.A, a)))
        if k is TermKind.AltK4CyclesB:
            return 0.0 - (d_alt - g.degree(NodeRef(Mode.B, b)))
        return d_alt
    if "c4" not in cache:
        cache["c4"] = _delta_c4(g, a, b)
    d_c4 = cache["c4"]
    if k is TermKind.FourCycles:
        return float(d_c4)
    if k is TermKind.FourCyclesNodePowerA:
        return _delta_node_power(g, Mode.A, s, a, b, d_c4)
    if k is TermKind.FourCyclesNodePowerB:
        return _delta_node_power(g, Mode.B, s, a, b, d_c4)
    if k is TermKind.FourCyclesNodePowerSum:
        return (_delta_node_power(g, Mode.A, s, a, b, d_c4)
                + _delta_node_power(g, Mode.B, s, a, b, d_c4))
    raise TermError(f"unhandled term {t}")


def model_stats(g: BipartiteGraph, m: Model) -> np.ndarray:
    return np.array([stat_value(g, t) for t in m.terms], dtype=float)


def model_change(g: BipartiteGraph, m: Model, a: int, b: int) -> np.ndarray:
    """Change vector for adding ``(a, b)``; shares work between related terms."""
    _check_absent(g, a, b)
    cache: dict = {}
    return np.array([_change(g, t, a, b, cache) for t in m.terms], dtype=float)
