"""MCMC simulation from a bipartite ERGM.

Two proposal kernels are available:

``basic``
    pick a dyad uniformly at random and propose toggling it;
``tnt``
    tie/no-tie: with probability 1/2 propose deleting a uniformly chosen
    existing edge, otherwise toggle a uniform dyad. The Hastings ratio
    corrects for the asymmetric proposal.

:func:`mh_step` is a pure-Python reference working on a
:class:`~bpergm.graph.BipartiteGraph`; :func:`run_chain` and :class:`Chain`
drive the compiled engine.
"""
from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import _engine as eng
from .graph import BipartiteGraph
from .statistics import Model, TermKind, model_change


class Kernel(enum.Enum):
    BASIC = "basic"
    TNT = "tnt"

    @classmethod
    def parse(cls, value: "str | Kernel") -> "Kernel":
        if isinstance(value, Kernel):
            return value
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise ValueError(f"unknown sampler kernel {value!r} (use 'basic' or 'tnt')") from None

    @property
    def code(self) -> int:
        return eng.BASIC if self is Kernel.BASIC else eng.TNT


@dataclass(frozen=True)
class SamplerConfig:
    kernel: Kernel = Kernel.TNT
    burn_in: int = 100_000
    interval: int = 10_000
    samples: int = 100
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kernel", Kernel.parse(self.kernel))
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.interval < 1:
            raise ValueError("interval must be >= 1")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


def chain_rng(seed: int, chain_index: int = 0) -> np.random.Generator:
    """Independent PCG64 stream for chain ``chain_index`` under a master seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chain_index,))))


@dataclass
class ChainTrace:
    names: list[str]
    stats: np.ndarray
    aux: np.ndarray
    seed: int
    chain_index: int
    accepted: int
    proposals: int
    final_graph: BipartiteGraph | None = None
    graphs: np.ndarray | None = field(default=None, repr=False)

    @property
    def edges(self) -> np.ndarray:
        return self.aux[:, 0]

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposals if self.proposals else 0.0

    def __len__(self) -> int:
        return self.stats.shape[0]


def model_arrays(m: Model) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Term codes, shapes and shared-work indices for the compiled engine.

    ``reuse[t]`` points AltK4Cycles terms at an earlier AltKCycles term on the
    same side with the same lambda, whose delta they can share.
    """
    kinds = np.array([t.kind.value for t in m.terms], dtype=np.int64)
    shapes = np.array([0.0 if t.shape is None else t.shape for t in m.terms], dtype=float)
    reuse = np.full(len(m), -1, dtype=np.int64)
    partner = {TermKind.AltK4CyclesA: TermKind.AltKCyclesA, TermKind.AltK4CyclesB: TermKind.AltKCyclesB}
    for i, t in enumerate(m.terms):
        if t.kind in partner:
            for j in range(i):
                if m.terms[j].kind is partner[t.kind] and m.terms[j].shape == t.shape:
                    reuse[i] = j
                    break
    return kinds, shapes, reuse


class Chain:
    """A single MCMC chain on the compiled engine.

    The graph state, running statistics and RNG stream persist between calls,
    and ``theta`` may be modified in place between calls (the estimators rely
    on this).
    """

    def __init__(self, g: BipartiteGraph, m: Model, kernel: Kernel | str = Kernel.TNT,
                 rng: np.random.Generator | None = None):
        self.model = m
        self.kernel = Kernel.parse(kernel)
        self.rng = rng if rng is not None else chain_rng(0)
        self.state = eng.state_from_graph(g)
        self.kinds, self.shapes, self.reuse = model_arrays(m)
        self.theta = np.array(m.theta, dtype=float)
        self.stats = self.recompute()
        self.accepted = 0
        self.proposals = 0

    @property
    def n_a(self) -> int:
        return self.state.adj.shape[0]

    @property
    def n_b(self) -> int:
        return self.state.adj.shape[1]

    def recompute(self) -> np.ndarray:
        """Statistics of the current graph computed from scratch."""
        out = np.zeros(len(self.kinds))
        eng.full_stats(self.state, self.kinds, self.shapes, out)
        return out

    def run(self, n_steps: int) -> int:
        acc = eng.run_steps(self.state, self.kinds, self.shapes, self.reuse, self.theta,
                            self.kernel.code, int(n_steps), self.rng, self.stats)
        self.accepted += acc
        self.proposals += int(n_steps)
        return acc

    def sample(self, burn_in: int, interval: int, samples: int, keep_graphs: bool = False):
        """Run ``burn_in`` steps, then record ``samples`` states ``interval`` steps apart.

        Returns ``(stats, aux, graphs)``; ``graphs`` is None unless requested.
        """
        p = len(self.kinds)
        trace = np.zeros((samples, p))
        aux = np.zeros((samples, len(eng.AUX_NAMES)))
        shape = (samples if keep_graphs else 0, self.n_a, self.n_b)
        graphs = np.zeros(shape, np.uint8)
        acc = eng.sample(self.state, self.kinds, self.shapes, self.reuse, self.theta,
                         self.kernel.code, int(burn_in), int(interval), int(samples), self.rng,
                         self.stats, trace, aux, graphs, keep_graphs)
        self.accepted += acc
        self.proposals += int(burn_in) + int(interval) * int(samples)
        return trace, aux, (graphs if keep_graphs else None)

    def graph(self) -> BipartiteGraph:
        return eng.graph_from_state(self.state)


def run_chain(g0: BipartiteGraph, m: Model, cfg: SamplerConfig, chain_index: int = 0,
              keep_final: bool = True, keep_graphs: bool = False) -> ChainTrace:
    """Simulate from ``m`` starting at ``g0``; deterministic given the arguments."""
    chain = Chain(g0, m, cfg.kernel, chain_rng(cfg.seed, chain_index))
    trace, aux, graphs = chain.sample(cfg.burn_in, cfg.interval, cfg.samples, keep_graphs)
    return ChainTrace(
        names=m.names(),
        stats=trace,
        aux=aux,
        seed=cfg.seed,
        chain_index=chain_index,
        accepted=chain.accepted,
        proposals=chain.proposals,
        final_graph=chain.graph() if keep_final else None,
        graphs=graphs,
    )


def mh_step(g: BipartiteGraph, m: Model, kernel: Kernel | str, rng: np.random.Generator) -> bool:
    """One Metropolis-Hastings proposal on ``g`` (reference implementation).

    Draws from ``rng`` in the same order as the compiled engine, so both give
    identical chains for the basic kernel.
    """
    kernel = Kernel.parse(kernel)
    dyads = g.n_dyads
    n_edges = g.edge_count
    use_edge = False
    if kernel is Kernel.TNT:
        coin = rng.random()
        use_edge = coin < 0.5 and n_edges > 0
    if use_edge:
        a, b = list(g.edges())[int(rng.integers(0, n_edges))]
    else:
        d = int(rng.integers(0, dyads))
        a, b = divmod(d, g.n_b)
    present = g.has_edge(a, b)
    if present:
        g.toggle_edge(a, b)
    delta = model_change(g, m, a, b)
    log_ratio = float(np.dot(m.theta, delta))
    if present:
        log_ratio = -log_ratio
    if kernel is Kernel.TNT:
        log_ratio += tnt_log_q(n_edges, dyads, present)
    accept = not (log_ratio < 0.0 and rng.random() >= math.exp(log_ratio))
    if accept != present:
        # rejected deletion: restore the edge; accepted addition: add it
        g.toggle_edge(a, b)
    return accept


def tnt_log_q(n_edges: int, dyads: int, present: bool) -> float:
    """Log reverse/forward proposal ratio of the TNT kernel."""
    return float(eng._tnt_log_q(n_edges, dyads, present))


def write_trace_csv(trace: ChainTrace, sink, comments: list[str] = ()) -> None:
    out = sink if hasattr(sink, "write") else open(sink, "w", newline="\n")
    try:
        for c in comments:
            out.write(f"# {c}\n")
        out.write(f"# seed = {trace.seed}\n# chain_index = {trace.chain_index}\n")
        out.write(f"# acceptance_rate = {trace.acceptance_rate:.6f}\n")
        out.write(",".join(["sample", "edges", *trace.names]) + "\n")
        for i in range(len(trace)):
            row = [str(i), str(int(trace.edges[i]))] + [fmt(x) for x in trace.stats[i]]
            out.write(",".join(row) + "\n")
    finally:
        if out is not sink:
            out.close()


def fmt(x: float) -> str:
    """Stable text form for CSV cells."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x) or math.isnan(x):
        return str(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return format(x, ".10g")


def trace_to_string(trace: ChainTrace, comments: list[str] = ()) -> str:
    buf = io.StringIO()
    write_trace_csv(trace, buf, comments)
    return buf.getvalue()
