"""Goodness of fit: observed statistics against a simulated distribution."""
from __future__ import annotations

import io
import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .graph import BipartiteGraph, Mode, NodeRef
from .sampler import Chain, SamplerConfig, chain_rng, fmt
from .statistics import Model

DEFAULT_WORK_LIMIT = 10**8
GOF_COLUMNS = ("statistic", "observed", "sim_mean", "sim_sd", "t_ratio",
               "q05", "q25", "q50", "q75", "q95")


class CensusLimitError(RuntimeError):
    """The cycle census exceeded its work budget."""


@njit(cache=True)
def _census(indptr, indices, n, max_len, limit, counts):
    on_path = np.zeros(n, np.bool_)
    path = np.zeros(max_len + 1, np.int64)
    it = np.zeros(max_len + 1, np.int64)
    dist = np.zeros(n, np.int64)
    queue = np.zeros(n, np.int64)
    big = max_len + 1
    work = 0
    for r in range(n):
        # distances back to r inside the nodes >= r, for pruning
        for v in range(n):
            dist[v] = big
        dist[r] = 0
        head, tail = 0, 1
        queue[0] = r
        while head < tail:
            v = queue[head]
            head += 1
            for p in range(indptr[v], indptr[v + 1]):
                w = indices[p]
                if w > r and dist[w] == big:
                    dist[w] = dist[v] + 1
                    queue[tail] = w
                    tail += 1
        depth = 0
        path[0] = r
        it[0] = indptr[r]
        on_path[r] = True
        while depth >= 0:
            v = path[depth]
            if it[depth] < indptr[v + 1]:
                w = indices[it[depth]]
                it[depth] += 1
                if w == r:
                    # each cycle is seen in both directions; keep one
                    if depth >= 3 and path[1] < v:
                        counts[depth + 1] += 1
                    continue
                if w < r or on_path[w] or depth + 2 > max_len or depth + 1 + dist[w] > max_len:
                    continue
                work += 1
                if work > limit:
                    return -1
                depth += 1
                path[depth] = w
                it[depth] = indptr[w]
                on_path[w] = True
            else:
                on_path[v] = False
                depth -= 1
    return work


def _csr(adj: np.ndarray):
    n_a, n_b = adj.shape
    n = n_a + n_b
    full = np.zeros((n, n), np.uint8)
    full[:n_a, n_a:] = adj
    full[n_a:, :n_a] = adj.T
    indptr = np.zeros(n + 1, np.int64)
    indptr[1:] = np.cumsum(full.sum(axis=1))
    indices = np.nonzero(full)[1].astype(np.int64)
    return indptr, indices, n


def adjacency(g: BipartiteGraph) -> np.ndarray:
    adj = np.zeros((g.n_a, g.n_b), np.uint8)
    for a, b in g.edges():
        adj[a, b] = 1
    return adj


def cycle_census_adj(adj: np.ndarray, max_len: int = 10, work_limit: int = DEFAULT_WORK_LIMIT) -> dict[int, int]:
    if max_len not in (4, 6, 8, 10):
        raise ValueError("max_len must be one of 4, 6, 8, 10")
    indptr, indices, n = _csr(np.asarray(adj, np.uint8))
    counts = np.zeros(max_len + 2, np.int64)
    work = _census(indptr, indices, n, max_len, work_limit, counts)
    if work < 0:
        raise CensusLimitError(f"cycle census exceeded its work limit of {work_limit} path extensions")
    return {k: int(counts[k]) for k in range(4, max_len + 1, 2)}


def cycle_census(g: BipartiteGraph, max_len: int = 10, work_limit: int = DEFAULT_WORK_LIMIT) -> dict[int, int]:
    """Number of simple cycles of each even length 4..``max_len``.

    Every cycle is counted once, by a depth-first search rooted at its
    least-index node. Raises :class:`CensusLimitError` when more than
    ``work_limit`` path extensions would be needed.
    """
    return cycle_census_adj(adjacency(g), max_len, work_limit)


def unique_nodes_in_four_cycles(g: BipartiteGraph) -> tuple[int, int]:
    """Numbers of A-nodes and B-nodes lying on at least one four-cycle."""
    count_a = sum(1 for i in range(g.n_a) if g.c4_at_node(NodeRef(Mode.A, i)) > 0)
    count_b = sum(1 for j in range(g.n_b) if g.c4_at_node(NodeRef(Mode.B, j)) > 0)
    return count_a, count_b


def _node_c4(adj: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = adj.astype(np.int64)
    out = []
    for m in (x @ x.T, x.T @ x):
        np.fill_diagonal(m, 0)
        out.append((m * (m - 1) // 2).sum(axis=1))
    return out[0], out[1]


@dataclass
class GofRow:
    statistic: str
    observed: float
    sim_mean: float
    sim_sd: float
    t_ratio: float
    quantiles: tuple[float, float, float, float, float]


@dataclass
class GofReport:
    rows: list[GofRow]
    n_sim: int
    skipped: dict[str, int] = field(default_factory=dict)

    def row(self, name: str) -> GofRow:
        for r in self.rows:
            if r.statistic == name:
                return r
        raise KeyError(name)

    def to_csv(self, comments: list[str] = ()) -> str:
        buf = io.StringIO()
        for c in comments:
            buf.write(f"# {c}\n")
        for name, n in self.skipped.items():
            buf.write(f"# skipped {name} = {n} (cycle census over work limit)\n")
        buf.write(",".join(GOF_COLUMNS) + "\n")
        for r in self.rows:
            cells = [r.statistic, fmt(r.observed), fmt(r.sim_mean), fmt(r.sim_sd), fmt(r.t_ratio),
                     *(fmt(q) for q in r.quantiles)]
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()


def t_ratio(sim: np.ndarray, observed: float) -> tuple[float, float, float]:
    """``(mean, sd, (mean - observed) / sd)``; zero sd gives 0 or a signed infinity."""
    sim = np.asarray(sim, dtype=float)
    mean = float(sim.mean())
    sd = float(sim.std(ddof=1)) if sim.size > 1 else 0.0
    diff = mean - observed
    if sd > 0:
        return mean, sd, diff / sd
    if diff == 0:
        return mean, sd, 0.0
    return mean, sd, float(np.copysign(np.inf, diff))


def graph_statistics(adj: np.ndarray, max_len: int, deg_caps: tuple[int, int],
                     work_limit: int = DEFAULT_WORK_LIMIT, strict: bool = True) -> dict[str, float]:
    """The GOF statistic families for one graph, keyed by row name.

    With ``strict=False`` a census over the work limit is retried at shorter
    maximum lengths and the uncounted lengths are reported as NaN.
    """
    adj = np.asarray(adj, np.uint8)
    out: dict[str, float] = {"edges": float(adj.sum())}
    for label, degs, cap in (("A", adj.sum(axis=1), deg_caps[0]), ("B", adj.sum(axis=0), deg_caps[1])):
        hist = np.bincount(np.minimum(degs, cap + 1), minlength=cap + 2)
        for k in range(cap + 1):
            out[f"degree{label}_{k}"] = float(hist[k])
        out[f"degree{label}_{cap + 1}+"] = float(hist[cap + 1])
    c4a, c4b = _node_c4(adj)
    out["four_cycles"] = float(c4a.sum() // 2)
    census: dict[int, int] = {}
    for length in range(max_len, 2, -2):
        try:
            census = cycle_census_adj(adj, length, work_limit)
            break
        except CensusLimitError:
            if strict or length == 4:
                raise
    for k in range(4, max_len + 1, 2):
        out[f"cycles_{k}"] = float(census[k]) if k in census else float("nan")
    out["unique_A_c4"] = float((c4a > 0).sum())
    out["unique_B_c4"] = float((c4b > 0).sum())
    return out


def gof_report(obs: BipartiteGraph, simulated, max_len: int = 10,
               work_limit: int = DEFAULT_WORK_LIMIT) -> GofReport:
    """Compare ``obs`` with a sequence of simulated graphs or adjacency matrices.

    Simulated graphs whose longer cycles exceed the census budget contribute
    only to the lengths that could be counted; ``GofReport.skipped`` records
    how many were left out of each row.
    """
    obs_adj = adjacency(obs)
    # bins run to max observed degree + 2, plus one overflow bin
    caps = (int(obs_adj.sum(axis=1).max(initial=0)) + 2, int(obs_adj.sum(axis=0).max(initial=0)) + 2)
    observed = graph_statistics(obs_adj, max_len, caps, work_limit)
    sims = [graph_statistics(adjacency(s) if isinstance(s, BipartiteGraph) else s, max_len, caps,
                             work_limit, strict=False)
            for s in simulated]
    if not sims:
        raise ValueError("need at least one simulated graph")
    rows, skipped = [], {}
    for name, obs_val in observed.items():
        vals = np.array([s[name] for s in sims])
        ok = ~np.isnan(vals)
        if not ok.all():
            skipped[name] = int((~ok).sum())
        vals = vals[ok]
        if vals.size == 0:
            nan = float("nan")
            rows.append(GofRow(name, obs_val, nan, nan, nan, (nan,) * 5))
            continue
        mean, sd, t = t_ratio(vals, obs_val)
        qs = tuple(float(q) for q in np.quantile(vals, [0.05, 0.25, 0.5, 0.75, 0.95]))
        rows.append(GofRow(name, obs_val, mean, sd, t, qs))
    return GofReport(rows, len(sims), skipped)


def gof_run(obs: BipartiteGraph, m: Model, theta, cfg: SamplerConfig, max_len: int = 10,
            work_limit: int = DEFAULT_WORK_LIMIT) -> GofReport:
    """Simulate ``cfg.samples`` graphs at ``theta`` (chain started at ``obs``) and compare."""
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta must be finite")
    chain = Chain(obs, m.with_theta(theta), cfg.kernel, chain_rng(cfg.seed, 0))
    _, _, graphs = chain.sample(cfg.burn_in, cfg.interval, cfg.samples, keep_graphs=True)
    if chain.proposals and chain.accepted == 0:
        warnings.warn("GOF chain accepted no proposals", RuntimeWarning, stacklevel=2)
    return gof_report(obs, graphs, max_len, work_limit)
