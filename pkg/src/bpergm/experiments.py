"""Parameter sweeps and the node-power sign grid.

Every (term, theta, replicate) or (cell, replicate) is an independent job
with its own RNG stream derived from the master seed and the job's position
in a fixed enumeration, so results do not depend on worker count or
completion order.
"""
from __future__ import annotations

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .graph import BipartiteGraph
from .sampler import SamplerConfig, fmt, run_chain
from .statistics import Model, Term

SWEEP_COLUMNS = ("term", "shape", "theta", "samples", "edges_mean", "edges_sd",
                 "stat_mean", "stat_sd", "four_cycles_mean", "four_cycles_sd")


def theta_grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive grid ``start, start + step, ..., stop``."""
    if step <= 0:
        raise ValueError("theta step must be positive")
    if start > stop:
        raise ValueError("theta range must have from <= to")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(n)]


@dataclass(frozen=True)
class SweepSpec:
    base: Model
    swept: tuple[Term, ...]
    ranges: tuple[tuple[float, float, float], ...]
    n_a: int
    n_b: int
    sampler: SamplerConfig
    replicates: int = 1

    def __post_init__(self):
        if len(self.ranges) != len(self.swept):
            raise ValueError("need one theta range per swept term")
        for r in self.ranges:
            theta_grid(*r)
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")

    def jobs(self) -> list[tuple[int, int, float, int]]:
        """``(term index, grid index, theta, replicate)`` in canonical order."""
        out = []
        for ti, rng in enumerate(self.ranges):
            for gi, theta in enumerate(theta_grid(*rng)):
                for rep in range(self.replicates):
                    out.append((ti, gi, theta, rep))
        return out


def _swept_model(base: Model, term: Term, theta: float) -> tuple[Model, int]:
    terms = list(base.terms)
    thetas = list(base.theta)
    if term in terms:
        idx = terms.index(term)
        thetas[idx] = theta
    else:
        terms.append(term)
        thetas.append(theta)
        idx = len(terms) - 1
    return Model(tuple(terms), np.array(thetas)), idx


def _sweep_job(args):
    spec, job_id, ti, theta = args
    m, idx = _swept_model(spec.base, spec.swept[ti], theta)
    tr = run_chain(BipartiteGraph(spec.n_a, spec.n_b), m, spec.sampler, chain_index=job_id,
                   keep_final=False)
    return tr.stats[:, idx], tr.aux[:, 0], tr.aux[:, 1]


def _map(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=1))


@dataclass
class SweepRow:
    term: Term
    theta: float
    samples: int
    edges: tuple[float, float]
    stat: tuple[float, float]
    four_cycles: tuple[float, float]


def _mean_sd(x: np.ndarray) -> tuple[float, float]:
    return float(x.mean()), float(x.std(ddof=1)) if x.size > 1 else 0.0


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRow]:
    jobs = spec.jobs()
    results = _map(_sweep_job, [(spec, jid, ti, th) for jid, (ti, _, th, _) in enumerate(jobs)], workers)
    grouped: dict[tuple[int, int], list] = {}
    thetas: dict[tuple[int, int], float] = {}
    for (ti, gi, theta, _), res in zip(jobs, results):
        grouped.setdefault((ti, gi), []).append(res)
        thetas[(ti, gi)] = theta
    rows = []
    for key in sorted(grouped):
        parts = grouped[key]
        stat = np.concatenate([p[0] for p in parts])
        edges = np.concatenate([p[1] for p in parts])
        c4 = np.concatenate([p[2] for p in parts])
        rows.append(SweepRow(spec.swept[key[0]], thetas[key], stat.size,
                             _mean_sd(edges), _mean_sd(stat), _mean_sd(c4)))
    return rows


def sweep_csv(rows: list[SweepRow], comments: list[str] = ()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    buf.write(",".join(SWEEP_COLUMNS) + "\n")
    for r in rows:
        cells = [str(r.term), fmt(r.term.shape if r.term.shape is not None else float("nan")),
                 fmt(r.theta), str(r.samples), *map(fmt, r.edges), *map(fmt, r.stat),
                 *map(fmt, r.four_cycles)]
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def max_jump_fraction(values) -> float:
    """Largest change between adjacent grid points as a fraction of the range."""
    v = np.asarray(values, dtype=float)
    span = v.max() - v.min()
    if v.size < 2 or span == 0:
        return 0.0
    return float(np.max(np.abs(np.diff(v))) / span)


# -- sign grid for the two node-power terms ----------------------------------

INTERPRET_STATS = ("edges", "stat_a", "stat_b", "four_cycles", "unique_a_c4", "unique_b_c4")


@dataclass(frozen=True)
class InterpretSpec:
    base: Model
    term_a: Term
    term_b: Term
    levels: tuple[tuple[str, float], ...]
    n_a: int
    n_b: int
    sampler: SamplerConfig
    replicates: int = 1

    def cells(self) -> list[tuple[str, float, str, float]]:
        return [(la, va, lb, vb) for la, va in self.levels for lb, vb in self.levels]


def _interpret_job(args):
    spec, job_id, va, vb = args
    m = Model(spec.base.terms + (spec.term_a, spec.term_b), np.concatenate([spec.base.theta, [va, vb]]))
    p = len(spec.base)
    tr = run_chain(BipartiteGraph(spec.n_a, spec.n_b), m, spec.sampler, chain_index=job_id,
                   keep_final=False)
    return np.column_stack([tr.aux[:, 0], tr.stats[:, p], tr.stats[:, p + 1],
                            tr.aux[:, 1], tr.aux[:, 2], tr.aux[:, 3]])


@dataclass
class InterpretCell:
    label: str
    theta_a: float
    theta_b: float
    values: np.ndarray  # samples x INTERPRET_STATS

    def mean(self, name: str) -> float:
        return float(self.values[:, INTERPRET_STATS.index(name)].mean())


def run_interpret(spec: InterpretSpec, workers: int = 1) -> list[InterpretCell]:
    jobs = [(ci, rep) for ci in range(len(spec.cells())) for rep in range(spec.replicates)]
    cells = spec.cells()
    results = _map(_interpret_job,
                   [(spec, jid, cells[ci][1], cells[ci][3]) for jid, (ci, _) in enumerate(jobs)], workers)
    out = []
    for ci, (la, va, lb, vb) in enumerate(cells):
        vals = np.vstack([r for (c, _), r in zip(jobs, results) if c == ci])
        out.append(InterpretCell(f"{la}.{lb}", va, vb, vals))
    return out


def interpret_csv(cells: list[InterpretCell], comments: list[str] = ()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    cols = ["cell", "theta_a", "theta_b", "samples"]
    for s in INTERPRET_STATS:
        cols += [f"{s}_mean", f"{s}_sd"]
    buf.write(",".join(cols) + "\n")
    for c in cells:
        cells_out = [c.label, fmt(c.theta_a), fmt(c.theta_b), str(c.values.shape[0])]
        for j in range(len(INTERPRET_STATS)):
            cells_out += list(map(fmt, _mean_sd(c.values[:, j])))
        buf.write(",".join(cells_out) + "\n")
    return buf.getvalue()
