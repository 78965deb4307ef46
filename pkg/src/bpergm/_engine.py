"""Compiled MCMC state and kernels.

The state is a tuple of dense numpy arrays so the hot loop runs under numba.
Two-path tables are dense here (a 750 x 250 graph needs ~3 MB); the sparse
:class:`~bpergm.graph.BipartiteGraph` remains the reference representation and
the two are cross-checked in the test suite.

Per-node four-cycle counts are cached and updated on every toggle.
"""
from __future__ import annotations

from collections import namedtuple

import numpy as np
from numba import njit

from .graph import BipartiteGraph, from_edges

# term codes mirror statistics.TermKind values
EDGES, TWOPATHS_A, TWOPATHS_B, B1STAR2, B2STAR2 = 0, 1, 2, 3, 4
ALTSTARS_A, ALTSTARS_B, GWDEG_A, GWDEG_B = 5, 6, 7, 8
ALTKC_A, ALTKC_B, ALTK4C_A, ALTK4C_B = 9, 10, 11, 12
FOURCYCLES, NP4C_A, NP4C_B, NP4C_SUM = 13, 14, 15, 16

BASIC, TNT = 0, 1

# auxiliary observables recorded with every sample
AUX_NAMES = ("edges", "four_cycles", "unique_a_c4", "unique_b_c4")

State = namedtuple(
    "State",
    "adj nbr_a pos_a deg_a nbr_b pos_b deg_b l2a l2b c4a c4b edges epos meta",
)


def new_state(n_a: int, n_b: int) -> State:
    d = n_a * n_b
    return State(
        adj=np.zeros((n_a, n_b), np.uint8),
        nbr_a=np.zeros((n_a, max(n_b, 1)), np.int32),
        pos_a=np.full((n_a, n_b), -1, np.int32),
        deg_a=np.zeros(n_a, np.int64),
        nbr_b=np.zeros((n_b, max(n_a, 1)), np.int32),
        pos_b=np.full((n_b, n_a), -1, np.int32),
        deg_b=np.zeros(n_b, np.int64),
        l2a=np.zeros((n_b, n_b), np.int32),
        l2b=np.zeros((n_a, n_a), np.int32),
        c4a=np.zeros(n_a, np.int64),
        c4b=np.zeros(n_b, np.int64),
        edges=np.zeros((max(d, 1), 2), np.int32),
        epos=np.full((n_a, n_b), -1, np.int64),
        meta=np.zeros(1, np.int64),
    )


def state_from_graph(g: BipartiteGraph) -> State:
    st = new_state(g.n_a, g.n_b)
    for a, b in g.edges():
        add_edge(st, a, b)
    return st


def graph_from_state(st: State) -> BipartiteGraph:
    n_a, n_b = st.adj.shape
    aa, bb = np.nonzero(st.adj)
    return from_edges(n_a, n_b, zip(aa.tolist(), bb.tolist()))


def graph_from_adjacency(adj: np.ndarray) -> BipartiteGraph:
    aa, bb = np.nonzero(adj)
    return from_edges(adj.shape[0], adj.shape[1], zip(aa.tolist(), bb.tolist()))


@njit(cache=True)
def add_edge(st, a, b):
    dc4 = 0
    for i in range(st.deg_a[a]):
        l = st.nbr_a[a, i]
        m = st.l2a[b, l]
        dc4 += m
        st.c4b[l] += m
    for i in range(st.deg_b[b]):
        k = st.nbr_b[b, i]
        st.c4a[k] += st.l2b[a, k]
    st.c4a[a] += dc4
    st.c4b[b] += dc4
    for i in range(st.deg_a[a]):
        l = st.nbr_a[a, i]
        st.l2a[b, l] += 1
        st.l2a[l, b] += 1
    for i in range(st.deg_b[b]):
        k = st.nbr_b[b, i]
        st.l2b[a, k] += 1
        st.l2b[k, a] += 1
    st.nbr_a[a, st.deg_a[a]] = b
    st.pos_a[a, b] = st.deg_a[a]
    st.deg_a[a] += 1
    st.nbr_b[b, st.deg_b[b]] = a
    st.pos_b[b, a] = st.deg_b[b]
    st.deg_b[b] += 1
    st.adj[a, b] = 1
    e = st.meta[0]
    st.edges[e, 0] = a
    st.edges[e, 1] = b
    st.epos[a, b] = e
    st.meta[0] = e + 1


@njit(cache=True)
def remove_edge(st, a, b):
    # neighbour lists: swap with last
    p = st.pos_a[a, b]
    last = st.nbr_a[a, st.deg_a[a] - 1]
    st.nbr_a[a, p] = last
    st.pos_a[a, last] = p
    st.pos_a[a, b] = -1
    st.deg_a[a] -= 1
    p = st.pos_b[b, a]
    last = st.nbr_b[b, st.deg_b[b] - 1]
    st.nbr_b[b, p] = last
    st.pos_b[b, last] = p
    st.pos_b[b, a] = -1
    st.deg_b[b] -= 1
    st.adj[a, b] = 0
    e = st.epos[a, b]
    n = st.meta[0] - 1
    la, lb = st.edges[n, 0], st.edges[n, 1]
    st.edges[e, 0] = la
    st.edges[e, 1] = lb
    st.epos[la, lb] = e
    st.epos[a, b] = -1
    st.meta[0] = n
    for i in range(st.deg_a[a]):
        l = st.nbr_a[a, i]
        st.l2a[b, l] -= 1
        st.l2a[l, b] -= 1
    for i in range(st.deg_b[b]):
        k = st.nbr_b[b, i]
        st.l2b[a, k] -= 1
        st.l2b[k, a] -= 1
    dc4 = 0
    for i in range(st.deg_a[a]):
        l = st.nbr_a[a, i]
        m = st.l2a[b, l]
        dc4 += m
        st.c4b[l] -= m
    for i in range(st.deg_b[b]):
        k = st.nbr_b[b, i]
        st.c4a[k] -= st.l2b[a, k]
    st.c4a[a] -= dc4
    st.c4b[b] -= dc4


@njit(cache=True)
def _pw(x, alpha):
    if x > 0:
        return np.exp(alpha * np.log(x))
    return 0.0


@njit(cache=True)
def change_stats(st, kinds, shapes, reuse, a, b, out):
    """Add-direction change vector for dyad (a, b).

    If the edge is present, the values are those for adding it to the graph
    with the edge removed, read off the current tables without mutation.
    """
    off = np.int64(st.adj[a, b])
    da = st.deg_a[a] - off
    db = st.deg_b[b] - off
    have_c4 = False
    dc4 = 0
    for t in range(kinds.shape[0]):
        k = kinds[t]
        s = shapes[t]
        if k == EDGES:
            out[t] = 1.0
        elif k == TWOPATHS_A or k == B1STAR2:
            out[t] = da
        elif k == TWOPATHS_B or k == B2STAR2:
            out[t] = db
        elif k == ALTSTARS_A:
            out[t] = s * (1.0 - (1.0 - 1.0 / s) ** da)
        elif k == ALTSTARS_B:
            out[t] = s * (1.0 - (1.0 - 1.0 / s) ** db)
        elif k == GWDEG_A:
            out[t] = (1.0 - np.exp(-s)) ** da
        elif k == GWDEG_B:
            out[t] = (1.0 - np.exp(-s)) ** db
        elif k == ALTKC_A or k == ALTK4C_A:
            r = reuse[t]
            if r >= 0:
                v = out[r]
            else:
                base = 1.0 - 1.0 / s
                v = 0.0
                for i in range(st.deg_a[a]):
                    l = st.nbr_a[a, i]
                    if l != b:
                        v += base ** (st.l2a[b, l] - off)
            if k == ALTKC_A:
                out[t] = v
            else:
                out[t] = 0.0 - (v - da)
        elif k == ALTKC_B or k == ALTK4C_B:
            r = reuse[t]
            if r >= 0:
                v = out[r]
            else:
                base = 1.0 - 1.0 / s
                v = 0.0
                for i in range(st.deg_b[b]):
                    kk = st.nbr_b[b, i]
                    if kk != a:
                        v += base ** (st.l2b[a, kk] - off)
            if k == ALTKC_B:
                out[t] = v
            else:
                out[t] = 0.0 - (v - db)
        else:
            if not have_c4:
                dc4 = 0
                for i in range(st.deg_a[a]):
                    l = st.nbr_a[a, i]
                    if l != b:
                        dc4 += st.l2a[b, l] - off
                have_c4 = True
            if k == FOURCYCLES:
                out[t] = dc4
            else:
                v = 0.0
                if k == NP4C_A or k == NP4C_SUM:
                    c = st.c4a[a] - off * dc4
                    v += _pw(c + dc4, s) - _pw(c, s)
                    for i in range(st.deg_b[b]):
                        kk = st.nbr_b[b, i]
                        if kk != a:
                            m = st.l2b[a, kk] - off
                            if m > 0:
                                c = st.c4a[kk] - off * m
                                v += _pw(c + m, s) - _pw(c, s)
                if k == NP4C_B or k == NP4C_SUM:
                    c = st.c4b[b] - off * dc4
                    v += _pw(c + dc4, s) - _pw(c, s)
                    for i in range(st.deg_a[a]):
                        l = st.nbr_a[a, i]
                        if l != b:
                            m = st.l2a[b, l] - off
                            if m > 0:
                                c = st.c4b[l] - off * m
                                v += _pw(c + m, s) - _pw(c, s)
                out[t] = v


@njit(cache=True)
def full_stats(st, kinds, shapes, out):
    n_a, n_b = st.adj.shape
    for t in range(kinds.shape[0]):
        k = kinds[t]
        s = shapes[t]
        v = 0.0
        if k == EDGES:
            v = st.meta[0]
        elif k == TWOPATHS_A or k == B1STAR2:
            for i in range(n_a):
                d = st.deg_a[i]
                v += d * (d - 1) // 2
        elif k == TWOPATHS_B or k == B2STAR2:
            for j in range(n_b):
                d = st.deg_b[j]
                v += d * (d - 1) // 2
        elif k == ALTSTARS_A or k == ALTSTARS_B:
            r = 1.0 - 1.0 / s
            if k == ALTSTARS_A:
                for i in range(n_a):
                    v += r ** st.deg_a[i] - 1.0 + st.deg_a[i] / s
            else:
                for j in range(n_b):
                    v += r ** st.deg_b[j] - 1.0 + st.deg_b[j] / s
            v *= s * s
        elif k == GWDEG_A or k == GWDEG_B:
            r = 1.0 - np.exp(-s)
            if k == GWDEG_A:
                for i in range(n_a):
                    v += 1.0 - r ** st.deg_a[i]
            else:
                for j in range(n_b):
                    v += 1.0 - r ** st.deg_b[j]
            v *= np.exp(s)
        elif k == ALTKC_A or k == ALTK4C_A or k == ALTKC_B or k == ALTK4C_B:
            r = 1.0 - 1.0 / s
            four = k == ALTK4C_A or k == ALTK4C_B
            v = 0.0
            # a single two-path adds exactly zero to the AltK4 form
            lo = 2 if four else 1
            if k == ALTKC_A or k == ALTK4C_A:
                for j in range(n_b):
                    for l in range(j + 1, n_b):
                        m = st.l2a[j, l]
                        if m >= lo:
                            v += m - s * (1.0 - r ** m) if four else s * (1.0 - r ** m)
            else:
                for i in range(n_a):
                    for l in range(i + 1, n_a):
                        m = st.l2b[i, l]
                        if m >= lo:
                            v += m - s * (1.0 - r ** m) if four else s * (1.0 - r ** m)
        elif k == FOURCYCLES:
            tot = 0
            for i in range(n_a):
                tot += st.c4a[i]
            v = tot // 2
        else:
            if k == NP4C_A or k == NP4C_SUM:
                for i in range(n_a):
                    v += _pw(st.c4a[i], s)
            if k == NP4C_B or k == NP4C_SUM:
                for j in range(n_b):
                    v += _pw(st.c4b[j], s)
        out[t] = v


@njit(cache=True)
def mh_step(st, kinds, shapes, reuse, theta, kernel, rng, stats, delta):
    """One Metropolis-Hastings proposal; returns True if accepted."""
    n_a, n_b = st.adj.shape
    dyads = n_a * n_b
    n_edges = st.meta[0]
    if kernel == TNT:
        coin = rng.random()
        if coin < 0.5 and n_edges > 0:
            e = rng.integers(0, n_edges)
            a = st.edges[e, 0]
            b = st.edges[e, 1]
        else:
            d = rng.integers(0, dyads)
            a = d // n_b
            b = d % n_b
    else:
        d = rng.integers(0, dyads)
        a = d // n_b
        b = d % n_b
    present = st.adj[a, b] == 1
    change_stats(st, kinds, shapes, reuse, a, b, delta)
    dot = 0.0
    for t in range(kinds.shape[0]):
        dot += theta[t] * delta[t]
    log_ratio = -dot if present else dot
    if kernel == TNT:
        log_ratio += _tnt_log_q(n_edges, dyads, present)
    if log_ratio < 0.0 and rng.random() >= np.exp(log_ratio):
        return False
    if present:
        remove_edge(st, a, b)
        for t in range(kinds.shape[0]):
            stats[t] -= delta[t]
    else:
        add_edge(st, a, b)
        for t in range(kinds.shape[0]):
            stats[t] += delta[t]
    return True


@njit(cache=True)
def _tnt_log_q(n_edges, dyads, present):
    # q(edge) = 1/2 (1/E + 1/D) for deletion of a specific edge; addition of a
    # specific dyad is 1/(2D), or 1/D on the empty graph where the edge
    # branch falls through to the dyad branch
    if present:
        fwd = 0.5 / n_edges + 0.5 / dyads
        after = n_edges - 1
        rev = 1.0 / dyads if after == 0 else 0.5 / dyads
    else:
        fwd = 1.0 / dyads if n_edges == 0 else 0.5 / dyads
        after = n_edges + 1
        rev = 0.5 / after + 0.5 / dyads
    return np.log(rev / fwd)


@njit(cache=True)
def run_steps(st, kinds, shapes, reuse, theta, kernel, n_steps, rng, stats):
    delta = np.zeros(kinds.shape[0])
    accepted = 0
    for _ in range(n_steps):
        if mh_step(st, kinds, shapes, reuse, theta, kernel, rng, stats, delta):
            accepted += 1
    return accepted


@njit(cache=True)
def record_aux(st, out):
    n_a, n_b = st.adj.shape
    out[0] = st.meta[0]
    tot = 0
    ua = 0
    for i in range(n_a):
        tot += st.c4a[i]
        if st.c4a[i] > 0:
            ua += 1
    ub = 0
    for j in range(n_b):
        if st.c4b[j] > 0:
            ub += 1
    out[1] = tot // 2
    out[2] = ua
    out[3] = ub


@njit(cache=True)
def sample(st, kinds, shapes, reuse, theta, kernel, burn_in, interval, n_samples, rng,
           stats, trace, aux, graphs, keep_graphs):
    accepted = run_steps(st, kinds, shapes, reuse, theta, kernel, burn_in, rng, stats)
    for s in range(n_samples):
        accepted += run_steps(st, kinds, shapes, reuse, theta, kernel, interval, rng, stats)
        for t in range(kinds.shape[0]):
            trace[s, t] = stats[t]
        record_aux(st, aux[s])
        if keep_graphs:
            graphs[s, :, :] = st.adj
    return accepted
