import itertools
import math

import numpy as np
import pytest
from scipy.stats import chisquare

from bpergm import _engine as eng
from bpergm.generators import southern_women
from bpergm.graph import BipartiteGraph, from_edges, new_graph
from bpergm.sampler import (Chain, Kernel, SamplerConfig, chain_rng, mh_step, model_arrays, run_chain,
                            tnt_log_q, trace_to_string)
from bpergm.statistics import Model, TermKind, model_change, model_stats

from oracles import random_graph

EVERY_KIND = Model.parse([
    "Edges", "TwoPathsA", "TwoPathsB", "AltStarsA[2]", "AltStarsB[3]", "GwDegreeA[1]", "GwDegreeB[0.5]",
    "AltKCyclesA[2]", "AltK4CyclesA[2]", "AltKCyclesB[5]", "AltK4CyclesB[3]", "FourCycles",
    "FourCyclesNodePowerA[0.5]", "FourCyclesNodePowerB[0.2]", "FourCyclesNodePowerSum[0.7]",
])


def test_engine_matches_reference_statistics():
    kinds, shapes, reuse = model_arrays(EVERY_KIND)
    assert reuse[list(EVERY_KIND.terms).index(EVERY_KIND.terms[8])] == 7
    rng = np.random.default_rng(9)
    for _ in range(60):
        g = random_graph(rng, int(rng.integers(1, 13)), int(rng.integers(1, 13)), rng.uniform(0.1, 0.7))
        st = eng.state_from_graph(g)
        full = np.zeros(len(kinds))
        eng.full_stats(st, kinds, shapes, full)
        np.testing.assert_allclose(full, model_stats(g, EVERY_KIND), rtol=1e-12, atol=1e-12)
        a, b = int(rng.integers(g.n_a)), int(rng.integers(g.n_b))
        out = np.zeros(len(kinds))
        eng.change_stats(st, kinds, shapes, reuse, a, b, out)
        if g.has_edge(a, b):
            h = g.copy()
            h.remove_edge(a, b)
            expected = model_change(h, EVERY_KIND, a, b)
        else:
            expected = model_change(g, EVERY_KIND, a, b)
        np.testing.assert_allclose(out, expected, rtol=1e-12, atol=1e-12)
        assert eng.graph_from_state(st) == g


def test_basic_kernel_engine_equals_reference():
    m = Model.parse(["Edges=-1", "FourCycles=0.2", "AltStarsB[2]=0.3"])
    g = random_graph(np.random.default_rng(1), 6, 5, 0.3)
    ref = g.copy()
    rng_ref = chain_rng(42, 0)
    for _ in range(3000):
        mh_step(ref, m, Kernel.BASIC, rng_ref)
    chain = Chain(g, m, Kernel.BASIC, chain_rng(42, 0))
    chain.run(3000)
    assert chain.graph() == ref


def test_zero_theta_accepts_everything():
    m = Model.parse(["Edges=0", "FourCycles=0"])
    chain = Chain(new_graph(10, 10), m, Kernel.BASIC, chain_rng(3))
    trace, aux, _ = chain.sample(10_000, 100, 200)
    assert chain.accepted == chain.proposals
    density = aux[:, 0].mean() / 100
    assert abs(density - 0.5) < 3 * aux[:, 0].std(ddof=1) / 100 / math.sqrt(200) + 0.01


def test_tnt_log_q():
    # deletion of one of E edges from D dyads, reverse is an addition on E - 1 edges
    e, d = 5, 20
    fwd = 0.5 / e + 0.5 / d
    assert tnt_log_q(e, d, True) == pytest.approx(math.log((0.5 / d) / fwd))
    # addition onto the empty graph: proposal came from the uniform branch with certainty
    assert tnt_log_q(0, d, False) == pytest.approx(math.log((0.5 / 1 + 0.5 / d) / (1 / d)))
    assert tnt_log_q(3, d, False) == pytest.approx(math.log((0.5 / 4 + 0.5 / d) / (0.5 / d)))


@pytest.mark.parametrize("kernel", ["basic", "tnt"])
def test_exact_distribution_2x2(kernel):
    m = Model.parse(["Edges=0.5", "FourCycles=0.3"])
    weights = []
    for bits in itertools.product((0, 1), repeat=4):
        g = from_edges(2, 2, [divmod(i, 2) for i in range(4) if bits[i]])
        weights.append(math.exp(float(m.theta @ model_stats(g, m))))
    p = np.array(weights) / sum(weights)
    chain = Chain(new_graph(2, 2), m, kernel, chain_rng(2024))
    _, _, graphs = chain.sample(100, 10, 50_000, keep_graphs=True)
    idx = graphs.reshape(len(graphs), 4) @ np.array([8, 4, 2, 1])
    counts = np.bincount(idx, minlength=16)
    assert chisquare(counts, p * len(idx)).pvalue > 0.001


def test_edges_only_density_and_kernel_agreement():
    m = Model.parse(["Edges=-3.0"])
    means = {}
    for kernel in ("basic", "tnt"):
        tr = run_chain(new_graph(30, 20), m, SamplerConfig(kernel, 20_000, 2_000, 100, seed=5))
        means[kernel] = (tr.edges.mean(), tr.edges.std(ddof=1) / math.sqrt(len(tr)))
    expected = 600 / (1 + math.exp(3))
    for mean, se in means.values():
        assert abs(mean - expected) < 4 * se
    (m1, s1), (m2, s2) = means.values()
    assert abs(m1 - m2) < 3 * math.hypot(s1, s2)


def test_determinism_and_single_sample():
    m = Model.parse(["Edges=-2", "FourCyclesNodePowerA[0.5]=0.4"])
    cfg = SamplerConfig("tnt", 1000, 100, 20, seed=77)
    t1 = run_chain(new_graph(12, 9), m, cfg)
    t2 = run_chain(new_graph(12, 9), m, cfg)
    assert trace_to_string(t1) == trace_to_string(t2)
    assert t1.final_graph == t2.final_graph
    t3 = run_chain(new_graph(12, 9), m, SamplerConfig("tnt", 1000, 100, 20, seed=78))
    assert not np.array_equal(t1.stats, t3.stats)
    one = run_chain(new_graph(12, 9), m, SamplerConfig("tnt", 10, 10, 1))
    assert one.stats.shape == (1, 2)
    assert 0 <= one.acceptance_rate <= 1


def test_running_statistics_do_not_drift():
    m = Model.parse(["Edges=-1.5", "AltKCyclesA[2]=0.1", "AltK4CyclesA[2]=0.1", "GwDegreeB[1]=-0.2",
                     "FourCyclesNodePowerSum[0.5]=0.3"])
    chain = Chain(southern_women(), m, Kernel.TNT, chain_rng(6))
    chain.run(200_000)
    np.testing.assert_allclose(chain.stats, model_stats(chain.graph(), m), rtol=1e-6)
    np.testing.assert_allclose(chain.stats, chain.recompute(), rtol=1e-9)


def test_trace_csv_layout():
    m = Model.parse(["Edges=-1", "FourCycles=0.1"])
    text = trace_to_string(run_chain(new_graph(4, 4), m, SamplerConfig("basic", 10, 5, 3, seed=1)), ["hello"])
    lines = text.splitlines()
    assert lines[0] == "# hello"
    header = next(ln for ln in lines if not ln.startswith("#"))
    assert header == "sample,edges,Edges,FourCycles"
    assert "# seed = 1" in lines


@pytest.mark.parametrize("kwargs", [dict(burn_in=-1), dict(interval=0), dict(samples=0), dict(seed=-1),
                                    dict(kernel="gibbs")])
def test_sampler_config_validation(kwargs):
    with pytest.raises(ValueError):
        SamplerConfig(**kwargs)


def test_tnt_on_empty_graph_falls_through():
    m = Model.parse(["Edges=-10"])
    g = BipartiteGraph(3, 3)
    rng = chain_rng(0)
    for _ in range(50):
        mh_step(g, m, "tnt", rng)
    assert g.edge_count <= 1


def test_model_arrays_codes():
    kinds, _, _ = model_arrays(EVERY_KIND)
    assert [TermKind(k) for k in kinds] == [t.kind for t in EVERY_KIND.terms]
