"""Approximate maximum-likelihood estimation by MCMC.

Two algorithms produce a first estimate:

* ``ee``: Equilibrium Expectation. A single chain starts at the observed
  graph, and after every few proposals each parameter moves against the
  current deviation of its statistic from the observed value.
* ``sa``: Robbins-Monro stochastic approximation in three phases:
  covariance probe, iterated updates with halving gains, then a final long
  run.

Both finish the same way. A long chain at the estimate gives the covariance
of the statistics (the Fisher information of the exponential family), the
standard errors and the convergence t-ratios. If any ``|t|`` is above the
tolerance, a Newton step ``theta -= cov^-1 (mean - observed)`` is taken and
the final run is repeated.
"""
from __future__ import annotations

import io
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .graph import BipartiteGraph
from .sampler import Chain, Kernel, SamplerConfig, chain_rng, fmt
from .statistics import Model, TermKind, model_stats

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EstimationConfig:
    """Settings for :func:`estimate`.

    ``sampler.interval`` is the number of proposals between successive draws
    in every phase and ``sampler.samples`` is the size of the final run.
    """

    algorithm: str = "sa"
    initial_theta: tuple[float, ...] | None = None
    ee_step_scale: float = 0.02
    ee_steps: int = 20_000
    ee_inner: int = 50
    sa_phase1: int = 200
    sa_subphases: int = 4
    sa_gain: float = 0.1
    sa_phase3: int | None = None
    refine_rounds: int = 8
    tolerance: float = 0.1
    sampler: SamplerConfig = field(default_factory=lambda: SamplerConfig(Kernel.TNT, 10_000, 1_000, 1_000))
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ("ee", "sa"):
            raise ValueError(f"unknown algorithm {self.algorithm!r} (use 'ee' or 'sa')")
        if self.ee_step_scale <= 0 or self.sa_gain <= 0:
            raise ValueError("step scales must be positive")
        for name in ("ee_steps", "ee_inner", "sa_phase1", "sa_subphases"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")

    @property
    def phase3_samples(self) -> int:
        return self.sa_phase3 or self.sampler.samples


@dataclass
class EstimateResult:
    names: list[str]
    theta_hat: np.ndarray
    std_errors: np.ndarray
    t_ratios: np.ndarray
    converged: bool
    info_matrix: np.ndarray
    sim_mean: np.ndarray
    sim_sd: np.ndarray
    observed: np.ndarray
    algorithm: str
    seed: int
    pseudo_inverse: bool = False
    refine_rounds: int = 0

    def to_csv(self, comments: list[str] = ()) -> str:
        buf = io.StringIO()
        for c in comments:
            buf.write(f"# {c}\n")
        buf.write(f"# algorithm = {self.algorithm}\n# seed = {self.seed}\n")
        buf.write(f"# converged = {str(self.converged).lower()}\n")
        buf.write(f"# refine_rounds = {self.refine_rounds}\n")
        if self.pseudo_inverse:
            buf.write("# pseudo_inverse = true\n")
        buf.write("term,theta,std_error,t_ratio\n")
        for i, name in enumerate(self.names):
            buf.write(f"{name},{fmt(self.theta_hat[i])},{fmt(self.std_errors[i])},{fmt(self.t_ratios[i])}\n")
        return buf.getvalue()


def initial_theta(obs: BipartiteGraph, m: Model) -> np.ndarray:
    """Edges at the logit of the observed density, everything else zero."""
    theta = np.zeros(len(m))
    dyads = obs.n_dyads
    if dyads:
        p = min(max(obs.edge_count / dyads, 0.5 / dyads), 1 - 0.5 / dyads)
        for i, t in enumerate(m.terms):
            if t.kind is TermKind.Edges:
                theta[i] = math.log(p / (1 - p))
    return theta


def _t_ratios(mean: np.ndarray, sd: np.ndarray, observed: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (mean - observed) / sd
    zero = sd == 0
    if zero.any():
        warnings.warn("zero simulated variance for some statistics; t-ratio set to +inf",
                      RuntimeWarning, stacklevel=3)
        t[zero] = np.inf
    return t


def convergence_check(obs: BipartiteGraph, m: Model, theta, cfg: SamplerConfig) -> np.ndarray:
    """t-ratios ``(mean_sim - observed) / sd_sim`` from a fresh chain started at ``obs``."""
    chain = Chain(obs, m.with_theta(theta), cfg.kernel, chain_rng(cfg.seed, 0))
    trace, _, _ = chain.sample(cfg.burn_in, cfg.interval, cfg.samples)
    return _t_ratios(trace.mean(axis=0), trace.std(axis=0, ddof=1), model_stats(obs, m))


def _inverse(cov: np.ndarray) -> tuple[np.ndarray, bool]:
    try:
        if np.linalg.cond(cov) < 1e12:
            return np.linalg.inv(cov), False
    except np.linalg.LinAlgError:
        pass
    return np.linalg.pinv(cov), True


def _is_pd(cov: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(cov)
        return True
    except np.linalg.LinAlgError:
        return False


def _final_run(chain: Chain, interval: int, samples: int):
    trace, _, _ = chain.sample(0, interval, samples)
    cov = np.atleast_2d(np.cov(trace, rowvar=False))
    if not _is_pd(cov):
        trace, _, _ = chain.sample(0, interval, 4 * samples)
        cov = np.atleast_2d(np.cov(trace, rowvar=False))
    return trace, cov


def _run_ee(chain: Chain, observed: np.ndarray, cfg: EstimationConfig) -> np.ndarray:
    step = cfg.ee_step_scale / (np.abs(observed) + 1.0)
    history = np.zeros((cfg.ee_steps, len(observed)))
    for it in range(cfg.ee_steps):
        chain.run(cfg.ee_inner)
        dz = chain.stats - observed
        update = step * np.maximum(np.abs(chain.theta), 0.01) * dz
        chain.theta -= np.clip(update, -0.1, 0.1)
        history[it] = chain.theta
    # average over the second half of the trajectory
    return history[cfg.ee_steps // 2:].mean(axis=0)


def _run_sa(chain: Chain, observed: np.ndarray, cfg: EstimationConfig) -> np.ndarray:
    p = len(observed)
    interval = cfg.sampler.interval
    trace, _, _ = chain.sample(0, interval, cfg.sa_phase1)
    cov = np.atleast_2d(np.cov(trace, rowvar=False)) + 1e-8 * np.eye(p)
    d_inv, _ = _inverse(cov)
    gain = cfg.sa_gain
    for k in range(cfg.sa_subphases):
        n_min = int(round(2 ** (4 * k / 3) * (7 + p)))
        n_max = n_min + 200
        sign0 = None
        crossed = np.zeros(p, bool)
        thetas = []
        for n in range(n_max):
            chain.run(interval)
            dev = chain.stats - observed
            chain.theta -= gain * (d_inv @ dev)
            thetas.append(chain.theta.copy())
            s = np.sign(dev)
            if sign0 is None:
                sign0 = s
            crossed |= s != sign0
            if n + 1 >= n_min and crossed.all():
                break
        chain.theta[:] = np.mean(thetas, axis=0)
        log.debug("SA subphase %d: %d iterations, theta=%s", k + 1, len(thetas), chain.theta)
        gain /= 2
    return chain.theta.copy()


def estimate(obs: BipartiteGraph, m: Model, cfg: EstimationConfig = EstimationConfig()) -> EstimateResult:
    """Fit ``m`` to ``obs``.

    Non-convergence within the configured budget is reported through
    ``converged = False`` rather than raised.
    """
    observed = model_stats(obs, m)
    theta0 = np.array(cfg.initial_theta, float) if cfg.initial_theta is not None else initial_theta(obs, m)
    if theta0.shape != (len(m),):
        raise ValueError("initial_theta has the wrong length")
    extreme = [str(t) for t, v in zip(m.terms, observed) if v == 0]
    if extreme:
        warnings.warn(f"observed statistic is zero for {extreme}; estimate may diverge",
                      RuntimeWarning, stacklevel=2)
    scfg = cfg.sampler
    chain = Chain(obs, m.with_theta(theta0), scfg.kernel, chain_rng(cfg.seed, 0))
    if cfg.algorithm == "ee":
        theta = _run_ee(chain, observed, cfg)
    else:
        chain.run(scfg.burn_in)
        theta = _run_sa(chain, observed, cfg)

    n3 = cfg.phase3_samples
    rounds = 0
    while True:
        chain.theta[:] = theta
        chain.run(scfg.burn_in)
        trace, cov = _final_run(chain, scfg.interval, n3)
        mean, sd = trace.mean(axis=0), trace.std(axis=0, ddof=1)
        t = _t_ratios(mean, sd, observed)
        inv, pseudo = _inverse(cov)
        ok = bool(np.all(np.isfinite(t)) and np.all(np.abs(t) < cfg.tolerance))
        if ok or rounds >= cfg.refine_rounds or not np.all(np.isfinite(mean)):
            break
        theta = theta - inv @ (mean - observed)
        rounds += 1
        log.debug("refinement %d: t=%s theta=%s", rounds, t, theta)
    se = np.sqrt(np.clip(np.diag(inv), 0.0, None))
    return EstimateResult(
        names=m.names(),
        theta_hat=theta,
        std_errors=se,
        t_ratios=t,
        converged=ok,
        info_matrix=cov,
        sim_mean=mean,
        sim_sd=sd,
        observed=observed,
        algorithm=cfg.algorithm,
        seed=cfg.seed,
        pseudo_inverse=pseudo,
        refine_rounds=rounds,
    )
