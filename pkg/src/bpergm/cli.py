"""Command-line interface: ``bpergm {stats,simulate,sweep,interpret,estimate,gof}``.

Settings come from a preset, then a ``--config`` file, then flags, each
overriding the last. Every CSV starts with ``#`` comment lines recording the
command, version, time, master seed and the effective configuration, so the
output can be reproduced with ``--config`` pointed at the output itself.
"""
from __future__ import annotations

import argparse
import datetime
import logging
import os
import sys
import warnings

import numpy as np

from . import __version__
from .config import ECHO_PREFIX, Config, ConfigError
from .estimation import EstimationConfig, estimate
from .experiments import (InterpretSpec, SweepSpec, interpret_csv, run_interpret, run_sweep,
                          sweep_csv)
from .gof import DEFAULT_WORK_LIMIT, CensusLimitError, gof_run
from .graph import BipartiteGraph, GraphFormatError
from .presets import get_preset, preset_names
from .sampler import SamplerConfig, fmt, run_chain, trace_to_string
from .statistics import Model, Term, TermError, default_terms, stat_value

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

SAMPLER_KEYS = {"kernel", "burn_in", "interval", "samples", "seed"}
ALLOWED = {
    "stats": {"graph", "seed"},
    "simulate": SAMPLER_KEYS | {"graph", "n_a", "n_b", "terms"},
    "sweep": SAMPLER_KEYS | {"n_a", "n_b", "terms", "sweep", "theta_from", "theta_to", "theta_step",
                             "theta_range.", "replicates"},
    "interpret": SAMPLER_KEYS | {"n_a", "n_b", "terms", "term_a", "term_b", "levels", "replicates"},
    "estimate": SAMPLER_KEYS | {"graph", "terms", "algorithm", "ee_step_scale", "ee_steps", "ee_inner",
                                "sa_phase1", "sa_subphases", "sa_gain", "sa_phase3", "refine_rounds",
                                "tolerance"},
    "gof": SAMPLER_KEYS | {"graph", "terms", "max_len", "work_limit"},
}
# run lengths for commands whose config leaves them out
SAMPLER_DEFAULTS = {
    "simulate": SamplerConfig(),
    "sweep": SamplerConfig(),
    "interpret": SamplerConfig(),
    "estimate": EstimationConfig().sampler,
    "gof": SamplerConfig(),
}


class NumericError(RuntimeError):
    pass


def _dims(cfg: Config) -> tuple[int, int]:
    n_a, n_b = cfg.get_int("n_a"), cfg.get_int("n_b")
    if n_a < 1 or n_b < 1:
        raise cfg.error("n_a", "node set sizes must be positive")
    return n_a, n_b


def _model(cfg: Config, need_theta: bool) -> tuple[Model, bool]:
    """Model from ``terms``; the flag says whether every term carried a coefficient."""
    parsed = cfg.get_terms("terms")
    if not parsed:
        raise cfg.error("terms", "at least one term is required")
    given = [th is not None for _, th in parsed]
    if need_theta and not all(given):
        raise cfg.error("terms", "every term needs a coefficient (Kind[shape]=theta)")
    if any(given) and not all(given):
        raise cfg.error("terms", "give coefficients for all terms or for none")
    try:
        m = Model(tuple(t for t, _ in parsed), np.array([th or 0.0 for _, th in parsed]))
    except TermError as exc:
        raise cfg.error("terms", str(exc)) from None
    return m, all(given)


def _term(cfg: Config, key: str) -> Term:
    try:
        return Term.parse(cfg.get(key))
    except TermError as exc:
        raise cfg.error(key, str(exc)) from None


def _manifest(command: str, cfg: Config | None) -> list[str]:
    lines = [f"bpergm {command}", f"version = {__version__}",
             f"started = {datetime.datetime.now(datetime.timezone.utc).isoformat(timespec='seconds')}"]
    if cfg is not None:
        lines.append(f"master_seed = {cfg.get('seed', '0')}")
        lines += [ECHO_PREFIX[2:] + line for line in cfg.echo()]
    return lines


# -- commands -----------------------------------------------------------------

def cmd_stats(cfg: Config, workers: int) -> str:
    g = cfg.get_graph()
    lines = [f"# {c}" for c in _manifest("stats", cfg)]
    lines.append(f"# n_a = {g.n_a}\n# n_b = {g.n_b}")
    lines.append("term,value")
    for t in default_terms():
        lines.append(f"{t},{fmt(stat_value(g, t))}")
    return "\n".join(lines) + "\n"


def cmd_simulate(cfg: Config, workers: int) -> str:
    m, _ = _model(cfg, need_theta=True)
    sampler = cfg.get_sampler(SAMPLER_DEFAULTS["simulate"])
    if "graph" in cfg:
        g0 = cfg.get_graph()
    else:
        g0 = BipartiteGraph(*_dims(cfg))
    trace = run_chain(g0, m, sampler, keep_final=False)
    return trace_to_string(trace, _manifest("simulate", cfg))


def _ranges(cfg: Config, swept: list[Term]) -> tuple[tuple[float, float, float], ...]:
    out = []
    for t in swept:
        key = next((k for k in (f"theta_range.{t}", f"theta_range.{t.kind.name}") if k in cfg), None)
        if key is not None:
            vals = cfg.get_floats(key)
            if len(vals) != 3:
                raise cfg.error(key, "expected 'from, to, step'")
            out.append(tuple(vals))
        else:
            out.append((cfg.get_float("theta_from"), cfg.get_float("theta_to"), cfg.get_float("theta_step")))
        if out[-1][2] <= 0:
            raise cfg.error(key or "theta_step", "step must be positive")
        if out[-1][0] > out[-1][1]:
            raise cfg.error(key or "theta_from", "need from <= to")
    return tuple(out)


def cmd_sweep(cfg: Config, workers: int) -> str:
    base, _ = _model(cfg, need_theta=True)
    swept = []
    for tok in cfg.get_list("sweep"):
        try:
            swept.append(Term.parse(tok))
        except TermError as exc:
            raise cfg.error("sweep", str(exc)) from None
    if not swept:
        raise cfg.error("sweep", "no terms to sweep")
    n_a, n_b = _dims(cfg)
    spec = SweepSpec(base, tuple(swept), _ranges(cfg, swept), n_a, n_b,
                     cfg.get_sampler(SAMPLER_DEFAULTS["sweep"]), cfg.get_int("replicates", 1))
    rows = run_sweep(spec, workers)
    return sweep_csv(rows, _manifest("sweep", cfg))


def _levels(cfg: Config) -> tuple[tuple[str, float], ...]:
    out = []
    for item in cfg.get_list("levels", "neg:-1.5, zero:0, pos:6.5"):
        label, sep, value = item.partition(":")
        try:
            out.append((label.strip(), float(value)))
        except ValueError:
            raise cfg.error("levels", f"expected label:value, got {item!r}") from None
        if not sep or not label.strip():
            raise cfg.error("levels", f"expected label:value, got {item!r}")
    return tuple(out)


def cmd_interpret(cfg: Config, workers: int) -> str:
    base, _ = _model(cfg, need_theta=True)
    n_a, n_b = _dims(cfg)
    spec = InterpretSpec(base, _term(cfg, "term_a"), _term(cfg, "term_b"), _levels(cfg), n_a, n_b,
                         cfg.get_sampler(SAMPLER_DEFAULTS["interpret"]), cfg.get_int("replicates", 1))
    try:
        Model(base.terms + (spec.term_a, spec.term_b))
    except TermError as exc:
        raise cfg.error("term_a", str(exc)) from None
    cells = run_interpret(spec, workers)
    return interpret_csv(cells, _manifest("interpret", cfg))


def cmd_estimate(cfg: Config, workers: int) -> str:
    g = cfg.get_graph()
    m, has_theta = _model(cfg, need_theta=False)
    d = EstimationConfig()
    sampler = cfg.get_sampler(SAMPLER_DEFAULTS["estimate"])
    try:
        ecfg = EstimationConfig(
            algorithm=cfg.get("algorithm", d.algorithm),
            initial_theta=tuple(m.theta) if has_theta else None,
            ee_step_scale=cfg.get_float("ee_step_scale", d.ee_step_scale),
            ee_steps=cfg.get_int("ee_steps", d.ee_steps),
            ee_inner=cfg.get_int("ee_inner", d.ee_inner),
            sa_phase1=cfg.get_int("sa_phase1", d.sa_phase1),
            sa_subphases=cfg.get_int("sa_subphases", d.sa_subphases),
            sa_gain=cfg.get_float("sa_gain", d.sa_gain),
            sa_phase3=cfg.get_int("sa_phase3") if "sa_phase3" in cfg else None,
            refine_rounds=cfg.get_int("refine_rounds", d.refine_rounds),
            tolerance=cfg.get_float("tolerance", d.tolerance),
            sampler=sampler,
            seed=sampler.seed,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), None, cfg.source) from None
    res = estimate(g, m, ecfg)
    if not np.all(np.isfinite(res.theta_hat)):
        raise NumericError("estimate diverged to a non-finite theta")
    return res.to_csv(_manifest("estimate", cfg))


def cmd_gof(cfg: Config, workers: int) -> str:
    g = cfg.get_graph()
    m, _ = _model(cfg, need_theta=True)
    max_len = cfg.get_int("max_len", 10)
    if max_len not in (4, 6, 8, 10):
        raise cfg.error("max_len", "must be one of 4, 6, 8, 10")
    report = gof_run(g, m, m.theta, cfg.get_sampler(SAMPLER_DEFAULTS["gof"]), max_len,
                     cfg.get_int("work_limit", DEFAULT_WORK_LIMIT))
    return report.to_csv(_manifest("gof", cfg) + [f"n_sim = {report.n_sim}"])


COMMANDS = {
    "stats": (cmd_stats, "statistics of a graph for every catalogue term at default shapes"),
    "simulate": (cmd_simulate, "run one MCMC chain and write its trace"),
    "sweep": (cmd_sweep, "sweep one coefficient at a time and summarise each grid point"),
    "interpret": (cmd_interpret, "3x3 sign grid over two node-power coefficients"),
    "estimate": (cmd_estimate, "fit a model to an observed graph"),
    "gof": (cmd_gof, "goodness of fit of a model with given coefficients"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bpergm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        if name in ("stats", "estimate", "gof"):
            p.add_argument("graph", nargs="?", help="edge-list file or built-in graph name")
        p.add_argument("--config", metavar="PATH", help="key = value configuration file")
        p.add_argument("--preset", metavar="NAME",
                       help="named configuration (" + (", ".join(preset_names(name)) or "none") + ")")
        p.add_argument("--seed", type=int, metavar="U64", help="master seed")
        p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1, metavar="N",
                       help="parallel worker processes (default: available cores)")
        p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return parser


def load_config(args: argparse.Namespace) -> Config:
    cfg = Config()
    if args.preset:
        try:
            cfg = get_preset(args.command, args.preset)
        except KeyError as exc:
            raise ConfigError(exc.args[0], None, "--preset") from None
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc.strerror}", None, args.config) from None
        # output files carry their config as comments; accept them directly
        if ECHO_PREFIX in text:
            echoed = [ln[len(ECHO_PREFIX):] for ln in text.splitlines() if ln.startswith(ECHO_PREFIX)]
            text = "\n".join(echoed)
        cfg.update(Config.parse(text, args.config))
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer", None, "--seed")
        cfg.set("seed", args.seed)
    if getattr(args, "graph", None):
        cfg.set("graph", args.graph)
    cfg.check_keys(ALLOWED[args.command])
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.workers < 1:
        print("bpergm: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    fn = COMMANDS[args.command][0]
    try:
        cfg = load_config(args)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            text = fn(cfg, args.workers)
    except (ConfigError, GraphFormatError, TermError) as exc:
        print(f"bpergm: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, CensusLimitError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"bpergm: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"bpergm: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0
