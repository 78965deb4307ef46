"""Named experiment configurations.

Each preset is a config text for one subcommand. Desk-scale presets finish in
minutes on one core; the ``-full`` variants use the original sizes and run
lengths and take hours to days.
"""
from __future__ import annotations

from .config import Config

FIG4 = """\
n_a = 30
n_b = 20
terms = Edges=-3.0
sweep = AltK4CyclesB[2], AltK4CyclesB[5], FourCyclesNodePowerB[0.5], FourCyclesNodePowerB[0.2]
theta_from = -1.0
theta_to = 10.0
theta_step = 0.5
kernel = basic
burn_in = 100000
interval = 10000
samples = 100
replicates = 1
seed = 1
"""

FIG7 = """\
n_a = 150
n_b = 50
terms = Edges=-8.5, AltStarsA[2]=-0.2, AltStarsB[2]=2.0
sweep = AltKCyclesA[2], AltKCyclesA[5], AltKCyclesA[10], FourCyclesNodePowerA[0.1], FourCyclesNodePowerA[0.2], FourCyclesNodePowerA[0.5]
theta_from = -1.0
theta_to = 1.0
theta_step = 0.1
theta_range.FourCyclesNodePowerA = -1.0, 2.0, 0.1
kernel = tnt
burn_in = 1000000
interval = 10000
samples = 100
replicates = 1
seed = 1
"""

INTERPRET = """\
n_a = 100
n_b = 50
terms = Edges=-6.0, AltStarsA[2]=-0.4, AltStarsB[2]=1.0
term_a = FourCyclesNodePowerA[0.2]
term_b = FourCyclesNodePowerB[0.2]
levels = neg:-1.5, zero:0, pos:6.5
kernel = tnt
burn_in = 1000000
interval = 10000
samples = 20
replicates = 1
seed = 1
"""

_ESTIMATE = """\
graph = southern-women
terms = {terms}
algorithm = sa
kernel = tnt
burn_in = 10000
interval = 1000
samples = 1000
seed = 1
"""

_GOF = """\
graph = southern-women
terms = {terms}
kernel = tnt
burn_in = 100000
interval = 10000
samples = 100
max_len = 10
seed = 1
"""

_SW = {
    "model1": ("Edges, B1Star2, B2Star2", "Edges=-2.07, B1Star2=0.07, B2Star2=0.18"),
    "model2": ("Edges, GwDegreeA[1], GwDegreeB[1]", "Edges=-0.20, GwDegreeA[1]=-0.83, GwDegreeB[1]=-2.26"),
    "model4": ("Edges, GwDegreeA[1], GwDegreeB[1], FourCyclesNodePowerB[0.2]",
               "Edges=-5.90, GwDegreeA[1]=10.60, GwDegreeB[1]=-6.95, FourCyclesNodePowerB[0.2]=17.30"),
}


def _full(text: str, **changes) -> str:
    cfg = Config.parse(text)
    for k, v in changes.items():
        cfg.set(k, v)
    return cfg.to_text()


PRESETS: dict[tuple[str, str], str] = {
    ("sweep", "fig4"): FIG4,
    ("sweep", "fig4-full"): _full(FIG4, theta_step=0.01),
    ("sweep", "fig7"): FIG7,
    ("sweep", "fig7-full"): _full(FIG7, n_a=750, n_b=250, burn_in=10_000_000, interval=100_000,
                                  theta_step=0.01, **{"theta_range.FourCyclesNodePowerA": "-1.0, 2.0, 0.01"}),
    ("interpret", "interpret"): INTERPRET,
    ("interpret", "interpret-full"): _full(INTERPRET, burn_in=10_000_000, interval=100_000, samples=100),
}
for _name, (_free, _fixed) in _SW.items():
    PRESETS[("estimate", f"southern-women-{_name}")] = _ESTIMATE.format(terms=_free)
    PRESETS[("gof", f"southern-women-{_name}")] = _GOF.format(terms=_fixed)


def preset_names(command: str) -> list[str]:
    return sorted(name for cmd, name in PRESETS if cmd == command)


def get_preset(command: str, name: str) -> Config:
    try:
        text = PRESETS[(command, name)]
    except KeyError:
        known = ", ".join(preset_names(command)) or "none"
        raise KeyError(f"no preset {name!r} for '{command}' (available: {known})") from None
    return Config.parse(text, f"<preset {name}>")
