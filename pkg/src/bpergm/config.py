"""Flat ``key = value`` configuration files.

Lines starting with ``#`` are comments. List values are comma-separated; term
lists use the catalogue syntax ``Kind[shape]=theta``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .graph import BipartiteGraph, load_graph
from .sampler import Kernel, SamplerConfig
from .statistics import Model, TermError, parse_term_token

ECHO_PREFIX = "# config: "


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        self.line = line
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


@dataclass
class Config:
    values: dict[str, str] = field(default_factory=dict)
    lines: dict[str, int] = field(default_factory=dict)
    source: str = "<config>"

    @classmethod
    def parse(cls, text: str, source: str = "<config>") -> "Config":
        cfg = cls(source=source)
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or not key:
                raise ConfigError(f"expected 'key = value', got {raw!r}", lineno, source)
            if key in cfg.values:
                raise ConfigError(f"duplicate key {key!r} (first on line {cfg.lines[key]})", lineno, source)
            cfg.values[key] = value.strip()
            cfg.lines[key] = lineno
        return cfg

    @classmethod
    def load(cls, path) -> "Config":
        with open(path) as fh:
            return cls.parse(fh.read(), str(path))

    def error(self, key: str, message: str) -> ConfigError:
        return ConfigError(f"{key}: {message}", self.lines.get(key), self.source)

    def __contains__(self, key: str) -> bool:
        return key in self.values

    def set(self, key: str, value) -> None:
        self.values[key] = str(value)

    def update(self, other: "Config") -> None:
        for k, v in other.values.items():
            self.values[k] = v
            if k in other.lines:
                self.lines[k] = other.lines[k]
        self.source = other.source

    def check_keys(self, allowed: set[str]) -> None:
        for key in self.values:
            base = key.split(".", 1)[0] + "." if "." in key else key
            if key not in allowed and base not in allowed:
                raise self.error(key, "unknown key")

    def get(self, key: str, default: str | None = None) -> str:
        if key in self.values:
            return self.values[key]
        if default is None:
            raise ConfigError(f"missing required key {key!r}", None, self.source)
        return default

    def get_int(self, key: str, default: int | None = None) -> int:
        raw = self.get(key, None if default is None else str(default))
        try:
            return int(float(raw)) if "e" in raw.lower() else int(raw)
        except ValueError:
            raise self.error(key, f"expected an integer, got {raw!r}") from None

    def get_float(self, key: str, default: float | None = None) -> float:
        raw = self.get(key, None if default is None else repr(default))
        try:
            return float(raw)
        except ValueError:
            raise self.error(key, f"expected a number, got {raw!r}") from None

    def get_list(self, key: str, default: str | None = None) -> list[str]:
        return [x.strip() for x in self.get(key, default).split(",") if x.strip()]

    def get_floats(self, key: str, default: str | None = None) -> list[float]:
        try:
            return [float(x) for x in self.get_list(key, default)]
        except ValueError:
            raise self.error(key, "expected comma-separated numbers") from None

    def get_model(self, key: str = "terms") -> Model:
        try:
            return Model.parse(self.get_list(key))
        except TermError as exc:
            raise self.error(key, str(exc)) from None

    def get_terms(self, key: str):
        out = []
        for tok in self.get_list(key):
            try:
                out.append(parse_term_token(tok))
            except TermError as exc:
                raise self.error(key, str(exc)) from None
        return out

    def get_sampler(self, defaults: SamplerConfig = SamplerConfig()) -> SamplerConfig:
        try:
            return SamplerConfig(
                kernel=Kernel.parse(self.get("kernel", defaults.kernel.value)),
                burn_in=self.get_int("burn_in", defaults.burn_in),
                interval=self.get_int("interval", defaults.interval),
                samples=self.get_int("samples", defaults.samples),
                seed=self.get_int("seed", defaults.seed),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc), None, self.source) from None

    def get_graph(self, key: str = "graph") -> BipartiteGraph:
        from .generators import BUILTIN_GRAPHS

        name = self.get(key)
        if name in BUILTIN_GRAPHS:
            return BUILTIN_GRAPHS[name]()
        try:
            return load_graph(name)
        except OSError as exc:
            raise self.error(key, f"cannot read graph: {exc}") from None
        except ValueError as exc:
            raise self.error(key, f"{name}: {exc}") from None

    def echo(self) -> list[str]:
        return [f"{k} = {v}" for k, v in self.values.items()]

    def to_text(self) -> str:
        return "".join(line + "\n" for line in self.echo())


def config_from_manifest(text: str) -> Config:
    """Rebuild the configuration echoed in an output file's comment header."""
    lines = [ln[len(ECHO_PREFIX):] for ln in text.splitlines() if ln.startswith(ECHO_PREFIX)]
    return Config.parse("\n".join(lines), "<manifest>")
