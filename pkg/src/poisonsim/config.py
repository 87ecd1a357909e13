"""Flat ``key = value`` run configuration.

One setting per line, ``#`` starts a comment, blank lines are ignored. Every
key is optional; absent keys take the default scenario values, so an empty
file describes the reference setup. Positions are written ``x, y`` and mode
lists as comma-separated names. See README.md for the full key list.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .agents import AttackMode
from .channel import Position
from .simulation import Collection, Scenario, Split

MODE_ALIASES = {"baseline": "baseline", "none": "baseline", "poison": "poison", "jam": "jam"}
MODE_ORDER = ("baseline", "poison", "jam")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        self.line = line
        self.key = key
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


def attack_mode_for(run_mode: str) -> AttackMode:
    return AttackMode.NONE if run_mode == "baseline" else AttackMode(run_mode)


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario = field(default_factory=Scenario)
    replications: int = 1
    base_seed: int = 0
    output_dir: str = "out"
    modes: tuple = ("baseline", "poison")

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError("replications must be >= 1", key="replications")
        if not self.modes:
            raise ConfigError("modes must not be empty", key="modes")
        norm = []
        for m in self.modes:
            if m not in MODE_ALIASES:
                raise ConfigError(f"unknown mode {m!r}", key="modes")
            if MODE_ALIASES[m] not in norm:
                norm.append(MODE_ALIASES[m])
        object.__setattr__(self, "modes", tuple(norm))

    def seeds(self) -> list[int]:
        return [self.base_seed + i for i in range(self.replications)]


_SCENARIO_FIELDS = {f.name: f for f in dataclasses.fields(Scenario)}
_RUN_KEYS = ("replications", "base_seed", "output_dir", "modes")


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_value(key: str, text: str):
    if key.startswith("pos_"):
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 2:
            raise ValueError(f"expected 'x, y', got {text!r}")
        return Position(float(parts[0]), float(parts[1]))
    if key == "modes":
        return tuple(p.strip() for p in text.split(",") if p.strip())
    if key in ("replications", "base_seed"):
        return int(text)
    if key == "output_dir":
        return text
    ftype = _SCENARIO_FIELDS[key].type
    if ftype in ("int", int):
        return int(text)
    if ftype in ("float", float):
        return float(text)
    if ftype in ("bool", bool):
        return _parse_bool(text)
    return text


def parse_config(text: str) -> RunConfig:
    scen: dict = {}
    run: dict = {}
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in _SCENARIO_FIELDS and key not in _RUN_KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno, key)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} (first set on line {seen[key]})", lineno, key)
        seen[key] = lineno
        try:
            parsed = _parse_value(key, value)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}", lineno, key) from None
        (run if key in _RUN_KEYS else scen)[key] = parsed

    try:
        scenario = Scenario(**scen)
    except ValueError as exc:
        key = next((k for k in _SCENARIO_FIELDS if str(exc).startswith(k)), None)
        line = seen.get(key) if key else None
        raise ConfigError(f"invalid {key or 'scenario'}: {exc}", line, key) from None
    try:
        return RunConfig(scenario=scenario, **run)
    except ConfigError as exc:
        raise ConfigError(str(exc), seen.get(exc.key), exc.key) from None


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    return parse_config(Path(path).read_text())


def _format_value(v) -> str:
    if isinstance(v, Position):
        return f"{v.x!r}, {v.y!r}"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (Collection, Split)):
        return v.value
    if isinstance(v, tuple):
        return ", ".join(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def config_items(cfg: RunConfig) -> list[tuple[str, str]]:
    items = [(name, _format_value(getattr(cfg.scenario, name))) for name in _SCENARIO_FIELDS]
    items += [(name, _format_value(getattr(cfg, name))) for name in _RUN_KEYS]
    return items


def dump_config(cfg: RunConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in config_items(cfg))


def save_config(cfg: RunConfig, path: str | Path) -> None:
    Path(path).write_text(dump_config(cfg))
