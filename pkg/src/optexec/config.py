"""Experiment configuration: strict JSON schema with exhaustive validation.

Unknown fields are errors, not warnings, and every problem found is reported
at once; silently tolerated drift in a config would invalidate the claim that
an output directory is reproducible from its config echo.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .impact import ImpactSpec
from .market import MarketParams

__all__ = ["SCHEMA_VERSION", "ConfigError", "DpSettings", "McSettings", "ExperimentConfig", "load_config"]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Carries every validation problem found in a config file."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid config:\n" + "\n".join(f"  - {p}" for p in self.problems))


@dataclass(frozen=True)
class DpSettings:
    n: int = 500
    k_max: int | None = None
    phi_grid_size: int = 2000
    psi_grid_size: int = 2000

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("dp.n must be positive")
        if self.k_max is not None and not 0 <= self.k_max <= self.n:
            raise ValueError("dp.k_max must lie in [0, dp.n]")
        if self.phi_grid_size < 1 or self.psi_grid_size < 1:
            raise ValueError("dp grid sizes must be positive")

    def to_dict(self) -> dict:
        out = {"n": self.n, "phi_grid_size": self.phi_grid_size, "psi_grid_size": self.psi_grid_size}
        if self.k_max is not None:
            out["k_max"] = self.k_max
        return out


@dataclass(frozen=True)
class McSettings:
    paths: int = 100_000
    seed: int = 0
    dt_fine: float = 5e-4

    def __post_init__(self) -> None:
        if self.paths < 1:
            raise ValueError("mc.paths must be positive")
        if not self.dt_fine > 0:
            raise ValueError("mc.dt_fine must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("mc.seed must fit in 64 bits")

    def to_dict(self) -> dict:
        return {"paths": self.paths, "seed": self.seed, "dt_fine": self.dt_fine}


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    market: MarketParams
    impact: ImpactSpec
    dp: DpSettings = field(default_factory=DpSettings)
    mc: McSettings = field(default_factory=McSettings)
    outputs: str | None = None

    def to_dict(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "market": self.market.to_dict(),
            "impact": self.impact.to_dict(),
            "dp": self.dp.to_dict(),
            "mc": self.mc.to_dict(),
        }
        if self.outputs is not None:
            out["outputs"] = self.outputs
        return out

    def write(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", newline="\n")


def _check_unknown(section: str, data: dict, allowed: set[str], problems: list[str]) -> None:
    for key in sorted(set(data) - allowed):
        problems.append(f"{section}: unknown field {key!r}")


def _parse_section(section: str, data, parser, problems: list[str]):
    if not isinstance(data, dict):
        problems.append(f"{section}: expected an object")
        return None
    try:
        return parser(data)
    except (ValueError, KeyError, TypeError) as exc:
        problems.append(f"{section}: {exc}")
        return None


def parse_config(data: dict) -> ExperimentConfig:
    problems: list[str] = []
    if not isinstance(data, dict):
        raise ConfigError(["top level: expected an object"])
    allowed = {"schema_version", "name", "market", "impact", "dp", "mc", "outputs"}
    _check_unknown("top level", data, allowed, problems)

    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        problems.append(f"schema_version: expected {SCHEMA_VERSION}, got {version!r}")
    name = data.get("name")
    if not isinstance(name, str) or not name:
        problems.append("name: expected a non-empty string")

    market = impact = None
    if "market" not in data:
        problems.append("market: section missing")
    else:
        market = _parse_section("market", data["market"], MarketParams.from_dict, problems)
    if "impact" not in data:
        problems.append("impact: section missing")
    else:
        impact = _parse_section("impact", data["impact"], ImpactSpec.from_dict, problems)

    def parse_dp(d: dict) -> DpSettings:
        _check_unknown("dp", d, {"n", "k_max", "phi_grid_size", "psi_grid_size"}, problems)
        known = {k: d[k] for k in ("n", "k_max", "phi_grid_size", "psi_grid_size") if k in d}
        return DpSettings(**known)

    def parse_mc(d: dict) -> McSettings:
        _check_unknown("mc", d, {"paths", "seed", "dt_fine"}, problems)
        known = {k: d[k] for k in ("paths", "seed", "dt_fine") if k in d}
        return McSettings(**known)

    dp = _parse_section("dp", data.get("dp", {}), parse_dp, problems) or DpSettings()
    mc = _parse_section("mc", data.get("mc", {}), parse_mc, problems) or McSettings()

    outputs = data.get("outputs")
    if outputs is not None and not isinstance(outputs, str):
        problems.append("outputs: expected a string path")

    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(name=name, market=market, impact=impact, dp=dp, mc=mc, outputs=outputs)


def load_config(path: str | Path) -> ExperimentConfig:
    p = Path(path)
    try:
        raw = p.read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read config {p}: {exc}"]) from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config {p} is not valid JSON: {exc}"]) from exc
    return parse_config(data)
