"""JSON configuration for the command-line harness.

One document describes an instance: the participant population, the
accuracy and valuation curves, solver knobs, optional fairness surpluses,
optional sweep grids, and output paths.  Parsing is strict; an unknown
field is an error rather than a silent ignore, so config typos surface
immediately.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

from .errors import ConfigError, DomainError
from .model import AccuracySpec, ModelEconomy, ValuationSpec
from .population import DEFAULT_ENUM_CAP, Population

__all__ = [
    "ScenarioConfig",
    "SweepGrids",
    "parse_config",
    "serialize_config",
    "load_config_file",
    "load_preset",
    "PRESET_NAMES",
]

PRESET_NAMES = ("scenario1", "scenario2", "scenario3", "sweep")

_DEFAULT_P1_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))
_DEFAULT_N_GRID = (2, 5, 10, 20, 50, 100)


@dataclass(frozen=True)
class SweepGrids:
    """Grids for the two-type sweep: high-cost share and pool size."""

    p1_grid: tuple[float, ...]
    n_grid: tuple[int, ...]


@dataclass(frozen=True)
class ScenarioConfig:
    """A fully validated instance description."""

    population: Population
    surpluses: tuple[float, ...] | None
    tolerance: float
    outer_cap: int
    enumeration_cap: int
    output_dir: str | None
    sweep: SweepGrids | None


def _expect_mapping(node, where: str) -> dict:
    if not isinstance(node, dict):
        raise ConfigError(f"{where} must be a JSON object, got {type(node).__name__}")
    return node


def _take(node: dict, where: str, allowed: dict):
    """Pull typed fields from a mapping, rejecting anything unexpected."""
    unknown = set(node) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown field {sorted(unknown)[0]!r} in {where}")
    out = {}
    for key, (kind, default) in allowed.items():
        if key not in node:
            out[key] = default
            continue
        val = node[key]
        if kind is float:
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"{where}.{key} must be a number")
            val = float(val)
        elif kind is int:
            if isinstance(val, bool) or not isinstance(val, int):
                raise ConfigError(f"{where}.{key} must be an integer")
        elif kind is str:
            if not isinstance(val, str):
                raise ConfigError(f"{where}.{key} must be a string")
        elif kind is list:
            if not isinstance(val, list):
                raise ConfigError(f"{where}.{key} must be an array")
        out[key] = val
    return out


def _number_list(values, where: str) -> tuple[float, ...]:
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{where} must contain numbers only")
        out.append(float(v))
    return tuple(out)


_REQUIRED = object()


def parse_config(document) -> ScenarioConfig:
    """Validate a config document (dict or JSON text) into a ScenarioConfig."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    root = _expect_mapping(document, "config")
    fields = _take(
        root,
        "config",
        {
            "population": (dict, _REQUIRED),
            "accuracy": (dict, None),
            "valuation": (dict, None),
            "solver": (dict, None),
            "surpluses": (list, None),
            "output": (dict, None),
            "sweep": (dict, None),
        },
    )
    if fields["population"] is _REQUIRED:
        raise ConfigError("config is missing the population block")

    pop_block = _take(
        _expect_mapping(fields["population"], "population"),
        "population",
        {
            "I": (int, None),
            "N": (int, _REQUIRED),
            "costs": (list, _REQUIRED),
            "probs": (list, _REQUIRED),
        },
    )
    for key in ("N", "costs", "probs"):
        if pop_block[key] is _REQUIRED:
            raise ConfigError(f"population block is missing {key!r}")
    costs = _number_list(pop_block["costs"], "population.costs")
    probs = _number_list(pop_block["probs"], "population.probs")
    if pop_block["I"] is not None and pop_block["I"] != len(costs):
        raise ConfigError(
            f"population.I={pop_block['I']} but {len(costs)} costs were given"
        )

    acc_block = _take(
        _expect_mapping(fields["accuracy"] or {}, "accuracy"),
        "accuracy",
        {
            "kind": (str, "generalization_bound"),
            "k": (float, 1.0),
            "a_opt": (float, 1.0),
        },
    )
    val_block = _take(
        _expect_mapping(fields["valuation"] or {}, "valuation"),
        "valuation",
        {"kind": (str, "linear"), "slope": (float, 100.0)},
    )
    solver_block = _take(
        _expect_mapping(fields["solver"] or {}, "solver"),
        "solver",
        {
            "tolerance": (float, 1e-6),
            "outer_cap": (int, 50),
            "enumeration_cap": (int, DEFAULT_ENUM_CAP),
        },
    )
    output_block = _take(
        _expect_mapping(fields["output"] or {}, "output"),
        "output",
        {"dir": (str, None)},
    )

    try:
        economy = ModelEconomy(
            accuracy=AccuracySpec(
                k=acc_block["k"], a_opt=acc_block["a_opt"], kind=acc_block["kind"]
            ),
            valuation=ValuationSpec(
                slope=val_block["slope"], kind=val_block["kind"]
            ),
        )
        population = Population(
            costs=costs, probs=probs, N=pop_block["N"], economy=economy
        )
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc

    surpluses = None
    if fields["surpluses"] is not None:
        surpluses = _number_list(fields["surpluses"], "surpluses")
        if len(surpluses) != population.I:
            raise ConfigError(
                f"{len(surpluses)} surpluses for {population.I} types"
            )
        for s in surpluses:
            if not (math.isfinite(s) and s >= 0.0):
                raise ConfigError(f"surpluses must be nonnegative, got {s}")

    sweep = None
    if fields["sweep"] is not None:
        sweep_block = _take(
            _expect_mapping(fields["sweep"], "sweep"),
            "sweep",
            {"p1_grid": (list, None), "N_grid": (list, None)},
        )
        p1_grid = (
            _number_list(sweep_block["p1_grid"], "sweep.p1_grid")
            if sweep_block["p1_grid"] is not None
            else _DEFAULT_P1_GRID
        )
        if not p1_grid or any(not 0.0 < p < 1.0 for p in p1_grid):
            raise ConfigError("sweep.p1_grid entries must lie strictly in (0, 1)")
        if sweep_block["N_grid"] is not None:
            n_grid = []
            for n in sweep_block["N_grid"]:
                if isinstance(n, bool) or not isinstance(n, int) or n < 1:
                    raise ConfigError("sweep.N_grid must contain positive integers")
                n_grid.append(n)
            n_grid = tuple(n_grid)
        else:
            n_grid = _DEFAULT_N_GRID
        if not n_grid:
            raise ConfigError("sweep.N_grid must be non-empty")
        sweep = SweepGrids(p1_grid=tuple(p1_grid), n_grid=n_grid)

    if solver_block["tolerance"] <= 0.0:
        raise ConfigError("solver.tolerance must be positive")
    if solver_block["outer_cap"] < 1:
        raise ConfigError("solver.outer_cap must be at least 1")
    if solver_block["enumeration_cap"] < 1:
        raise ConfigError("solver.enumeration_cap must be at least 1")

    return ScenarioConfig(
        population=population,
        surpluses=surpluses,
        tolerance=solver_block["tolerance"],
        outer_cap=solver_block["outer_cap"],
        enumeration_cap=solver_block["enumeration_cap"],
        output_dir=output_block["dir"],
        sweep=sweep,
    )


def serialize_config(config: ScenarioConfig) -> str:
    """Canonical JSON for a config; parse(serialize(x)) equals x."""
    pop = config.population
    doc = {
        "population": {
            "I": pop.I,
            "N": pop.N,
            "costs": list(pop.costs),
            "probs": list(pop.probs),
        },
        "accuracy": {
            "kind": pop.economy.accuracy.kind,
            "k": pop.economy.accuracy.k,
            "a_opt": pop.economy.accuracy.a_opt,
        },
        "valuation": {
            "kind": pop.economy.valuation.kind,
            "slope": pop.economy.valuation.slope,
        },
        "solver": {
            "tolerance": config.tolerance,
            "outer_cap": config.outer_cap,
            "enumeration_cap": config.enumeration_cap,
        },
    }
    if config.surpluses is not None:
        doc["surpluses"] = list(config.surpluses)
    if config.output_dir is not None:
        doc["output"] = {"dir": config.output_dir}
    if config.sweep is not None:
        doc["sweep"] = {
            "p1_grid": list(config.sweep.p1_grid),
            "N_grid": list(config.sweep.n_grid),
        }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_config_file(path: str) -> ScenarioConfig:
    """Read and validate a config file from disk."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config(text)


def load_preset(name: str) -> ScenarioConfig:
    """Load one of the packaged instance presets by name."""
    if name not in PRESET_NAMES:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}"
        )
    text = (
        resources.files("contract_forge")
        .joinpath("presets", f"{name}.json")
        .read_text(encoding="utf-8")
    )
    return parse_config(text)
