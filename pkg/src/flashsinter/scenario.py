"""Scenario files: a YAML document with one section per configuration type.

Example (the bundled ``table1.scenario``)::

    dimensional: {rho: 6050.0, c_heat: 600.0, ...}
    model: radial
    schedule: {mode: voltage_then_current, voltage_setpoint: 1.0, current_limit: auto}
    grid: {n_cells: 64}
    solver: {t_end: 200.0}
    outputs: {timeseries: timeseries.csv}

Unknown keys anywhere are rejected.  ``current_limit: auto`` (the default)
takes the dimensionless limit from the nondimensionalized parameters.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

import yaml

from .model import ControlMode, ControlSchedule, DimensionalParameters, nondimensionalize
from .transient import Geometry, SolverOptions, SpatialGrid

__all__ = ["ModelKind", "Scenario", "ScenarioError", "bundled_scenario", "load_scenario", "parse_scenario"]

OUTPUT_KINDS = ("timeseries", "snapshots", "steady", "critical_curve", "regime")
_SECTIONS = ("dimensional", "model", "schedule", "grid", "solver", "outputs")


class ScenarioError(ValueError):
    """Invalid scenario document; the message names the offending field."""


class ModelKind(str, enum.Enum):
    RADIAL = "radial"
    AXIAL = "axial"
    LUMPED = "lumped"
    HIGH_ASPECT = "high_aspect"

    @property
    def geometry(self) -> Geometry | None:
        if self is ModelKind.RADIAL:
            return Geometry.RADIAL
        if self in (ModelKind.AXIAL, ModelKind.HIGH_ASPECT):
            return Geometry.AXIAL
        return None


@dataclass(frozen=True)
class Scenario:
    dimensional: DimensionalParameters
    model: ModelKind
    schedule: ControlSchedule
    grid: SpatialGrid
    solver: SolverOptions
    outputs: dict[str, str] = field(default_factory=dict)

    def output_path(self, kind: str, out_dir: str | Path) -> Path | None:
        name = self.outputs.get(kind)
        if name is None:
            return None
        path = Path(name)
        return path if path.is_absolute() else Path(out_dir) / path


def _check_keys(section: str, data, allowed) -> dict:
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ScenarioError(f"{section}: expected a mapping, got {type(data).__name__}")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ScenarioError(f"{section}: unknown key(s) {', '.join(unknown)}")
    return data


def _number(section: str, key: str, value) -> float:
    if isinstance(value, bool):
        raise ScenarioError(f"{section}.{key}: expected a number, got {value!r}")
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", ".inf"):
        return math.inf
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ScenarioError(f"{section}.{key}: expected a number, got {value!r}") from None


def _dimensional(data) -> DimensionalParameters:
    names = [f.name for f in fields(DimensionalParameters)]
    data = _check_keys("dimensional", data, names)
    missing = [n for n in names if n not in data]
    if missing:
        raise ScenarioError(f"dimensional: missing field(s) {', '.join(missing)}")
    values = {k: _number("dimensional", k, v) for k, v in data.items()}
    try:
        return DimensionalParameters(**values)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"dimensional: {exc}") from None


def _schedule(data, dimensional: DimensionalParameters) -> ControlSchedule:
    data = _check_keys("schedule", data, ("mode", "voltage_setpoint", "current_limit"))
    try:
        mode = ControlMode(data.get("mode", ControlMode.VOLTAGE_THEN_CURRENT.value))
    except ValueError:
        allowed = ", ".join(m.value for m in ControlMode)
        raise ScenarioError(f"schedule.mode: must be one of {allowed}, got {data.get('mode')!r}") from None
    vset = _number("schedule", "voltage_setpoint", data.get("voltage_setpoint", 1.0))
    limit_raw = data.get("current_limit", "auto")
    if mode is ControlMode.VOLTAGE_ONLY:
        limit = math.inf
    elif isinstance(limit_raw, str) and limit_raw.strip().lower() == "auto":
        limit = nondimensionalize(dimensional).curlyI
    else:
        limit = _number("schedule", "current_limit", limit_raw)
    try:
        return ControlSchedule(mode=mode, voltage_setpoint=vset, current_limit=limit)
    except ValueError as exc:
        raise ScenarioError(f"schedule: {exc}") from None


def _grid(data, model: ModelKind) -> SpatialGrid:
    data = _check_keys("grid", data, ("n_cells",))
    n = data.get("n_cells", 64)
    if isinstance(n, bool) or not isinstance(n, int):
        raise ScenarioError(f"grid.n_cells: expected an integer >= 8, got {n!r}")
    try:
        return SpatialGrid(n_cells=n, geometry=model.geometry or Geometry.RADIAL)
    except ValueError as exc:
        raise ScenarioError(f"grid.n_cells: {exc}") from None


def _solver(data) -> SolverOptions:
    names = [f.name for f in fields(SolverOptions)]
    data = _check_keys("solver", data, names)
    values = {}
    for k, v in data.items():
        if v is None and k in ("snapshot_interval", "steady_tol"):
            values[k] = None
        else:
            values[k] = _number("solver", k, v)
    try:
        return SolverOptions(**values)
    except ValueError as exc:
        raise ScenarioError(f"solver: {exc}") from None


def _outputs(data) -> dict[str, str]:
    data = _check_keys("outputs", data, OUTPUT_KINDS)
    out = {}
    for k, v in data.items():
        if not isinstance(v, str) or not v:
            raise ScenarioError(f"outputs.{k}: expected a file path, got {v!r}")
        out[k] = v
    return out


def parse_scenario(doc: dict) -> Scenario:
    doc = _check_keys("scenario", doc, _SECTIONS)
    if "dimensional" not in doc:
        raise ScenarioError("scenario: missing section dimensional")
    dimensional = _dimensional(doc["dimensional"])
    try:
        model = ModelKind(doc.get("model", ModelKind.RADIAL.value))
    except ValueError:
        allowed = ", ".join(m.value for m in ModelKind)
        raise ScenarioError(f"model: must be one of {allowed}, got {doc.get('model')!r}") from None
    return Scenario(
        dimensional=dimensional,
        model=model,
        schedule=_schedule(doc.get("schedule"), dimensional),
        grid=_grid(doc.get("grid"), model),
        solver=_solver(doc.get("solver")),
        outputs=_outputs(doc.get("outputs")),
    )


def load_scenario(path: str | Path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{path}: not a valid scenario document: {exc}") from None
    if not isinstance(doc, dict):
        raise ScenarioError(f"{path}: expected a mapping at top level")
    return parse_scenario(doc)


def bundled_scenario(name: str = "table1") -> Path:
    """Path of a scenario shipped with the package."""
    return Path(str(resources.files("flashsinter") / "data" / f"{name}.scenario"))
