"""Command-line interface.

Subcommands::

    flashsinter nondim --config table1.scenario
    flashsinter steady --config table1.scenario --out results/
    flashsinter crit   --model radial --beta-range 0.01:10:50
    flashsinter run    --config table1.scenario --out results/
    flashsinter regime --T-range 900:1400:51 --E-range 1e3:1e5:101 --out results/

Exit status: 0 success, 1 invalid input, 2 solver failure, 3 the transient
run ended in blow-up.  Without ``--out`` the main table goes to standard
output; diagnostics always go to standard error.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .model import DimensionalParameters, high_aspect_groups, nondimensionalize
from .output import (
    TIMESERIES_COLUMNS,
    dumps,
    regime_boundary_rows,
    regime_rows,
    result_to_document,
    rows_to_csv,
    timeseries_rows,
    write_csv,
    write_json,
)
from .regime import regime_diagram
from .scenario import ModelKind, Scenario, ScenarioError, bundled_scenario, load_scenario
from .steady import (
    ContinuationError,
    axial_critical_lambda,
    axial_steady_current,
    axial_steady_voltage,
    evaluate_profile,
    high_aspect_critical,
    lumped_flash_criterion,
    radial_critical_lambda,
    radial_steady_current,
    radial_steady_voltage,
)
from .transient import SolverError, solve_axial, solve_high_aspect, solve_lumped, solve_radial

log = logging.getLogger("flashsinter")

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_BLOWUP = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors, and status 2 is reserved for solver failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def parse_range(text: str, spacing: str = "linear") -> np.ndarray:
    """Parse ``start:stop:count`` into an array of ``count`` values."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"range {text!r}: expected start:stop:count")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ValueError(f"range {text!r}: expected start:stop:count") from None
    if n < 1:
        raise ValueError(f"range {text!r}: count must be >= 1")
    if spacing == "log":
        if not (lo > 0 and hi > 0):
            raise ValueError(f"range {text!r}: log spacing needs positive bounds")
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def _emit(args, name: str, header, rows, doc=None) -> None:
    """Write a table to ``--out/name`` or, without ``--out``, to stdout."""
    rows = list(rows)
    if args.format == "json":
        text = dumps(doc if doc is not None else [dict(zip(header, r)) for r in rows])
        suffix = ".json"
    else:
        text = rows_to_csv(header, rows)
        suffix = ".csv"
    if args.out is None:
        sys.stdout.write(text)
        return
    path = Path(args.out) / Path(name).with_suffix(suffix)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    log.info("wrote %s", path)


def _load(args, required: bool = True) -> Scenario | None:
    if args.config is None:
        if required:
            raise ScenarioError("--config is required for this subcommand")
        return None
    path = Path(args.config)
    if not path.exists() and path.parent == Path(".") and path.suffix == ".scenario":
        # names such as table1.scenario also resolve to the copies shipped with the package
        bundled = bundled_scenario(path.stem)
        if bundled.exists():
            log.info("using bundled scenario %s", bundled)
            path = bundled
    return load_scenario(path)


def _output_name(scenario: Scenario | None, kind: str, default: str) -> str:
    if scenario is None:
        return default
    return scenario.outputs.get(kind, default)


# --------------------------------------------------------------------------
# subcommands

def cmd_nondim(args) -> int:
    scenario = _load(args)
    groups = nondimensionalize(scenario.dimensional)
    d = groups.to_dict()
    _emit(args, "nondim.csv", ("name", "value"), d.items(), doc=d)
    return EXIT_OK


def _steady_states(scenario: Scenario):
    """(control, state) pairs for the scenario's model."""
    groups = nondimensionalize(scenario.dimensional)
    limit = scenario.schedule.current_limit
    vset = scenario.schedule.voltage_setpoint
    out = []
    if scenario.model is ModelKind.RADIAL:
        for s in radial_steady_voltage(groups.lambda_ * vset**2, groups.beta):
            out.append(("voltage", s))
        if math.isfinite(limit):
            out.append(("current", radial_steady_current(groups.lambda_ * limit**2, groups.beta)))
    else:
        Lam = groups.lambda_ / groups.delta**2
        for s in axial_steady_voltage(Lam * vset**2, groups.alpha):
            out.append(("voltage", s))
        if math.isfinite(limit):
            out.append(("current", axial_steady_current(Lam * limit**2, groups.alpha)))
    return out


def cmd_steady(args) -> int:
    scenario = _load(args)
    groups = nondimensionalize(scenario.dimensional)
    name = _output_name(scenario, "steady", "steady.csv")
    if scenario.model is ModelKind.LUMPED:
        c = lumped_flash_criterion(groups)
        header = ("model", "flash", "forcing", "critical")
        _emit(args, name, header, [("lumped", c.flash, groups.lambda_, c.threshold)])
        return EXIT_OK
    if scenario.model is ModelKind.HIGH_ASPECT:
        ha = high_aspect_groups(groups)
        crit = high_aspect_critical(ha.alpha, ha.B)
        header = ("model", "flash", "forcing", "critical")
        _emit(args, name, header, [("high_aspect", ha.Lambda > crit, ha.Lambda, crit)])
        return EXIT_OK

    states = _steady_states(scenario)
    if scenario.model is ModelKind.RADIAL:
        critical = radial_critical_lambda(groups.beta)
        coords = np.linspace(0.0, 1.0, scenario.grid.n_cells + 1)
    else:
        critical = axial_critical_lambda(groups.alpha)
        coords = np.linspace(-0.5, 0.5, scenario.grid.n_cells + 1)
    if not any(control == "voltage" for control, _ in states):
        log.warning("no voltage-controlled steady state: forcing exceeds the critical value %.6g", critical)
    header = ("model", "control", "branch", "forcing", "critical", "theta_min", "theta_max")
    rows, profiles = [], []
    for control, s in states:
        theta = evaluate_profile(s, coords)
        rows.append((scenario.model.value, control, s.branch.value, s.forcing,
                     critical, float(theta.min()), float(theta.max())))
        profiles.append((f"{control}_{s.branch.value}", theta))
    doc = {
        "states": [dict(zip(header, r)) for r in rows],
        "coords": coords,
        "profiles": {tag: theta for tag, theta in profiles},
    }
    _emit(args, name, header, rows, doc=doc)
    if args.out is not None and args.format == "csv":
        stem = Path(name).stem
        for tag, theta in profiles:
            path = write_csv(Path(args.out) / f"{stem}_{tag}.csv", ("coord", "theta"), zip(coords, theta))
            log.info("wrote %s", path)
    return EXIT_OK


def cmd_crit(args) -> int:
    scenario = _load(args, required=False)
    model = ModelKind(args.model)
    name = _output_name(scenario, "critical_curve", "critical_curve.csv")
    if model in (ModelKind.RADIAL, ModelKind.LUMPED):
        if args.beta_range is None:
            raise ValueError(f"crit --model {model.value} needs --beta-range")
        betas = parse_range(args.beta_range, args.spacing)
        if model is ModelKind.RADIAL:
            rows = [(b, radial_critical_lambda(float(b))) for b in betas]
        else:
            # side cooling plus the electrode share delta^2 alpha, if a scenario gives one
            extra = 0.0
            if scenario is not None:
                g = nondimensionalize(scenario.dimensional)
                extra = g.delta**2 * g.alpha
            rows = [(b, 2.0 / math.e * (b + extra)) for b in betas]
        _emit(args, name, ("beta", "lambda_c"), rows)
        return EXIT_OK
    if args.alpha_range is None:
        raise ValueError(f"crit --model {model.value} needs --alpha-range")
    alphas = parse_range(args.alpha_range, args.spacing)
    if model is ModelKind.AXIAL:
        _emit(args, name, ("alpha", "Lambda_c"), [(a, axial_critical_lambda(float(a))) for a in alphas])
    else:
        B = args.B
        rows = [(a, B, high_aspect_critical(float(a), B)) for a in alphas]
        _emit(args, name, ("alpha", "B", "Lambda_c"), rows)
    return EXIT_OK


def _solve(scenario: Scenario):
    groups = nondimensionalize(scenario.dimensional)
    sch, grid, opts = scenario.schedule, scenario.grid, scenario.solver
    if scenario.model is ModelKind.RADIAL:
        return solve_radial(groups, sch, grid, opts)
    if scenario.model is ModelKind.AXIAL:
        return solve_axial(groups, sch, grid, opts)
    if scenario.model is ModelKind.LUMPED:
        return solve_lumped(groups, sch, opts)
    return solve_high_aspect(high_aspect_groups(groups), sch, grid, opts)


def cmd_run(args) -> int:
    scenario = _load(args)
    result = _solve(scenario)
    name = _output_name(scenario, "timeseries", "timeseries.csv")
    _emit(args, name, TIMESERIES_COLUMNS, timeseries_rows(result), doc=result_to_document(result))
    snap_name = scenario.outputs.get("snapshots")
    if args.out is not None and args.format == "csv" and snap_name:
        path = write_json(Path(args.out) / Path(snap_name).with_suffix(".json"), result_to_document(result))
        log.info("wrote %s", path)
    if result.switch_time is not None:
        log.info("switched to current control at t = %.6g", result.switch_time)
    if result.blew_up:
        b = result.blowup
        log.warning("blow-up (%s) at t = %.10g, theta_max = %.6g", b.reason.value, b.t_estimate, b.theta_max_at_stop)
        return EXIT_BLOWUP
    return EXIT_OK


def cmd_regime(args) -> int:
    scenario = _load(args, required=False)
    params = scenario.dimensional if scenario is not None else DimensionalParameters()
    T = parse_range(args.T_range)
    E = parse_range(args.E_range, args.spacing)
    if len(T) < 2 or len(E) < 2:
        raise ValueError("regime ranges need at least 2 points each")
    grid = regime_diagram(params, (T[0], T[-1]), (E[0], E[-1]), (len(T), len(E)), spacing=args.spacing)
    name = _output_name(scenario, "regime", "regime.csv")
    doc = {"T": grid.T_values, "E": grid.E_values, "flash": grid.flash, "E_star": grid.boundary}
    _emit(args, name, ("T", "E", "flash"), regime_rows(grid), doc=doc)
    if args.out is not None and args.format == "csv":
        stem = Path(name).stem
        path = write_csv(Path(args.out) / f"{stem}_boundary.csv", ("T", "E_star"), regime_boundary_rows(grid))
        log.info("wrote %s", path)
    return EXIT_OK


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario file (YAML); bundled names such as table1.scenario also work")
    common.add_argument("--out", help="output directory; stdout if omitted")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    p = _Parser(prog="flashsinter", description="Joule-heating flash sintering models")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("nondim", parents=[common], help="print the dimensionless groups")
    sub.add_parser("steady", parents=[common], help="exact steady states of the scenario")
    c = sub.add_parser("crit", parents=[common], help="critical curve over a parameter range")
    c.add_argument("--model", choices=[m.value for m in ModelKind], default="radial")
    c.add_argument("--beta-range", help="start:stop:count (radial, lumped)")
    c.add_argument("--alpha-range", help="start:stop:count (axial, high_aspect)")
    c.add_argument("--B", type=float, default=0.0, help="side-cooling group for high_aspect")
    c.add_argument("--spacing", choices=("log", "linear"), default="log")
    sub.add_parser("run", parents=[common], help="transient solve of the scenario")
    r = sub.add_parser("regime", parents=[common], help="flash regime over temperature and field")
    r.add_argument("--T-range", dest="T_range", required=True, help="furnace temperature K, start:stop:count")
    r.add_argument("--E-range", dest="E_range", required=True, help="field V/m, start:stop:count")
    r.add_argument("--spacing", choices=("log", "linear"), default="log", help="field axis spacing")
    return p


def _configure_logging(verbose: bool) -> None:
    root = logging.getLogger("flashsinter")
    for h in list(root.handlers):
        if getattr(h, "_flashsinter_cli", False):
            root.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("flashsinter: %(levelname)s: %(message)s"))
    handler._flashsinter_cli = True
    root.addHandler(handler)
    root.setLevel(logging.INFO if verbose else logging.WARNING)
    root.propagate = False


_COMMANDS = {"nondim": cmd_nondim, "steady": cmd_steady, "crit": cmd_crit, "run": cmd_run, "regime": cmd_regime}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return _COMMANDS[args.command](args)
    except BrokenPipeError:
        # the reader closed stdout early (e.g. piped into head); not an error
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return EXIT_OK
    except (SolverError, ContinuationError) as exc:
        log.error("%s", exc)
        return EXIT_SOLVER
    except (ScenarioError, ValueError, KeyError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
