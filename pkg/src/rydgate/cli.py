"""Command-line front end.

Verbs:
    interaction      print u and F for a Stark-state pair and geometry
    gate run         execute a scenario, write artifacts + manifest
    gate calibrate   calibrate the scenario's schedule to its phase target
    motional         write the motional budget for a scenario
    sweep            re-run a scenario over a list of knob values

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical
failure.  The default output directory is taken from RYDGATE_OUT_DIR (or
the current directory).
"""

import functools
import os
import sys

import click

from . import __version__
from .atomic import (
    InteractionGeometry,
    StarkState,
    dipole_dipole_energy,
    dipole_force,
)
from .errors import (
    CalibrationError,
    ConvergenceError,
    DomainError,
    IntegrationError,
    ScenarioError,
)
from .units import PhysicalContext, meters
from . import scenario as scn

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


def _fail(code, message):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def handle_errors(fn):
    """Map package exceptions onto the documented exit-code classes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ScenarioError as exc:
            for problem in exc.problems:
                click.echo(f"config: {problem}", err=True)
            sys.exit(EXIT_CONFIG)
        except DomainError as exc:
            _fail(EXIT_CONFIG, str(exc))
        except (IntegrationError, CalibrationError, ConvergenceError) as exc:
            _fail(EXIT_NUMERIC, str(exc))
        except OSError as exc:
            _fail(EXIT_IO, str(exc))

    return wrapper


def _default_out():
    return os.environ.get("RYDGATE_OUT_DIR", ".")


out_option = click.option(
    "--out",
    "out_dir",
    default=None,
    help="Output directory (default: $RYDGATE_OUT_DIR or '.').",
)


@click.group()
@click.version_option(version=__version__)
def main():
    """Dipole-dipole phase gates for trapped neutral atoms."""


@main.command()
@click.option("--n1", type=int, required=True, help="Principal quantum number, atom 1.")
@click.option("--q1", type=int, required=True, help="Parabolic quantum number q, atom 1.")
@click.option("--m1", type=int, default=0, show_default=True)
@click.option("--n2", type=int, default=None, help="Defaults to atom 1's values.")
@click.option("--q2", type=int, default=None)
@click.option("--m2", type=int, default=None)
@click.option("--defect", type=float, default=0.0, show_default=True, help="Quantum defect.")
@click.option("--r-um", type=float, required=True, help="Separation in micrometers.")
@click.option("--a-um", type=float, default=0.0, show_default=True, help="Wavepacket width (um).")
@handle_errors
def interaction(n1, q1, m1, n2, q2, m2, defect, r_um, a_um):
    """Print the dipole-dipole shift u and force F for a state pair."""
    s1 = StarkState(n1, q1, m1, quantum_defect=defect)
    s2 = StarkState(
        n1 if n2 is None else n2,
        q1 if q2 is None else q2,
        m1 if m2 is None else m2,
        quantum_defect=defect,
    )
    geom = InteractionGeometry(meters(r_um * 1e-6), meters(a_um * 1e-6))
    ctx = PhysicalContext()
    u = dipole_dipole_energy(s1, s2, geom, ctx)
    force = dipole_force(u, geom.R)
    click.echo(f"u_rad_per_s = {u:.17g}")
    click.echo(f"u_ghz = {u / 1e9:.17g}")
    click.echo(f"force_rad_per_s_per_m = {force:.17g}")
    if a_um > 0:
        click.echo(f"eta = {geom.eta:.17g}")


@main.group()
def gate():
    """Run or calibrate a gate scenario."""


@gate.command("run")
@click.argument("scenario_path", type=click.Path())
@out_option
@handle_errors
def gate_run(scenario_path, out_dir):
    """Execute SCENARIO_PATH and write its artifacts."""
    scenario = scn.parse_scenario(scenario_path)
    manifest = scn.run(scenario, out_dir or _default_out())
    for key, val in sorted(manifest.parameters.items()):
        click.echo(f"{key} = {val}")
    click.echo(f"files = {', '.join(manifest.files)}")


@gate.command("calibrate")
@click.argument("scenario_path", type=click.Path())
@out_option
@handle_errors
def gate_calibrate(scenario_path, out_dir):
    """Calibrate the scenario's pulse to its phase target and report."""
    scenario = scn.parse_scenario(scenario_path)
    if scenario.protocol != "adiabatic" or scenario.controls.get("phi_target") is None:
        raise ScenarioError(
            ["calibration needs the adiabatic protocol with phi_target_rad set"]
        )
    schedule, calres = scn.realize_schedule(scenario)
    click.echo(f"calibrated_duration_s = {calres.parameter:.17g}")
    click.echo(f"entanglement_phase_rad = {calres.phi:.17g}")
    click.echo(f"evaluations = {calres.evaluations}")
    target = out_dir or _default_out()
    os.makedirs(target, exist_ok=True)
    path = os.path.join(target, "gate_report.txt")
    with open(path, "w") as fh:
        fh.write(calres.report.to_text())
    click.echo(f"files = gate_report.txt")


@main.command()
@click.argument("scenario_path", type=click.Path())
@out_option
@handle_errors
def motional(scenario_path, out_dir):
    """Write the motional error budget for SCENARIO_PATH."""
    scenario = scn.parse_scenario(scenario_path)
    if scenario.trap is None:
        raise ScenarioError(["motional budget needs a [trap] section"])
    schedule, _ = scn.realize_schedule(scenario)
    from .protocols import analyze_gate

    report = analyze_gate(schedule, scenario.model, tol=scenario.tol).report
    text = scn._motional_text(scenario, schedule, report)
    target = out_dir or _default_out()
    os.makedirs(target, exist_ok=True)
    path = os.path.join(target, "motional_budget.txt")
    with open(path, "w") as fh:
        fh.write(text)
    click.echo(text, nl=False)
    click.echo(f"files = motional_budget.txt")


@main.command("sweep")
@click.argument("scenario_path", type=click.Path())
@click.option("--knob", required=True, help="Parameter to vary, as section.key.")
@click.option(
    "--values", required=True, help="Comma-separated list of values for the knob."
)
@out_option
@handle_errors
def sweep_cmd(scenario_path, knob, values, out_dir):
    """Re-run SCENARIO_PATH once per value of --knob."""
    scenario = scn.parse_scenario(scenario_path)
    try:
        parsed = [float(v) for v in values.split(",") if v.strip()]
    except ValueError as exc:
        raise ScenarioError([f"--values: {exc}"])
    rows = scn.sweep(scenario, knob, parsed)
    target = out_dir or _default_out()
    os.makedirs(target, exist_ok=True)
    path = os.path.join(target, "sweep.csv")
    scn.write_sweep_csv(rows, path)
    ok = sum(1 for r in rows if r["status"] == "OK")
    click.echo(f"rows = {len(rows)} ({ok} ok)")
    click.echo(f"files = sweep.csv")


if __name__ == "__main__":
    main()
