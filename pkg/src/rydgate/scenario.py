"""Scenario files and run orchestration.

A scenario is a flat sectioned key-value text file (INI syntax) with the
sections

    [protocol]  name = model_a | model_b | adiabatic
    [physics]   either u_mhz (+ gamma_mhz), or a Stark-state pair
                (state1/state2 = "n q m [defect]") with field_v_per_m;
                r_um / a_um give the geometry; angular = true|false sets
                how quoted frequencies are read (default angular)
    [controls]  protocol-specific drive parameters (frequencies in MHz,
                durations in microseconds, phases in rad; phi_target
                accepts the literal "pi")
    [trap]      optional: omega_mhz, omega_prime_mhz, mass_kg, nbar,
                width_um, wavelength_nm
    [numerics]  tol, fock_cutoff, joint
    [outputs]   artifacts = gate_report, traces, dressed_curves,
                motional_budget

Validation collects every problem before failing, so a broken file is
diagnosed in one pass.  Runs are deterministic: rerunning a scenario
byte-reproduces all CSV and report outputs.
"""

import configparser
import json
import math
import os
import time
from dataclasses import dataclass, field

from . import __version__
from .atomic import InteractionGeometry, StarkState, dipole_dipole_energy
from .dynamics import InternalModel, TwoAtomState, propagate
from .errors import DomainError, ScenarioError
from .motional import (
    MotionalBudget,
    TrapSpec,
    kick_bound,
    model_a_kick,
    release_retrap,
    simulate_joint_kick,
    simulate_trap_mismatch,
    thermal_kick,
    thermal_trap,
    trap_mismatch_bound,
)
from .protocols import (
    adiabatic_schedule,
    analyze_gate,
    calibrate,
    entanglement_phase_integral,
    model_a_schedule,
    model_b_schedule,
)
from .units import PhysicalContext, mhz_to_rad_per_s, meters

PROTOCOLS = ("model_a", "model_b", "adiabatic")
ARTIFACTS = ("gate_report", "traces", "dressed_curves", "motional_budget")

_SECTIONS = ("protocol", "physics", "controls", "trap", "numerics", "outputs")


@dataclass
class Scenario:
    """A validated scenario: resolved values plus the raw text mapping
    (kept so sweeps can override single keys and re-validate)."""

    protocol: str
    model: InternalModel
    controls: dict
    trap: TrapSpec = None
    geometry: InteractionGeometry = None
    wavelength: float = None
    tol: float = 1e-9
    fock_cutoff: int = 12
    joint: bool = False
    outputs: tuple = ("gate_report",)
    raw: dict = field(default_factory=dict)
    path: str = None


@dataclass
class RunManifest:
    """Completion record of a run; written last, as manifest.json."""

    protocol: str
    parameters: dict
    version: str
    runtime_seconds: float
    files: list

    def write(self, out_dir):
        payload = {
            "protocol": self.protocol,
            "parameters": self.parameters,
            "version": self.version,
            "runtime_seconds": self.runtime_seconds,
            "files": self.files,
        }
        path = os.path.join(out_dir, "manifest.json")
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


# ---------------------------------------------------------------------------
# parsing


def _phase_value(text):
    """Parse a phase: plain float, 'pi', or '<x>*pi'."""
    text = text.strip().lower()
    if text == "pi":
        return math.pi
    if text.endswith("*pi"):
        return float(text[:-3]) * math.pi
    return float(text)


class _Reader:
    """Typed access into the raw mapping that records every problem."""

    def __init__(self, raw):
        self.raw = raw
        self.problems = []

    def has(self, section, key):
        return key in self.raw.get(section, {})

    def get(self, section, key, cast=float, default=None, required=False, parse=None):
        text = self.raw.get(section, {}).get(key)
        if text is None:
            if required:
                self.problems.append(f"[{section}] missing required key '{key}'")
            return default
        try:
            return parse(text) if parse else cast(text)
        except (TypeError, ValueError):
            self.problems.append(f"[{section}] {key} = {text!r}: not a valid {cast.__name__}")
            return default

    def get_bool(self, section, key, default):
        text = self.raw.get(section, {}).get(key)
        if text is None:
            return default
        low = text.strip().lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        self.problems.append(f"[{section}] {key} = {text!r}: expected true/false")
        return default


def _parse_stark(text, label, problems):
    parts = text.split()
    if len(parts) not in (3, 4):
        problems.append(f"[physics] {label} = {text!r}: expected 'n q m [defect]'")
        return None
    try:
        n, q, m = int(parts[0]), int(parts[1]), int(parts[2])
        defect = float(parts[3]) if len(parts) == 4 else 0.0
        return StarkState(n, q, m, quantum_defect=defect)
    except (ValueError, DomainError) as exc:
        problems.append(f"[physics] {label} = {text!r}: {exc}")
        return None


def _read_raw(path):
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    with open(path) as fh:
        parser.read_file(fh, source=path)
    raw = {}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ScenarioError([f"unknown section [{section}]; allowed: {_SECTIONS}"])
        raw[section] = dict(parser.items(section))
    return raw


def build_scenario(raw, path=None):
    """Validate a raw mapping and resolve it into a Scenario.

    Raises ScenarioError carrying the full list of problems found.
    """
    rd = _Reader(raw)
    angular = rd.get_bool("physics", "angular", True)

    def freq(section, key, **kw):
        val = rd.get(section, key, **kw)
        return None if val is None else mhz_to_rad_per_s(val, angular=angular)

    protocol = rd.get("protocol", "name", cast=str, required=True)
    if protocol is not None and protocol not in PROTOCOLS:
        rd.problems.append(
            f"[protocol] name = {protocol!r}: allowed protocols are {', '.join(PROTOCOLS)}"
        )

    # physics: explicit u, or a Stark-state pair with geometry
    gamma = freq("physics", "gamma_mhz", default=0.0)
    geometry = None
    r_um = rd.get("physics", "r_um")
    a_um = rd.get("physics", "a_um", default=0.0)
    if r_um is not None:
        try:
            geometry = InteractionGeometry(meters(r_um * 1e-6), meters(a_um * 1e-6))
        except DomainError as exc:
            rd.problems.append(f"[physics] geometry: {exc}")
    if rd.has("physics", "u_mhz"):
        u = freq("physics", "u_mhz")
    elif rd.has("physics", "state1"):
        s1 = _parse_stark(raw["physics"]["state1"], "state1", rd.problems)
        s2_text = raw["physics"].get("state2", raw["physics"].get("state1"))
        s2 = _parse_stark(s2_text, "state2", rd.problems)
        if geometry is None:
            rd.problems.append("[physics] Stark-state pair needs r_um for the geometry")
        u = None
        if s1 and s2 and geometry is not None:
            ctx = PhysicalContext(electric_field=rd.get("physics", "field_v_per_m", default=0.0))
            u = dipole_dipole_energy(s1, s2, geometry, ctx)
    else:
        u = None
        rd.problems.append("[physics] needs u_mhz or a state1/state2 Stark pair")

    controls = {}
    if protocol == "model_a":
        controls["omega"] = freq("controls", "omega_mhz", required=True)
        controls["phi_target"] = rd.get(
            "controls", "phi_target_rad", parse=_phase_value, default=math.pi
        )
    elif protocol == "model_b":
        controls["omega1"] = freq("controls", "omega1_mhz", required=True)
        controls["omega2"] = freq("controls", "omega2_mhz", required=True)
    elif protocol == "adiabatic":
        controls["omega0"] = freq("controls", "omega0_mhz", required=True)
        controls["delta0"] = freq("controls", "delta0_mhz", required=True)
        controls["delta_min"] = freq("controls", "delta_min_mhz")
        controls["omega_power"] = rd.get("controls", "omega_power", default=1.0)
        controls["delta_power"] = rd.get("controls", "delta_power", default=1.0)
        dur = rd.get("controls", "duration_us")
        controls["duration"] = None if dur is None else dur * 1e-6
        controls["phi_target"] = rd.get("controls", "phi_target_rad", parse=_phase_value)
        lo = rd.get("controls", "bracket_low_us", default=0.3)
        hi = rd.get("controls", "bracket_high_us", default=3.0)
        controls["bracket"] = (lo * 1e-6, hi * 1e-6)
        if controls["duration"] is None and controls["phi_target"] is None:
            rd.problems.append(
                "[controls] adiabatic protocol needs duration_us or phi_target_rad"
            )

    trap = None
    if "trap" in raw:
        t_omega = freq("trap", "omega_mhz", required=True)
        t_omega_p = freq("trap", "omega_prime_mhz", required=True)
        mass = rd.get("trap", "mass_kg", default=0.0)
        nbar = rd.get("trap", "nbar", default=0.0)
        width_um = rd.get("trap", "width_um")
        if t_omega is not None and t_omega_p is not None:
            try:
                if width_um is not None:
                    trap = TrapSpec(t_omega, t_omega_p, mass, nbar, width_um * 1e-6)
                elif mass > 0:
                    trap = TrapSpec.ground_state(t_omega, t_omega_p, mass, nbar)
                else:
                    rd.problems.append("[trap] needs width_um or a positive mass_kg")
            except DomainError as exc:
                rd.problems.append(f"[trap] {exc}")
    wavelength = rd.get("trap", "wavelength_nm")
    if wavelength is not None:
        wavelength *= 1e-9

    tol = rd.get("numerics", "tol", default=1e-9)
    fock = rd.get("numerics", "fock_cutoff", cast=int, default=12)
    joint = rd.get_bool("numerics", "joint", False)
    if tol is not None and not 1e-14 < tol < 1e-3:
        rd.problems.append(f"[numerics] tol = {tol}: outside (1e-14, 1e-3)")
    if fock is not None and fock < 6:
        rd.problems.append(f"[numerics] fock_cutoff = {fock}: must be >= 6")

    artifacts_text = raw.get("outputs", {}).get("artifacts", "gate_report")
    outputs = tuple(a.strip() for a in artifacts_text.split(",") if a.strip())
    for a in outputs:
        if a not in ARTIFACTS:
            rd.problems.append(
                f"[outputs] unknown artifact {a!r}; allowed: {', '.join(ARTIFACTS)}"
            )
    if "dressed_curves" in outputs and protocol in ("model_a", "model_b"):
        rd.problems.append("[outputs] dressed_curves requires the adiabatic protocol")
    if "motional_budget" in outputs and trap is None:
        rd.problems.append("[outputs] motional_budget requires a [trap] section")

    if u is not None and gamma is not None and not rd.problems:
        model = InternalModel(u=u, gamma=gamma)
    else:
        model = None
    if rd.problems:
        raise ScenarioError(rd.problems)
    return Scenario(
        protocol=protocol,
        model=model,
        controls=controls,
        trap=trap,
        geometry=geometry,
        wavelength=wavelength,
        tol=tol,
        fock_cutoff=fock,
        joint=joint,
        outputs=outputs,
        raw=raw,
        path=path,
    )


def parse_scenario(path):
    """Read and validate a scenario file.

    Missing/unreadable files raise OSError; invalid contents raise
    ScenarioError with every problem found.
    """
    return build_scenario(_read_raw(path), path=path)


# ---------------------------------------------------------------------------
# running


def realize_schedule(scenario):
    """Build the protocol's PulseSchedule, calibrating if requested.

    Returns (schedule, calibration_result_or_None).
    """
    c = scenario.controls
    if scenario.protocol == "model_a":
        return model_a_schedule(c["omega"], scenario.model.u, c["phi_target"]), None
    if scenario.protocol == "model_b":
        return model_b_schedule(c["omega1"], c["omega2"], scenario.model.u), None

    def family(duration):
        return adiabatic_schedule(
            c["omega0"],
            c["delta0"],
            duration,
            delta_min=c["delta_min"],
            omega_power=c["omega_power"],
            delta_power=c["delta_power"],
        )

    if c["phi_target"] is not None:
        res = calibrate(family, c["phi_target"], c["bracket"], scenario.model, tol=scenario.tol)
        return res.schedule, res
    return family(c["duration"]), None


def _motional_text(scenario, schedule, report):
    trap = scenario.trap
    dt = schedule.total_duration
    if scenario.geometry is None or scenario.geometry.eta == 0:
        raise ScenarioError(
            ["motional budget needs [physics] r_um and a_um for eta = a/R"]
        )
    eta = scenario.geometry.eta
    if scenario.protocol == "adiabatic":
        omega0 = scenario.controls["omega0"]
    else:
        omega0 = max(
            v for k, v in scenario.controls.items() if k.startswith("omega") and v
        )
    p_k = kick_bound(eta, omega0, scenario.model.u, dt)
    p_t = trap_mismatch_bound(trap.omega, trap.omega_prime, dt)
    p_k, k_clamped = (p_k, False) if p_k <= 1 else (1.0, True)
    p_t, t_clamped = (p_t, False) if p_t <= 1 else (1.0, True)
    kick = model_a_kick(
        report.entanglement_phase,
        scenario.geometry.R.to_meters(),
        scenario.wavelength if scenario.wavelength else 480e-9,
        trap.width,
    )
    budget = MotionalBudget(
        p_k=p_k,
        p_k_thermal=thermal_kick(p_k, trap.nbar),
        p_t=p_t,
        p_t_thermal=thermal_trap(p_t, trap.nbar),
        delta_nbar=release_retrap(trap.omega, dt, trap.nbar),
        momentum_kick=kick.momentum_kick,
        recoil_ratio=kick.recoil_ratio,
        lamb_dicke=kick.lamb_dicke,
        clamped=k_clamped or t_clamped,
    )
    text = budget.to_text()
    if scenario.joint and scenario.protocol == "adiabatic":
        sim_trap = TrapSpec(
            trap.omega,
            trap.omega_prime,
            trap.mass,
            trap.nbar,
            eta * scenario.geometry.R.to_meters(),
        )
        kick_sim = simulate_joint_kick(
            schedule, scenario.model, sim_trap, scenario.geometry,
            fock_cutoff=scenario.fock_cutoff, tol=scenario.tol,
        )
        mismatch_sim = simulate_trap_mismatch(
            schedule, scenario.model, sim_trap,
            fock_cutoff=scenario.fock_cutoff, tol=scenario.tol,
        )
        text += f"p_k_numeric = {kick_sim.probability:.17g}\n"
        text += f"p_t_numeric = {mismatch_sim.probability:.17g}\n"
    return text


def run(scenario, out_dir):
    """Execute a scenario and write its artifacts into out_dir.

    The directory is locked for the duration of the run; manifest.json is
    written last as the completion marker.
    """
    t_start = time.perf_counter()
    os.makedirs(out_dir, exist_ok=True)
    lock_path = os.path.join(out_dir, "run.lock")
    try:
        lock_fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise OSError(f"run directory {out_dir} is locked by another run ({lock_path})")
    try:
        os.write(lock_fd, f"pid {os.getpid()}\n".encode())
        os.close(lock_fd)

        schedule, calres = realize_schedule(scenario)
        analysis = analyze_gate(schedule, scenario.model, tol=scenario.tol)
        report = analysis.report

        files = []

        def emit(name, writer):
            path = os.path.join(out_dir, name)
            writer(path)
            files.append(name)

        if "gate_report" in scenario.outputs:
            def write_report(path):
                with open(path, "w") as fh:
                    fh.write(report.to_text())
            emit("gate_report.txt", write_report)
        if "traces" in scenario.outputs:
            traj = propagate(
                TwoAtomState.qubit_superposition(), schedule, scenario.model,
                tol=scenario.tol,
            )
            emit("traces.csv", traj.write_csv)
        if "dressed_curves" in scenario.outputs:
            curves = entanglement_phase_integral(schedule, scenario.model.u)
            emit("dressed_curves.csv", curves.write_csv)
        if "motional_budget" in scenario.outputs:
            text = _motional_text(scenario, schedule, report)
            def write_budget(path):
                with open(path, "w") as fh:
                    fh.write(text)
            emit("motional_budget.txt", write_budget)

        parameters = {
            "u_rad_per_s": scenario.model.u,
            "gamma_rad_per_s": scenario.model.gamma,
            "duration_s": schedule.total_duration,
            "entanglement_phase_rad": report.entanglement_phase,
            "loss": report.loss,
            "loss_worst": report.loss_worst,
            "fidelity": report.fidelity,
            "tol": scenario.tol,
        }
        if calres is not None:
            parameters["calibrated_duration_s"] = calres.parameter
            parameters["calibration_evaluations"] = calres.evaluations

        files.append("manifest.json")
        manifest = RunManifest(
            protocol=scenario.protocol,
            parameters=parameters,
            version=__version__,
            runtime_seconds=time.perf_counter() - t_start,
            files=sorted(files),
        )
        manifest.write(out_dir)
        return manifest
    finally:
        if os.path.exists(lock_path):
            os.remove(lock_path)


# ---------------------------------------------------------------------------
# sweeps

_SWEEP_HEADER = ("value", "phi", "p_l", "fidelity", "p_k_bound", "p_t_bound", "status")


def resolve_knob(raw, knob):
    """Split 'section.key' and check it exists in the raw mapping."""
    section, _, key = knob.partition(".")
    if not key or section not in _SECTIONS:
        raise ScenarioError(
            [f"knob {knob!r}: expected 'section.key' with a known section"]
        )
    if key not in raw.get(section, {}):
        raise ScenarioError([f"knob {knob!r} not present in the scenario"])
    return section, key


def sweep(scenario, knob, values):
    """Re-run the scenario once per knob value; returns rows matching
    _SWEEP_HEADER order.  Failing rows carry status FAILED and empty
    result columns; the sweep always completes."""
    if not values:
        raise ScenarioError(["sweep needs at least one value"])
    section, key = resolve_knob(scenario.raw, knob)
    rows = []
    for value in values:
        raw = {sec: dict(kv) for sec, kv in scenario.raw.items()}
        raw[section][key] = repr(value)
        try:
            scn = build_scenario(raw, path=scenario.path)
            schedule, _ = realize_schedule(scn)
            report = analyze_gate(schedule, scn.model, tol=scn.tol).report
            row = {
                "value": value,
                "phi": report.entanglement_phase,
                "p_l": report.loss,
                "fidelity": report.fidelity,
                "status": "OK",
            }
            if scn.trap is not None and scn.geometry is not None and scn.geometry.eta:
                omega0 = max(
                    v for k, v in scn.controls.items() if k.startswith("omega") and v
                )
                row["p_k_bound"] = kick_bound(
                    scn.geometry.eta, omega0, scn.model.u, schedule.total_duration
                )
                row["p_t_bound"] = trap_mismatch_bound(
                    scn.trap.omega, scn.trap.omega_prime, schedule.total_duration
                )
            rows.append(row)
        except Exception as exc:  # noqa: BLE001 - per-row failures must not abort
            rows.append({"value": value, "status": f"FAILED: {type(exc).__name__}"})
    return rows


def write_sweep_csv(rows, path):
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_SWEEP_HEADER)
        for row in rows:
            out = []
            for col in _SWEEP_HEADER:
                val = row.get(col, "")
                out.append(f"{val:.17g}" if isinstance(val, float) else str(val))
            writer.writerow(out)
