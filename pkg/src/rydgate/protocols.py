"""Gate protocols: pulse sequences, dressed-state analytics, phase/loss
extraction and calibration.

Sign conventions.  Amplitudes evolve as e^{-i E t}, so a level at energy
E accumulates phase -E t.  The interaction shift u is negative for two
attractive extremal Stark states; the pulsed sequences (models A and B)
are quoted for that sign, which makes the blockade phase correction
positive.  The adiabatic variant keeps delta(t) >= 0 and needs u > 0 so
the shifted detuning never crosses its pole.
"""

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .dynamics import (
    INDEX,
    InternalModel,
    PulseSchedule,
    PulseSegment,
    QUBIT_INDICES,
    TwoAtomState,
    propagate,
)
from .envelopes import sin2
from .errors import CalibrationError, DomainError

TWO_PI = 2.0 * math.pi

_BASIS_INPUTS = ("gg", "ge", "eg", "ee")


def wrap_phase(x):
    """Map an angle difference to (-pi, pi]."""
    w = math.fmod(x + math.pi, TWO_PI)
    if w <= 0:
        w += TWO_PI
    return w - math.pi


# ---------------------------------------------------------------------------
# schedules


def model_a_schedule(omega, u, phi_target):
    """pi-pulse on both atoms, wait phi/|u|, pi-pulse on both atoms.

    Valid for Omega >> |u|; the accumulated two-atom phase during the wait
    equals |u| * wait.
    """
    if u == 0:
        raise DomainError("u = 0: required wait time is infinite")
    if not 0 < phi_target <= TWO_PI:
        raise DomainError(f"phi_target={phi_target} outside (0, 2*pi]")
    if omega < 10 * abs(u):
        warnings.warn(
            f"Omega={omega:.3g} < 10|u|={10 * abs(u):.3g}: outside the "
            "strong-drive regime, finite-Omega corrections grow",
            stacklevel=2,
        )
    pulse = PulseSegment(duration=math.pi / omega, omega1=omega, omega2=omega)
    wait = PulseSegment(duration=phi_target / abs(u))
    return PulseSchedule((pulse, wait, pulse))


def model_b_schedule(omega1, omega2, u):
    """pi on atom 1, blockaded 2*pi on atom 2, pi on atom 1.

    Pulse areas are in terms of the unperturbed states; valid for
    |u| >> Omega_j with individually addressed atoms.
    """
    if omega1 <= 0 or omega2 <= 0:
        raise DomainError("Rabi frequencies must be > 0")
    if abs(u) < 10 * max(omega1, omega2):
        warnings.warn(
            f"|u|={abs(u):.3g} < 10 Omega: blockade regime is marginal",
            stacklevel=2,
        )
    return PulseSchedule(
        (
            PulseSegment(duration=math.pi / omega1, omega1=omega1),
            PulseSegment(duration=TWO_PI / omega2, omega2=omega2),
            PulseSegment(duration=math.pi / omega1, omega1=omega1),
        )
    )


def adiabatic_schedule(
    omega0,
    delta0,
    duration,
    delta_min=None,
    omega_power=1.0,
    delta_power=1.0,
):
    """Symmetric smooth drive of both atoms, no individual addressing.

    Omega(t) ramps 0 -> Omega_0 -> 0 as sin^(2p); delta(t) dips from
    delta_0 down to delta_min at mid-pulse and back.  delta_min defaults
    to 0.02*delta0, low enough that the dressing gets strong mid-pulse but
    keeping the shifted detuning positive.
    """
    if omega0 <= 0 or delta0 <= 0:
        raise DomainError("omega0 and delta0 must be > 0")
    if delta_min is None:
        delta_min = 0.02 * delta0
    if omega0 * duration < 20:
        warnings.warn(
            f"Omega0*duration = {omega0 * duration:.3g} < 20: "
            "adiabaticity is questionable",
            stacklevel=2,
        )
    om = sin2(omega0, power=omega_power)
    de = sin2(delta_min - delta0, base=delta0, power=delta_power)
    return PulseSchedule(
        (PulseSegment(duration=duration, omega1=om, omega2=om, delta1=de, delta2=de),)
    )


# ---------------------------------------------------------------------------
# dressed-state analytics


def _sgn(x):
    return np.where(np.asarray(x) >= 0, 1.0, -1.0)


def dressed_energies(omega, delta, u):
    """Energies of the dressed levels connected to |gg> and |eg>.

    Returns (eps_gg, eps_eg, delta_tilde) with

        delta_tilde = delta - Omega^2/(4 delta + 2 u)
        eps_gg = sgn(dt) (|dt| - sqrt(dt^2 + 2 Omega^2))/2
        eps_eg = sgn(delta) (|delta| - sqrt(delta^2 + Omega^2))/2

    and sgn(0) := +1.  Accepts scalars or arrays.
    """
    omega = np.asarray(omega, dtype=float)
    delta = np.asarray(delta, dtype=float)
    den = 4.0 * delta + 2.0 * u
    scale = np.maximum(np.abs(delta), abs(u)) + np.abs(omega)
    if np.any(np.abs(den) <= 1e-12 * scale):
        bad = float(np.atleast_1d(delta)[np.argmin(np.abs(np.atleast_1d(den)))])
        raise DomainError(
            f"4*delta + 2*u vanishes (delta={bad:.6g}, u={u:.6g}): "
            "shifted detuning has a pole"
        )
    dt = delta - omega**2 / den
    eps_gg = _sgn(dt) * (np.abs(dt) - np.sqrt(dt**2 + 2.0 * omega**2)) / 2.0
    eps_eg = _sgn(delta) * (np.abs(delta) - np.sqrt(delta**2 + omega**2)) / 2.0
    if eps_gg.ndim == 0:
        return float(eps_gg), float(eps_eg), float(dt)
    return eps_gg, eps_eg, dt


@dataclass
class DressedCurves:
    """Dressed energies and accumulated entanglement phase on a time grid."""

    times: np.ndarray
    omega: np.ndarray
    delta: np.ndarray
    eps_gg: np.ndarray
    eps_eg: np.ndarray
    phi: np.ndarray

    @property
    def final_phase(self):
        return float(self.phi[-1])

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "omega", "delta", "eps_gg", "eps_eg", "phi"])
            for row in zip(
                self.times, self.omega, self.delta, self.eps_gg, self.eps_eg, self.phi
            ):
                writer.writerow([f"{v:.17g}" for v in row])


def _require_symmetric(schedule):
    for seg in schedule.segments:
        if seg.omega1.encode() != seg.omega2.encode() or seg.delta1.encode() != seg.delta2.encode():
            raise DomainError(
                "dressed analysis needs identical controls on both atoms"
            )


def entanglement_phase_integral(schedule, u, samples_per_segment=4096):
    """phi(t) = int_0^t (eps_gg - 2 eps_eg) dt' on a dense grid.

    Only defined for symmetric drives (the adiabatic variant).
    """
    from scipy.integrate import cumulative_trapezoid

    from .dynamics import sample_times

    _require_symmetric(schedule)
    t = sample_times(schedule, samples_per_segment)
    omega = np.empty_like(t)
    delta = np.empty_like(t)
    for i, ti in enumerate(t):
        om1, _, d1, _ = schedule.controls_at(ti)
        omega[i] = om1
        delta[i] = d1
    try:
        eps_gg, eps_eg, _ = dressed_energies(omega, delta, u)
    except DomainError as exc:
        raise DomainError(f"{exc} (inside schedule)") from exc
    phi = cumulative_trapezoid(eps_gg - 2.0 * eps_eg, t, initial=0.0)
    return DressedCurves(t, omega, delta, eps_gg, eps_eg, phi)


# ---------------------------------------------------------------------------
# gate analysis


@dataclass
class GateReport:
    """Per-basis phases and survivals plus the derived gate figures."""

    phi_gg: float
    phi_ge: float
    phi_eg: float
    phi_ee: float
    norm2_gg: float
    norm2_ge: float
    norm2_eg: float
    norm2_ee: float
    entanglement_phase: float  # in [0, 2*pi)
    loss: float
    loss_worst: float
    fidelity: float
    duration: float

    def to_text(self):
        lines = []
        for key, val in self.__dict__.items():
            lines.append(f"{key} = {val:.17g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        fields = {}
        for line in text.strip().splitlines():
            key, _, val = line.partition("=")
            fields[key.strip()] = float(val)
        return cls(**fields)


@dataclass
class GateAnalysis:
    report: GateReport
    trajectories: dict  # basis label -> Trajectory

    def phase_curve(self):
        """Unwrapped entanglement-phase curve from the four trajectories.

        Only meaningful when every computational amplitude keeps weight
        on its own basis state throughout (adiabatic regime).
        """
        t = self.trajectories["gg"].times
        curves = {}
        for label in _BASIS_INPUTS:
            amps = self.trajectories[label].amplitudes[:, INDEX[label]]
            curves[label] = np.unwrap(np.angle(amps))
        phi = curves["gg"] + curves["ee"] - curves["ge"] - curves["eg"]
        return t, phi


def analyze_gate(schedule, model, tol=1e-9, samples_per_segment=256):
    """Propagate the four computational basis states and score the gate.

    The entanglement phase is the single-qubit-stripped combination
    phi_gg + phi_ee - phi_ge - phi_eg reported in [0, 2*pi).  Loss and
    fidelity refer to the separable input (|g>+|e>)(|g>+|e>)/2, whose
    output follows from the four runs by linearity; the ideal reference
    carries the measured single-qubit phases, so fidelity penalizes loss
    and leakage but not trivial local phases.  loss_worst is the largest
    loss over the four basis inputs themselves.
    """
    trajectories = {}
    finals = {}
    for label in _BASIS_INPUTS:
        traj = propagate(
            TwoAtomState.from_label(label),
            schedule,
            model,
            tol=tol,
            samples_per_segment=samples_per_segment,
        )
        trajectories[label] = traj
        finals[label] = traj.final_state.amplitudes

    phases = {}
    norms = {}
    for label in _BASIS_INPUTS:
        amp = finals[label][INDEX[label]]
        phases[label] = float(np.angle(amp))
        norms[label] = float(abs(amp) ** 2)

    phi = (phases["gg"] + phases["ee"] - phases["ge"] - phases["eg"]) % TWO_PI

    psi_out = 0.5 * sum(finals[label] for label in _BASIS_INPUTS)
    qubit_pop = float(sum(abs(psi_out[idx]) ** 2 for idx in QUBIT_INDICES))
    loss = min(max(1.0 - qubit_pop, 0.0), 1.0)
    loss_worst = max(
        min(max(1.0 - sum(abs(finals[label][idx]) ** 2 for idx in QUBIT_INDICES), 0.0), 1.0)
        for label in _BASIS_INPUTS
    )

    ideal = np.zeros(9, dtype=np.complex128)
    for label in _BASIS_INPUTS:
        ideal[INDEX[label]] = 0.5 * np.exp(1j * phases[label])
    fidelity = float(abs(np.vdot(ideal, psi_out)) ** 2)

    report = GateReport(
        phi_gg=phases["gg"],
        phi_ge=phases["ge"],
        phi_eg=phases["eg"],
        phi_ee=phases["ee"],
        norm2_gg=norms["gg"],
        norm2_ge=norms["ge"],
        norm2_eg=norms["eg"],
        norm2_ee=norms["ee"],
        entanglement_phase=phi,
        loss=loss,
        loss_worst=loss_worst,
        fidelity=fidelity,
        duration=schedule.total_duration,
    )
    return GateAnalysis(report=report, trajectories=trajectories)


# ---------------------------------------------------------------------------
# calibration


@dataclass
class CalibrationResult:
    schedule: PulseSchedule
    parameter: float
    phi: float
    evaluations: int
    report: GateReport


def calibrate(
    schedule_family,
    phi_target,
    bracket,
    model,
    tol=1e-9,
    phi_tol=1e-6,
    samples_per_segment=64,
):
    """Root-find a schedule parameter so the entanglement phase hits
    phi_target (compared on the circle).

    schedule_family maps a scalar parameter to a PulseSchedule; bracket is
    (lo, hi) and must straddle the target, otherwise CalibrationError
    carries the endpoint phases.
    """
    evaluations = 0
    cache = {}

    def objective(p):
        nonlocal evaluations
        if p not in cache:
            evaluations += 1
            analysis = analyze_gate(
                schedule_family(p), model, tol=tol, samples_per_segment=samples_per_segment
            )
            cache[p] = analysis.report
        return wrap_phase(cache[p].entanglement_phase - phi_target)

    lo, hi = bracket
    f_lo, f_hi = objective(lo), objective(hi)
    if f_lo == 0.0:
        root = lo
    elif f_hi == 0.0:
        root = hi
    elif f_lo * f_hi > 0:
        raise CalibrationError(
            f"no sign change in bracket ({lo:.6g}, {hi:.6g}): "
            f"phase offsets {f_lo:.6g}, {f_hi:.6g}",
            bracket=bracket,
            values=(f_lo, f_hi),
        )
    else:
        root = brentq(objective, lo, hi, xtol=abs(hi - lo) * 1e-14, rtol=8.9e-16)

    achieved = objective(root)
    if abs(achieved) > phi_tol:
        raise CalibrationError(
            f"calibrated phase misses target by {achieved:.3g} rad "
            f"(tolerance {phi_tol:.3g})",
            bracket=bracket,
        )
    report = cache[root]
    return CalibrationResult(
        schedule=schedule_family(root),
        parameter=float(root),
        phi=report.entanglement_phase,
        evaluations=evaluations,
        report=report,
    )
