"""Two-atom internal dynamics.

Each atom has levels g, e, r.  The nine two-atom basis states are ordered

    gg, ge, gr, eg, ee, er, rg, re, rr

(index = 3*i + j with i the state of atom 1 and j of atom 2, g=0, e=1,
r=2).  This ordering is the single source of truth; everything else does
index arithmetic against it.

The Hamiltonian is

    H = u |rr><rr| + sum_j [ (delta_j - i gamma) P_r^(j)
                             - Omega_j/2 (|g><r|_j + h.c.) ]

with all symbols angular frequencies; |e> couples to nothing.  The loss
term makes H non-Hermitian and the squared norm of the state decays; no
quantum jumps are modelled.
"""

import csv
from dataclasses import dataclass

import numpy as np

from . import kernel
from .envelopes import Envelope, as_envelope
from .errors import DomainError, IntegrationError

BASIS = ("gg", "ge", "gr", "eg", "ee", "er", "rg", "re", "rr")
INDEX = {label: i for i, label in enumerate(BASIS)}
QUBIT_INDICES = (INDEX["gg"], INDEX["ge"], INDEX["eg"], INDEX["ee"])
DIM = 9

G, E, R = 0, 1, 2


def _structure_matrices():
    n1 = np.zeros((DIM, DIM))
    n2 = np.zeros((DIM, DIM))
    x1 = np.zeros((DIM, DIM))
    x2 = np.zeros((DIM, DIM))
    prr = np.zeros((DIM, DIM))
    for i in range(3):
        for j in range(3):
            idx = 3 * i + j
            if i == R:
                n1[idx, idx] = 1.0
            if j == R:
                n2[idx, idx] = 1.0
            if i == R and j == R:
                prr[idx, idx] = 1.0
            if i == G:
                x1[idx, 3 * R + j] = 1.0
                x1[3 * R + j, idx] = 1.0
            if j == G:
                x2[idx, 3 * i + R] = 1.0
                x2[3 * i + R, idx] = 1.0
    return n1, n2, x1, x2, prr


N1, N2, X1, X2, P_RR = _structure_matrices()


@dataclass(frozen=True)
class InternalModel:
    """Interaction shift u and excited-state loss rate gamma (rad/s)."""

    u: float
    gamma: float = 0.0

    def __post_init__(self):
        if self.gamma < 0:
            raise DomainError("gamma must be >= 0")


@dataclass(frozen=True)
class PulseSegment:
    """One piecewise interval of the controls (Omega_1, Omega_2, delta_1, delta_2).

    Plain numbers are treated as constant envelopes.
    """

    duration: float
    omega1: Envelope = 0.0
    omega2: Envelope = 0.0
    delta1: Envelope = 0.0
    delta2: Envelope = 0.0

    def __post_init__(self):
        if not (self.duration > 0 and np.isfinite(self.duration)):
            raise DomainError(f"segment duration {self.duration} must be > 0")
        for name in ("omega1", "omega2", "delta1", "delta2"):
            object.__setattr__(self, name, as_envelope(getattr(self, name)))

    def controls_at(self, tau):
        d = self.duration
        return (
            self.omega1(tau, d),
            self.omega2(tau, d),
            self.delta1(tau, d),
            self.delta2(tau, d),
        )


@dataclass(frozen=True)
class PulseSchedule:
    segments: tuple

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise DomainError("schedule needs at least one segment")
        object.__setattr__(self, "segments", segs)

    @property
    def total_duration(self):
        return sum(s.duration for s in self.segments)

    def boundaries(self):
        """Cumulative segment edge times, starting at 0."""
        edges = [0.0]
        for s in self.segments:
            edges.append(edges[-1] + s.duration)
        return np.array(edges)

    def controls_at(self, t):
        """Control tuple at absolute time t (right-continuous at edges)."""
        t0 = 0.0
        for s in self.segments:
            if t <= t0 + s.duration or s is self.segments[-1]:
                return s.controls_at(min(max(t - t0, 0.0), s.duration))
            t0 += s.duration
        raise DomainError(f"t={t} outside schedule")


@dataclass
class TwoAtomState:
    """Nine complex amplitudes over the fixed basis order."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=np.complex128)
        if amp.shape != (DIM,):
            raise DomainError(f"need {DIM} amplitudes, got shape {amp.shape}")
        self.amplitudes = amp

    @classmethod
    def from_label(cls, label):
        amp = np.zeros(DIM, dtype=np.complex128)
        amp[INDEX[label]] = 1.0
        return cls(amp)

    @classmethod
    def qubit_superposition(cls):
        """(|g> + |e>)(|g> + |e>)/2, the reference input for loss/fidelity."""
        amp = np.zeros(DIM, dtype=np.complex128)
        for idx in QUBIT_INDICES:
            amp[idx] = 0.5
        return cls(amp)

    def norm_squared(self):
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def overlap(self, other):
        return complex(np.vdot(other.amplitudes, self.amplitudes))


def build_hamiltonian(model: InternalModel, omega1, omega2, delta1, delta2):
    """Assemble the 9x9 (generally non-Hermitian) Hamiltonian matrix."""
    h = (
        model.u * P_RR
        + (delta1 - 1j * model.gamma) * N1
        + (delta2 - 1j * model.gamma) * N2
        - 0.5 * omega1 * X1
        - 0.5 * omega2 * X2
    )
    return h.astype(np.complex128)


@dataclass
class Trajectory:
    """State samples over a schedule: times (nt,), amplitudes (nt, 9)."""

    times: np.ndarray
    amplitudes: np.ndarray

    @property
    def final_state(self):
        return TwoAtomState(self.amplitudes[-1].copy())

    def norm_squared(self):
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)

    def write_csv(self, path):
        """t, Re/Im of all nine amplitudes, squared norm."""
        norms = self.norm_squared()
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            header = ["t"]
            for label in BASIS:
                header += [f"re_{label}", f"im_{label}"]
            header.append("norm2")
            writer.writerow(header)
            for i, t in enumerate(self.times):
                row = [f"{t:.17g}"]
                for a in self.amplitudes[i]:
                    row += [f"{a.real:.17g}", f"{a.imag:.17g}"]
                row.append(f"{norms[i]:.17g}")
                writer.writerow(row)


def _kernel_arrays(schedule, model):
    a = (model.u * P_RR - 1j * model.gamma * (N1 + N2)).astype(np.complex128)
    b = np.stack([-0.5 * X1, -0.5 * X2, N1, N2]).astype(np.complex128)
    ns = len(schedule.segments)
    durations = np.array([s.duration for s in schedule.segments])
    kinds = np.zeros((ns, 4), dtype=np.int32)
    params = np.zeros((ns, 4, 3))
    for i, seg in enumerate(schedule.segments):
        for k, env in enumerate((seg.omega1, seg.omega2, seg.delta1, seg.delta2)):
            kind, p0, p1, p2 = env.encode()
            kinds[i, k] = kind
            params[i, k] = (p0, p1, p2)
    return a, b, durations, kinds, params


def _check_tol(tol):
    if not 1e-14 < tol < 1e-3:
        raise DomainError(f"tol={tol} outside (1e-14, 1e-3)")


def sample_times(schedule, samples_per_segment):
    """Uniform samples inside every segment, always including the edges."""
    edges = schedule.boundaries()
    times = [np.array([0.0])]
    for i in range(len(edges) - 1):
        times.append(np.linspace(edges[i], edges[i + 1], samples_per_segment + 1)[1:])
    return np.concatenate(times)


def propagate(state, schedule, model, tol=1e-9, t_eval=None, samples_per_segment=256):
    """Solve i d|psi>/dt = H(t)|psi> over the schedule.

    Sampling happens at `t_eval` (absolute times, must lie inside the
    schedule) merged with the segment boundaries, or at a uniform grid of
    `samples_per_segment` points per segment when t_eval is None.  Returns
    a Trajectory whose last sample is the final state.
    """
    _check_tol(tol)
    total = schedule.total_duration
    if t_eval is None:
        t_eval = sample_times(schedule, samples_per_segment)
    else:
        t_eval = np.asarray(t_eval, dtype=float)
        if t_eval.size and (t_eval.min() < 0 or t_eval.max() > total * (1 + 1e-12)):
            raise DomainError("t_eval outside the schedule")
        t_eval = np.unique(np.concatenate([t_eval, schedule.boundaries()]))

    a, b, durations, kinds, params = _kernel_arrays(schedule, model)
    out, status, t_reached = kernel.propagate_schedule(
        a, b, durations, kinds, params, state.amplitudes, t_eval, tol, tol * 1e-6
    )
    if status != 0:
        raise IntegrationError(
            f"step-size underflow at t={t_reached:.6e} s", t_reached=t_reached
        )
    return Trajectory(times=t_eval, amplitudes=out)
