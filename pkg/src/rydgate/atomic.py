"""Closed-form atomic structure: linear Stark shifts, permanent dipole
moments and the diagonal dipole-dipole interaction of two polarized atoms
on the field axis.

All returned energies are angular frequencies (rad/s); dipole moments are
in units of e*a0.
"""

import warnings
from dataclasses import dataclass

from .errors import DomainError
from .units import Length, PhysicalContext


@dataclass(frozen=True)
class StarkState:
    """A hydrogenic Stark eigenstate |n, q, m> with optional quantum defect."""

    n: int
    q: int
    m: int
    quantum_defect: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"principal quantum number n={self.n} must be >= 1")
        if abs(self.m) > self.n - 1:
            raise DomainError(f"|m|={abs(self.m)} exceeds n-1={self.n - 1}")
        qmax = self.n - 1 - abs(self.m)
        if abs(self.q) > qmax or (qmax - self.q) % 2 != 0:
            raise DomainError(
                f"q={self.q} not in {{{qmax}, {qmax - 2}, ..., -{qmax}}} "
                f"for n={self.n}, m={self.m}"
            )
        if self.quantum_defect < 0:
            raise DomainError("quantum_defect must be >= 0")
        if self.nu <= 0:
            raise DomainError(f"effective quantum number nu={self.nu} must be > 0")

    @property
    def nu(self):
        """Effective quantum number (equals n for hydrogen)."""
        return self.n - self.quantum_defect


@dataclass(frozen=True)
class InteractionGeometry:
    """Two atoms on the z (field) axis: separation R and wavepacket width a."""

    R: Length
    a: Length = Length(0.0, "m")

    def __post_init__(self):
        if self.R.value <= 0:
            raise DomainError("separation R must be > 0")
        if self.a.value < 0:
            raise DomainError("wavepacket width a must be >= 0")
        if self.eta >= 1:
            raise DomainError(f"eta = a/R = {self.eta} must be < 1")

    @property
    def eta(self):
        return self.a.to_meters() / self.R.to_meters()


def dipole_moment(s: StarkState) -> float:
    """Permanent dipole moment along z, in units of e*a0: (3/2)*nu*q."""
    return 1.5 * s.nu * s.q


def stark_shift(s: StarkState, ctx: PhysicalContext, ingris_teller_field=None) -> float:
    """Linear Stark shift 3*nu*q*e*a0*E/(2*hbar) in rad/s.

    `ingris_teller_field` is an optional caller-supplied validity threshold
    (V/m) above which adjacent-n mixing is no longer negligible; exceeding
    it only warns, since there is no sharp formula for the limit.
    """
    if ingris_teller_field is not None and ctx.electric_field > ingris_teller_field:
        warnings.warn(
            f"field {ctx.electric_field} V/m exceeds the supplied "
            f"Ingris-Teller threshold {ingris_teller_field} V/m; "
            "n-manifold mixing may not be negligible",
            stacklevel=2,
        )
    c = ctx.constants
    return 1.5 * s.nu * s.q * c.e * c.a0 * ctx.electric_field / c.hbar


def dipole_dipole_energy(
    s1: StarkState, s2: StarkState, geom: InteractionGeometry, ctx: PhysicalContext
) -> float:
    """Diagonal dipole-dipole shift u(R) for both dipoles along z, in rad/s.

    For atoms separated along the dipole axis the angular factor is -2, so
    u = -2 mu1 mu2 / (4 pi eps0 R^3 hbar).
    """
    c = ctx.constants
    r = geom.R.to_meters(c.a0)
    if r == 0:
        raise DomainError("R = 0: dipole-dipole interaction is singular")
    mu1 = dipole_moment(s1) * c.e * c.a0
    mu2 = dipole_moment(s2) * c.e * c.a0
    return -2.0 * mu1 * mu2 / (4.0 * 3.141592653589793 * c.eps0 * r**3 * c.hbar)


def dipole_dipole_energy_extremal(
    n: int, R: Length, ctx: PhysicalContext, quantum_defect: float = 0.0
) -> float:
    """Closed form for two identical extremal states |n, n-1, 0>:

        u(R) = -9 [nu (nu-1)]^2 (a0/R)^3 e^2/(8 pi eps0 a0) / hbar

    Kept as an algebraically independent path from dipole_dipole_energy.
    """
    c = ctx.constants
    r = R.to_meters(c.a0)
    if r == 0:
        raise DomainError("R = 0: dipole-dipole interaction is singular")
    nu = n - quantum_defect
    rydberg_like = c.e**2 / (8.0 * 3.141592653589793 * c.eps0 * c.a0)
    return -9.0 * (nu * (nu - 1.0)) ** 2 * (c.a0 / r) ** 3 * rydberg_like / c.hbar


def dipole_force(u: float, R: Length, a0=None) -> float:
    """Mechanical force F = 3 u(R)/R on the atoms (rad/s per meter)."""
    r = R.to_meters() if a0 is None else R.to_meters(a0)
    if r == 0:
        raise DomainError("R = 0: force is singular")
    return 3.0 * u / r
