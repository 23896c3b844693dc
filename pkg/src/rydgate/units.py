"""Physical constants, unit-tagged lengths and the frequency convention.

All Hamiltonian entries in this package are plain angular frequencies
(rad/s); energies are divided by hbar at the boundary where SI constants
enter.  Quoted experimental numbers like "u = 1.8 GHz" are taken to be
angular frequencies, i.e. u = 1.8e9 rad/s.  The alternative (cyclic)
reading multiplies every frequency by 2*pi and leaves all dimensionless
predictions of this package unchanged; the flag on PhysicalContext records
which reading produced the stored numbers.
"""

from dataclasses import dataclass, field

from scipy.constants import physical_constants, e as _e, epsilon_0 as _eps0, hbar as _hbar

from .errors import DomainError

BOHR_RADIUS = physical_constants["Bohr radius"][0]

TWO_PI = 6.283185307179586


@dataclass(frozen=True)
class Constants:
    """SI constants used by the atomic-structure formulas."""

    e: float = _e
    a0: float = BOHR_RADIUS
    eps0: float = _eps0
    hbar: float = _hbar

    def __post_init__(self):
        for name in ("e", "a0", "eps0", "hbar"):
            if getattr(self, name) <= 0:
                raise DomainError(f"constant {name} must be positive")


@dataclass(frozen=True)
class PhysicalContext:
    """Electric field plus the constants and frequency convention in force."""

    electric_field: float = 0.0  # V/m
    constants: Constants = field(default_factory=Constants)
    frequency_convention: str = "angular"

    def __post_init__(self):
        if self.electric_field < 0:
            raise DomainError("electric_field must be >= 0")
        if self.frequency_convention not in ("angular", "cyclic"):
            raise DomainError("frequency_convention must be 'angular' or 'cyclic'")


@dataclass(frozen=True)
class Length:
    """A length tagged with its unit ('m' or 'a0')."""

    value: float
    unit: str = "m"

    def __post_init__(self):
        if self.unit not in ("m", "a0"):
            raise DomainError(f"unknown length unit {self.unit!r}")

    def to_meters(self, a0=BOHR_RADIUS):
        if self.unit == "m":
            return self.value
        return self.value * a0


def meters(value):
    return Length(value, "m")


def bohr(value):
    return Length(value, "a0")


def mhz_to_rad_per_s(value_mhz, angular=True):
    """Convert a frequency quoted in MHz to internal rad/s."""
    f = value_mhz * 1e6
    return f if angular else TWO_PI * f
