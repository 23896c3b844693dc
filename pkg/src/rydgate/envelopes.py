"""Named control envelopes for pulse segments.

Each envelope maps a local time tau in [0, T] (T = segment duration) to a
control value in rad/s.  The kernel evaluates envelopes from a compact
(kind, p0, p1, p2) encoding so the compiled and pure-Python integrators
share one definition.
"""

import math
from dataclasses import dataclass

from .errors import DomainError

KIND_CONST = 0
KIND_SIN2 = 1
KIND_LINEAR = 2


@dataclass(frozen=True)
class Envelope:
    kind: int
    p0: float = 0.0
    p1: float = 0.0
    p2: float = 1.0

    def __call__(self, tau, duration):
        if self.kind == KIND_CONST:
            return self.p0
        if self.kind == KIND_SIN2:
            s = math.sin(math.pi * tau / duration) ** 2
            return self.p0 + self.p1 * s**self.p2
        if self.kind == KIND_LINEAR:
            return self.p0 + (self.p1 - self.p0) * tau / duration
        raise DomainError(f"unknown envelope kind {self.kind}")

    def encode(self):
        return (self.kind, self.p0, self.p1, self.p2)


def const(value):
    return Envelope(KIND_CONST, float(value))


def sin2(amplitude, base=0.0, power=1.0):
    """base + amplitude * sin(pi t/T)^(2*power); peaks at mid-segment."""
    if power <= 0:
        raise DomainError("sin2 power must be > 0")
    return Envelope(KIND_SIN2, float(base), float(amplitude), float(power))


def linear(start, end):
    return Envelope(KIND_LINEAR, float(start), float(end))


def as_envelope(value):
    """Coerce a plain number to a constant envelope."""
    if isinstance(value, Envelope):
        return value
    return const(float(value))
