"""Qubit states and binary measurements as real 3-vectors.

Pure states and rank-1 projective effects live on the unit sphere; the
weighted signed sums of measurement axes used by encoding strategies
("effective vectors") live inside the ball.  Everything downstream is
planar, so no complex amplitudes appear anywhere.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

UNIT_NORM_TOL = 1e-12


def _parse_bit_pair(a) -> tuple[int, int]:
    """Accept '01', (0, 1), [0, 1] and return the two bits."""
    if isinstance(a, str):
        if len(a) != 2 or any(ch not in "01" for ch in a):
            raise ValidationError(f"expected a 2-bit string, got {a!r}")
        return int(a[0]), int(a[1])
    bits = tuple(int(b) for b in a)
    if len(bits) != 2 or any(b not in (0, 1) for b in bits):
        raise ValidationError(f"expected a pair of bits, got {a!r}")
    return bits


@dataclass(frozen=True)
class BlochVector:
    """A real 3-vector; unit norm for states/effects, norm <= 1 otherwise."""

    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def dot(self, other: "BlochVector") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def scaled(self, factor: float) -> "BlochVector":
        return BlochVector(factor * self.x, factor * self.y, factor * self.z)

    def normalized(self) -> "BlochVector":
        n = self.norm()
        if n == 0.0:
            raise ValidationError("cannot normalize the zero vector")
        return self.scaled(1.0 / n)

    def is_unit(self, tol: float = UNIT_NORM_TOL) -> bool:
        return abs(self.norm() - 1.0) <= tol

    @classmethod
    def from_array(cls, arr) -> "BlochVector":
        x, y, z = (float(v) for v in arr)
        return cls(x, y, z)

    @classmethod
    def unit(cls, x: float, y: float, z: float) -> "BlochVector":
        """Construct a vector that must already be unit norm (no silent
        renormalization; out-of-tolerance inputs are caller bugs)."""
        v = cls(x, y, z)
        if not v.is_unit():
            raise ValidationError(f"vector {v} has norm {v.norm():.17g}, not 1")
        return v


def _require_unit(v: BlochVector, role: str) -> None:
    if not v.is_unit():
        raise ValidationError(
            f"{role} must have unit norm within {UNIT_NORM_TOL}; "
            f"got norm {v.norm():.17g}"
        )


class MeasurementKind(enum.Enum):
    RANK1 = "rank1"
    ALL_ZERO = "all_zero"   # effect pair {I, 0}: outcome 0 certain
    ALL_ONE = "all_one"     # effect pair {0, I}: outcome 1 certain


@dataclass(frozen=True)
class Measurement:
    """A binary qubit measurement: rank-1 projective pair or a trivial pair.

    For the rank-1 kind, ``axis`` is the Bloch vector of the outcome-0
    effect; the outcome-1 effect is the antipodal vector.
    """

    kind: MeasurementKind
    axis: BlochVector | None = None

    def __post_init__(self):
        if self.kind is MeasurementKind.RANK1:
            if self.axis is None:
                raise ValidationError("rank-1 measurement requires an axis")
            _require_unit(self.axis, "rank-1 measurement axis")
        elif self.axis is not None:
            raise ValidationError("trivial measurements carry no axis")

    @classmethod
    def rank1(cls, axis: BlochVector) -> "Measurement":
        return cls(MeasurementKind.RANK1, axis)

    @classmethod
    def trivial_zero(cls) -> "Measurement":
        return cls(MeasurementKind.ALL_ZERO)

    @classmethod
    def trivial_one(cls) -> "Measurement":
        return cls(MeasurementKind.ALL_ONE)


def born_probability(state: BlochVector, m: Measurement, outcome: int) -> float:
    """Outcome probability of a binary measurement on a pure qubit state.

    For a rank-1 pair with outcome-0 axis ``v`` this is
    ``(1 + r . (-1)^b v) / 2``; the trivial pairs return 0 or 1 regardless
    of the state.
    """
    if outcome not in (0, 1):
        raise ValidationError(f"outcome must be 0 or 1, got {outcome!r}")
    _require_unit(state, "state vector")
    if m.kind is MeasurementKind.ALL_ZERO:
        return 1.0 if outcome == 0 else 0.0
    if m.kind is MeasurementKind.ALL_ONE:
        return 1.0 if outcome == 1 else 0.0
    sign = 1.0 if outcome == 0 else -1.0
    return 0.5 * (1.0 + sign * state.dot(m.axis))


def effective_vector(a, k2: int, eps2: float, v0: BlochVector,
                     v1: BlochVector) -> BlochVector:
    """Signed sum of the measurement axes weighted by the conditional
    question probabilities.

    With ``w0 = 1/2 + (-1)^k2 * eps2`` and ``w1 = 1 - w0`` this returns
    ``w0 * (-1)^a0 * v0 + w1 * (-1)^a1 * v1``.  The best encoding for input
    ``a`` points along this vector.
    """
    a0, a1 = _parse_bit_pair(a)
    if k2 not in (0, 1):
        raise ValidationError(f"k2 must be a bit, got {k2!r}")
    if not 0.0 <= eps2 < 0.5:
        raise ValidationError(f"eps2 must lie in [0, 0.5), got {eps2!r}")
    _require_unit(v0, "measurement axis v0")
    _require_unit(v1, "measurement axis v1")
    w0 = 0.5 + (-1.0) ** k2 * eps2
    w1 = 1.0 - w0
    s0 = (-1.0) ** a0 * w0
    s1 = (-1.0) ** a1 * w1
    return BlochVector(
        s0 * v0.x + s1 * v1.x,
        s0 * v0.y + s1 * v1.y,
        s0 * v0.z + s1 * v1.z,
    )
