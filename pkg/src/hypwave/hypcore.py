"""Hyperbolic-plane primitives.

The plane carries the indefinite form ``d^2 = x^2 - y^2``. A point doubles as
the hyperbolic number ``x + h*y`` with ``h*h = 1``; in characteristic
coordinates ``s = x + y``, ``t = x - y`` the product is componentwise, which
makes hyperbolic rotations simple scalings ``s -> e^mu s``, ``t -> e^-mu t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import OutOfSector, SpacelikeSeparation

# |interval| below this multiple of eps * scale is treated as lying on the cone
_CONE_SLACK = 64.0 * np.finfo(float).eps


@dataclass(frozen=True)
class CharCoords:
    """Characteristic coordinates ``s = x + y``, ``t = x - y``."""

    s: float
    t: float

    def to_point(self) -> "HPoint":
        return HPoint((self.s + self.t) / 2.0, (self.s - self.t) / 2.0)


@dataclass(frozen=True)
class HPoint:
    """A point of the hyperbolic plane, also usable as a hyperbolic number."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates ({self.x}, {self.y})")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))

    @classmethod
    def from_char(cls, s: float, t: float) -> "HPoint":
        return cls((s + t) / 2.0, (s - t) / 2.0)

    @property
    def s(self) -> float:
        return self.x + self.y

    @property
    def t(self) -> float:
        return self.x - self.y

    def char(self) -> CharCoords:
        return CharCoords(self.s, self.t)

    def as_tuple(self) -> Tuple[float, float]:
        return (self.x, self.y)

    # hyperbolic-number arithmetic
    def __add__(self, other: "HPoint") -> "HPoint":
        return HPoint(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "HPoint") -> "HPoint":
        return HPoint(self.x - other.x, self.y - other.y)

    def __neg__(self) -> "HPoint":
        return HPoint(-self.x, -self.y)

    def __mul__(self, other):
        if isinstance(other, HPoint):
            return HPoint(self.x * other.x + self.y * other.y,
                          self.x * other.y + self.y * other.x)
        return HPoint(self.x * other, self.y * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, HPoint):
            m = other.modulus2()
            if m == 0.0:
                raise ZeroDivisionError("division by a divisor of zero (point on the light cone)")
            return self * other.conj() * (1.0 / m)
        return HPoint(self.x / other, self.y / other)

    def conj(self) -> "HPoint":
        return HPoint(self.x, -self.y)

    def modulus2(self) -> float:
        """``z * conj(z) = x^2 - y^2`` (may be negative)."""
        return self.x * self.x - self.y * self.y


ORIGIN = HPoint(0.0, 0.0)


def squared_interval(a: HPoint, b: HPoint) -> float:
    """``(a.x - b.x)^2 - (a.y - b.y)^2``, sign preserved."""
    dx = a.x - b.x
    dy = a.y - b.y
    # factored form is exact on the cone and better conditioned near it
    return (dx - dy) * (dx + dy)


def hdistance(a: HPoint, b: HPoint) -> float:
    """Hyperbolic distance between timelike-separated points.

    Raises
    ------
    SpacelikeSeparation
        If the squared interval is negative beyond rounding.
    """
    d2 = squared_interval(a, b)
    if d2 < 0.0:
        scale = (a.x - b.x) ** 2 + (a.y - b.y) ** 2
        if -d2 > _CONE_SLACK * scale:
            raise SpacelikeSeparation(
                f"points {a.as_tuple()} and {b.as_tuple()} are spacelike separated "
                f"(squared interval {d2:.6g})")
        return 0.0
    return math.sqrt(d2)


def hrotate(p: HPoint, mu: float) -> HPoint:
    """Hyperbolic rotation (Lorentz boost) about the origin by angle ``mu``."""
    c, s = math.cosh(mu), math.sinh(mu)
    return HPoint(p.x * c + p.y * s, p.x * s + p.y * c)


def hangle_of(p: HPoint) -> float:
    """Hyperbolic angle of the ray from the origin through ``p`` (right sector only)."""
    if not p.x > abs(p.y):
        raise OutOfSector(f"point {p.as_tuple()} is not in the right sector x > |y|")
    # 0.5*log(s/t) avoids atanh's loss of precision near the cone
    return 0.5 * math.log(p.s / p.t)


def carnot_r2(p: float, q: float, phi):
    """Hyperbolic law of cosines ``p^2 + q^2 - 2 p q cosh(phi)``.

    Evaluated in the factored form ``(p - q e^phi)(p - q e^-phi)``, which is
    algebraically identical. Accepts arrays for ``phi``.
    """
    if p <= 0 or q <= 0:
        raise ValueError("p and q must be positive")
    phi = np.asarray(phi, dtype=float)
    out = (p - q * np.exp(phi)) * (p - q * np.exp(-phi))
    return float(out) if out.ndim == 0 else out


# --- local n, tau frames -------------------------------------------------------

def frame_normal(sigma, upward: bool):
    """Components ``(dx/dn, dy/dn)`` of the hyperbolic normal for a frame angle ``sigma``."""
    sign = 1.0 if upward else -1.0
    return sign * np.cosh(sigma), sign * np.sinh(sigma)


def frame_tangent(sigma, upward: bool):
    """Components ``(dx/dtau, dy/dtau)`` of the unit tangent for a frame angle ``sigma``."""
    sign = 1.0 if upward else -1.0
    return sign * np.sinh(sigma), sign * np.cosh(sigma)


@dataclass(frozen=True)
class LocalFrame:
    """Moving frame at a curve point ``origin``.

    ``tau`` is tangent to the curve and makes hyperbolic angle ``sigma`` with
    the local y axis; ``n`` makes the same angle with the local x axis, so the
    two axes are mirror images across the bisectors. ``upward`` selects the
    ``+`` sign of the transformation (tau pointing up); downward traversal uses
    ``-`` and flips both axes.
    """

    origin: HPoint
    sigma: float
    upward: bool = True

    @property
    def sign(self) -> float:
        return 1.0 if self.upward else -1.0

    def jacobian(self) -> np.ndarray:
        """``[[dx/dn, dx/dtau], [dy/dn, dy/dtau]]``."""
        xn, yn = frame_normal(self.sigma, self.upward)
        xt, yt = frame_tangent(self.sigma, self.upward)
        return np.array([[xn, xt], [yn, yt]])

    def from_local(self, n: float, tau: float) -> HPoint:
        c, s = math.cosh(self.sigma), math.sinh(self.sigma)
        k = self.sign
        return HPoint(self.origin.x + k * (n * c + tau * s),
                      self.origin.y + k * (n * s + tau * c))

    def to_local(self, p: HPoint) -> Tuple[float, float]:
        c, s = math.cosh(self.sigma), math.sinh(self.sigma)
        k = self.sign
        dx = p.x - self.origin.x
        dy = p.y - self.origin.y
        return k * (dx * c - dy * s), k * (-dx * s + dy * c)


def to_local(p: HPoint, frame: LocalFrame) -> Tuple[float, float]:
    return frame.to_local(p)


def from_local(n: float, tau: float, frame: LocalFrame) -> HPoint:
    return frame.from_local(n, tau)


def mirror_bisectors(vx, vy):
    """Reflect a vector across the bisector ``y = x``.

    Maps a frame's normal onto its tangent and back, i.e. hyperbolic
    orthogonality of ``n`` and ``tau``.
    """
    return vy, vx
