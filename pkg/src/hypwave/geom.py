"""Configuration geometry around an equilateral data hyperbola.

The data curve ``gamma`` is the right arm ``x^2 - y^2 = p^2``. For a point ``Q``
strictly between the origin and ``gamma`` the characteristics through ``Q``
cut ``gamma`` at ``P1`` (lower) and ``P2`` (upper); the characteristics back
from ``P1``, ``P2`` meet at the symmetric point ``Q*``. Auxiliary hyperbolas
``I`` (centre ``Q``, semi-diameter ``rho``) and ``I*`` (centre ``Q*``,
semi-diameter ``rho* = rho p / q``) meet on ``gamma``.

All angles (``phi``, ``theta``, ``theta*``) are measured from the line OQ;
the rotation by ``alpha`` is applied only when Cartesian points are produced.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import (ConfigError, DegenerateConfig, OutOfSector, RhoTooLarge,
                     SpacelikeSeparation)
from .hypcore import ORIGIN, HPoint, hangle_of, hdistance, squared_interval


class Opening(enum.Enum):
    RIGHT = "+"
    LEFT = "-"


@dataclass(frozen=True)
class Hyperbola:
    """One arm of an equilateral hyperbola, the locus at fixed distance from ``center``."""

    center: HPoint
    semidiameter: float
    orientation: Opening = Opening.RIGHT

    def __post_init__(self):
        if not self.semidiameter > 0:
            raise ValueError(f"semidiameter must be positive, got {self.semidiameter}")

    @property
    def sign(self) -> float:
        return 1.0 if self.orientation is Opening.RIGHT else -1.0

    def coords(self, angle, alpha: float = 0.0):
        """Vectorised ``(x, y)`` of the points at the given angles."""
        a = np.asarray(angle, dtype=float) + alpha
        k = self.sign * self.semidiameter
        return self.center.x + k * np.cosh(a), self.center.y + k * np.sinh(a)

    def tangent(self, angle, alpha: float = 0.0):
        """Derivative ``(dx/dangle, dy/dangle)``."""
        a = np.asarray(angle, dtype=float) + alpha
        k = self.sign * self.semidiameter
        return k * np.sinh(a), k * np.cosh(a)

    def increasing_is_upward(self) -> bool:
        """Whether increasing the angle moves up the arm."""
        return self.orientation is Opening.RIGHT


def point_at(h: Hyperbola, angle: float, alpha: float = 0.0) -> HPoint:
    x, y = h.coords(angle, alpha)
    return HPoint(float(x), float(y))


def _sector_distance(Q: HPoint) -> float:
    d2 = squared_interval(Q, ORIGIN)
    if d2 <= 0.0 and abs(Q.x) == abs(Q.y):
        raise DegenerateConfig(f"point {Q.as_tuple()} lies on the light cone of the origin")
    if not Q.x > abs(Q.y):
        raise OutOfSector(f"point {Q.as_tuple()} is not in the right sector x > |y|")
    q = math.sqrt(d2)
    if q == 0.0:
        raise DegenerateConfig(f"point {Q.as_tuple()} is at zero distance from the origin")
    return q


def symmetric_point(Q: HPoint, p: float) -> HPoint:
    """Image of ``Q`` under inversion in the hyperbola of semi-diameter ``p``."""
    q = _sector_distance(Q)
    k = (p / q) ** 2
    return HPoint(k * Q.x, k * Q.y)


def dependence_points(Q: HPoint, p: float) -> Tuple[HPoint, HPoint]:
    """Intersections ``(P1, P2)`` of the characteristics through ``Q`` with the data curve.

    ``P1`` shares ``s`` with ``Q`` (lower point), ``P2`` shares ``t`` (upper point).
    """
    q = _sector_distance(Q)
    if q >= p:
        raise ConfigError(f"q ≥ p: Q outside hyperbola (q = {q:.6g}, p = {p:.6g})")
    sQ, tQ = Q.s, Q.t
    return HPoint.from_char(sQ, p * p / sQ), HPoint.from_char(p * p / tQ, tQ)


@dataclass(frozen=True)
class RhoAngles:
    rho: float
    rhostar: float
    phi_i: float
    theta_i: float
    theta_istar: float

    @property
    def w(self) -> float:
        """Extrapolation variable ``1 / theta_i``."""
        return 1.0 / self.theta_i


@dataclass(frozen=True)
class DependenceConfig:
    """Complete geometric configuration for a data hyperbola and an interior point."""

    p: float
    Q: HPoint
    q: float
    alpha: float
    Qstar: HPoint
    P1: HPoint
    P2: HPoint
    A_p: float
    qstar: float

    @classmethod
    def build(cls, Q: HPoint, p: float) -> "DependenceConfig":
        if not (math.isfinite(p) and p > 0):
            raise ConfigError(f"p must be positive and finite, got {p}")
        q = _sector_distance(Q)
        if q >= p:
            raise ConfigError(f"q ≥ p: Q outside hyperbola (q = {q:.6g}, p = {p:.6g})")
        P1, P2 = dependence_points(Q, p)
        return cls(p=float(p), Q=Q, q=q, alpha=hangle_of(Q), Qstar=symmetric_point(Q, p),
                   P1=P1, P2=P2, A_p=q / p, qstar=p * p / q)

    # characteristic values; Q* uses the exact reciprocal form
    @property
    def sQ(self) -> float:
        return self.Q.s

    @property
    def tQ(self) -> float:
        return self.Q.t

    @property
    def sQstar(self) -> float:
        return self.p * self.p / self.Q.t

    @property
    def tQstar(self) -> float:
        return self.p * self.p / self.Q.s

    @property
    def phi2(self) -> float:
        """Angle of ``P2`` from OQ; ``cosh(phi2) = (p^2 + q^2) / (2 p q)``."""
        return math.log(self.p / self.q)

    def gamma(self) -> Hyperbola:
        return Hyperbola(ORIGIN, self.p, Opening.RIGHT)

    def hyperbola_I(self, rho: float) -> Hyperbola:
        return Hyperbola(self.Q, rho, Opening.RIGHT)

    def hyperbola_Istar(self, rho: float) -> Hyperbola:
        return Hyperbola(self.Qstar, rho * self.p / self.q, Opening.LEFT)

    def rho_angles(self, rho: float) -> RhoAngles:
        return rho_angles(self, rho)

    def check_arc(self, phi_a: float, phi_b: float) -> None:
        """Require ``P1`` and ``P2`` to be interior to the data arc between angles ``phi_a < phi_b``.

        Angles are measured from the x axis.
        """
        a1 = hangle_of(self.P1)
        a2 = hangle_of(self.P2)
        if not (phi_a < a1 and a2 < phi_b):
            raise ConfigError(
                f"dependence points at angles ({a1:.6g}, {a2:.6g}) are not interior "
                f"to the arc ({phi_a:.6g}, {phi_b:.6g})")


def _intersection_root(p: float, q: float, rho: float) -> float:
    # sqrt(((p-q)^2 - rho^2)((p+q)^2 - rho^2)); common to all three angle formulas
    return math.sqrt(((p - q) ** 2 - rho * rho) * ((p + q) ** 2 - rho * rho))


def rho_angles(cfg: DependenceConfig, rho: float) -> RhoAngles:
    """Half-ranges of ``phi``, ``theta`` and ``theta*`` between the intersection points."""
    p, q = cfg.p, cfg.q
    if not rho > 0:
        raise RhoTooLarge(f"rho must be positive, got {rho}")
    if not rho < p - q:
        raise RhoTooLarge(f"rho = {rho:.6g} must be below p - q = {p - q:.6g}")
    root = _intersection_root(p, q, rho)
    # each angle as log(cosh + sinh), with the sinh numerators factored
    theta_i = math.log((p * p - q * q - rho * rho + root) / (2.0 * q * rho))
    phi_i = math.log((p * p + q * q - rho * rho + root) / (2.0 * p * q))
    qs, rs = cfg.qstar, rho * p / q
    ch = (-p * p + qs * qs + rs * rs) / (2.0 * qs * rs)
    sh = math.sqrt(((qs - p) ** 2 - rs * rs) * ((qs + p) ** 2 - rs * rs)) / (2.0 * qs * rs)
    return RhoAngles(rho=rho, rhostar=rs, phi_i=phi_i, theta_i=theta_i,
                     theta_istar=math.log(ch + sh))


def apollonius_ratio(P: HPoint, cfg: DependenceConfig) -> float:
    """``|QP| / |Q*P|``; equals ``q/p`` whenever ``P`` is on the data curve."""
    return hdistance(P, cfg.Q) / hdistance(P, cfg.Qstar)


def c_function(P: HPoint, cfg: DependenceConfig) -> float:
    """``ln((p/q)(r/r*))``, zero on the data curve and a wave solution off the cones."""
    r = hdistance(P, cfg.Q)
    rs = hdistance(P, cfg.Qstar)
    if r == 0.0 or rs == 0.0:
        raise SpacelikeSeparation(f"point {P.as_tuple()} lies on a characteristic of Q or Q*")
    return math.log((cfg.p / cfg.q) * (r / rs))
