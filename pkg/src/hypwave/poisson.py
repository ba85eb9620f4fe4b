"""Poisson-like kernel on the data hyperbola and the limit ``rho -> 0``.

For a wave solution ``u`` the boundary integrals over ``I``, ``I*`` and the
data arc between their intersections satisfy

    int u(I(theta)) dtheta + int u(I*(theta*)) dtheta* = int u(gamma(phi)) K(phi) dphi

with ``K = (p^2 - q^2) / r^2``. Dividing by the divergent range ``2 theta_i``
and letting ``rho -> 0`` gives ``u(Q) + u(Q*) = u(P1) + u(P2)``. The limits
converge like ``1 / theta_i ~ 1 / ln(1/rho)``, so they are realised by
polynomial extrapolation in ``w = 1 / theta_i``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Optional, Sequence

import numpy as np

from .errors import ExtrapolationUnstable, RhoTooLarge
from .fields import ScalarField
from .geom import DependenceConfig, rho_angles
from .hypcore import HPoint
from .quad import DEFAULT_SPEC, Check, QuadSpec, integrate, tip_clustered

SUBSTITUTION = "substitution"
DIRECT = "direct"


def kernel(p: float, q: float, phi):
    """``(p^2 - q^2) / (p^2 + q^2 - 2 p q cosh(phi))``; vectorised in ``phi``.

    Evaluated as ``(p + q)/(p - q e^-phi) * (p - q)/(p - q e^phi)``, which is
    exactly ``(p + q)/(p - q)`` at ``phi = 0``.
    """
    if p <= 0 or q <= 0:
        raise ValueError("p and q must be positive")
    phi = np.asarray(phi, dtype=float)
    out = (p + q) / (p - q * np.exp(-phi)) * ((p - q) / (p - q * np.exp(phi)))
    return float(out) if out.ndim == 0 else out


def _contrast(p: float, q: float) -> float:
    return (p + q) / (p - q)


def kernel_integral_closed_form(p: float, q: float, phi_hi: float) -> float:
    """``int_0^phi_hi kernel dphi``, i.e. ``2 artanh(((p+q)/(p-q)) tanh(phi_hi/2))``.

    Evaluated as ``ln((p E - q) / (p - q E))`` with ``E = exp(phi_hi)``.
    """
    if not p > q > 0:
        raise ValueError("need p > q > 0")
    phi2 = math.log(p / q)
    if not abs(phi_hi) < phi2:
        raise ValueError(f"|phi_hi| = {abs(phi_hi):.6g} must be below ln(p/q) = {phi2:.6g}")
    if phi_hi < 0:
        return -kernel_integral_closed_form(p, q, -phi_hi)
    E = math.exp(phi_hi)
    return math.log((p * E - q) / (p - q * E))


def kernel_half_integral(p: float, q: float, rho: float) -> float:
    """``int_0^{phi_i(rho)} kernel dphi`` without cancellation.

    ``p - q exp(phi_i)`` is a difference of nearly equal numbers for small
    ``rho``; it is replaced by the equivalent ``2 p rho^2 / (a + root)``.
    """
    if not 0 < rho < p - q:
        raise RhoTooLarge(f"rho = {rho:.6g} must lie in (0, p - q)")
    r2 = rho * rho
    root = math.sqrt(((p - q) ** 2 - r2) * ((p + q) ** 2 - r2))
    a = p * p - q * q + r2
    upper = (p * p - q * q - r2 + root) / (2.0 * q)   # p E - q
    lower = 2.0 * p * r2 / (a + root)                  # p - q E
    return math.log(upper / lower)


def _phi_of_psi(psi, c: float):
    """Inverse of ``psi = 2 artanh(c tanh(phi/2))``."""
    return 2.0 * np.arctanh(np.tanh(0.5 * np.asarray(psi, dtype=float)) / c)


def _on_gamma(u: ScalarField, cfg: DependenceConfig, phi):
    x, y = cfg.gamma().coords(phi, cfg.alpha)
    return u(x, y)


def poisson_rhs(u: ScalarField, cfg: DependenceConfig, rho: float,
                spec: QuadSpec = DEFAULT_SPEC, method: str = SUBSTITUTION) -> float:
    """``int_{-phi_i}^{phi_i} u(gamma(phi + alpha)) K(phi) dphi``.

    ``method="substitution"`` integrates in ``psi = int K dphi``, which turns
    the kernel peaks at the ends into a flat tail; ``"direct"`` integrates in
    ``phi`` with panels crowded toward the tips and is only reliable for
    moderate ``rho``.
    """
    p, q = cfg.p, cfg.q
    if method == SUBSTITUTION:
        Psi = kernel_half_integral(p, q, rho)
        c = _contrast(p, q)
        return integrate(lambda psi: _on_gamma(u, cfg, _phi_of_psi(psi, c)), -Psi, Psi, spec,
                         breakpoints=np.linspace(-Psi, Psi, 9))
    if method == DIRECT:
        phi_i = rho_angles(cfg, rho).phi_i
        return integrate(lambda phi: _on_gamma(u, cfg, phi) * kernel(p, q, phi), -phi_i, phi_i,
                         spec, breakpoints=tip_clustered(-phi_i, phi_i))
    raise ValueError(f"unknown method {method!r}")


def _arc_mean_integral(u: ScalarField, h, half: float, alpha: float, spec: QuadSpec) -> float:
    def g(a):
        x, y = h.coords(a, alpha)
        return u(x, y)

    return integrate(g, -half, half, spec, breakpoints=np.linspace(-half, half, 9))


def auxiliary_integrals(u: ScalarField, cfg: DependenceConfig, rho: float,
                        spec: QuadSpec = DEFAULT_SPEC):
    """``(int u dtheta over I, int u dtheta* over I*)`` between the intersection points."""
    ang = rho_angles(cfg, rho)
    on_I = _arc_mean_integral(u, cfg.hyperbola_I(rho), ang.theta_i, cfg.alpha, spec)
    on_Is = _arc_mean_integral(u, cfg.hyperbola_Istar(rho), ang.theta_istar, cfg.alpha, spec)
    return on_I, on_Is


def finite_rho_identity(u: ScalarField, cfg: DependenceConfig, rho: float,
                        spec: QuadSpec = DEFAULT_SPEC, method: str = SUBSTITUTION) -> Check:
    """Both sides of the three-integral identity at finite ``rho``."""
    on_I, on_Is = auxiliary_integrals(u, cfg, rho, spec)
    lhs = on_I + on_Is
    rhs = poisson_rhs(u, cfg, rho, spec, method)
    return Check(lhs, rhs, abs(lhs - rhs))


def mean_on_I(u: ScalarField, cfg: DependenceConfig, rho: float, starred: bool = False,
              spec: QuadSpec = DEFAULT_SPEC) -> float:
    """Mean of ``u`` over ``I`` (or ``I*``), both normalised by ``2 theta_i``."""
    ang = rho_angles(cfg, rho)
    if starred:
        total = _arc_mean_integral(u, cfg.hyperbola_Istar(rho), ang.theta_istar, cfg.alpha, spec)
    else:
        total = _arc_mean_integral(u, cfg.hyperbola_I(rho), ang.theta_i, cfg.alpha, spec)
    return total / (2.0 * ang.theta_i)


def theta_range_ratio(cfg: DependenceConfig, rho: float) -> float:
    """``theta_i* / theta_i``; tends to 1, logarithmically slowly."""
    ang = rho_angles(cfg, rho)
    return ang.theta_istar / ang.theta_i


def final_identity(u: ScalarField, cfg: DependenceConfig) -> Check:
    """``u(Q) + u(Q*)`` against ``u(P1) + u(P2)`` by direct evaluation."""
    Qs = HPoint.from_char(cfg.sQstar, cfg.tQstar)
    lhs = float(u.at(cfg.Q)) + float(u.at(Qs))
    rhs = float(u.at(cfg.P1)) + float(u.at(cfg.P2))
    return Check(lhs, rhs, abs(lhs - rhs))


# --- limits ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LimitSchedule:
    """Decreasing ``rho`` values and the degree of the fit in ``w = 1/theta_i``."""

    rho_values: tuple
    extrapolation_order: int = 2

    def __post_init__(self):
        rhos = tuple(float(r) for r in self.rho_values)
        object.__setattr__(self, "rho_values", rhos)
        if self.extrapolation_order < 0:
            raise ValueError("extrapolation_order must be non-negative")
        if len(rhos) < self.extrapolation_order + 1:
            raise ValueError(f"need at least {self.extrapolation_order + 1} rho values")
        if any(not r > 0 for r in rhos):
            raise ValueError("rho values must be positive")
        if any(b >= a for a, b in zip(rhos, rhos[1:])):
            raise ValueError("rho values must be strictly decreasing")

    @classmethod
    def decades(cls, k_from: int, k_to: int, order: int = 2) -> "LimitSchedule":
        return cls(tuple(10.0 ** (-k) for k in range(k_from, k_to + 1)), order)

    def validate_for(self, cfg: DependenceConfig) -> None:
        if self.rho_values[0] >= cfg.p - cfg.q:
            raise RhoTooLarge(f"largest rho {self.rho_values[0]:.6g} must be below p - q")


DEFAULT_SCHEDULE = LimitSchedule((1e-2, 1e-3, 1e-4, 1e-5), 2)


class Extrapolation(NamedTuple):
    value: float
    coefficients: np.ndarray
    fit_residual: float


def extrapolate_to_zero(w: Sequence[float], values: Sequence[float], order: int,
                        fit_tol: Optional[float] = None) -> Extrapolation:
    """Value at ``w = 0`` of the least-squares polynomial of degree ``order``.

    Raises
    ------
    ExtrapolationUnstable
        If data are non-finite or the largest fit residual exceeds ``fit_tol``.
    """
    w = np.asarray(w, dtype=float)
    v = np.asarray(values, dtype=float)
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
        raise ExtrapolationUnstable("non-finite samples")
    if len(w) < order + 1:
        raise ExtrapolationUnstable(f"{len(w)} samples cannot fix a degree-{order} fit")
    coef = np.polynomial.polynomial.polyfit(w, v, order)
    resid = float(np.max(np.abs(np.polynomial.polynomial.polyval(w, coef) - v)))
    if fit_tol is not None and resid > fit_tol:
        raise ExtrapolationUnstable(f"fit residual {resid:.3g} exceeds {fit_tol:.3g}")
    return Extrapolation(float(coef[0]), coef, resid)


class TraceRow(NamedTuple):
    rho: float
    theta_i: float
    w: float
    value: float


def _ordered_map(fn: Callable, items: Sequence, workers: Optional[int]) -> List:
    if workers is None or workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _trace(fn: Callable[[float], float], cfg: DependenceConfig, schedule: LimitSchedule,
           workers: Optional[int]) -> List[TraceRow]:
    schedule.validate_for(cfg)
    vals = _ordered_map(fn, schedule.rho_values, workers)
    rows = []
    for rho, v in zip(schedule.rho_values, vals):
        th = rho_angles(cfg, rho).theta_i
        rows.append(TraceRow(rho, th, 1.0 / th, v))
    return rows


def boundary_sum_trace(u: ScalarField, cfg: DependenceConfig, schedule: LimitSchedule,
                       spec: QuadSpec = DEFAULT_SPEC, workers: Optional[int] = None):
    """``rhs / (2 theta_i)`` at every ``rho`` of the schedule."""
    def one(rho):
        return poisson_rhs(u, cfg, rho, spec) / (2.0 * rho_angles(cfg, rho).theta_i)

    return _trace(one, cfg, schedule, workers)


def mean_trace(u: ScalarField, cfg: DependenceConfig, schedule: LimitSchedule,
               starred: bool = False, spec: QuadSpec = DEFAULT_SPEC,
               workers: Optional[int] = None):
    return _trace(lambda rho: mean_on_I(u, cfg, rho, starred, spec), cfg, schedule, workers)


def limit_of_trace(rows: Sequence[TraceRow], order: int,
                   fit_tol: Optional[float] = None) -> Extrapolation:
    return extrapolate_to_zero([r.w for r in rows], [r.value for r in rows], order, fit_tol)


def boundary_sum_limit(u: ScalarField, cfg: DependenceConfig,
                       schedule: LimitSchedule = DEFAULT_SCHEDULE,
                       spec: QuadSpec = DEFAULT_SPEC, fit_tol: Optional[float] = None,
                       workers: Optional[int] = None) -> float:
    """Extrapolated ``lim rhs / (2 theta_i)``, which equals ``u(P1) + u(P2)``."""
    rows = boundary_sum_trace(u, cfg, schedule, spec, workers)
    return limit_of_trace(rows, schedule.extrapolation_order, fit_tol).value


def mean_limit(u: ScalarField, cfg: DependenceConfig, schedule: LimitSchedule = DEFAULT_SCHEDULE,
               starred: bool = False, spec: QuadSpec = DEFAULT_SPEC,
               fit_tol: Optional[float] = None, workers: Optional[int] = None) -> float:
    """Extrapolated mean over ``I`` (tends to ``u(Q)``) or ``I*`` (tends to ``u(Q*)``)."""
    rows = mean_trace(u, cfg, schedule, starred, spec, workers)
    return limit_of_trace(rows, schedule.extrapolation_order, fit_tol).value


def decay_exponent(w: Sequence[float], errors: Sequence[float]) -> float:
    """Slope of ``log|error|`` against ``log w``."""
    w = np.asarray(w, dtype=float)
    e = np.abs(np.asarray(errors, dtype=float))
    if np.any(e == 0) or np.any(w <= 0):
        raise ValueError("errors and w must be non-zero")
    return float(np.polyfit(np.log(w), np.log(e), 1)[0])
