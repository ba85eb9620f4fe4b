"""Quadrature on hyperbolic arcs and on the characteristic domains.

Line integrals are taken over the angle parameter of an arc; the boundary
form ``u_x dy + u_y dx`` equals ``(du/dn) dtau`` for the local frames of
``hypcore``, and both formulations are available so that each can check the
other. Area integrals run in characteristic coordinates, where every region
boundary is a coordinate line, the curve ``s t = p^2``, or one of the
hyperbolas ``(s - s_Q)(t - t_Q) = rho^2``; ``dx dy = ds dt / 2``.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import NoConvergence, RhoTooLarge
from .fields import ScalarField
from .geom import DependenceConfig, Hyperbola, rho_angles
from .hypcore import frame_normal

_EPS = np.finfo(float).eps

# Gauss-Kronrod 7/15 (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

NODES = np.concatenate([-_XGK[:7], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:7], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[[9, 11, 13]] = _WG[2::-1]
GAUSS_WEIGHTS[7] = _WG[3]


@dataclass(frozen=True)
class QuadSpec:
    """Adaptive quadrature policy.

    ``max_depth`` bounds the number of bisections of any initial panel;
    ``initial_panels`` is the uniform starting subdivision when no
    breakpoints are given.
    """

    rel_tol: float = 1e-12
    abs_tol: float = 1e-13
    max_depth: int = 60
    initial_panels: int = 5
    max_panels: int = 20000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("rel_tol and abs_tol must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if self.initial_panels < 1:
            raise ValueError("initial_panels must be at least 1")


DEFAULT_SPEC = QuadSpec()


class QuadResult(NamedTuple):
    value: object
    error: float
    panels: int


class Check(NamedTuple):
    lhs: float
    rhs: float
    residual: float


def _gk15(f, a: float, b: float):
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    fx = np.asarray(f(c + h * NODES), dtype=float)
    K = h * (fx @ KRONROD_WEIGHTS)
    G = h * (fx @ GAUSS_WEIGHTS)
    resabs = abs(h) * (np.abs(fx) @ KRONROD_WEIGHTS)
    mean = K / (2.0 * h) if h != 0 else K
    resasc = abs(h) * (np.abs(fx - np.expand_dims(mean, -1)) @ KRONROD_WEIGHTS)
    err = np.abs(K - G)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(resasc > 0, resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5), err)
    floor = 50.0 * _EPS * resabs
    err = np.maximum(scaled, floor)
    if not np.all(np.isfinite(K)):
        raise NoConvergence(f"non-finite integrand on [{a!r}, {b!r}]")
    return K, float(np.max(err)), float(np.max(floor))


def tip_clustered(lo: float, hi: float) -> list:
    """Five panels, two crowded toward each end and one across the middle."""
    L = hi - lo
    return [lo, lo + L / 16.0, lo + L / 4.0, hi - L / 4.0, hi - L / 16.0, hi]


def adaptive_quad(f: Callable, a: float, b: float, spec: QuadSpec = DEFAULT_SPEC,
                  breakpoints: Optional[Sequence[float]] = None) -> QuadResult:
    """Globally adaptive Gauss-Kronrod quadrature of ``f`` over ``[a, b]``.

    ``f`` maps an array of abscissae to an array whose last axis matches
    them; leading axes are integrated component-wise and the error is the
    maximum over components. Panels are combined left to right, so the
    result does not depend on the refinement order.

    Raises
    ------
    NoConvergence
        When the tolerance is not met within ``max_depth``/``max_panels``.
    """
    if a == b:
        probe = np.asarray(f(np.array([a])), dtype=float)
        return QuadResult(np.zeros(probe.shape[:-1]) if probe.ndim > 1 else 0.0, 0.0, 0)
    if b < a:
        r = adaptive_quad(f, b, a, spec, breakpoints)
        return QuadResult(-r.value, r.error, r.panels)

    if breakpoints is None:
        edges = list(np.linspace(a, b, spec.initial_panels + 1))
    else:
        inner = sorted(x for x in breakpoints if a < x < b)
        edges = [a] + inner + [b]

    # heap entries: (-err, seq, a, b, depth, value, err, floor)
    heap = []
    done = []
    seq = 0
    total = None
    err_total = 0.0
    floor_total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        K, e, fl = _gk15(f, lo, hi)
        heapq.heappush(heap, (-e, seq, lo, hi, 0, K, e, fl))
        seq += 1
        total = K if total is None else total + K
        err_total += e
        floor_total += fl

    def tolerance(value):
        return max(spec.abs_tol, spec.rel_tol * float(np.max(np.abs(value))), 2.0 * floor_total)

    n_panels = len(heap)
    while err_total > tolerance(total):
        if not heap:
            raise NoConvergence(
                f"quadrature on [{a!r}, {b!r}] stalled at max_depth={spec.max_depth} "
                f"(estimate {np.max(np.abs(total)):.6g}, error {err_total:.3g})", total, err_total)
        if n_panels >= spec.max_panels:
            raise NoConvergence(
                f"quadrature on [{a!r}, {b!r}] exceeded {spec.max_panels} panels "
                f"(error {err_total:.3g})", total, err_total)
        _, _, lo, hi, depth, K, e, fl = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if depth >= spec.max_depth or not (lo < mid < hi):
            done.append((lo, hi, K, e))
            continue
        K1, e1, f1 = _gk15(f, lo, mid)
        K2, e2, f2 = _gk15(f, mid, hi)
        heapq.heappush(heap, (-e1, seq, lo, mid, depth + 1, K1, e1, f1))
        heapq.heappush(heap, (-e2, seq + 1, mid, hi, depth + 1, K2, e2, f2))
        seq += 2
        n_panels += 1
        total = total + (K1 + K2 - K)
        err_total += e1 + e2 - e
        floor_total += f1 + f2 - fl

    panels = sorted([(lo, hi, K, e) for _, _, lo, hi, _, K, e, _ in heap] + done,
                    key=lambda t: t[0])
    vals = np.array([p[2] for p in panels])
    if vals.ndim == 1:
        value = math.fsum(vals)
    else:
        value = np.array([math.fsum(col) for col in vals.reshape(len(panels), -1).T]).reshape(
            vals.shape[1:])
    return QuadResult(value, math.fsum(p[3] for p in panels), len(panels))


def integrate(f: Callable, a: float, b: float, spec: QuadSpec = DEFAULT_SPEC,
              breakpoints: Optional[Sequence[float]] = None) -> float:
    return adaptive_quad(f, a, b, spec, breakpoints).value


# --- line integrals ------------------------------------------------------------------

FRAME = "frame"
PARAMETRIC = "parametric"


def _arc_weights(h: Hyperbola, angle: np.ndarray, alpha: float, upward: bool, formulation: str):
    """Point coordinates and the traversal differentials ``(dy, dx)`` per unit angle.

    ``u_x * a + u_y * b`` is the boundary form ``(du/dn) dtau`` per unit of
    the (ascending) angle parameter.
    """
    x, y = h.coords(angle, alpha)
    if formulation == FRAME:
        nx, ny = frame_normal(angle + alpha, upward)
        R = h.semidiameter
        return x, y, nx * R, ny * R
    if formulation == PARAMETRIC:
        d = 1.0 if h.increasing_is_upward() == upward else -1.0
        xp, yp = h.tangent(angle, alpha)
        return x, y, d * yp, d * xp
    raise ValueError(f"unknown formulation {formulation!r}")


def _line(h, lo, hi, alpha, upward, spec, formulation, density, tips):
    def f(angle):
        x, y, a, b = _arc_weights(h, angle, alpha, upward, formulation)
        return density(x, y, a, b)

    bp = tip_clustered(lo, hi) if tips and hi > lo else None
    return integrate(f, lo, hi, spec, bp)


def arc_integral(g: Callable, h: Hyperbola, lo: float, hi: float, alpha: float = 0.0,
                 spec: QuadSpec = DEFAULT_SPEC, tips: bool = False) -> float:
    """``integral g(angle) dtau`` with ``dtau = semidiameter * d(angle)``."""
    if lo == hi:
        return 0.0
    R = h.semidiameter
    bp = tip_clustered(lo, hi) if tips else None
    return integrate(lambda a: R * np.asarray(g(a), dtype=float) * np.ones_like(a), lo, hi, spec, bp)


def normal_flux(u: ScalarField, h: Hyperbola, lo: float, hi: float, alpha: float = 0.0,
                upward: bool = True, spec: QuadSpec = DEFAULT_SPEC,
                formulation: str = FRAME, tips: bool = False) -> float:
    """``integral (du/dn) dtau`` along the arc, traversed up or down."""
    if lo == hi:
        return 0.0

    def density(x, y, a, b):
        ux, uy = u.gradient(x, y)
        return ux * a + uy * b

    return _line(h, lo, hi, alpha, upward, spec, formulation, density, tips)


def weighted_flux(w: ScalarField, v: ScalarField, h: Hyperbola, lo: float, hi: float,
                  alpha: float = 0.0, upward: bool = True, spec: QuadSpec = DEFAULT_SPEC,
                  formulation: str = FRAME, tips: bool = False) -> float:
    """``integral w (dv/dn) dtau``."""
    if lo == hi:
        return 0.0

    def density(x, y, a, b):
        vx, vy = v.gradient(x, y)
        return w(x, y) * (vx * a + vy * b)

    return _line(h, lo, hi, alpha, upward, spec, formulation, density, tips)


def green_flux(v: ScalarField, u: ScalarField, h: Hyperbola, lo: float, hi: float,
               alpha: float = 0.0, upward: bool = True, spec: QuadSpec = DEFAULT_SPEC,
               formulation: str = FRAME, tips: bool = False) -> float:
    """``integral (v du/dn - u dv/dn) dtau``."""
    if lo == hi:
        return 0.0

    def density(x, y, a, b):
        ux, uy = u.gradient(x, y)
        vx, vy = v.gradient(x, y)
        return v(x, y) * (ux * a + uy * b) - u(x, y) * (vx * a + vy * b)

    return _line(h, lo, hi, alpha, upward, spec, formulation, density, tips)


def _lens_arcs(cfg: DependenceConfig, rho: float):
    ang = rho_angles(cfg, rho)
    return (cfg.gamma(), ang.phi_i), (cfg.hyperbola_I(rho), ang.theta_i)


def closed_flux_check(u: ScalarField, cfg: DependenceConfig, rho: float,
                      spec: QuadSpec = DEFAULT_SPEC, formulation: str = FRAME) -> float:
    """Flux of ``u`` around the lens between ``I`` and the data curve, region on the left.

    Zero for solutions of the wave equation.
    """
    (g, phi_i), (I, theta_i) = _lens_arcs(cfg, rho)
    up = normal_flux(u, g, -phi_i, phi_i, cfg.alpha, True, spec, formulation, tips=True)
    down = normal_flux(u, I, -theta_i, theta_i, cfg.alpha, False, spec, formulation)
    return up + down


def lens_green_boundary(v: ScalarField, u: ScalarField, cfg: DependenceConfig, rho: float,
                        spec: QuadSpec = DEFAULT_SPEC, formulation: str = FRAME) -> float:
    (g, phi_i), (I, theta_i) = _lens_arcs(cfg, rho)
    return (green_flux(v, u, g, -phi_i, phi_i, cfg.alpha, True, spec, formulation, tips=True)
            + green_flux(v, u, I, -theta_i, theta_i, cfg.alpha, False, spec, formulation))


def green_identity_residual(u: ScalarField, v: ScalarField, cfg: DependenceConfig, rho: float,
                            spec: QuadSpec = DEFAULT_SPEC) -> Check:
    """Area side ``integral (v wave(u) - u wave(v))`` against the boundary Green form on the lens."""
    region = Region(RegionKind.D, cfg, rho)

    def g(x, y):
        return v(x, y) * u.wave_op(x, y) - u(x, y) * v.wave_op(x, y)

    area = region_integral(g, region, spec)
    boundary = lens_green_boundary(v, u, cfg, rho, spec)
    return Check(area, boundary, abs(area - boundary))


def gauss_identity_residual(X: ScalarField, Y: ScalarField, cfg: DependenceConfig, rho: float,
                            spec: QuadSpec = DEFAULT_SPEC) -> Check:
    """``integral (X_x + Y_y) dx dy`` against ``closed integral (X dy - Y dx)`` on the lens."""
    region = Region(RegionKind.D, cfg, rho)

    def div(x, y):
        return X.gradient(x, y)[0] + Y.gradient(x, y)[1]

    area = region_integral(div, region, spec)
    (g, phi_i), (I, theta_i) = _lens_arcs(cfg, rho)

    def density(x, y, a, b):
        # a = dy, b = dx per unit angle in traversal orientation
        return X(x, y) * a - Y(x, y) * b

    boundary = (_line(g, -phi_i, phi_i, cfg.alpha, True, spec, PARAMETRIC, density, True)
                + _line(I, -theta_i, theta_i, cfg.alpha, False, spec, PARAMETRIC, density, False))
    return Check(area, boundary, abs(area - boundary))


# --- area integrals ------------------------------------------------------------------

class RegionKind(enum.Enum):
    D = "D"
    DSTAR = "Dstar"
    DUNION = "Dunion"


class Chart(NamedTuple):
    """Offsets ``(sigma, delta)`` from a vertex: ``s = s0 + sign*sigma``, ``t = t0 + sign*delta``."""

    s0: float
    t0: float
    sign: float
    sigma_lo: float
    sigma_hi: float
    delta_lo: Callable
    delta_hi: Callable


@dataclass(frozen=True)
class Region:
    """Lens ``D`` (between ``I`` and the data curve), ``Dstar`` (between it and ``I*``) or both.

    ``rho = 0`` gives the limiting domains bounded by characteristics; their
    union is the characteristic rectangle.
    """

    kind: RegionKind
    cfg: DependenceConfig
    rho: float = 0.0

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError("rho must be non-negative")
        if self.rho > 0 and not self.rho < self.cfg.p - self.cfg.q:
            raise RhoTooLarge(f"rho = {self.rho:.6g} must be below p - q")

    def chart(self) -> Chart:
        """Parametrisation by offsets from ``Q`` (for ``D``) or ``Q*`` (for ``Dstar``).

        Offsets keep ``r^2 = sigma * delta`` free of cancellation next to the
        auxiliary hyperbolas, where ``r`` is as small as ``rho``.
        """
        cfg, rho = self.cfg, self.rho
        p2 = cfg.p * cfg.p
        sQ, tQ, sS, tS = cfg.sQ, cfg.tQ, cfg.sQstar, cfg.tQstar
        if self.kind is RegionKind.DUNION:
            if rho > 0:
                raise ValueError("the union is only charted at rho = 0")
            return Chart(sQ, tQ, 1.0, 0.0, sS - sQ,
                         lambda sg: np.zeros_like(sg), lambda sg: np.full_like(sg, tS - tQ))
        if self.kind is RegionKind.D:
            if rho > 0:
                th = rho_angles(cfg, rho).theta_i
                lo, hi = rho * math.exp(cfg.alpha - th), rho * math.exp(cfg.alpha + th)
            else:
                lo, hi = 0.0, sS - sQ
            r2 = rho * rho
            return Chart(sQ, tQ, 1.0, lo, hi,
                         lambda sg: r2 / sg if r2 > 0 else np.zeros_like(sg),
                         lambda sg: p2 / (sQ + sg) - tQ)
        rs = rho * cfg.p / cfg.q
        if rho > 0:
            th = rho_angles(cfg, rho).theta_istar
            lo, hi = rs * math.exp(cfg.alpha - th), rs * math.exp(cfg.alpha + th)
        else:
            lo, hi = 0.0, sS - sQ
        r2 = rs * rs
        return Chart(sS, tS, -1.0, lo, hi,
                     lambda sg: r2 / sg if r2 > 0 else np.zeros_like(sg),
                     lambda sg: tS - p2 / (sS - sg))


def _as_fn(g):
    if isinstance(g, (int, float)):
        c = float(g)
        return lambda x, y: np.full(np.broadcast(x, y).shape, c)
    return g


def _iterated(g, region: Region, spec: QuadSpec, log_weight: bool) -> float:
    g = _as_fn(g)
    ch = region.chart()

    def outer(sg):
        d_lo = np.asarray(ch.delta_lo(sg), dtype=float)
        d_hi = np.maximum(np.asarray(ch.delta_hi(sg), dtype=float), d_lo)
        width = d_hi - d_lo

        def inner(tau):
            SG = np.broadcast_to(sg[:, None], (len(sg), len(tau)))
            DL = d_lo[:, None] + width[:, None] * tau[None, :]
            s = ch.s0 + ch.sign * SG
            t = ch.t0 + ch.sign * DL
            vals = np.asarray(g(0.5 * (s + t), 0.5 * (s - t)), dtype=float)
            if log_weight:
                with np.errstate(divide="ignore"):
                    vals = vals * (0.5 * np.log(SG * DL))
                vals = np.where(width[:, None] > 0, vals, 0.0)
            return vals * width[:, None]

        return 0.5 * adaptive_quad(inner, 0.0, 1.0, spec).value

    return integrate(outer, ch.sigma_lo, ch.sigma_hi, spec)


def region_integral(g, region: Region, spec: QuadSpec = DEFAULT_SPEC,
                    log_weight: bool = False) -> float:
    """``integral g dx dy`` over a characteristic-domain region.

    ``g`` is a field, a vectorised ``(x, y)`` callable, or a constant. With
    ``log_weight`` the integrand is multiplied by ``ln r`` on ``D`` or by
    ``ln r*`` on ``Dstar``, evaluated from the vertex offsets.
    """
    if region.kind is RegionKind.DUNION:
        if log_weight:
            raise ValueError("log weight is defined on D or Dstar only")
        if region.rho == 0.0:
            return _iterated(g, region, spec, False)
        return (_iterated(g, Region(RegionKind.D, region.cfg, region.rho), spec, False)
                + _iterated(g, Region(RegionKind.DSTAR, region.cfg, region.rho), spec, False))
    return _iterated(g, region, spec, log_weight)
