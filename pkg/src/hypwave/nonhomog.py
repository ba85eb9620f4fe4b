"""Non-homogeneous wave equation ``wave(u) = f``.

With a source, Green's identity on the lens ``D`` (weight ``ln r``) and on
``D*`` (weight ``ln r*``) leaves area integrals next to the three boundary
integrals:

    int_I u dtheta + int_I* u dtheta*
        = int_gamma u K dphi - ln(rho) A(D + D*) + ln(A_p) A(D*)
          + iint_D ln(r) f + iint_D* ln(r*) f

where ``A(.)`` is the integral of ``f``. Dividing by ``2 theta_i`` and letting
``rho -> 0`` only the first area term survives, giving

    u(Q) + u(Q*) = u(P1) + u(P2) + (1/2) iint f dx dy

over the characteristic rectangle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .fields import ScalarField, manufactured
from .geom import DependenceConfig, rho_angles
from .poisson import SUBSTITUTION, auxiliary_integrals, final_identity, poisson_rhs
from .quad import DEFAULT_SPEC, Check, QuadSpec, Region, RegionKind, region_integral

SOURCE_CHECK_TOL = 1e-4


@dataclass(frozen=True)
class SourceProblem:
    """A manufactured solution ``u`` with its source ``f = wave(u)``."""

    u: ScalarField
    f: ScalarField
    cfg: DependenceConfig
    check_points: int = 5

    def __post_init__(self):
        cfg = self.cfg
        rng = np.random.default_rng(0)
        # interior of the characteristic rectangle
        s = cfg.sQ + (cfg.sQstar - cfg.sQ) * rng.uniform(0.1, 0.9, self.check_points)
        t = cfg.tQ + (cfg.tQstar - cfg.tQ) * rng.uniform(0.1, 0.9, self.check_points)
        x, y = 0.5 * (s + t), 0.5 * (s - t)
        lhs = np.asarray(self.u.wave_op(x, y), dtype=float)
        rhs = np.asarray(self.f(x, y), dtype=float)
        bad = np.abs(lhs - rhs) > SOURCE_CHECK_TOL * (1.0 + np.abs(rhs))
        if np.any(bad):
            i = int(np.argmax(bad))
            raise ValueError(f"f does not match the wave operator of u at ({x[i]:.6g}, {y[i]:.6g}): "
                             f"{lhs[i]:.6g} vs {rhs[i]:.6g}")

    @classmethod
    def from_solution(cls, u: ScalarField, cfg: DependenceConfig) -> "SourceProblem":
        u, f = manufactured(u)
        return cls(u, f, cfg)


class AreaTerms(NamedTuple):
    source_total: float     # integral of f over D + D*
    source_star: float      # integral of f over D*
    log_r: float            # integral of ln(r) f over D
    log_rstar: float        # integral of ln(r*) f over D*


def area_terms(prob: SourceProblem, rho: float, spec: QuadSpec = DEFAULT_SPEC) -> AreaTerms:
    cfg, f = prob.cfg, prob.f
    D = Region(RegionKind.D, cfg, rho)
    Ds = Region(RegionKind.DSTAR, cfg, rho)
    a_D = region_integral(f, D, spec)
    a_Ds = region_integral(f, Ds, spec)
    return AreaTerms(
        source_total=a_D + a_Ds,
        source_star=a_Ds,
        log_r=region_integral(f, D, spec, log_weight=True),
        log_rstar=region_integral(f, Ds, spec, log_weight=True),
    )


def _area_side(terms: AreaTerms, cfg: DependenceConfig, rho: float) -> float:
    return (-math.log(rho) * terms.source_total + math.log(cfg.A_p) * terms.source_star
            + terms.log_r + terms.log_rstar)


def combined_identity_finite(prob: SourceProblem, rho: float, spec: QuadSpec = DEFAULT_SPEC,
                             method: str = SUBSTITUTION) -> Check:
    """Boundary integrals over ``I`` and ``I*`` against the data-curve and area terms."""
    cfg = prob.cfg
    on_I, on_Is = auxiliary_integrals(prob.u, cfg, rho, spec)
    lhs = on_I + on_Is
    rhs = poisson_rhs(prob.u, cfg, rho, spec, method) + _area_side(area_terms(prob, rho, spec), cfg, rho)
    return Check(lhs, rhs, abs(lhs - rhs))


def area_limit_terms(prob: SourceProblem, rho: float, spec: QuadSpec = DEFAULT_SPEC):
    """The four area contributions divided by ``2 theta_i``.

    As ``rho -> 0`` the first tends to half the source integral over the
    characteristic rectangle and the others to zero, all logarithmically.
    """
    cfg = prob.cfg
    terms = area_terms(prob, rho, spec)
    denom = 2.0 * rho_angles(cfg, rho).theta_i
    return (-math.log(rho) * terms.source_total / denom,
            math.log(cfg.A_p) * terms.source_star / denom,
            terms.log_r / denom,
            terms.log_rstar / denom)


def half_source_integral(prob: SourceProblem, spec: QuadSpec = DEFAULT_SPEC) -> float:
    """``(1/2) iint f dx dy`` over the characteristic rectangle."""
    return 0.5 * region_integral(prob.f, Region(RegionKind.DUNION, prob.cfg, 0.0), spec)


def nonhomog_final_identity(prob: SourceProblem, spec: QuadSpec = DEFAULT_SPEC) -> Check:
    """``u(Q) + u(Q*)`` against ``u(P1) + u(P2) + (1/2) iint f``."""
    base = final_identity(prob.u, prob.cfg)
    rhs = base.rhs + half_source_integral(prob, spec)
    return Check(base.lhs, rhs, abs(base.lhs - rhs))
