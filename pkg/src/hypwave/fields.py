"""Scalar fields on the hyperbolic plane and the wave-operator machinery.

Fields are vectorised: ``u(x, y)`` accepts arrays and returns an array of the
broadcast shape. A field may carry an analytic gradient and an analytic wave
operator ``u_xx - u_yy``; whatever is missing falls back to central
differences.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import NearCharacteristic, SpacelikeSeparation
from .hypcore import HPoint, hrotate

FieldFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
GradFn = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]

DEFAULT_FD_STEP = 1e-4
# refuse stencils closer than this many steps to a singular characteristic
CONE_GUARD = 10.0


def _arr(v) -> np.ndarray:
    return np.asarray(v, dtype=float)


class ScalarField:
    """An evaluatable field with optional analytic derivatives.

    Parameters
    ----------
    eval : callable
        Vectorised ``(x, y) -> u``.
    analytic_wave_op : callable, optional
        Closed-form ``u_xx - u_yy``.
    grad : callable, optional
        Closed-form ``(u_x, u_y)``.
    label : str
    cones : sequence of HPoint
        Apexes whose characteristics carry singularities; finite-difference
        stencils are refused near them.
    """

    def __init__(self, eval: FieldFn, analytic_wave_op: Optional[FieldFn] = None,
                 grad: Optional[GradFn] = None, label: str = "",
                 cones: Sequence[HPoint] = ()):
        self.eval = eval
        self.analytic_wave_op = analytic_wave_op
        self.grad = grad
        self.label = label
        self.cones = tuple(cones)

    def __repr__(self):
        return f"{type(self).__name__}({self.label!r})"

    def __call__(self, x, y) -> np.ndarray:
        x, y = np.broadcast_arrays(_arr(x), _arr(y))
        return np.asarray(self.eval(x, y), dtype=float) * np.ones_like(x)

    def at(self, P: HPoint) -> float:
        return float(self(P.x, P.y))

    def check_stencil(self, x, y, h: float) -> None:
        s = _arr(x) + _arr(y)
        t = _arr(x) - _arr(y)
        for c in self.cones:
            if np.any(np.abs(s - c.s) < CONE_GUARD * h) or np.any(np.abs(t - c.t) < CONE_GUARD * h):
                raise NearCharacteristic(
                    f"{self.label or 'field'}: stencil of width {h:g} too close to the "
                    f"characteristics of {c.as_tuple()}")

    def gradient(self, x, y, h: float = 1e-5):
        if self.grad is not None:
            gx, gy = self.grad(_arr(x), _arr(y))
            return np.asarray(gx, dtype=float), np.asarray(gy, dtype=float)
        self.check_stencil(x, y, h)
        x, y = _arr(x), _arr(y)
        gx = (self(x + h, y) - self(x - h, y)) / (2.0 * h)
        gy = (self(x, y + h) - self(x, y - h)) / (2.0 * h)
        return gx, gy

    def wave_op(self, x, y, h: float = DEFAULT_FD_STEP):
        if self.analytic_wave_op is not None:
            return np.asarray(self.analytic_wave_op(_arr(x), _arr(y)), dtype=float) * np.ones(
                np.broadcast(_arr(x), _arr(y)).shape)
        return fd_wave_op(self, x, y, h)

    # algebra used by linearity and covariance checks
    def __add__(self, other: "ScalarField") -> "ScalarField":
        a, b = self, other

        def grad(x, y):
            ax, ay = a.gradient(x, y)
            bx, by = b.gradient(x, y)
            return ax + bx, ay + by

        wop = None
        if a.analytic_wave_op is not None and b.analytic_wave_op is not None:
            def wop(x, y):
                return a.wave_op(x, y) + b.wave_op(x, y)
        return ScalarField(lambda x, y: a(x, y) + b(x, y), wop,
                           grad if (a.grad and b.grad) else None,
                           f"({a.label})+({b.label})", a.cones + b.cones)

    def scaled(self, k: float) -> "ScalarField":
        a = self
        grad = None
        if a.grad is not None:
            def grad(x, y):
                gx, gy = a.gradient(x, y)
                return k * gx, k * gy
        wop = None
        if a.analytic_wave_op is not None:
            def wop(x, y):
                return k * a.wave_op(x, y)
        return ScalarField(lambda x, y: k * a(x, y), wop, grad, f"{k:g}*({a.label})", a.cones)

    def rotated(self, mu: float) -> "ScalarField":
        """Field carried along by the hyperbolic rotation ``mu``: ``u'(P) = u(R(-mu) P)``."""
        a = self
        c, s = math.cosh(mu), math.sinh(mu)

        def back(x, y):
            return c * x - s * y, -s * x + c * y

        grad = None
        if a.grad is not None:
            def grad(x, y):
                gX, gY = a.gradient(*back(x, y))
                return c * gX - s * gY, -s * gX + c * gY
        wop = None
        if a.analytic_wave_op is not None:
            def wop(x, y):
                return a.wave_op(*back(x, y))
        return ScalarField(lambda x, y: a(*back(x, y)), wop, grad,
                           f"rot({mu:g})[{a.label}]", [hrotate(p, mu) for p in a.cones])


def fd_wave_op(u: ScalarField, x, y, h: float = DEFAULT_FD_STEP):
    """Second-order central-difference ``u_xx - u_yy``."""
    if not h > 0:
        raise ValueError("step h must be positive")
    u.check_stencil(x, y, h)
    x, y = _arr(x), _arr(y)
    c = u(x, y)
    uxx = u(x + h, y) - 2.0 * c + u(x - h, y)
    uyy = u(x, y + h) - 2.0 * c + u(x, y - h)
    return (uxx - uyy) / (h * h)


def wave_operator(u: ScalarField, P: HPoint, h: float = DEFAULT_FD_STEP) -> float:
    """``u_xx - u_yy`` at ``P``: analytic when the field knows it, else central differences."""
    if not h > 0:
        raise ValueError("step h must be positive")
    return float(u.wave_op(P.x, P.y, h))


def mixed_parameter(v: ScalarField, u: ScalarField, P: HPoint, h: float = DEFAULT_FD_STEP) -> float:
    """``v_x u_x - v_y u_y`` at ``P``."""
    vx, vy = v.gradient(P.x, P.y, h)
    ux, uy = u.gradient(P.x, P.y, h)
    return float(vx * ux - vy * uy)


# --- one-variable profiles -------------------------------------------------------

@dataclass(frozen=True)
class Profile:
    """A one-variable function with its first two derivatives."""

    value: Callable
    d1: Callable
    d2: Callable
    label: str = ""

    def __call__(self, z):
        return self.value(z)

    @classmethod
    def poly(cls, coeffs: Sequence[float], var: str = "z") -> "Profile":
        P = np.polynomial.Polynomial(coeffs)
        terms = [f"{c:g}*{var}^{k}" for k, c in enumerate(coeffs) if c != 0]
        return cls(P, P.deriv(1), P.deriv(2), "+".join(terms) or "0")

    @classmethod
    def monomial(cls, k: int, c: float = 1.0, var: str = "z") -> "Profile":
        if not 0 <= k <= 6:
            raise ValueError("monomial degree must be within 0..6")
        coeffs = [0.0] * k + [c]
        return cls.poly(coeffs, var)

    @classmethod
    def zero(cls) -> "Profile":
        return cls.poly([0.0])

    @classmethod
    def exp(cls, k: float = 1.0) -> "Profile":
        return cls(lambda z: np.exp(k * z), lambda z: k * np.exp(k * z),
                   lambda z: k * k * np.exp(k * z), f"exp({k:g}z)")

    @classmethod
    def sin(cls, k: float = 1.0) -> "Profile":
        return cls(lambda z: np.sin(k * z), lambda z: k * np.cos(k * z),
                   lambda z: -k * k * np.sin(k * z), f"sin({k:g}z)")


class DAlembertField(ScalarField):
    """``F(x + y) + G(x - y)``: annihilated by the wave operator."""

    def __init__(self, F: Profile, G: Profile, label: str = ""):
        self.F = F
        self.G = G

        def ev(x, y):
            return F(x + y) + G(x - y)

        def grad(x, y):
            fs, gt = F.d1(x + y), G.d1(x - y)
            return fs + gt, fs - gt

        super().__init__(ev, lambda x, y: np.zeros(np.broadcast(x, y).shape), grad,
                         label or f"F(s)={F.label}, G(t)={G.label}")


def dalembert(F: Profile, G: Profile) -> DAlembertField:
    return DAlembertField(F, G)


def random_dalembert(rng: np.random.Generator, degree: int = 4, scale: float = 1.0) -> DAlembertField:
    """Random polynomial profiles of the given degree with normal coefficients."""
    F = Profile.poly(scale * rng.standard_normal(degree + 1), "s")
    G = Profile.poly(scale * rng.standard_normal(degree + 1), "t")
    return DAlembertField(F, G)


# --- polynomials in characteristic coordinates -----------------------------------

class CharPolynomial(ScalarField):
    """``sum C[i, j] s^i t^j`` with exact gradient and wave operator.

    With ``s = x + y`` and ``t = x - y`` the wave operator is ``4 d2/ds dt``.
    """

    def __init__(self, coeffs, label: str = ""):
        C = np.atleast_2d(np.asarray(coeffs, dtype=float))
        self.coeffs = C
        Cs = npoly.polyder(C, axis=0) if C.shape[0] > 1 else np.zeros((1, C.shape[1]))
        Ct = npoly.polyder(C, axis=1) if C.shape[1] > 1 else np.zeros((C.shape[0], 1))
        Cst = npoly.polyder(Cs, axis=1) if Cs.shape[1] > 1 else np.zeros((Cs.shape[0], 1))

        def ev(x, y):
            return npoly.polyval2d(x + y, x - y, C)

        def grad(x, y):
            us = npoly.polyval2d(x + y, x - y, Cs)
            ut = npoly.polyval2d(x + y, x - y, Ct)
            return us + ut, us - ut

        def wop(x, y):
            return 4.0 * npoly.polyval2d(x + y, x - y, Cst)

        super().__init__(ev, wop, grad, label or _format_poly(C))

    @classmethod
    def parse(cls, text: str) -> "CharPolynomial":
        return cls(parse_poly(text), label=text.strip())

    def is_dalembert(self) -> bool:
        C = self.coeffs
        return not np.any(C[1:, 1:])

    def profiles(self) -> Tuple[Profile, Profile]:
        """Split a mixed-term-free polynomial into ``(F(s), G(t))``."""
        if not self.is_dalembert():
            raise ValueError(f"{self.label!r} has mixed s*t terms; not a d'Alembert field")
        C = self.coeffs
        return Profile.poly(C[:, 0], "s"), Profile.poly(np.r_[0.0, C[0, 1:]], "t")


def _format_poly(C: np.ndarray) -> str:
    terms = []
    for (i, j), c in np.ndenumerate(C):
        if c != 0:
            terms.append(f"{c:g}*s^{i}*t^{j}")
    return " + ".join(terms) or "0"


_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|([stxy])|(\^)|(\*)|(\+)|(-))")


def _tokenize(text: str):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"unexpected character {text[pos:pos + 1]!r} at {pos} in {text!r}")
        num, var, caret, star, plus, minus = m.groups()
        if num is not None:
            out.append(("num", float(num)))
        elif var is not None:
            out.append(("var", var))
        else:
            out.append(("op", caret or star or plus or minus))
        pos = m.end()
    return out


def _poly_mul(a: Dict, b: Dict) -> Dict:
    out: Dict = {}
    for (i, j), c in a.items():
        for (k, l), d in b.items():
            out[(i + k, j + l)] = out.get((i + k, j + l), 0.0) + c * d
    return out


_VAR = {
    "s": {(1, 0): 1.0},
    "t": {(0, 1): 1.0},
    "x": {(1, 0): 0.5, (0, 1): 0.5},
    "y": {(1, 0): 0.5, (0, 1): -0.5},
}


def parse_poly(text: str) -> np.ndarray:
    """Parse ``"s^2 + 3*t - 0.5*s*t"`` style polynomials into a coefficient array.

    Grammar: terms joined by ``+``/``-``; a term is a ``*``-product of numbers
    and variables ``s, t, x, y`` optionally raised with ``^`` to a non-negative
    integer. ``x`` and ``y`` are rewritten in ``s, t``.
    """
    toks = _tokenize(text)
    if not toks:
        raise ValueError("empty polynomial")
    pos = 0
    total: Dict = {}

    def peek():
        return toks[pos] if pos < len(toks) else (None, None)

    sign = 1.0
    expect_term = True
    while pos < len(toks):
        kind, val = peek()
        if expect_term and kind == "op" and val in "+-":
            sign *= -1.0 if val == "-" else 1.0
            pos += 1
            continue
        if not expect_term:
            if kind == "op" and val in "+-":
                sign = -1.0 if val == "-" else 1.0
                pos += 1
                expect_term = True
                continue
            raise ValueError(f"expected '+' or '-' in {text!r}")
        term = {(0, 0): sign}
        while True:
            kind, val = peek()
            if kind == "num":
                factor = {(0, 0): val}
                pos += 1
            elif kind == "var":
                factor = _VAR[val]
                pos += 1
            else:
                raise ValueError(f"expected a number or variable in {text!r}")
            if peek() == ("op", "^"):
                pos += 1
                kind, exp = peek()
                if kind != "num" or exp != int(exp):
                    raise ValueError(f"exponent must be a non-negative integer in {text!r}")
                pos += 1
                powered = {(0, 0): 1.0}
                for _ in range(int(exp)):
                    powered = _poly_mul(powered, factor)
                factor = powered
            term = _poly_mul(term, factor)
            if peek() == ("op", "*"):
                pos += 1
                continue
            break
        for k, c in term.items():
            total[k] = total.get(k, 0.0) + c
        expect_term = False
        sign = 1.0
    if expect_term:
        raise ValueError(f"dangling operator in {text!r}")
    n = 1 + max((i for i, _ in total), default=0)
    m = 1 + max((j for _, j in total), default=0)
    C = np.zeros((n, m))
    for (i, j), c in total.items():
        C[i, j] += c
    return C


# --- singular solutions ------------------------------------------------------------

def log_r_field(Q: HPoint) -> ScalarField:
    """``ln r`` with ``r`` the hyperbolic distance to ``Q``; a wave solution off the cone of ``Q``."""
    xi, eta = Q.x, Q.y

    def r2(x, y):
        dx, dy = x - xi, y - eta
        return (dx - dy) * (dx + dy)

    def ev(x, y):
        d = r2(x, y)
        if np.any(d < 0):
            raise SpacelikeSeparation(f"ln r about {Q.as_tuple()} evaluated outside its cone")
        with np.errstate(divide="ignore"):
            return 0.5 * np.log(d)

    def grad(x, y):
        d = r2(x, y)
        return (x - xi) / d, -(y - eta) / d

    return ScalarField(ev, lambda x, y: np.zeros(np.broadcast(x, y).shape), grad,
                       f"ln r[{xi:g},{eta:g}]", (Q,))


def c_field(cfg) -> ScalarField:
    """The field ``ln((p/q) r / r*)`` for a dependence configuration."""
    lr, lrs = log_r_field(cfg.Q), log_r_field(cfg.Qstar)
    k = math.log(cfg.p / cfg.q)

    def grad(x, y):
        ax, ay = lr.gradient(x, y)
        bx, by = lrs.gradient(x, y)
        return ax - bx, ay - by

    return ScalarField(lambda x, y: k + lr(x, y) - lrs(x, y),
                       lambda x, y: np.zeros(np.broadcast(x, y).shape), grad,
                       "C", (cfg.Q, cfg.Qstar))


def constant_field(c: float) -> ScalarField:
    return ScalarField(lambda x, y: np.full(np.broadcast(x, y).shape, float(c)),
                       lambda x, y: np.zeros(np.broadcast(x, y).shape),
                       lambda x, y: (np.zeros(np.broadcast(x, y).shape),) * 2, f"{c:g}")


def coordinate_field(which: str) -> ScalarField:
    """``x`` or ``y`` as a field; both solve the wave equation."""
    if which == "x":
        return CharPolynomial([[0.0, 0.5], [0.5, 0.0]], label="x")
    if which == "y":
        return CharPolynomial([[0.0, -0.5], [0.5, 0.0]], label="y")
    raise ValueError("which must be 'x' or 'y'")


def manufactured(u: ScalarField, h: float = DEFAULT_FD_STEP) -> Tuple[ScalarField, ScalarField]:
    """Return ``(u, f)`` with ``f = u_xx - u_yy`` (analytic if available)."""
    if u.analytic_wave_op is not None:
        f = ScalarField(u.analytic_wave_op, label=f"wave_op[{u.label}]")
    else:
        f = ScalarField(lambda x, y: fd_wave_op(u, x, y, h), label=f"fd_wave_op[{u.label}]")
    return u, f
