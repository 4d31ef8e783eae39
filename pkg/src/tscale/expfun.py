"""Exponential functions on time scales.

Five families share one evaluation path: on dense sub-intervals every
family reduces to ``exp(integral of alpha)``; at a right-scattered point
``t`` each family multiplies by its own step factor ``x(sigma(t)) = m * x(t)``.

========  ============================================
delta     ``1 + mu*alpha(t)``
nabla     ``1 / (1 - mu*alpha(sigma(t)))``
cayley    ``(1 + mu*alpha/2) / (1 - mu*alpha/2)``
pade j,k  ``P_j(mu*alpha) / Q_k(mu*alpha)``
exact     ``exp(mu*alpha)`` (constant alpha only)
========  ============================================
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Number
from typing import Callable, NamedTuple

from .errors import NonConstantCoefficient, NotRegressive, OrderTooLarge, SingularOplus
from .timescale import GridFunction, TimeScale, delta_integral, quad_complex

TAU_REG = 1e-10
PADE_MAX_ORDER = 12


@dataclass(frozen=True)
class CoefficientFunction:
    """A coefficient ``alpha: T -> C``.  ``constant`` is set when alpha is constant."""

    func: Callable[[float], complex]
    constant: complex | None = None

    @classmethod
    def const(cls, value) -> "CoefficientFunction":
        value = complex(value)
        return cls(lambda t, v=value: v, value)

    def __call__(self, t: float) -> complex:
        if self.constant is not None:
            return self.constant
        return complex(self.func(t))

    def __neg__(self) -> "CoefficientFunction":
        if self.constant is not None:
            return CoefficientFunction.const(-self.constant)
        return CoefficientFunction(lambda t: -self(t))

    def scaled(self, factor: complex) -> "CoefficientFunction":
        if self.constant is not None:
            return CoefficientFunction.const(factor * self.constant)
        return CoefficientFunction(lambda t: factor * self(t))

    def conjugate(self) -> "CoefficientFunction":
        if self.constant is not None:
            return CoefficientFunction.const(self.constant.conjugate())
        return CoefficientFunction(lambda t: self(t).conjugate())


def as_coefficient(alpha) -> CoefficientFunction:
    """Accept a number, a callable, or a :class:`CoefficientFunction`."""
    if isinstance(alpha, CoefficientFunction):
        return alpha
    if isinstance(alpha, Number):
        return CoefficientFunction.const(alpha)
    if callable(alpha):
        return CoefficientFunction(alpha)
    raise TypeError(f"cannot use {alpha!r} as a coefficient")


@dataclass(frozen=True)
class ExpScheme:
    kind: str
    j: int = 0
    k: int = 0

    def __post_init__(self):
        if self.kind not in ("delta", "nabla", "cayley", "pade", "exact"):
            raise ValueError(f"unknown exponential scheme {self.kind!r}")
        if self.kind == "pade":
            pade_coefficients(self.j, self.k)  # validates orders

    def __str__(self):
        return f"pade({self.j},{self.k})" if self.kind == "pade" else self.kind

    @property
    def symmetric(self) -> bool:
        """True when the step map sends the imaginary axis to the unit circle."""
        return self.kind in ("cayley", "exact") or (self.kind == "pade" and self.j == self.k)

    @classmethod
    def parse(cls, text: str) -> "ExpScheme":
        """``delta``, ``nabla``, ``cayley``, ``exact`` or ``pade:j:k``."""
        name, *orders = text.strip().lower().replace(",", ":").split(":")
        if name == "pade":
            if len(orders) != 2:
                raise ValueError("pade scheme needs orders, e.g. pade:2:2")
            return pade(int(orders[0]), int(orders[1]))
        if orders:
            raise ValueError(f"scheme {name!r} takes no orders")
        return cls(name)


DELTA = ExpScheme("delta")
NABLA = ExpScheme("nabla")
CAYLEY = ExpScheme("cayley")
EXACT = ExpScheme("exact")


def pade(j: int, k: int) -> ExpScheme:
    return ExpScheme("pade", j, k)


# -- Pade table ---------------------------------------------------------------

@dataclass(frozen=True)
class PadeApproximant:
    j: int
    k: int
    p_exact: tuple[Fraction, ...]
    q_exact: tuple[Fraction, ...]

    @property
    def p_coeffs(self) -> tuple[float, ...]:
        return tuple(float(c) for c in self.p_exact)

    @property
    def q_coeffs(self) -> tuple[float, ...]:
        return tuple(float(c) for c in self.q_exact)

    def numerator(self, x: complex) -> complex:
        return _horner(self.p_coeffs, x)

    def denominator(self, x: complex) -> complex:
        return _horner(self.q_coeffs, x)

    def __call__(self, x: complex) -> complex:
        return self.numerator(x) / self.denominator(x)


def _horner(coeffs, x):
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = c + x * acc
    return acc


@lru_cache(maxsize=None)
def pade_coefficients(j: int, k: int) -> PadeApproximant:
    """Classical ``[j/k]`` Pade approximant of ``exp(x)``, exact rationals."""
    if j < 0 or k < 0 or j + k < 1:
        raise ValueError(f"Pade orders need j, k >= 0 and j + k >= 1, got ({j}, {k})")
    if j + k > PADE_MAX_ORDER:
        raise OrderTooLarge(f"Pade order j + k = {j + k} exceeds the cap {PADE_MAX_ORDER}")
    f = math.factorial
    n = j + k
    p = tuple(Fraction(f(j) * f(n - i), f(n) * f(i) * f(j - i)) for i in range(j + 1))
    q = tuple(Fraction((-1) ** i * f(k) * f(n - i), f(n) * f(i) * f(k - i)) for i in range(k + 1))
    return PadeApproximant(j, k, p, q)


# -- scalar maps ----------------------------------------------------------------

def _near_zero(den: complex, num: complex = 1.0) -> bool:
    return abs(den) < TAU_REG * max(1.0, abs(num))


def cylinder(mu: float, z: complex) -> complex:
    """Cylinder transform ``zeta_mu(z)``; equals ``z`` when ``mu == 0``."""
    z = complex(z)
    if mu == 0:
        return z
    x = mu * z
    num, den = 1 + x / 2, 1 - x / 2
    if _near_zero(den, num) or _near_zero(num, den):
        raise NotRegressive("cylinder transform needs mu*z != +-2", "cayley", value=x)
    return cmath.log(num / den) / mu


def alpha_to_beta(alpha: complex, mu: float) -> complex:
    """Delta coefficient beta with ``E_alpha = e_beta`` at graininess ``mu``."""
    alpha = complex(alpha)
    x = mu * alpha
    den = 1 - x / 2
    if _near_zero(den, alpha) or _near_zero(1 + x / 2):
        raise NotRegressive("alpha_to_beta needs mu*alpha != +-2", "cayley", value=x)
    return alpha / den


def beta_to_alpha(beta: complex, mu: float) -> complex:
    """Inverse of :func:`alpha_to_beta`."""
    beta = complex(beta)
    if _near_zero(1 + mu * beta):
        raise NotRegressive("beta_to_alpha needs mu*beta != -1", "delta", value=mu * beta)
    return beta / (1 + mu * beta / 2)


def circle_plus(alpha: complex, beta: complex, mu: float) -> complex:
    """Addition law under which Cayley exponentials multiply."""
    alpha, beta = complex(alpha), complex(beta)
    den = 1 + mu * mu * alpha * beta / 4
    if _near_zero(den, alpha + beta):
        raise SingularOplus(f"1 + mu^2*alpha*beta/4 vanishes for alpha={alpha}, beta={beta}, mu={mu}")
    return (alpha + beta) / den


def exact_psi(alpha: complex, mu: float) -> complex:
    """Correction ``psi`` making ``exp(alpha*(t - t0))`` solve ``x^D = alpha*psi*<x>``."""
    if mu == 0:
        return 1.0 + 0j
    x = complex(alpha) * mu
    if abs(x) < 1e-4:
        x2 = x * x
        return 1 - x2 / 12 + x2 * x2 / 120
    return 2 * cmath.tanh(x / 2) / x


# -- step factors -----------------------------------------------------------------

def step_factor(scheme: ExpScheme, alpha_t: complex, alpha_sigma: complex, mu: float, t: float | None = None) -> complex:
    """Multiplier ``m`` with ``x(sigma(t)) = m * x(t)`` across a gap ``mu``."""
    kind = scheme.kind
    if kind == "nabla":
        x = mu * complex(alpha_sigma)
        den = 1 - x
        if _near_zero(den):
            raise NotRegressive("nabla step needs mu*alpha(sigma(t)) != 1", scheme, t, x)
        return 1 / den
    x = mu * complex(alpha_t)
    if kind == "delta":
        return 1 + x
    if kind == "cayley":
        num, den = 1 + x / 2, 1 - x / 2
        if _near_zero(den, num):
            raise NotRegressive("Cayley step needs mu*alpha != 2", scheme, t, x)
        return num / den
    if kind == "exact":
        return cmath.exp(x)
    approx = pade_coefficients(scheme.j, scheme.k)
    num, den = approx.numerator(x), approx.denominator(x)
    if _near_zero(den, num):
        raise NotRegressive("Pade step denominator vanishes", scheme, t, x)
    return num / den


def is_regressive(scheme: ExpScheme, alpha: complex, mu: float) -> bool:
    """Whether the step map is defined *and* invertible at ``mu*alpha``."""
    x = mu * complex(alpha)
    if scheme.kind == "delta":
        return not _near_zero(1 + x)
    if scheme.kind == "nabla":
        return not _near_zero(1 - x)
    if scheme.kind == "exact":
        return True
    approx = pade_coefficients(1, 1) if scheme.kind == "cayley" else pade_coefficients(scheme.j, scheme.k)
    num, den = approx.numerator(x), approx.denominator(x)
    return not (_near_zero(den, num) or _near_zero(num, den))


def eval_exp(
    scheme: ExpScheme,
    alpha,
    ts: TimeScale,
    t: float,
    t0: float,
) -> complex:
    """Evaluate the exponential ``E(t, t0)`` of ``scheme`` with coefficient ``alpha``.

    For ``t < t0`` the reciprocal of the forward path product is returned, so
    ``E(t, t0) * E(t0, t1) == E(t, t1)`` for any ordering.
    """
    alpha = as_coefficient(alpha)
    if scheme.kind == "exact":
        if alpha.constant is None:
            raise NonConstantCoefficient("the exact exponential needs a constant coefficient")
        ts._locate(t)
        ts._locate(t0)
        return cmath.exp(alpha.constant * (ts.snap(t) - ts.snap(t0)))

    backward = ts.snap(t) < ts.snap(t0)
    a, b = (t, t0) if backward else (t0, t)
    value = 1 + 0j
    for seg in ts.segments(a, b):
        if seg.kind == "step":
            value *= step_factor(scheme, alpha(seg.start), alpha(seg.end), seg.mu, seg.start)
        elif alpha.constant is not None:
            value *= cmath.exp(alpha.constant * (seg.end - seg.start))
        else:
            value *= cmath.exp(quad_complex(alpha, seg.start, seg.end))
    if backward:
        if value == 0:
            raise NotRegressive("exponential vanishes on the path, cannot invert", scheme, t)
        return 1 / value
    return value


def cylinder_exp(alpha, ts: TimeScale, t: float, t0: float) -> complex:
    """Cayley exponential through ``exp(delta integral of zeta_mu(alpha))``.

    Independent of :func:`eval_exp`; used to cross-check it.
    """
    alpha = as_coefficient(alpha)
    zeta = GridFunction(ts, lambda s: cylinder(ts.graininess(s), alpha(s)))
    if ts.snap(t) >= ts.snap(t0):
        return cmath.exp(delta_integral(zeta, t0, t))
    return cmath.exp(-delta_integral(zeta, t, t0))


# -- local error -------------------------------------------------------------------

class LocalError(NamedTuple):
    order: int | None
    coefficient: Fraction

    def term(self, z: complex) -> complex:
        if self.order is None:
            return 0j
        return float(self.coefficient) * z**self.order


def _series_of_ratio(p, q, n):
    """First n+1 Taylor coefficients of p(x)/q(x) (q[0] != 0), exact."""
    p = list(p) + [Fraction(0)] * (n + 1)
    q = list(q) + [Fraction(0)] * (n + 1)
    out = []
    for i in range(n + 1):
        acc = p[i] - sum(q[m] * out[i - m] for m in range(1, i + 1))
        out.append(acc / q[0])
    return out


def local_error_expansion(scheme: ExpScheme, z: complex | None = None) -> LocalError:
    """Leading term ``c * z**n`` of ``step_factor(z) - exp(z)``.

    Computed from exact rational series.  If ``z`` is given it must satisfy
    ``|z| < 1``.
    """
    if z is not None and abs(z) >= 1:
        raise ValueError("series comparison needs |z| < 1")
    if scheme.kind == "exact":
        return LocalError(None, Fraction(0))
    if scheme.kind in ("delta", "nabla", "cayley"):
        j, k = {"delta": (1, 0), "nabla": (0, 1), "cayley": (1, 1)}[scheme.kind]
    else:
        j, k = scheme.j, scheme.k
    approx = pade_coefficients(j, k)
    n = j + k + 2
    series = _series_of_ratio(approx.p_exact, approx.q_exact, n)
    for i, c in enumerate(series):
        diff = c - Fraction(1, math.factorial(i))
        if diff != 0:
            return LocalError(i, diff)
    raise AssertionError("Pade approximant cannot match exp beyond order j + k")
