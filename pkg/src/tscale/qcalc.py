"""Modified q-calculus built on the Cayley construction.

The new q-exponential ``qexp(x)`` is the infinite product

    prod_k (1 + q^k (1-q) x/2) / (1 - q^k (1-q) x/2),

equivalently the series ``sum x^n / {n}!`` with the modified bracket
``{k} = [k]_q / ((1 + q^(k-1))/2)``.  It factors as ``e_q^(x/2) E_q^(x/2)``
through the two Jackson exponentials, and its imaginary-axis values lie on
the unit circle, so ``Cos_q^2 + Sin_q^2 = 1`` holds exactly.

Series are summed with mpmath at a working precision raised to cover the
cancellation between the largest term and the sum; products use floats.
"""
from __future__ import annotations

import cmath
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Callable

import mpmath

from .errors import NoConvergence, PoleInProduct

TAU_REG = 1e-10


def _default_max_terms() -> int:
    return int(os.environ.get("TSCALE_MAX_TERMS", "200000"))


@dataclass(frozen=True)
class QParams:
    q: float
    series_tol: float = 10 * sys.float_info.epsilon
    max_terms: int = field(default_factory=_default_max_terms)

    def __post_init__(self):
        if not 0 < self.q < 1:
            raise ValueError(f"q must lie in (0, 1), got {self.q}")
        if self.series_tol < 10 * sys.float_info.epsilon:
            raise ValueError("series_tol must be at least 10 machine epsilons")
        if self.max_terms < 1:
            raise ValueError("max_terms must be positive")

    @property
    def radius(self) -> float:
        """Radius of convergence ``2/(1-q)`` of the new q-exponential."""
        return 2.0 / (1.0 - self.q)


def _params(params) -> QParams:
    return params if isinstance(params, QParams) else QParams(float(params))


# -- brackets ----------------------------------------------------------------

def q_number(k: int, q: float) -> float:
    """Classical Jackson bracket ``[k]_q = 1 + q + ... + q^(k-1)``."""
    if k < 0:
        raise ValueError("bracket index must be non-negative")
    if q == 1 or k <= 64:
        return math.fsum(q**i for i in range(k))
    return (1 - q**k) / (1 - q)


def q_bracket(k: int, q: float) -> float:
    """Modified bracket ``{k} = [k]_q / ((1 + q^(k-1)) / 2)``; ``{1} = 1``, ``{2} = 2``."""
    if k < 1:
        raise ValueError("modified bracket needs k >= 1")
    return q_number(k, q) / ((1 + q ** (k - 1)) / 2)


def q_factorial(n: int, q: float) -> float:
    """``{n}! = {1}{2}...{n}``; accumulates logs past n = 150 to avoid overflow."""
    if n < 0:
        raise ValueError("factorial needs n >= 0")
    if n <= 150:
        out = 1.0
        for k in range(1, n + 1):
            out *= q_bracket(k, q)
        return out
    return math.exp(q_log_factorial(n, q))


def q_log_factorial(n: int, q: float) -> float:
    return math.fsum(math.log(q_bracket(k, q)) for k in range(1, n + 1))


# -- series --------------------------------------------------------------------

def _sum_series(x: complex, ratio: Callable, limit_ratio: float, params: QParams, what: str) -> complex:
    """Sum ``sum_n a_n`` with ``a_0 = 1`` and ``a_(n+1) = a_n * x * ratio(n)``.

    ``ratio`` returns mpmath numbers; ``limit_ratio`` bounds ``|x * ratio(n)|``
    for all later ``n`` (ratios are non-increasing), giving a geometric tail.
    """
    if limit_ratio >= 1:
        raise NoConvergence(f"{what}: |x| is outside the radius of convergence")
    extra = 20
    while True:
        with mpmath.workdps(17 + extra):
            xm = mpmath.mpc(x)
            term = mpmath.mpf(1)
            total = mpmath.mpc(1)
            biggest = mpmath.mpf(1)
            for n in range(params.max_terms):
                r = xm * ratio(n)
                term *= r
                total += term
                at = abs(term)
                biggest = max(biggest, at)
                rbound = max(abs(r), mpmath.mpf(limit_ratio))
                if rbound < 1 and at * rbound / (1 - rbound) <= params.series_tol * abs(total) / 4:
                    break
            else:
                raise NoConvergence(f"{what}: max_terms={params.max_terms} exhausted")
            lost = float(mpmath.log10(biggest / abs(total))) if total != 0 else 17.0
            if lost + 5 <= extra:
                return complex(total)
            extra = int(lost) + 10


def q_exp_series(x: complex, params) -> complex:
    """New q-exponential from ``sum x^n / {n}!``."""
    params = _params(params)
    q = mpmath.mpf(params.q)
    x = complex(x)
    if x == 0:
        return 1 + 0j

    def ratio(n):  # 1/{n+1}
        return (1 + q**n) / 2 * (1 - q) / (1 - q ** (n + 1))

    return _sum_series(x, ratio, abs(x) / params.radius, params, "q_exp_series")


def _log_tail(a: complex, q: float, params: QParams) -> complex:
    """``sum_(k>=0) log((1 + q^k a)/(1 - q^k a))`` for ``|a| < 1``.

    Expands each log as ``2 atanh`` and sums the geometric series in ``k``:
    ``2 sum_m a^(2m+1) / ((2m+1)(1 - q^(2m+1)))``.
    """
    total = 0j
    a2 = a * a
    power = a
    for m in range(params.max_terms):
        n = 2 * m + 1
        term = 2 * power / (n * (1 - q**n))
        total += term
        if abs(term) <= params.series_tol * max(abs(total), 1e-300) / 4 or power == 0:
            return total
        power *= a2
    raise NoConvergence(f"q_exp_product tail: max_terms={params.max_terms} exhausted")


def q_exp_product(x: complex, params) -> complex:
    """New q-exponential from its infinite product.

    Leading factors are multiplied out; once ``|q^k (1-q) x/2| <= 1/4`` the
    rest of the product is summed in closed form through its logarithm.
    """
    params = _params(params)
    q = params.q
    x = complex(x)
    c = (1 - q) * x / 2
    out = 1 + 0j
    qk = 1.0
    for k in range(params.max_terms):
        a = qk * c
        if abs(a) <= 0.25:
            return out * cmath.exp(_log_tail(a, q, params))
        num, den = 1 + a, 1 - a
        if abs(den) < TAU_REG * max(1.0, abs(num)):
            raise PoleInProduct(f"factor k={k} of the q-exponential product has a vanishing denominator (x={x})")
        out *= num / den
        qk *= q
    raise NoConvergence(f"q_exp_product: max_terms={params.max_terms} exhausted")


def q_exp(x: complex, params) -> complex:
    """Default evaluator (the product)."""
    return q_exp_product(x, params)


def jackson_exponentials(x: complex, params) -> tuple[complex, complex]:
    """Classical ``(e_q^x, E_q^x)`` from their series with ``[n]_q``."""
    params = _params(params)
    q = mpmath.mpf(params.q)
    x = complex(x)
    if x == 0:
        return 1 + 0j, 1 + 0j

    def small_ratio(n):  # 1/[n+1]_q
        return (1 - q) / (1 - q ** (n + 1))

    def big_ratio(n):  # q^n/[n+1]_q
        return q**n * (1 - q) / (1 - q ** (n + 1))

    small = _sum_series(x, small_ratio, abs(x) * (1 - params.q), params, "jackson e_q")
    big = _sum_series(x, big_ratio, 0.0, params, "jackson E_q")
    return small, big


# -- trigonometry and operators ---------------------------------------------------

def _check_radius(x, params: QParams):
    if abs(x) >= params.radius * (1 - TAU_REG):
        raise PoleInProduct(f"|x| = {abs(x)} reaches the pole radius 2/(1-q) = {params.radius}")


def q_trig(x: float, params) -> tuple[float, float]:
    """``(Cos_q x, Sin_q x)`` for real ``x``."""
    params = _params(params)
    _check_radius(x, params)
    ep = q_exp_product(1j * x, params)
    em = q_exp_product(-1j * x, params)
    cos = (ep + em) / 2
    sin = (ep - em) / 2j
    return cos.real, sin.real


def q_cos(x: float, params) -> float:
    return q_trig(x, params)[0]


def q_sin(x: float, params) -> float:
    return q_trig(x, params)[1]


def q_derivative(f: Callable, x: float, q: float) -> complex:
    """Jackson derivative ``(f(qx) - f(x)) / (qx - x)``."""
    if x == 0:
        raise ValueError("q-derivative needs x != 0")
    return (f(q * x) - f(x)) / (q * x - x)


def q_average(f: Callable, x: float, q: float) -> complex:
    """``(f(x) + f(qx)) / 2``."""
    return (f(x) + f(q * x)) / 2
