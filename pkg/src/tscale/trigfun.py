"""Hyperbolic and trigonometric functions on time scales.

Every family is assembled from exponentials in :mod:`tscale.expfun`:

* Cayley: ``Cos = (E_{iw} + E_{-iw})/2``; exact Pythagorean identities.
* Hilger: ``cosh = (e_a + 1/e_a)/2`` with the delta exponential.
* Bohner-Peterson: ``cosh = (e_a + e_{-a})/2``; good derivatives, growing
  Pythagorean defect ``e_{mu w^2}``.
* Exact: restriction of the classical functions to the scale.
"""
from __future__ import annotations

import cmath
import math
from enum import Enum

from .errors import NotRegressive
from .expfun import CAYLEY, DELTA, CoefficientFunction, as_coefficient, eval_exp
from .timescale import GridFunction, TimeScale, delta_derivative


class TrigFamily(str, Enum):
    HILGER = "hilger"
    BOHNER_PETERSON = "bp"
    CAYLEY = "cayley"
    EXACT = "exact"


def default_anchor(ts: TimeScale) -> float:
    """Base point used when ``t0`` is omitted: 0 if it lies in the scale, else min."""
    return 0.0 if 0.0 in ts else ts.min


def _anchor(ts, t0):
    return default_anchor(ts) if t0 is None else t0


def _pair(ts, alpha: CoefficientFunction, t, t0, scheme):
    return eval_exp(scheme, alpha, ts, t, t0), eval_exp(scheme, -alpha, ts, t, t0)


def cayley_trig(ts: TimeScale, omega, t: float, t0: float | None = None) -> tuple[complex, complex]:
    """Cayley cosine and sine ``(Cos_w(t), Sin_w(t))``."""
    omega = as_coefficient(omega)
    ep, em = _pair(ts, omega.scaled(1j), t, _anchor(ts, t0), CAYLEY)
    return (ep + em) / 2, (ep - em) / 2j


def cayley_hyperbolic(ts: TimeScale, alpha, t: float, t0: float | None = None) -> tuple[complex, complex]:
    """Cayley ``(Cosh_a(t), Sinh_a(t))``."""
    ep, em = _pair(ts, as_coefficient(alpha), t, _anchor(ts, t0), CAYLEY)
    return (ep + em) / 2, (ep - em) / 2


def _check_delta_regressive(ts, alpha: CoefficientFunction, a, b, signs=(1,)):
    lo, hi = (a, b) if ts.snap(a) <= ts.snap(b) else (b, a)
    for seg in ts.segments(lo, hi):
        if seg.kind != "step":
            continue
        for s in signs:
            x = s * seg.mu * alpha(seg.start)
            if abs(1 + x) < 1e-10:
                raise NotRegressive("delta exponential needs 1 + mu*alpha != 0", "delta", seg.start, x)


def hilger_trig(ts: TimeScale, alpha, t: float, t0: float | None = None) -> tuple[complex, complex]:
    """Hilger ``(cosh_a, sinh_a)`` built from ``e_a`` and its reciprocal."""
    alpha = as_coefficient(alpha)
    t0 = _anchor(ts, t0)
    _check_delta_regressive(ts, alpha, t0, t)
    e = eval_exp(DELTA, alpha, ts, t, t0)
    return (e + 1 / e) / 2, (e - 1 / e) / 2


def hilger_derivative_residual(ts: TimeScale, alpha, t: float, t0: float | None = None) -> tuple[complex, complex]:
    """Residuals of Hilger's delta-derivative formulas for cosh and sinh at ``t``.

    At right-scattered points the exact quotient is used; at right-dense
    points the formulas reduce to ``cosh' = a sinh`` and are checked against
    an extrapolated finite difference.
    """
    alpha = as_coefficient(alpha)
    t0 = _anchor(ts, t0)
    t = ts.snap(t)
    mu = ts.graininess(t)
    a = alpha(t)
    ch, sh = hilger_trig(ts, alpha, t, t0)
    dch = delta_derivative(GridFunction(ts, lambda s: hilger_trig(ts, alpha, s, t0)[0]), t)
    dsh = delta_derivative(GridFunction(ts, lambda s: hilger_trig(ts, alpha, s, t0)[1]), t)
    den = 1 + mu * a
    c1 = 0.5 * mu * a * a / den
    c2 = (a + 0.5 * mu * a * a) / den
    return dch - (c1 * ch + c2 * sh), dsh - (c1 * sh + c2 * ch)


def bp_trig(ts: TimeScale, alpha, t: float, t0: float | None = None, trig: bool = False) -> tuple[complex, complex]:
    """Bohner-Peterson pair.

    With ``trig=False`` returns ``(cosh_a, sinh_a)``; with ``trig=True`` the
    argument is a frequency ``w`` and ``(cos_w, sin_w)`` is returned.
    """
    coeff = as_coefficient(alpha)
    if trig:
        coeff = coeff.scaled(1j)
    t0 = _anchor(ts, t0)
    _check_delta_regressive(ts, coeff, t0, t, signs=(1, -1))
    ep, em = _pair(ts, coeff, t, t0, DELTA)
    if trig:
        return (ep + em) / 2, (ep - em) / 2j
    return (ep + em) / 2, (ep - em) / 2


def bp_defect(ts: TimeScale, alpha, t: float, t0: float | None = None, trig: bool = False) -> complex:
    """Predicted Pythagorean defect of the Bohner-Peterson pair.

    ``e_{-mu a^2}(t)`` for ``cosh^2 - sinh^2``, ``e_{mu w^2}(t)`` for
    ``cos^2 + sin^2``.
    """
    coeff = as_coefficient(alpha)
    sign = 1 if trig else -1
    defect_coeff = CoefficientFunction(lambda s: sign * ts.graininess(s) * coeff(s) ** 2)
    return eval_exp(DELTA, defect_coeff, ts, t, _anchor(ts, t0))


def exact_trig(omega0: float, t: float, t0: float = 0.0) -> tuple[float, float]:
    x = omega0 * (t - t0)
    return math.cos(x), math.sin(x)


def exact_hyperbolic(alpha0: complex, t: float, t0: float = 0.0) -> tuple[complex, complex]:
    x = alpha0 * (t - t0)
    return cmath.cosh(x), cmath.sinh(x)


def trig_pair(family, ts: TimeScale, omega, t: float, t0: float | None = None, hyperbolic: bool = False):
    """Dispatch on :class:`TrigFamily`; returns ``(cos, sin)`` or ``(cosh, sinh)``."""
    family = TrigFamily(family)
    if family is TrigFamily.CAYLEY:
        return (cayley_hyperbolic if hyperbolic else cayley_trig)(ts, omega, t, t0)
    if family is TrigFamily.BOHNER_PETERSON:
        return bp_trig(ts, omega, t, t0, trig=not hyperbolic)
    if family is TrigFamily.HILGER:
        if not hyperbolic:
            # Hilger trigonometric functions coincide with the exact ones (cosh_{iw} is not real)
            return exact_trig(_constant_of(omega), t, _anchor(ts, t0))
        return hilger_trig(ts, omega, t, t0)
    c = _constant_of(omega)
    t0 = _anchor(ts, t0)
    return exact_hyperbolic(c, t, t0) if hyperbolic else exact_trig(c.real, t, t0)


def _constant_of(omega) -> complex:
    coeff = as_coefficient(omega)
    if coeff.constant is None:
        raise ValueError("exact trigonometric functions need a constant frequency")
    return coeff.constant
