"""Named invariant suites with residual reports.

Each suite returns a list of :class:`Check` rows.  Random inputs come from a
fixed seed so every run is identical.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import dynamics, expfun, liegroup, qcalc, trigfun
from .expfun import CAYLEY, DELTA, NABLA, CoefficientFunction, eval_exp, pade, step_factor
from .timescale import GridFunction, Interval, Point, TimeScale, normalize, uniform

SEED = 20240611


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    value: float
    tol: float
    passed: bool

    @classmethod
    def at_most(cls, suite, name, value, tol):
        value = float(value)
        return cls(suite, name, value, tol, bool(value <= tol))

    @classmethod
    def at_least(cls, suite, name, value, tol):
        value = float(value)
        return cls(suite, name, value, tol, bool(value >= tol))

    @classmethod
    def within(cls, suite, name, value, target, tol):
        value = float(value)
        return cls(suite, f"{name} (target {target})", value, tol, bool(abs(value - target) <= tol))


# -- random inputs --------------------------------------------------------------

def random_scale(rng: np.random.Generator, max_points: int = 20, max_intervals: int = 2, span: float = 4.0) -> TimeScale:
    """Mixed scale in ``[0, span]``: up to ``max_points`` scattered points and dense intervals."""
    pieces = [Point(0.0), Point(span)]
    n_int = int(rng.integers(0, max_intervals + 1))
    for _ in range(n_int):
        a = rng.uniform(0, span * 0.85)
        pieces.append(Interval(a, a + rng.uniform(0.05, 0.4)))
    n_pts = int(rng.integers(2, max_points - 1))
    pieces.extend(Point(v) for v in rng.uniform(0, span, n_pts))
    return normalize(pieces)


def random_discrete_scale(rng, n_points: int = 10, span: float = 4.0) -> TimeScale:
    return normalize(Point(v) for v in np.concatenate([[0.0, span], rng.uniform(0, span, n_points - 2)]))


def random_gap_scale(rng, n_points: int = 15, gaps: tuple[float, float] = (0.1, 0.6)) -> TimeScale:
    """Discrete scale from 0 with independent gaps drawn from ``gaps``."""
    return normalize(Point(v) for v in np.concatenate([[0.0], np.cumsum(rng.uniform(*gaps, n_points - 1))]))


def random_coefficient(rng, amplitude: float = 0.5, complex_valued: bool = False) -> CoefficientFunction:
    """Smooth (hence rd-continuous) coefficient ``a + b sin(c t + d)``."""
    a, b = rng.uniform(-amplitude, amplitude, 2)
    c, d = rng.uniform(0.5, 2.0), rng.uniform(0, 2 * math.pi)
    if complex_valued:
        ai, bi = rng.uniform(-amplitude, amplitude, 2)
        return CoefficientFunction(lambda t: complex(a + b * math.sin(c * t + d), ai + bi * math.cos(c * t)))
    return CoefficientFunction(lambda t: a + b * math.sin(c * t + d))


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


# -- suites ----------------------------------------------------------------------

def suite_pythagorean(family: str = "cayley", n_scales: int = 50) -> list[Check]:
    rng = np.random.default_rng(SEED)
    name = "pythagorean"
    if family == "cayley":
        worst_trig = worst_hyp = 0.0
        for _ in range(n_scales):
            ts = random_scale(rng)
            omega = random_coefficient(rng, 0.8)
            alpha = random_coefficient(rng, 0.4)
            for t in ts.nodes():
                c, s = trigfun.cayley_trig(ts, omega, t, 0.0)
                ch, sh = trigfun.cayley_hyperbolic(ts, alpha, t, 0.0)
                worst_trig = max(worst_trig, abs(c * c + s * s - 1))
                worst_hyp = max(worst_hyp, abs(ch * ch - sh * sh - 1))
        return [
            Check.at_most(name, "cayley max|Cos^2+Sin^2-1|", worst_trig, 1e-12),
            Check.at_most(name, "cayley max|Cosh^2-Sinh^2-1|", worst_hyp, 1e-12),
        ]
    if family == "bp":
        worst_trig = worst_hyp = 0.0
        for _ in range(n_scales):
            ts = random_scale(rng)
            omega = random_coefficient(rng, 0.8)
            alpha = random_coefficient(rng, 0.4)
            for t in ts.nodes():
                c, s = trigfun.bp_trig(ts, omega, t, 0.0, trig=True)
                ch, sh = trigfun.bp_trig(ts, alpha, t, 0.0)
                worst_trig = max(worst_trig, _rel(c * c + s * s, trigfun.bp_defect(ts, omega, t, 0.0, trig=True)))
                worst_hyp = max(worst_hyp, _rel(ch * ch - sh * sh, trigfun.bp_defect(ts, alpha, t, 0.0)))
        return [
            Check.at_most(name, "bp cos^2+sin^2 vs e_{mu w^2} (rel)", worst_trig, 1e-11),
            Check.at_most(name, "bp cosh^2-sinh^2 vs e_{-mu a^2} (rel)", worst_hyp, 1e-11),
        ]
    if family == "hilger":
        worst = 0.0
        for _ in range(n_scales):
            ts = random_scale(rng)
            alpha = random_coefficient(rng, 0.4)
            for t in ts.nodes():
                ch, sh = trigfun.hilger_trig(ts, alpha, t, 0.0)
                worst = max(worst, abs(ch * ch - sh * sh - 1))
        return [Check.at_most(name, "hilger max|cosh^2-sinh^2-1|", worst, 1e-12)]
    raise ValueError(f"unknown family {family!r}")


def suite_semigroup(n_scales: int = 30) -> list[Check]:
    rng = np.random.default_rng(SEED + 1)
    name = "semigroup"
    out = []
    for scheme in (CAYLEY, pade(2, 2)):
        worst_semi = worst_inv = 0.0
        for _ in range(n_scales):
            ts = random_scale(rng)
            alpha = random_coefficient(rng, 0.5, complex_valued=True)
            nodes = ts.nodes()
            for _ in range(4):
                t, t0, t1 = (nodes[i] for i in rng.integers(0, len(nodes), 3))
                lhs = eval_exp(scheme, alpha, ts, t, t0) * eval_exp(scheme, alpha, ts, t0, t1)
                worst_semi = max(worst_semi, _rel(lhs, eval_exp(scheme, alpha, ts, t, t1)))
                e = eval_exp(scheme, alpha, ts, t, t0)
                worst_inv = max(worst_inv, _rel(eval_exp(scheme, -alpha, ts, t, t0), 1 / e))
        out.append(Check.at_most(name, f"{scheme} E(t,t0)E(t0,t1)=E(t,t1) (rel)", worst_semi, 1e-12))
        out.append(Check.at_most(name, f"{scheme} E_-a = 1/E_a (rel)", worst_inv, 1e-12))
    Z = uniform(0, 1, 3)
    for scheme, a in ((DELTA, 1.0), (NABLA, 0.5)):
        gap = abs(eval_exp(scheme, -a, Z, 1, 0) - 1 / eval_exp(scheme, a, Z, 1, 0))
        out.append(Check.at_least(name, f"{scheme} inverse-law violation on Z, alpha={a}", gap, 1e-3))
    return out


def suite_oplus(n_scales: int = 30) -> list[Check]:
    rng = np.random.default_rng(SEED + 2)
    name = "oplus"
    worst_plus = worst_bij = 0.0
    for i in range(n_scales):
        ts = random_scale(rng) if i % 2 else random_discrete_scale(rng)
        alpha = random_coefficient(rng, 0.5, complex_valued=True)
        beta = random_coefficient(rng, 0.5, complex_valued=True)
        gamma = CoefficientFunction(lambda s: expfun.circle_plus(alpha(s), beta(s), ts.graininess(s)))
        delta_beta = CoefficientFunction(lambda s: expfun.alpha_to_beta(alpha(s), ts.graininess(s)))
        for t in ts.nodes():
            prod = eval_exp(CAYLEY, alpha, ts, t, 0.0) * eval_exp(CAYLEY, beta, ts, t, 0.0)
            worst_plus = max(worst_plus, _rel(prod, eval_exp(CAYLEY, gamma, ts, t, 0.0)))
            worst_bij = max(worst_bij, _rel(eval_exp(CAYLEY, alpha, ts, t, 0.0), eval_exp(DELTA, delta_beta, ts, t, 0.0)))
    return [
        Check.at_most(name, "E_a E_b = E_(a+b) (rel)", worst_plus, 1e-11),
        Check.at_most(name, "Cayley E_a = delta e_beta(a) (rel)", worst_bij, 1e-11),
    ]


def suite_cylinder(n_scales: int = 20) -> list[Check]:
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    for _ in range(n_scales):
        ts = random_scale(rng, max_intervals=2)
        alpha = random_coefficient(rng, 0.5, complex_valued=True)
        for t in ts.nodes():
            worst = max(worst, _rel(eval_exp(CAYLEY, alpha, ts, t, 0.0), expfun.cylinder_exp(alpha, ts, t, 0.0)))
    return [Check.at_most("cylinder", "product vs exp(int zeta) (rel)", worst, 1e-10)]


ORDER_ZS = (0.1, 0.05, 0.025, 0.0125)


def measured_slope(scheme) -> float:
    zs = np.array(ORDER_ZS)
    errs = np.array([abs(step_factor(scheme, z, z, 1.0) - cmath.exp(z)) for z in zs])
    return float(np.polyfit(np.log(zs), np.log(errs), 1)[0])


def suite_order() -> list[Check]:
    name = "order"
    out = [
        Check.within(name, "delta slope", measured_slope(DELTA), 2.0, 0.05),
        Check.within(name, "nabla slope", measured_slope(NABLA), 2.0, 0.05),
        Check.within(name, "cayley slope", measured_slope(CAYLEY), 3.0, 0.05),
        Check.within(name, "pade(2,2) slope", measured_slope(pade(2, 2)), 5.0, 0.1),
    ]
    z = ORDER_ZS[-1]
    coeff = (step_factor(CAYLEY, z, z, 1.0) - cmath.exp(z)).real / z**3
    out.append(Check.at_most(name, "cayley leading coefficient rel. dev. from 1/12", abs(coeff * 12 - 1), 0.02))
    return out


def suite_unit_circle(n: int = 100) -> list[Check]:
    rng = np.random.default_rng(SEED + 4)
    name = "unit-circle"
    out = []
    for scheme in (CAYLEY, pade(2, 2), pade(3, 3)):
        worst = 0.0
        for _ in range(n):
            omega, mu = rng.uniform(-5, 5), rng.uniform(0.01, 1.5)
            worst = max(worst, abs(abs(step_factor(scheme, 1j * omega, 1j * omega, mu)) - 1))
        out.append(Check.at_most(name, f"{scheme} ||m(i w mu)|-1|", worst, 1e-13))
    c, s = trigfun.bp_trig(uniform(0, 1, 1), 1.0, 1.0, 0.0, trig=True)
    out.append(Check.at_most(name, "bp cos^2+sin^2 on Z at t=1 vs 2", abs(c * c + s * s - 2), 1e-11))
    out.extend(suite_pythagorean("bp", n_scales=20))
    return out


def suite_energy(steps: int = 10_000) -> list[Check]:
    rng = np.random.default_rng(SEED + 5)
    name = "energy"
    qs, ps = dynamics.discrete_gradient_step(dynamics.HamiltonianSpec.harmonic(), 1.0, 0.0, 1.0)
    out = [Check.at_most(name, "hand case (1,0,1)->(0.6,-0.8)", max(abs(qs - 0.6), abs(ps + 0.8)), 1e-14)]
    systems = {
        "pendulum": (dynamics.HamiltonianSpec.pendulum(), 0.5, 0.3),
        "oscillator": (dynamics.HamiltonianSpec.harmonic(1.3), 1.0, 0.2),
    }
    for label, (h, q, p) in systems.items():
        for grid in ("uniform", "nonuniform"):
            mus = np.full(steps, 0.1) if grid == "uniform" else rng.uniform(0.02, 0.3, steps)
            qq, pp = q, p
            h0 = h.energy(qq, pp)
            worst = 0.0
            for mu in mus:
                qq, pp = dynamics.discrete_gradient_step(h, qq, pp, float(mu))
                worst = max(worst, abs(h.energy(qq, pp) - h0))
            out.append(Check.at_most(name, f"{label} {grid} max|H-H0|/|H0| over {steps} steps", worst / abs(h0), 1e-11))
    return out


def cayley_sin_cos(omega0: float, ts: TimeScale):
    """GridFunctions for Cayley Sin and Cos anchored at ``min(ts)``."""
    t0 = ts.min
    sin = GridFunction(ts, lambda t: trigfun.cayley_trig(ts, omega0, t, t0)[1])
    cos = GridFunction(ts, lambda t: trigfun.cayley_trig(ts, omega0, t, t0)[0])
    return sin, cos


def oscillator_worst(omega0: float, ts: TimeScale, weighting: str = "graininess") -> float:
    worst = 0.0
    for q in cayley_sin_cos(omega0, ts):
        pts = ts.nodes()
        for t in pts[:-2]:
            worst = max(worst, abs(dynamics.oscillator_residual(q, omega0, ts, t, weighting)))
    return worst


def implicit_midpoint_energy_drift(omega0: float = 1.0, h: float = 0.05, steps: int = 100_000) -> float:
    field = dynamics.oscillator_field(omega0)
    x = np.array([1.0, 0.3], dtype=complex)
    e0 = float(np.sum(np.abs(x) ** 2))
    worst = 0.0
    for _ in range(steps):
        x = dynamics.step(dynamics.SchemeKind.IMPLICIT_MIDPOINT, field, x, 0.0, h)
        worst = max(worst, abs(float(np.sum(np.abs(x) ** 2)) - e0))
    return worst


def suite_oscillator(steps: int = 100_000) -> list[Check]:
    rng = np.random.default_rng(SEED + 6)
    name = "oscillator"
    out = [
        Check.at_most(name, "Cayley Sin/Cos residual, uniform Z", oscillator_worst(1.0, uniform(0, 1, 30)), 1e-11),
        Check.at_most(name, "Cayley Sin/Cos residual, {0,0.5,1.5,2}", oscillator_worst(0.7, normalize(Point(v) for v in (0, 0.5, 1.5, 2))), 1e-11),
        Check.at_most(name, "Cayley Sin/Cos residual, random grids", max(oscillator_worst(1.1, random_gap_scale(rng)) for _ in range(5)), 1e-11),
    ]
    out.append(Check.at_most(name, f"implicit midpoint |E-E0| over {steps} steps", implicit_midpoint_energy_drift(steps=steps), 1e-9))
    return out


def suite_exact(n_scales: int = 20) -> list[Check]:
    rng = np.random.default_rng(SEED + 7)
    name = "exact"
    worst = worst_psi = 0.0
    for _ in range(n_scales):
        ts = random_scale(rng)
        a = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        for t in ts.scattered_points():
            mu = ts.graininess(t)
            x = eval_exp(expfun.EXACT, a, ts, t, 0.0)
            xs = eval_exp(expfun.EXACT, a, ts, ts.sigma(t), 0.0)
            psi = expfun.exact_psi(a, mu)
            lhs = (xs - x) / mu
            worst = max(worst, _rel(a * psi * (x + xs) / 2, lhs))
            worst_psi = max(worst_psi, abs(psi - 2 * cmath.tanh(a * mu / 2) / (a * mu)))
    return [
        Check.at_most(name, "x^D = a psi <x> (rel)", worst, 1e-12),
        Check.at_most(name, "psi vs 2 tanh(a mu/2)/(a mu)", worst_psi, 1e-14),
    ]


Q_GRID = (0.3, 0.5, 0.7, 0.9)
X_FRACTIONS = (-0.8, -0.5, -0.2, 0.1, 0.4, 0.8)


def q_points():
    """The (q, x) grid: |x| up to 0.8 of the radius, real, imaginary and diagonal."""
    for q in Q_GRID:
        radius = 2 / (1 - q)
        for f in X_FRACTIONS:
            for direction in (1, 1j, cmath.exp(0.25j * math.pi)):
                yield q, f * radius * direction


def suite_qcalc() -> list[Check]:
    name = "qcalc"
    worst_ps = worst_fact = worst_rec = 0.0
    for q, x in q_points():
        prod = qcalc.q_exp_product(x, q)
        worst_ps = max(worst_ps, _rel(qcalc.q_exp_series(x, q), prod))
        e, E = qcalc.jackson_exponentials(x / 2, q)
        worst_fact = max(worst_fact, _rel(e * E, prod))
        worst_rec = max(worst_rec, abs(qcalc.q_exp_product(-x, q) * prod - 1))
    worst_pyth = worst_ds = worst_dc = 0.0
    for q in Q_GRID:
        radius = 2 / (1 - q)
        for f in X_FRACTIONS:
            x = f * radius
            c, s = qcalc.q_trig(x, q)
            worst_pyth = max(worst_pyth, abs(c * c + s * s - 1))
            sin = lambda y: qcalc.q_sin(y, q)
            cos = lambda y: qcalc.q_cos(y, q)
            worst_ds = max(worst_ds, abs(qcalc.q_derivative(sin, x, q) - qcalc.q_average(cos, x, q)))
            worst_dc = max(worst_dc, abs(qcalc.q_derivative(cos, x, q) + qcalc.q_average(sin, x, q)))
    limit = max(abs(qcalc.q_exp_product(x, 0.999) - cmath.exp(x)) for x in (-1, -0.5, 0.5, 1, 1j, -1j))
    return [
        Check.at_most(name, "product vs series (rel)", worst_ps, 1e-12),
        Check.at_most(name, "e_q^(x/2) E_q^(x/2) vs product (rel)", worst_fact, 1e-12),
        Check.at_most(name, "E^-x E^x - 1", worst_rec, 1e-13),
        Check.at_most(name, "Cos_q^2 + Sin_q^2 - 1", worst_pyth, 1e-13),
        Check.at_most(name, "D_q Sin_q - <Cos_q>", worst_ds, 1e-11),
        Check.at_most(name, "D_q Cos_q + <Sin_q>", worst_dc, 1e-11),
        Check.at_most(name, "q=0.999 vs exp(x), |x|<=1", limit, 5e-3),
    ]


def _random_algebra(rng, group: liegroup.QuadraticGroupSpec, scale: float = 1.0) -> np.ndarray:
    """Algebra element with purely imaginary spectrum (bounded flow)."""
    n = group.n
    if group.complex_field:
        M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        H = M + M.conj().T
        A = 1j * H
        A -= np.trace(A) / n * np.eye(n)
    elif np.allclose(group.J, np.eye(n)):
        M = rng.normal(size=(n, n))
        A = M - M.T
    else:
        M = rng.normal(size=(n, n))
        S = M @ M.T + n * np.eye(n)
        A = np.linalg.solve(group.J, S)
    return scale * A / np.linalg.norm(A)


def suite_lie(steps: int = 1000) -> list[Check]:
    rng = np.random.default_rng(SEED + 8)
    name = "lie"
    out = []
    groups = {
        "SO(3)": liegroup.QuadraticGroupSpec.orthogonal(3),
        "SU(2)": liegroup.QuadraticGroupSpec.unitary(2),
        "Sp(2)": liegroup.QuadraticGroupSpec.symplectic(1),
        "Sp(4)": liegroup.QuadraticGroupSpec.symplectic(2),
    }
    for label, group in groups.items():
        worst = 0.0
        for grid in ("uniform", "nonuniform"):
            ts = uniform(0, 0.05, steps) if grid == "uniform" else random_discrete_scale(rng, steps + 1, span=50.0)
            A0 = _random_algebra(rng, group, 2.0)
            A1 = _random_algebra(rng, group, 1.0)
            A = lambda t, A0=A0, A1=A1: A0 + math.sin(t) * A1
            pts = liegroup.flow(liegroup.LieFlowProblem(group, A, np.eye(group.n), ts), ts.min, ts.max)
            worst = max(worst, max(p.defect for p in pts))
        out.append(Check.at_most(name, f"{label} max membership defect, {steps} steps", worst, 1e-10))
    ts = random_scale(rng)
    alpha = 1j * rng.uniform(-2, 2)
    problem = liegroup.LieFlowProblem(liegroup.QuadraticGroupSpec.unitary(1), np.array([[alpha]]), np.eye(1), ts)
    pts = liegroup.flow(problem, 0.0, ts.max)
    worst = max(_rel(p.Phi[0, 0], eval_exp(CAYLEY, alpha, ts, p.t, 0.0)) for p in pts)
    out.append(Check.at_most(name, "1x1 flow vs scalar Cayley exponential (rel)", worst, 1e-13))
    R = liegroup.cayley_matrix(np.array([[0.0, -1.0], [1.0, 0.0]]), 2.0)
    out.append(Check.at_most(name, "mu=2 planar Cayley = 90 deg rotation", np.abs(R - np.array([[0.0, -1.0], [1.0, 0.0]])).max(), 1e-15))
    return out


SUITES: dict[str, Callable[[], list[Check]]] = {
    "pythagorean": suite_pythagorean,
    "semigroup": suite_semigroup,
    "oplus": suite_oplus,
    "cylinder": suite_cylinder,
    "order": suite_order,
    "unit-circle": suite_unit_circle,
    "energy": suite_energy,
    "oscillator": suite_oscillator,
    "exact": suite_exact,
    "qcalc": suite_qcalc,
    "lie": suite_lie,
}


def run_suite(name: str, **kwargs) -> list[Check]:
    if name == "all":
        out = []
        for fn in SUITES.values():
            out.extend(fn())
        return out
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or 'all'")
    return SUITES[name](**kwargs)
