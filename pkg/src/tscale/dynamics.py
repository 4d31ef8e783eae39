"""Time-scale analogues of first-order ODEs ``x' = f(x, t)``.

At a right-scattered point each analogue is a one-step numerical scheme
that maps ``x(t)`` to ``x(sigma(t))``; on dense stretches all of them reduce
to the ODE itself, which is integrated with a tight reference solver.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DegenerateAtMax, NotInScale, SolverDiverged
from .timescale import GridFunction, TimeScale, _richardson, mem_tol

TAU_DENSE = 1e-12
MAX_ITER = 50
NON_CONTRACTING_SWITCH = 8


class SchemeKind(str, Enum):
    FORWARD_EULER = "forward_euler"
    BACKWARD_EULER = "backward_euler"
    TRAPEZOIDAL1 = "trapezoidal1"
    TRAPEZOIDAL2 = "trapezoidal2"
    IMPLICIT_MIDPOINT = "implicit_midpoint"
    DISCRETE_GRADIENT = "discrete_gradient"


@dataclass
class VectorField:
    """Right-hand side ``f(x, t)`` of an ODE on ``C^N``.

    ``jacobian(x, t)`` is optional and used by the Newton fallback.  ``f`` is
    assumed complex-differentiable in ``x`` when states are complex.
    """

    f: Callable
    dim: int
    autonomous: bool = False
    jacobian: Callable | None = None

    def __call__(self, x, t):
        return np.asarray(self.f(x, t), dtype=complex).reshape(self.dim)

    def jac(self, x, t):
        if self.jacobian is not None:
            return np.asarray(self.jacobian(x, t), dtype=complex).reshape(self.dim, self.dim)
        return _fd_jacobian(lambda y: self(y, t), x)

    def check_jacobian(self, x, t, rtol=1e-5):
        """Spot-check a supplied Jacobian against finite differences."""
        if self.jacobian is None:
            return
        x = np.asarray(x, dtype=complex)
        fd = _fd_jacobian(lambda y: self(y, t), x)
        given = self.jac(x, t)
        scale = max(1.0, float(np.max(np.abs(fd))))
        if np.max(np.abs(fd - given)) > rtol * scale:
            raise ValueError("supplied jacobian disagrees with finite differences of f")

    @classmethod
    def linear(cls, alpha) -> "VectorField":
        """``f(x, t) = alpha(t) * x`` for a scalar or a constant matrix ``alpha``."""
        if callable(alpha):
            return cls(lambda x, t: alpha(t) * x, 1, False, lambda x, t: np.array([[alpha(t)]]))
        a = np.atleast_2d(np.asarray(alpha, dtype=complex))
        n = a.shape[0]
        return cls(lambda x, t: a @ x, n, True, lambda x, t: a)


def oscillator_field(omega0: float) -> VectorField:
    """First-order form ``q' = w p, p' = -w q`` of ``q'' + w^2 q = 0``."""
    a = np.array([[0.0, omega0], [-omega0, 0.0]])
    return VectorField(lambda x, t: a @ x, 2, True, lambda x, t: a)


@dataclass(frozen=True)
class HamiltonianSpec:
    """Separable ``H(p, q) = T(p) + V(q)``; callables act element-wise."""

    T: Callable
    V: Callable
    dT: Callable
    dV: Callable

    def energy(self, q, p) -> float:
        return float(np.sum(self.T(np.asarray(p))) + np.sum(self.V(np.asarray(q))))

    @classmethod
    def harmonic(cls, omega0: float = 1.0) -> "HamiltonianSpec":
        w2 = omega0 * omega0
        return cls(lambda p: 0.5 * p * p, lambda q: 0.5 * w2 * q * q, lambda p: p, lambda q: w2 * q)

    @classmethod
    def pendulum(cls, g: float = 1.0) -> "HamiltonianSpec":
        return cls(lambda p: 0.5 * p * p, lambda q: -g * np.cos(q), lambda p: p, lambda q: g * np.sin(q))


@dataclass
class SolveInfo:
    iterations: int
    residual: float
    method: str


# -- implicit solver ------------------------------------------------------------

def _fd_jacobian(func, x):
    x = np.asarray(x)
    dtype = np.result_type(x.dtype, float)
    f0 = func(x)
    n = x.size
    jac = np.empty((f0.size, n), dtype=np.result_type(dtype, f0.dtype))
    for i in range(n):
        h = 1e-7 * (1.0 + abs(x[i]))
        dx = np.zeros(n, dtype=dtype)
        dx[i] = h
        jac[:, i] = (func(x + dx) - func(x - dx)) / (2 * h)
    return jac


def solve_fixed_point(phi, y0, tol, dphi=None, max_iter=MAX_ITER, dtype=complex):
    """Solve ``y = phi(y)``.

    Plain iteration first; after :data:`NON_CONTRACTING_SWITCH` iterations that
    fail to cut the residual fourfold, switch to damped Newton on
    ``y - phi(y)``.  A growing residual switches immediately.
    Once the residual is below ``tol`` the iterate is polished while the
    residual keeps dropping.
    """
    y = np.array(y0, dtype=dtype)
    history = []

    def residual(v):
        r = v - phi(v)
        return r, float(abs(r).max()) if r.size else 0.0

    r, res = residual(y)
    history.append(res)
    method = "fixed-point"
    slow = 0
    it = 0
    polishing = 0
    while it < max_iter:
        if res <= tol:
            if res == 0.0 or polishing >= 3:
                break
            polishing += 1
        it += 1
        if method == "fixed-point":
            y_new = y - r
        else:
            jac = np.eye(y.size) - (dphi(y) if dphi is not None else _fd_jacobian(phi, y))
            try:
                step = np.linalg.solve(jac, -r)
            except np.linalg.LinAlgError:
                raise SolverDiverged("singular Newton matrix", history) from None
            lam = 1.0
            while True:
                y_new = (y + lam * step).astype(dtype)
                if residual(y_new)[1] < res or lam < 1e-4:
                    break
                lam /= 2
        r_new, res_new = residual(y_new)
        if polishing and res_new >= res:
            break
        if method == "fixed-point" and not res_new <= res:
            # diverging iterate: discard it and go straight to Newton
            method = "newton"
            history.append(res_new)
            continue
        if method == "fixed-point" and res_new > 0.25 * res:
            slow += 1
            if slow >= NON_CONTRACTING_SWITCH:
                method = "newton"
        y, r, res = y_new, r_new, res_new
        history.append(res)
        if not np.isfinite(res):
            break
    if not res <= tol:
        raise SolverDiverged(f"implicit solve did not converge (residual {res:.3g} > {tol:.3g})", history)
    return y, SolveInfo(it, res, method)


def _tol(x):
    return 1e-12 * (1.0 + float(np.max(np.abs(x))) if np.size(x) else 1.0)


# -- one step ----------------------------------------------------------------------

def step_with_info(scheme, field, x, t: float, mu: float):
    scheme = SchemeKind(scheme)
    if mu <= 0:
        raise ValueError("a scheme step needs mu > 0")
    if scheme is SchemeKind.DISCRETE_GRADIENT:
        if not isinstance(field, HamiltonianSpec):
            raise TypeError("discrete_gradient needs a HamiltonianSpec")
        x = np.asarray(x, dtype=float)
        n = x.size // 2
        qs, ps, info = _dg_solve(field, x[:n], x[n:], mu)
        return np.concatenate([qs, ps]), info
    if isinstance(field, HamiltonianSpec):
        raise TypeError(f"{scheme.value} needs a VectorField")

    x = np.asarray(x, dtype=complex).reshape(field.dim)
    ts_ = t + mu
    if scheme is SchemeKind.FORWARD_EULER:
        return x + mu * field(x, t), SolveInfo(0, 0.0, "explicit")

    fx_t = field(x, t)
    if scheme is SchemeKind.BACKWARD_EULER:
        phi = lambda y: x + mu * field(y, ts_)
        dphi = lambda y: mu * field.jac(y, ts_)
    elif scheme is SchemeKind.TRAPEZOIDAL1:
        phi = lambda y: x + 0.5 * mu * (fx_t + field(y, ts_))
        dphi = lambda y: 0.5 * mu * field.jac(y, ts_)
    elif scheme is SchemeKind.TRAPEZOIDAL2:
        fx_s = field(x, ts_)
        phi = lambda y: x + 0.25 * mu * (fx_t + field(y, t) + fx_s + field(y, ts_))
        dphi = lambda y: 0.25 * mu * (field.jac(y, t) + field.jac(y, ts_))
    elif field.autonomous:
        phi = lambda y: x + mu * field(0.5 * (x + y), t)
        dphi = lambda y: 0.5 * mu * field.jac(0.5 * (x + y), t)
    else:
        phi = lambda y: x + 0.5 * mu * (field(0.5 * (x + y), t) + field(0.5 * (x + y), ts_))
        dphi = lambda y: 0.25 * mu * (field.jac(0.5 * (x + y), t) + field.jac(0.5 * (x + y), ts_))
    return solve_fixed_point(phi, x + mu * fx_t, _tol(x), dphi)


def step(scheme, field, x, t: float, mu: float):
    """Advance ``x(t)`` to ``x(sigma(t))`` across a gap ``mu`` with ``scheme``."""
    return step_with_info(scheme, field, x, t, mu)[0]


# -- discrete gradient ----------------------------------------------------------------

def _tau_gap(a):
    return 1e-8 * (1.0 + np.abs(a))


def discrete_gradient(F, dF, a, b):
    """``(F(b) - F(a)) / (b - a)`` element-wise, with the limit ``dF`` for tiny gaps."""
    if np.ndim(a) == 0 and np.ndim(b) == 0:
        a, b = float(a), float(b)
        gap = b - a
        if abs(gap) < 1e-8 * (1.0 + abs(a)):
            return float(dF(0.5 * (a + b)))
        return float((F(b) - F(a)) / gap)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    gap = b - a
    small = np.abs(gap) < _tau_gap(a)
    safe = np.where(small, 1.0, gap)
    quotient = (F(b) - F(a)) / safe
    return np.where(small, dF(0.5 * (a + b)), quotient)


def _dg_solve(h: HamiltonianSpec, q, p, mu):
    q = np.atleast_1d(np.asarray(q, dtype=float))
    p = np.atleast_1d(np.asarray(p, dtype=float))
    n = q.size

    if n == 1:
        q0, p0 = float(q[0]), float(p[0])

        def phi(y):
            return np.array([
                q0 + mu * discrete_gradient(h.T, h.dT, p0, y[1]),
                p0 - mu * discrete_gradient(h.V, h.dV, q0, y[0]),
            ])
    else:
        def phi(y):
            Q, P = y[:n], y[n:]
            return np.concatenate([
                q + mu * discrete_gradient(h.T, h.dT, p, P),
                p - mu * discrete_gradient(h.V, h.dV, q, Q),
            ])

    guess = np.concatenate([q + mu * h.dT(p), p - mu * h.dV(q)])
    y, info = solve_fixed_point(phi, guess, _tol(np.concatenate([q, p])), dtype=float)
    return y[:n], y[n:], info


def discrete_gradient_step(h: HamiltonianSpec, q, p, mu: float):
    """Energy-conserving step of the separable Hamiltonian system across ``mu``.

    Returns ``(q_sigma, p_sigma)`` with the same shape as the inputs.
    """
    if mu <= 0:
        raise ValueError("a scheme step needs mu > 0")
    qs, ps, _ = _dg_solve(h, q, p, mu)
    if np.ndim(q) == 0:
        return float(qs[0]), float(ps[0])
    return qs, ps


# -- trajectories --------------------------------------------------------------------------

@dataclass
class Trajectory:
    times: list[float]
    states: np.ndarray
    iterations: list[int] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)

    def __len__(self):
        return len(self.times)

    def columns(self) -> list[str]:
        cols = ["t"]
        for i in range(self.states.shape[1]):
            cols += [f"re_x{i}", f"im_x{i}"]
        return cols + ["iterations", "residual"]

    def rows(self):
        for t, x, it, res in zip(self.times, self.states, self.iterations, self.residuals):
            row = [t]
            for v in x:
                v = complex(v)
                row += [v.real, v.imag]
            yield row + [it, res]

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns())
        for row in self.rows():
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text: str) -> "Trajectory":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        n = (len(header) - 3) // 2
        times, states, its, res = [], [], [], []
        for row in reader:
            times.append(float(row[0]))
            vals = [float(v) for v in row[1 : 1 + 2 * n]]
            states.append([complex(vals[2 * i], vals[2 * i + 1]) for i in range(n)])
            its.append(int(row[1 + 2 * n]))
            res.append(float(row[2 + 2 * n]))
        return cls(times, np.array(states, dtype=complex).reshape(len(times), n), its, res)

    def to_json(self) -> str:
        return json.dumps({
            "columns": self.columns(),
            "t": self.times,
            "re": self.states.real.tolist(),
            "im": self.states.imag.tolist(),
            "iterations": self.iterations,
            "residual": self.residuals,
        })

    @classmethod
    def from_json(cls, text: str) -> "Trajectory":
        d = json.loads(text)
        states = np.array(d["re"], dtype=float) + 1j * np.array(d["im"], dtype=float)
        return cls(d["t"], states, d["iterations"], d["residual"])


def _dense_rhs(field):
    if isinstance(field, HamiltonianSpec):
        def rhs(t, y):
            n = y.size // 2
            q, p = y[:n].real, y[n:].real
            return np.concatenate([field.dT(p), -field.dV(q)])
        return rhs
    return lambda t, y: field(y, t)


def integrate(scheme, field, ts: TimeScale, x0, t0: float, t1: float, dense_samples: int = 0) -> Trajectory:
    """Trajectory of the scheme's analogue over ``[t0, t1]`` on ``ts``.

    Every scattered point is recorded; dense sub-intervals are solved with a
    reference integrator and recorded at their endpoints, plus
    ``dense_samples`` interior points each.
    """
    scheme = SchemeKind(scheme)
    for t in (t0, t1):
        if t not in ts:
            raise NotInScale(t)
    if not ts.snap(t0) < ts.snap(t1):
        raise ValueError("integrate needs t0 < t1")
    is_dg = scheme is SchemeKind.DISCRETE_GRADIENT
    x = np.asarray(x0, dtype=float if is_dg else complex).ravel()
    if not is_dg:
        field.check_jacobian(x, t0)
    times, states, its, res = [ts.snap(t0)], [x.copy()], [0], [0.0]
    for seg in ts.segments(t0, t1):
        if seg.kind == "step":
            x, info = step_with_info(scheme, field, x, seg.start, seg.mu)
            times.append(seg.end)
            states.append(np.array(x))
            its.append(info.iterations)
            res.append(info.residual)
            continue
        t_eval = np.linspace(seg.start, seg.end, dense_samples + 2)[1:]
        sol = solve_ivp(
            _dense_rhs(field), (seg.start, seg.end), x.astype(complex),
            method="DOP853", rtol=TAU_DENSE, atol=TAU_DENSE, t_eval=t_eval,
        )
        if not sol.success:
            raise SolverDiverged(f"reference integrator failed on [{seg.start}, {seg.end}]: {sol.message}")
        for k, tk in enumerate(sol.t):
            xk = sol.y[:, k]
            times.append(float(tk))
            states.append(xk.real.copy() if is_dg else xk.copy())
            its.append(int(sol.nfev))
            res.append(0.0)
        times[-1] = seg.end
        x = states[-1]
    return Trajectory(times, np.array(states, dtype=complex), its, res)


# -- harmonic oscillator analogue ----------------------------------------------------------------

def double_average(q0, q1, q2, mu0: float, mu1: float):
    """Graininess-weighted average ``(mu1 <q>(sigma) + mu0 <q>) / (2 mu0)``.

    Reduces to ``(q2 + 2 q1 + q0)/4`` when consecutive gaps are equal.
    """
    return (mu1 * (q2 + q1) + mu0 * (q1 + q0)) / (4 * mu0)


def oscillator_residual(q: GridFunction, omega0: float, ts: TimeScale, t: float, weighting: str = "graininess") -> complex:
    """Residual of ``q^DD + w0^2 <<q>> = 0`` at ``t``.

    ``weighting="uniform"`` uses the plain ``(q2 + 2 q1 + q0)/4`` average,
    which matches the weighted one only where consecutive gaps agree.
    At right-dense points the classical ``q'' + w0^2 q`` is evaluated.
    """
    t = ts.snap(t)
    mu0 = ts.graininess(t)
    if mu0 == 0:
        i, s = ts._locate(t)
        lo, hi = ts.pieces[i]
        room = min(s - lo, hi - s)
        if room <= mem_tol(s):
            raise NotInScale(t, f"classical residual needs an interior dense point, got t={t}")
        h0 = min(room, 0.1 * max(1.0, abs(s)))
        qdd = _richardson(lambda h: (q(s + h) - 2 * q(s) + q(s - h)) / (h * h), h0, 2, tol=1e-7)
        return qdd + omega0**2 * q(s)
    t1 = ts.sigma(t)
    mu1 = ts.graininess(t1)
    if mu1 == 0:
        if ts.classify(t1).at_max:
            raise DegenerateAtMax(f"sigma(sigma(t)) does not exist past the maximum (t={t})")
        raise ValueError(f"mixed point t={t}: sigma(t)={t1} is right-dense")
    t2 = ts.sigma(t1)
    q0, q1, q2 = q(t), q(t1), q(t2)
    qdd = ((q2 - q1) / mu1 - (q1 - q0) / mu0) / mu0
    if weighting == "uniform":
        avg = (q2 + 2 * q1 + q0) / 4
    elif weighting == "graininess":
        avg = double_average(q0, q1, q2, mu0, mu1)
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    return qdd + omega0**2 * avg
