"""Cayley flows on quadratic matrix Lie groups ``{X : X* J X = J}``.

At a right-scattered point the flow of ``Phi^D = A <Phi>`` is the matrix
Cayley transform ``Phi(sigma) = (I - mu A/2)^(-1) (I + mu A/2) Phi``, which
maps the Lie algebra ``{A : A* J + J A = 0}`` into the group.  Dense stretches
use the matrix exponential (constant A) or fourth-order Magnus steps.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .errors import AlgebraViolation, GroupViolation, SingularCayley
from .expfun import pade_coefficients
from .timescale import TimeScale

TAU_REG = 1e-10
TAU_DENSE = 1e-10


@dataclass(frozen=True)
class QuadraticGroupSpec:
    J: np.ndarray
    complex_field: bool = False

    def __post_init__(self):
        J = np.asarray(self.J, dtype=complex if self.complex_field else float)
        if J.ndim != 2 or J.shape[0] != J.shape[1]:
            raise ValueError("J must be a square matrix")
        if np.linalg.cond(J) > 1 / TAU_REG:
            raise ValueError("J must be invertible")
        object.__setattr__(self, "J", J)

    @property
    def n(self) -> int:
        return self.J.shape[0]

    def star(self, X):
        X = np.asarray(X)
        return X.conj().T if self.complex_field else X.T

    def algebra_defect(self, A) -> float:
        A = np.asarray(A)
        return float(np.linalg.norm(self.star(A) @ self.J + self.J @ A))

    @classmethod
    def orthogonal(cls, n: int) -> "QuadraticGroupSpec":
        return cls(np.eye(n))

    @classmethod
    def unitary(cls, n: int) -> "QuadraticGroupSpec":
        return cls(np.eye(n), complex_field=True)

    @classmethod
    def symplectic(cls, m: int) -> "QuadraticGroupSpec":
        """Real symplectic group on ``R^(2m)`` with the standard form."""
        eye = np.eye(m)
        zero = np.zeros((m, m))
        return cls(np.block([[zero, eye], [-eye, zero]]))

    @classmethod
    def lorentz(cls, n: int) -> "QuadraticGroupSpec":
        """``O(1, n-1)`` with ``J = diag(-1, 1, ..., 1)``."""
        return cls(np.diag([-1.0] + [1.0] * (n - 1)))


def membership_defect(group: QuadraticGroupSpec, Phi) -> float:
    """Frobenius norm of ``Phi* J Phi - J``."""
    Phi = np.asarray(Phi)
    if Phi.shape != group.J.shape:
        raise ValueError(f"expected a {group.J.shape} matrix, got {Phi.shape}")
    return float(np.linalg.norm(group.star(Phi) @ group.J @ Phi - group.J))


def cayley_matrix(A, mu: float = 1.0) -> np.ndarray:
    """``(I - mu A/2)^(-1) (I + mu A/2)`` via LU with one refinement step."""
    A = np.atleast_2d(np.asarray(A))
    n = A.shape[0]
    half = 0.5 * mu * A
    eye = np.eye(n)
    lhs, rhs = eye - half, eye + half
    if np.linalg.cond(lhs) > 1 / TAU_REG:
        raise SingularCayley(f"I - mu*A/2 is numerically singular (mu={mu})")
    lu = sla.lu_factor(lhs)
    X = sla.lu_solve(lu, rhs)
    X = X + sla.lu_solve(lu, rhs - lhs @ X)
    return X


def expm_pade(A) -> np.ndarray:
    """Matrix exponential by scaling and squaring around the [6/6] Pade approximant."""
    A = np.atleast_2d(np.asarray(A))
    norm = np.linalg.norm(A, 1)
    s = 0 if norm <= 0.5 else int(np.ceil(np.log2(norm / 0.5)))
    X = A / 2.0**s
    approx = pade_coefficients(6, 6)
    eye = np.eye(A.shape[0], dtype=X.dtype)
    P = approx.p_coeffs[-1] * eye
    Q = approx.q_coeffs[-1] * eye
    for pc, qc in zip(reversed(approx.p_coeffs[:-1]), reversed(approx.q_coeffs[:-1])):
        P = pc * eye + X @ P
        Q = qc * eye + X @ Q
    R = np.linalg.solve(Q, P)
    for _ in range(s):
        R = R @ R
    return R


@dataclass
class LieFlowProblem:
    """``Phi^D = A(t) <Phi>`` on ``scale`` starting from ``Phi0``.

    ``A`` is a constant matrix or a callable ``t -> matrix``.
    """

    group: QuadraticGroupSpec
    A: np.ndarray | Callable
    Phi0: np.ndarray
    scale: TimeScale

    @property
    def constant(self) -> bool:
        return not callable(self.A)

    def A_at(self, t: float) -> np.ndarray:
        A = self.A(t) if callable(self.A) else self.A
        A = np.atleast_2d(np.asarray(A, dtype=complex if self.group.complex_field else float))
        tol = 1e-10 * max(float(np.linalg.norm(A)), 1e-300)
        if self.group.algebra_defect(A) > tol:
            raise AlgebraViolation(f"A({t}) is not in the Lie algebra of the group")
        return A


@dataclass
class FlowPoint:
    t: float
    Phi: np.ndarray
    defect: float


def _magnus4(problem: LieFlowProblem, a: float, b: float, n: int, Phi):
    h = (b - a) / n
    c = np.sqrt(3) / 6
    for i in range(n):
        t = a + i * h
        A1 = problem.A_at(t + (0.5 - c) * h)
        A2 = problem.A_at(t + (0.5 + c) * h)
        omega = 0.5 * h * (A1 + A2) + (np.sqrt(3) / 12) * h * h * (A2 @ A1 - A1 @ A2)
        Phi = expm_pade(omega) @ Phi
    return Phi


def _dense_flow(problem: LieFlowProblem, a: float, b: float, Phi):
    if problem.constant:
        return expm_pade(problem.A_at(a) * (b - a)) @ Phi
    n = 4
    coarse = _magnus4(problem, a, b, n, Phi)
    while True:
        fine = _magnus4(problem, a, b, 2 * n, Phi)
        err = np.linalg.norm(fine - coarse) / 15
        if err < TAU_DENSE * max(1.0, np.linalg.norm(fine)) or n > 2**14:
            return fine
        n, coarse = 2 * n, fine


def flow(problem: LieFlowProblem, t0: float, t1: float) -> list[FlowPoint]:
    """Evolve ``Phi`` over ``[t0, t1]``, recording each scattered point and dense endpoint."""
    group = problem.group
    Phi = np.array(problem.Phi0, dtype=complex if group.complex_field else float)
    if Phi.shape != group.J.shape:
        raise ValueError(f"Phi0 must be {group.J.shape}, got {Phi.shape}")
    scale_ref = max(1.0, float(np.linalg.norm(group.J)))
    if membership_defect(group, Phi) > 1e-10 * scale_ref:
        raise GroupViolation("Phi0 is not in the group")
    ts = problem.scale
    out = [FlowPoint(ts.snap(t0), Phi.copy(), membership_defect(group, Phi))]
    for seg in ts.segments(t0, t1):
        if seg.kind == "step":
            Phi = cayley_matrix(problem.A_at(seg.start), seg.mu) @ Phi
        else:
            Phi = _dense_flow(problem, seg.start, seg.end, Phi)
        out.append(FlowPoint(seg.end, Phi.copy(), membership_defect(group, Phi)))
    return out


def flow_to_json(points: list[FlowPoint]) -> list[dict]:
    rows = []
    for p in points:
        flat = p.Phi.ravel()
        if np.iscomplexobj(flat) and np.any(flat.imag != 0):
            phi = [[float(v.real), float(v.imag)] for v in flat]
        else:
            phi = [float(v.real) for v in flat]
        rows.append({"t": p.t, "Phi": phi, "defect": p.defect})
    return rows
