"""Algebraic curvature constructions: pi1, pi2, Psi(Q), the Q tensor, the
constant-antiholomorphic-curvature identity residuals and the pi-basis fit.

All functions take frame (or coordinate) matrices ``g`` and ``J`` explicitly;
tensors are 4-index arrays with ``T[x, y, z, u] = T(e_x, e_y, e_z, e_u)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ADMISSIBILITY_TOL = 1e-6


class InadmissibleTensorError(ValueError):
    """Q does not have the symmetry Q(JX, JY) = Q(Y, X)."""


def _pair(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # a(y,z) b(x,u) - a(x,z) b(y,u)
    return np.einsum("yz,xu->xyzu", a, b) - np.einsum("xz,yu->xyzu", a, b)


def pi1(g: np.ndarray) -> np.ndarray:
    return _pair(g, g)


def pi2(g: np.ndarray, J: np.ndarray) -> np.ndarray:
    gj = g @ J  # gj[a, b] = g(e_a, J e_b)
    return _pair(gj, gj) - 2.0 * np.einsum("xy,zu->xyzu", gj, gj)


def admissibility_defect(Q: np.ndarray, J: np.ndarray) -> float:
    """max |Q(JX, JY) - Q(Y, X)| over basis vectors."""
    return float(np.max(np.abs(J.T @ Q @ J - Q.T)))


def psi_of(Q: np.ndarray, g: np.ndarray, J: np.ndarray, check: bool = True) -> np.ndarray:
    """The six-term construction pairing g(., J.) with Q(., J.)."""
    if check:
        defect = admissibility_defect(Q, J)
        if defect > ADMISSIBILITY_TOL:
            raise InadmissibleTensorError(f"Q(JX,JY) != Q(Y,X): defect {defect:.3e}")
    gj = g @ J
    qj = Q @ J
    return (
        _pair(gj, qj)
        - 2.0 * np.einsum("xy,zu->xyzu", gj, qj)
        + np.einsum("xu,yz->xyzu", gj, qj)
        - np.einsum("yu,xz->xyzu", gj, qj)
        - 2.0 * np.einsum("zu,xy->xyzu", gj, qj)
    )


@dataclass(frozen=True)
class QTensor:
    components: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.components))


def q_from_star_ricci(rho_star, tau_star: float, nu: float, n: int, g: np.ndarray) -> QTensor:
    """Q = rho*/(2(n+1)) - (tau* + 2(n+1) nu)/(4(n+1)(2n+1)) g."""
    c = (tau_star + 2 * (n + 1) * nu) / (4 * (n + 1) * (2 * n + 1))
    return QTensor(np.asarray(rho_star) / (2 * (n + 1)) - c * g)


def trace_q_expected(tau_star: float, nu: float, n: int) -> float:
    return (tau_star - 2 * n * nu) / (2 * (2 * n + 1))


@dataclass(frozen=True)
class IdentityResidual:
    residual25: float  # star-Ricci form
    residual26: float  # R = Psi(Q) + nu pi1 form
    nu_used: float


def residual_constant_antiholo(R, rho_star, tau_star, nu, n, g, J) -> IdentityResidual:
    """Relative residuals of the two equivalent forms of the constancy identity.

    Both are ``||LHS - RHS|| / (1 + ||R||)`` with Frobenius norms.
    """
    p1, p2 = pi1(g), pi2(g, J)
    scale = 1.0 + np.linalg.norm(R)
    lhs = (
        R
        - psi_of(rho_star, g, J, check=False) / (2 * (n + 1))
        + tau_star / (2 * (n + 1) * (2 * n + 1)) * p2
    )
    rhs = nu * (p1 - p2 / (2 * n + 1))
    r25 = float(np.linalg.norm(lhs - rhs) / scale)
    Q = q_from_star_ricci(rho_star, tau_star, nu, n, g).components
    r26 = float(np.linalg.norm(R - psi_of(Q, g, J, check=False) - nu * p1) / scale)
    return IdentityResidual(r25, r26, float(nu))


def synthetic_R(Q, nu: float, g: np.ndarray, J: np.ndarray) -> np.ndarray:
    """Algebraic curvature tensor Psi(Q) + nu pi1 (antiholomorphic curvature nu)."""
    Q = Q.components if isinstance(Q, QTensor) else np.asarray(Q, dtype=float)
    return psi_of(Q, g, J) + nu * pi1(g)


def random_admissible_q(n: int, rng: np.random.Generator, J: np.ndarray | None = None) -> np.ndarray:
    """Random Q with Q(JX, JY) = Q(Y, X): average of A and J^T A^T J."""
    d = 2 * n
    if J is None:
        J = standard_j(n)
    A = rng.standard_normal((d, d))
    return 0.5 * (A + J.T @ A.T @ J)


def standard_j(n: int) -> np.ndarray:
    J0 = np.zeros((2 * n, 2 * n))
    J0[n:, :n] = np.eye(n)
    J0[:n, n:] = -np.eye(n)
    return J0


@dataclass(frozen=True)
class PiFit:
    f: float
    h: float
    residual: float


def fit_pi_basis(R, g, J, n: int | None = None) -> PiFit:
    """Least-squares R ~ f pi1 + h pi2 via the 2x2 Gram system."""
    if n is None:
        n = g.shape[0] // 2
    if n < 3:
        raise ValueError("the pi-basis fit is defined for complex dimension n >= 3")
    p1, p2 = pi1(g), pi2(g, J)
    G = np.array([[np.vdot(p1, p1), np.vdot(p1, p2)], [np.vdot(p2, p1), np.vdot(p2, p2)]])
    rhs = np.array([np.vdot(p1, R), np.vdot(p2, R)])
    if abs(np.linalg.det(G)) < 1e-12 * np.abs(G).max() ** 2:
        raise np.linalg.LinAlgError("pi1 and pi2 are numerically dependent")
    f, h = np.linalg.solve(G, rhs)
    res = float(np.linalg.norm(R - f * p1 - h * p2) / (1.0 + np.linalg.norm(R)))
    return PiFit(float(f), float(h), res)
