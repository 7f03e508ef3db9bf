"""Pointwise tensor calculus for a chart manifold.

Index conventions (coordinate components, 0-based axes):

* ``gamma[k, i, j]``   = Gamma^k_ij of the Levi-Civita connection
* ``riemann[i, j, k, l]`` = R(d_i, d_j, d_k, d_l) = g(R(d_i, d_j) d_k, d_l) with
  ``R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y]``; sectional curvature of an
  orthonormal pair is ``R(X, Y, Y, X)``
* ``nabla_j[i, l, j]`` = ((nabla_i J) d_j)^l
* ``f_tensor[i, j, k]`` = g((nabla_i J) d_j, d_k)
* ``nijenhuis[k, i, j]`` = N(d_i, d_j)^k
* ``nabla_riemann[m, i, j, k, l]`` = (nabla_m R)_ijkl
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jet as jetlib
from .frames import AdaptedFrame, adapted_frame_at, to_frame
from .manifold import ChartManifold, require_valid


def _connection_jet(gj):
    """Christoffel symbols as a jet one order below the metric jet."""
    dg = gj.grad()  # dg[i, j, k] = d_k g_ij
    first = 0.5 * (
        jetlib.einsum("jli->lij", dg)
        + jetlib.einsum("ilj->lij", dg)
        - jetlib.einsum("ijl->lij", dg)
    )  # first[l, i, j] = Gamma_{l, ij}
    ginv = jetlib.inverse(gj.truncate(dg.order))
    return jetlib.einsum("kl,lij->kij", ginv, first)


def _riemann_jet(gj, gamma):
    dgam = gamma.grad()  # dgam[l, j, k, i] = d_i Gamma^l_jk
    gam = gamma.truncate(dgam.order)
    rt = (
        jetlib.einsum("ljki->ijkl", dgam)
        - jetlib.einsum("likj->ijkl", dgam)
        + jetlib.einsum("mjk,lim->ijkl", gam, gam)
        - jetlib.einsum("mik,ljm->ijkl", gam, gam)
    )  # R(d_i, d_j) d_k = rt[i, j, k, l] d_l
    return jetlib.einsum("ijkm,ml->ijkl", rt, gj.truncate(rt.order))


@dataclass(frozen=True)
class CurvaturePackage:
    """Everything computed at one point; coordinate components unless noted."""

    point: np.ndarray
    n: int
    g: np.ndarray
    J: np.ndarray
    dg: np.ndarray  # dg[i, j, k] = d_k g_ij
    gamma: np.ndarray
    riemann: np.ndarray
    nabla_riemann: np.ndarray | None
    nabla_j: np.ndarray
    f_tensor: np.ndarray
    nijenhuis: np.ndarray
    frame: AdaptedFrame

    @property
    def dim(self):
        return 2 * self.n

    # frame components (orthonormal adapted frame; g = I, J = J0 there)
    @property
    def riemann_frame(self):
        return to_frame(self.riemann, self.frame, "dddd")

    @property
    def f_frame(self):
        return to_frame(self.f_tensor, self.frame, "ddd")

    @property
    def nabla_j_frame(self):
        return to_frame(self.nabla_j, self.frame, "dud")

    @property
    def nijenhuis_frame(self):
        return to_frame(self.nijenhuis, self.frame, "udd")

    @property
    def nabla_riemann_frame(self):
        if self.nabla_riemann is None:
            return None
        return to_frame(self.nabla_riemann, self.frame, "ddddd")

    @property
    def g_frame(self):
        return to_frame(self.g, self.frame, "dd")

    @property
    def J_frame(self):
        return to_frame(self.J, self.frame, "ud")


def curvature_package(M: ChartManifold, p, with_nabla_riemann: bool = True) -> CurvaturePackage:
    """Compute connection, curvature, F, N (and optionally nabla R) at ``p``."""
    require_valid(M, p)
    p = M.check_point(p)
    key = ("curv", tuple(p.tolist()), with_nabla_riemann)
    hit = M._cache.get(key)
    if hit is not None:
        return hit
    order = 3 if with_nabla_riemann else 2
    gj, Jj = M.jets(p, order)
    gamma_j = _connection_jet(gj)  # order - 1
    riem_j = _riemann_jet(gj, gamma_j)  # order - 2
    g = gj.value
    J = Jj.value
    gamma = gamma_j.value
    nabla_riem = None
    if with_nabla_riemann:
        R = riem_j.value
        dR = riem_j.d1  # dR[i, j, k, l, m] = d_m R_ijkl
        nabla_riem = (
            np.moveaxis(dR, -1, 0)
            - np.einsum("pmi,pjkl->mijkl", gamma, R)
            - np.einsum("pmj,ipkl->mijkl", gamma, R)
            - np.einsum("pmk,ijpl->mijkl", gamma, R)
            - np.einsum("pml,ijkp->mijkl", gamma, R)
        )
    dJ = Jj.d1  # dJ[l, j, i] = d_i J^l_j
    nabla_j = (
        np.einsum("lji->ilj", dJ)
        + np.einsum("lim,mj->ilj", gamma, J)
        - np.einsum("mij,lm->ilj", gamma, J)
    )
    f_tensor = np.einsum("ilj,lk->ijk", nabla_j, g)
    nij = (
        np.einsum("mi,kjm->kij", J, dJ)
        - np.einsum("mj,kim->kij", J, dJ)
        + np.einsum("km,mij->kij", J, dJ)
        - np.einsum("km,mji->kij", J, dJ)
    )
    pkg = CurvaturePackage(
        point=p,
        n=M.n,
        g=g,
        J=J,
        dg=gj.d1,
        gamma=gamma,
        riemann=riem_j.value,
        nabla_riemann=nabla_riem,
        nabla_j=nabla_j,
        f_tensor=f_tensor,
        nijenhuis=nij,
        frame=adapted_frame_at(M, p),
    )
    M._cache[key] = pkg
    return pkg


def christoffel_at(M: ChartManifold, p) -> np.ndarray:
    return curvature_package(M, p, with_nabla_riemann=False).gamma


def riemann_at(M: ChartManifold, p) -> np.ndarray:
    """Coordinate components R_ijkl (see module docstring for the convention)."""
    return curvature_package(M, p, with_nabla_riemann=False).riemann


def f_tensor_at(M: ChartManifold, p) -> np.ndarray:
    return curvature_package(M, p, with_nabla_riemann=False).f_tensor


def nijenhuis_at(M: ChartManifold, p) -> np.ndarray:
    return curvature_package(M, p, with_nabla_riemann=False).nijenhuis


def covar_deriv_riemann_at(M: ChartManifold, p) -> np.ndarray:
    return curvature_package(M, p).nabla_riemann


def kaehler_form(g: np.ndarray, J: np.ndarray) -> np.ndarray:
    """Phi(X, Y) = g(JX, Y) as a matrix: Phi[a, b] = Phi(e_a, e_b)."""
    return J.T @ g


# -- traces ----------------------------------------------------------------------


def ricci_from_frame(R: np.ndarray, J: np.ndarray):
    """Ricci, scalar, *-Ricci and *-scalar curvature from orthonormal-frame components.

    ``R`` is R(e_a, e_b, e_c, e_d) in a g-orthonormal frame and ``J`` the
    matrix of the complex structure in that frame.
    """
    rho = np.einsum("iabi->ab", R)
    # rho*(e_a, e_b) = sum_i R(e_i, e_a, J e_b, J e_i)
    rho_star = np.einsum("iacd,cb,di->ab", R, J, J)
    return rho, float(np.trace(rho)), rho_star, float(np.trace(rho_star))


def ricci_scalar_at(M: ChartManifold, p):
    """(rho, tau, rho*, tau*) with tensors in the adapted orthonormal frame."""
    pkg = curvature_package(M, p, with_nabla_riemann=False)
    return ricci_from_frame(pkg.riemann_frame, pkg.J_frame)


def ricci_coordinates(pkg: CurvaturePackage):
    """Same traces via inverse-metric weights in coordinates (cross-check route)."""
    ginv = np.linalg.inv(pkg.g)
    R = pkg.riemann
    rho = np.einsum("kl,kijl->ij", ginv, R)
    # rho*(X, Y) = g^{kl} R(d_k, X, JY, J d_l)
    rho_star = np.einsum("kl,kicd,cj,dl->ij", ginv, R, pkg.J, pkg.J)
    return rho, float(np.einsum("ij,ij->", ginv, rho)), rho_star, float(np.einsum("ij,ij->", ginv, rho_star))


def metric_derivative_scale(pkg: CurvaturePackage) -> float:
    return float(np.max(np.abs(pkg.dg))) if pkg.dg.size else 0.0
