"""Tangent 2-planes: antiholomorphic sampling, sectional curvature, constancy
statistics and extremization over the antiholomorphic Grassmannian.

Vectors are frame (or coordinate) components; ``g`` and ``J`` are passed as
matrices so the same code serves chart points and synthetic algebraic inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ORTHO_TOL = 1e-10
MAX_RESAMPLE = 16
DEFAULT_SAMPLES = 128
DEFAULT_RESTARTS = 16
MAX_ITER = 500
IMPROVEMENT_TOL = 1e-12
FD_STEP = 1e-6


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by ``(seed, stream)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


class PlaneError(ValueError):
    pass


@dataclass(frozen=True)
class TangentPlane:
    X: np.ndarray
    Y: np.ndarray

    def angle(self, g: np.ndarray, J: np.ndarray) -> float:
        """theta = angle(E, JE): cos(theta) is the largest singular value of g(u_a, J u_b)."""
        U = np.column_stack([self.X, self.Y])
        M = U.T @ g @ J @ U
        c = float(np.linalg.svd(M, compute_uv=False)[0])
        return float(np.arccos(min(1.0, c)))

    def is_antiholomorphic(self, g: np.ndarray, J: np.ndarray, tol: float = ORTHO_TOL) -> bool:
        return abs(self.X @ g @ J @ self.Y) < tol and abs(self.Y @ g @ J @ self.X) < tol

    def orthonormality_defect(self, g: np.ndarray) -> float:
        X, Y = self.X, self.Y
        return max(abs(X @ g @ X - 1.0), abs(Y @ g @ Y - 1.0), abs(X @ g @ Y))


def _unit(v, g):
    return v / np.sqrt(v @ g @ v)


def _complete(X, Yraw, g, J):
    """Normalize X, then make Yraw g-orthonormal to {X, JX}; None if degenerate."""
    X = _unit(X, g)
    JX = J @ X
    Y = Yraw - (X @ g @ Yraw) * X - (JX @ g @ Yraw) * JX
    norm = np.sqrt(max(Y @ g @ Y, 0.0))
    if norm < 1e-8:
        return None
    return TangentPlane(X, Y / norm)


def random_antiholomorphic_plane(g: np.ndarray, J: np.ndarray, rng: np.random.Generator) -> TangentPlane:
    d = g.shape[0]
    for _ in range(MAX_RESAMPLE):
        X = rng.standard_normal(d)
        Y = rng.standard_normal(d)
        if np.sqrt(X @ g @ X) < 1e-8:
            continue
        plane = _complete(X, Y, g, J)
        if plane is not None:
            return plane
    raise PlaneError(f"could not draw a non-degenerate plane in {MAX_RESAMPLE} attempts")


def sectional_curvature(R: np.ndarray, P: TangentPlane, g: np.ndarray | None = None) -> float:
    """K = R(X, Y, Y, X) for an orthonormal pair."""
    if g is None:
        g = np.eye(R.shape[0])
    if P.orthonormality_defect(g) > 1e-8:
        raise PlaneError("sectional curvature needs an orthonormal spanning pair")
    return _k(R, P.X, P.Y)


def _k(R, X, Y):
    # R(X, Y, Y, X) as a bilinear form on the flattened pair products
    d = X.shape[0]
    return float(np.outer(X, Y).ravel() @ R.reshape(d * d, d * d) @ np.outer(Y, X).ravel())


@dataclass
class ExtremizationResult:
    k_min: float
    k_max: float
    argmin: TangentPlane
    argmax: TangentPlane
    iterations_min: list[int] = field(default_factory=list)
    iterations_max: list[int] = field(default_factory=list)


def _k_batch(R, Xb, Yb):
    b, d = Xb.shape
    xy = (Xb[:, :, None] * Yb[:, None, :]).reshape(b, d * d)
    yx = (Yb[:, :, None] * Xb[:, None, :]).reshape(b, d * d)
    return np.einsum("bi,bi->b", xy @ R.reshape(d * d, d * d), yx)


def _fd_gradient(R, z, d, sign):
    """Central finite differences of sign*K in all 2d components at once."""
    eye = np.eye(2 * d) * FD_STEP
    zs = np.concatenate([z + eye, z - eye])
    ks = _k_batch(R, zs[:, :d], zs[:, d:])
    return sign * (ks[: 2 * d] - ks[2 * d :]) / (2 * FD_STEP)


def _climb(R, g, J, plane: TangentPlane, sign: float):
    """Projected finite-difference ascent of sign*K starting from ``plane``."""
    X, Y = plane.X, plane.Y
    val = sign * _k(R, X, Y)
    step = 0.5
    d = X.shape[0]
    it = 0
    for it in range(1, MAX_ITER + 1):
        z = np.concatenate([X, Y])
        grad = _fd_gradient(R, z, d, sign)
        gnorm = np.linalg.norm(grad)
        if gnorm == 0.0:
            break
        gain = 0.0
        while step > 1e-14:
            trial = z + step * grad / gnorm
            cand = _complete(trial[:d], trial[d:], g, J)
            if cand is not None:
                new = sign * _k(R, cand.X, cand.Y)
                if new > val:
                    gain = new - val
                    X, Y, val = cand.X, cand.Y, new
                    step = min(2.0 * step, 1.0)
                    break
            step *= 0.5
        if gain < IMPROVEMENT_TOL:
            break
    return TangentPlane(X, Y), sign * val, it


def extremize_antiholomorphic(
    R: np.ndarray,
    g: np.ndarray,
    J: np.ndarray,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    stream: int = 0,
    starts: list[TangentPlane] | None = None,
) -> ExtremizationResult:
    """Minimum and maximum of K over antiholomorphic planes.

    Each restart begins at a random antiholomorphic plane; ``starts`` adds
    warm-start planes (used to guarantee the result brackets a sample).
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = make_rng(seed, stream)
    inits = [random_antiholomorphic_plane(g, J, rng) for _ in range(restarts)]
    best = {}
    iters = {1.0: [], -1.0: []}
    for sign in (-1.0, 1.0):
        cands = list(inits)
        if starts:
            key = (lambda P: _k(R, P.X, P.Y))
            cands.append(min(starts, key=key) if sign < 0 else max(starts, key=key))
        for P0 in cands:
            P, val, it = _climb(R, g, J, P0, sign)
            iters[sign].append(it)
            if sign not in best or sign * val > sign * best[sign][1]:
                best[sign] = (P, val)
    return ExtremizationResult(
        k_min=best[-1.0][1],
        k_max=best[1.0][1],
        argmin=best[-1.0][0],
        argmax=best[1.0][0],
        iterations_min=iters[-1.0],
        iterations_max=iters[1.0],
    )


@dataclass(frozen=True)
class ConstancyStats:
    nu_hat: float
    max_dev: float
    k_min: float
    k_max: float
    m: int
    seed: int
    stream: int
    sample_min: float
    sample_max: float


def sample_curvatures(R, g, J, m: int, seed: int, stream: int = 0):
    rng = make_rng(seed, stream)
    planes = [random_antiholomorphic_plane(g, J, rng) for _ in range(m)]
    return planes, np.array([_k(R, P.X, P.Y) for P in planes])


def constancy_stats_from_tensor(
    R, g, J, m: int = DEFAULT_SAMPLES, seed: int = 0, stream: int = 0,
    restarts: int = DEFAULT_RESTARTS,
) -> tuple[ConstancyStats, ExtremizationResult]:
    if m < 32:
        raise ValueError("constancy statistics need at least 32 samples")
    planes, ks = sample_curvatures(R, g, J, m, seed, stream)
    nu_hat = float(ks.mean())
    max_dev = float(np.max(np.abs(ks - nu_hat)))
    ext = extremize_antiholomorphic(
        R, g, J, restarts=restarts, seed=seed, stream=stream + 1_000_003,
        starts=[planes[int(ks.argmin())], planes[int(ks.argmax())]],
    )
    stats = ConstancyStats(
        nu_hat=nu_hat,
        max_dev=max_dev,
        k_min=ext.k_min,
        k_max=ext.k_max,
        m=m,
        seed=seed,
        stream=stream,
        sample_min=float(ks.min()),
        sample_max=float(ks.max()),
    )
    return stats, ext


def constancy_stats(M, p, m: int = DEFAULT_SAMPLES, seed: int = 0, stream: int = 0,
                    restarts: int = DEFAULT_RESTARTS) -> ConstancyStats:
    """Sampled mean/deviation of antiholomorphic K at ``p`` (adapted-frame components)."""
    from .tensorcalc import curvature_package

    pkg = curvature_package(M, p, with_nabla_riemann=False)
    stats, _ = constancy_stats_from_tensor(
        pkg.riemann_frame, pkg.g_frame, pkg.J_frame, m, seed, stream, restarts
    )
    return stats
