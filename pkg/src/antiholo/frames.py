"""Orthonormal J-adapted frames, special complex bases and complex components."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class AdaptedFrame:
    """Columns ``e_1..e_n, Je_1..Je_n`` in coordinate components."""

    vectors: np.ndarray  # (2n, 2n)
    n: int

    @property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.vectors)


def adapted_frame(g: np.ndarray, J: np.ndarray) -> AdaptedFrame:
    """J-adapted Gram-Schmidt over the coordinate directions, in index order.

    A direction whose component orthogonal to the accepted ``{e, Je}`` pairs
    has norm below ``PIVOT_TOL`` is skipped.
    """
    d = g.shape[0]
    n = d // 2
    es, jes = [], []
    for k in range(d):
        if len(es) == n:
            break
        v = np.zeros(d)
        v[k] = 1.0
        for _ in range(2):  # second pass restores orthogonality lost to round-off
            for w in es + jes:
                v = v - (w @ g @ v) * w
        norm = np.sqrt(max(v @ g @ v, 0.0))
        if norm < PIVOT_TOL:
            continue
        v = v / norm
        es.append(v)
        jes.append(J @ v)
    if len(es) < n:
        raise ValueError("adapted frame construction broke down; structure is invalid")
    return AdaptedFrame(np.column_stack(es + jes), n)


def adapted_frame_at(M, p) -> AdaptedFrame:
    return adapted_frame(M.metric(p), M.complex_structure(p))


def to_frame(T: np.ndarray, frame: AdaptedFrame, pattern: str) -> np.ndarray:
    """Components of a coordinate tensor in the frame.

    ``pattern`` has one letter per axis: ``d`` for a covariant (lower) slot,
    ``u`` for a contravariant (upper) slot.
    """
    if len(pattern) != T.ndim:
        raise ValueError(f"pattern {pattern!r} does not match tensor order {T.ndim}")
    E = frame.vectors
    Einv = frame.inverse
    out = T
    for axis, kind in enumerate(pattern):
        m = E if kind == "d" else Einv.T
        out = np.moveaxis(np.tensordot(out, m, axes=([axis], [0])), -1, axis)
    return out


# -- complex bases -----------------------------------------------------------------


@dataclass(frozen=True)
class ComplexBasis:
    """Special complex basis in frame components.

    ``Z[:, a]`` is ``Z_a = (e_a - i Je_a)/2`` and ``Zbar[:, a]`` its conjugate.
    """

    Z: np.ndarray
    Zbar: np.ndarray
    n: int

    @property
    def change(self) -> np.ndarray:
        """Columns ``Z_1..Z_n, Z_1bar..Z_nbar`` as a (2n, 2n) complex matrix."""
        return np.concatenate([self.Z, self.Zbar], axis=1)


def complex_basis(n: int) -> ComplexBasis:
    d = 2 * n
    Z = np.zeros((d, n), dtype=complex)
    for a in range(n):
        Z[a, a] = 0.5
        Z[n + a, a] = -0.5j
    return ComplexBasis(Z, Z.conj(), n)


def complex_components(T: np.ndarray, basis: ComplexBasis, bars) -> np.ndarray:
    """T(Z_{a1}, Z_{a2}, ...) with slot ``k`` barred iff ``bars[k]`` is true.

    ``T`` holds real frame components with all slots covariant; the result
    has one axis of length ``n`` per slot.
    """
    bars = tuple(bool(b) for b in bars)
    if len(bars) != T.ndim:
        raise ValueError(f"bar pattern of length {len(bars)} does not match tensor order {T.ndim}")
    out = T.astype(complex)
    for axis, barred in enumerate(bars):
        m = basis.Zbar if barred else basis.Z
        out = np.moveaxis(np.tensordot(out, m, axes=([axis], [0])), -1, axis)
    return out


def all_complex_components(T: np.ndarray, basis: ComplexBasis) -> np.ndarray:
    """Components on the full basis ``Z_1..Z_n, Z_1bar..Z_nbar`` in every slot."""
    P = basis.change
    out = T.astype(complex)
    for axis in range(T.ndim):
        out = np.moveaxis(np.tensordot(out, P, axes=([axis], [0])), -1, axis)
    return out


def real_from_complex(C: np.ndarray, basis: ComplexBasis) -> np.ndarray:
    """Inverse of :func:`all_complex_components`; returns the real part."""
    Pinv = np.linalg.inv(basis.change)
    out = C
    for axis in range(C.ndim):
        out = np.moveaxis(np.tensordot(out, Pinv, axes=([axis], [0])), -1, axis)
    return out.real


def nabla_j_components(f_frame: np.ndarray, basis: ComplexBasis) -> dict[str, np.ndarray]:
    """Complex components of (nabla J) with the output index raised.

    With ``g(Z_c, Zbar_d) = delta_cd / 2`` the coefficient of ``Z_c`` in a
    vector V is ``2 g(V, Zbar_c)``, so for example
    ``nabla_a J_b^c = 2 F(Z_a, Z_b, Zbar_c)``.  Keys name the pattern as
    ``<derivative><argument><output>`` with ``u`` unbarred and ``b`` barred.
    """
    out = {}
    for dslot in "ub":
        for arg in "ub":
            for res in "ub":
                # raising flips the bar on the output slot
                bars = (dslot == "b", arg == "b", res == "u")
                out[dslot + arg + res] = 2.0 * complex_components(f_frame, basis, bars)
    return out
