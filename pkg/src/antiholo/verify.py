"""Per-point diagnostics and manifold scans.

The tolerance ladder is a decade apart at each level so verdicts do not
flap: structure 1e-9, identities built from <= 2 derivatives of the metric
1e-8, identities needing 3 derivatives 1e-7, verdicts 1e-6.
"""

from __future__ import annotations

import enum
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .curvid import (
    admissibility_defect,
    fit_pi_basis,
    pi1,
    q_from_star_ricci,
    residual_constant_antiholo,
    trace_q_expected,
)
from .frames import complex_basis, complex_components, nabla_j_components
from .manifold import ChartManifold, ManifoldError
from .planes import (
    DEFAULT_RESTARTS,
    DEFAULT_SAMPLES,
    ConstancyStats,
    constancy_stats_from_tensor,
    make_rng,
)
from .tensorcalc import (
    CurvaturePackage,
    curvature_package,
    metric_derivative_scale,
    ricci_coordinates,
    ricci_from_frame,
)

TOL_STRUCTURE = 1e-9
TOL_ORDER2 = 1e-8
TOL_ORDER3 = 1e-7
TOL_VERDICT = 1e-6
CLASS_EPS = 1e-7
LEMMA_SAMPLES = 64


class PointClass(str, enum.Enum):
    KAEHLER = "KAEHLER"
    HERMITIAN_NON_KAEHLER = "HERMITIAN_NON_KAEHLER"
    NON_INTEGRABLE = "NON_INTEGRABLE"


class TheoremAStatus(str, enum.Enum):
    NOT_APPLICABLE = "NOT_APPLICABLE"
    HYPOTHESIS_FAILS = "HYPOTHESIS_FAILS"
    VERIFIED = "VERIFIED"
    VIOLATION = "VIOLATION"


class DimensionExcludedError(ManifoldError):
    """The constant-curvature implication is only claimed for real dimension > 4."""


def _require_dimension(n: int):
    if n < 3:
        raise DimensionExcludedError(
            f"dimension four excluded: the implication needs real dimension > 4, got 2n = {2 * n}"
        )


def _rel(x: np.ndarray, scale) -> float:
    return float(np.linalg.norm(x) / (1.0 + float(scale)))


# -- classification ---------------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    point_class: PointClass
    f_norm: float
    n_norm: float
    hermitian_residual: float
    eps: float


def hermitian_f_residual(F: np.ndarray, J: np.ndarray) -> float:
    """|| F(JX, Y, Z) + F(X, JY, Z) || relative to 1 + ||F||."""
    FJ1 = np.einsum("da,dbc->abc", J, F)
    FJ2 = np.einsum("db,adc->abc", J, F)
    return _rel(FJ1 + FJ2, np.linalg.norm(F))


def _classify_pkg(pkg: CurvaturePackage) -> Classification:
    F = pkg.f_frame
    f_norm = float(np.linalg.norm(F))
    n_norm = float(np.linalg.norm(pkg.nijenhuis_frame))
    herm = hermitian_f_residual(F, pkg.J_frame)
    eps = CLASS_EPS * (1.0 + metric_derivative_scale(pkg))
    if f_norm < eps:
        cls = PointClass.KAEHLER
    elif n_norm < eps and herm < eps:
        cls = PointClass.HERMITIAN_NON_KAEHLER
    else:
        cls = PointClass.NON_INTEGRABLE
    return Classification(cls, f_norm, n_norm, herm, eps)


def classify_point(M: ChartManifold, p) -> Classification:
    return _classify_pkg(curvature_package(M, p, with_nabla_riemann=False))


# -- property suite ------------------------------------------------------------------


@dataclass(frozen=True)
class SuiteRow:
    name: str
    residual: float
    tol: float
    verdict: str  # PASS / FAIL / SKIPPED
    kind: str  # "identity" or "class-evidence"
    description: str


def _row(name, residual, tol, kind, description, skipped=False):
    if skipped:
        verdict = "SKIPPED"
    else:
        verdict = "PASS" if residual < tol else "FAIL"
    return SuiteRow(name, float(residual), tol, verdict, kind, description)


def lemma_probe(pkg: CurvaturePackage, seed: int = 0, samples: int = LEMMA_SAMPLES) -> float:
    """max over sampled unit Z in T^{1,0} of ||(nabla_{Zbar} J) Z||."""
    n = pkg.n
    basis = complex_basis(n)
    T = pkg.nabla_j_frame  # T[i, l, j] = ((nabla_i J) e_j)^l
    rng = make_rng(seed, 7919)
    best = 0.0
    for _ in range(samples):
        c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        c *= np.sqrt(2.0) / np.linalg.norm(c)  # g(Z, Zbar) = 1
        Z = basis.Z @ c
        v = np.einsum("i,ilj,j->l", Z.conj(), T, Z)
        best = max(best, float(np.linalg.norm(v)))
    return best


def riemann_symmetry_residual(R: np.ndarray) -> float:
    d = (
        np.abs(R + R.transpose(1, 0, 2, 3)).max(),
        np.abs(R + R.transpose(0, 1, 3, 2)).max(),
        np.abs(R - R.transpose(2, 3, 0, 1)).max(),
    )
    return float(max(d) / (1.0 + np.abs(R).max()))


def first_bianchi_residual(R: np.ndarray) -> float:
    cyc = R + R.transpose(1, 2, 0, 3) + R.transpose(2, 0, 1, 3)
    return float(np.abs(cyc).max() / (1.0 + np.abs(R).max()))


def second_bianchi_residual(DR: np.ndarray) -> float:
    # (nabla_m R)_ijkl + (nabla_i R)_jmkl + (nabla_j R)_mikl
    cyc = DR + DR.transpose(2, 0, 1, 3, 4) + DR.transpose(1, 2, 0, 3, 4)
    return float(np.abs(cyc).max() / (1.0 + np.abs(DR).max()))


def _property_rows(pkg: CurvaturePackage, cls: Classification, nu_hat: float, fit, seed: int):
    n = pkg.n
    R = pkg.riemann_frame
    Jf = pkg.J_frame
    gf = pkg.g_frame
    F = pkg.f_frame
    fnorm = np.linalg.norm(F)
    rho, tau, rho_star, tau_star = ricci_from_frame(R, Jf)
    non_integrable = cls.point_class is PointClass.NON_INTEGRABLE
    basis = complex_basis(n)
    rows = []

    v = validate_structure_at_pkg(pkg)
    rows.append(_row("structure", v, TOL_STRUCTURE, "identity",
                     "g SPD, J^2 = -I, g(JX,JY) = g(X,Y)"))
    rows.append(_row("riemann_symmetries", riemann_symmetry_residual(R), TOL_ORDER2, "identity",
                     "R skew in (1,2) and (3,4), pair-exchange symmetric"))
    rows.append(_row("bianchi_1", first_bianchi_residual(R), TOL_ORDER2, "identity",
                     "cyclic sum of R over the first three slots"))
    DR = pkg.nabla_riemann_frame
    if DR is not None:
        rows.append(_row("bianchi_2", second_bianchi_residual(DR), TOL_ORDER3, "identity",
                         "cyclic sum of nabla R over derivative slot and first pair"))
    # The twisted trace satisfies rho*(JX,JY) = rho*(Y,X); against the plain
    # Ricci tensor this only holds when rho* = rho (e.g. Kaehler-Einstein).
    star = np.abs(Jf.T @ rho_star @ Jf - rho_star.T).max() / (1.0 + np.abs(rho).max())
    rows.append(_row("star_ricci_symmetry", star, TOL_ORDER2, "identity",
                     "rho*(JX,JY) = rho*(Y,X)"))
    rho_c, tau_c, rho_star_c, tau_star_c = ricci_coordinates(pkg)
    from .frames import to_frame

    route = max(
        np.abs(to_frame(rho_c, pkg.frame, "dd") - rho).max(),
        np.abs(to_frame(rho_star_c, pkg.frame, "dd") - rho_star).max(),
        abs(tau_c - tau),
        abs(tau_star_c - tau_star),
    ) / (1.0 + np.abs(rho).max())
    rows.append(_row("trace_routes", route, TOL_ORDER2, "identity",
                     "frame traces equal inverse-metric traces"))
    rows.append(_row("f_skew", _rel(F + F.transpose(0, 2, 1), fnorm), TOL_ORDER2, "identity",
                     "F(X,Y,Z) = -F(X,Z,Y)"))
    FJJ = np.einsum("db,ec,ade->abc", Jf, Jf, F)
    rows.append(_row("f_j_invariance", _rel(FJJ + F, fnorm), TOL_ORDER2, "identity",
                     "F(X,JY,JZ) = -F(X,Y,Z)"))
    Q = q_from_star_ricci(rho_star, tau_star, nu_hat, n, gf).components
    qscale = 1.0 + np.abs(Q).max()
    rows.append(_row("q_admissible", admissibility_defect(Q, Jf) / qscale, TOL_ORDER2, "identity",
                     "Q(JX,JY) = Q(Y,X)"))
    Qub = complex_components(Q, basis, (False, True))
    Qbu = complex_components(Q, basis, (True, False))
    Quu = complex_components(Q, basis, (False, False))
    qsym = max(np.abs(Qub - Qbu.T).max(), np.abs(Quu + Quu.T).max()) / qscale
    rows.append(_row("q_complex_symmetry", qsym, TOL_ORDER2, "identity",
                     "Q_{a bbar} = Q_{bbar a}, Q_{ab} = -Q_{ba}"))
    trq = abs(np.trace(Q) - trace_q_expected(tau_star, nu_hat, n)) / qscale
    rows.append(_row("q_trace", trq, TOL_ORDER2, "identity",
                     "tr Q = (tau* - 2n nu)/(2(2n+1))"))

    # Hermitian-only identities
    comps = nabla_j_components(F, basis)
    nj = max(np.abs(comps[k]).max() for k in ("uuu", "buu", "uub")) / (1.0 + fnorm)
    rows.append(_row("nabla_j_type", nj, TOL_ORDER2, "identity",
                     "nabla_a J_b^c = nabla_abar J_b^c = nabla_a J_b^cbar = 0",
                     skipped=non_integrable))
    ess = _f_nonessential(F, basis) / (1.0 + fnorm)
    rows.append(_row("f_essential_components", ess, TOL_ORDER2, "identity",
                     "only F_{abar b c} (skew in b,c) and conjugates are nonzero",
                     skipped=non_integrable))
    probe = lemma_probe(pkg, seed)
    consistent = (probe > cls.eps) == (cls.f_norm > cls.eps)
    rows.append(_row("lemma_nabla_zbar_j", 0.0 if consistent else 1.0, 0.5, "identity",
                     f"max ||(nabla_Zbar J)Z|| = {probe:.3e} vanishes iff F vanishes",
                     skipped=non_integrable))
    hnk = cls.point_class is PointClass.HERMITIAN_NON_KAEHLER
    if fit is not None:
        # an implication, so it holds vacuously off the Hermitian non-Kaehler class
        shadow = 1.0 if (hnk and fit.residual < TOL_VERDICT and abs(fit.h) > 1e-3) else 0.0
        rows.append(_row("not_space_form", shadow, 0.5, "identity",
                         "non-Kaehler Hermitian point is not R = f pi1 + h pi2 with h != 0"))

    # class evidence: reported, never counted as suite failures
    rows.append(_row("kaehler_f_zero", cls.f_norm, cls.eps, "class-evidence", "||F|| = 0"))
    rows.append(_row("integrability", cls.n_norm, cls.eps, "class-evidence", "||N|| = 0"))
    rows.append(_row("hermitian_f", cls.hermitian_residual, TOL_ORDER2, "class-evidence",
                     "F(JX,Y,Z) = -F(X,JY,Z)"))
    return rows


def _f_nonessential(F: np.ndarray, basis) -> float:
    """Largest component outside F_{abar b c} / F_{a bbar cbar}, plus skewness of F_{abar b c}."""
    worst = 0.0
    for bars in np.ndindex(2, 2, 2):
        if bars in ((1, 0, 0), (0, 1, 1)):
            continue
        worst = max(worst, float(np.abs(complex_components(F, basis, bars)).max()))
    Fe = complex_components(F, basis, (True, False, False))
    worst = max(worst, float(np.abs(Fe + Fe.transpose(0, 2, 1)).max()))
    return worst


def validate_structure_at_pkg(pkg: CurvaturePackage) -> float:
    from .manifold import structure_residuals

    rep = structure_residuals(pkg.g, pkg.J, pkg.point)
    spd = 0.0 if rep.spd_ok else 1.0
    return max(spd, rep.j_squared_residual, rep.compatibility_residual)


def property_suite(M: ChartManifold, p, seed: int = 0) -> list[SuiteRow]:
    pkg = curvature_package(M, p)
    cls = _classify_pkg(pkg)
    R = pkg.riemann_frame
    stats, _ = constancy_stats_from_tensor(R, pkg.g_frame, pkg.J_frame, DEFAULT_SAMPLES, seed, 0)
    fit = fit_pi_basis(R, pkg.g_frame, pkg.J_frame) if pkg.n >= 3 else None
    return _property_rows(pkg, cls, stats.nu_hat, fit, seed)


def suite_passed(rows) -> bool:
    return all(r.verdict != "FAIL" for r in rows if r.kind == "identity")


# -- the constant-curvature implication ----------------------------------------------


@dataclass(frozen=True)
class TheoremAInputs:
    point_class: PointClass
    max_dev: float
    residual25: float
    nu_hat: float
    distance_to_nu_pi1: float  # ||R - nu_hat pi1|| / (1 + ||R||)
    trace_defect: float  # |tau - (2n-1) tau*| / (1 + |tau|)


def theorem_a_verdict(t: TheoremAInputs) -> TheoremAStatus:
    if t.point_class is not PointClass.HERMITIAN_NON_KAEHLER:
        return TheoremAStatus.NOT_APPLICABLE
    if t.max_dev > TOL_VERDICT or t.residual25 > TOL_VERDICT:
        return TheoremAStatus.HYPOTHESIS_FAILS
    if t.distance_to_nu_pi1 < TOL_VERDICT and t.trace_defect < TOL_VERDICT:
        return TheoremAStatus.VERIFIED
    return TheoremAStatus.VIOLATION


@dataclass
class PointDiagnostics:
    point: list[float]
    point_class: PointClass
    f_norm: float
    n_norm: float
    hermitian_residual: float
    class_eps: float
    constancy: ConstancyStats
    residual25: float
    residual26: float
    fit: dict | None
    trace_checks: dict
    theorem_a: TheoremAStatus
    theorem_a_inputs: TheoremAInputs
    property_suite: list[SuiteRow] = field(default_factory=list)
    extremize_iterations: dict = field(default_factory=dict)

    @property
    def nu_hat(self) -> float:
        return self.constancy.nu_hat

    @property
    def max_dev(self) -> float:
        return self.constancy.max_dev


def algebraic_diagnostics(
    R: np.ndarray,
    g: np.ndarray,
    J: np.ndarray,
    n: int,
    point_class: PointClass,
    seed: int = 0,
    stream: int = 0,
    m: int = DEFAULT_SAMPLES,
    restarts: int = DEFAULT_RESTARTS,
):
    """Constancy, identity, fit and implication-verdict evidence for an algebraic tensor.

    ``R``, ``g``, ``J`` are orthonormal-frame components; ``point_class`` is
    supplied by the caller (measured on a manifold, or forced for synthetic
    inputs).  Returns ``(stats, identity_residual, fit, trace_checks, inputs,
    status, extremization)``.
    """
    rho, tau, rho_star, tau_star = ricci_from_frame(R, J)
    stats, ext = constancy_stats_from_tensor(R, g, J, m, seed, stream, restarts)
    ident = residual_constant_antiholo(R, rho_star, tau_star, stats.nu_hat, n, g, J)
    fit = fit_pi_basis(R, g, J, n) if n >= 3 else None
    two_n = 2 * n
    trace_checks = {
        "tau": tau,
        "tau_star": tau_star,
        "tau_minus_2n_minus_1_tau_star": abs(tau - (two_n - 1) * tau_star),
        "nu_minus_tau_star_over_2n": abs(stats.nu_hat - tau_star / two_n),
        "nu_minus_tau_over_2n_2n_minus_1": abs(stats.nu_hat - tau / (two_n * (two_n - 1))),
    }
    inputs = TheoremAInputs(
        point_class=point_class,
        max_dev=stats.max_dev,
        residual25=ident.residual25,
        nu_hat=stats.nu_hat,
        distance_to_nu_pi1=_rel(R - stats.nu_hat * pi1(g), np.linalg.norm(R)),
        trace_defect=abs(tau - (two_n - 1) * tau_star) / (1.0 + abs(tau)),
    )
    return stats, ident, fit, trace_checks, inputs, theorem_a_verdict(inputs), ext


def diagnose_point(
    M: ChartManifold, p, seed: int = 0, stream: int = 0,
    m: int = DEFAULT_SAMPLES, restarts: int = DEFAULT_RESTARTS,
) -> PointDiagnostics:
    _require_dimension(M.n)
    pkg = curvature_package(M, p)
    cls = _classify_pkg(pkg)
    R = pkg.riemann_frame
    stats, ident, fit, traces, inputs, status, ext = algebraic_diagnostics(
        R, pkg.g_frame, pkg.J_frame, M.n, cls.point_class, seed, stream, m, restarts
    )
    rows = _property_rows(pkg, cls, stats.nu_hat, fit, seed)
    return PointDiagnostics(
        point=[float(x) for x in pkg.point],
        point_class=cls.point_class,
        f_norm=cls.f_norm,
        n_norm=cls.n_norm,
        hermitian_residual=cls.hermitian_residual,
        class_eps=cls.eps,
        constancy=stats,
        residual25=ident.residual25,
        residual26=ident.residual26,
        fit=None if fit is None else {"f": fit.f, "h": fit.h, "residual": fit.residual},
        trace_checks=traces,
        theorem_a=status,
        theorem_a_inputs=inputs,
        property_suite=rows,
        extremize_iterations={"min": list(ext.iterations_min), "max": list(ext.iterations_max)},
    )


def theorem_a_check(
    M: ChartManifold, p, seed: int = 0, m: int = DEFAULT_SAMPLES, restarts: int = DEFAULT_RESTARTS,
) -> TheoremAStatus:
    return diagnose_point(M, p, seed, m=m, restarts=restarts).theorem_a


# -- scans ---------------------------------------------------------------------------------


@dataclass
class ManifoldReport:
    manifold: str
    params: list[float]
    sampler: str
    seed: int
    points: list[PointDiagnostics]
    summary: dict
    tool_version: str = __version__


def sample_points(M: ChartManifold, sampler: str, seed: int, grid_cap: int = 27) -> list[np.ndarray]:
    """``grid:N`` (N points per axis, evenly thinned to ``grid_cap``) or ``random:K``."""
    kind, _, arg = sampler.partition(":")
    try:
        count = int(arg)
    except ValueError:
        raise ValueError(f"bad sampler {sampler!r}; use grid:N or random:K") from None
    if count < 1:
        raise ValueError("sampler count must be >= 1")
    if kind == "grid":
        pts = M.probe_points(per_axis=count, cap=grid_cap)
    elif kind == "random":
        rng = make_rng(seed, 0)
        lo = np.array([b[0] for b in M.domain.bounds])
        hi = np.array([b[1] for b in M.domain.bounds])
        pts = []
        attempts = 0
        while len(pts) < count:
            attempts += 1
            if attempts > 1000 * count:
                raise ValueError("could not draw points inside the domain")
            q = lo + (hi - lo) * rng.random(M.dim)
            if M.domain.contains(q):
                pts.append(q)
    else:
        raise ValueError(f"bad sampler {sampler!r}; use grid:N or random:K")
    if not pts:
        raise ValueError("empty sample set")
    return pts


def _diagnose_task(args):
    M, p, seed, stream, m, restarts = args
    return diagnose_point(M, p, seed, stream, m, restarts)


def thread_count() -> int:
    raw = os.environ.get("ANTIHOLO_THREADS", "1").strip() or "1"
    k = int(raw)
    if k <= 0:
        k = os.cpu_count() or 1
    return k


def scan_manifold(
    M: ChartManifold, sampler="random:5", seed: int = 0,
    m: int = DEFAULT_SAMPLES, restarts: int = DEFAULT_RESTARTS, workers: int | None = None,
) -> ManifoldReport:
    """Diagnostics at every sample point plus the cross-point spread of nu_hat."""
    _require_dimension(M.n)
    if isinstance(sampler, str):
        pts = sample_points(M, sampler, seed)
        label = sampler
    else:
        pts = [np.asarray(q, dtype=float) for q in sampler]
        label = f"explicit:{len(pts)}"
        if not pts:
            raise ValueError("empty sample set")
    tasks = [(M, q, seed, idx + 1, m, restarts) for idx, q in enumerate(pts)]
    workers = thread_count() if workers is None else workers
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            diags = list(pool.map(_diagnose_task, tasks))
    else:
        diags = [_diagnose_task(t) for t in tasks]
    return ManifoldReport(
        manifold=M.name,
        params=list(M.params),
        sampler=label,
        seed=seed,
        points=diags,
        summary=summarize(diags),
    )


def summarize(diags: list[PointDiagnostics]) -> dict:
    nus = np.array([d.nu_hat for d in diags])
    classes = {c.value: 0 for c in PointClass}
    statuses = {s.value: 0 for s in TheoremAStatus}
    for d in diags:
        classes[d.point_class.value] += 1
        statuses[d.theorem_a.value] += 1
    spread = float(nus.max() - nus.min())
    pointwise = all(d.max_dev < TOL_VERDICT for d in diags)
    return {
        "n_points": len(diags),
        "nu_hat_min": float(nus.min()),
        "nu_hat_max": float(nus.max()),
        "nu_hat_spread": spread,
        "pointwise_constant": "YES" if pointwise else "NO",
        "constant_across_points": "YES" if spread < TOL_VERDICT else "NO",
        "classes": classes,
        "theorem_a": statuses,
        "suite_failures": sum(
            1 for d in diags for r in d.property_suite if r.kind == "identity" and r.verdict == "FAIL"
        ),
        "violation": "YES" if statuses[TheoremAStatus.VIOLATION.value] else "NO",
    }
