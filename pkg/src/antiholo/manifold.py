"""Chart-level almost Hermitian manifolds: catalog, spec-file loader, validation.

Coordinates are real and ordered ``x1..xn, y1..yn`` so that the standard
complex structure sends ``d/dx_a`` to ``d/dy_a``.  Entries of the metric
``g_ij`` and of ``J^i_j`` (row ``i``, column ``j``; ``J(d_j) = J^i_j d_i``)
are expressions in :mod:`antiholo.exprlang`.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

import numpy as np

from . import exprlang
from .exprlang import Expr, Num, eval_jet
from .curvid import standard_j
from .jet import Jet

SPEC_HEADER = "antiholo-spec v1"
STRUCTURE_TOL = 1e-9
PROBE_CAP = 200
CATALOG = ("flat", "fubini_study", "hopf", "twisted_j")


class ManifoldError(ValueError):
    """Malformed manifold definition or catalog request."""


class SpecFormatError(ManifoldError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class DomainError(ManifoldError):
    """Point outside the chart domain."""


class StructureError(ManifoldError):
    """Structure axioms (SPD metric, J^2 = -I, compatibility) violated."""

    def __init__(self, message: str, report: "ValidationReport | None" = None):
        self.report = report
        super().__init__(message)


@dataclass(frozen=True)
class Domain:
    bounds: tuple[tuple[float, float], ...]
    puncture: float = 0.0  # excluded Euclidean ball |x| < puncture

    def contains(self, p, tol: float = 1e-12) -> bool:
        p = np.asarray(p, dtype=float)
        if p.shape != (len(self.bounds),):
            return False
        for x, (lo, hi) in zip(p, self.bounds):
            if not lo - tol <= x <= hi + tol:
                return False
        return not (self.puncture > 0 and np.linalg.norm(p) < self.puncture)


@dataclass(frozen=True)
class ChartManifold:
    name: str
    n: int
    domain: Domain
    g: tuple[tuple[Expr, ...], ...]
    J: tuple[tuple[Expr, ...], ...]
    params: tuple[float, ...] = ()
    metadata: dict = field(default_factory=dict, compare=False)
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def dim(self) -> int:
        return 2 * self.n

    def same_structure(self, other: "ChartManifold") -> bool:
        return (self.n, self.domain, self.g, self.J) == (other.n, other.domain, other.g, other.J)

    def check_point(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim,):
            raise DomainError(f"point has {p.size} coordinates, manifold dimension is {self.dim}")
        if not self.domain.contains(p):
            raise DomainError(f"point {tuple(float(x) for x in p)} is outside the chart domain")
        return p

    def jets(self, p, order: int = 3) -> tuple[Jet, Jet]:
        """Jets of the metric and of J at ``p``, each a ``(2n, 2n)``-valued jet."""
        p = self.check_point(p)
        key = tuple(p.tolist())
        hit = self._cache.get(key)
        if hit is not None and hit[0].order >= order:
            return hit[0].truncate(order), hit[1].truncate(order)
        d = self.dim
        g_entries = {}
        for i in range(d):
            for j in range(i + 1):
                g_entries[i, j] = eval_jet(self.g[i][j], p, order)
        gj = Jet.stack([g_entries[max(i, j), min(i, j)] for i in range(d) for j in range(d)], (d, d))
        Jj = Jet.stack([eval_jet(self.J[i][j], p, order) for i in range(d) for j in range(d)], (d, d))
        if len(self._cache) > 256:
            self._cache.clear()
        self._cache[key] = (gj, Jj)
        return gj, Jj

    def metric(self, p) -> np.ndarray:
        return self.jets(p, 0)[0].value

    def complex_structure(self, p) -> np.ndarray:
        return self.jets(p, 0)[1].value

    def permuted(self, perm) -> "ChartManifold":
        """The same geometry in coordinates ``x'_k = x_{perm[k]}`` (0-based ``perm``)."""
        perm = list(perm)
        d = self.dim
        if sorted(perm) != list(range(d)):
            raise ManifoldError("not a permutation of the coordinates")
        # old variable x_{perm[k]} is the new variable x'_k
        mapping = {perm[k] + 1: k + 1 for k in range(d)}
        full_g = [[self.g[max(i, j)][min(i, j)] for j in range(d)] for i in range(d)]
        g = tuple(
            tuple(exprlang.relabel(full_g[perm[a]][perm[b]], mapping) for b in range(a + 1))
            for a in range(d)
        )
        J = tuple(
            tuple(exprlang.relabel(self.J[perm[a]][perm[b]], mapping) for b in range(d))
            for a in range(d)
        )
        domain = Domain(tuple(self.domain.bounds[perm[k]] for k in range(d)), self.domain.puncture)
        return ChartManifold(
            f"{self.name}[perm]", self.n, domain, g, J, self.params, dict(self.metadata)
        )

    def probe_points(self, per_axis: int = 3, cap: int = PROBE_CAP) -> list[np.ndarray]:
        """Deterministic lattice of interior points, evenly thinned to at most ``cap``."""
        axes = [
            [lo + (hi - lo) * (k + 0.5) / per_axis for k in range(per_axis)]
            for lo, hi in self.domain.bounds
        ]
        pts = [np.array(c) for c in itertools.product(*axes)]
        pts = [p for p in pts if self.domain.contains(p)]
        if len(pts) > cap:
            idx = np.unique(np.linspace(0, len(pts) - 1, cap).round().astype(int))
            pts = [pts[i] for i in idx]
        return pts


# -- structure validation ----------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    point: tuple[float, ...]
    min_eigenvalue: float
    j_squared_residual: float
    compatibility_residual: float
    spd_ok: bool
    j_squared_ok: bool
    compatibility_ok: bool

    @property
    def passed(self) -> bool:
        return self.spd_ok and self.j_squared_ok and self.compatibility_ok

    def failures(self) -> list[str]:
        out = []
        if not self.spd_ok:
            out.append(f"metric not positive definite (smallest eigenvalue {self.min_eigenvalue:.3e})")
        if not self.j_squared_ok:
            out.append(f"J^2 != -I (relative residual {self.j_squared_residual:.3e})")
        if not self.compatibility_ok:
            out.append(f"g(JX,JY) != g(X,Y) (relative residual {self.compatibility_residual:.3e})")
        return out


def structure_residuals(g: np.ndarray, J: np.ndarray, point=(), tol: float = STRUCTURE_TOL):
    d = g.shape[0]
    gscale = max(1.0, float(np.max(np.abs(g))))
    jscale = 1.0 + float(np.max(np.abs(J))) ** 2
    sym_defect = float(np.max(np.abs(g - g.T))) / gscale
    lam = float(np.linalg.eigvalsh(0.5 * (g + g.T))[0])
    jsq = float(np.max(np.abs(J @ J + np.eye(d)))) / jscale
    compat = float(np.max(np.abs(J.T @ g @ J - g))) / (gscale * jscale)
    return ValidationReport(
        point=tuple(float(x) for x in point),
        min_eigenvalue=lam,
        j_squared_residual=jsq,
        compatibility_residual=compat,
        spd_ok=lam > tol * gscale and sym_defect < tol,
        j_squared_ok=jsq < tol,
        compatibility_ok=compat < tol,
    )


def validate_structure_at(M: ChartManifold, p) -> ValidationReport:
    p = M.check_point(p)
    g, J = M.metric(p), M.complex_structure(p)
    return structure_residuals(g, J, p)


def require_valid(M: ChartManifold, p) -> ValidationReport:
    rep = validate_structure_at(M, p)
    if not rep.passed:
        raise StructureError(
            f"{M.name}: invalid structure at point {rep.point}: " + "; ".join(rep.failures()), rep
        )
    return rep


# -- catalog ------------------------------------------------------------------


def _num(x: float) -> str:
    return repr(float(x)) if x >= 0 else f"({float(x)!r})"


def _from_text(name, n, domain, g_text, J_text, params, metadata) -> ChartManifold:
    d = 2 * n
    g = tuple(tuple(exprlang.parse_expr(g_text[i][j], d) for j in range(i + 1)) for i in range(d))
    J = tuple(tuple(exprlang.parse_expr(J_text[i][j], d) for j in range(d)) for i in range(d))
    return ChartManifold(name, n, domain, g, J, tuple(float(x) for x in params), metadata)


def _matrix_text(m: np.ndarray) -> list[list[str]]:
    return [[_num(v) if v != 0 else "0" for v in row] for row in m]


def _flat(n):
    d = 2 * n
    dom = Domain(((-1.0, 1.0),) * d)
    return _from_text(
        "flat", n, dom, _matrix_text(np.eye(d)), _matrix_text(standard_j(n)), [n],
        {"kaehler": True, "integrable": True},
    )


def _fubini_study(n, c):
    # Affine chart of CP^n rescaled so that g(0) = I and holomorphic
    # sectional curvature is c:  h_ab = [d_ab D - k conj(z_a) z_b] / D^2,
    # D = 1 + k|z|^2, k = c/4; real metric [[Re h, Im h], [-Im h, Re h]].
    d = 2 * n
    k = _num(c / 4.0)
    xs = [f"x{a + 1}" for a in range(n)]
    ys = [f"x{n + a + 1}" for a in range(n)]
    r2 = " + ".join(f"{v}^2" for v in xs + ys)
    D = f"(1 + {k}*({r2}))"
    den = f"{D}^2"
    g = [["0"] * d for _ in range(d)]
    for a in range(n):
        for b in range(n):
            re_zz = f"({xs[a]}*{xs[b]} + {ys[a]}*{ys[b]})"
            im_zz = f"({xs[a]}*{ys[b]} - {ys[a]}*{xs[b]})"
            diag = f"{D} - " if a == b else ""
            A = f"({diag}{k}*{re_zz})/{den}" if a == b else f"-({k}*{re_zz})/{den}"
            g[a][b] = A
            g[n + a][n + b] = A
            # pairing of dy_a with dx_b
            g[n + a][b] = f"({k}*{im_zz})/{den}"
            g[b][n + a] = g[n + a][b]
    dom = Domain(((-1.0, 1.0),) * d)
    return _from_text(
        "fubini_study", n, dom, g, _matrix_text(standard_j(n)), [n, c],
        {"kaehler": True, "integrable": True, "holomorphic_curvature": c},
    )


def _hopf(n):
    # g = delta / |z|^2 on a box with the ball |z| < 0.5 removed
    d = 2 * n
    r2 = " + ".join(f"x{i + 1}^2" for i in range(d))
    g = [["1/(" + r2 + ")" if i == j else "0" for j in range(d)] for i in range(d)]
    dom = Domain(((-2.0, 2.0),) * d, puncture=0.5)
    return _from_text(
        "hopf", n, dom, g, _matrix_text(standard_j(n)), [n],
        {"kaehler": False, "integrable": True},
    )


def _poly_text(coeffs, s: str) -> str:
    terms = []
    for power, c in enumerate(coeffs):
        if abs(c) < 1e-300:
            continue
        if power == 0:
            terms.append(_num(c))
        elif power == 1:
            terms.append(f"{_num(c)}*{s}")
        else:
            terms.append(f"{_num(c)}*{s}^{power}")
    return " + ".join(terms) if terms else "0"


def _twisted_j(n, eps):
    # J = A J0 A^-1 with the shear A = I + s E_12, s = eps*sin(x_{n+2}) + eps*x3;
    # g = (I + J^T J)/2 makes the metric compatible by construction.
    d = 2 * n
    J0 = standard_j(n)
    E = np.zeros((d, d))
    E[0, 1] = 1.0
    # (I + sE) J0 (I - sE) = J0 + s (E J0 - J0 E) - s^2 E J0 E
    Jc = [J0, E @ J0 - J0 @ E, -(E @ J0 @ E)]
    gc = [np.zeros((d, d)) for _ in range(5)]
    gc[0] += 0.5 * np.eye(d)
    for a, Ja in enumerate(Jc):
        for b, Jb in enumerate(Jc):
            gc[a + b] += 0.5 * Ja.T @ Jb
    s = f"({_num(eps)}*(sin(x{n + 2}) + x3))"
    J_text = [[_poly_text([Jc[p][i, j] for p in range(3)], s) for j in range(d)] for i in range(d)]
    g_text = [[_poly_text([gc[p][i, j] for p in range(5)], s) for j in range(d)] for i in range(d)]
    dom = Domain(((-1.0, 1.0),) * d)
    return _from_text(
        "twisted_j", n, dom, g_text, J_text, [n, eps],
        {"kaehler": eps == 0, "integrable": eps == 0},
    )


def _int_param(value, what="n") -> int:
    if float(value) != int(float(value)):
        raise ManifoldError(f"{what} must be an integer, got {value}")
    return int(float(value))


def catalog_manifold(name: str, params=()) -> ChartManifold:
    """Build a named catalog manifold.

    ``flat [n]``, ``fubini_study [n, c]``, ``hopf [n]``, ``twisted_j [n, eps]``.
    """
    params = list(params)
    arity = {"flat": 1, "fubini_study": 2, "hopf": 1, "twisted_j": 2}
    if name not in arity:
        raise ManifoldError(f"unknown catalog manifold {name!r}; choose from {', '.join(CATALOG)}")
    if len(params) != arity[name]:
        raise ManifoldError(f"{name} takes {arity[name]} parameter(s), got {len(params)}")
    n = _int_param(params[0])
    if n < 2:
        raise ManifoldError(f"complex dimension n must be >= 2, got {n}")
    if name == "flat":
        return _flat(n)
    if name == "hopf":
        return _hopf(n)
    value = float(params[1])
    if not np.isfinite(value):
        raise ManifoldError(f"parameter must be finite, got {value}")
    if name == "fubini_study":
        if value <= 0:
            raise ManifoldError(f"holomorphic sectional curvature c must be > 0, got {value}")
        return _fubini_study(n, value)
    return _twisted_j(n, value)


# -- spec files -----------------------------------------------------------------

_SECTIONS = ("NAME", "DIM", "DOMAIN", "METRIC", "J")
_ENTRY_RE = re.compile(r"^(g|J)\s*\[\s*(\d+)\s*,\s*(\d+)\s*\]\s*=\s*(.+)$")


def load_manifold(spec_text: str, validate: bool = True) -> ChartManifold:
    """Parse a ``antiholo-spec v1`` text into a manifold, validating on the probe grid."""
    lines = spec_text.splitlines()
    body = [(no, ln.split("#", 1)[0].strip()) for no, ln in enumerate(lines, start=1)]
    body = [(no, ln) for no, ln in body if ln]
    if not body or body[0][1] != SPEC_HEADER:
        raise SpecFormatError(f"first line must be the header {SPEC_HEADER!r}", body[0][0] if body else 1)
    sections: dict[str, list[tuple[int, str]]] = {}
    current = None
    for no, ln in body[1:]:
        head, _, rest = ln.partition(" ")
        if head in _SECTIONS:
            if head in sections:
                raise SpecFormatError(f"duplicate section {head}", no)
            current = head
            sections[head] = [(no, rest.strip())] if rest.strip() else []
        elif current is None:
            raise SpecFormatError(f"content before any section: {ln!r}", no)
        else:
            sections[current].append((no, ln))
    missing = [s for s in _SECTIONS if s not in sections]
    if missing:
        raise SpecFormatError(f"missing section(s): {', '.join(missing)}")

    name = " ".join(t for _, t in sections["NAME"]) or "unnamed"
    if len(sections["DIM"]) != 1:
        raise SpecFormatError("DIM takes a single integer")
    dim_no, dim_text = sections["DIM"][0]
    try:
        dim = int(dim_text)
    except ValueError:
        raise SpecFormatError(f"DIM must be an integer, got {dim_text!r}", dim_no) from None
    if dim < 4 or dim % 2:
        raise SpecFormatError(f"DIM must be even and >= 4, got {dim}", dim_no)

    bounds: dict[int, tuple[float, float]] = {}
    puncture = 0.0
    for no, ln in sections["DOMAIN"]:
        parts = ln.split()
        if parts[0] == "puncture" and len(parts) == 2:
            puncture = float(parts[1])
            continue
        m = re.fullmatch(r"x(\d+)", parts[0])
        if not m or len(parts) != 3:
            raise SpecFormatError(f"domain lines read 'x<i> <lo> <hi>' or 'puncture <r>': {ln!r}", no)
        i = int(m.group(1))
        if not 1 <= i <= dim:
            raise SpecFormatError(f"domain axis x{i} out of range for DIM {dim}", no)
        lo, hi = float(parts[1]), float(parts[2])
        if not lo < hi:
            raise SpecFormatError(f"empty interval for x{i}", no)
        bounds[i] = (lo, hi)
    if sorted(bounds) != list(range(1, dim + 1)):
        raise SpecFormatError(f"DOMAIN must give an interval for each of x1..x{dim}")

    def entries(section, kind):
        out = {}
        for no, ln in sections[section]:
            m = _ENTRY_RE.match(ln)
            if not m or m.group(1) != kind:
                raise SpecFormatError(f"expected '{kind}[i,j] = <expr>', got {ln!r}", no)
            i, j = int(m.group(2)), int(m.group(3))
            if not (1 <= i <= dim and 1 <= j <= dim):
                raise SpecFormatError(f"entry {kind}[{i},{j}] does not match DIM {dim}", no)
            if kind == "g" and j > i:
                raise SpecFormatError(
                    f"metric entries must address the lower triangle (i >= j), got g[{i},{j}]", no
                )
            if (i, j) in out:
                raise SpecFormatError(f"duplicate entry {kind}[{i},{j}]", no)
            try:
                out[i, j] = exprlang.parse_expr(m.group(4), dim)
            except exprlang.ExprError as exc:
                raise SpecFormatError(f"in {kind}[{i},{j}]: {exc}", no) from exc
        return out

    g_e = entries("METRIC", "g")
    J_e = entries("J", "J")
    zero = Num(0.0)
    g = tuple(tuple(g_e.get((i + 1, j + 1), zero) for j in range(i + 1)) for i in range(dim))
    J = tuple(tuple(J_e.get((i + 1, j + 1), zero) for j in range(dim)) for i in range(dim))
    M = ChartManifold(
        name, dim // 2, Domain(tuple(bounds[i] for i in range(1, dim + 1)), puncture), g, J,
        (), {"source": "spec"},
    )
    if validate:
        for p in M.probe_points():
            try:
                require_valid(M, p)
            except exprlang.ExprDomainError as exc:
                raise StructureError(f"{M.name}: cannot evaluate at point {tuple(p)}: {exc}") from exc
    return M


def dump_manifold(M: ChartManifold) -> str:
    """Serialize to the spec-file format (entries equal to literal 0 are omitted)."""
    out = [SPEC_HEADER, f"NAME {M.name}", f"DIM {M.dim}", "DOMAIN"]
    for i, (lo, hi) in enumerate(M.domain.bounds, start=1):
        out.append(f"  x{i} {lo!r} {hi!r}")
    if M.domain.puncture:
        out.append(f"  puncture {M.domain.puncture!r}")
    out.append("METRIC")
    for i in range(M.dim):
        for j in range(i + 1):
            if M.g[i][j] != Num(0.0):
                out.append(f"  g[{i + 1},{j + 1}] = {M.g[i][j]}")
    out.append("J")
    for i in range(M.dim):
        for j in range(M.dim):
            if M.J[i][j] != Num(0.0):
                out.append(f"  J[{i + 1},{j + 1}] = {M.J[i][j]}")
    return "\n".join(out) + "\n"
