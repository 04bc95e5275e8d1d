"""Polynomial spaces on reference cells.

Every space is stored as a coefficient matrix over an orthonormal
expansion basis: products of shifted Legendre polynomials on tensor
cells and Dubiner (collapsed-coordinate Jacobi) polynomials on simplices.
Prisms combine a triangle basis with a Legendre factor in ``z``.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from dofperm.errors import InvalidArgument, UnsupportedDegree, UnsupportedElement
from dofperm.quadrature import make_quadrature
from dofperm.topology import CellKind, cell_kind, make_topology

MAX_DEGREE = 10


@dataclass(frozen=True)
class PointSet:
    """Points in reference coordinates.

    Attributes:
        coords: Array of shape ``(n_points, dim)``.
    """

    coords: np.ndarray

    @classmethod
    def on(cls, kind, coords, slack: float = 1e-12) -> "PointSet":
        """Validate that ``coords`` lie in the closed reference cell."""
        kind = cell_kind(kind)
        pts = as_points(kind, coords)
        if not np.all(_inside(kind, pts, slack)):
            raise InvalidArgument(f"points outside the reference {kind}")
        return cls(pts)


def _inside(kind: CellKind, pts: np.ndarray, slack: float) -> np.ndarray:
    lo = np.all(pts >= -slack, axis=1)
    if kind.name in ("interval", "quadrilateral", "hexahedron"):
        return lo & np.all(pts <= 1 + slack, axis=1)
    if kind.name in ("triangle", "tetrahedron"):
        return lo & (pts.sum(axis=1) <= 1 + slack)
    if kind.name == "prism":
        return lo & (pts[:, 0] + pts[:, 1] <= 1 + slack) & (pts[:, 2] <= 1 + slack)
    return lo


def as_points(kind, points) -> np.ndarray:
    """Coerce ``points`` to a float array of shape ``(n, dim)``."""
    if isinstance(points, PointSet):
        points = points.coords
    kind = cell_kind(kind)
    pts = np.asarray(points, dtype=float)
    if kind.dim == 1 and pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[1] != kind.dim:
        raise InvalidArgument(
            f"expected points of shape (n, {kind.dim}) on {kind}, got {pts.shape}"
        )
    return pts


def _scaled_jacobi(n: int, alpha: int, u: np.ndarray, v: np.ndarray) -> list[np.ndarray]:
    """Return ``v**k P_k^(alpha,0)(u/v)`` for k = 0..n without dividing by v."""
    out = [np.ones_like(u)]
    if n >= 1:
        out.append(((alpha + 2) * u + alpha * v) / 2.0)
    for k in range(1, n):
        a1 = 2 * (k + 1) * (k + alpha + 1) * (2 * k + alpha)
        a2 = (2 * k + alpha + 1) * (2 * k + alpha + 2) * (2 * k + alpha)
        a3 = (2 * k + alpha + 1) * alpha**2
        a4 = 2 * (k + alpha) * k * (2 * k + alpha + 2)
        out.append(((a2 * u + a3 * v) * out[k] - a4 * v * v * out[k - 1]) / a1)
    return out


def _legendre01(n: int, x: np.ndarray) -> np.ndarray:
    vals = _scaled_jacobi(n, 0, 2.0 * x - 1.0, np.ones_like(x))
    return np.array([np.sqrt(2 * k + 1) * p for k, p in enumerate(vals)])


def _triangle_indices(n: int) -> list[tuple[int, int]]:
    return [(m - q, q) for m in range(n + 1) for q in range(m + 1)]


def _tet_indices(n: int) -> list[tuple[int, int, int]]:
    return [
        (m - q - r, q, r) for m in range(n + 1) for r in range(m + 1) for q in range(m - r + 1)
    ]


def _dubiner_triangle(n: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    q_p = _scaled_jacobi(n, 0, 2 * x - (1 - y), 1 - y)
    rows = []
    for p, q in _triangle_indices(n):
        rows.append(q_p[p] * _scaled_jacobi(q, 2 * p + 1, 2 * y - 1, np.ones_like(y))[q])
    return np.array(rows)


def _dubiner_tet(n: int, x, y, z) -> np.ndarray:
    q_p = _scaled_jacobi(n, 0, 2 * x - (1 - y - z), 1 - y - z)
    rows = []
    for p, q, r in _tet_indices(n):
        qb = _scaled_jacobi(q, 2 * p + 1, 2 * y - (1 - z), 1 - z)[q]
        rc = _scaled_jacobi(r, 2 * p + 2 * q + 2, 2 * z - 1, np.ones_like(z))[r]
        rows.append(q_p[p] * qb * rc)
    return np.array(rows)


def _raw_expansion(kind: CellKind, n: int, pts: np.ndarray) -> np.ndarray:
    name = kind.name
    if name == "point":
        return np.ones((1, len(pts)))
    if name == "interval":
        return _legendre01(n, pts[:, 0])
    if name == "quadrilateral":
        lx, ly = _legendre01(n, pts[:, 0]), _legendre01(n, pts[:, 1])
        return np.einsum("jp,ip->jip", ly, lx).reshape(-1, len(pts))
    if name == "hexahedron":
        lx, ly, lz = (_legendre01(n, pts[:, i]) for i in range(3))
        return np.einsum("kp,jp,ip->kjip", lz, ly, lx).reshape(-1, len(pts))
    if name == "triangle":
        return _dubiner_triangle(n, pts[:, 0], pts[:, 1])
    if name == "tetrahedron":
        return _dubiner_tet(n, pts[:, 0], pts[:, 1], pts[:, 2])
    if name == "prism":
        tri = _dubiner_triangle(n, pts[:, 0], pts[:, 1])
        lz = _legendre01(n, pts[:, 2])
        return np.einsum("kp,tp->ktp", lz, tri).reshape(-1, len(pts))
    raise InvalidArgument(f"no polynomial expansion on {kind}")


@functools.lru_cache(maxsize=None)
def _scales(kind: CellKind, n: int) -> np.ndarray:
    if kind.name in ("point", "interval", "quadrilateral", "hexahedron"):
        return np.ones(expansion_size(kind, n))
    pts, wts = make_quadrature(kind, 2 * n)
    raw = _raw_expansion(kind, n, pts)
    return 1.0 / np.sqrt((raw * raw) @ wts)


def expansion_size(kind, degree: int) -> int:
    """Number of members in the expansion basis of a cell and degree."""
    kind = cell_kind(kind)
    n = degree
    return {
        "point": 1,
        "interval": n + 1,
        "quadrilateral": (n + 1) ** 2,
        "hexahedron": (n + 1) ** 3,
        "triangle": (n + 1) * (n + 2) // 2,
        "tetrahedron": (n + 1) * (n + 2) * (n + 3) // 6,
        "prism": (n + 1) ** 2 * (n + 2) // 2,
    }[kind.name]


def tabulate_expansion(kind, degree: int, points) -> np.ndarray:
    """Evaluate the orthonormal expansion basis.

    Args:
        kind: Reference cell.
        degree: Polynomial degree of the expansion, at most 10.
        points: Points of shape ``(n_points, dim)``.

    Returns:
        Array of shape ``(n_expansion, n_points)``.

    Raises:
        UnsupportedDegree: If ``degree`` exceeds the conditioning cap.
    """
    kind = cell_kind(kind)
    if not isinstance(degree, (int, np.integer)) or degree < 0:
        raise InvalidArgument(f"degree must be a nonnegative integer, got {degree!r}")
    if degree > MAX_DEGREE:
        raise UnsupportedDegree(f"degree {degree} exceeds the cap of {MAX_DEGREE}")
    pts = as_points(kind, points)
    return _raw_expansion(kind, int(degree), pts) * _scales(kind, int(degree))[:, None]


@dataclass(frozen=True, eq=False)
class PolynomialSet:
    """A space of (possibly vector valued) polynomials.

    Attributes:
        cell: Reference cell kind.
        degree: Degree of the expansion basis the coefficients refer to.
        value_size: 1 for scalar spaces, the cell dimension for vector spaces.
        coeffs: Array ``(dim_space, value_size * n_expansion)``; component
            ``c`` of member ``i`` uses columns ``c * n_expansion ...``.
    """

    cell: CellKind
    degree: int
    value_size: int
    coeffs: np.ndarray

    @property
    def dim_space(self) -> int:
        return self.coeffs.shape[0]

    def tabulate(self, points) -> np.ndarray:
        """Values of the members, shape ``(dim_space, n_points, value_size)``."""
        basis = tabulate_expansion(self.cell, self.degree, points)
        c = self.coeffs.reshape(self.dim_space, self.value_size, -1)
        return np.einsum("ice,ep->ipc", c, basis)


def project(kind, degree: int, fn, value_size: int = 1) -> np.ndarray:
    """L2-project functions onto the expansion basis.

    Args:
        kind: Reference cell.
        degree: Expansion degree; the functions must be polynomials in it.
        fn: Callable mapping points ``(n, dim)`` to ``(m, n, value_size)``.
        value_size: Number of components.

    Returns:
        Coefficients of shape ``(m, value_size * n_expansion)``.
    """
    kind = cell_kind(kind)
    pts, wts = make_quadrature(kind, 2 * degree + 2)
    basis = tabulate_expansion(kind, degree, pts)
    vals = np.asarray(fn(pts), dtype=float).reshape(-1, len(pts), value_size)
    coeffs = np.einsum("mpc,ep,p->mce", vals, basis, wts)
    return coeffs.reshape(len(vals), -1)


def monomials(points: np.ndarray, exponents) -> np.ndarray:
    """Evaluate monomials ``x^a y^b ...`` for each exponent tuple."""
    pts = np.asarray(points, dtype=float)
    return np.array([np.prod(pts ** np.array(e)[None, :], axis=1) for e in exponents])


def row_basis(coeffs: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal rows spanning the row space of ``coeffs``."""
    _, s, vt = np.linalg.svd(coeffs, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0] if len(s) else 1.0)))
    return vt[:rank]


def scalar_span(kind, degree: int) -> PolynomialSet:
    """The full expansion space (P_k on simplices, Q_k on tensor cells)."""
    kind = cell_kind(kind)
    n = expansion_size(kind, degree)
    return PolynomialSet(kind, degree, 1, np.eye(n))


def superlinear_degree(exponent) -> int:
    """Total degree minus the number of variables appearing linearly."""
    return sum(exponent) - sum(1 for a in exponent if a == 1)


def serendipity_span(kind, degree: int) -> PolynomialSet:
    """Monomials of superlinear degree at most ``degree`` on a quad or hex."""
    kind = cell_kind(kind)
    if kind.name not in ("quadrilateral", "hexahedron"):
        raise UnsupportedElement(f"serendipity spaces are defined on quads and hexes, not {kind}")
    exps = [
        e
        for e in itertools.product(range(degree + 1), repeat=kind.dim)
        if superlinear_degree(e) <= degree
    ]
    coeffs = project(kind, degree, lambda p: monomials(p, exps)[:, :, None])
    return PolynomialSet(kind, degree, 1, row_basis(coeffs))


def _vector_members(kind: CellKind, n: int, members: list[tuple[int, int]]) -> np.ndarray:
    # members: (component, expansion index) pairs as unit coefficient rows.
    size = expansion_size(kind, n)
    out = np.zeros((len(members), kind.dim * size))
    for row, (comp, idx) in enumerate(members):
        out[row, comp * size + idx] = 1.0
    return out


def _homogeneous_exponents(dim: int, degree: int) -> list[tuple[int, ...]]:
    return [e for e in itertools.product(range(degree + 1), repeat=dim) if sum(e) == degree]


def vector_span(family: str, kind, degree: int) -> PolynomialSet:
    """Vector-valued spans of the Raviart-Thomas and Nedelec elements.

    Args:
        family: ``"raviart_thomas"`` or ``"nedelec1"``.
        kind: Reference cell.
        degree: Element degree (1 or 2).

    Returns:
        A :class:`PolynomialSet` with ``value_size`` equal to the cell dimension.
    """
    kind = cell_kind(kind)
    key = (family, kind.name, degree)
    k = degree
    if key in (("raviart_thomas", "quadrilateral", 1), ("raviart_thomas", "quadrilateral", 2)):
        # Q_{k,k-1} x Q_{k-1,k}; tensor index i + (k+1) j holds L_i(x) L_j(y).
        mem = [(0, i + (k + 1) * j) for j in range(k) for i in range(k + 1)]
        mem += [(1, i + (k + 1) * j) for j in range(k + 1) for i in range(k)]
        return PolynomialSet(kind, k, 2, _vector_members(kind, k, mem))
    if key in (("raviart_thomas", "triangle", 1), ("raviart_thomas", "triangle", 2)):
        low = expansion_size(kind, k - 1)
        base = _vector_members(kind, k, [(c, i) for c in range(2) for i in range(low)])
        exps = _homogeneous_exponents(2, k - 1)

        def extra(p):
            m = monomials(p, exps)
            return np.stack([m * p[:, 0], m * p[:, 1]], axis=-1)

        coeffs = np.vstack([base, project(kind, k, extra, 2)])
        return PolynomialSet(kind, k, 2, row_basis(coeffs))
    if key in (("nedelec1", "tetrahedron", 1), ("nedelec1", "tetrahedron", 2)):
        low = expansion_size(kind, k - 1)
        base = _vector_members(kind, k, [(c, i) for c in range(3) for i in range(low)])
        exps = _homogeneous_exponents(3, k - 1)

        def extra(p):
            m = monomials(p, exps)
            rows = []
            for c in range(3):
                q = np.zeros((len(exps), len(p), 3))
                q[:, :, c] = m
                rows.append(np.cross(np.broadcast_to(p, q.shape), q))
            return np.concatenate(rows)

        coeffs = np.vstack([base, project(kind, k, extra, 3)])
        return PolynomialSet(kind, k, 3, row_basis(coeffs))
    raise UnsupportedElement(f"no {family} span on {kind} of degree {degree}")


def nedelec_quad_span() -> PolynomialSet:
    """The lowest-order Nedelec space on the quadrilateral.

    Spanned by ``(1,0), (y,0), (0,1), (0,x)``; used as the interior moment
    space of the degree-2 Raviart-Thomas quadrilateral.
    """
    kind = CellKind("quadrilateral")

    def fn(p):
        one, zero = np.ones(len(p)), np.zeros(len(p))
        return np.array(
            [
                np.column_stack([one, zero]),
                np.column_stack([p[:, 1], zero]),
                np.column_stack([zero, one]),
                np.column_stack([zero, p[:, 0]]),
            ]
        )

    return PolynomialSet(kind, 1, 2, project(kind, 1, fn, 2))


def reference_vertices(kind) -> np.ndarray:
    """Convenience accessor for the vertex coordinates of a reference cell."""
    return make_topology(kind).vertices
