"""Ciarlet finite elements.

An element is a polynomial span, an ordered list of functionals (each
attached to a sub-entity of the cell) and the basis obtained by
inverting the dual matrix ``B[i, j] = l_i(member_j)``.

Every functional is stored in the same discrete form: a set of points in
cell coordinates and one weight vector per point, so that
``l(v) = sum_q weights[q] . v(points[q])``. Point evaluations use a
single point with weight 1; integral moments use a quadrature rule on
the entity with the weight function folded into the weights.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

import numpy as np

from dofperm.errors import DegenerateElement, InvalidArgument, NoMoments, UnsupportedElement
from dofperm.polyset import (
    MAX_DEGREE,
    PolynomialSet,
    as_points,
    expansion_size,
    monomials,
    nedelec_quad_span,
    project,
    row_basis,
    scalar_span,
    serendipity_span,
    tabulate_expansion,
    vector_span,
)
from dofperm.quadrature import make_quadrature
from dofperm.topology import (
    CellKind,
    CellTopology,
    cell_kind,
    entity_frame,
    make_topology,
    sub_entity_kind,
)

FAMILIES = ("lagrange", "raviart_thomas", "nedelec1", "serendipity")

SOBOLEV = {
    "lagrange": "H1",
    "serendipity": "H1",
    "raviart_thomas": "Hdiv",
    "nedelec1": "Hcurl",
}

# Directions of the two face tangent functionals of Nedelec elements, in
# face coordinates: each runs from the midpoint of one edge towards the
# opposite vertex, so a rotation of the face cycles them (up to sign).
FACE_TANGENTS = np.array([[2.0, -1.0], [-1.0, 2.0]])


@dataclass(frozen=True, eq=False)
class Functional:
    """One degree of freedom.

    Attributes:
        kind: ``point_eval``, ``directional_point_eval`` or ``integral_moment``.
        entity: ``(dim, index)`` of the sub-entity the DOF belongs to.
        points: Cell coordinates of the evaluation points, ``(n_q, tdim)``.
        weights: Weight vectors, ``(n_q, value_size)``.
        entity_points: The same points in the entity's own coordinates.
        moment: Index of the weight function in the entity's moment space.
        mode: ``scalar``, ``normal``, ``tangent`` or ``fixed`` for moments.
        direction: Direction vector for directional point evaluations.
    """

    kind: str
    entity: tuple[int, int]
    points: np.ndarray
    weights: np.ndarray
    entity_points: np.ndarray
    moment: int | None = None
    mode: str | None = None
    direction: np.ndarray | None = None

    def __call__(self, values: np.ndarray) -> np.ndarray:
        """Apply the functional to tabulated functions ``(n_fn, n_q, value_size)``."""
        return np.einsum("fqc,qc->f", values, self.weights)


@dataclass(frozen=True, eq=False)
class MomentSpace:
    """Weight functions of the integral moments on one sub-entity.

    Attributes:
        entity: ``(dim, index)`` of the sub-entity.
        space: Weight functions as a polynomial set on the entity's
            reference cell, in DOF order. Scalar for ``scalar`` and
            ``normal`` moments, vector valued (entity coordinates) for
            ``tangent`` and ``fixed`` moments.
        mode: How the weight couples to the trace of the function.
        name: Short description such as ``lagrange`` or ``dpc``.
        degree: Polynomial degree of the weight space.
        origin: Entity origin in cell coordinates.
        axes: Entity axes in cell coordinates, ``(tdim, entity_dim)``.
    """

    entity: tuple[int, int]
    space: PolynomialSet
    mode: str
    name: str
    degree: int
    origin: np.ndarray
    axes: np.ndarray

    def tabulate(self, points) -> np.ndarray:
        """Weight function values at entity points, ``(n, n_points, value_size)``."""
        return self.space.tabulate(points)


@dataclass(frozen=True, eq=False)
class FiniteElement:
    """A Ciarlet finite element on a reference cell.

    Attributes:
        cell: Reference cell kind.
        family: Element family name.
        degree: Element degree.
        value_size: Number of value components.
        functionals: The DOFs in element order.
        span: The polynomial space.
        basis_coeffs: ``(n_dofs, dim_space)`` coefficients of the basis in
            terms of the span members.
        entity_dofs: Map ``(dim, index)`` to the DOF indices on that entity.
        sobolev: ``H1``, ``Hdiv`` or ``Hcurl``.
        moment_spaces: Weight spaces for entities carrying moments.
    """

    cell: CellKind
    family: str
    degree: int
    value_size: int
    functionals: tuple[Functional, ...]
    span: PolynomialSet
    basis_coeffs: np.ndarray
    entity_dofs: dict
    sobolev: str
    moment_spaces: dict = field(default_factory=dict)

    @property
    def n_dofs(self) -> int:
        return len(self.functionals)

    @property
    def topology(self) -> CellTopology:
        return make_topology(self.cell)

    @functools.cached_property
    def expansion_coeffs(self) -> np.ndarray:
        """Basis coefficients over the expansion, ``(n_dofs, value_size * n_exp)``."""
        return self.basis_coeffs @ self.span.coeffs

    def entity_dof_counts(self) -> dict[tuple[int, str], int]:
        """DOF count keyed by (entity dimension, entity kind name)."""
        topo = self.topology
        out: dict[tuple[int, str], int] = {}
        for (d, i), dofs in self.entity_dofs.items():
            out[(d, str(sub_entity_kind(topo, d, i)))] = len(dofs)
        return out

    def __repr__(self) -> str:
        return f"FiniteElement({self.family}, {self.cell}, {self.degree}, n_dofs={self.n_dofs})"


def lattice_interior(kind: CellKind, k: int) -> np.ndarray:
    """Equispaced points of spacing 1/k strictly inside a reference cell.

    Ordered with the first coordinate varying fastest.
    """
    name = kind.name
    r = range(1, k)
    if name == "point":
        return np.zeros((1, 0))
    if name == "interval":
        pts = [(i,) for i in r]
    elif name == "triangle":
        pts = [(i, j) for j in r for i in r if i + j < k]
    elif name == "quadrilateral":
        pts = [(i, j) for j in r for i in r]
    elif name == "tetrahedron":
        pts = [(i, j, m) for m in r for j in r for i in r if i + j + m < k]
    elif name == "hexahedron":
        pts = [(i, j, m) for m in r for j in r for i in r]
    elif name == "prism":
        pts = [(i, j, m) for m in r for j in r for i in r if i + j < k]
    else:
        raise UnsupportedElement(f"no Lagrange lattice on {kind}")
    return np.array(pts, dtype=float).reshape(-1, kind.dim) / k


def lagrange_points(kind, k: int) -> list[tuple[tuple[int, int], np.ndarray, np.ndarray]]:
    """DOF points of the degree-k Lagrange element, grouped by entity.

    Returns:
        A list of ``(entity, cell_points, entity_points)`` in DOF order.
    """
    kind = cell_kind(kind)
    topo = make_topology(kind)
    out = []
    for d in range(topo.dim + 1):
        for i in range(topo.entity_counts[d]):
            if d == 0:
                local = np.zeros((1, 0))
                pts = topo.vertices[i][None, :]
            else:
                local = lattice_interior(sub_entity_kind(topo, d, i), k)
                origin, axes = entity_frame(topo, d, i)
                pts = origin + local @ axes.T
            out.append(((d, i), pts, local))
    return out


def _nodal_basis(kind: CellKind, degree: int, members: np.ndarray, pts: np.ndarray,
                 value_size: int = 1) -> np.ndarray:
    span = PolynomialSet(kind, degree, value_size, members)
    vander = span.tabulate(pts)[:, :, 0]  # (member, point)
    return np.linalg.solve(vander, members)


def lagrange_weights(kind, q: int) -> PolynomialSet:
    """Lagrange basis of degree ``q`` (``q = 0`` gives the constant 1)."""
    kind = cell_kind(kind)
    if q == 0:
        return PolynomialSet(kind, 0, 1, scalar_span(kind, 0).coeffs * _const_scale(kind))
    pts = np.vstack([p for _, p, _ in lagrange_points(kind, q)])
    coeffs = _nodal_basis(kind, q, scalar_span(kind, q).coeffs, pts)
    return PolynomialSet(kind, q, 1, coeffs)


def _const_scale(kind: CellKind) -> float:
    # The degree-0 expansion member is 1/sqrt(|cell|); rescale it to 1.
    _, wts = make_quadrature(kind, 0)
    return float(np.sqrt(wts.sum()))


def dpc_weights(kind, q: int) -> PolynomialSet:
    """dPc space of degree ``q`` on a quadrilateral or hexahedron.

    The basis is the simplex Lagrange basis (on the triangle or
    tetrahedron sitting in the corner of the cell), e.g. ``1 - t - s``,
    ``t`` and ``s`` at degree 1.
    """
    kind = cell_kind(kind)
    simplex = {"quadrilateral": "triangle", "hexahedron": "tetrahedron"}[kind.name]
    if q == 0:
        return PolynomialSet(kind, 0, 1, scalar_span(kind, 0).coeffs * _const_scale(kind))
    exps = [e for e in itertools.product(range(q + 1), repeat=kind.dim) if sum(e) <= q]
    members = project(kind, q, lambda p: monomials(p, exps)[:, :, None])
    pts = np.vstack([p for _, p, _ in lagrange_points(simplex, q)])
    return PolynomialSet(kind, q, 1, _nodal_basis(kind, q, members, pts))


def vector_weights(scalar: PolynomialSet, directions: np.ndarray) -> PolynomialSet:
    """Products ``psi_j * d_c`` ordered by function, then direction."""
    n_exp = scalar.coeffs.shape[1]
    dim = directions.shape[1]
    rows = []
    for j in range(scalar.dim_space):
        for d in directions:
            row = np.zeros(dim * n_exp)
            for c in range(dim):
                row[c * n_exp : (c + 1) * n_exp] = d[c] * scalar.coeffs[j]
            rows.append(row)
    return PolynomialSet(scalar.cell, scalar.degree, dim, np.array(rows))


def facet_normal(axes: np.ndarray) -> np.ndarray:
    """Unnormalised normal of a facet from its axes.

    In 2D this is the tangent rotated by 90 degrees anticlockwise; in 3D
    it is the cross product of the two face axes.
    """
    if axes.shape == (2, 1):
        t = axes[:, 0]
        return np.array([-t[1], t[0]])
    if axes.shape == (3, 2):
        return np.cross(axes[:, 0], axes[:, 1])
    if axes.shape == (1, 0):
        return np.ones(1)
    raise InvalidArgument(f"entity with axes of shape {axes.shape} is not a facet")


def moment_functionals(topo: CellTopology, ms: MomentSpace, span_degree: int,
                       value_size: int) -> list[Functional]:
    """Discretise the moments against every weight function of ``ms``."""
    d, i = ms.entity
    ekind = sub_entity_kind(topo, d, i)
    qpts, qwts = make_quadrature(ekind, span_degree + ms.degree + 2)
    psi = ms.tabulate(qpts)  # (m, q, c)
    cell_pts = ms.origin + qpts @ ms.axes.T
    out = []
    for m in range(ms.space.dim_space):
        if ms.mode == "scalar":
            w = (qwts * psi[m, :, 0])[:, None]
        elif ms.mode == "normal":
            w = (qwts * psi[m, :, 0])[:, None] * facet_normal(ms.axes)[None, :]
        else:
            w = qwts[:, None] * (psi[m] @ ms.axes.T)
        if w.shape[1] != value_size:
            raise UnsupportedElement("moment weights do not match the element value size")
        out.append(
            Functional("integral_moment", (d, i), cell_pts, w, qpts, moment=m, mode=ms.mode)
        )
    return out


def _moment_space(topo, entity, space, mode, name, degree) -> MomentSpace:
    origin, axes = entity_frame(topo, *entity)
    return MomentSpace(entity, space, mode, name, degree, origin, axes)


def _check_supported(family: str, kind: CellKind, degree: int) -> None:
    ok = False
    if isinstance(degree, (int, np.integer)) and not isinstance(degree, bool):
        if family == "lagrange":
            ok = kind.name in (
                "interval", "triangle", "quadrilateral", "tetrahedron", "hexahedron", "prism"
            ) and 1 <= degree <= MAX_DEGREE
        elif family == "raviart_thomas":
            ok = kind.name in ("triangle", "quadrilateral") and 1 <= degree <= 2
        elif family == "nedelec1":
            ok = kind.name == "tetrahedron" and 1 <= degree <= 2
        elif family == "serendipity":
            ok = kind.name in ("quadrilateral", "hexahedron") and 1 <= degree <= 5
    if not ok:
        raise UnsupportedElement(f"unsupported element ({family}, {kind}, {degree!r})")


def _entity_list(topo: CellTopology):
    for d in range(topo.dim + 1):
        for i in range(topo.entity_counts[d]):
            yield d, i


def _build_functionals(family: str, kind: CellKind, k: int, span: PolynomialSet):
    topo = make_topology(kind)
    functionals: list[Functional] = []
    spaces: dict = {}
    vs = span.value_size
    interval = CellKind("interval")
    triangle = CellKind("triangle")

    def add(entity, space, mode, name, degree):
        ms = _moment_space(topo, entity, space, mode, name, degree)
        spaces[entity] = ms
        functionals.extend(moment_functionals(topo, ms, span.degree, vs))

    if family == "lagrange":
        for entity, pts, local in lagrange_points(kind, k):
            for p, lp in zip(pts, local):
                functionals.append(
                    Functional("point_eval", entity, p[None, :], np.ones((1, 1)), lp[None, :])
                )
        return functionals, spaces

    for d, i in _entity_list(topo):
        entity = (d, i)
        if family == "serendipity":
            if d == 0:
                functionals.append(
                    Functional(
                        "point_eval", entity, topo.vertices[i][None, :], np.ones((1, 1)),
                        np.zeros((1, 0)),
                    )
                )
            elif d == 1 and k >= 2:
                add(entity, lagrange_weights(interval, k - 2), "scalar", "lagrange", k - 2)
            elif d == 2 and k >= 4:
                add(entity, dpc_weights("quadrilateral", k - 4), "scalar", "dpc", k - 4)
            elif d == 3 and k >= 6:
                add(entity, dpc_weights("hexahedron", k - 6), "scalar", "dpc", k - 6)
        elif family == "raviart_thomas":
            if d == 1:
                add(entity, lagrange_weights(interval, k - 1), "normal", "lagrange", k - 1)
            elif d == 2 and k >= 2:
                if kind.name == "quadrilateral":
                    add(entity, nedelec_quad_span(), "fixed", "nedelec1", k - 1)
                else:
                    scalar = lagrange_weights(triangle, k - 2)
                    add(entity, vector_weights(scalar, np.eye(2)), "fixed", "vector lagrange",
                        k - 2)
        elif family == "nedelec1":
            if d == 1:
                add(entity, lagrange_weights(interval, k - 1), "tangent", "lagrange", k - 1)
            elif d == 2 and k >= 2:
                scalar = lagrange_weights(triangle, k - 2)
                add(entity, vector_weights(scalar, FACE_TANGENTS), "fixed", "vector lagrange",
                    k - 2)
            elif d == 3 and k >= 3:  # pragma: no cover - degree capped at 2
                scalar = lagrange_weights(kind, k - 3)
                add(entity, vector_weights(scalar, np.eye(3)), "fixed", "vector lagrange", k - 3)
    return functionals, spaces


def interpolation_data(functionals) -> tuple[np.ndarray, np.ndarray]:
    """Stack functionals into one point set and a weight tensor.

    Returns:
        ``(points, matrix)`` where ``matrix`` has shape
        ``(n_functionals, value_size, n_points)`` and
        ``l_i(v) = sum_{c,q} matrix[i, c, q] v_c(points[q])``.
    """
    points = np.vstack([f.points for f in functionals])
    vs = functionals[0].weights.shape[1]
    matrix = np.zeros((len(functionals), vs, len(points)))
    start = 0
    for i, f in enumerate(functionals):
        n = len(f.points)
        matrix[i, :, start : start + n] = f.weights.T
        start += n
    return points, matrix


def dual_matrix(functionals, span: PolynomialSet) -> np.ndarray:
    """``B[i, j] = l_i(member_j)``."""
    points, matrix = interpolation_data(functionals)
    vals = span.tabulate(points)  # (j, q, c)
    return np.einsum("icq,jqc->ij", matrix, vals)


def solve_basis(functionals, span: PolynomialSet) -> np.ndarray:
    """Invert the dual matrix; rows of the result are basis coefficients."""
    if len(functionals) != span.dim_space:
        raise DegenerateElement(
            f"{len(functionals)} functionals for a space of dimension {span.dim_space}"
        )
    B = dual_matrix(functionals, span)
    try:
        inv = np.linalg.inv(B)
    except np.linalg.LinAlgError as err:
        raise DegenerateElement("dual matrix is singular") from err
    cond = np.linalg.norm(B, 1) * np.linalg.norm(inv, 1)
    if not np.isfinite(cond) or cond > 1e13:
        raise DegenerateElement(f"dual matrix is singular (condition number {cond:.3g})")
    return inv.T


@functools.lru_cache(maxsize=None)
def _create(family: str, kind: CellKind, degree: int) -> FiniteElement:
    if family == "lagrange":
        span = scalar_span(kind, degree)
    elif family == "serendipity":
        span = serendipity_span(kind, degree)
    else:
        span = vector_span(family, kind, degree)
    functionals, spaces = _build_functionals(family, kind, degree, span)
    basis = solve_basis(functionals, span)
    entity_dofs: dict = {}
    for idx, f in enumerate(functionals):
        entity_dofs.setdefault(f.entity, []).append(idx)
    topo = make_topology(kind)
    ordered = {e: tuple(entity_dofs.get(e, [])) for e in _entity_list(topo)}
    basis.setflags(write=False)
    return FiniteElement(
        kind, family, degree, span.value_size, tuple(functionals), span, basis, ordered,
        SOBOLEV[family], spaces,
    )


def create_element(family: str, cell, degree: int) -> FiniteElement:
    """Construct a finite element.

    Args:
        family: ``lagrange``, ``raviart_thomas``, ``nedelec1`` or ``serendipity``.
        cell: Reference cell kind or name.
        degree: Element degree.

    Returns:
        The (cached, immutable) element.

    Raises:
        UnsupportedElement: For combinations outside the supported table.

    Example:
        >>> create_element("lagrange", "triangle", 3).entity_dofs[(1, 0)]
        (3, 4)
    """
    family = str(family).lower()
    if family not in FAMILIES:
        raise UnsupportedElement(f"unknown element family {family!r}")
    try:
        kind = cell_kind(cell)
    except InvalidArgument as err:
        raise UnsupportedElement(str(err)) from err
    _check_supported(family, kind, degree)
    return _create(family, kind, int(degree))


def tabulate(element: FiniteElement, points) -> np.ndarray:
    """Evaluate the basis functions.

    Args:
        element: The element.
        points: Reference points of shape ``(n_points, tdim)``.

    Returns:
        Array ``(n_dofs, n_points, value_size)``.
    """
    pts = as_points(element.cell, points)
    basis = tabulate_expansion(element.cell, element.span.degree, pts)
    c = element.expansion_coeffs.reshape(element.n_dofs, element.value_size, -1)
    return np.einsum("ice,ep->ipc", c, basis)


def moment_space(element: FiniteElement, dim: int, index: int) -> MomentSpace:
    """Weight space of the integral moments on a sub-entity.

    Raises:
        NoMoments: If the entity carries no integral moments.
    """
    topo = element.topology
    if not 0 <= dim <= topo.dim or not 0 <= index < topo.entity_counts[dim]:
        raise InvalidArgument(f"no entity ({dim}, {index}) on {element.cell}")
    try:
        return element.moment_spaces[(dim, index)]
    except KeyError:
        raise NoMoments(f"entity ({dim}, {index}) of {element!r} has no integral moments") from None


def expansion_dim(element: FiniteElement) -> int:
    """Size of the expansion basis underlying the element's span."""
    return expansion_size(element.cell, element.span.degree)


__all__ = [
    "FACE_TANGENTS",
    "FiniteElement",
    "Functional",
    "MomentSpace",
    "create_element",
    "dpc_weights",
    "dual_matrix",
    "lagrange_points",
    "lagrange_weights",
    "moment_space",
    "row_basis",
    "tabulate",
]
