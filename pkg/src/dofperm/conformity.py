"""Inter-cell continuity checks.

For every interior facet the check samples points on the facet, locates
them in the reference coordinates of both neighbouring cells (using each
side's orientation), evaluates all basis functions there, applies the
cells' DOF transformations and the Piola maps, and compares the
continuous part of the trace of every global basis function.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from dofperm.dofmap import build_dofmap
from dofperm.element import FiniteElement, tabulate
from dofperm.errors import DegenerateCell, InvalidArgument, NonMatchingFacet
from dofperm.mesh import Mesh, facet_pairs
from dofperm.orientation import compute_orientation, low_to_high_cycle
from dofperm.polyset import PointSet
from dofperm.topology import (
    CellKind,
    cell_kind,
    entity_cycles,
    entity_frame,
    make_topology,
    sub_entity_kind,
)
from dofperm.transform import cell_applier, compute_base_transformations, entity_self_map

SCALAR_TOLERANCE = 1e-10
VECTOR_TOLERANCE = 1e-9


def _vertex_basis(kind: CellKind, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Linear/multilinear vertex shape functions and their gradients.

    Returns:
        ``(N, dN)`` of shapes ``(n_vertices, n_points)`` and
        ``(n_vertices, n_points, tdim)``.
    """
    n = len(pts)
    name = kind.name
    if name in ("interval", "triangle", "tetrahedron"):
        d = kind.dim
        N = np.vstack([1.0 - pts.sum(axis=1), pts.T])
        grad = np.vstack([-np.ones((1, d)), np.eye(d)])
        return N, np.broadcast_to(grad[:, None, :], (d + 1, n, d)).copy()
    if name in ("quadrilateral", "hexahedron"):
        d = kind.dim
        nv = 2**d
        N = np.ones((nv, n))
        dN = np.ones((nv, n, d))
        for v in range(nv):
            for k in range(d):
                bit = (v >> k) & 1
                f = pts[:, k] if bit else 1.0 - pts[:, k]
                df = 1.0 if bit else -1.0
                N[v] *= f
                for j in range(d):
                    dN[v, :, j] *= df if j == k else f
        return N, dN
    if name == "prism":
        tri, dtri = _vertex_basis(CellKind("triangle"), pts[:, :2])
        z = pts[:, 2]
        N = np.vstack([tri * (1 - z), tri * z])
        dN = np.zeros((6, n, 3))
        dN[:3, :, :2] = dtri * (1 - z)[None, :, None]
        dN[3:, :, :2] = dtri * z[None, :, None]
        dN[:3, :, 2] = -tri
        dN[3:, :, 2] = tri
        return N, dN
    raise InvalidArgument(f"no geometry map for {kind} cells")


@dataclass(frozen=True, eq=False)
class GeometryMap:
    """Vertex-interpolated map from a reference cell to a physical cell.

    Affine on simplices, multilinear on quadrilaterals and hexahedra, and
    linear times linear on prisms.

    Attributes:
        kind: Cell kind.
        coords: Physical vertex coordinates ``(n_vertices, gdim)``.
    """

    kind: CellKind
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "kind", cell_kind(self.kind))
        object.__setattr__(self, "coords", np.asarray(self.coords, dtype=float))

    def __call__(self, points) -> np.ndarray:
        """Physical images of reference points, ``(n_points, gdim)``."""
        N, _ = _vertex_basis(self.kind, np.asarray(points, dtype=float))
        return N.T @ self.coords

    def jacobian(self, points) -> np.ndarray:
        """Jacobians ``(n_points, gdim, tdim)``."""
        _, dN = _vertex_basis(self.kind, np.asarray(points, dtype=float))
        return np.einsum("vg,vpt->pgt", self.coords, dN)


def _measure(J: np.ndarray) -> np.ndarray:
    if J.shape[1] == J.shape[2]:
        return np.linalg.det(J)
    return np.sqrt(np.linalg.det(np.einsum("pgt,pgs->pts", J, J)))


def push_forward(sobolev: str, values: np.ndarray, geometry: GeometryMap, points) -> np.ndarray:
    """Map reference basis values to a physical cell.

    Args:
        sobolev: ``H1`` (identity), ``Hdiv`` (``J v / det J``) or ``Hcurl``
            (``J^{-T} v``).
        values: Reference values ``(n_functions, n_points, value_size)``.
        geometry: The cell's geometry map.
        points: The reference points the values belong to.

    Returns:
        Physical values; vector maps return ``gdim`` components.

    Raises:
        DegenerateCell: If the Jacobian is singular at a point.
    """
    values = np.asarray(values, dtype=float)
    J = geometry.jacobian(points)
    det = _measure(J)
    scale = max(1.0, float(np.max(np.abs(J)))) ** J.shape[2]
    if np.any(np.abs(det) <= 1e-13 * scale):
        raise DegenerateCell(f"singular Jacobian on the {geometry.kind} cell")
    if sobolev == "H1":
        return values
    if J.shape[1] != J.shape[2]:
        raise InvalidArgument("vector valued maps need gdim equal to the cell dimension")
    if sobolev == "Hdiv":
        return np.einsum("pgt,fpt->fpg", J, values) / det[None, :, None]
    if sobolev == "Hcurl":
        Jinv = np.linalg.inv(J)
        return np.einsum("ptg,fpt->fpg", Jinv, values)
    raise InvalidArgument(f"unknown Sobolev class {sobolev!r}")


def permute_facet_points(facet_kind, points, rotations: int, reflected: bool) -> np.ndarray:
    """Map points given in the low-to-high facet frame to a cell's facet frame.

    This applies the inverse of the entity self-map ``R**r S**f`` used by
    the DOF transformations: ``r`` inverse rotations followed by the
    reflection. For a quadrilateral one inverse rotation is
    ``(t, s) -> (s, 1 - t)``; for an interval the reflection is ``t -> 1 - t``.

    Raises:
        InvalidArgument: If a point lies outside the reference facet.
    """
    kind = cell_kind(facet_kind)
    pts = PointSet.on(kind, points).coords
    n = 2 if kind.dim == 1 else len(make_topology(kind).vertices)
    if not 0 <= rotations < n:
        raise InvalidArgument(f"rotation count {rotations} out of range for {kind}")
    A, b = entity_self_map(kind, int(rotations), bool(reflected))
    return (pts - b) @ np.linalg.inv(A).T


def facet_sample_points(kind, n: int, margin: float = 0.1, seed: int = 0) -> np.ndarray:
    """Deterministic points strictly inside a reference facet.

    Barycentric (or tensor) coordinates stay at least ``margin`` away
    from the facet boundary.
    """
    kind = cell_kind(kind)
    rng = np.random.default_rng(seed)
    if kind.name == "interval":
        return np.linspace(margin, 1 - margin, n)[:, None]
    if kind.name == "triangle":
        lam = rng.dirichlet(np.ones(3), size=n)
        lam = margin + (1 - 3 * margin) * lam
        return lam[:, 1:]
    if kind.name == "quadrilateral":
        return margin + (1 - 2 * margin) * rng.random((n, 2))
    raise InvalidArgument(f"cannot sample points on a {kind} facet")


@dataclass
class FacetJump:
    facet: int
    vertices: tuple[int, ...]
    cells: tuple[int, int]
    max_jump: float


@dataclass
class ContinuityReport:
    """Outcome of a continuity check.

    Attributes:
        facets: Per interior facet maximum jump.
        n_points: Sample points per facet.
        tolerance: Pass threshold.
        transformed: Whether DOF transformations were applied.
    """

    facets: list[FacetJump] = field(default_factory=list)
    n_points: int = 6
    tolerance: float = SCALAR_TOLERANCE
    transformed: bool = True

    @property
    def max_jump(self) -> float:
        return max((f.max_jump for f in self.facets), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_jump <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_jump": self.max_jump,
            "tolerance": self.tolerance,
            "n_points": self.n_points,
            "transformed": self.transformed,
            "facets": [
                {
                    "facet": f.facet,
                    "vertices": list(f.vertices),
                    "cells": list(f.cells),
                    "max_jump": f.max_jump,
                }
                for f in self.facets
            ],
        }


def _facet_normal(coords: np.ndarray, cycle, gdim: int) -> np.ndarray:
    p = coords[list(cycle)]
    if len(cycle) == 2:
        t = p[1] - p[0]
        if gdim != 2:
            raise InvalidArgument("edge normals need a 2D mesh")
        n = np.array([-t[1], t[0]])
    else:
        n = np.cross(p[1] - p[0], p[-1] - p[0])
    return n / np.linalg.norm(n)


def _trace(sobolev: str, vals: np.ndarray, normal: np.ndarray) -> np.ndarray:
    if sobolev == "H1":
        return vals
    vn = vals @ normal
    if sobolev == "Hdiv":
        return vn[..., None]
    return vals - vn[..., None] * normal


def check_continuity(mesh: Mesh, elements, n_points: int = 6, tol: float | None = None,
                     transform: bool = True) -> ContinuityReport:
    """Check trace continuity of all global basis functions across facets.

    Args:
        mesh: The mesh.
        elements: Map from cell kind to element, or a single element.
        n_points: Sample points per facet.
        tol: Pass threshold; defaults to 1e-10 for scalar and 1e-9 for
            vector elements.
        transform: Apply DOF transformations (and permutation folding).
            ``False`` gives the untransformed negative control.

    Returns:
        A :class:`ContinuityReport`.
    """
    if isinstance(elements, FiniteElement):
        elements = {elements.cell: elements}
    if tol is None:
        vector = any(el.value_size > 1 for el in elements.values())
        tol = VECTOR_TOLERANCE if vector else SCALAR_TOLERANCE
    report = ContinuityReport(n_points=n_points, tolerance=tol, transformed=transform)
    if not mesh.n_cells:
        return report
    dm = build_dofmap(mesh, elements, fold=transform)
    tdim = mesh.tdim
    fdim = tdim - 1
    orientations = {}
    appliers = {}
    for pair in facet_pairs(mesh):
        if pair.is_boundary:
            continue
        sides = []
        for c, lf in ((pair.cell_a, pair.facet_a), (pair.cell_b, pair.facet_b)):
            kind, ids = mesh.cells[c]
            topo = make_topology(kind)
            el = dm.cell_elements[c]
            if c not in orientations:
                orientations[c] = compute_orientation(topo, ids)
            o = orientations[c]
            fkind = sub_entity_kind(topo, fdim, lf)
            cycle = entity_cycles(topo, fdim)[lf]
            global_cycle = [ids[v] for v in cycle]
            if fdim == 0:
                # Point facets (interval meshes) carry no orientation.
                ref_cycle = global_cycle
                X = topo.vertices[list(cycle)]
            else:
                if fdim == 1:
                    r, f = 0, bool(o.edge_reflected[lf])
                    ref_cycle = sorted(global_cycle)
                else:
                    r, f = o.face_rotations[lf], bool(o.face_reflected[lf])
                    ref_cycle = low_to_high_cycle(global_cycle)
                eta = facet_sample_points(fkind, n_points, seed=pair.facet)
                xi = permute_facet_points(fkind, eta, r, f)
                origin, axes = entity_frame(topo, fdim, lf)
                X = origin + xi @ axes.T
            geo = GeometryMap(kind, mesh.cell_coordinates(c))
            vals = tabulate(el, X)
            if transform and not dm.folded_cells[c] and tdim >= 2:
                if c not in appliers:
                    appliers[c] = cell_applier(compute_base_transformations(el), o)
                appliers[c].apply_rows(vals)
            vals = push_forward(el.sobolev, vals, geo, X)
            sides.append((c, el, geo(X), vals, ref_cycle))
        (ca, ela, xa, va, cyc), (cb, elb, xb, vb, _) = sides
        scale = max(1.0, float(np.max(np.abs(xa))))
        if np.max(np.abs(xa - xb)) > 1e-9 * scale:
            raise NonMatchingFacet(
                f"cells {ca} and {cb} do not agree on the geometry of facet {pair.facet}"
            )
        normal = _facet_normal(mesh.vertices, cyc, mesh.gdim) if ela.sobolev != "H1" else None
        ta = _trace(ela.sobolev, va, normal)
        tb = _trace(elb.sobolev, vb, normal)
        acc: dict[int, np.ndarray] = {}
        for dofs, tr, sign in ((dm.cell_dofs[ca], ta, 1.0), (dm.cell_dofs[cb], tb, -1.0)):
            for k, g in enumerate(dofs):
                acc[int(g)] = acc.get(int(g), 0.0) + sign * tr[k]
        jump = max(float(np.max(np.abs(v))) for v in acc.values())
        key = tuple(sorted(mesh.cells[ca][1][v] for v in entity_cycles(
            make_topology(mesh.cells[ca][0]), fdim)[pair.facet_a]))
        report.facets.append(FacetJump(pair.facet, key, (ca, cb), jump))
    return report
