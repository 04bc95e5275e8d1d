"""Meshes of (possibly mixed) cells, entity numbering and facet adjacency.

Mesh documents are JSON objects of the form::

    {"gdim": 2,
     "vertices": [[0.0, 0.0], [1.0, 0.0], ...],
     "cells": [{"kind": "triangle", "v": [0, 1, 2]}, ...]}

Polygon cells give their vertices in cyclic order; the kind may be
``"polygon"`` (size taken from ``v``) or ``"polygon(n)"``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from dofperm.errors import (
    InvalidArgument,
    InvalidMeshCell,
    MalformedMesh,
    NonManifoldMesh,
    NonMatchingFacet,
)
from dofperm.topology import CellKind, cell_kind, entity_cycles, make_topology, polygon

MESH_KINDS = ("interval", "triangle", "quadrilateral", "tetrahedron", "hexahedron", "prism",
              "polygon")


@dataclass(frozen=True, eq=False)
class Mesh:
    """An immutable mesh.

    Attributes:
        gdim: Geometric dimension.
        vertices: Vertex coordinates ``(n_vertices, gdim)``.
        cells: Tuple of ``(CellKind, vertex id tuple)``.
    """

    gdim: int
    vertices: np.ndarray
    cells: tuple[tuple[CellKind, tuple[int, ...]], ...]

    @property
    def tdim(self) -> int:
        """Topological dimension (0 for a mesh without cells)."""
        return self.cells[0][0].dim if self.cells else 0

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    def cell_coordinates(self, c: int) -> np.ndarray:
        return self.vertices[list(self.cells[c][1])]


def make_mesh(vertices, cells, gdim: int | None = None) -> Mesh:
    """Build and validate a mesh from Python data.

    Args:
        vertices: Coordinates, one row per vertex.
        cells: Iterable of ``(kind, vertex ids)``.
        gdim: Geometric dimension; inferred from ``vertices`` if omitted.
    """
    verts = np.asarray(vertices, dtype=float)
    if verts.size == 0:
        verts = verts.reshape(0, gdim or 0)
    if verts.ndim != 2:
        raise MalformedMesh("vertices must be a list of coordinate lists")
    if gdim is None:
        gdim = verts.shape[1]
    if verts.shape[1] != gdim:
        raise MalformedMesh(f"vertices have {verts.shape[1]} coordinates but gdim is {gdim}")
    out = []
    tdim = None
    for ci, (kind, ids) in enumerate(cells):
        ids = [int(v) for v in ids]
        if isinstance(kind, str) and kind.strip().lower() == "polygon":
            try:
                kind = polygon(len(ids))
            except InvalidArgument as err:
                raise InvalidMeshCell(f"cell {ci}: {err}") from None
        try:
            kind = cell_kind(kind)
        except InvalidArgument as err:
            raise MalformedMesh(f"cell {ci}: {err}") from None
        if kind.name not in MESH_KINDS:
            raise MalformedMesh(f"cell {ci}: kind {kind} cannot appear in a mesh")
        topo = make_topology(kind)
        if len(ids) != len(topo.vertices):
            raise InvalidMeshCell(
                f"cell {ci}: {kind} needs {len(topo.vertices)} vertices, got {len(ids)}"
            )
        if len(set(ids)) != len(ids):
            raise InvalidMeshCell(f"cell {ci}: repeated vertex in {ids}")
        for v in ids:
            if not 0 <= v < len(verts):
                raise InvalidMeshCell(f"cell {ci}: vertex {v} out of range 0..{len(verts) - 1}")
        if tdim is None:
            tdim = kind.dim
        elif kind.dim != tdim:
            raise MalformedMesh(f"cell {ci}: mixed topological dimensions {tdim} and {kind.dim}")
        if kind.dim > gdim:
            raise MalformedMesh(f"cell {ci}: {kind} cannot live in {gdim} dimensions")
        out.append((kind, tuple(ids)))
    verts.setflags(write=False)
    return Mesh(int(gdim), verts, tuple(out))


def load_mesh(text: str) -> Mesh:
    """Parse a JSON mesh document.

    Raises:
        MalformedMesh: For syntax errors or schema violations; the message
            names the offending field (and line for syntax errors).
        InvalidMeshCell: For bad vertex lists.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise MalformedMesh(f"invalid JSON at line {err.lineno}, column {err.colno}: {err.msg}")
    if not isinstance(doc, dict):
        raise MalformedMesh("mesh document must be a JSON object")
    for key in ("gdim", "vertices", "cells"):
        if key not in doc:
            raise MalformedMesh(f"missing field {key!r}")
    gdim = doc["gdim"]
    if not isinstance(gdim, int) or isinstance(gdim, bool) or not 1 <= gdim <= 3:
        raise MalformedMesh(f"field 'gdim' must be 1, 2 or 3, got {gdim!r}")
    verts = doc["vertices"]
    if not isinstance(verts, list):
        raise MalformedMesh("field 'vertices' must be a list")
    for i, v in enumerate(verts):
        if not isinstance(v, list) or len(v) != gdim or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
        ):
            raise MalformedMesh(f"vertices[{i}] must be a list of {gdim} numbers")
    cells = doc["cells"]
    if not isinstance(cells, list):
        raise MalformedMesh("field 'cells' must be a list")
    parsed = []
    for i, c in enumerate(cells):
        if not isinstance(c, dict) or "kind" not in c or "v" not in c:
            raise MalformedMesh(f"cells[{i}] must be an object with 'kind' and 'v'")
        if not isinstance(c["kind"], str):
            raise MalformedMesh(f"cells[{i}].kind must be a string")
        if not isinstance(c["v"], list) or not all(
            isinstance(x, int) and not isinstance(x, bool) for x in c["v"]
        ):
            raise MalformedMesh(f"cells[{i}].v must be a list of integers")
        parsed.append((c["kind"], c["v"]))
    return make_mesh(np.array(verts, dtype=float).reshape(len(verts), gdim), parsed, gdim)


def mesh_to_dict(mesh: Mesh) -> dict:
    """Inverse of :func:`load_mesh` (as a Python object)."""
    return {
        "gdim": mesh.gdim,
        "vertices": mesh.vertices.tolist(),
        "cells": [{"kind": str(k), "v": list(v)} for k, v in mesh.cells],
    }


@dataclass(frozen=True, eq=False)
class EntityMap:
    """Global numbering of the entities of one dimension.

    Attributes:
        dim: Entity dimension.
        index: Map from sorted global vertex tuple to global entity index.
        cell_entities: For each cell, the global index of each local entity.
        keys: Sorted vertex tuple of each global entity, by index.
    """

    dim: int
    index: dict
    cell_entities: tuple[tuple[int, ...], ...]
    keys: tuple[tuple[int, ...], ...]

    @property
    def n_entities(self) -> int:
        return len(self.keys)


def cell_entity_vertices(kind: CellKind, ids, dim: int) -> list[tuple[int, ...]]:
    """Global vertex lists (in local entity order) of a cell's entities."""
    topo = make_topology(kind)
    return [tuple(ids[v] for v in ent) for ent in entity_cycles(topo, dim)]


def _check_facet_shapes(mesh: Mesh) -> None:
    tdim = mesh.tdim
    if tdim < 2:
        return
    fdim = tdim - 1
    keys: dict[frozenset, int] = {}
    for kind, ids in mesh.cells:
        for ent in cell_entity_vertices(kind, ids, fdim):
            keys[frozenset(ent)] = len(ent)
    # A facet is inconsistent if its vertex set strictly contains another
    # facet's vertex set (e.g. a triangle face glued into a quad face).
    big = [k for k, n in keys.items() if n > (2 if fdim == 1 else 3)]
    for k in big:
        for sub in itertools.combinations(sorted(k), 2 if fdim == 1 else 3):
            if frozenset(sub) in keys:
                raise NonMatchingFacet(
                    f"facet {sorted(sub)} lies inside the larger facet {sorted(k)}"
                )


def number_entities(mesh: Mesh, dim: int) -> EntityMap:
    """Assign global indices to the entities of one dimension.

    Entities are identified by their sorted global vertex tuples and are
    numbered in order of first encounter while sweeping the cells.

    Raises:
        NonMatchingFacet: If neighbouring cells disagree on the shape of
            a shared facet.
    """
    if mesh.n_cells and not 0 <= dim <= mesh.tdim:
        raise InvalidArgument(f"entity dimension {dim} outside 0..{mesh.tdim}")
    if dim == mesh.tdim - 1:
        _check_facet_shapes(mesh)
    if mesh.n_cells and dim == mesh.tdim:
        # Cells are their own top-dimensional entities.
        keys = tuple(tuple(sorted(ids)) for _, ids in mesh.cells)
        return EntityMap(dim, {k: i for i, k in enumerate(keys)},
                         tuple((c,) for c in range(mesh.n_cells)), keys)
    index: dict = {}
    per_cell = []
    for kind, ids in mesh.cells:
        local = []
        for ent in cell_entity_vertices(kind, ids, dim):
            key = tuple(sorted(ent))
            if key not in index:
                index[key] = len(index)
            local.append(index[key])
        per_cell.append(tuple(local))
    keys = tuple(sorted(index, key=index.get))
    return EntityMap(dim, index, tuple(per_cell), keys)


@dataclass(frozen=True)
class FacetPair:
    """Cells on either side of a facet.

    ``cell_b`` and ``facet_b`` are ``None`` for boundary facets.
    """

    facet: int
    cell_a: int
    facet_a: int
    cell_b: int | None = None
    facet_b: int | None = None

    @property
    def is_boundary(self) -> bool:
        return self.cell_b is None


def facet_pairs(mesh: Mesh) -> list[FacetPair]:
    """Pair up the cells sharing each facet.

    Returns:
        One :class:`FacetPair` per facet, ordered by global facet index.

    Raises:
        NonManifoldMesh: If a facet is shared by three or more cells.
    """
    if not mesh.n_cells:
        return []
    fdim = mesh.tdim - 1
    emap = number_entities(mesh, fdim)
    sides: list[list[tuple[int, int]]] = [[] for _ in range(emap.n_entities)]
    for c, local in enumerate(emap.cell_entities):
        for lf, g in enumerate(local):
            sides[g].append((c, lf))
    out = []
    for g, s in enumerate(sides):
        if len(s) > 2:
            raise NonManifoldMesh(f"facet {list(emap.keys[g])} is shared by {len(s)} cells")
        if len(s) == 1:
            out.append(FacetPair(g, s[0][0], s[0][1]))
        else:
            out.append(FacetPair(g, s[0][0], s[0][1], s[1][0], s[1][1]))
    return out
