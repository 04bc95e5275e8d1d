"""Reference cells and their sub-entity numbering.

Simplices number their sub-entities by the vertices they do *not*
contain (the UFC convention), while tensor-product and polygonal cells
sort sub-entities lexicographically by their incident vertices. Faces of
3D cells are stored as vertex cycles that start at the lowest local
vertex and walk towards its lower-numbered neighbour; this fixes the
unrotated, unreflected state that every transformation is measured
against.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np

from dofperm.errors import InvalidArgument

_FIXED_KINDS = (
    "point",
    "interval",
    "triangle",
    "quadrilateral",
    "tetrahedron",
    "hexahedron",
    "prism",
)

_DIMENSIONS = {
    "point": 0,
    "interval": 1,
    "triangle": 2,
    "quadrilateral": 2,
    "polygon": 2,
    "tetrahedron": 3,
    "hexahedron": 3,
    "prism": 3,
}


@dataclass(frozen=True)
class CellKind:
    """Tag identifying a reference cell.

    Use :func:`cell_kind` or :func:`polygon` to build instances; they
    normalise ``polygon(3)`` and ``polygon(4)`` to the triangle and the
    quadrilateral.

    Attributes:
        name: One of the fixed cell names or ``"polygon"``.
        n: Vertex count for polygons, ``None`` otherwise.
    """

    name: str
    n: int | None = None

    def __str__(self) -> str:
        if self.name == "polygon":
            return f"polygon({self.n})"
        return self.name

    @property
    def dim(self) -> int:
        """Topological dimension of the cell."""
        return _DIMENSIONS[self.name]

    @property
    def is_simplex(self) -> bool:
        return self.name in ("point", "interval", "triangle", "tetrahedron")


def polygon(n: int) -> CellKind:
    """Return the kind of a reference n-gon.

    Args:
        n: Number of vertices, at least 3.

    Returns:
        ``triangle`` for 3, ``quadrilateral`` for 4, otherwise a polygon tag.
    """
    if not isinstance(n, (int, np.integer)) or n < 3:
        raise InvalidArgument(f"a polygon needs at least 3 vertices, got {n!r}")
    if n == 3:
        return CellKind("triangle")
    if n == 4:
        return CellKind("quadrilateral")
    return CellKind("polygon", int(n))


def cell_kind(value: CellKind | str, n: int | None = None) -> CellKind:
    """Normalise a cell description to a :class:`CellKind`.

    Accepts an existing kind, a plain name, ``"polygon"`` together with
    ``n``, or the string form ``"polygon(n)"``.
    """
    if isinstance(value, CellKind):
        if value.name == "polygon":
            return polygon(value.n)
        return value
    if not isinstance(value, str):
        raise InvalidArgument(f"cannot interpret {value!r} as a cell kind")
    name = value.strip().lower()
    if name.startswith("polygon"):
        rest = name[len("polygon"):]
        if rest:
            if not (rest.startswith("(") and rest.endswith(")")):
                raise InvalidArgument(f"cannot parse cell kind {value!r}")
            try:
                n = int(rest[1:-1])
            except ValueError as err:
                raise InvalidArgument(f"cannot parse cell kind {value!r}") from err
        if n is None:
            raise InvalidArgument("polygon requires a vertex count")
        return polygon(n)
    if name not in _FIXED_KINDS:
        raise InvalidArgument(f"unknown cell kind {value!r}")
    return CellKind(name)


@dataclass(frozen=True)
class CellTopology:
    """Combinatorial and geometric description of a reference cell.

    Attributes:
        kind: The cell kind.
        dim: Topological dimension.
        vertices: Reference coordinates, one row per vertex.
        edges: Vertex pairs in reference direction.
        faces: Vertex cycles of the 2D sub-entities of a 3D cell.
        entity_counts: Number of entities of each dimension.
    """

    kind: CellKind
    dim: int
    vertices: np.ndarray
    edges: tuple[tuple[int, int], ...]
    faces: tuple[tuple[int, ...], ...]
    entity_counts: tuple[int, ...]

    @property
    def cycle(self) -> tuple[int, ...]:
        """Boundary cycle of a 2D cell (cell vertices in cyclic order)."""
        if self.dim != 2:
            raise InvalidArgument("only 2D cells have a boundary cycle")
        return _cycle_2d(self.kind)


def _cycle_2d(kind: CellKind) -> tuple[int, ...]:
    if kind.name == "triangle":
        return (0, 1, 2)
    if kind.name == "quadrilateral":
        return (0, 1, 3, 2)
    return tuple(range(kind.n))


def _polygon_vertices(n: int) -> np.ndarray:
    angles = 2.0 * np.pi * np.arange(n) / n - np.pi / 2.0
    return 0.5 + 0.5 * np.column_stack([np.cos(angles), np.sin(angles)])


def _build(kind: CellKind) -> CellTopology:
    name = kind.name
    faces: tuple = ()
    if name == "point":
        verts = np.zeros((1, 0))
        edges: tuple = ()
    elif name == "interval":
        verts = np.array([[0.0], [1.0]])
        edges = ((0, 1),)
    elif name == "triangle":
        verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        edges = ((1, 2), (0, 2), (0, 1))
    elif name == "quadrilateral":
        verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        edges = ((0, 1), (0, 2), (1, 3), (2, 3))
    elif name == "polygon":
        n = kind.n
        verts = _polygon_vertices(n)
        edges = tuple(sorted((min(i, (i + 1) % n), max(i, (i + 1) % n)) for i in range(n)))
    elif name == "tetrahedron":
        verts = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])
        edges = ((2, 3), (1, 3), (1, 2), (0, 3), (0, 2), (0, 1))
        faces = ((1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2))
    elif name == "hexahedron":
        verts = np.array([[i & 1, (i >> 1) & 1, (i >> 2) & 1] for i in range(8)], dtype=float)
        edges = (
            (0, 1), (0, 2), (0, 4), (1, 3), (1, 5), (2, 3),
            (2, 6), (3, 7), (4, 5), (4, 6), (5, 7), (6, 7),
        )
        faces = (
            (0, 1, 3, 2), (0, 1, 5, 4), (0, 2, 6, 4),
            (1, 3, 7, 5), (2, 3, 7, 6), (4, 5, 7, 6),
        )
    elif name == "prism":
        verts = np.array(
            [[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [0, 1, 1]]
        )
        edges = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 4), (2, 5), (3, 4), (3, 5), (4, 5))
        faces = ((0, 1, 2), (0, 1, 4, 3), (0, 2, 5, 3), (1, 2, 5, 4), (3, 4, 5))
    else:  # pragma: no cover - guarded by cell_kind
        raise InvalidArgument(f"unsupported cell kind {kind}")
    verts = np.asarray(verts, dtype=float)
    verts.setflags(write=False)
    dim = kind.dim
    counts = [len(verts), len(edges), len(faces), 1][: dim + 1]
    if dim >= 1:
        counts[dim] = 1
    return CellTopology(kind, dim, verts, edges, faces, tuple(counts))


@functools.lru_cache(maxsize=None)
def _make_cached(kind: CellKind) -> CellTopology:
    return _build(kind)


def make_topology(kind: CellKind | str) -> CellTopology:
    """Build the canonical topology of a reference cell.

    Args:
        kind: Cell kind or name.

    Returns:
        The shared, immutable topology of that cell.

    Example:
        >>> make_topology("triangle").edges
        ((1, 2), (0, 2), (0, 1))
    """
    return _make_cached(cell_kind(kind))


def sub_entity_vertices(topo: CellTopology, dim: int, index: int) -> list[int]:
    """Local vertices of a sub-entity, in stored order.

    Faces come back as their reference cycle.
    """
    if not 0 <= dim <= topo.dim:
        raise InvalidArgument(f"entity dimension {dim} outside 0..{topo.dim}")
    if not 0 <= index < topo.entity_counts[dim]:
        raise InvalidArgument(
            f"entity index {index} outside 0..{topo.entity_counts[dim] - 1} for dim {dim}"
        )
    if dim == topo.dim:
        return list(range(len(topo.vertices)))
    if dim == 0:
        return [index]
    if dim == 1:
        return list(topo.edges[index])
    return list(topo.faces[index])


def sub_entity_kind(topo: CellTopology, dim: int, index: int) -> CellKind:
    """Kind of a sub-entity."""
    if dim == topo.dim:
        return topo.kind
    nv = len(sub_entity_vertices(topo, dim, index))
    if dim == 0:
        return CellKind("point")
    if dim == 1:
        return CellKind("interval")
    return polygon(nv)


def cycle_to_reference_order(cycle) -> list[int]:
    """Reorder a 2D vertex cycle into the vertex order of its reference cell.

    Triangles and polygons keep the cycle; a quadrilateral cycle
    ``[a, b, c, d]`` becomes the tensor order ``[a, b, d, c]``.
    """
    cycle = list(cycle)
    if len(cycle) == 4:
        return [cycle[0], cycle[1], cycle[3], cycle[2]]
    return cycle


def entity_reference_vertices(topo: CellTopology, dim: int, index: int) -> list[int]:
    """Local vertices of a sub-entity in the order of its own reference cell."""
    verts = sub_entity_vertices(topo, dim, index)
    if dim == 2 and dim < topo.dim:
        return cycle_to_reference_order(verts)
    return verts


def entity_frame(topo: CellTopology, dim: int, index: int) -> tuple[np.ndarray, np.ndarray]:
    """Affine parametrisation of a sub-entity by its reference cell.

    Returns:
        ``(origin, axes)`` with ``axes`` of shape ``(topo.dim, dim)`` so that
        reference point ``xi`` of the entity sits at ``origin + axes @ xi``.
    """
    if dim == topo.dim:
        return np.zeros(topo.dim), np.eye(topo.dim)
    verts = entity_reference_vertices(topo, dim, index)
    origin = topo.vertices[verts[0]]
    axes = np.column_stack([topo.vertices[v] - origin for v in verts[1 : dim + 1]])
    return origin.copy(), axes.reshape(topo.dim, dim)


def entity_cycles(topo: CellTopology, dim: int) -> list[tuple[int, ...]]:
    """Vertex lists of all entities of one dimension (faces as cycles)."""
    if dim == 0:
        return [(i,) for i in range(len(topo.vertices))]
    if dim == topo.dim:
        return [tuple(range(len(topo.vertices)))]
    if dim == 1:
        return list(topo.edges)
    return list(topo.faces)


@functools.lru_cache(maxsize=None)
def _symmetry_group_cached(kind: CellKind) -> np.ndarray:
    topo = make_topology(kind)
    nv = len(topo.vertices)
    edges = {frozenset(e) for e in topo.edges}
    faces = {frozenset(f) for f in topo.faces}
    if topo.dim == 2:
        faces = {frozenset(range(nv))}
    group = []
    for perm in itertools.permutations(range(nv)):
        if any(frozenset((perm[a], perm[b])) not in edges for a, b in topo.edges):
            continue
        if any(frozenset(perm[v] for v in f) not in faces for f in faces):
            continue
        group.append(perm)
    out = np.array(group, dtype=np.int64)
    out.setflags(write=False)
    return out


def symmetry_group(kind: CellKind | str) -> np.ndarray:
    """Vertex permutations realised by rotations and reflections of a cell.

    Returns:
        Integer array of shape ``(order, n_vertices)``; row ``p`` maps local
        vertex ``i`` to ``p[i]``.
    """
    return _symmetry_group_cached(cell_kind(kind))


def _cofacial_pairs(topo: CellTopology) -> list[tuple[int, int]]:
    # Every pair of vertices that lies on a common 2D entity. The relative
    # order of such a pair affects either an edge direction or the
    # rotation/reflection state of the face holding it.
    cycles = [topo.cycle] if topo.dim == 2 else list(topo.faces)
    pairs = {tuple(e) for e in topo.edges}
    for cyc in cycles:
        for a, b in itertools.combinations(sorted(cyc), 2):
            pairs.add((a, b))
    return sorted(pairs)


def count_reference_orderings(kind: CellKind | str) -> int:
    """Count the distinct reference cells that arbitrary vertex numbering produces.

    Every labelling of the cell's vertices by distinct integers induces a
    low-to-high direction on each pair of vertices sharing a face. Two
    labellings need different reference cells unless a rotation or
    reflection of the cell carries one direction pattern onto the other.

    Args:
        kind: One of triangle, quadrilateral, tetrahedron, hexahedron.

    Returns:
        The number of symmetry classes of direction patterns.
    """
    kind = cell_kind(kind)
    if kind.name not in ("triangle", "quadrilateral", "tetrahedron", "hexahedron"):
        raise InvalidArgument(f"reference enumeration is not defined for {kind}")
    topo = make_topology(kind)
    nv = len(topo.vertices)
    pairs = np.array(_cofacial_pairs(topo))
    labels = np.array(list(itertools.permutations(range(nv))), dtype=np.int8)
    weights = (1 << np.arange(len(pairs), dtype=np.int64))
    best = np.full(len(labels), np.iinfo(np.int64).max, dtype=np.int64)
    for perm in symmetry_group(kind):
        inverse = np.argsort(perm)
        moved = labels[:, inverse]
        bits = moved[:, pairs[:, 0]] < moved[:, pairs[:, 1]]
        np.minimum(best, bits.astype(np.int64) @ weights, out=best)
    return int(len(np.unique(best)))


def face_rotation_bits(n: int) -> int:
    """Width of the rotation field of an n-gon face in packed orientations."""
    return max(1, math.ceil(math.log2(n)))
