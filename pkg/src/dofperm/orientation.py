"""Cell orientation data derived from global vertex numbers.

An edge is reflected when its global vertex numbers decrease along the
reference direction. A face of a 3D cell is described by a rotation
count ``r`` and a reflection flag ``f``: the reference face parametrised
through the cell equals the low-to-high face parametrisation composed
with ``rotation**r . reflection**f``, where the rotation advances the
face cycle by one position and the reflection reverses it around the
first vertex.

Packed layout (low to high bits): one bit per edge, then for each face a
reflection bit followed by the rotation field (two bits for triangles
and quadrilaterals, ``ceil(log2 n)`` bits for an n-gon face).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from dofperm.errors import InvalidArgument, InvalidEncoding, InvalidMeshCell
from dofperm.topology import CellKind, CellTopology, cell_kind, face_rotation_bits, make_topology


@dataclass(frozen=True)
class OrientationInfo:
    """Per-cell orientation record.

    Attributes:
        kind: Cell kind.
        edge_reflected: One flag per edge.
        face_rotations: Rotation count per face of a 3D cell.
        face_reflected: Reflection flag per face of a 3D cell.
    """

    kind: CellKind
    edge_reflected: tuple[bool, ...]
    face_rotations: tuple[int, ...] = ()
    face_reflected: tuple[bool, ...] = ()

    @property
    def packed(self) -> int:
        return pack(self)

    def is_identity(self) -> bool:
        return not any(self.edge_reflected) and not any(self.face_reflected) and not any(
            self.face_rotations
        )

    def to_dict(self) -> dict:
        return {
            "kind": str(self.kind),
            "edge_reflected": [bool(b) for b in self.edge_reflected],
            "face_rotations": [int(r) for r in self.face_rotations],
            "face_reflected": [bool(b) for b in self.face_reflected],
            "packed": self.packed,
        }


def identity_orientation(kind) -> OrientationInfo:
    """Orientation with no entity reflected or rotated."""
    topo = make_topology(kind)
    nf = len(topo.faces)
    return OrientationInfo(topo.kind, (False,) * len(topo.edges), (0,) * nf, (False,) * nf)


def face_orientation(global_ids) -> tuple[int, bool]:
    """Rotation count and reflection flag of one face.

    Args:
        global_ids: Global vertex numbers in the face's reference cycle order.

    Returns:
        ``(r, f)`` such that cycle position ``i`` of the cell face lands at
        position ``(-1)**f * i + r`` (mod m) of the low-to-high cycle.
    """
    ids = list(global_ids)
    m = len(ids)
    c = int(np.argmin(ids))
    reflected = ids[(c + 1) % m] > ids[(c - 1) % m]
    rotations = (c if reflected else -c) % m
    return rotations, bool(reflected)


def low_to_high_cycle(global_ids) -> list:
    """The face cycle starting at its smallest id, heading to the smaller neighbour."""
    ids = list(global_ids)
    m = len(ids)
    c = int(np.argmin(ids))
    step = 1 if ids[(c + 1) % m] < ids[(c - 1) % m] else -1
    return [ids[(c + step * i) % m] for i in range(m)]


def cycle_position_map(m: int, rotations: int, reflected: bool) -> list[int]:
    """Position map ``i -> (-1)**f * i + r`` of a face self-map."""
    sign = -1 if reflected else 1
    return [(sign * i + rotations) % m for i in range(m)]


def compute_orientation(topo: CellTopology, global_vertices) -> OrientationInfo:
    """Orientation of a cell from the global numbers of its vertices.

    Args:
        topo: Reference topology of the cell.
        global_vertices: Global vertex id of each local vertex.

    Returns:
        The cell's :class:`OrientationInfo`.

    Raises:
        InvalidMeshCell: On a wrong vertex count or repeated ids.

    Example:
        >>> o = compute_orientation(make_topology("triangle"), [4, 1, 2])
        >>> o.edge_reflected
        (False, True, True)
    """
    gv = [int(v) for v in global_vertices]
    if len(gv) != len(topo.vertices):
        raise InvalidMeshCell(
            f"{topo.kind} needs {len(topo.vertices)} vertices, got {len(gv)}"
        )
    if len(set(gv)) != len(gv):
        raise InvalidMeshCell(f"repeated global vertex ids in {gv}")
    edges = tuple(gv[a] > gv[b] for a, b in topo.edges)
    rots, refl = [], []
    for face in topo.faces:
        r, f = face_orientation([gv[v] for v in face])
        rots.append(r)
        refl.append(f)
    return OrientationInfo(topo.kind, edges, tuple(rots), tuple(refl))


@functools.lru_cache(maxsize=None)
def _layout(kind: CellKind) -> tuple[tuple[int, ...], int]:
    topo = make_topology(kind)
    widths = tuple(face_rotation_bits(len(f)) for f in topo.faces)
    return widths, len(topo.edges) + sum(1 + w for w in widths)


def packed_width(kind) -> int:
    """Number of bits used by the packed orientation of a cell kind."""
    return _layout(cell_kind(kind))[1]


def pack(o: OrientationInfo) -> int:
    """Encode an orientation as an unsigned integer."""
    widths, _ = _layout(o.kind)
    topo = make_topology(o.kind)
    if len(o.edge_reflected) != len(topo.edges) or len(o.face_rotations) != len(widths):
        raise InvalidArgument("orientation does not match its cell kind")
    bits = 0
    shift = 0
    for flag in o.edge_reflected:
        bits |= int(bool(flag)) << shift
        shift += 1
    for face, width, r, f in zip(topo.faces, widths, o.face_rotations, o.face_reflected):
        if not 0 <= r < len(face):
            raise InvalidArgument(f"rotation {r} out of range for a {len(face)}-gon face")
        bits |= int(bool(f)) << shift
        shift += 1
        bits |= int(r) << shift
        shift += width
    return bits


def unpack(kind, bits: int) -> OrientationInfo:
    """Decode a packed orientation.

    Raises:
        InvalidEncoding: If bits outside the layout are set or a rotation
            field holds a value not smaller than the face vertex count.
    """
    kind = cell_kind(kind)
    bits = int(bits)
    widths, total = _layout(kind)
    if bits < 0 or bits >> total:
        raise InvalidEncoding(f"bits outside the {total}-bit layout of {kind}: {bits}")
    topo = make_topology(kind)
    shift = 0
    edges = []
    for _ in topo.edges:
        edges.append(bool((bits >> shift) & 1))
        shift += 1
    rots, refl = [], []
    for face, width in zip(topo.faces, widths):
        refl.append(bool((bits >> shift) & 1))
        shift += 1
        r = (bits >> shift) & ((1 << width) - 1)
        if r >= len(face):
            raise InvalidEncoding(f"rotation field {r} too large for a {len(face)}-gon face")
        rots.append(int(r))
        shift += width
    return OrientationInfo(kind, tuple(edges), tuple(rots), tuple(refl))
