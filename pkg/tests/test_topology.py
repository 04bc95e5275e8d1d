import numpy as np
import pytest

from dofperm.errors import InvalidArgument
from dofperm.topology import (
    cell_kind,
    count_reference_orderings,
    entity_frame,
    make_topology,
    polygon,
    sub_entity_kind,
    sub_entity_vertices,
    symmetry_group,
)


@pytest.mark.parametrize(
    "kind, edges",
    [
        ("triangle", [(1, 2), (0, 2), (0, 1)]),
        ("quadrilateral", [(0, 1), (0, 2), (1, 3), (2, 3)]),
        ("hexahedron", [(0, 1), (0, 2), (0, 4), (1, 3), (1, 5), (2, 3), (2, 6), (3, 7),
                        (4, 5), (4, 6), (5, 7), (6, 7)]),
        ("tetrahedron", [(2, 3), (1, 3), (1, 2), (0, 3), (0, 2), (0, 1)]),
    ],
)
def test_edges(kind, edges):
    assert [tuple(e) for e in make_topology(kind).edges] == edges


@pytest.mark.parametrize(
    "kind, counts",
    [
        ("interval", (2, 1)),
        ("triangle", (3, 3, 1)),
        ("quadrilateral", (4, 4, 1)),
        ("tetrahedron", (4, 6, 4, 1)),
        ("hexahedron", (8, 12, 6, 1)),
        ("prism", (6, 9, 5, 1)),
    ],
)
def test_entity_counts(kind, counts):
    assert tuple(make_topology(kind).entity_counts) == counts


def test_sub_entity_vertices():
    assert sub_entity_vertices(make_topology("triangle"), 1, 0) == [1, 2]
    assert sub_entity_vertices(make_topology("interval"), 0, 1) == [1]
    face = sub_entity_vertices(make_topology("hexahedron"), 2, 0)
    assert sorted(face) == [0, 1, 2, 3]
    # A cycle: consecutive vertices share an edge.
    edges = {tuple(sorted(e)) for e in make_topology("hexahedron").edges}
    assert all(tuple(sorted((face[i], face[(i + 1) % 4]))) in edges for i in range(4))


@pytest.mark.parametrize("dim, index", [(3, 0), (1, 3), (-1, 0), (0, 8)])
def test_sub_entity_out_of_range(dim, index):
    topo = make_topology("triangle" if dim != 0 else "hexahedron")
    with pytest.raises(InvalidArgument):
        sub_entity_vertices(topo, dim, index)


def test_prism_face_kinds():
    topo = make_topology("prism")
    kinds = [sub_entity_kind(topo, 2, i).name for i in range(5)]
    assert kinds == ["triangle", "quadrilateral", "quadrilateral", "quadrilateral", "triangle"]


def test_polygon():
    assert polygon(3) == cell_kind("triangle")
    assert polygon(4) == cell_kind("quadrilateral")
    p = make_topology(polygon(5))
    assert p.kind == cell_kind("polygon(5)")
    assert len(p.vertices) == 5 and len(p.edges) == 5
    assert np.allclose(p.vertices.mean(axis=0), [0.5, 0.5])
    with pytest.raises(InvalidArgument):
        polygon(2)


def test_unknown_kind():
    with pytest.raises(InvalidArgument):
        cell_kind("pyramid")


@pytest.mark.parametrize("kind", ["triangle", "quadrilateral", "tetrahedron", "hexahedron", "prism"])
def test_entity_frame_maps_vertices(kind):
    topo = make_topology(kind)
    for d in range(1, topo.dim):
        for i in range(topo.entity_counts[d]):
            origin, axes = entity_frame(topo, d, i)
            verts = {tuple(topo.vertices[v]) for v in sub_entity_vertices(topo, d, i)}
            assert tuple(origin) in verts
            for col in axes.T:
                assert tuple(origin + col) in verts


@pytest.mark.parametrize(
    "kind, order", [("triangle", 6), ("quadrilateral", 8), ("tetrahedron", 24),
                    ("hexahedron", 48), ("prism", 12)]
)
def test_symmetry_group_order(kind, order):
    assert len(symmetry_group(kind)) == order


@pytest.mark.parametrize(
    "kind, count", [("triangle", 1), ("quadrilateral", 3), ("tetrahedron", 1), ("hexahedron", 501)]
)
def test_count_reference_orderings(kind, count):
    assert count_reference_orderings(kind) == count


def test_count_reference_orderings_unsupported():
    with pytest.raises(InvalidArgument):
        count_reference_orderings("interval")
