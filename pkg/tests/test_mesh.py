import json

import numpy as np
import pytest

from dofperm.errors import (
    InvalidArgument,
    InvalidMeshCell,
    MalformedMesh,
    NonManifoldMesh,
    NonMatchingFacet,
)
from dofperm.mesh import facet_pairs, load_mesh, make_mesh, mesh_to_dict, number_entities
from oracles import hex2, quad2, tri4


def doc(**over):
    base = {"gdim": 2, "vertices": [[0, 0], [1, 0], [0, 1]],
            "cells": [{"kind": "triangle", "v": [0, 1, 2]}]}
    base.update(over)
    return json.dumps(base)


def test_load_quad2():
    m = load_mesh(json.dumps(mesh_to_dict(quad2())))
    assert m.n_cells == 2 and len(m.vertices) == 6
    assert [list(ids) for _, ids in m.cells] == [[0, 1, 3, 4], [4, 1, 5, 2]]


def test_round_trip():
    m = tri4()
    again = load_mesh(json.dumps(mesh_to_dict(m)))
    assert again.cells == m.cells
    assert np.array_equal(again.vertices, m.vertices)


def test_empty_mesh():
    m = load_mesh('{"gdim": 2, "vertices": [], "cells": []}')
    assert m.n_cells == 0
    assert facet_pairs(m) == []


def test_polygon_kind_from_vertex_count():
    angles = np.linspace(0, 2 * np.pi, 6)[:-1]
    verts = np.stack([np.cos(angles), np.sin(angles)], 1).tolist()
    m = load_mesh(json.dumps({"gdim": 2, "vertices": verts,
                              "cells": [{"kind": "polygon", "v": [0, 1, 2, 3, 4]}]}))
    assert str(m.cells[0][0]) == "polygon(5)"


@pytest.mark.parametrize(
    "text, match",
    [
        ('{"gdim": 2,\n "vertices": [}', "line 2"),
        (doc(gdim=4), "gdim"),
        (json.dumps({"gdim": 2, "cells": []}), "vertices"),
        (doc(vertices=[[0, 0], [1]]), r"vertices\[1\]"),
        (doc(cells=[{"kind": "pyramid", "v": [0, 1, 2]}]), "cell 0"),
        (doc(cells=[{"v": [0, 1, 2]}]), r"cells\[0\]"),
        (doc(cells=[{"kind": "triangle", "v": [0, 1.5, 2]}]), r"cells\[0\].v"),
        ("[1, 2]", "object"),
    ],
)
def test_malformed(text, match):
    with pytest.raises(MalformedMesh, match=match):
        load_mesh(text)


@pytest.mark.parametrize(
    "cells, match",
    [
        ([{"kind": "triangle", "v": [0, 1, 3]}], "out of range"),
        ([{"kind": "triangle", "v": [0, 1, 1]}], "repeated"),
        ([{"kind": "triangle", "v": [0, 1]}], "needs 3"),
    ],
)
def test_invalid_cells(cells, match):
    with pytest.raises(InvalidMeshCell, match=match):
        load_mesh(doc(cells=cells))


def test_mixed_dimensions():
    with pytest.raises(MalformedMesh):
        make_mesh([[0, 0], [1, 0], [0, 1]], [("triangle", [0, 1, 2]), ("interval", [0, 1])])


@pytest.mark.parametrize("mesh, dim, count", [(tri4, 1, 9), (tri4, 0, 6), (quad2, 1, 7),
                                              (hex2, 1, 20), (hex2, 2, 11), (hex2, 3, 2)])
def test_entity_counts(mesh, dim, count):
    assert number_entities(mesh(), dim).n_entities == count


def test_single_triangle_vertices():
    m = make_mesh([[0, 0], [1, 0], [0, 1]], [("triangle", [0, 1, 2])])
    em = number_entities(m, 0)
    assert em.n_entities == 3
    assert all(p.is_boundary for p in facet_pairs(m))


def test_first_encounter_numbering():
    em = number_entities(tri4(), 1)
    # Cell 0 is [4, 3, 0]: its edges are (3, 0), (4, 0), (4, 3) in local order.
    assert em.keys[:3] == ((0, 3), (0, 4), (3, 4))
    assert em.cell_entities[0] == (0, 1, 2)


def test_interior_facets_quad2():
    m = quad2()
    em = number_entities(m, 1)
    inner = [p for p in facet_pairs(m) if not p.is_boundary]
    assert [em.keys[p.facet] for p in inner] == [(1, 4)]


def test_interior_facets_tri4():
    m = tri4()
    em = number_entities(m, 1)
    inner = sorted(em.keys[p.facet] for p in facet_pairs(m) if not p.is_boundary)
    assert inner == [(0, 4), (1, 4), (2, 4)]


def test_non_manifold():
    m = make_mesh([[0, 0], [1, 0], [0, 1], [0, -1], [-1, 0]],
                  [("triangle", [0, 1, 2]), ("triangle", [0, 1, 3]), ("triangle", [0, 1, 4])])
    with pytest.raises(NonManifoldMesh):
        facet_pairs(m)


def test_non_matching_facet():
    # A tetrahedron face glued inside a hexahedron face.
    verts = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0], [0, 0, 1], [1, 0, 1], [0, 1, 1],
             [1, 1, 1], [0, 0, -1]]
    m = make_mesh(verts, [("hexahedron", list(range(8))), ("tetrahedron", [8, 0, 1, 2])])
    with pytest.raises(NonMatchingFacet):
        number_entities(m, 2)


def test_number_entities_bad_dim():
    with pytest.raises(InvalidArgument):
        number_entities(tri4(), 3)
