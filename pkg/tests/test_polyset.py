import numpy as np
import pytest

from dofperm.errors import UnsupportedDegree, UnsupportedElement
from dofperm.polyset import (
    MAX_DEGREE,
    expansion_size,
    serendipity_span,
    tabulate_expansion,
    vector_span,
)
from dofperm.quadrature import make_quadrature
from dofperm.topology import make_topology

CELLS = ["interval", "triangle", "quadrilateral", "tetrahedron", "hexahedron", "prism"]


def test_interval_degree_zero_is_constant():
    vals = tabulate_expansion("interval", 0, np.array([[0.5]]))
    assert vals.shape == (1, 1)
    assert np.isclose(vals[0, 0], 1.0)


def test_triangle_p1_at_vertices_rank_3():
    vals = tabulate_expansion("triangle", 1, make_topology("triangle").vertices)
    assert vals.shape == (3, 3)
    assert np.linalg.matrix_rank(vals) == 3


def test_quad_tensor_grid_nonsingular():
    g = np.array([0.0, 0.5, 1.0])
    pts = np.array([[x, y] for y in g for x in g])
    vals = tabulate_expansion("quadrilateral", 2, pts)
    assert vals.shape == (9, 9)
    assert abs(np.linalg.det(vals)) > 1e-6


@pytest.mark.parametrize("kind", CELLS)
@pytest.mark.parametrize("degree", [0, 1, 3, 6])
def test_orthonormal(kind, degree):
    pts, wts = make_quadrature(kind, 2 * degree + 2)
    vals = tabulate_expansion(kind, degree, pts)
    gram = (vals * wts) @ vals.T
    assert np.allclose(gram, np.eye(expansion_size(kind, degree)), atol=1e-11)


@pytest.mark.parametrize(
    "kind, degree, size",
    [("interval", 4, 5), ("triangle", 3, 10), ("quadrilateral", 2, 9), ("tetrahedron", 2, 10),
     ("hexahedron", 2, 27), ("prism", 2, 18)],
)
def test_expansion_size(kind, degree, size):
    assert expansion_size(kind, degree) == size
    assert tabulate_expansion(kind, degree, make_topology(kind).vertices).shape[0] == size


def test_degree_cap():
    with pytest.raises(UnsupportedDegree):
        tabulate_expansion("triangle", MAX_DEGREE + 1, np.array([[0.2, 0.2]]))


@pytest.mark.parametrize(
    "family, kind, degree, dim",
    [("raviart_thomas", "quadrilateral", 1, 4), ("raviart_thomas", "quadrilateral", 2, 12),
     ("raviart_thomas", "triangle", 1, 3), ("raviart_thomas", "triangle", 2, 8),
     ("nedelec1", "tetrahedron", 1, 6), ("nedelec1", "tetrahedron", 2, 20)],
)
def test_vector_span_dimension(family, kind, degree, dim):
    assert vector_span(family, kind, degree).dim_space == dim


def test_rt1_quad_span_members():
    # The span is {(1, 0), (x, 0), (0, 1), (0, y)}.
    span = vector_span("raviart_thomas", "quadrilateral", 1)
    rng = np.random.default_rng(3)
    pts = rng.random((12, 2))
    vals = span.tabulate(pts)
    expected = np.stack(
        [np.stack([np.ones(12), np.zeros(12)], -1), np.stack([pts[:, 0], np.zeros(12)], -1),
         np.stack([np.zeros(12), np.ones(12)], -1), np.stack([np.zeros(12), pts[:, 1]], -1)]
    )
    a = vals.reshape(4, -1)
    b = expected.reshape(4, -1)
    # Same row space.
    assert np.linalg.matrix_rank(np.vstack([a, b]), tol=1e-9) == 4


def test_vector_span_unsupported():
    with pytest.raises(UnsupportedElement):
        vector_span("nedelec1", "hexahedron", 1)


@pytest.mark.parametrize("kind, degree, dim", [("quadrilateral", 1, 4), ("quadrilateral", 5, 23),
                                               ("hexahedron", 1, 8), ("hexahedron", 5, 74)])
def test_serendipity_dimension(kind, degree, dim):
    assert serendipity_span(kind, degree).dim_space == dim
