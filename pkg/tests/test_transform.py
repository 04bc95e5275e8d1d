import numpy as np
import pytest

from dofperm.element import create_element, tabulate
from dofperm.errors import InvalidArgument
from dofperm.orientation import compute_orientation, identity_orientation
from dofperm.topology import make_topology
from dofperm.transform import (
    apply_cols,
    apply_rows,
    apply_self_map,
    cell_applier,
    classify,
    compute_base_transformations,
    entity_block,
    entity_self_map,
)
from oracles import (
    SWEEP,
    random_interior_points,
    reparametrised_tabulation,
    single_entity_orientation,
    transformable_entities,
)


def ts_of(family, cell, degree):
    return compute_base_transformations(create_element(family, cell, degree))


def rounded(block):
    return np.round(block, 12) + 0.0


def test_p3_triangle_edge_swaps():
    ts = ts_of("lagrange", "triangle", 3)
    for i, dofs in enumerate([(3, 4), (5, 6), (7, 8)]):
        assert ts.edge(i).dof_indices == dofs
        assert rounded(ts.edge(i).block).tolist() == [[0, 1], [1, 0]]


def test_rt2_quad_edge_blocks():
    ts = ts_of("raviart_thomas", "quadrilateral", 2)
    assert ts.edge(0).dof_indices == (0, 1)
    for i in range(4):
        assert rounded(ts.edge(i).block).tolist() == [[0, -1], [-1, 0]]


def test_nedelec2_face0_blocks():
    ts = ts_of("nedelec1", "tetrahedron", 2)
    assert ts.face_rotation(0).dof_indices == (12, 13)
    assert rounded(ts.face_rotation(0).block).tolist() == [[0, -1], [1, -1]]
    assert rounded(ts.face_reflection(0).block).tolist() == [[0, 1], [1, 0]]


def test_serendipity_hex5_face0_rotation():
    ts = ts_of("serendipity", "hexahedron", 5)
    assert len(ts.face_rotation(0).dof_indices) == 3
    assert rounded(ts.face_rotation(0).block).tolist() == [[0, 0, 1], [1, 0, 0], [-1, 1, 1]]


@pytest.mark.parametrize(
    "family, cell, degree, cls",
    [("lagrange", "triangle", 3, "permutation"), ("lagrange", "triangle", 1, "identity"),
     ("lagrange", "hexahedron", 4, "permutation"), ("raviart_thomas", "quadrilateral", 2,
                                                    "signed_permutation"),
     ("raviart_thomas", "triangle", 1, "signed_permutation"),
     ("nedelec1", "tetrahedron", 1, "signed_permutation"),
     ("nedelec1", "tetrahedron", 2, "general"), ("serendipity", "hexahedron", 5, "general"),
     ("serendipity", "quadrilateral", 5, "permutation")],
)
def test_classify(family, cell, degree, cls):
    ts = ts_of(family, cell, degree)
    assert ts.cls == cls == classify(ts)


def test_interval_reflection():
    A, b = entity_self_map(make_topology("interval").kind, 0, True)
    assert np.allclose(apply_self_map(make_topology("interval").kind, np.array([[0.25]]), 0, True),
                       [[0.75]])
    assert np.allclose(A, [[-1]]) and np.allclose(b, [1])


def test_quad_rotation_and_reflection():
    kind = make_topology("quadrilateral").kind
    assert np.allclose(apply_self_map(kind, np.array([[0.3, 0.1]]), 1, False), [[0.9, 0.3]])
    assert np.allclose(apply_self_map(kind, np.array([[0.3, 0.1]]), 0, True), [[0.1, 0.3]])


@pytest.mark.parametrize("family, cell, degree", SWEEP)
def test_composed_blocks(family, cell, degree):
    # The block of R**r S**f computed directly equals the product of base blocks.
    el = create_element(family, cell, degree)
    ts = compute_base_transformations(el)
    topo = el.topology
    if topo.dim < 3:
        return
    for i, face in enumerate(topo.faces):
        R = ts.face_rotation(i).block
        S = ts.face_reflection(i).block
        for r in range(len(face)):
            for f in (False, True):
                direct = entity_block(el, (2, i), r, f)
                product = np.linalg.matrix_power(R, r) @ (S if f else np.eye(len(S)))
                assert np.allclose(direct, product, atol=1e-10)


@pytest.mark.parametrize("family, cell, degree", SWEEP)
def test_oracle_equivalence(family, cell, degree):
    el = create_element(family, cell, degree)
    ts = compute_base_transformations(el)
    pts = random_interior_points(cell, 10, seed=11)
    ref = tabulate(el, pts)
    for entity, r, f in transformable_entities(el):
        data = ref.copy()
        cell_applier(ts, single_entity_orientation(el.cell, entity, r, f)).apply_rows(data)
        direct = reparametrised_tabulation(el, entity, r, f, pts)
        assert np.allclose(data, direct, atol=1e-9), (entity, r, f)


def p3_rows():
    el = create_element("lagrange", "triangle", 3)
    return el, np.arange(10.0)[:, None] * np.ones((1, 3))


def test_identity_applier():
    el, data = p3_rows()
    a = cell_applier(compute_base_transformations(el), identity_orientation("triangle"))
    assert a.is_identity
    assert np.array_equal(apply_rows(a, data.copy()), data)


def test_p3_mesh_cell0_reverses_all_edges():
    el, data = p3_rows()
    o = compute_orientation(el.topology, [4, 3, 0])
    out = apply_rows(cell_applier(compute_base_transformations(el), o), data.copy())
    assert out[:, 0].tolist() == [0, 1, 2, 4, 3, 6, 5, 8, 7, 9]


def test_p3_mesh_cell2_reverses_edges_1_and_2():
    el, data = p3_rows()
    o = compute_orientation(el.topology, [4, 1, 2])
    out = apply_rows(cell_applier(compute_base_transformations(el), o), data.copy())
    assert out[:, 0].tolist() == [0, 1, 2, 3, 4, 6, 5, 8, 7, 9]


def test_edge_reflection_swaps_tabulation_rows():
    el = create_element("lagrange", "triangle", 3)
    pts = random_interior_points("triangle", 4)
    tab = tabulate(el, pts)[:, :, 0]
    o = single_entity_orientation(el.cell, (1, 0), 0, True)
    out = apply_rows(cell_applier(compute_base_transformations(el), o), tab.copy())
    assert np.array_equal(out[[3, 4]], tab[[4, 3]])
    assert np.array_equal(out[[0, 1, 2, 5, 6, 7, 8, 9]], tab[[0, 1, 2, 5, 6, 7, 8, 9]])


@pytest.mark.parametrize("family, cell, degree", [("nedelec1", "tetrahedron", 2),
                                                  ("serendipity", "hexahedron", 5),
                                                  ("lagrange", "prism", 3)])
def test_inverse_path_undoes_applier(family, cell, degree):
    el = create_element(family, cell, degree)
    ts = compute_base_transformations(el)
    rng = np.random.default_rng(5)
    topo = el.topology
    for _ in range(10):
        ids = rng.permutation(50)[: len(topo.vertices)]
        o = compute_orientation(topo, ids)
        data = rng.random((el.n_dofs, 4))
        out = apply_rows(cell_applier(ts, o), data.copy())
        back = apply_rows(cell_applier(ts, o, inverse=True), out)
        assert np.allclose(back, data, atol=1e-12)


def test_apply_cols_matches_rows():
    el = create_element("nedelec1", "tetrahedron", 2)
    ts = compute_base_transformations(el)
    o = compute_orientation(el.topology, [3, 0, 2, 1])
    a = cell_applier(ts, o)
    M = apply_rows(a, np.eye(el.n_dofs))
    data = np.random.default_rng(2).random((3, el.n_dofs))
    assert np.allclose(apply_cols(a, data.copy()), data @ M.T)


def test_shape_mismatch():
    el, _ = p3_rows()
    a = cell_applier(compute_base_transformations(el), identity_orientation("triangle"))
    with pytest.raises(InvalidArgument):
        a.apply_rows(np.zeros((9, 2)))
    with pytest.raises(InvalidArgument):
        a.apply_cols(np.zeros((2, 9)))


def test_orientation_kind_mismatch():
    el, _ = p3_rows()
    with pytest.raises(InvalidArgument):
        cell_applier(compute_base_transformations(el), identity_orientation("quadrilateral"))
