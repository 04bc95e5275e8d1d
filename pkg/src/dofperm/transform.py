"""Base transformations of finite element DOFs.

For every edge of a 2D or 3D cell the element gets one block describing
the effect of reversing the edge; for every face of a 3D cell it gets a
rotation block and a reflection block. A block acts only on the DOFs of
its entity.

Blocks are derived from the entity self-map ``g`` (an affine map of the
entity's reference cell onto itself). If ``l_i`` are the entity DOFs
measured through the reference parametrisation and ``g*`` is the pullback
of traces (identity for H1, ``Dg^T`` for tangential traces, ``det Dg`` for
normal traces), then ``l_i o g* = sum_j I_ij l_j`` and the block acting on
basis functions is ``I^T``. For point evaluations ``I`` is the permutation
of DOF points under ``g``; for integral moments it is obtained by
interpolating the pulled-back weight functions into the moment space.

With ``M(g)`` the block of ``g``, composition is multiplicative:
``M(g1 o g2) = M(g1) M(g2)``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from dofperm.element import FiniteElement, moment_space
from dofperm.errors import InvalidArgument, NonClosedMomentSpace
from dofperm.orientation import OrientationInfo
from dofperm.quadrature import make_quadrature
from dofperm.topology import CellKind, entity_frame, make_topology, sub_entity_kind

CLASS_TOLERANCE = 1e-12
CLOSURE_TOLERANCE = 1e-9
CLASSES = ("identity", "permutation", "signed_permutation", "general")


def _reference_cycle(kind: CellKind) -> np.ndarray:
    topo = make_topology(kind)
    if kind.dim == 1:
        return topo.vertices
    return topo.vertices[list(topo.cycle)]


@functools.lru_cache(maxsize=None)
def entity_self_map(kind: CellKind, rotations: int = 0, reflected: bool = False):
    """Affine self-map ``rotation**rotations . reflection**reflected`` of a cell.

    The rotation advances the vertex cycle by one position (for the
    quadrilateral it is ``(t, s) -> (1 - s, t)``); the reflection fixes the
    first vertex and reverses the cycle (``(t, s) -> (s, t)``). For an
    interval the reflection is ``t -> 1 - t``.

    Returns:
        ``(A, b)`` with ``g(x) = A x + b``.
    """
    cyc = _reference_cycle(kind)
    m = len(cyc)
    if m == 2:
        # An interval has no rotation; its reflection swaps the endpoints.
        target = cyc[[(i + rotations + int(reflected)) % 2 for i in range(2)]]
    else:
        sign = -1 if reflected else 1
        target = cyc[[(sign * i + rotations) % m for i in range(m)]]
    src = np.hstack([cyc, np.ones((m, 1))])
    sol, *_ = np.linalg.lstsq(src, target, rcond=None)
    A, b = sol[:-1].T, sol[-1]
    A = np.where(np.abs(A - np.round(A)) < 1e-13, np.round(A), A)
    b = np.where(np.abs(b - np.round(b)) < 1e-13, np.round(b), b)
    A.setflags(write=False)
    b.setflags(write=False)
    return A, b


def apply_self_map(kind: CellKind, points: np.ndarray, rotations: int, reflected: bool):
    A, b = entity_self_map(kind, rotations, reflected)
    return points @ A.T + b


@dataclass(frozen=True, eq=False)
class BaseTransformation:
    """One elementary transformation of an entity's DOFs.

    Attributes:
        entity: ``(dim, index)`` of the entity.
        kind: ``edge_reflection``, ``face_rotation`` or ``face_reflection``.
        block: Square matrix acting on the entity's DOF sub-vector.
        dof_indices: The element DOFs the block acts on.
    """

    entity: tuple[int, int]
    kind: str
    block: np.ndarray
    dof_indices: tuple[int, ...]


def _match_points(src: np.ndarray, dst: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    dist = np.linalg.norm(src[:, None, :] - dst[None, :, :], axis=2)
    idx = np.argmin(dist, axis=1)
    if len(dst) and np.max(dist[np.arange(len(src)), idx]) > tol:
        raise NonClosedMomentSpace("DOF points are not mapped onto DOF points")
    return idx


def _point_matrix(element: FiniteElement, dofs, A, b) -> np.ndarray:
    """``I`` for point-type DOFs: l_i o g* expressed in the entity DOFs."""
    fs = [element.functionals[i] for i in dofs]
    pts = np.array([f.entity_points[0] for f in fs])
    images = pts @ A.T + b
    n = len(dofs)
    out = np.zeros((n, n))
    if all(f.kind == "point_eval" for f in fs):
        out[np.arange(n), _match_points(images, pts)] = 1.0
        return out
    # Directional evaluations: directions are tangent to the entity and
    # pulled back covariantly, so the direction at g(x) is Dg d.
    dim, index = fs[0].entity
    topo = element.topology
    _, axes = entity_frame(topo, dim, index)
    pinv = np.linalg.pinv(axes)
    for i, f in enumerate(fs):
        if f.kind != "directional_point_eval":
            raise NonClosedMomentSpace("mixed DOF kinds on one entity")
        new_dir = axes @ (A @ (pinv @ f.direction))
        here = np.where(np.linalg.norm(pts - images[i], axis=1) < 1e-10)[0]
        if len(here) == 0:
            raise NonClosedMomentSpace("DOF points are not mapped onto DOF points")
        dirs = np.array([fs[j].direction for j in here]).T
        coef, *_ = np.linalg.lstsq(dirs, new_dir, rcond=None)
        if np.linalg.norm(dirs @ coef - new_dir) > CLOSURE_TOLERANCE:
            raise NonClosedMomentSpace("directions do not span their own pullback")
        out[i, here] = coef
    return out


def _moment_matrix(element: FiniteElement, entity, A, b) -> np.ndarray:
    """``I`` for moment DOFs, by interpolating pulled-back weights."""
    ms = moment_space(element, *entity)
    ekind = sub_entity_kind(element.topology, *entity)
    pts, _ = make_quadrature(ekind, 2 * ms.degree + 4)
    Ainv = np.linalg.inv(A)
    det = np.linalg.det(A)
    pre = (pts - b) @ Ainv.T  # g^{-1}(eta)
    psi = ms.tabulate(pts)  # (m, q, c)
    moved = ms.tabulate(pre)
    if ms.mode == "scalar":
        moved = moved / abs(det)
    elif ms.mode == "normal":
        moved = moved * np.sign(det)
    else:
        moved = np.einsum("cd,mqd->mqc", A, moved) / abs(det)
    basis = psi.reshape(len(psi), -1).T
    target = moved.reshape(len(moved), -1).T
    coef, *_ = np.linalg.lstsq(basis, target, rcond=None)
    resid = np.max(np.abs(basis @ coef - target)) if target.size else 0.0
    if resid > CLOSURE_TOLERANCE * max(1.0, np.max(np.abs(target))):
        raise NonClosedMomentSpace(
            f"moment space on entity {entity} cannot represent its own pullback "
            f"(residual {resid:.3g})"
        )
    return coef.T


def entity_block(element: FiniteElement, entity, rotations: int = 0,
                 reflected: bool = False) -> np.ndarray:
    """Block of the self-map ``rotation**rotations . reflection**reflected``.

    This is computed directly from the composed map rather than from the
    base blocks, and serves as a cross-check of the composition rule.
    """
    dofs = element.entity_dofs.get(tuple(entity), ())
    if not dofs:
        return np.zeros((0, 0))
    ekind = sub_entity_kind(element.topology, *entity)
    A, b = entity_self_map(ekind, rotations, reflected)
    kinds = {element.functionals[i].kind for i in dofs}
    if kinds == {"integral_moment"}:
        mat = _moment_matrix(element, tuple(entity), A, b)
    elif "integral_moment" in kinds:
        raise NonClosedMomentSpace("mixed DOF kinds on one entity")
    else:
        mat = _point_matrix(element, dofs, A, b)
    return mat.T.copy()


@dataclass(frozen=True, eq=False)
class TransformSet:
    """All base transformations of an element.

    Attributes:
        element: The element.
        transformations: Edge reflections (ascending), then for each face a
            rotation followed by a reflection.
        cls: ``identity``, ``permutation``, ``signed_permutation`` or ``general``.
    """

    element: FiniteElement
    transformations: tuple[BaseTransformation, ...]
    cls: str

    def edge(self, index: int) -> BaseTransformation:
        return self.transformations[index]

    def face_rotation(self, index: int) -> BaseTransformation:
        n_edges = len(self.element.topology.edges)
        return self.transformations[n_edges + 2 * index]

    def face_reflection(self, index: int) -> BaseTransformation:
        n_edges = len(self.element.topology.edges)
        return self.transformations[n_edges + 2 * index + 1]


def _block_class(block: np.ndarray) -> str:
    if block.size == 0:
        return "identity"
    near0 = np.abs(block) <= CLASS_TOLERANCE
    near1 = np.abs(np.abs(block) - 1) <= CLASS_TOLERANCE
    if not np.all(near0 | near1):
        return "general"
    if not (np.all(near1.sum(axis=0) == 1) and np.all(near1.sum(axis=1) == 1)):
        return "general"
    if np.allclose(block, np.eye(len(block)), atol=CLASS_TOLERANCE, rtol=0):
        return "identity"
    if np.all(block[near1] > 0):
        return "permutation"
    return "signed_permutation"


def classify(ts: TransformSet | list) -> str:
    """Class of a transformation set (the least specific of its blocks)."""
    blocks = ts.transformations if isinstance(ts, TransformSet) else ts
    rank = max((CLASSES.index(_block_class(t.block)) for t in blocks), default=0)
    return CLASSES[rank]


@functools.lru_cache(maxsize=None)
def _compute(element: FiniteElement) -> TransformSet:
    topo = element.topology
    out = []
    if topo.dim >= 2:
        for i in range(len(topo.edges)):
            dofs = tuple(element.entity_dofs.get((1, i), ()))
            block = entity_block(element, (1, i), 0, True)
            out.append(BaseTransformation((1, i), "edge_reflection", block, dofs))
    if topo.dim == 3:
        for i in range(len(topo.faces)):
            dofs = tuple(element.entity_dofs.get((2, i), ()))
            rot = entity_block(element, (2, i), 1, False)
            ref = entity_block(element, (2, i), 0, True)
            out.append(BaseTransformation((2, i), "face_rotation", rot, dofs))
            out.append(BaseTransformation((2, i), "face_reflection", ref, dofs))
    for t in out:
        t.block.setflags(write=False)
    return TransformSet(element, tuple(out), classify(out))


def compute_base_transformations(element: FiniteElement) -> TransformSet:
    """Base transformations of an element.

    Raises:
        NonClosedMomentSpace: If a moment space cannot represent the
            pullback of its own weight functions.

    Example:
        >>> from dofperm.element import create_element
        >>> ts = compute_base_transformations(create_element("lagrange", "triangle", 3))
        >>> ts.edge(0).block.tolist()
        [[0.0, 1.0], [1.0, 0.0]]
    """
    return _compute(element)


class Applier:
    """Applies the composed transformation of one cell in place.

    For each reflected edge the edge block is applied once. For each face
    the entity matrix is ``R**r S**f``: the reflection block is applied
    first (when ``f`` is set), followed by ``r`` applications of the
    rotation block. The full matrix is never formed.
    """

    def __init__(self, ts: TransformSet, steps):
        self.ts = ts
        self.n_dofs = ts.element.n_dofs
        # steps: list of (dof index array, block) in application order.
        self.steps = [(np.asarray(d, dtype=np.int64), b) for d, b in steps if len(d)]

    @property
    def is_identity(self) -> bool:
        return not self.steps

    def apply_rows(self, data: np.ndarray) -> np.ndarray:
        """Replace ``data`` by ``M @ data`` (first axis indexes DOFs)."""
        if data.shape[0] != self.n_dofs:
            raise InvalidArgument(f"expected {self.n_dofs} rows, got {data.shape[0]}")
        for dofs, block in self.steps:
            sub = data[dofs]
            data[dofs] = np.tensordot(block, sub, axes=(1, 0))
        return data

    def apply_cols(self, data: np.ndarray) -> np.ndarray:
        """Replace ``data`` by ``data @ M.T`` (last axis indexes DOFs)."""
        if data.shape[-1] != self.n_dofs:
            raise InvalidArgument(f"expected {self.n_dofs} columns, got {data.shape[-1]}")
        for dofs, block in self.steps:
            sub = data[..., dofs]
            data[..., dofs] = sub @ block.T
        return data

    def entity_matrix(self, dofs) -> np.ndarray:
        """Composed matrix acting on one entity's DOFs (small and dense)."""
        dofs = np.asarray(dofs, dtype=np.int64)
        mat = np.eye(len(dofs))
        for d, block in self.steps:
            if len(d) == len(dofs) and np.array_equal(d, dofs):
                mat = block @ mat
        return mat


def cell_applier(ts: TransformSet, o: OrientationInfo, inverse: bool = False) -> Applier:
    """Build the in-place applier of a cell's composed transformation.

    Args:
        ts: The element's base transformations.
        o: The cell's orientation.
        inverse: Apply the inverse path instead (``S**f R**(m - r)`` per
            face), which undoes the forward applier.
    """
    topo = ts.element.topology
    if o.kind != topo.kind:
        raise InvalidArgument(f"orientation of {o.kind} used with an element on {topo.kind}")
    steps = []
    n_edges = len(topo.edges)
    if topo.dim >= 2:
        for i, flag in enumerate(o.edge_reflected):
            if flag:
                t = ts.transformations[i]
                steps.append((t.dof_indices, t.block))
    if topo.dim == 3:
        for i, face in enumerate(topo.faces):
            rot = ts.transformations[n_edges + 2 * i]
            ref = ts.transformations[n_edges + 2 * i + 1]
            r, f = o.face_rotations[i], o.face_reflected[i]
            if inverse:
                seq = [rot] * ((len(face) - r) % len(face)) + [ref] * int(f)
            else:
                seq = [ref] * int(f) + [rot] * r
            steps.extend((t.dof_indices, t.block) for t in seq)
    return Applier(ts, steps)


def apply_rows(applier: Applier, data: np.ndarray) -> np.ndarray:
    """Functional form of :meth:`Applier.apply_rows`."""
    return applier.apply_rows(data)


def apply_cols(applier: Applier, data: np.ndarray) -> np.ndarray:
    """Functional form of :meth:`Applier.apply_cols`."""
    return applier.apply_cols(data)
