"""Global DOF maps.

Each mesh entity receives a contiguous range of global DOFs, allocated
by entity dimension, then global entity index, then local slot. When an
element's base transformations are pure permutations, each cell's entity
blocks are pre-permuted by the cell's orientation so that neighbouring
cells agree on the global DOF at every shared DOF location; no
transformation is then needed during assembly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dofperm.element import FiniteElement
from dofperm.errors import InvalidArgument, MixedMeshMismatch
from dofperm.mesh import EntityMap, Mesh, number_entities
from dofperm.orientation import compute_orientation
from dofperm.topology import cell_kind, make_topology
from dofperm.transform import cell_applier, compute_base_transformations


@dataclass(frozen=True, eq=False)
class DofMap:
    """Global DOF numbers of every cell.

    Attributes:
        cell_dofs: One integer array per cell, in element DOF order.
        n_dofs: Total number of global DOFs.
        permutations_folded: True if any cell had permutations folded in.
        folded_cells: Per-cell flag; folded cells need no runtime transformation.
        cell_elements: The element used on each cell.
        entity_maps: Global entity numbering for each dimension.
    """

    cell_dofs: tuple[np.ndarray, ...]
    n_dofs: int
    permutations_folded: bool
    folded_cells: tuple[bool, ...]
    cell_elements: tuple[FiniteElement, ...]
    entity_maps: tuple[EntityMap, ...]

    def to_dict(self) -> dict:
        return {
            "cells": [d.tolist() for d in self.cell_dofs],
            "n_dofs": self.n_dofs,
            "permutations_folded": self.permutations_folded,
        }


def _element_for(elements, kind) -> FiniteElement:
    for key, el in elements.items():
        if cell_kind(key) == kind:
            return el
    raise InvalidArgument(f"no element supplied for {kind} cells")


def entity_permutation(matrix: np.ndarray) -> np.ndarray:
    """Permutation ``p`` with ``matrix[s, p[s]] = 1`` for a 0/1 permutation matrix."""
    p = np.argmax(matrix, axis=1)
    if not np.allclose(matrix[np.arange(len(p)), p], 1.0) or len(set(p)) != len(p):
        raise InvalidArgument("matrix is not a permutation")
    return p


def build_dofmap(mesh: Mesh, elements: dict, fold: bool = True) -> DofMap:
    """Build the global DOF map of a mesh.

    Args:
        mesh: The mesh.
        elements: Map from cell kind (or name) to the element on that kind.
        fold: Fold permutation-only transformations into the map. Passing
            ``False`` gives the plain entity-order map.

    Returns:
        The :class:`DofMap`.

    Raises:
        MixedMeshMismatch: If cells sharing an entity assign it different
            numbers of DOFs.
    """
    tdim = mesh.tdim
    cell_elements = tuple(_element_for(elements, kind) for kind, _ in mesh.cells)
    if not mesh.n_cells:
        return DofMap((), 0, False, (), (), ())
    emaps = tuple(number_entities(mesh, d) for d in range(tdim + 1))

    counts: list[list[int | None]] = [[None] * em.n_entities for em in emaps]
    for c, el in enumerate(cell_elements):
        for d, em in enumerate(emaps):
            for i, g in enumerate(em.cell_entities[c]):
                n = len(el.entity_dofs[(d, i)])
                if counts[d][g] is None:
                    counts[d][g] = n
                elif counts[d][g] != n:
                    raise MixedMeshMismatch(
                        f"entity {list(em.keys[g])} of dimension {d} gets {counts[d][g]} "
                        f"DOFs from one cell and {n} from cell {c}"
                    )
    starts = []
    total = 0
    for d in range(tdim + 1):
        s = np.zeros(len(counts[d]), dtype=np.int64)
        for g, n in enumerate(counts[d]):
            s[g] = total
            total += n
        starts.append(s)

    topo_cache: dict = {}
    cell_dofs = []
    folded = []
    for c, (kind, ids) in enumerate(mesh.cells):
        el = cell_elements[c]
        topo = topo_cache.setdefault(kind, make_topology(kind))
        arr = np.empty(el.n_dofs, dtype=np.int64)
        ts = compute_base_transformations(el) if tdim >= 2 else None
        do_fold = fold and ts is not None and ts.cls == "permutation"
        applier = cell_applier(ts, compute_orientation(topo, ids)) if do_fold else None
        for d, em in enumerate(emaps):
            for i, g in enumerate(em.cell_entities[c]):
                dofs = np.asarray(el.entity_dofs[(d, i)], dtype=np.int64)
                slots = starts[d][g] + np.arange(len(dofs))
                if applier is not None and 0 < d < tdim and len(dofs) > 1:
                    # Slot s of the entity is the transformed basis function
                    # s, which equals reference function p[s].
                    p = entity_permutation(applier.entity_matrix(dofs))
                    arr[dofs[p]] = slots
                else:
                    arr[dofs] = slots
        cell_dofs.append(arr)
        folded.append(bool(do_fold))
    for arr in cell_dofs:
        arr.setflags(write=False)
    return DofMap(tuple(cell_dofs), int(total), any(folded), tuple(folded), cell_elements, emaps)


def entity_block(dm: DofMap, cell: int, dim: int, index: int) -> np.ndarray:
    """Global DOFs of one entity of one cell, in cell-local order."""
    if not 0 <= cell < len(dm.cell_dofs):
        raise InvalidArgument(f"cell {cell} out of range")
    el = dm.cell_elements[cell]
    key = (dim, index)
    if key not in el.entity_dofs:
        raise InvalidArgument(f"no entity {key} on {el.cell}")
    return dm.cell_dofs[cell][list(el.entity_dofs[key])]
