"""Gauss quadrature on reference cells.

Tensor cells use Gauss-Legendre products; simplices use collapsed
(Duffy) coordinates with Gauss-Jacobi rules absorbing the Jacobian.
"""

from __future__ import annotations

import functools

import numpy as np
from scipy.special import roots_jacobi

from dofperm.errors import InvalidArgument
from dofperm.topology import CellKind, cell_kind


def _gauss_jacobi01(n: int, alpha: int) -> tuple[np.ndarray, np.ndarray]:
    # Rule for int_0^1 f(x) (1 - x)^alpha dx.
    if alpha == 0:
        x, w = np.polynomial.legendre.leggauss(n)
    else:
        x, w = roots_jacobi(n, alpha, 0)
    return 0.5 * (x + 1.0), w / 2.0 ** (alpha + 1)


@functools.lru_cache(maxsize=None)
def _rule(kind: CellKind, degree: int) -> tuple[np.ndarray, np.ndarray]:
    n = degree // 2 + 1
    name = kind.name
    if name == "point":
        pts, wts = np.zeros((1, 0)), np.ones(1)
    elif name == "interval":
        x, w = _gauss_jacobi01(n, 0)
        pts, wts = x[:, None], w
    elif name == "quadrilateral":
        x, w = _gauss_jacobi01(n, 0)
        X, Y = np.meshgrid(x, x, indexing="ij")
        pts = np.column_stack([X.T.ravel(), Y.T.ravel()])
        wts = np.outer(w, w).T.ravel()
    elif name == "hexahedron":
        x, w = _gauss_jacobi01(n, 0)
        Z, Y, X = np.meshgrid(x, x, x, indexing="ij")
        pts = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])
        wts = np.einsum("k,j,i->kji", w, w, w).ravel()
    elif name == "triangle":
        n = (degree + 1) // 2 + 1
        u, wu = _gauss_jacobi01(n, 0)
        v, wv = _gauss_jacobi01(n, 1)
        U, V = np.meshgrid(u, v, indexing="xy")
        pts = np.column_stack([(U * (1 - V)).ravel(), V.ravel()])
        wts = np.outer(wv, wu).ravel()
    elif name == "tetrahedron":
        n = (degree + 2) // 2 + 1
        u, wu = _gauss_jacobi01(n, 0)
        v, wv = _gauss_jacobi01(n, 1)
        s, ws = _gauss_jacobi01(n, 2)
        S, V, U = np.meshgrid(s, v, u, indexing="ij")
        pts = np.column_stack(
            [(U * (1 - V) * (1 - S)).ravel(), (V * (1 - S)).ravel(), S.ravel()]
        )
        wts = np.einsum("k,j,i->kji", ws, wv, wu).ravel()
    elif name == "prism":
        tp, tw = _rule(CellKind("triangle"), degree)
        z, zw = _gauss_jacobi01(n, 0)
        pts = np.column_stack([np.tile(tp, (len(z), 1)), np.repeat(z, len(tp))])
        wts = np.outer(zw, tw).ravel()
    else:
        raise InvalidArgument(f"no quadrature rule on {kind}")
    pts = np.ascontiguousarray(pts, dtype=float)
    wts = np.ascontiguousarray(wts, dtype=float)
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


def make_quadrature(kind, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Points and weights integrating polynomials of ``degree`` exactly.

    Args:
        kind: Reference cell kind (any non-polygon kind).
        degree: Polynomial degree to integrate exactly.

    Returns:
        ``(points, weights)`` with points of shape ``(n, dim)``.
    """
    if degree < 0:
        raise InvalidArgument("quadrature degree must be nonnegative")
    return _rule(cell_kind(kind), int(degree))
