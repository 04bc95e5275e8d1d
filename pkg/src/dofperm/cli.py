"""Command line interface.

Subcommands print deterministic JSON by default; ``--format table``
gives a plain-text rendering. Exit status is 0 on success, 1 on domain
errors or failed verification, and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from dofperm.conformity import check_continuity
from dofperm.dofmap import build_dofmap
from dofperm.element import FAMILIES, create_element
from dofperm.errors import DofPermError
from dofperm.mesh import Mesh, load_mesh
from dofperm.orientation import compute_orientation, packed_width
from dofperm.topology import count_reference_orderings, make_topology
from dofperm.transform import compute_base_transformations


def _clean(x: float) -> float:
    v = round(float(x), 12)
    return 0.0 if v == 0 else v


def _matrix(block: np.ndarray) -> list:
    return [[_clean(v) for v in row] for row in np.asarray(block)]


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _read_mesh(path: str) -> Mesh:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise DofPermError(f"cannot read mesh file {path!r}: {err.strerror}") from None
    return load_mesh(text)


def _mesh_elements(mesh: Mesh, family: str, degree: int) -> dict:
    return {kind: create_element(family, kind, degree) for kind in {k for k, _ in mesh.cells}}


def inspect_element(args) -> tuple[dict, str]:
    el = create_element(args.family, args.cell, args.degree)
    ts = compute_base_transformations(el)
    data = {
        "cell": str(el.cell),
        "family": el.family,
        "degree": el.degree,
        "n_dofs": el.n_dofs,
        "value_size": el.value_size,
        "sobolev": el.sobolev,
        "classification": ts.cls,
        "entity_dofs": [
            {"dim": d, "index": i, "dofs": list(dofs)}
            for (d, i), dofs in sorted(el.entity_dofs.items())
        ],
        "transformations": [
            {
                "entity": list(t.entity),
                "kind": t.kind,
                "dofs": list(t.dof_indices),
                "block": _matrix(t.block),
            }
            for t in ts.transformations
        ],
    }
    lines = [
        f"{el.family} on {el.cell}, degree {el.degree}: {el.n_dofs} DOFs ({el.sobolev})",
        f"classification: {ts.cls}",
        "entity DOFs:",
    ]
    for e in data["entity_dofs"]:
        lines.append(f"  dim {e['dim']} entity {e['index']}: {e['dofs']}")
    lines.append("base transformations:")
    for t in data["transformations"]:
        lines.append(f"  {t['kind']} {tuple(t['entity'])} on DOFs {t['dofs']}")
        for row in t["block"]:
            lines.append("    " + " ".join(f"{v:8.4g}" for v in row))
    return data, "\n".join(lines)


def orient(args) -> tuple[dict, str]:
    mesh = _read_mesh(args.mesh)
    cells = []
    lines = ["cell  kind           packed  binary"]
    for c, (kind, ids) in enumerate(mesh.cells):
        o = compute_orientation(make_topology(kind), ids)
        width = packed_width(kind)
        entry = o.to_dict()
        entry.update(
            {"cell": c, "vertices": list(ids), "packed_binary": format(o.packed, f"0{width}b")}
        )
        cells.append(entry)
        lines.append(f"{c:<5} {str(kind):<14} {o.packed:<7} {entry['packed_binary']}")
        refl = [i for i, f in enumerate(o.edge_reflected) if f]
        lines.append(f"      reflected edges: {refl}")
        if o.face_rotations:
            faces = ", ".join(
                f"({int(f)}, {r})" for f, r in zip(o.face_reflected, o.face_rotations)
            )
            lines.append(f"      faces (reflected, rotations): {faces}")
    return {"cells": cells}, "\n".join(lines)


def dofmap_cmd(args) -> tuple[dict, str]:
    mesh = _read_mesh(args.mesh)
    dm = build_dofmap(mesh, _mesh_elements(mesh, args.family, args.degree), fold=not args.no_fold)
    data = dm.to_dict()
    lines = [f"{dm.n_dofs} global DOFs (permutations folded: {dm.permutations_folded})"]
    lines += [f"cell {c}: {' '.join(map(str, d))}" for c, d in enumerate(data["cells"])]
    return data, "\n".join(lines)


def verify(args) -> tuple[dict, str]:
    mesh = _read_mesh(args.mesh)
    report = check_continuity(
        mesh,
        _mesh_elements(mesh, args.family, args.degree),
        n_points=args.points,
        tol=args.tol,
        transform=not args.no_transform,
    )
    data = report.to_dict()
    status = "PASS" if report.passed else "FAIL"
    n = len(report.facets)
    lines = [
        f"{status}: max jump {report.max_jump:.3e} (tolerance {report.tolerance:.1e}, "
        f"{n} interior facet{'' if n == 1 else 's'})"
    ]
    for f in report.facets:
        lines.append(f"  facet {f.vertices} cells {f.cells}: {f.max_jump:.3e}")
    return data, "\n".join(lines)


def enumerate_refs(args) -> tuple[dict, str]:
    count = count_reference_orderings(args.cell)
    return {"cell": args.cell, "count": count}, str(count)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dofperm", description="Finite element DOF transformations and DOF maps."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p):
        p.add_argument("--format", choices=("json", "table"), default="json")

    def add_element(p, cell=True):
        p.add_argument("--family", required=True, choices=FAMILIES)
        if cell:
            p.add_argument("--cell", required=True)
        p.add_argument("--degree", required=True, type=int)

    p = sub.add_parser("inspect-element", help="show DOF layout and base transformations")
    add_element(p)
    add_format(p)
    p.set_defaults(func=inspect_element)

    p = sub.add_parser("orient", help="per-cell orientation data of a mesh")
    p.add_argument("--mesh", required=True)
    add_format(p)
    p.set_defaults(func=orient)

    p = sub.add_parser("build-dofmap", help="global DOF map of a mesh")
    p.add_argument("--mesh", required=True)
    add_element(p, cell=False)
    p.add_argument("--no-fold", action="store_true", help="do not fold permutations")
    add_format(p)
    p.set_defaults(func=dofmap_cmd)

    p = sub.add_parser("verify", help="check inter-cell continuity")
    p.add_argument("--mesh", required=True)
    add_element(p, cell=False)
    p.add_argument("--points", type=int, default=6, help="sample points per facet")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--no-transform", action="store_true", help="disable transformations")
    add_format(p)
    p.set_defaults(func=verify)

    p = sub.add_parser("enumerate-references", help="count distinct reference orderings")
    p.add_argument(
        "--cell", required=True,
        choices=("triangle", "quadrilateral", "tetrahedron", "hexahedron"),
    )
    add_format(p)
    p.set_defaults(func=enumerate_refs)
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    """Run the command line interface and return the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return int(err.code or 0)
    try:
        data, table = args.func(args)
    except DofPermError as err:
        print(f"error: {err}", file=stderr)
        return 1
    print(table if args.format == "table" else _dump(data), file=stdout)
    if args.command == "verify" and not data["passed"]:
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
