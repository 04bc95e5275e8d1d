import io
import json

import pytest

from dofperm.cli import run
from dofperm.mesh import mesh_to_dict
from oracles import hex2, quad2, tri4


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def mesh_file(tmp_path):
    def write(mesh, name="mesh.json"):
        path = tmp_path / name
        path.write_text(json.dumps(mesh_to_dict(mesh)))
        return str(path)

    return write


def test_enumerate_hexahedron():
    code, out, _ = call("enumerate-references", "--cell", "hexahedron", "--format", "table")
    assert code == 0 and out.strip() == "501"
    code, out, _ = call("enumerate-references", "--cell", "quadrilateral")
    assert json.loads(out) == {"cell": "quadrilateral", "count": 3}


def test_inspect_p3():
    code, out, _ = call("inspect-element", "--family", "lagrange", "--cell", "triangle",
                        "--degree", "3")
    assert code == 0
    data = json.loads(out)
    edge0 = data["transformations"][0]
    assert edge0["dofs"] == [3, 4] and edge0["block"] == [[0.0, 1.0], [1.0, 0.0]]
    assert data["classification"] == "permutation"


def test_inspect_is_deterministic():
    args = ("inspect-element", "--family", "nedelec1", "--cell", "tetrahedron", "--degree", "2")
    assert call(*args)[1] == call(*args)[1]


def test_orient(mesh_file):
    code, out, _ = call("orient", "--mesh", mesh_file(tri4()))
    assert code == 0
    cells = json.loads(out)["cells"]
    assert [c["packed"] for c in cells] == [7, 0, 6, 1]
    assert cells[2]["packed_binary"] == "110"


def test_orient_hex_table(mesh_file):
    code, out, _ = call("orient", "--mesh", mesh_file(hex2()), "--format", "table")
    assert code == 0 and "536878208" in out


def test_build_dofmap(mesh_file):
    code, out, _ = call("build-dofmap", "--mesh", mesh_file(tri4()), "--family", "lagrange",
                        "--degree", "3")
    data = json.loads(out)
    assert code == 0 and data["n_dofs"] == 28 and data["permutations_folded"]


def test_verify_pass_and_control(mesh_file):
    path = mesh_file(quad2())
    base = ("verify", "--mesh", path, "--family", "raviart_thomas", "--degree", "2")
    code, out, _ = call(*base)
    assert code == 0 and json.loads(out)["passed"]
    code, out, _ = call(*base, "--no-transform")
    assert code == 1 and not json.loads(out)["passed"]


def test_verify_empty(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text('{"gdim": 2, "vertices": [], "cells": []}')
    code, out, _ = call("verify", "--mesh", str(path), "--family", "lagrange", "--degree", "1")
    assert code == 0 and json.loads(out)["passed"]


def test_domain_error_exit_1():
    code, out, err = call("inspect-element", "--family", "lagrange", "--cell", "triangle",
                          "--degree", "11")
    assert code == 1 and out == "" and "unsupported" in err


def test_missing_file_exit_1(tmp_path):
    code, _, err = call("orient", "--mesh", str(tmp_path / "nope.json"))
    assert code == 1 and "cannot read" in err


def test_malformed_mesh_exit_1(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{")
    code, _, err = call("orient", "--mesh", str(path))
    assert code == 1 and "line 1" in err


@pytest.mark.parametrize("argv", [[], ["bogus"], ["inspect-element", "--family", "lagrange"],
                                  ["enumerate-references", "--cell", "prism"]])
def test_usage_error_exit_2(argv, capsys):
    code, _, _ = call(*argv)
    assert code == 2
