"""Table files, deterministic reports, CLI behavior and exit codes."""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from billiards.cli import main
from billiards.errors import BounceBudgetExceededError, InputError
from billiards.geometry import Polytope
from billiards.io import (
    bundled_table_names,
    dumps_json,
    format_float,
    load_table,
    save_table,
    table_from_data,
    validate_report_data,
)
from billiards.smooth import Ellipse
from billiards.surface import SurfaceMesh
from billiards.tables import BUILDERS


# -- file format -------------------------------------------------------------

def test_every_bundled_table_loads(tmp_path):
    names = bundled_table_names()
    assert set(names) == set(BUILDERS)
    for name in names:
        load_table(name)


def test_polytope_roundtrip(tmp_path):
    poly = Polytope.convex_polygon([[0.0, 0.0], [2.0, 0.0], [0.5, 1.5]])
    path = tmp_path / "tri.json"
    save_table(poly, path)
    again = load_table(path)
    assert isinstance(again, Polytope)
    assert np.allclose(again.normals, poly.normals, atol=1e-15)
    assert np.allclose(again.offsets, poly.offsets, atol=1e-15)
    assert np.allclose(again.vertices, poly.vertices, atol=1e-15)
    assert again.facet_vertices == poly.facet_vertices


def test_surface_roundtrip(tmp_path):
    mesh = SurfaceMesh.cube(1.0)
    path = tmp_path / "cube.json"
    save_table(mesh, path)
    again = load_table(path)
    assert isinstance(again, SurfaceMesh)
    assert np.allclose(again.vertices, mesh.vertices)
    assert again.faces == mesh.faces


def test_smooth_roundtrip(tmp_path):
    path = tmp_path / "oval.json"
    save_table(Ellipse(2.0, 1.0), path)
    again = load_table(path)
    assert isinstance(again, Ellipse)
    assert again.a == 2.0 and again.b == 1.0


def test_normals_normalized_on_load_preserving_geometry():
    data = {
        "dim": 2,
        "halfspaces": [
            {"normal": [3.0, 0.0], "offset": 3.0},
            {"normal": [-5.0, 0.0], "offset": 0.0},
            {"normal": [0.0, 2.0], "offset": 2.0},
            {"normal": [0.0, -7.0], "offset": 0.0},
        ],
    }
    poly = table_from_data(data)
    assert np.allclose(np.linalg.norm(poly.normals, axis=1), 1.0, atol=1e-15)
    assert poly.contains([0.5, 0.5])
    assert not poly.contains([1.5, 0.5])


@pytest.mark.parametrize(
    "payload",
    [
        {"dim": 2},  # missing halfspaces
        {"halfspaces": [{"normal": [1, 0], "offset": 1}]},  # missing dim
        {"smooth2d": {"kind": "hyperbola"}},  # unknown kind
        {"smooth2d": {"kind": "circle", "a": 2.0}},  # wrong parameter
        {"surface": {"vertices": [[0, 0, 0]]}},  # missing faces
        {"dim": 2, "halfspaces": [], "extra": 1},  # extra key
    ],
)
def test_schema_rejects_malformed_tables(payload):
    with pytest.raises(InputError):
        table_from_data(payload)


def test_mismatched_facet_vertices_rejected():
    square = Polytope.box((0.0, 0.0), (1.0, 1.0))
    data = {
        "dim": 2,
        "halfspaces": [
            {"normal": h.normal.tolist(), "offset": h.offset}
            for h in square.halfspaces
        ],
        "vertices": square.vertices.tolist(),
        "facet_vertices": [[0, 1]] * 4,  # wrong incidences
    }
    with pytest.raises(InputError):
        table_from_data(data)


# -- deterministic serialization ---------------------------------------------

def test_float_formatting_has_17_significant_digits():
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(1.0) == "1"
    assert format_float(2.0 / 3.0) == "0.66666666666666663"
    # the printed form round-trips to the identical double
    for x in (math.pi, 1e-300, 3.0e17, -0.4973):
        assert float(format_float(x)) == x


def test_dumps_json_is_deterministic_and_reparses():
    payload = {
        "b": [1.0, 0.5, float("inf")],
        "a": {"nested": [1, 2, 3], "flag": True, "none": None},
    }
    one = dumps_json(payload)
    two = dumps_json(payload)
    assert one == two
    parsed = json.loads(one)
    assert parsed["b"][2] == "inf"
    assert parsed["a"]["nested"] == [1, 2, 3]


def test_dumps_json_refuses_nan():
    with pytest.raises(InputError):
        dumps_json({"x": float("nan")})


# -- CLI ---------------------------------------------------------------------

def _run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out


def test_cli_simulate_square_example(tmp_path, capsys):
    csv_path = tmp_path / "run.csv"
    code, out = _run_cli(
        capsys, "simulate", "square", "0.25,0", "0,1", "4",
        "--csv", str(csv_path),
    )
    assert code == 0
    report = json.loads(out)
    validate_report_data(report)
    assert report["result"]["n_bounces"] == 4
    rows = csv_path.read_text().strip().splitlines()
    assert rows[0] == "t,x1,x2,event"
    bounce_rows = [r for r in rows[1:] if r.split(",")[-1]
                   not in ("start", "end")]
    assert len(bounce_rows) == 4


def test_cli_output_is_byte_identical(capsys):
    code1, out1 = _run_cli(capsys, "check-alcove", "triangle_G2")
    code2, out2 = _run_cli(capsys, "check-alcove", "triangle_G2")
    assert code1 == code2 == 0
    assert out1 == out2


def test_cli_out_flag_mirrors_stdout(tmp_path, capsys):
    out_path = tmp_path / "report.json"
    code, out = _run_cli(
        capsys, "check-alcove", "rectangle", "--out", str(out_path)
    )
    assert code == 0
    assert out_path.read_text() == out
    report = json.loads(out)
    assert report["result"]["is_alcove"] is True
    assert report["result"]["label"] == "A1~ x A1~"


def test_cli_check_alcove_reports_failures(capsys):
    code, out = _run_cli(capsys, "check-alcove", "triangle_nonalcove")
    assert code == 0
    result = json.loads(out)["result"]
    assert result["is_alcove"] is False
    assert result["label"] is None
    assert result["failures"]
    first = result["failures"][0]
    assert math.isclose(
        first["nearest_angle"], math.pi / first["nearest_m"], abs_tol=1e-12
    )


def test_cli_strict_corner_exit_code(capsys):
    code, _ = _run_cli(
        capsys, "simulate", "square", "0.25,0.25", "1,1", "3",
        "--policy", "strict",
    )
    assert code == 3


def test_cli_foldgroup_passes_corners(capsys):
    code, out = _run_cli(
        capsys, "simulate", "triangle_A2", "0.5,0.2", "0,1", "3",
        "--policy", "foldgroup",
    )
    assert code == 0
    kinds = {e["kind"] for e in json.loads(out)["result"]["events"]}
    assert "corner" in kinds


def test_cli_input_errors_exit_2(tmp_path, capsys):
    assert _run_cli(capsys, "simulate", "nope", "0,0", "1,1", "1")[0] == 2
    assert _run_cli(capsys, "simulate", "square", "5,5", "1,1", "1")[0] == 2
    assert _run_cli(capsys, "simulate", "square", "0.5,0.5", "1,0", "x")[0] == 2
    svg = tmp_path / "x.svg"
    assert _run_cli(
        capsys, "simulate", "simplex_A3", "0.1,0.05,0.02", "1,0.3,0.2", "1",
        "--svg", str(svg),
    )[0] == 2
    assert not svg.exists()


def test_cli_budget_exit_4(monkeypatch, capsys):
    import billiards.cli as cli_module

    def explode(*args, **kwargs):
        raise BounceBudgetExceededError("budget gone")

    monkeypatch.setattr(cli_module, "simulate", explode)
    code, _ = _run_cli(capsys, "simulate", "square", "0.5,0.5", "1,0", "1")
    assert code == 4


def test_cli_vertex_hit_exit_3(capsys):
    code, _ = _run_cli(
        capsys, "surface", "cube",
        "--geodesic", "1", "0.5,0.5,1", "1,1,0", "2",
    )
    assert code == 3


def test_cli_corner_single_and_sweep(tmp_path, capsys):
    code, out = _run_cli(capsys, "corner", "0.7853981633974483")
    assert code == 0
    result = json.loads(out)["result"]
    assert result["m"] == 4
    assert result["continuous"] is True

    csv_path = tmp_path / "gaps.csv"
    code, out = _run_cli(
        capsys, "corner", "--sweep", "0.2", "3.0", "50",
        "--csv", str(csv_path),
    )
    assert code == 0
    rows = csv_path.read_text().strip().splitlines()
    assert rows[0] == "alpha,m,beta,gap,continuous"
    assert len(rows) == 51


def test_cli_corner_svg(tmp_path, capsys):
    svg_path = tmp_path / "fan.svg"
    code, _ = _run_cli(
        capsys, "corner", "0.9", "--svg", str(svg_path)
    )
    assert code == 0
    text = svg_path.read_text()
    assert text.startswith("<svg")
    assert "polyline" in text


def test_cli_surface_report(capsys):
    code, out = _run_cli(capsys, "surface", "tetra_regular", "--report")
    assert code == 0
    result = json.loads(out)["result"]
    assert abs(result["gauss_bonnet_error"]) < 1e-9
    assert result["orbifold"]["orders"] == [2, 2, 2, 2]

    code, out = _run_cli(capsys, "surface", "cube", "--report")
    assert code == 0
    result = json.loads(out)["result"]
    assert result["orbifold"]["is_orbifold"] is False


def test_cli_surface_geodesic_with_csv(tmp_path, capsys):
    csv_path = tmp_path / "geo.csv"
    # the direction starts with a bare minus sign: the parser must read it
    # as a value, not an option
    code, out = _run_cli(
        capsys, "surface", "disphenoid_456",
        "--geodesic", "0",
        "3.1622776601683795,2.4494897427831783,1.0540925533894598",
        "-4.7434164902525691,0.57409915846480752,1.3340858878835351",
        "30",
        "--csv", str(csv_path),
    )
    assert code == 0
    result = json.loads(out)["result"]
    assert result["n_crossings"] > 0
    assert result["straightness_residual"] < 1e-10
    rows = csv_path.read_text().strip().splitlines()
    assert rows[0] == "t,x1,x2,x3,event"
    assert rows[1].endswith("start")
    assert rows[-1].endswith("end")


def test_cli_surface_disphenoid_mode(capsys):
    code, out = _run_cli(capsys, "surface", "disphenoid_456", "--disphenoid")
    assert code == 0
    result = json.loads(out)["result"]
    assert result["is_disphenoid"] is True
    assert result["all_cone_angles_pi"] is True


def test_cli_smooth_laws_and_converge(capsys):
    code, out = _run_cli(
        capsys, "smooth", "circle", "--laws", "--alphas", "0.04,0.02"
    )
    assert code == 0
    result = json.loads(out)["result"]
    assert result["chord_constant"] > 1.9

    code, out = _run_cli(
        capsys, "smooth", "ellipse", "--converge", "--alphas", "0.04,0.02,0.01"
    )
    assert code == 0
    result = json.loads(out)["result"]
    assert result["monotone_decreasing"] is True
    assert len(result["rows"]) == 3


def test_cli_simulate_svg(tmp_path, capsys):
    svg_path = tmp_path / "run.svg"
    code, _ = _run_cli(
        capsys, "simulate", "square", "0.5,0", "1,1", "3",
        "--svg", str(svg_path),
    )
    assert code == 0
    assert svg_path.read_text().startswith("<svg")


def test_cli_every_report_validates_against_schema(tmp_path, capsys):
    invocations = [
        ["simulate", "square", "0.5,0", "1,1", "3"],
        ["simulate", "triangle_C2", "0.3,0.3", "0.6,0.8", "5", "--unfold"],
        ["check-alcove", "triangle_A2"],
        ["corner", "1.1"],
        ["corner", "--sweep", "0.3", "2.0", "10"],
        ["surface", "tetra_regular", "--report"],
        ["surface", "disphenoid_456", "--disphenoid"],
        ["smooth", "circle", "--laws", "--alphas", "0.04,0.02"],
    ]
    for argv in invocations:
        code, out = _run_cli(capsys, *argv)
        assert code == 0, argv
        validate_report_data(json.loads(out))


def test_module_entrypoint_runs_as_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "billiards.cli", "check-alcove", "square"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["label"] == "A1~ x A1~"


def test_env_tolerance_override_applies_at_import():
    code = (
        "from billiards.config import TOL; print(TOL.active)"
    )
    proc = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True,
        text=True,
        env={"PATH": "/usr/bin:/bin", "BILLIARDS_EPS": "1e-6"},
    )
    assert proc.returncode == 0
    assert float(proc.stdout.strip()) == 1e-6
