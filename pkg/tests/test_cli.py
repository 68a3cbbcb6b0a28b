import json
from importlib import resources

import jsonschema
import numpy as np
import pytest

from matchdist.cli import main
from matchdist.geometry import BiFunctionSample
from matchdist.io import write_values_csv
from matchdist.mesh import icosphere, write_off
from conftest import xz_sample

MESH = "icosphere:1"
PAIR = ["--mesh", MESH, "--f", "preset:xz", "--g", "preset:affine:1,0.3,1,-0.2"]


def schema(name):
    return json.loads(resources.files("matchdist").joinpath(f"schemas/{name}.schema.json").read_text())


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_help_and_version(capsys):
    assert run(capsys, "--help")[0] == 0
    assert run(capsys, "--version")[0] == 0
    assert run(capsys)[0] == 2


def test_compute(capsys, tmp_path):
    heat = tmp_path / "h.svg"
    logf = tmp_path / "log.csv"
    code, out, _ = run(capsys, "compute", *PAIR, "--res", "5", "--heatmap", str(heat), "--log-csv", str(logf), "--include-log")
    assert code == 0
    data = json.loads(out)
    jsonschema.validate(data, schema("matching_result"))
    assert data["evaluations"] == 25 and len(data["log"]) == 25
    assert heat.read_text().startswith("<?xml")
    assert logf.read_text().splitlines()[0] == "a,b,d_B"


def test_compute_is_byte_deterministic(capsys, tmp_path):
    outs = []
    for i, workers in enumerate(("1", "1", "2")):
        path = tmp_path / f"r{i}.json"
        svg = tmp_path / f"r{i}.svg"
        assert run(capsys, "compute", *PAIR, "--res", "5", "--workers", workers, "--out", str(path), "--heatmap", str(svg))[0] == 0
        outs.append((path.read_bytes(), svg.read_bytes()))
    assert outs[0] == outs[1] == outs[2]


@pytest.mark.parametrize(
    "argv",
    [
        ["compute", *PAIR, "--res", "1"],
        ["verify-theorem", *PAIR, "--tol=-1"],
        ["compute", *PAIR, "--res", "many"],
        ["compute", "--mesh", MESH, "--f", "preset:affine:1,2,3", "--g", "preset:xz"],
        ["compute", "--mesh", MESH, "--f", "preset:nope", "--g", "preset:xz"],
        ["compute", "--mesh", MESH, "--f", "missing.csv", "--g", "preset:xz"],
        ["compute", "--mesh", "missing.off", "--f", "preset:xz", "--g", "preset:xz"],
        ["compute", "--mesh", "icosphere:x", "--f", "preset:xz", "--g", "preset:xz"],
        ["export-epg", "--out", "x.svg"],
        ["export-epg", "--f", "preset:xz", "--line", "2,0", "--out", "x.svg"],
        ["find-special", "--f", "preset:xz"],
        ["frobnicate"],
    ],
)
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_flag_named_in_error(capsys):
    code, _, err = run(capsys, "compute", *PAIR, "--res", "1")
    assert code == 2 and "--res" in err


def test_bad_csv_is_usage_error(capsys, tmp_path):
    bad = tmp_path / "f.csv"
    bad.write_text("vertex_index,f1,f2\n0,1,2\n")
    assert run(capsys, "compute", "--mesh", MESH, "--f", str(bad), "--g", "preset:xz", "--res", "3")[0] == 2


def test_csv_and_off_inputs(capsys, tmp_path):
    m = icosphere(1)
    off = tmp_path / "m.off"
    write_off(m, off)
    fcsv = tmp_path / "f.csv"
    write_values_csv(xz_sample(m), fcsv)
    code, out, _ = run(capsys, "compute", "--mesh", str(off), "--f", str(fcsv), "--g", "preset:xz", "--res", "3")
    assert code == 0 and json.loads(out)["value"] == 0.0


def test_verify_theorem(capsys, tmp_path):
    code, out, _ = run(capsys, "verify-theorem", *PAIR, "--res", "5", "--special-res", "16", "--control-a", "none")
    data = json.loads(out)
    jsonschema.validate(data, schema("report"))
    assert code == (0 if data["passed"] else 1)
    assert data["passed"]


def test_verify_theorem_fail_exit(capsys, tmp_path):
    # CSV values carry no grid, and two b nodes per candidate line are too coarse to reach the lattice max
    m = icosphere(1)
    rng = np.random.default_rng(1)
    paths = []
    for name in "fg":
        path = tmp_path / f"{name}.csv"
        write_values_csv(BiFunctionSample(m, rng.uniform(-1, 1, (m.n_vertices, 2)), name), path)
        paths.append(str(path))
    code, out, err = run(capsys, "verify-theorem", "--mesh", MESH, "--f", paths[0], "--g", paths[1],
                         "--res", "9", "--tol", "0", "--b-res", "2", "--control-a", "none")
    assert code == 1 and "FAIL" in err
    assert json.loads(out)["passed"] is False


def test_verify_position(capsys, tmp_path):
    svg = tmp_path / "p.svg"
    code, out, _ = run(
        capsys, "verify-position", "--mesh", "icosphere:3", "--f", "preset:xz", "--line", "0.5,0", "--tol", "0.05", "--svg", str(svg)
    )
    data = json.loads(out)
    jsonschema.validate(data, schema("report"))
    assert code == 0 and data["passed"]
    assert svg.exists()


def test_verify_position_fail(capsys, tmp_path):
    code, out, _ = run(capsys, "verify-position", "--mesh", "icosphere:2", "--f", "preset:affine:1,0.5,1,0.5",
                       "--contours", str(export(capsys, tmp_path)), "--line", "0.4,0.1", "--mode", "coordinate")
    assert code == 1 and not json.loads(out)["passed"]


def export(capsys, tmp_path):
    path = tmp_path / "f.json"
    assert run(capsys, "export-epg", "--f", "preset:xz", "--out", str(tmp_path / "f.svg"), "--json", str(path))[0] == 0
    jsonschema.validate(json.loads(path.read_text()), schema("contours"))
    return path


def test_export_epg(capsys, tmp_path):
    path = export(capsys, tmp_path)
    svg = tmp_path / "both.svg"
    code, _, _ = run(capsys, "export-epg", "--contours", str(path), "--g", "preset:affine:2.1,2,0.6,1.8", "--line", "0.5,0", "--out", str(svg))
    assert code == 0
    assert 'id="contour-g:arc-upper"' in svg.read_text()


def test_find_special(capsys, tmp_path):
    svg = tmp_path / "s.svg"
    code, out, _ = run(capsys, "find-special", "--f", "preset:xz", "--g", "preset:affine:2.1,2,0.6,1.8", "--res", "16", "--svg", str(svg))
    lines = out.splitlines()
    assert code == 0 and lines[0] == "a,b,c1,c2,ids,residual" and len(lines) > 1
    assert svg.exists()


def test_find_special_contours(capsys, tmp_path):
    path = export(capsys, tmp_path)
    assert run(capsys, "find-special", "--contours", str(path), str(path), "--b-range=-1,1", "--res", "8")[0] == 2
    assert run(capsys, "find-special", "--contours", str(path), str(path))[0] == 2


def test_boundary_check(capsys):
    code, out, _ = run(capsys, "boundary-check", *PAIR)
    data = json.loads(out)
    jsonschema.validate(data, schema("report"))
    assert code == 0 and data["passed"]


def test_property_suite(capsys):
    code, out, _ = run(capsys, "property-suite", *PAIR, "--quick")
    data = json.loads(out)
    jsonschema.validate(data, schema("report"))
    assert code == 0 and data["passed"]
