import csv
import io
import json

import jsonschema
import pytest

from ealab.cli import main

try:
    from importlib.resources import files as resource_files
except ImportError:  # pragma: no cover
    from importlib_resources import files as resource_files


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def load_schema(name):
    return json.loads(resource_files("ealab.schemas").joinpath(f"{name}.schema.json")
                      .read_text())


def test_enumerate_segment_has_two_states(capsys):
    code, out = run(capsys, "enumerate", "--lattice", "segment:8",
                    "--dist", "gaussian:0,1", "--seed", "7")
    assert code == 0
    doc = json.loads(out)
    assert doc["report"]["count"] == 2
    jsonschema.validate(doc, load_schema("groundstates"))


def test_verify_suite_exit_zero(capsys):
    code, out = run(capsys, "verify", "--suite", "parity", "--trials", "10",
                    "--seed", "1")
    assert code == 0
    doc = json.loads(out)
    assert doc["report"]["passed"] is True
    jsonschema.validate(doc, load_schema("verify"))


def test_unknown_command_exits_two():
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2


def test_unknown_suite_exits_two(capsys):
    code, _ = run(capsys, "verify", "--suite", "bogus")
    assert code == 2


def test_identical_config_identical_bytes(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["sample", "--lattice", "box:3,3", "--dist", "gaussian:0,1",
                     "--seed", "5", "-o", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_build_report_envelope(capsys):
    code, out = run(capsys, "build", "--lattice", "box:4,3")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == "ealab/lattice@1"
    assert len(doc["fingerprint"]) == 16
    assert len(doc["inputs_hash"]) == 40
    jsonschema.validate(doc, load_schema("lattice"))
    assert len(doc["report"]["edges"]) == 17


def test_solve_command(capsys):
    code, out = run(capsys, "solve", "--lattice", "box:3,3",
                    "--dist", "gaussian:0,1", "--seed", "3")
    assert code == 0
    doc = json.loads(out)
    assert doc["report"]["flip_partner"] is not None
    jsonschema.validate(doc, load_schema("solve"))


def test_critical_csv_columns(capsys):
    code, out = run(capsys, "critical", "--lattice", "box:3,3",
                    "--dist", "gaussian:0,1", "--seed", "3", "--all",
                    "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["edge", "J_e", "C_e", "F_e", "S_e", "S_e_x", "S_e_y",
                       "supersat", "droplet_size"]
    assert len(rows) == 1 + 12


def test_critical_single_edge_json(capsys):
    code, out = run(capsys, "critical", "--lattice", "box:3,3",
                    "--dist", "gaussian:0,1", "--seed", "3", "--edge", "0,1")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema("critical"))
    rep = doc["report"]["reports"][0]
    assert abs(rep["F_e"] - abs(rep["J_e"] - rep["C_e"])) < 1e-9


def test_interface_command(capsys):
    code, out = run(capsys, "interface", "--lattice", "halfplane_strip:10,6",
                    "--dist", "gaussian:0,1", "--seed", "21")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema("interface"))
    assert doc["report"]["sanity"]["loops"] == 0


def test_rungs_command(capsys):
    code, out = run(capsys, "rungs", "--lattice", "box:8,6",
                    "--dist", "gaussian:0,1", "--seed", "10",
                    "--strategy", "antipodal",
                    "--box-j", "6,4@1,1", "--box-l", "8,6@0,0",
                    "--maxlen", "5", "--edge", "0,1")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema("rungs"))
    assert doc["report"]["max_len"] == 5


def test_walls_command_with_csv(tmp_path, capsys):
    csv_path = tmp_path / "walls.csv"
    code, out = run(capsys, "walls", "--lattice", "halfplane_strip:12,6",
                    "--dist", "gaussian:0,1", "--seed", "2", "--n", "1..3",
                    "--k", "0", "--trials", "30", "--csv", str(csv_path))
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema("walls"))
    rows = list(csv.reader(csv_path.open()))
    assert rows[0] == ["n", "k", "mean", "stderr", "trials"]
    assert len(rows) == 4


def test_estimate_command(capsys):
    code, out = run(capsys, "estimate", "--lattice", "box:3,3",
                    "--dist", "gaussian:0,1", "--seed", "9",
                    "--event", "sigma_e_plus", "--trials", "40")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema("estimate"))
    assert 0.0 <= doc["report"]["estimate"] <= 1.0


def test_estimate_unknown_event_exits_two(capsys):
    code, _ = run(capsys, "estimate", "--lattice", "box:3,3",
                  "--dist", "gaussian:0,1", "--seed", "9",
                  "--event", "wat", "--trials", "5")
    assert code == 2


def test_render_data_scene_validates(capsys):
    code, out = run(capsys, "render-data", "--lattice", "halfplane_strip:10,6",
                    "--dist", "gaussian:0,1", "--seed", "21",
                    "--scene", "interface")
    assert code == 0
    scene = json.loads(out)
    jsonschema.validate(scene, load_schema("scene"))
    # every wall dual edge crosses an interface primal edge
    verts = [tuple(v) for v in scene["lattice"]["vertices"]]
    iface = {frozenset((verts[u], verts[v])) for u, v in scene["interface_edges"]}
    for wall in scene["walls"]:
        for (x1, y1), (x2, y2) in wall["dual_edges"]:
            mx, my = (x1 + x2) / 2, (y1 + y2) / 2
            if x1 == x2:  # vertical dual edge crosses horizontal primal edge
                primal = frozenset(((mx - 0.5, my), (mx + 0.5, my)))
            else:
                primal = frozenset(((mx, my - 0.5), (mx, my + 0.5)))
            assert primal in iface


def test_render_data_lattice_scene(capsys):
    code, out = run(capsys, "render-data", "--lattice", "box:3,3",
                    "--dist", "gaussian:0,1", "--seed", "1", "--scene", "lattice")
    assert code == 0
    scene = json.loads(out)
    jsonschema.validate(scene, load_schema("scene"))
    assert scene["walls"] == [] and scene["interface_edges"] == []
