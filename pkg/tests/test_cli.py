import json
import subprocess
import sys

import pytest

from vsi import cli
from vsi.catalog import FAMILIES
from vsi.errors import InvariantViolation
from vsi.io import (
    FileFormatError,
    FrameFile,
    MetricFile,
    dumps,
    load_frame_file,
    load_metric_file,
    metric_file_from_json,
)


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def vsi3_files(tmp_path, capsys):
    assert run(["builtin", "vsi3", "--out", tmp_path], capsys)[0] == 0
    return tmp_path / "metric.json", tmp_path / "frame.json"


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_builtin_round_trip_is_byte_identical(name, tmp_path, capsys):
    code, out, _ = run(["builtin", name, "--out", tmp_path], capsys)
    assert code == 0 and "wrote metric" in out
    m_text = (tmp_path / "metric.json").read_text()
    f_text = (tmp_path / "frame.json").read_text()
    mf = load_metric_file(tmp_path / "metric.json")
    ff = load_frame_file(tmp_path / "frame.json", mf.ctx)
    assert dumps(mf.to_json()) == m_text
    assert dumps(ff.to_json()) == f_text
    assert dumps(MetricFile.from_metric(mf.metric()).to_json()) == m_text
    assert dumps(FrameFile.from_frame(ff.frame(mf.metric())).to_json()) != ""
    expected = json.loads((tmp_path / "expected.json").read_text())
    assert expected["family"] == name


def test_builtin_set_and_bad_set(tmp_path, capsys):
    code, _, _ = run(["builtin", "vsi1", "--set", "a=u", "--set", "b=2", "--out", tmp_path], capsys)
    assert code == 0
    assert json.loads((tmp_path / "expected.json").read_text())["bindings"] == {"a": "u", "b": "2"}
    assert run(["builtin", "vsi1", "--set", "oops", "--out", tmp_path], capsys)[0] == 2
    assert run(["builtin", "no-such", "--out", tmp_path], capsys)[0] == 2


def test_vsi_command(vsi3_files, capsys):
    metric, frame = vsi3_files
    code, out, _ = run(["vsi", metric, "--frame", frame], capsys)
    assert code == 0
    assert "VSI_3 certified; refuted at order 4" in out
    assert "order 4: refuted" in out and "lambda = (1, 2)" in out
    code, out, _ = run(["vsi", metric, "--frame", frame, "--json", "--order", "2"], capsys)
    data = json.loads(out)
    assert data["results"]["verdict"]["certified_through"] == 2
    assert data["command"]["order"] == 2
    assert "seconds" in data["stats"] and data["convention"]


def test_invariants_command(vsi3_files, capsys):
    metric, _ = vsi3_files
    code, out, _ = run(["invariants", metric, "--json"], capsys)
    assert code == 0
    norms = json.loads(out)["results"]["self_norms"]
    assert norms["self_norm(4)"] == "331776*a^2"
    assert norms["self_norm(3)"] == "0"


def test_bw_command(vsi3_files, capsys):
    metric, frame = vsi3_files
    code, out, _ = run(["bw", metric, "--frame", frame, "--tensor", "metric", "--json"], capsys)
    assert code == 0
    assert json.loads(out)["results"]["cells"] == [{"weight": [0, 0], "count": 4}]
    code, out, _ = run(["bw", metric, "--frame", frame], capsys)
    assert "b2\\b1" in out and "B1=n" in out
    assert run(["bw", metric, "--frame", frame, "--tensor", "torsion"], capsys)[0] == 2


def test_bw_diagram_layout():
    lines = cli.bw_diagram([{"weight": [1, -1], "count": 2}, {"weight": [-1, 0], "count": 1}], 2)
    assert lines[0].split() == ["b2\\b1", "-1", "0", "1"]
    assert lines[1].split() == ["0", "1", ".", "."]
    assert lines[2].split() == ["-1", ".", ".", "2"]
    assert cli.bw_diagram([], 2) == ["(no nonzero components)"]


def test_classify_command(vsi3_files, capsys):
    metric, frame = vsi3_files
    code, out, _ = run(["classify", metric, "--frame", frame, "--json"], capsys)
    assert code == 0
    assert json.loads(out)["results"]["flags"]["walker_plane"] is True


def test_oracle_command(vsi3_files, capsys):
    metric, _ = vsi3_files
    code, out, _ = run(["oracle", metric, "--order", "2", "--points", "3"], capsys)
    assert code == 0 and "3 points" in out and "0 mismatches" in out


def test_input_errors_exit_2(tmp_path, vsi3_files, capsys):
    metric, frame = vsi3_files
    bad = tmp_path / "bad.json"
    bad.write_text('{"coordinates": ["x"], "signature": [0, 1], "metric": [["1 +"]]}')
    code, _, err = run(["invariants", bad], capsys)
    assert code == 2 and "metric[0][0]" in err
    assert run(["vsi", metric], capsys)[0] == 2
    assert run(["invariants", tmp_path / "missing.json"], capsys)[0] == 2
    data = json.loads(frame.read_text())
    data["frame"]["n1"][1] = "2"
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps(data))
    code, _, err = run(["vsi", metric, "--frame", broken], capsys)
    assert code == 2 and "g(l1, n1)" in err


def test_resource_cap_exit_3(vsi3_files, capsys, monkeypatch):
    metric, _ = vsi3_files
    monkeypatch.setenv("VSI_COMPONENT_CAP", "300")
    code, _, err = run(["invariants", metric], capsys)
    assert code == 3 and "resource limit" in err


def test_invariant_violation_exit_4(vsi3_files, capsys, monkeypatch):
    metric, frame = vsi3_files

    def broken(*a, **k):
        raise InvariantViolation("injected")

    monkeypatch.setattr(cli, "vsi_verdict", broken)
    code, _, err = run(["vsi", metric, "--frame", frame], capsys)
    assert code == 4 and "injected" in err


def test_lower_triangular_metric_file():
    mf = metric_file_from_json(
        {"coordinates": ["x", "y"], "signature": [0, 2], "metric": [["1"], ["0", "x^2"]]}
    )
    assert mf.to_json()["metric"] == [["1", "0"], ["0", "x^2"]]
    with pytest.raises(FileFormatError, match="metric"):
        metric_file_from_json({"coordinates": ["x", "y"], "signature": [0, 2], "metric": [["1", "0"]]})


def test_module_entry_point(vsi3_files):
    metric, frame = vsi3_files
    proc = subprocess.run(
        [sys.executable, "-m", "vsi", "vsi", str(metric), "--frame", str(frame), "--order", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "VSI_1 certified" in proc.stdout
