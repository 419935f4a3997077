import json

import pytest

from src.cli.main import EXIT_DESTABILIZED, EXIT_ERROR, EXIT_OK, EXIT_USAGE, run


@pytest.fixture
def square_file(tmp_path):
    path = tmp_path / "square.json"
    path.write_text(json.dumps({"vertices": [[0, 1, 0, 1], [1, 1, 0, 1], [1, 1, 1, 1], [0, 1, 1, 1]]}))
    return path


@pytest.fixture
def heavy_left_file(tmp_path):
    path = tmp_path / "heavy.json"
    path.write_text(json.dumps({
        "vertices": [[0, 1, 0, 1], [1, 1, 0, 1], [1, 1, 1, 1], [0, 1, 1, 1]],
        "edge_weights": [1, 1, 1, 5],
    }))
    return path


def test_unstable_weights_exit_destabilized(capsys):
    """A destabilising direction gives exit code 2."""
    assert run(["git-torus", "classify", "--weights", "[[1],[2]]"]) == EXIT_DESTABILIZED
    payload = json.loads(capsys.readouterr().out)
    assert payload["command"] == "git-torus classify"
    assert payload["results"]["class"] == "unstable"


def test_usage_errors(capsys):
    """Unknown families and missing arguments are usage errors."""
    assert run(["nonsense"]) == EXIT_USAGE
    assert run(["ruled", "futaki", "--m", "3"]) == EXIT_USAGE
    assert run(["git-torus", "classify", "--bogus"]) == EXIT_USAGE


def test_missing_input_is_an_error(capsys):
    """git-torus needs weights or a file."""
    assert run(["git-torus", "classify"]) == EXIT_ERROR
    payload = json.loads(capsys.readouterr().out)
    assert payload["results"]["error"]["error"] == "kstab_error"


def test_thresholds(capsys):
    """Threshold report without timings."""
    assert run(["ruled", "thresholds", "--no-timings"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert "timings" not in payload
    assert 5.027 < payload["results"]["k2"]["value"] < 5.028


def test_window_is_a_destabilizer(capsys):
    """A nonempty c-window exits with 2."""
    assert run(["ruled", "thresholds", "--m", "19"]) == EXIT_DESTABILIZED
    assert run(["ruled", "thresholds", "--m", "10"]) == EXIT_OK


def test_ruled_futaki(capsys):
    """The displayed whole-surface value at m = 3, c = 1."""
    assert run(["ruled", "futaki", "--m", "3", "--c", "1"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["results"]["relative_futaki"]["exact"] == "125/33"


def test_ruled_domain_error(capsys):
    """c outside (0, m) is reported as an error."""
    assert run(["ruled", "futaki", "--m", "3", "--c", "4"]) == EXIT_ERROR
    payload = json.loads(capsys.readouterr().out)
    assert payload["results"]["error"]["error"] == "domain_error"


def test_polygon_check_on_square(square_file, capsys):
    """The square is grid-certified."""
    assert run(["polygon", "check", str(square_file), "--resolution", "2"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["results"]["status"] == "grid-certified"
    assert payload["results"]["witness_file"] is None


def test_polygon_check_writes_witness(heavy_left_file, tmp_path, capsys):
    """A destabilised polygon writes its witness next to the input by default."""
    assert run(["polygon", "check", str(heavy_left_file), "--resolution", "2"]) == EXIT_DESTABILIZED
    witness = tmp_path / "heavy.witness.json"
    assert witness.exists()
    assert json.loads(witness.read_text())["values"]


def test_report_to_file(square_file, tmp_path, capsys):
    """--out redirects the report."""
    out = tmp_path / "report.json"
    assert run(["polygon", "extremal-affine", str(square_file), "--out", str(out)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["command"] == "polygon extremal-affine"


def test_sample_writes_csv(tmp_path, capsys):
    """ruled sample writes the CSV and prints the report."""
    out = tmp_path / "profile.csv"
    assert run(["ruled", "sample", "--m", "1", "--n", "4", "--type", "smooth", "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "tau,phi,S"
    assert len(lines) == 5
    assert json.loads(capsys.readouterr().out)["command"] == "ruled sample"
