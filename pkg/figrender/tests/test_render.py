import json
import shutil
from pathlib import Path

import pytest

from figrender import (
    EmptyData,
    MissingColumn,
    PanelSpec,
    RenderError,
    load_manifest,
    render_all,
    render_panel,
)
from figrender.cli import main

HERE = Path(__file__).parent
DATA = HERE / "data"
GOLDEN = HERE / "golden"


@pytest.fixture
def workdir(tmp_path):
    shutil.copytree(DATA, tmp_path / "data")
    return tmp_path


def test_golden_svgs_byte_identical(workdir):
    specs = load_manifest(workdir / "data" / "manifest.json")
    render_all(specs, workdir)
    for spec in specs:
        got = (workdir / spec.output_path).read_bytes()
        want = (GOLDEN / Path(spec.output_path).name).read_bytes()
        assert got == want, f"{spec.output_path} differs from golden"


def test_rendering_twice_is_stable(workdir):
    spec = load_manifest(workdir / "data" / "manifest.json")[0]
    first = render_panel(spec, workdir).read_bytes()
    assert render_panel(spec, workdir).read_bytes() == first


def test_index_lists_every_output(workdir):
    specs = load_manifest(workdir / "data" / "manifest.json")
    index = render_all(specs, workdir)
    text = index.read_text()
    for spec in specs:
        assert spec.output_path in text


def test_manifest_of_one(workdir):
    spec = PanelSpec(csv_path="data/fragments_freq.csv", x_column="n",
                     y_columns=["freq"], output_path="one.svg")
    index = render_all([spec], workdir)
    assert (workdir / "one.svg").exists()
    assert index.exists()


def test_missing_column(workdir):
    spec = PanelSpec(csv_path="data/fragments_freq.csv", x_column="n",
                     y_columns=["no_such_column"], output_path="x.svg")
    with pytest.raises(MissingColumn) as err:
        render_panel(spec, workdir)
    assert "no_such_column" in str(err.value)


def test_empty_csv(workdir):
    empty = workdir / "data" / "empty.csv"
    empty.write_text("# comment only\nn,freq\n")
    spec = PanelSpec(csv_path="data/empty.csv", x_column="n",
                     y_columns=["freq"], output_path="x.svg")
    with pytest.raises(EmptyData):
        render_panel(spec, workdir)


def test_missing_csv_file_named_in_error(workdir):
    spec = PanelSpec(csv_path="data/never_written.csv", x_column="n",
                     y_columns=["freq"], output_path="x.svg")
    with pytest.raises(RenderError) as err:
        render_panel(spec, workdir)
    assert "never_written.csv" in str(err.value)


def test_render_all_aggregates_failures(workdir):
    good = PanelSpec(csv_path="data/fragments_freq.csv", x_column="n",
                     y_columns=["freq"], output_path="good.svg")
    bad = PanelSpec(csv_path="data/missing.csv", x_column="n",
                    y_columns=["freq"], output_path="bad.svg")
    with pytest.raises(RenderError) as err:
        render_all([good, bad], workdir)
    assert "missing.csv" in str(err.value)
    assert (workdir / "good.svg").exists()  # successes still rendered


def test_unknown_manifest_key_rejected(workdir):
    bad = workdir / "bad.json"
    bad.write_text(json.dumps([{"csv_path": "x.csv", "x_column": "n",
                                "y_columns": ["y"], "outputPath": "z.svg"}]))
    with pytest.raises(RenderError):
        load_manifest(bad)


def test_cli_round_trip(workdir):
    rc = main([str(workdir / "data" / "manifest.json"), "--out-dir", str(workdir)])
    assert rc == 0
    assert (workdir / "index.html").exists()


def test_cli_error_exit(workdir):
    bad = workdir / "bad.json"
    bad.write_text("{}")
    assert main([str(bad)]) == 1
