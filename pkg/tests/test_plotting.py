import pytest

from degenjc.plotting import MalformedCSVError, emit_plot, read_sweep_csv, render_svg

HEADER = "t_omega,s_total,s_atom,s_field\n"


def _write(path, body, meta="# kappa = 0.01\n# convention = paper-text\n"):
    path.write_text(meta + HEADER + body)
    return path


def test_read_metadata_and_columns(tmp_path):
    path = _write(tmp_path / "a.csv", "0,0,0,0\n1,0.1,0.2,0.3\n")
    meta, cols = read_sweep_csv(path)
    assert meta == {"kappa": "0.01", "convention": "paper-text"}
    assert cols["s_field"] == [0.0, 0.3]


def test_field_style_single_curve(tmp_path):
    path = _write(tmp_path / "f.csv", "0,0,0,0\n1,0.1,0.2,0.3\n2,0.2,0.1,0.0\n")
    svg = emit_plot(path, "field").read_text()
    assert svg.count("<polyline") == 1
    assert "S_F" in svg
    assert "stroke-dasharray" not in svg.split("<polyline")[1].split("/>")[0]


def test_system_style_solid_and_dotted_with_legend(tmp_path):
    path = _write(tmp_path / "s.csv", "0,0,0,0\n1,0.1,0.2,0.3\n2,0.2,0.1,0.0\n")
    svg = emit_plot(path, "system").read_text()
    lines = [chunk.split("/>")[0] for chunk in svg.split("<polyline")[1:]]
    assert len(lines) == 2
    assert "stroke-dasharray" not in lines[0]
    assert 'stroke-dasharray="2,4"' in lines[1]
    assert ">S<" in svg and ">S_A<" in svg


def test_empty_rows_write_nothing(tmp_path):
    path = _write(tmp_path / "e.csv", "")
    with pytest.raises(MalformedCSVError):
        emit_plot(path, "all")
    assert not (tmp_path / "e.svg").exists()


@pytest.mark.parametrize("text", ["", "# only metadata\n", "a,b\n1,2\n", HEADER + "0,x,0,0\n",
                                  HEADER + "0,0,0\n"])
def test_malformed_inputs(tmp_path, text):
    path = tmp_path / "m.csv"
    path.write_text(text)
    with pytest.raises(MalformedCSVError):
        emit_plot(path, "all")
    assert not (tmp_path / "m.svg").exists()


def test_unknown_style():
    with pytest.raises(ValueError):
        render_svg({"t_omega": [0, 1], "s_field": [0, 0.1]}, "bogus")


def test_custom_output_path(tmp_path):
    path = _write(tmp_path / "c.csv", "0,0,0,0\n1,0.1,0.2,0.3\n")
    out = emit_plot(path, "all", tmp_path / "sub.svg")
    assert out == tmp_path / "sub.svg"
    assert out.read_text().startswith("<svg")
