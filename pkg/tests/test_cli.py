import re

import numpy as np
import pytest

from chartkit.channels import ChannelDataset, load_dataset, save_dataset
from chartkit.cli import main, parse_k_list, read_table

SMALL = """\
# small LoS scenario
center_frequency_hz = 2e9
subcarrier_count = 4
bandwidth_hz = 5e6
antennas = 8
user_count = 120
area = -100,100,50,250
paths_per_user = 2
snr_db = 10
rng_seed = 7
"""


def kv(text):
    return dict(line.split("=", 1) for line in text.strip().splitlines() if "=" in line)


@pytest.fixture
def small_dataset(tmp_path, capsys):
    cfg = tmp_path / "small.cfg"
    cfg.write_text(SMALL)
    out = tmp_path / "small.ccd"
    assert main(["generate", "--config", str(cfg), str(out)]) == 0
    capsys.readouterr()
    return out


# generate

def test_generate_summary(small_dataset, tmp_path, capsys):
    cfg = tmp_path / "small.cfg"
    assert main(["generate", "--config", str(cfg), str(tmp_path / "b.ccd")]) == 0
    info = kv(capsys.readouterr().out)
    assert info == {"N": "120", "A": "8", "S": "4", "M": "32", "seed": "7"}
    assert (tmp_path / "b.ccd").read_bytes() == small_dataset.read_bytes()


def test_generate_quadriga_preset(tmp_path, capsys):
    out = tmp_path / "q.ccd"
    assert main(["generate", "--preset", "quadriga-like", str(out)]) == 0
    info = kv(capsys.readouterr().out)
    assert (info["N"], info["M"]) == ("2048", "32")
    assert load_dataset(out).matrix.shape == (2048, 32)


def test_generate_deepmimo_preset(tmp_path, capsys):
    assert main(["generate", "--preset", "deepmimo-like", str(tmp_path / "d.ccd")]) == 0
    info = kv(capsys.readouterr().out)
    assert (info["N"], info["M"]) == ("3000", "1024")


def test_generate_usage_errors(tmp_path, capsys):
    assert main(["generate", "--preset", "quadriga-like"]) == 2
    assert main(["generate", str(tmp_path / "x.ccd")]) == 2
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("user_count = 10\nwarp_factor = 9\n")
    assert main(["generate", "--config", str(cfg), str(tmp_path / "x.ccd")]) == 2
    assert "warp_factor = 9" in capsys.readouterr().err


def test_generate_io_error(tmp_path):
    target = tmp_path / "missing_dir" / "x.ccd"
    assert main(["generate", "--preset", "quadriga-like", str(target)]) == 3
    assert main(["generate", "--config", str(tmp_path / "nope.cfg"), str(tmp_path / "x.ccd")]) == 3


# chart

def test_chart_defaults(small_dataset, tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert main(["chart", str(small_dataset), str(out)]) == 0
    info = kv(capsys.readouterr().out)
    for key in ("time_distance_s", "time_graph_s", "time_geodesics_s", "time_mds_s",
                "geodesic_stress"):
        assert float(info[key]) >= 0.0
    header, data = read_table(out)
    assert header == ["z1", "z2", "p1", "p2"]
    assert data.shape == (120, 4)
    assert np.array_equal(data[:, 2:], load_dataset(small_dataset).positions)


def test_chart_measure_and_dim(small_dataset, tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["chart", str(small_dataset), str(a), "--measure", "normalized", "--dim", "3"]) == 0
    assert main(["chart", str(small_dataset), str(b), "--dim", "3"]) == 0
    ha, da = read_table(a)
    assert ha[:3] == ["z1", "z2", "z3"]
    assert not np.array_equal(da, read_table(b)[1])


def test_chart_thread_count_is_byte_identical(small_dataset, tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["chart", str(small_dataset), str(a), "--threads", "1"]) == 0
    assert main(["chart", str(small_dataset), str(b), "--threads", "8"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_chart_connectivity_failure(tmp_path, capsys):
    rng = np.random.default_rng(3)
    base = rng.standard_normal((2, 8)) + 1j * rng.standard_normal((2, 8))
    H = np.vstack([base[c] + 0.01 * rng.standard_normal((10, 8)) for c in (0, 1)])
    path = tmp_path / "two.ccd"
    save_dataset(ChannelDataset(H, 8, 1, [2e9]), path)
    code = main(["chart", str(path), str(tmp_path / "c.csv"), "--k", "1", "--connectivity", "fail"])
    captured = capsys.readouterr()
    assert code == 4
    assert "'graph'" in captured.err and "components" in captured.err
    info = kv(captured.out)
    assert info["failed_stage"] == "graph"
    assert "time_distance_s" in info and "time_mds_s" not in info
    assert main(["chart", str(path), str(tmp_path / "c.csv"), "--k", "1"]) == 0


def test_chart_bad_dataset(tmp_path):
    bad = tmp_path / "bad.ccd"
    bad.write_bytes(b"not a dataset")
    assert main(["chart", str(bad), str(tmp_path / "c.csv")]) == 3
    assert main(["chart", str(tmp_path / "absent.ccd"), str(tmp_path / "c.csv")]) == 3
    assert main(["chart", str(bad), str(tmp_path / "c.csv"), "--threads", "0"]) == 2


# evaluate

def _positions_chart(dataset_path, out):
    P = load_dataset(dataset_path).positions
    out.write_text("z1,z2\n" + "".join(f"{x!r},{y!r}\n" for x, y in P.tolist()))


def test_evaluate_identity(small_dataset, tmp_path, capsys):
    chart, res = tmp_path / "z.csv", tmp_path / "e.csv"
    _positions_chart(small_dataset, chart)
    assert main(["evaluate", str(chart), str(small_dataset), str(res), "--k-list", "1,5,10"]) == 0
    info = kv(capsys.readouterr().out)
    assert float(info["mean_ct"]) == 1.0 and float(info["mean_tw"]) == 1.0
    header, data = read_table(res)
    assert header == ["K", "CT", "TW"]
    assert data.tolist() == [[1, 1, 1], [5, 1, 1], [10, 1, 1]]


def test_evaluate_invalid_k(small_dataset, tmp_path, capsys):
    chart = tmp_path / "z.csv"
    _positions_chart(small_dataset, chart)
    code = main(["evaluate", str(chart), str(small_dataset), str(tmp_path / "e.csv"),
                 "--k-list", "5,80"])
    assert code == 2
    assert "K=80" in capsys.readouterr().err
    assert main(["evaluate", str(chart), str(small_dataset), str(tmp_path / "e.csv"),
                 "--k-list", "five"]) == 2


def test_evaluate_sweep_rows(tmp_path, capsys):
    rng = np.random.default_rng(0)
    n = 400
    H = rng.standard_normal((n, 4)) + 1j * rng.standard_normal((n, 4))
    path = tmp_path / "p.ccd"
    save_dataset(ChannelDataset(H, 4, 1, [2e9], rng.random((n, 2))), path)
    chart, res = tmp_path / "z.csv", tmp_path / "e.csv"
    _positions_chart(path, chart)
    assert main(["evaluate", str(chart), str(path), str(res), "--k-list", "5:250:5"]) == 0
    assert read_table(res)[1].shape == (50, 3)


def test_evaluate_requires_positions(tmp_path, capsys):
    H = np.ones((5, 2), dtype=complex) * np.arange(1, 6)[:, None]
    path = tmp_path / "np.ccd"
    save_dataset(ChannelDataset(H, 2, 1, [2e9]), path)
    chart = tmp_path / "z.csv"
    chart.write_text("z1,z2\n" + "0.0,0.0\n" * 5)
    assert main(["evaluate", str(chart), str(path), str(tmp_path / "e.csv")]) == 2
    assert "ground truth required" in capsys.readouterr().err


def test_parse_k_list():
    assert parse_k_list("5,10") == [5, 10]
    assert parse_k_list("5:250:5") == list(range(5, 251, 5))


# plot

def test_plot_scatter_three_points(tmp_path):
    src, out = tmp_path / "c.csv", tmp_path / "c.svg"
    src.write_text("z1,z2,p1,p2\n0.0,0.0,1.0,2.0\n1.0,0.5,3.0,1.0\n-1.0,2.0,0.0,0.0\n")
    assert main(["plot", str(src), str(out)]) == 0
    svg = out.read_text()
    assert svg.count("<circle") == 3
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    again = tmp_path / "again.svg"
    assert main(["plot", str(src), str(again)]) == 0
    assert again.read_bytes() == out.read_bytes()


def test_plot_curves_two_polylines(tmp_path):
    src, out = tmp_path / "e.csv", tmp_path / "e.svg"
    rows = "".join(f"{k},{0.9 + k / 1000!r},{0.8 + k / 1000!r}\n" for k in range(5, 55, 5))
    src.write_text("K,CT,TW\n" + rows)
    assert main(["plot", str(src), str(out), "--kind", "curves"]) == 0
    polys = re.findall(r'<polyline points="([^"]*)"', out.read_text())
    assert len(polys) == 2
    assert all(len(p.split()) == 10 for p in polys)
    assert "CT" in out.read_text() and "TW" in out.read_text()


def test_plot_errors(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["plot", str(empty), str(tmp_path / "o.svg")]) == 2
    assert "no data" in capsys.readouterr().err
    header_only = tmp_path / "h.csv"
    header_only.write_text("z1,z2\n")
    assert main(["plot", str(header_only), str(tmp_path / "o.svg")]) == 2
    three = tmp_path / "three.csv"
    three.write_text("z1,z2,z3\n0,0,0\n1,1,1\n")
    assert main(["plot", str(three), str(tmp_path / "o.svg")]) == 2
    assert main(["plot", str(tmp_path / "nope.csv"), str(tmp_path / "o.svg")]) == 3


# distances

def test_distances_export(small_dataset, tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert main(["distances", str(small_dataset), str(out)]) == 0
    header, D = read_table(out)
    assert header[0] == "d0" and D.shape == (120, 120)
    assert np.array_equal(D, D.T) and np.all(np.diag(D) == 0)
