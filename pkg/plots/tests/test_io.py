"""CSV/JSON readers: labels, ordering, and error reporting."""
import json

import numpy as np
import pytest

from frontierplots import (
    EmptySeries,
    MissingColumn,
    NegativeVariance,
    read_frontier_csv,
    read_solutions_csv,
)

FRONTIER_HEADER = "z,lambda_star,variance,std_dev\n"


def frontier_file(tmp_path, rows, name="frontier_f0p5.csv", header=None):
    path = tmp_path / name
    path.write_text((header or FRONTIER_HEADER)
                    + "".join(f"{z},{l},{v},{s}\n" for z, l, v, s in rows))
    return path


def test_frontier_rows_sorted_by_z(tmp_path):
    path = frontier_file(tmp_path, [(1.3, 0.1, 0.09, 0.3),
                                    (1.1, 0.2, 0.01, 0.1),
                                    (1.2, 0.3, 0.04, 0.2)])
    series = read_frontier_csv(path)
    assert series.z.tolist() == [1.1, 1.2, 1.3]
    assert series.variance.tolist() == [0.01, 0.04, 0.09]
    assert series.std_dev.tolist() == [0.1, 0.2, 0.3]


def test_label_from_sibling_json(tmp_path):
    path = frontier_file(tmp_path, [(1.2, 0.0, 0.04, 0.2)])
    (tmp_path / "frontier_f0p5.json").write_text(json.dumps({"density": 0.5}))
    assert read_frontier_csv(path).label == "f = 0.5"


def test_label_falls_back_to_stem(tmp_path):
    path = frontier_file(tmp_path, [(1.2, 0.0, 0.04, 0.2)], name="curve.csv")
    assert read_frontier_csv(path).label == "curve"
    (tmp_path / "curve.json").write_text(json.dumps({"no_density": 1}))
    assert read_frontier_csv(path).label == "curve"


def test_missing_column_names_file_and_column(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("z,variance\n1.2,0.04\n")
    with pytest.raises(MissingColumn) as exc:
        read_frontier_csv(bad)
    assert "bad.csv" in str(exc.value) and "std_dev" in str(exc.value)
    assert exc.value.column == "std_dev"


def test_empty_csv_is_an_error(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text(FRONTIER_HEADER)
    with pytest.raises(EmptySeries, match="empty.csv"):
        read_frontier_csv(path)


def test_negative_variance_is_an_error(tmp_path):
    path = frontier_file(tmp_path, [(1.2, 0.0, -0.04, 0.2)])
    with pytest.raises(NegativeVariance, match="-0.04"):
        read_frontier_csv(path)


def test_solutions_grouped_by_regime_sorted_in_time(tmp_path):
    path = tmp_path / "solutions.csv"
    path.write_text(
        "t,regime,psi,p,g\n"
        "1.0,0,0.5,1.0,1.0\n"
        "0.0,0,1.1,2.1,0.9\n"
        "1.0,1,0.5,1.0,1.0\n"
        "0.0,1,1.2,2.2,0.8\n")
    table = read_solutions_csv(path)
    assert table.regimes == (0, 1)
    assert table.t[0].tolist() == [0.0, 1.0]
    assert table.psi[1].tolist() == [1.2, 0.5]
    assert table.p[0].tolist() == [2.1, 1.0]
    # shared terminal condition shows up as a common last point
    assert table.g[0][-1] == table.g[1][-1] == 1.0


def test_solutions_missing_column(tmp_path):
    path = tmp_path / "solutions.csv"
    path.write_text("t,regime,psi,p\n0.0,0,1.0,2.0\n")
    with pytest.raises(MissingColumn) as exc:
        read_solutions_csv(path)
    assert exc.value.column == "g"


def test_unreadable_file_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        read_frontier_csv(tmp_path / "missing.csv")
