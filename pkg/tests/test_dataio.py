import numpy as np
import pytest

from adascale.dataio import (CREDIT_COLUMNS, CREDIT_KINDS, CREDIT_TARGET, Dataset, kfold_indices,
                             load_csv, one_hot_encode, train_test_split, write_csv)
from adascale.errors import ArgumentError, DataError
from adascale.numerics import RngStream


def _write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_toy_csv(tmp_path):
    d = load_csv(_write(tmp_path, "a,b,y\n1,2,0\n3,4,1\n"), "y")
    assert d.p == 2 and d.n == 2
    assert d.feature_names == ("a", "b")
    np.testing.assert_array_equal(d.y, [0, 1])
    assert d.y.dtype == np.int64


def test_id_dropped_and_kinds_inferred(tmp_path):
    d = load_csv(_write(tmp_path, "ID,s,x,y\n1,1,0.5,0\n2,2,1.5,1\n3,1,7,0\n"), "y")
    assert d.feature_names == ("s", "x")
    assert d.feature_kinds == ("binary", "numeric")


def test_kind_overrides(tmp_path):
    d = load_csv(_write(tmp_path, "m,y\n1,0\n2,1\n3,0\n"), "y", {"m": "categorical"})
    assert d.feature_kinds == ("categorical",)
    with pytest.raises(ArgumentError):
        load_csv(_write(tmp_path, "m,y\n1,0\n"), "y", {"m": "weird"})


def test_bad_cell_names_row_and_column(tmp_path):
    with pytest.raises(DataError, match=r"row 3, column 'b'"):
        load_csv(_write(tmp_path, "a,b,y\n1,2,0\n3,abc,1\n"), "y")


def test_missing_file_target_and_duplicate_header(tmp_path):
    with pytest.raises(DataError):
        load_csv(tmp_path / "nope.csv", "y")
    with pytest.raises(DataError, match="target"):
        load_csv(_write(tmp_path, "a,b\n1,2\n"), "y")
    with pytest.raises(DataError, match="duplicate"):
        load_csv(_write(tmp_path, "a,a,y\n1,2,0\n"), "y")


def test_round_trip_is_bit_identical(tmp_path):
    g = np.random.default_rng(0)
    X = g.standard_normal((20, 3)) * [1e-7, 1.0, 1e9]
    d = Dataset(X, ("a", "b", "c"), ("numeric",) * 3, g.integers(0, 2, 20), "t")
    write_csv(d, tmp_path / "r.csv")
    e = load_csv(tmp_path / "r.csv", "t")
    assert e.X.tobytes() == X.tobytes()
    np.testing.assert_array_equal(e.y, d.y)


def test_credit_schema_constants():
    assert len(CREDIT_COLUMNS) == 25
    assert CREDIT_COLUMNS[0] == "ID" and CREDIT_COLUMNS[-1] == CREDIT_TARGET
    assert set(CREDIT_KINDS) <= set(CREDIT_COLUMNS)


def test_credit_shaped_file_has_23_features(tmp_path):
    g = np.random.default_rng(1)
    rows = [",".join(CREDIT_COLUMNS)]
    for i in range(40):
        vals = [str(i + 1)] + [str(int(v)) for v in g.integers(1, 4, 23)] + [str(i % 2)]
        rows.append(",".join(vals))
    d = load_csv(_write(tmp_path, "\n".join(rows) + "\n"), CREDIT_TARGET, CREDIT_KINDS)
    assert d.p == 23 and set(np.unique(d.y)) == {0, 1}
    assert d.feature_kinds[d.feature_names.index("MARRIAGE")] == "categorical"


def test_one_hot_expands_categoricals():
    X = np.array([[1.0, 5.0], [2.0, 6.0], [3.0, 7.0]])
    d = one_hot_encode(Dataset(X, ("m", "x"), ("categorical", "numeric")))
    assert d.feature_names == ("m=2", "m=3", "x")
    np.testing.assert_array_equal(d.X[:, :2], [[0, 0], [1, 0], [0, 1]])


def _toy(n):
    return Dataset(np.arange(float(n))[:, None], ("x",), ("numeric",), np.arange(n), "y")


def test_split_halves():
    s = train_test_split(_toy(30_000), 0.5, RngStream(0))
    assert (s.train.n, s.test.n) == (15_000, 15_000)


def test_split_deterministic_and_ceiling():
    a = train_test_split(_toy(10), 0.9, RngStream(3))
    b = train_test_split(_toy(10), 0.9, RngStream(3))
    np.testing.assert_array_equal(a.train_index, b.train_index)
    assert (a.train.n, a.test.n) == (9, 1)
    np.testing.assert_array_equal(a.train.X[:, 0], a.train_index)


def test_split_errors():
    with pytest.raises(ArgumentError):
        train_test_split(_toy(1), 0.5, RngStream(0))
    with pytest.raises(ArgumentError):
        train_test_split(_toy(5), 1.0, RngStream(0))


def test_kfold_sizes():
    assert [f.size for f in kfold_indices(10, 5, RngStream(0))] == [2] * 5
    assert sorted(f.size for f in kfold_indices(7, 3, RngStream(0))) == [2, 2, 3]


def test_kfold_errors():
    with pytest.raises(ArgumentError):
        kfold_indices(3, 4, RngStream(0))
    with pytest.raises(ArgumentError):
        kfold_indices(3, 1, RngStream(0))
