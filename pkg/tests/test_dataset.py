import json
import re

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from miselect import ConfigError, DataError
from miselect.dataset import (
    LABEL,
    DiscreteDataset,
    RawDataset,
    counts,
    discretize,
    from_arrays,
    load_csv,
)
from miselect import fixtures


def _write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


# ---------------------------------------------------------------- load_csv

def test_load_csv_infers_kinds_and_label_by_name(tmp_path):
    path = _write(tmp_path, "a,b,c\n1,x,0\n2,y,1\n3,x,0\n")
    raw = load_csv(path, "c")
    assert raw.names == ("a", "b")
    assert raw.kinds == ("numeric", "categorical")
    assert raw.columns[0] == (1.0, 2.0, 3.0)
    assert raw.columns[1] == ("x", "y", "x")
    assert raw.labels == ("0", "1", "0")
    assert raw.label_name == "c"
    assert raw.n_rows == 3 and raw.n_features == 2


def test_load_csv_label_by_index_and_digit_string(tmp_path):
    path = _write(tmp_path, "a,b\n1,0\n2,1\n")
    assert load_csv(path, 0).label_name == "a"
    assert load_csv(path, "1").label_name == "b"


def test_load_csv_label_errors(tmp_path):
    path = _write(tmp_path, "a,b\n1,0\n2,1\n")
    with pytest.raises(ConfigError, match="label column 'z' absent"):
        load_csv(path, "z")
    with pytest.raises(ConfigError, match=re.escape("index 5 out of range (0..1)")):
        load_csv(path, 5)


def test_load_csv_shape_errors(tmp_path):
    with pytest.raises(DataError, match="cannot read"):
        load_csv(str(tmp_path / "nope.csv"), "y")
    with pytest.raises(DataError, match="empty file"):
        load_csv(_write(tmp_path, ""), "y")
    with pytest.raises(DataError, match="zero data rows"):
        load_csv(_write(tmp_path, "a,b\n"), "b")
    with pytest.raises(DataError, match="at least one feature column"):
        load_csv(_write(tmp_path, "only\n1\n2\n"), "only")


def test_load_csv_ragged_row_reports_line_number(tmp_path):
    path = _write(tmp_path, "a,b,c\n1,2,0\n1,2\n")
    with pytest.raises(DataError, match="parse error at row 3: expected 3 fields, got 2"):
        load_csv(path, "c")


def test_load_csv_schema_pins_and_validates(tmp_path):
    path = _write(tmp_path, "a,b,y\n1,2,0\n3,4,1\n")
    raw = load_csv(path, "y", schema={"a": "categorical"})
    assert raw.kinds == ("categorical", "numeric")
    assert raw.columns[0] == ("1", "3")  # kept as strings
    with pytest.raises(ConfigError, match="schema names unknown column 'q'"):
        load_csv(path, "y", schema={"q": "numeric"})
    with pytest.raises(ConfigError, match="must be numeric or categorical"):
        load_csv(path, "y", schema={"a": "float"})


def test_load_csv_numeric_hint_rejects_text(tmp_path):
    path = _write(tmp_path, "a,y\n1,0\noops,1\n")
    with pytest.raises(DataError, match="row 3, column 'a': non-numeric value 'oops'"):
        load_csv(path, "y", schema={"a": "numeric"})


def test_load_csv_missing_tokens(tmp_path):
    path = _write(tmp_path, "a,b,y\n1,x,0\n?,NA,1\n,y,0\n2,z,1\n")
    raw = load_csv(path, "y")
    assert raw.columns[0] == (1.0, None, None, 2.0)
    assert raw.columns[1] == ("x", None, "y", "z")


def test_load_csv_degenerate_labels(tmp_path):
    path = _write(tmp_path, "a,y\n1,0\n2,0\n3,NA\n")
    with pytest.raises(DataError, match="fewer than 2 distinct classes"):
        load_csv(path, "y")


# -------------------------------------------------------------- discretize

def test_discretize_config_errors(tmp_path):
    raw = load_csv(_write(tmp_path, "a,y\n1,0\n2,1\n"), "y")
    with pytest.raises(ConfigError, match="bins must be >= 2, got 1"):
        discretize(raw, bins=1)
    with pytest.raises(ConfigError, match="unknown strategy 'kmeans'"):
        discretize(raw, strategy="kmeans")
    with pytest.raises(ConfigError, match="unknown missing policy 'zero'"):
        discretize(raw, missing="zero")


def test_discretize_equal_frequency_boundary_ties_go_low():
    raw = RawDataset(("a",), ("numeric",), ((1.0, 2.0, 2.0, 3.0),),
                     ("0", "0", "1", "1"), "y")
    data = discretize(raw, bins=2)
    # the median edge lands on 2.0; both 2s take the lower bin
    assert data.values[:, 0].tolist() == [0, 0, 0, 1]
    assert data.alphabet == (2,)


def test_discretize_equal_width_relabels_empty_bins():
    raw = RawDataset(("a",), ("numeric",), ((0.0, 1.0, 2.0, 9.0),),
                     ("0", "1", "0", "1"), "y")
    data = discretize(raw, bins=3, strategy="equal-width")
    # raw bins are {0, 2}; indices are compacted to {0, 1}
    assert data.values[:, 0].tolist() == [0, 0, 0, 1]
    assert data.alphabet == (2,)
    assert data.provenance["a"]["occupied_bins"] == [0, 2]


def test_discretize_skewed_column_may_collapse():
    # an all-but-one-value column can end up constant under equal-frequency
    # quantiles; it is then dropped like any other constant column
    raw = RawDataset(("skew", "ok"), ("numeric", "numeric"),
                     ((0.0, 1.0, 1.0, 1.0), (1.0, 2.0, 3.0, 4.0)),
                     ("0", "1", "0", "1"), "y")
    data = discretize(raw, bins=2)
    assert data.names == ("ok",)
    assert data.dropped == ("skew",)


def test_discretize_all_constant_raises():
    raw = RawDataset(("a",), ("numeric",), ((7.0, 7.0),), ("0", "1"), "y")
    with pytest.raises(DataError, match="no informative features"):
        discretize(raw)


def test_discretize_drop_policy_removes_rows():
    raw = RawDataset(("a",), ("numeric",), ((1.0, None, 2.0, 1.0),),
                     ("0", "1", "1", "0"), "y")
    data = discretize(raw, bins=2, missing="drop")
    assert data.m == 3
    assert data.values[:, 0].tolist() == [0, 1, 0]


def test_discretize_impute_numeric_takes_smallest_mode():
    raw = RawDataset(("a",), ("numeric",), ((1.0, None, 2.0, 2.0, 1.0),),
                     ("0", "1", "1", "0", "1"), "y")
    data = discretize(raw, bins=2, missing="impute")
    assert data.m == 5
    # modes {1.0: 2, 2.0: 2} tie; the smaller value wins, landing in bin 0
    assert data.values[1, 0] == 0


def test_discretize_impute_categorical_takes_earliest_mode():
    raw = RawDataset(("a",), ("categorical",), (("b", None, "a", "a", "b"),),
                     ("0", "1", "1", "0", "1"), "y")
    data = discretize(raw, missing="impute")
    # tie between a and b; b appeared first and encodes as 0
    assert data.values[:, 0].tolist() == [0, 0, 1, 1, 0]


def test_discretize_missing_label_always_dropped():
    raw = RawDataset(("a",), ("numeric",), ((1.0, 2.0, 3.0, 4.0),),
                     ("0", None, "1", "1"), "y")
    for policy in ("drop", "impute"):
        assert discretize(raw, bins=2, missing=policy).m == 3


def test_discretize_label_filtering_can_degenerate():
    raw = RawDataset(("a",), ("numeric",), ((1.0, 2.0, 3.0),),
                     ("0", "1", "0"), "y")
    # dropping the row with the missing feature removes the only class-1 row
    raw = RawDataset(("a",), ("numeric",), ((1.0, None, 3.0),),
                     ("0", "1", "0"), "y")
    with pytest.raises(DataError, match="fewer than 2 classes after row filtering"):
        discretize(raw, bins=2, missing="drop")


def test_discretize_zero_rows_after_policy():
    raw = RawDataset(("a",), ("numeric",), ((None, None),), ("0", "1"), "y")
    with pytest.raises(DataError, match="zero data rows after missing-value"):
        discretize(raw, missing="drop")


def test_discretize_class_names_in_first_appearance_order():
    raw = RawDataset(("a",), ("numeric",), ((1.0, 2.0, 3.0, 4.0),),
                     ("pos", "neg", "pos", "neg"), "y")
    data = discretize(raw, bins=2)
    assert data.class_names == ("pos", "neg")
    assert data.labels.tolist() == [0, 1, 0, 1]


def test_provenance_json_round_trips(tmp_path):
    raw = load_csv(_write(tmp_path, "a,y\n1,0\n2,1\n3,0\n4,1\n"), "y")
    data = discretize(raw, bins=2)
    blob = json.loads(data.provenance_json())
    assert blob["a"]["kind"] == "numeric"
    assert len(blob["a"]["edges"]) == 1


@given(st.integers(2, 4), st.integers(2, 5), st.integers(1, 3),
       st.integers(0, 999))
def test_discretize_identity_on_balanced_codes(k, mult, ncols, seed):
    """Re-binning balanced integer codes with bins=k is the identity map."""
    rng = np.random.default_rng(seed)
    m = k * mult
    cols = []
    for _ in range(ncols):
        col = np.repeat(np.arange(k), mult).astype(float)
        rng.shuffle(col)
        cols.append(tuple(col))
    labels = tuple(str(i % 2) for i in range(m))
    raw = RawDataset(tuple(f"c{i}" for i in range(ncols)),
                     ("numeric",) * ncols, tuple(cols), labels, "y")
    data = discretize(raw, bins=k)
    for i in range(ncols):
        assert data.values[:, i].tolist() == [int(v) for v in cols[i]]


# ----------------------------------------------- DiscreteDataset / arrays

def test_from_arrays_defaults_and_alphabet_gaps():
    values = np.array([[0, 2], [2, 0], [0, 2], [1, 0]])
    data = from_arrays(values, [0, 1, 0, 1])
    assert data.names == ("f0", "f1")
    assert data.alphabet == (3, 3)  # max+1, gaps allowed
    assert data.n_classes == 2
    assert data.class_names == ("0", "1")


def test_discrete_dataset_validation():
    good = dict(values=[[0, 1], [1, 0]], labels=[0, 1], names=("a", "b"),
                alphabet=(2, 2), n_classes=2, class_names=("0", "1"))
    DiscreteDataset(**good)
    with pytest.raises(DataError, match="labels length"):
        DiscreteDataset(**{**good, "labels": [0, 1, 1]})
    with pytest.raises(DataError, match="fewer than 2 classes"):
        DiscreteDataset(**{**good, "labels": [0, 0], "n_classes": 1})
    with pytest.raises(DataError, match="label index out of range"):
        DiscreteDataset(**{**good, "labels": [0, 2]})
    with pytest.raises(DataError, match="column 'b' is constant"):
        DiscreteDataset(**{**good, "values": [[0, 1], [1, 1]]})
    with pytest.raises(DataError, match="outside"):
        DiscreteDataset(**{**good, "values": [[0, 1], [1, 2]]})
    with pytest.raises(DataError, match="empty dataset"):
        DiscreteDataset(**{**good, "values": np.empty((0, 2), dtype=int),
                           "labels": []})


def test_values_are_read_only():
    data = from_arrays([[0, 1], [1, 0]], [0, 1])
    with pytest.raises(ValueError):
        data.values[0, 0] = 5


# ------------------------------------------------------------------ counts

def test_counts_xor_fixture_margins():
    data = fixtures.xor_noise_dataset()
    pair = counts(data, (0, 1))
    assert pair.shape == (2, 2)
    assert pair.sum() == 400
    assert np.all(pair == 100)  # balanced design
    n1 = counts(data, (2, LABEL))
    assert n1[0, 0] + n1[1, 1] == 220  # n1 agrees with the class 55% of rows
    n2 = counts(data, (3, LABEL))
    assert n2[0, 0] + n2[1, 1] == 240


def test_counts_axis_order_follows_vars():
    data = fixtures.xor_noise_dataset()
    a = counts(data, (2, LABEL))
    b = counts(data, (LABEL, 2))
    assert np.array_equal(a, b.T)


def test_counts_errors():
    data = fixtures.xor_noise_dataset()
    with pytest.raises(ConfigError, match="empty variable set"):
        counts(data, ())
    with pytest.raises(ConfigError, match="at most 3"):
        counts(data, (0, 1, 2, 3))
    with pytest.raises(ConfigError, match="duplicate indices"):
        counts(data, (1, 1))
    with pytest.raises(ConfigError, match="out of range"):
        counts(data, (9,))
