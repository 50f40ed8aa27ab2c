"""CSV ingestion, discretization, and count statistics.

Everything downstream consumes a ``DiscreteDataset``: an immutable matrix of
small-alphabet bin indices plus class labels. Continuous columns are binned
(equal-frequency by default), categorical columns are dictionary-encoded, and
constant columns are removed — a constant feature would make redundancy-style
subset scores misbehave, so removal is a correctness measure, not a tidy-up.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError

#: sentinel accepted by :func:`counts` to select the label column
LABEL = -1

_MISSING_TOKENS = {"", "?", "NA"}
_STRATEGIES = ("equal-frequency", "equal-width")
_MISSING_POLICIES = ("drop", "impute")


@dataclass(frozen=True)
class RawDataset:
    """Parsed but not yet discretized tabular data.

    ``columns[i]`` holds floats (numeric kind) or strings (categorical kind),
    with ``None`` marking a missing cell. Labels are kept as raw strings.
    """

    names: tuple[str, ...]
    kinds: tuple[str, ...]
    columns: tuple[tuple, ...]
    labels: tuple
    label_name: str

    @property
    def n_features(self) -> int:
        return len(self.names)

    @property
    def n_rows(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class DiscreteDataset:
    """M×N matrix of bin indices with class labels.

    Immutable after construction; safe for concurrent reads.
    """

    values: np.ndarray
    labels: np.ndarray
    names: tuple[str, ...]
    alphabet: tuple[int, ...]
    n_classes: int
    class_names: tuple[str, ...]
    label_name: str = "class"
    bins: int = 0
    strategy: str = ""
    provenance: dict = field(default_factory=dict)
    dropped: tuple[str, ...] = ()

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.int64)
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)
        if values.ndim != 2 or labels.ndim != 1:
            raise DataError("values must be M x N and labels length M")
        m, n = values.shape
        if m < 1:
            raise DataError("empty dataset: zero rows")
        if labels.shape[0] != m:
            raise DataError("labels length does not match row count")
        if n != len(self.names) or n != len(self.alphabet):
            raise DataError("names/alphabet arity does not match columns")
        if self.n_classes < 2:
            raise DataError("degenerate labels: fewer than 2 classes")
        if labels.min() < 0 or labels.max() >= self.n_classes:
            raise DataError("label index out of range")
        for i, k in enumerate(self.alphabet):
            col = values[:, i]
            if col.min() < 0 or col.max() >= k:
                raise DataError(f"column '{self.names[i]}' has an index outside [0, {k})")
            if k < 2 or len(np.unique(col)) < 2:
                raise DataError(f"column '{self.names[i]}' is constant after preprocessing")
        values.setflags(write=False)
        labels.setflags(write=False)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def provenance_json(self) -> str:
        """Bin edges / category dictionaries as JSON, for reproducibility."""
        return json.dumps(self.provenance, sort_keys=True, indent=2)


def load_csv(path, label_column, schema=None) -> RawDataset:
    """Read a UTF-8, comma-separated file with a header row.

    ``label_column`` selects the class column by name or 0-based index.
    ``schema`` optionally pins column kinds: a mapping name -> "numeric" |
    "categorical"; unlisted columns are inferred (numeric if every non-missing
    token parses as a float).
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except OSError as exc:
        raise DataError(f"cannot read '{path}': {exc}") from exc
    if not rows:
        raise DataError("empty file: no header row")
    header = [h.strip() for h in rows[0]]
    if isinstance(label_column, int) or (
        isinstance(label_column, str) and label_column.lstrip("-").isdigit()
    ):
        idx = int(label_column)
        if not 0 <= idx < len(header):
            raise ConfigError(f"label column index {idx} out of range (0..{len(header) - 1})")
        label_idx = idx
    else:
        if label_column not in header:
            raise ConfigError(f"label column '{label_column}' absent from header {header}")
        label_idx = header.index(label_column)
    if len(header) < 2:
        raise DataError("need at least one feature column besides the label")

    data_rows = rows[1:]
    if not data_rows:
        raise DataError("zero data rows")
    width = len(header)
    for lineno, row in enumerate(data_rows, start=2):
        if len(row) != width:
            raise DataError(
                f"parse error at row {lineno}: expected {width} fields, got {len(row)}"
            )

    feat_idx = [j for j in range(width) if j != label_idx]
    names = tuple(header[j] for j in feat_idx)
    schema = dict(schema or {})
    for key in schema:
        if key not in names:
            raise ConfigError(f"schema names unknown column '{key}'")
        if schema[key] not in ("numeric", "categorical"):
            raise ConfigError(f"schema kind for '{key}' must be numeric or categorical")

    columns, kinds = [], []
    for name, j in zip(names, feat_idx):
        tokens = [row[j].strip() for row in data_rows]
        hint = schema.get(name)
        parsed, numeric = _parse_column(tokens, hint, name)
        columns.append(tuple(parsed))
        kinds.append("numeric" if numeric else "categorical")

    labels = tuple(
        None if row[label_idx].strip() in _MISSING_TOKENS else row[label_idx].strip()
        for row in data_rows
    )
    if len({lab for lab in labels if lab is not None}) < 2:
        raise DataError("degenerate labels: fewer than 2 distinct classes")
    return RawDataset(names, tuple(kinds), tuple(columns), labels, header[label_idx])


def _parse_column(tokens, hint, name):
    """Return (values, is_numeric); raise on a schema-violating token."""
    floats, ok = [], True
    for lineno, tok in enumerate(tokens, start=2):
        if tok in _MISSING_TOKENS:
            floats.append(None)
            continue
        try:
            floats.append(float(tok))
        except ValueError:
            if hint == "numeric":
                raise DataError(
                    f"parse error at row {lineno}, column '{name}': "
                    f"non-numeric value '{tok}'"
                ) from None
            ok = False
            break
    if hint == "categorical":
        ok = False
    if ok:
        return floats, True
    return [None if t in _MISSING_TOKENS else t for t in tokens], False


def discretize(raw: RawDataset, bins: int = 5, strategy: str = "equal-frequency",
               missing: str = "drop") -> DiscreteDataset:
    """Map every column to small integer alphabets.

    Continuous columns get at most ``bins`` indices (boundary ties go to the
    lower bin); categorical columns are dictionary-encoded in first-appearance
    order and may exceed ``bins``. Constant columns are dropped and reported.
    Rows with a missing label are always dropped; missing feature cells follow
    ``missing``: "drop" the row or "impute" the per-column mode.
    """
    if bins < 2:
        raise ConfigError(f"bins must be >= 2, got {bins}")
    if strategy not in _STRATEGIES:
        raise ConfigError(f"unknown strategy '{strategy}' (use {'|'.join(_STRATEGIES)})")
    if missing not in _MISSING_POLICIES:
        raise ConfigError(f"unknown missing policy '{missing}'")

    keep = [r for r in range(raw.n_rows) if raw.labels[r] is not None]
    if missing == "drop":
        keep = [r for r in keep if all(col[r] is not None for col in raw.columns)]
    if not keep:
        raise DataError("zero data rows after missing-value handling")

    cols = []
    for ci, col in enumerate(raw.columns):
        vals = [col[r] for r in keep]
        if missing == "impute" and any(v is None for v in vals):
            vals = _impute_mode(vals, raw.kinds[ci])
        cols.append(vals)

    label_vals = [raw.labels[r] for r in keep]
    class_names: list = []
    for lab in label_vals:
        if lab not in class_names:
            class_names.append(lab)
    if len(class_names) < 2:
        raise DataError("degenerate labels: fewer than 2 classes after row filtering")
    labels = np.array([class_names.index(lab) for lab in label_vals], dtype=np.int64)

    coded, names, alphabet, provenance, dropped = [], [], [], {}, []
    for name, kind, vals in zip(raw.names, raw.kinds, cols):
        if kind == "numeric":
            codes, info = _bin_numeric(np.asarray(vals, dtype=float), bins, strategy)
        else:
            codes, info = _encode_categorical(vals)
        k = int(codes.max()) + 1 if codes.size else 0
        if k < 2:
            dropped.append(name)
            continue
        coded.append(codes)
        names.append(name)
        alphabet.append(k)
        provenance[name] = info
    if not coded:
        raise DataError("no informative features: all columns constant")

    return DiscreteDataset(
        values=np.column_stack(coded),
        labels=labels,
        names=tuple(names),
        alphabet=tuple(alphabet),
        n_classes=len(class_names),
        class_names=tuple(str(c) for c in class_names),
        label_name=raw.label_name,
        bins=bins,
        strategy=strategy,
        provenance=provenance,
        dropped=tuple(dropped),
    )


def _impute_mode(vals, kind):
    present = [v for v in vals if v is not None]
    if not present:
        return [0.0 if kind == "numeric" else "missing"] * len(vals)
    freq: dict = {}
    for v in present:
        freq[v] = freq.get(v, 0) + 1
    top = max(freq.values())
    if kind == "numeric":
        mode = min(v for v, c in freq.items() if c == top)
    else:  # earliest first appearance among the modes
        mode = next(v for v in present if freq[v] == top)
    return [mode if v is None else v for v in vals]


def _bin_numeric(vals, bins, strategy):
    lo, hi = float(vals.min()), float(vals.max())
    if strategy == "equal-frequency":
        qs = np.quantile(vals, [j / bins for j in range(1, bins)])
    else:
        qs = np.linspace(lo, hi, bins + 1)[1:-1]
    edges = np.unique(qs)
    # boundary ties go to the LOWER bin: bin j covers (edge[j-1], edge[j]]
    raw_codes = np.searchsorted(edges, vals, side="left")
    occupied, codes = np.unique(raw_codes, return_inverse=True)
    info = {
        "kind": "numeric",
        "strategy": strategy,
        "edges": [float(e) for e in edges],
        "occupied_bins": [int(b) for b in occupied],
        "range": [lo, hi],
    }
    return codes.astype(np.int64), info


def _encode_categorical(vals):
    seen: dict = {}
    codes = np.empty(len(vals), dtype=np.int64)
    for i, v in enumerate(vals):
        key = "missing" if v is None else str(v)
        if key not in seen:
            seen[key] = len(seen)
        codes[i] = seen[key]
    return codes, {"kind": "categorical", "categories": list(seen)}


def from_arrays(values, labels, names=None, class_names=None,
                label_name="class") -> DiscreteDataset:
    """Wrap already-discrete arrays (fixtures, tests, generated data)."""
    values = np.asarray(values, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if values.ndim != 2:
        raise DataError("values must be a 2-D array")
    n = values.shape[1]
    if names is None:
        names = tuple(f"f{i}" for i in range(n))
    alphabet = tuple(int(values[:, i].max()) + 1 for i in range(n))
    n_classes = int(labels.max()) + 1 if labels.size else 0
    if class_names is None:
        class_names = tuple(str(c) for c in range(n_classes))
    return DiscreteDataset(
        values=values, labels=labels, names=tuple(names), alphabet=alphabet,
        n_classes=n_classes, class_names=tuple(class_names), label_name=label_name,
    )


def counts(data: DiscreteDataset, vars) -> np.ndarray:
    """Joint occurrence counts over up to three columns.

    ``vars`` is a sequence of feature indices; the sentinel ``LABEL`` (-1)
    selects the class column. The table's axes follow the order of ``vars``
    and its entries sum to M.
    """
    vars = tuple(vars)
    if not vars:
        raise ConfigError("counts: empty variable set")
    if len(vars) > 3:
        raise ConfigError("counts: the empirical path supports at most 3 variables")
    if len(set(vars)) != len(vars):
        raise ConfigError(f"counts: duplicate indices in {vars}")
    cols, shape = [], []
    for v in vars:
        if v == LABEL:
            cols.append(data.labels)
            shape.append(data.n_classes)
        elif 0 <= v < data.n:
            cols.append(data.values[:, v])
            shape.append(data.alphabet[v])
        else:
            raise ConfigError(f"counts: index {v} out of range (n={data.n})")
    table = np.zeros(tuple(shape), dtype=np.int64)
    np.add.at(table, tuple(cols), 1)
    return table
