"""Subset score functions and the quadratic (Q-matrix) form they induce.

Every criterion is exposed twice: as a plain ``score_*`` function of a
precomputed :class:`~miselect.infotheory.MiMatrix`, and through the
:class:`SubsetOracle` wrapper the search strategies consume. Scores are
computed from the O(N^2) term matrix rather than re-estimated per subset —
search strategies evaluate many subsets and the terms never change.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass

import numpy as np

from .dataset import DiscreteDataset
from .errors import ConfigError
from .infotheory import JointPmf, MiMatrix, joint_pair_class_mi

MEASURES = ("maxrel", "mifs", "mrmr", "jmi", "d1", "d2")


class SubsetOracle:
    """Deterministic map from a non-empty feature index set to a score.

    Evaluations are memoized (greedy searches revisit frontier sets) and
    counted: ``calls`` is every lookup, ``evaluations`` only memo misses.
    Calls are serialized by a lock so the counters stay exact when rounding
    rounds fan out to threads.
    """

    def __init__(self, fn, descriptor: str, n: int, cardinality_hint: int | None = None):
        self._fn = fn
        self.descriptor = descriptor
        self.n = n
        self.cardinality_hint = cardinality_hint
        self._memo: dict = {}
        self._lock = threading.Lock()
        self.calls = 0
        self.evaluations = 0

    def __call__(self, s) -> float:
        key = frozenset(int(i) for i in s)
        if not key:
            raise ConfigError("oracle: empty subset")
        if any(i < 0 or i >= self.n for i in key):
            raise ConfigError(f"oracle: index out of range in {sorted(key)} (n={self.n})")
        with self._lock:
            self.calls += 1
            if key in self._memo:
                return self._memo[key]
            val = float(self._fn(tuple(sorted(key))))
            self._memo[key] = val
            self.evaluations += 1
            return val


def _validate_subset(n: int, s) -> tuple[int, ...]:
    s = tuple(int(i) for i in s)
    if not s:
        raise ConfigError("empty subset")
    if len(set(s)) != len(s):
        raise ConfigError(f"duplicate indices in {s}")
    if any(i < 0 or i >= n for i in s):
        raise ConfigError(f"index out of range in {s} (n={n})")
    return tuple(sorted(s))


def _require_variant(mi: MiMatrix, variant: str, which: str):
    if mi.variant != variant:
        raise ConfigError(
            f"{which} needs the {variant} redundancy variant, got {mi.variant}"
        )


def _pair_sum(mi: MiMatrix, s) -> float:
    return float(sum(mi.redundancy[i, j] for i, j in itertools.combinations(s, 2)))


def score_max_relevance(mi: MiMatrix, s) -> float:
    """Sum of single-feature relevances (modular, variant-agnostic)."""
    s = _validate_subset(mi.n, s)
    return float(mi.relevance[list(s)].sum())


def score_mifs(mi: MiMatrix, s) -> float:
    """sum I(X_i;C) - sum_{i<j} I(X_i;X_j) (beta = 1)."""
    s = _validate_subset(mi.n, s)
    _require_variant(mi, "pairwise", "mifs")
    return score_max_relevance(mi, s) - _pair_sum(mi, s)


def score_mrmr(mi: MiMatrix, s) -> float:
    """sum I(X_i;C) - (1/(|s|-1)) sum_{i<j} I(X_i;X_j); singleton redundancy 0."""
    s = _validate_subset(mi.n, s)
    _require_variant(mi, "pairwise", "mrmr")
    rel = score_max_relevance(mi, s)
    if len(s) == 1:
        return rel
    return rel - _pair_sum(mi, s) / (len(s) - 1)


def score_d1(mi: MiMatrix, s) -> float:
    """sum I(X_i;C) - sum_{i<j} I(X_i;X_j;C) (signed three-way terms)."""
    s = _validate_subset(mi.n, s)
    _require_variant(mi, "three-way", "d1")
    return score_max_relevance(mi, s) - _pair_sum(mi, s)


def score_d2(mi: MiMatrix, s) -> float:
    """sum I(X_i;C) - (1/(|s|-1)) sum_{i<j} I(X_i;X_j;C); singleton term 0.

    Nonnegative on exact pmfs — it is a scaled sum of joint pair MIs.
    """
    s = _validate_subset(mi.n, s)
    _require_variant(mi, "three-way", "d2")
    rel = score_max_relevance(mi, s)
    if len(s) == 1:
        return rel
    return rel - _pair_sum(mi, s) / (len(s) - 1)


def score_jmi(source, s) -> float:
    """sum_{i<j in s} I(X_i,X_j;C), from pairwise-joint counts with the class.

    ``source`` is a DiscreteDataset or a JointPmf with a class variable. The
    raw score is undefined below two features; the search-facing oracle maps
    singletons to 0 instead (sum over an empty pair set).
    """
    if isinstance(source, DiscreteDataset):
        n = source.n
    elif isinstance(source, JointPmf):
        n = len(source.features)
    else:
        raise ConfigError(f"unsupported MI source {type(source).__name__}")
    s = _validate_subset(n, s)
    if len(s) < 2:
        raise ConfigError("jmi needs at least 2 features")
    return float(sum(joint_pair_class_mi(source, i, j)
                     for i, j in itertools.combinations(s, 2)))


def criterion_oracle(measure: str, *, mi_three: MiMatrix | None = None,
                     mi_pair: MiMatrix | None = None, source=None,
                     cardinality_hint: int | None = None) -> SubsetOracle:
    """Wrap a criterion as a SubsetOracle.

    maxrel accepts either term matrix; mifs/mrmr need the pairwise variant,
    d1/d2 the three-way variant; jmi needs the raw source (dataset or pmf)
    and scores singletons as 0 by the empty-pair convention.
    """
    if measure not in MEASURES:
        raise ConfigError(f"unknown measure '{measure}' (use {'|'.join(MEASURES)})")
    if measure == "maxrel":
        mi = mi_three if mi_three is not None else mi_pair
        if mi is None:
            raise ConfigError("maxrel oracle needs a term matrix")
        return SubsetOracle(lambda s: score_max_relevance(mi, s), measure, mi.n,
                            cardinality_hint)
    if measure in ("mifs", "mrmr"):
        if mi_pair is None:
            raise ConfigError(f"{measure} oracle needs the pairwise term matrix")
        fn = score_mifs if measure == "mifs" else score_mrmr
        return SubsetOracle(lambda s: fn(mi_pair, s), measure, mi_pair.n,
                            cardinality_hint)
    if measure in ("d1", "d2"):
        if mi_three is None:
            raise ConfigError(f"{measure} oracle needs the three-way term matrix")
        fn = score_d1 if measure == "d1" else score_d2
        return SubsetOracle(lambda s: fn(mi_three, s), measure, mi_three.n,
                            cardinality_hint)
    # jmi
    if source is None:
        raise ConfigError("jmi oracle needs a dataset or pmf source")
    if isinstance(source, DiscreteDataset):
        n = source.n
    elif isinstance(source, JointPmf):
        n = len(source.features)
    else:
        raise ConfigError(f"unsupported MI source {type(source).__name__}")
    cache: dict = {}

    def jmi_fn(s):
        if len(s) < 2:
            return 0.0
        tot = 0.0
        for pair in itertools.combinations(s, 2):
            if pair not in cache:
                cache[pair] = joint_pair_class_mi(source, *pair)
            tot += cache[pair]
        return tot

    return SubsetOracle(jmi_fn, measure, n, cardinality_hint)


# ---------------------------------------------------------------------------
# the quadratic form


@dataclass(frozen=True)
class QMatrix:
    """Symmetric matrix whose indicator quadratic form scores P-subsets.

    Diagonal holds the relevance vector; entry (i, j), i != j, holds
    -(lambda/2) * redundancy[i][j] with lambda = 1/(P-1) by default, so for
    any 0/1 indicator x with sum x = P, x'Qx equals score_d2 (three-way
    variant) or score_mrmr (pairwise variant) of the indicated set.
    """

    q: np.ndarray
    lam: float
    variant: str
    p_target: int
    names: tuple[str, ...] = ()

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        object.__setattr__(self, "q", q)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ConfigError("Q must be square")
        if np.abs(q - q.T).max(initial=0.0) > 1e-12:
            raise ConfigError("Q must be symmetric")
        q.setflags(write=False)

    @property
    def n(self) -> int:
        return self.q.shape[0]

    def to_json(self) -> dict:
        return {
            "q": [[float(x) for x in row] for row in self.q],
            "lambda": float(self.lam),
            "variant": self.variant,
            "p_target": int(self.p_target),
            "names": list(self.names),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "QMatrix":
        return cls(
            np.asarray(obj["q"], float),
            float(obj.get("lambda", 0.0)),
            obj.get("variant", "three-way"),
            int(obj.get("p_target", obj.get("p", 0))),
            tuple(obj.get("names", ())),
        )


def build_q_matrix(mi: MiMatrix, p: int, lam: float | None = None) -> QMatrix:
    """Assemble Q from a term matrix for target cardinality ``p``.

    ``lam`` defaults to 1/(p-1) and may be overridden (e.g. with 1/(N-1) to
    reproduce the ambient-N weighting of the un-truncated criterion).
    """
    n = mi.n
    if p < 2:
        raise ConfigError(f"P={p}: the redundancy weight 1/(P-1) needs P >= 2")
    if p > n:
        raise ConfigError(f"P={p} exceeds the number of features {n}")
    if lam is None:
        lam = 1.0 / (p - 1)
    q = np.diag(mi.relevance) - 0.5 * lam * mi.redundancy
    return QMatrix(q, lam, mi.variant, p, mi.names)


def quadratic_form(q, s) -> float:
    """x'Qx for the 0/1 indicator of subset ``s``."""
    arr = q.q if isinstance(q, QMatrix) else np.asarray(q, float)
    s = _validate_subset(arr.shape[0], s)
    x = np.zeros(arr.shape[0])
    x[list(s)] = 1.0
    return float(x @ arr @ x)


def quadratic_oracle(q, descriptor: str = "quadratic",
                     cardinality_hint: int | None = None) -> SubsetOracle:
    """SubsetOracle evaluating the indicator quadratic form of ``q``."""
    arr = q.q if isinstance(q, QMatrix) else np.asarray(q, float)
    return SubsetOracle(lambda s: quadratic_form(arr, s), descriptor,
                        arr.shape[0], cardinality_hint)
