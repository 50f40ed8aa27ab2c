"""Exact and plug-in information-theoretic quantities.

All quantities are in bits (log base 2). Exact operations act on a
:class:`JointPmf` — a dense probability table over a handful of small-alphabet
variables — and are pure functions, so every algebraic identity used by the
score functions can be tested to near machine precision. The plug-in path
treats count tables divided by M as exact distributions of the empirical
measure; with the (optional, default-off) Miller-Madow flag the entropies get
the usual (K-1)/(2M ln 2) bias term instead.

Sign conventions: two-way MI and conditional MI are nonnegative; the multiway
extension I(Y1;...;Yk) for k >= 3 is a signed measure and negative values
mean synergy (the XOR triple has I(X1;X2;C) = -1 bit).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .dataset import LABEL, DiscreteDataset, counts
from .errors import ConfigError, DataError

_LN2 = math.log(2.0)
_VARIANTS = ("three-way", "pairwise")


# ---------------------------------------------------------------------------
# exact probability tables


@dataclass(frozen=True)
class JointPmf:
    """Dense joint distribution over named small-alphabet variables.

    ``probs`` has one axis per name, shape ``card``. ``class_var`` optionally
    designates one variable as the class C; operations that need C (the
    expansions, Kirkwood over features) require it.
    """

    names: tuple[str, ...]
    card: tuple[int, ...]
    probs: np.ndarray
    class_var: str | None = None

    def __post_init__(self):
        names = tuple(self.names)
        card = tuple(int(k) for k in self.card)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "card", card)
        if len(set(names)) != len(names):
            raise DataError("duplicate variable names")
        if len(names) != len(card) or any(k < 1 for k in card):
            raise DataError("cardinalities do not match variable list")
        probs = np.asarray(self.probs, dtype=float).reshape(card)
        if probs.min() < -1e-12:
            raise DataError("negative probability mass")
        total = float(probs.sum())
        if abs(total - 1.0) > 1e-12:
            raise DataError(f"probability mass sums to {total!r}, not 1")
        probs = np.clip(probs, 0.0, None)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        if self.class_var is not None and self.class_var not in names:
            raise DataError(f"class variable '{self.class_var}' not among {names}")

    @property
    def features(self) -> tuple[str, ...]:
        """All variables except the designated class (if any)."""
        return tuple(n for n in self.names if n != self.class_var)

    def to_json(self) -> dict:
        return {
            "variables": [
                {"name": n, "cardinality": k} for n, k in zip(self.names, self.card)
            ],
            "probs": [float(x) for x in self.probs.ravel()],
            "class_var": self.class_var,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "JointPmf":
        names = tuple(v["name"] for v in obj["variables"])
        card = tuple(int(v["cardinality"]) for v in obj["variables"])
        return cls(names, card, np.asarray(obj["probs"], float), obj.get("class_var"))


def _axes(p: JointPmf, vars) -> tuple[int, ...]:
    vars = tuple(vars)
    if len(set(vars)) != len(vars):
        raise ConfigError(f"duplicate variables in {vars}")
    try:
        return tuple(p.names.index(v) for v in vars)
    except ValueError:
        unknown = [v for v in vars if v not in p.names]
        raise ConfigError(f"unknown variable name(s) {unknown}") from None


def marginal(p: JointPmf, vars) -> np.ndarray:
    """Marginal table with axes in the order of ``vars``."""
    axes = _axes(p, vars)
    drop = tuple(a for a in range(len(p.names)) if a not in axes)
    tbl = p.probs.sum(axis=drop) if drop else p.probs
    kept = [a for a in range(len(p.names)) if a in axes]
    return np.transpose(tbl, [kept.index(a) for a in axes])


def _h_table(table: np.ndarray) -> float:
    q = table[table > 0]
    return float(-(q * np.log2(q)).sum())


def _h(p: JointPmf, vars) -> float:
    """Entropy of a marginal; empty set has zero entropy by convention."""
    if not tuple(vars):
        return 0.0
    return _h_table(marginal(p, vars))


def entropy(p: JointPmf, vars) -> float:
    """Shannon entropy of the marginal on ``vars``; 0 log 0 := 0."""
    vars = tuple(vars)
    if not vars:
        raise ConfigError("entropy: empty variable set")
    return _h(p, vars)


def mutual_information(p: JointPmf, a, b) -> float:
    """I(A;B) = H(A) + H(B) - H(A,B); symmetric, >= 0 up to roundoff."""
    a, b = tuple(a), tuple(b)
    if not a or not b:
        raise ConfigError("mutual_information: empty variable set")
    if set(a) & set(b):
        raise ConfigError(f"overlapping subsets {a} and {b}")
    return _h(p, a) + _h(p, b) - _h(p, a + b)


def conditional_mi(p: JointPmf, a, b, given=()) -> float:
    """I(A;B|Z) = H(A,Z) + H(B,Z) - H(A,B,Z) - H(Z); Z may be empty."""
    a, b, given = tuple(a), tuple(b), tuple(given)
    if not a or not b:
        raise ConfigError("conditional_mi: empty variable set")
    sets = [set(a), set(b), set(given)]
    for s1, s2 in itertools.combinations(sets, 2):
        if s1 & s2:
            raise ConfigError(f"overlapping subsets among {a}, {b}, {given}")
    return _h(p, a + given) + _h(p, b + given) - _h(p, a + b + given) - _h(p, given)


def multiway_mi(p: JointPmf, vars) -> float:
    """Signed k-way mutual information via the recursion
    I(Y1;...;Yk) = I(Y1;...;Y_{k-1}) - I(Y1;...;Y_{k-1}|Yk)."""
    vars = tuple(vars)
    if len(vars) < 2:
        raise ConfigError("multiway_mi needs at least 2 variables")
    _axes(p, vars)  # validate names / duplicates up front
    return _multi(p, vars, ())


def _multi(p: JointPmf, vars, given) -> float:
    if len(vars) == 2:
        return conditional_mi(p, vars[:1], vars[1:], given)
    head, tail = vars[:-1], vars[-1]
    return _multi(p, head, given) - _multi(p, head, given + (tail,))


@dataclass(frozen=True)
class ExpansionTerms:
    """Per-order (already signed) contributions and their total."""

    orders: tuple[float, ...]
    total: float


def _expansion_pre(p: JointPmf) -> tuple[tuple[str, ...], str]:
    if p.class_var is None:
        raise ConfigError("expansion requires a designated class variable")
    feats = p.features
    if len(feats) > 8:
        raise ConfigError("expansions are limited to 8 features")
    if not feats:
        raise ConfigError("expansion requires at least one feature")
    return feats, p.class_var


def expansion_first(p: JointPmf) -> ExpansionTerms:
    """Inclusion-exclusion expansion of I(X;C).

    Order k contributes (-1)^(k+1) * sum over k-subsets S of the signed
    multiway MI I(S...;C); the orders sum to the joint I(X1..XN;C).
    """
    feats, cls = _expansion_pre(p)
    orders = []
    for k in range(1, len(feats) + 1):
        sign = 1.0 if k % 2 == 1 else -1.0
        tot = sum(
            multiway_mi(p, s + (cls,)) for s in itertools.combinations(feats, k)
        )
        orders.append(sign * tot)
    return ExpansionTerms(tuple(orders), float(sum(orders)))


def expansion_second(p: JointPmf) -> ExpansionTerms:
    """Chain-rule average expansion of I(X;C).

    Term k (k = 0..N-1) averages I(X_i;C|S) over all features i and all
    k-subsets S of the remaining features:

        t_k = [ sum_i sum_{|S|=k, S not containing i} I(X_i;C|S) ]
              / (2 * C(N-1, k)),

    so every t_k is nonnegative and the terms total (N/2) * I(X;C).
    """
    feats, cls = _expansion_pre(p)
    n = len(feats)
    orders = []
    for k in range(n):
        u = 0.0
        for i, f in enumerate(feats):
            rest = feats[:i] + feats[i + 1:]
            for s in itertools.combinations(rest, k):
                u += conditional_mi(p, (f,), (cls,), s)
        orders.append(u / (2.0 * math.comb(n - 1, k)))
    return ExpansionTerms(tuple(orders), float(sum(orders)))


# ---------------------------------------------------------------------------
# Kirkwood superposition cross-entropy


def kirkwood_cross_entropy(p: JointPmf) -> float:
    """Cross-entropy -E_P[log2 Phat(X)] of the 2nd-order Kirkwood
    reconstruction Phat(x) = prod_{i<j} P_ij / (prod_i P_i)^(N-2) over the
    feature variables.

    Algebraically equals sum_i H(X_i) - sum_{i<j} I(X_i;X_j); computing it
    from the reconstruction keeps that an independent identity check.
    """
    feats = p.features
    if len(feats) < 3:
        raise ConfigError("Kirkwood cross-entropy needs at least 3 features "
                          "(it is exact for 2)")
    full = marginal(p, feats)
    n = len(feats)
    singles = [full.sum(axis=tuple(a for a in range(n) if a != i)) for i in range(n)]
    pairs = {
        (i, j): full.sum(axis=tuple(a for a in range(n) if a not in (i, j)))
        for i, j in itertools.combinations(range(n), 2)
    }
    return _kirkwood_from_tables(full, singles, pairs)


def _kirkwood_from_tables(full: np.ndarray, singles, pairs) -> float:
    """Shared core, on explicit tables.

    When the marginals come from ``full`` itself the support guard cannot
    trigger (any cell with mass has positive marginals); the guard exists for
    inconsistent table sets.
    """
    n = full.ndim

    def lift(tbl, axes):
        shape = [1] * n
        for a, s in zip(axes, tbl.shape):
            shape[a] = s
        return np.asarray(tbl, float).reshape(shape)

    with np.errstate(divide="ignore", invalid="ignore"):
        log_hat = sum(np.log2(lift(t, ij)) for ij, t in pairs.items())
        log_hat = log_hat - (n - 2.0) * sum(
            np.log2(lift(t, (i,))) for i, t in enumerate(singles)
        )
    mask = full > 0
    if not np.isfinite(log_hat[mask]).all():
        raise DataError("Kirkwood undefined on support: a needed marginal is "
                        "zero where the joint has mass")
    return float(-(full[mask] * log_hat[mask]).sum())


# ---------------------------------------------------------------------------
# classification-error bounds


@dataclass(frozen=True)
class FanoBound:
    value: float
    degenerate: bool  # True when n_classes == 2 makes the bound vacuous


def fano_lower_bound(mi: float, h_c: float, n_classes: int) -> FanoBound:
    """Weak Fano lower bound max(0, (H(C) - I - 1) / log2(n_y - 1)).

    For two classes the denominator vanishes; the bound is returned as 0
    with the ``degenerate`` flag set.
    """
    if mi < 0 or h_c < 0:
        raise ConfigError("fano_lower_bound: negative inputs")
    if n_classes < 2:
        raise ConfigError("fano_lower_bound: need at least 2 classes")
    if n_classes == 2:
        return FanoBound(0.0, True)
    return FanoBound(max(0.0, (h_c - mi - 1.0) / math.log2(n_classes - 1)), False)


def hellman_raviv_upper_bound(mi: float, h_c: float) -> float:
    """Upper bound (H(C) - I) / 2, clipped to [0, 1]."""
    if mi < -1e-10 or mi > h_c + 1e-10:
        raise ConfigError(f"hellman_raviv: need 0 <= mi <= H(C), got mi={mi}, h_c={h_c}")
    return float(min(1.0, max(0.0, 0.5 * (h_c - mi))))


# ---------------------------------------------------------------------------
# relevance / redundancy term matrices


@dataclass(frozen=True)
class MiMatrix:
    """Per-feature relevance I(X_i;C) and pairwise redundancy terms.

    ``variant`` says what the redundancy matrix holds: "three-way" entries
    are the signed I(X_i;X_j;C), "pairwise" entries the plain I(X_i;X_j).
    """

    names: tuple[str, ...]
    relevance: np.ndarray
    redundancy: np.ndarray
    variant: str

    def __post_init__(self):
        rel = np.asarray(self.relevance, dtype=float)
        red = np.asarray(self.redundancy, dtype=float)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "relevance", rel)
        object.__setattr__(self, "redundancy", red)
        n = rel.shape[0]
        if self.variant not in _VARIANTS:
            raise ConfigError(f"variant must be one of {_VARIANTS}")
        if red.shape != (n, n) or len(self.names) != n:
            raise DataError("relevance/redundancy shapes disagree")
        if np.abs(red - red.T).max(initial=0.0) > 1e-12:
            raise DataError("redundancy matrix not symmetric")
        if np.abs(np.diag(red)).max(initial=0.0) != 0.0:
            raise DataError("redundancy diagonal must be zero")
        if rel.min(initial=0.0) < -1e-10:
            raise DataError("negative relevance entry")
        if self.variant == "pairwise" and red.min(initial=0.0) < -1e-10:
            raise DataError("pairwise redundancy must be nonnegative")
        rel.setflags(write=False)
        red.setflags(write=False)

    @property
    def n(self) -> int:
        return self.relevance.shape[0]

    def to_json(self) -> dict:
        return {
            "names": list(self.names),
            "relevance": [float(x) for x in self.relevance],
            "redundancy": [[float(x) for x in row] for row in self.redundancy],
            "variant": self.variant,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MiMatrix":
        return cls(
            tuple(obj["names"]),
            np.asarray(obj["relevance"], float),
            np.asarray(obj["redundancy"], float),
            obj["variant"],
        )


def _plug_entropy(table: np.ndarray, miller_madow: bool = False) -> float:
    t = np.asarray(table, dtype=float)
    m = t.sum()
    q = t[t > 0] / m
    h = float(-(q * np.log2(q)).sum())
    if miller_madow:
        h += (q.size - 1) / (2.0 * m * _LN2)
    return h


def empirical_mi_terms(data: DiscreteDataset,
                       miller_madow: bool = False) -> tuple[MiMatrix, MiMatrix]:
    """Plug-in MI terms, as a (three-way, pairwise) pair of MiMatrix.

    relevance[i] = I(X_i;C); three-way redundancy I(X_i;X_j;C) computed as
    I(X_i;X_j) - I(X_i;X_j|C); pairwise redundancy is I(X_i;X_j). With the
    Miller-Madow flag each entropy gets the small-sample bias term and the
    nonnegative quantities are floored at 0 so the type invariants survive.
    """
    n = data.n
    mm = miller_madow
    rel = np.zeros(n)
    red3 = np.zeros((n, n))
    red2 = np.zeros((n, n))
    for i in range(n):
        t = counts(data, (i, LABEL))
        val = _plug_entropy(t.sum(1), mm) + _plug_entropy(t.sum(0), mm) - _plug_entropy(t, mm)
        rel[i] = max(0.0, val) if mm else val
    for i, j in itertools.combinations(range(n), 2):
        t3 = counts(data, (i, j, LABEL))
        pair = (_plug_entropy(t3.sum((1, 2)), mm) + _plug_entropy(t3.sum((0, 2)), mm)
                - _plug_entropy(t3.sum(2), mm))
        cond = (_plug_entropy(t3.sum(1), mm) + _plug_entropy(t3.sum(0), mm)
                - _plug_entropy(t3, mm) - _plug_entropy(t3.sum((0, 1)), mm))
        if mm:
            pair = max(0.0, pair)
        red2[i, j] = red2[j, i] = pair
        red3[i, j] = red3[j, i] = pair - cond
    return (
        MiMatrix(data.names, rel, red3, "three-way"),
        MiMatrix(data.names, rel.copy(), red2, "pairwise"),
    )


def mi_terms_from_pmf(p: JointPmf) -> tuple[MiMatrix, MiMatrix]:
    """Exact-pmf counterpart of :func:`empirical_mi_terms`."""
    if p.class_var is None:
        raise ConfigError("mi_terms_from_pmf requires a designated class variable")
    feats, cls = p.features, p.class_var
    n = len(feats)
    rel = np.array([mutual_information(p, (f,), (cls,)) for f in feats])
    red3 = np.zeros((n, n))
    red2 = np.zeros((n, n))
    for i, j in itertools.combinations(range(n), 2):
        pair = mutual_information(p, (feats[i],), (feats[j],))
        cond = conditional_mi(p, (feats[i],), (feats[j],), (cls,))
        red2[i, j] = red2[j, i] = pair
        red3[i, j] = red3[j, i] = pair - cond
    return (
        MiMatrix(feats, rel, red3, "three-way"),
        MiMatrix(feats, rel.copy(), red2, "pairwise"),
    )


def joint_pair_class_mi(source, i: int, j: int) -> float:
    """I(X_i, X_j; C) from either a DiscreteDataset or a JointPmf."""
    if i == j:
        raise ConfigError("joint_pair_class_mi needs two distinct features")
    if isinstance(source, DiscreteDataset):
        t3 = counts(source, (i, j, LABEL))
        return (_plug_entropy(t3.sum(2)) + _plug_entropy(t3.sum((0, 1)))
                - _plug_entropy(t3))
    if isinstance(source, JointPmf):
        if source.class_var is None:
            raise ConfigError("pmf has no designated class variable")
        feats = source.features
        return mutual_information(source, (feats[i], feats[j]), (source.class_var,))
    raise ConfigError(f"unsupported MI source {type(source).__name__}")
