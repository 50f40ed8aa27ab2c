"""Bundled exact distributions, tiny datasets, and score tables.

These back the worked examples in the tests and the `verify` command: small
enough to hand-check, constructed in closed form (no estimation noise unless
a fixture says otherwise). Binary features use 0/1 codes; where a source
convention is +/-1 the mapping is -1 -> 0, +1 -> 1.
"""

from __future__ import annotations

import itertools

import numpy as np

from .criteria import SubsetOracle
from .dataset import DiscreteDataset, from_arrays
from .errors import ConfigError
from .infotheory import JointPmf, MiMatrix
from .search import oracle_from_table


def conditional_product_pmf(prior: float, cond, names=None) -> JointPmf:
    """Binary class, binary features independent given the class.

    ``prior`` is P(C=1); ``cond[i] = (P(X_i=1 | C=0), P(X_i=1 | C=1))``.
    """
    if not 0.0 < prior < 1.0:
        raise ConfigError(f"class prior {prior} not in (0, 1)")
    cond = [(float(a), float(b)) for a, b in cond]
    n = len(cond)
    if names is None:
        names = tuple(f"x{i + 1}" for i in range(n))
    probs = np.zeros((2,) * n + (2,))
    for cells in itertools.product((0, 1), repeat=n):
        for c in (0, 1):
            pc = prior if c == 1 else 1.0 - prior
            w = pc
            for i, x in enumerate(cells):
                p1 = cond[i][c]
                w *= p1 if x == 1 else 1.0 - p1
            probs[cells + (c,)] = w
    return JointPmf(tuple(names) + ("c",), (2,) * n + (2,), probs, class_var="c")


def example1_pmf() -> JointPmf:
    """Two binary features over a balanced binary class.

    X1 is a perfect one-sided indicator (always 1 on the positive class,
    coin-flip on the negative); X2 is a noisy two-sided one (1 w.p. 0.9 on
    positive, 0.3 on negative).
    """
    return conditional_product_pmf(0.5, [(0.5, 1.0), (0.3, 0.9)])


def example1_dataset() -> DiscreteDataset:
    """40-row sample whose cell counts realize example1_pmf exactly."""
    counts = {
        (1, 1, 1): 18, (1, 0, 1): 2,
        (0, 0, 0): 7, (0, 1, 0): 3, (1, 0, 0): 7, (1, 1, 0): 3,
    }
    return _dataset_from_cell_counts(counts, ("x1", "x2"))


def example2_pmf() -> JointPmf:
    """Two binary features over a 90/10 class split.

    X1 is again one-sided (1 on all positives, coin-flip on negatives);
    X2 is 1 w.p. 0.8 on positives and never on negatives, which makes it
    the weaker feature by truncated relevance but the stronger one by
    decision error.
    """
    return conditional_product_pmf(0.9, [(0.5, 1.0), (0.0, 0.8)])


def example2_dataset() -> DiscreteDataset:
    """100-row sample realizing example2_pmf exactly."""
    counts = {
        (1, 1, 1): 72, (1, 0, 1): 18,
        (0, 0, 0): 5, (1, 0, 0): 5,
    }
    return _dataset_from_cell_counts(counts, ("x1", "x2"))


def xor_pmf() -> JointPmf:
    """C = X1 xor X2 with independent fair-bit inputs.

    Each feature alone carries zero information; the pair determines the
    class. The signed three-way term I(X1;X2;C) is -1 bit (pure synergy).
    """
    probs = np.zeros((2, 2, 2))
    for a, b in itertools.product((0, 1), repeat=2):
        probs[a, b, a ^ b] = 0.25
    return JointPmf(("x1", "x2", "c"), (2, 2, 2), probs, class_var="c")


def xor_noise_dataset() -> DiscreteDataset:
    """400-row XOR with two weakly informative distractors.

    x1, x2 are the XOR inputs (crossed exactly, 100 rows per cell); the
    label is their parity. n1 agrees with the label on exactly 55% of rows
    and n2 on 60%, crossed within every (x1, x2) cell so each distractor is
    independent of the inputs given the label. Modular criteria rank the
    distractors above the inputs; pair-aware ones recover {x1, x2}.
    """
    rows, labels = [], []
    # per 100-row cell: (n1 agrees, n2 agrees) -> count; 0.55 x 0.60 crossed
    agree_counts = [((1, 1), 33), ((1, 0), 22), ((0, 1), 27), ((0, 0), 18)]
    for a, b in itertools.product((0, 1), repeat=2):
        c = a ^ b
        for (g1, g2), cnt in agree_counts:
            n1 = c if g1 else 1 - c
            n2 = c if g2 else 1 - c
            rows.extend([(a, b, n1, n2)] * cnt)
            labels.extend([c] * cnt)
    return from_arrays(np.array(rows), np.array(labels),
                       names=("x1", "x2", "n1", "n2"))


def negativity_pmf() -> JointPmf:
    """Two perfectly duplicated fair bits, class independent of both.

    Zero relevance, full pairwise redundancy: the balanced difference
    criteria go negative here (mrmr({1,2}) = -1 bit).
    """
    probs = np.zeros((2, 2, 2))
    for a in (0, 1):
        for c in (0, 1):
            probs[a, a, c] = 0.25
    return JointPmf(("x1", "x2", "c"), (2, 2, 2), probs, class_var="c")


def example3_table() -> dict:
    """Exact joint scores for a 4-feature complementarity scenario.

    Features 0 and 1 are individually useless but jointly worth 0.4
    (synergy); features 2 and 3 are worth 0.2 and 0.25 alone and add up
    cleanly. Forward selection from scratch lands on {2, 3}; backward
    elimination keeps {0, 1}; exhaustive search at P=2 certifies {2, 3}.
    """
    t = {
        (0,): 0.0, (1,): 0.0, (2,): 0.2, (3,): 0.25,
        (0, 1): 0.4, (0, 2): 0.2, (0, 3): 0.25,
        (1, 2): 0.2, (1, 3): 0.25, (2, 3): 0.45,
        (0, 1, 2): 0.6, (0, 1, 3): 0.65, (0, 2, 3): 0.45, (1, 2, 3): 0.45,
        (0, 1, 2, 3): 0.85,
    }
    return {frozenset(k): v for k, v in t.items()}


def example3_oracle(default=None) -> SubsetOracle:
    """SubsetOracle over :func:`example3_table`."""
    return oracle_from_table(example3_table(), 4, default=default)


def example3_mi_matrix() -> MiMatrix:
    """Three-way term matrix consistent with :func:`example3_table`.

    relevance = (0, 0, 0.2, 0.25); the only nonzero interaction term is
    I(X0;X1;C) = -0.4 (synergy), via I(Xi;Xj;C) = I(Xi;C) + I(Xj;C)
    - I(Xi,Xj;C) on the table's pair scores.
    """
    rel = np.array([0.0, 0.0, 0.2, 0.25])
    red = np.zeros((4, 4))
    red[0, 1] = red[1, 0] = -0.4
    return MiMatrix(("x1", "x2", "x3", "x4"), rel, red, "three-way")


def separable_dataset(rows_per_class: int = 20) -> DiscreteDataset:
    """Four classes encoded exactly by two binary features, plus two duds.

    b1, b2 are the two bits of the class index; z1, z2 cycle through fixed
    patterns identically within every class (so they are exactly
    class-independent). Holds P_opt = 2 for accuracy-driven cardinality
    search: error 0 at P >= 2, 1/2 at P = 1.
    """
    if rows_per_class < 6:
        raise ConfigError("need at least 6 rows per class to occupy z1's bins")
    rows, labels = [], []
    for c in range(4):
        b1, b2 = c >> 1, c & 1
        for r in range(rows_per_class):
            rows.append((b1, b2, r % 3, (r // 3) % 2))
            labels.append(c)
    return from_arrays(np.array(rows), np.array(labels),
                       names=("b1", "b2", "z1", "z2"))


def imap_pmf(rng: np.random.Generator, n_features: int = 3,
             max_card: int = 3) -> JointPmf:
    """Random pmf with mutually independent features and C a function of them.

    Each feature gets an independent marginal; the class is the product code
    of per-feature surjections f_i (some constant, collapsing that feature
    out of the class). Under this structure every pairwise and three-way
    interaction term vanishes, so all supported criteria agree with plain
    relevance summing.
    """
    if n_features < 1:
        raise ConfigError("need at least one feature")
    cards = [int(rng.integers(2, max_card + 1)) for _ in range(n_features)]
    # target alphabet per feature; force the first to be informative so the
    # class is non-degenerate
    reach = [2] + [int(rng.integers(1, 3)) for _ in range(n_features - 1)]
    maps = []
    for k, r in zip(cards, reach):
        base = np.concatenate([np.arange(r), rng.integers(0, r, size=k - r)])
        maps.append(rng.permutation(base))
    marginals = []
    for k in cards:
        w = rng.gamma(1.0, size=k) + 0.05
        marginals.append(w / w.sum())
    ny = int(np.prod(reach))
    probs = np.zeros(tuple(cards) + (ny,))
    for cells in np.ndindex(*cards):
        code = 0
        for i, x in enumerate(cells):
            code = code * reach[i] + int(maps[i][x])
        w = 1.0
        for i, x in enumerate(cells):
            w *= marginals[i][x]
        probs[cells + (code,)] = w
    names = tuple(f"x{i + 1}" for i in range(n_features)) + ("c",)
    return JointPmf(names, tuple(cards) + (ny,), probs, class_var="c")


def random_pmf(rng: np.random.Generator, n_features: int, max_card: int = 3,
               ny: int = 2, full_support: bool = False,
               with_class: bool = True) -> JointPmf:
    """Unstructured random joint pmf (gamma weights, optionally floored)."""
    if n_features < 1:
        raise ConfigError("need at least one feature")
    cards = tuple(int(rng.integers(2, max_card + 1)) for _ in range(n_features))
    shape = cards + (ny,) if with_class else cards
    w = rng.gamma(1.0, size=shape)
    if full_support:
        w = w + 0.05
    probs = w / w.sum()
    names = tuple(f"x{i + 1}" for i in range(n_features))
    if with_class:
        return JointPmf(names + ("c",), shape, probs, class_var="c")
    return JointPmf(names, shape, probs)


def class_conditional_pmf(rng: np.random.Generator, n_features: int,
                          max_card: int = 3, ny: int = 2) -> JointPmf:
    """Random full-support pmf with features independent given the class.

    The features are generally dependent marginally; only the conditional
    factorization H(X|C) = sum_i H(X_i|C) is guaranteed.
    """
    if n_features < 1:
        raise ConfigError("need at least one feature")
    cards = tuple(int(rng.integers(2, max_card + 1)) for _ in range(n_features))
    prior = rng.gamma(1.0, size=ny) + 0.2
    prior /= prior.sum()
    conds = []
    for k in cards:
        t = rng.gamma(1.0, size=(ny, k)) + 0.1
        conds.append(t / t.sum(axis=1, keepdims=True))
    probs = np.zeros(cards + (ny,))
    for cells in np.ndindex(*cards):
        for c in range(ny):
            w = prior[c]
            for i, x in enumerate(cells):
                w *= conds[i][c, x]
            probs[cells + (c,)] = w
    names = tuple(f"x{i + 1}" for i in range(n_features)) + ("c",)
    return JointPmf(names, cards + (ny,), probs, class_var="c")


def _dataset_from_cell_counts(counts: dict, names) -> DiscreteDataset:
    rows, labels = [], []
    for cell in sorted(counts):
        *feats, c = cell
        rows.extend([tuple(feats)] * counts[cell])
        labels.extend([c] * counts[cell])
    return from_arrays(np.array(rows), np.array(labels), names=tuple(names))
