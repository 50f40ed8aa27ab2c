"""Shared test utilities: CSV writers, random instances, brute-force oracles."""

import itertools

import numpy as np

from miselect import MiMatrix, quadratic_form


def write_csv(path, data, label_name="label"):
    """Dump a DiscreteDataset to a CSV with the label as the last column."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(data.names + (label_name,)) + "\n")
        for row, lab in zip(data.values, data.labels):
            fh.write(",".join(str(int(v)) for v in row) + f",{int(lab)}\n")
    return str(path)


def exhaustive_hom(qu, n, p):
    """Brute-force optimum of y'Qu y over sign vectors encoding |s| = p."""
    best = -np.inf
    for combo in itertools.combinations(range(n), p):
        y = -np.ones(n + 1)
        y[0] = 1.0
        for i in combo:
            y[i + 1] = 1.0
        best = max(best, float(y @ qu @ y))
    return best


def exhaustive_hom_argmax(qu, n, p):
    """Like exhaustive_hom, but also returns the winning sign vector."""
    best, best_y = -np.inf, None
    for combo in itertools.combinations(range(n), p):
        y = -np.ones(n + 1)
        y[0] = 1.0
        for i in combo:
            y[i + 1] = 1.0
        val = float(y @ qu @ y)
        if val > best:
            best, best_y = val, y
    return best, best_y


def best_subset(q_arr, n, p):
    """Brute-force argmax of the indicator quadratic form at |s| = p."""
    best_set, best_score = None, -np.inf
    for combo in itertools.combinations(range(n), p):
        score = quadratic_form(q_arr, combo)
        if score > best_score:
            best_set, best_score = combo, score
    return best_set, best_score


def random_mi_matrix(rng, n, variant):
    """Random term matrix: nonneg relevance; redundancy per variant's rules."""
    rel = rng.uniform(0.0, 1.0, size=n)
    if variant == "pairwise":
        red = rng.uniform(0.0, 0.6, size=(n, n))
    else:
        red = rng.uniform(-0.6, 0.6, size=(n, n))
    red = 0.5 * (red + red.T)
    np.fill_diagonal(red, 0.0)
    names = tuple(f"x{i + 1}" for i in range(n))
    return MiMatrix(names, rel, red, variant)


def random_q_instance(rng, n, style):
    """Symmetric Q matrices in a few shapes the relaxation should handle."""
    if style == "gauss":
        q = rng.standard_normal((n, n))
    elif style == "nonneg":
        q = rng.uniform(0.0, 1.0, size=(n, n))
    elif style == "lowrank":
        u = rng.standard_normal((n, 2))
        q = u @ u.T - 0.5
    elif style == "diag":
        q = np.diag(rng.uniform(0.0, 2.0, size=n)) \
            + 0.05 * rng.standard_normal((n, n))
    else:  # sparse-ish
        q = rng.standard_normal((n, n)) * (rng.random((n, n)) < 0.3)
    return 0.5 * (q + q.T)
