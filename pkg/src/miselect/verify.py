"""Self-check suite: exact identities evaluated on bundled distributions.

Everything here has a closed-form right-hand side, so the suite needs no
reference data: it either holds to tolerance or the build is wrong. The CLI
`verify` command renders this report and exits non-zero on any failure.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import fixtures
from .criteria import score_d2, score_jmi, score_mifs, score_mrmr
from .infotheory import (conditional_mi, entropy, expansion_first,
                         expansion_second, kirkwood_cross_entropy,
                         mi_terms_from_pmf, multiway_mi, mutual_information)

__all__ = ["verify_report"]


def _joint_class_mi(p):
    return mutual_information(p, p.features, (p.class_var,))


def _pmf_bank(rng):
    bank = [fixtures.example1_pmf(), fixtures.example2_pmf(),
            fixtures.xor_pmf(), fixtures.negativity_pmf()]
    for n in (2, 3, 4, 5):
        for _ in range(3):
            bank.append(fixtures.random_pmf(rng, n, full_support=True))
    return bank


def verify_report(seed: int = 0) -> dict:
    """Run every identity check; returns {"passed", "seed", "checks": [...]}."""
    rng = np.random.default_rng(seed)
    bank = _pmf_bank(rng)
    checks = []

    def record(name, worst, tol, ok=None):
        ok = bool(worst <= tol) if ok is None else bool(ok)
        checks.append({"name": name, "worst": float(worst), "tol": float(tol),
                       "ok": ok})

    # inclusion-exclusion expansion: signed per-order sums total the joint MI
    worst = max(abs(expansion_first(p).total - _joint_class_mi(p)) for p in bank)
    record("first-expansion-total", worst, 1e-8)

    # chain-rule expansion: the t_k sum to (N/2) I(X;C) and are nonnegative
    worst = 0.0
    worst_neg = 0.0
    for p in bank:
        terms = expansion_second(p)
        n = len(p.features)
        worst = max(worst, abs(sum(terms.orders) - 0.5 * n * _joint_class_mi(p)))
        worst_neg = max(worst_neg, -min(terms.orders))
    record("second-expansion-total", worst, 1e-8)
    record("second-expansion-nonnegative", worst_neg, 1e-10)

    # chain rule itself, every feature ordering
    worst = 0.0
    for p in bank:
        feats = p.features
        if len(feats) > 4:
            continue
        total = _joint_class_mi(p)
        for perm in itertools.permutations(feats):
            acc = sum(conditional_mi(p, (f,), (p.class_var,), perm[:i])
                      for i, f in enumerate(perm))
            worst = max(worst, abs(acc - total))
    record("chain-rule-permutations", worst, 1e-8)

    # signed three-way terms against the pair decomposition
    worst = 0.0
    for p in bank:
        if len(p.features) < 2:
            continue
        three, _ = mi_terms_from_pmf(p)
        for i, j in itertools.combinations(range(three.n), 2):
            direct = multiway_mi(
                p, (p.features[i], p.features[j], p.class_var))
            pair_mi = mutual_information(
                p, (p.features[i], p.features[j]), (p.class_var,))
            identity = three.relevance[i] + three.relevance[j] - pair_mi
            worst = max(worst, abs(three.redundancy[i, j] - direct),
                        abs(direct - identity))
    record("three-way-identity", worst, 1e-8)

    # Kirkwood superposition cross-entropy equals the pairwise expansion
    worst = 0.0
    for n in (3, 4):
        for _ in range(5):
            p = fixtures.random_pmf(rng, n, full_support=True)
            _, pair = mi_terms_from_pmf(p)
            rhs = sum(entropy(p, (f,)) for f in p.features) - 0.5 * pair.redundancy.sum()
            worst = max(worst, abs(kirkwood_cross_entropy(p) - rhs))
    record("kirkwood-pairwise-expansion", worst, 1e-8)

    # under class-conditional independence the Kirkwood cross-entropy minus
    # H(X|C) reproduces the pairwise difference score on the full set
    worst = 0.0
    for n in (3, 4):
        for _ in range(5):
            p = fixtures.class_conditional_pmf(rng, n)
            _, pair = mi_terms_from_pmf(p)
            h_cond = entropy(p, p.names) - entropy(p, (p.class_var,))
            lhs = kirkwood_cross_entropy(p) - h_cond
            worst = max(worst, abs(lhs - score_mifs(pair, range(n))))
    record("kirkwood-score-chain", worst, 1e-6)

    # joint pair criterion is a scaled balanced difference at fixed size
    worst = 0.0
    for p in bank:
        n = len(p.features)
        if n < 2:
            continue
        three, _ = mi_terms_from_pmf(p)
        full = range(n)
        worst = max(worst, abs(score_jmi(p, full) - (n - 1) * score_d2(three, full)))
    record("jmi-d2-scaling", worst, 1e-8)

    # parity fixture: synergy values known exactly
    p = fixtures.xor_pmf()
    worst = max(
        abs(multiway_mi(p, ("x1", "x2", "c")) + 1.0),
        abs(mutual_information(p, ("x1", "x2"), ("c",)) - 1.0),
        abs(mutual_information(p, ("x1",), ("c",))),
        abs(mutual_information(p, ("x2",), ("c",))),
        abs(conditional_mi(p, ("x1",), ("c",), ("x2",)) - 1.0),
    )
    record("parity-synergy", worst, 1e-10)

    # duplicated-feature fixture: difference criteria must go negative...
    p = fixtures.negativity_pmf()
    _, pair = mi_terms_from_pmf(p)
    worst = max(score_mrmr(pair, (0, 1)), score_mifs(pair, (0, 1)))
    record("difference-criteria-negative", worst, 0.0, ok=worst < 0.0)

    # ...while the balanced three-way score stays nonnegative on exact pmfs
    worst = 0.0
    for p in bank:
        n = len(p.features)
        three, _ = mi_terms_from_pmf(p)
        for size in range(1, n + 1):
            for s in itertools.combinations(range(n), size):
                worst = max(worst, -score_d2(three, s))
    record("d2-nonnegative", worst, 1e-10)

    return {"passed": all(c["ok"] for c in checks), "seed": int(seed),
            "checks": checks}
