"""Subset search strategies over a SubsetOracle.

All strategies break score ties toward the lexicographically smaller index
(strict improvement required to displace the incumbent), which keeps every
run deterministic for a deterministic oracle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .criteria import SubsetOracle
from .errors import ConfigError, DataError


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of one search run.

    ``trajectory`` records (subset size after the move, feature index moved,
    score of the resulting subset) per greedy step; exhaustive search leaves
    it empty.
    """

    selected: tuple[int, ...]
    score: float
    trajectory: tuple[tuple[int, int, float], ...]
    strategy: str
    seed: int | None = None

    def to_json(self) -> dict:
        out = {
            "strategy": self.strategy,
            "selected": [int(i) for i in self.selected],
            "score": float(self.score),
            "trajectory": [[int(a), int(b), float(c)] for a, b, c in self.trajectory],
        }
        if self.seed is not None:
            out["seed"] = int(self.seed)
        return out


def _resolve_pool(n: int, pool) -> tuple[int, ...]:
    if pool is None:
        return tuple(range(n))
    pool = tuple(sorted({int(i) for i in pool}))
    if not pool:
        raise ConfigError("empty search pool")
    if pool[0] < 0 or pool[-1] >= n:
        raise ConfigError(f"pool index out of range (n={n})")
    return pool


def forward_selection(oracle: SubsetOracle, n: int, p: int, *,
                      start=(), pool=None) -> SelectionResult:
    """Grow a set one feature at a time, taking the best-scoring addition."""
    pool = _resolve_pool(n, pool)
    if not 1 <= p <= len(pool):
        raise ConfigError(f"target size {p} out of range 1..{len(pool)}")
    selected = list(dict.fromkeys(int(i) for i in start))
    if any(i not in pool for i in selected):
        raise ConfigError("start set not contained in the search pool")
    if len(selected) > p:
        raise ConfigError(f"start set already larger than target size {p}")
    traj = []
    while len(selected) < p:
        best_idx, best_score = None, -math.inf
        for m in pool:
            if m in selected:
                continue
            sc = oracle(selected + [m])
            if sc > best_score:
                best_idx, best_score = m, sc
        selected.append(best_idx)
        traj.append((len(selected), best_idx, best_score))
    return SelectionResult(tuple(sorted(selected)), oracle(selected),
                           tuple(traj), "fs")


def backward_elimination(oracle: SubsetOracle, n: int, p: int, *,
                         pool=None) -> SelectionResult:
    """Start from the full pool and drop the feature whose removal scores best."""
    pool = _resolve_pool(n, pool)
    if not 1 <= p <= len(pool):
        raise ConfigError(f"target size {p} out of range 1..{len(pool)}")
    selected = list(pool)
    traj = []
    while len(selected) > p:
        best_idx, best_score = None, -math.inf
        for m in selected:
            sc = oracle([i for i in selected if i != m])
            if sc > best_score:
                best_idx, best_score = m, sc
        selected.remove(best_idx)
        traj.append((len(selected), best_idx, best_score))
    return SelectionResult(tuple(sorted(selected)), oracle(selected),
                           tuple(traj), "be")


def exhaustive(oracle: SubsetOracle, n: int, p: int, *,
               cap: int = 2_000_000, pool=None) -> SelectionResult:
    """Score every size-p subset of the pool; refuse if there are > cap."""
    pool = _resolve_pool(n, pool)
    if not 1 <= p <= len(pool):
        raise ConfigError(f"target size {p} out of range 1..{len(pool)}")
    total = math.comb(len(pool), p)
    if total > cap:
        raise ConfigError(
            f"enumeration cap exceeded: C({len(pool)},{p}) = {total} > {cap}")
    best_set, best_score = None, -math.inf
    for combo in itertools.combinations(pool, p):
        sc = oracle(combo)
        if sc > best_score:
            best_set, best_score = combo, sc
    return SelectionResult(best_set, best_score, (), "exhaustive")


def oracle_from_table(entries: dict, n: int, default=None) -> SubsetOracle:
    """Oracle backed by an explicit {index set: score} table.

    ``default=None`` makes unlisted subsets an error; ``default="additive"``
    falls back to the sum of listed singleton scores (0 for unlisted
    singletons), which makes partially specified tables usable by greedy
    search without enumerating all 2^n - 1 sets.
    """
    if default not in (None, "additive"):
        raise ConfigError(f"unknown table default policy {default!r}")
    table = {frozenset(int(i) for i in k): float(v) for k, v in entries.items()}
    for key in table:
        if not key:
            raise ConfigError("score table contains the empty set")
        if min(key) < 0 or max(key) >= n:
            raise ConfigError(f"score table index out of range (n={n})")

    def fn(s):
        key = frozenset(s)
        if key in table:
            return table[key]
        if default == "additive":
            return sum(table.get(frozenset((i,)), 0.0) for i in key)
        raise DataError(f"subset {sorted(key)} absent from score table")

    return SubsetOracle(fn, "table", n)
