"""End-to-end runs: config -> dataset -> terms -> search/eval -> envelope.

Both front ends (CLI and HTTP service) funnel through the ``*_on_dataset``
functions here, so a run is byte-reproducible from its echoed config no
matter which door it came in.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import asdict, dataclass

import numpy as np

from ._version import __version__
from .criteria import (MEASURES, build_q_matrix, criterion_oracle,
                       quadratic_oracle, QMatrix)
from .dataset import DiscreteDataset, discretize, load_csv
from .errors import ConfigError, DataError, SolverError
from .eval import CvConfig, cross_validate, p_search, similarity_ratio
from .infotheory import empirical_mi_terms
from .sdp import cobra, homogenize, randomized_round, size_adjust, solve_sdp
from .search import backward_elimination, exhaustive, forward_selection
from .verify import verify_report

SEARCHES = ("fs", "be", "exhaustive", "cobra")
FORMATS = ("json", "table")


@dataclass(frozen=True)
class RunConfig:
    """One flat bag of knobs for a reproducible run.

    Flag combinations are validated up front (``validate``) so a bad config
    never reaches computation.
    """

    command: str = ""
    input: str | None = None
    label: str | int | None = None
    measure: str = "mrmr"
    search: str = "fs"
    p: int | None = None
    grid: tuple[int, ...] | None = None
    bins: int = 5
    strategy: str = "equal-frequency"
    missing: str = "drop"
    miller_madow: bool = False
    lam: float | None = None
    rounds: int = 100
    seed: int = 0
    tol: float = 1e-6
    max_iter: int = 200
    restrict: bool = True
    on_nonconverge: str = "fail"
    threads: int | None = None
    folds: int = 5
    loo: bool = False
    classifier: str = "naive-bayes"
    knn_k: int = 3
    stratified: bool = True
    features: tuple[int, ...] | None = None
    include_matrix: bool = False
    format: str = "json"
    output: str | None = None

    def validate(self):
        if self.measure not in MEASURES:
            raise ConfigError(
                f"unknown measure '{self.measure}' (use {'|'.join(MEASURES)})")
        if self.search not in SEARCHES:
            raise ConfigError(
                f"unknown search '{self.search}' (use {'|'.join(SEARCHES)})")
        if self.format not in FORMATS:
            raise ConfigError(f"unknown format '{self.format}'")
        if self.on_nonconverge not in ("fail", "proceed"):
            raise ConfigError(
                f"unknown non-convergence policy '{self.on_nonconverge}'")
        if self.bins < 2:
            raise ConfigError(f"bins must be >= 2 (got {self.bins})")
        # solve-sdp treats rounds=0 as "diagnostics only, skip rounding"
        min_rounds = 0 if self.command == "solve-sdp" else 1
        if self.rounds < min_rounds:
            raise ConfigError(f"rounds must be >= {min_rounds}")
        if self.tol <= 0:
            raise ConfigError("tol must be positive")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be >= 1")
        if not self.loo and self.folds < 2:
            raise ConfigError(f"folds must be >= 2 (got {self.folds})")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.command == "select":
            if self.p is None:
                raise ConfigError("select needs a target cardinality (--p)")
            if self.p < 1:
                raise ConfigError("p must be >= 1")
            if self.search == "cobra" and self.p < 2:
                raise ConfigError("cobra requires p >= 2")
        if self.command == "psearch":
            if not self.grid:
                raise ConfigError("psearch needs a cardinality grid (--grid)")
            if self.search == "cobra" and min(self.grid) < 2:
                raise ConfigError("cobra requires p >= 2 on the whole grid")
        if self.command in ("select", "evaluate", "psearch", "solve-sdp") \
                and not self.input:
            raise ConfigError(f"{self.command} needs an input path")
        return self


def parse_grid(spec) -> tuple[int, ...]:
    """'1:10' -> 1..10; '2,4,7' -> (2,4,7); ranges and singletons may mix."""
    if spec is None:
        raise ConfigError("empty cardinality grid")
    if isinstance(spec, (list, tuple)):
        vals = [int(v) for v in spec]
    else:
        vals = []
        for token in str(spec).split(","):
            token = token.strip()
            if not token:
                continue
            if ":" in token:
                lo, _, hi = token.partition(":")
                try:
                    lo, hi = int(lo), int(hi)
                except ValueError:
                    raise ConfigError(f"bad grid range '{token}'") from None
                if lo > hi:
                    raise ConfigError(f"bad grid range '{token}' (lo > hi)")
                vals.extend(range(lo, hi + 1))
            else:
                try:
                    vals.append(int(token))
                except ValueError:
                    raise ConfigError(f"bad grid entry '{token}'") from None
    if not vals:
        raise ConfigError("empty cardinality grid")
    return tuple(sorted(set(vals)))


def envelope(cfg: RunConfig, result: dict) -> dict:
    """Reproducibility wrapper: command + full config echo + version."""
    config = asdict(cfg)
    return {"command": cfg.command, "version": __version__,
            "config": config, "result": result}


def build_dataset(cfg: RunConfig) -> DiscreteDataset:
    if not cfg.input:
        raise ConfigError("input path required")
    if cfg.label is None:
        raise ConfigError("label column required (--label)")
    raw = load_csv(cfg.input, cfg.label)
    return discretize(raw, bins=cfg.bins, strategy=cfg.strategy,
                      missing=cfg.missing)


def _measure_lambda(measure: str, p: int, override: float | None) -> float | None:
    """Off-diagonal weight for the Q matrix of each measure.

    maxrel is purely diagonal; mifs/d1 subtract the raw pair sum (weight 1);
    mrmr/d2/jmi balance by 1/(P-1) (build_q_matrix's default, None here).
    """
    if override is not None:
        return override
    if measure == "maxrel":
        return 0.0
    if measure in ("mifs", "d1"):
        return 1.0
    return None


def _q_for_measure(cfg: RunConfig, p: int, three, pair) -> QMatrix:
    mi = pair if cfg.measure in ("mifs", "mrmr") else three
    return build_q_matrix(mi, p, lam=_measure_lambda(cfg.measure, p, cfg.lam))


def _run_search(cfg: RunConfig, data: DiscreteDataset, oracle, p: int,
                three, pair):
    if cfg.search == "fs":
        return forward_selection(oracle, data.n, p)
    if cfg.search == "be":
        return backward_elimination(oracle, data.n, p)
    if cfg.search == "exhaustive":
        return exhaustive(oracle, data.n, p)
    q = _q_for_measure(cfg, p, three, pair)
    return cobra(q, oracle, p, rounds=cfg.rounds, seed=cfg.seed, tol=cfg.tol,
                 max_iter=cfg.max_iter, restrict=cfg.restrict,
                 on_nonconverge=cfg.on_nonconverge, threads=cfg.threads)


def select_on_dataset(data: DiscreteDataset, cfg: RunConfig) -> dict:
    three, pair = empirical_mi_terms(data, miller_madow=cfg.miller_madow)
    oracle = criterion_oracle(cfg.measure, mi_three=three, mi_pair=pair,
                              source=data, cardinality_hint=cfg.p)
    sel = _run_search(cfg, data, oracle, cfg.p, three, pair)
    out = sel.to_json()
    out["names"] = [data.names[i] for i in sel.selected]
    out["oracle"] = {"calls": oracle.calls, "evaluations": oracle.evaluations}
    return out


def evaluate_on_dataset(data: DiscreteDataset, cfg: RunConfig) -> dict:
    feats = cfg.features if cfg.features is not None else tuple(range(data.n))
    cv = CvConfig(folds=cfg.folds, loo=cfg.loo, classifier=cfg.classifier,
                  knn_k=cfg.knn_k, seed=cfg.seed, stratified=cfg.stratified)
    rep = cross_validate(data, feats, cv)
    out = rep.to_json()
    out["features"] = [int(i) for i in sorted(feats)]
    out["names"] = [data.names[i] for i in sorted(feats)]
    return out


def psearch_on_dataset(data: DiscreteDataset, cfg: RunConfig) -> dict:
    grid = parse_grid(cfg.grid)
    if grid[0] < 1 or grid[-1] > data.n:
        raise ConfigError(f"grid outside 1..{data.n}: {list(grid)}")
    three, pair = empirical_mi_terms(data, miller_madow=cfg.miller_madow)
    oracle = criterion_oracle(cfg.measure, mi_three=three, mi_pair=pair,
                              source=data)

    def selector(p):
        return _run_search(cfg, data, oracle, p, three, pair)

    cv = CvConfig(folds=cfg.folds, loo=cfg.loo, classifier=cfg.classifier,
                  knn_k=cfg.knn_k, seed=cfg.seed, stratified=cfg.stratified)
    rep = p_search(data, selector, grid, cv)
    if len(rep.curve) >= 2:
        ratios = similarity_ratio([row["selected"] for row in rep.curve])
        rep = dataclasses.replace(rep, similarity=tuple(ratios))
    out = rep.to_json()
    for row in out.get("curve", []):
        row["names"] = [data.names[i] for i in row["selected"]]
    return out


def sdp_on_matrix(q_arr: np.ndarray, p: int, cfg: RunConfig) -> dict:
    problem = homogenize(q_arr, p)
    sol = solve_sdp(problem, tol=cfg.tol, max_iter=cfg.max_iter)
    if sol.status != "converged" and cfg.on_nonconverge == "fail":
        worst = max(sol.residuals.values())
        raise SolverError(
            f"SDP did not converge within {cfg.max_iter} iterations "
            f"(worst residual {worst:.2e})")
    out = {"solution": sol.to_json(include_matrix=cfg.include_matrix)}
    if cfg.rounds > 0:
        oracle = quadratic_oracle(q_arr, cardinality_hint=p)
        streams = np.random.SeedSequence(cfg.seed).spawn(cfg.rounds)
        best_set, best_score = None, -np.inf
        for r in range(cfg.rounds):
            cand = randomized_round(sol, streams[r])
            adjusted = size_adjust(cand, oracle, p, restrict=cfg.restrict)
            score = oracle(adjusted)
            if score > best_score or (score == best_score
                                      and adjusted < best_set):
                best_set, best_score = adjusted, score
        out["rounded"] = {"selected": [int(i) for i in best_set],
                          "score": float(best_score),
                          "rounds": cfg.rounds, "seed": cfg.seed}
    return out


# ------------------------------------------------------------------
# disk-facing wrappers (one per CLI command)


def run_select(cfg: RunConfig) -> dict:
    cfg.validate()
    return envelope(cfg, select_on_dataset(build_dataset(cfg), cfg))


def run_evaluate(cfg: RunConfig) -> dict:
    cfg.validate()
    return envelope(cfg, evaluate_on_dataset(build_dataset(cfg), cfg))


def run_psearch(cfg: RunConfig) -> dict:
    cfg.validate()
    return envelope(cfg, psearch_on_dataset(build_dataset(cfg), cfg))


def run_verify(cfg: RunConfig) -> dict:
    cfg.validate()
    return envelope(cfg, verify_report(seed=cfg.seed))


def run_solve_sdp(cfg: RunConfig) -> dict:
    cfg.validate()
    try:
        with open(cfg.input, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read problem file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"problem file is not valid JSON: {exc}") from exc
    if "q" not in obj:
        raise DataError("problem file lacks a 'q' matrix")
    q_arr = np.asarray(obj["q"], dtype=float)
    p = cfg.p if cfg.p is not None else obj.get("p", obj.get("p_target"))
    if p is None:
        raise ConfigError("target cardinality required (--p or 'p' in the file)")
    return envelope(cfg, sdp_on_matrix(q_arr, int(p), cfg))


RUNNERS = {
    "select": run_select,
    "evaluate": run_evaluate,
    "psearch": run_psearch,
    "verify": run_verify,
    "solve-sdp": run_solve_sdp,
}
