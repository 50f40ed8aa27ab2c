"""HTTP facade over the pipeline.

Each POST mirrors one CLI command and returns the same envelope the CLI
prints, so a run is reproducible regardless of which front end issued it.
Datasets arrive either as a server-local CSV path or as inline discrete
codes. Toolkit errors map to HTTP 400 with the CLI exit code in the body.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import pipeline
from ._version import __version__
from .dataset import DiscreteDataset, discretize, from_arrays, load_csv
from .errors import ConfigError, ToolkitError


class DataSpec(BaseModel):
    """A dataset by reference (CSV path) or by value (discrete codes)."""

    path: str | None = None
    label: str | int | None = None
    rows: list[list[int]] | None = None
    labels: list[int] | None = None
    names: list[str] | None = None
    bins: int = 5
    strategy: str = "equal-frequency"
    missing: str = "drop"


def _dataset(spec: DataSpec) -> DiscreteDataset:
    if spec.rows is not None:
        if spec.labels is None:
            raise ConfigError("inline rows need labels")
        names = tuple(spec.names) if spec.names else None
        return from_arrays(np.asarray(spec.rows, dtype=np.int64),
                           np.asarray(spec.labels, dtype=np.int64),
                           names=names)
    if spec.path is None:
        raise ConfigError("data needs a csv path or inline rows")
    if spec.label is None:
        raise ConfigError("label column required")
    raw = load_csv(spec.path, spec.label)
    return discretize(raw, bins=spec.bins, strategy=spec.strategy,
                      missing=spec.missing)


class SelectRequest(BaseModel):
    data: DataSpec
    measure: str = "mrmr"
    search: str = "fs"
    p: int
    lam: float | None = None
    miller_madow: bool = False
    rounds: int = 100
    seed: int = 0
    tol: float = 1e-6
    max_iter: int = 200
    restrict: bool = True
    on_nonconverge: str = "fail"
    threads: int | None = None


class EvaluateRequest(BaseModel):
    data: DataSpec
    features: list[int] | None = None
    folds: int = 5
    loo: bool = False
    classifier: str = "naive-bayes"
    knn_k: int = 3
    seed: int = 0
    stratified: bool = True


class PsearchRequest(BaseModel):
    data: DataSpec
    measure: str = "mrmr"
    search: str = "fs"
    grid: str | list[int]
    lam: float | None = None
    miller_madow: bool = False
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


class SdpRequest(BaseModel):
    q: list[list[float]]
    p: int
    tol: float = 1e-6
    max_iter: int = 200
    rounds: int = 0
    seed: int = 0
    restrict: bool = True
    on_nonconverge: str = "fail"
    include_matrix: bool = False


app = FastAPI(title="miselect", version=__version__)


@app.exception_handler(ToolkitError)
def _toolkit_error(request, exc: ToolkitError):
    return JSONResponse(status_code=400, content={
        "error": type(exc).__name__,
        "message": str(exc),
        "exit_code": exc.exit_code,
    })


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.get("/verify")
def verify(seed: int = 0):
    cfg = pipeline.RunConfig(command="verify", seed=seed)
    return pipeline.run_verify(cfg)


@app.post("/select")
def select(req: SelectRequest):
    cfg = pipeline.RunConfig(
        command="select", input=req.data.path, label=req.data.label,
        measure=req.measure, search=req.search, p=req.p, lam=req.lam,
        bins=req.data.bins, strategy=req.data.strategy,
        missing=req.data.missing, miller_madow=req.miller_madow,
        rounds=req.rounds, seed=req.seed, tol=req.tol,
        max_iter=req.max_iter, restrict=req.restrict,
        on_nonconverge=req.on_nonconverge, threads=req.threads)
    if req.search not in pipeline.SEARCHES:
        raise ConfigError(f"unknown search '{req.search}'")
    data = _dataset(req.data)
    if req.search == "cobra" and req.p < 2:
        raise ConfigError("cobra requires p >= 2")
    return pipeline.envelope(cfg, pipeline.select_on_dataset(data, cfg))


@app.post("/evaluate")
def evaluate(req: EvaluateRequest):
    cfg = pipeline.RunConfig(
        command="evaluate", input=req.data.path, label=req.data.label,
        bins=req.data.bins, strategy=req.data.strategy,
        missing=req.data.missing, folds=req.folds, loo=req.loo,
        classifier=req.classifier, knn_k=req.knn_k, seed=req.seed,
        stratified=req.stratified,
        features=tuple(req.features) if req.features is not None else None)
    data = _dataset(req.data)
    return pipeline.envelope(cfg, pipeline.evaluate_on_dataset(data, cfg))


@app.post("/psearch")
def psearch(req: PsearchRequest):
    grid = pipeline.parse_grid(req.grid)
    cfg = pipeline.RunConfig(
        command="psearch", input=req.data.path, label=req.data.label,
        measure=req.measure, search=req.search, grid=grid, lam=req.lam,
        bins=req.data.bins, strategy=req.data.strategy,
        missing=req.data.missing, miller_madow=req.miller_madow,
        rounds=req.rounds, seed=req.seed, tol=req.tol,
        max_iter=req.max_iter, restrict=req.restrict,
        on_nonconverge=req.on_nonconverge, threads=req.threads,
        folds=req.folds, loo=req.loo, classifier=req.classifier,
        knn_k=req.knn_k, stratified=req.stratified)
    if req.search == "cobra" and min(grid) < 2:
        raise ConfigError("cobra requires p >= 2 on the whole grid")
    data = _dataset(req.data)
    return pipeline.envelope(cfg, pipeline.psearch_on_dataset(data, cfg))


@app.post("/solve-sdp")
def solve_sdp_endpoint(req: SdpRequest):
    cfg = pipeline.RunConfig(
        command="solve-sdp", p=req.p, tol=req.tol, max_iter=req.max_iter,
        rounds=req.rounds, seed=req.seed, restrict=req.restrict,
        on_nonconverge=req.on_nonconverge, include_matrix=req.include_matrix)
    q_arr = np.asarray(req.q, dtype=float)
    return pipeline.envelope(cfg, pipeline.sdp_on_matrix(q_arr, req.p, cfg))
