"""Command-line front end.

Commands: select | evaluate | psearch | verify | solve-sdp | serve.
Option precedence, lowest to highest: built-in defaults, config file
(KEY=VALUE lines via --config), MISELECT_* environment variables, explicit
flags. With --server URL the command is forwarded to a running service
instead of executing in-process; outputs are identical either way.

Exit codes: 0 success, 1 verify-suite failure, 2 config error, 3 data
error, 4 solver non-convergence under the fail policy.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from ._version import __version__
from .errors import ConfigError, DataError, SolverError, ToolkitError
from .pipeline import RUNNERS, RunConfig

ENV_PREFIX = "MISELECT_"

_INT_KEYS = ("p", "bins", "rounds", "seed", "max_iter", "folds", "knn_k",
             "threads")
_FLOAT_KEYS = ("tol", "lam")
_BOOL_KEYS = ("miller_madow", "restrict", "loo", "stratified",
              "include_matrix")


def _parse_bool(raw: str) -> bool:
    low = str(raw).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: '{raw}'")


def _cast_features(raw) -> tuple[int, ...]:
    if isinstance(raw, (list, tuple)):
        return tuple(int(i) for i in raw)
    try:
        return tuple(int(tok) for tok in str(raw).split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"bad feature list '{raw}'") from None


def _coerce(key: str, raw):
    """Turn a config-file/env string into the typed value a flag would give."""
    if not isinstance(raw, str):
        return raw
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: '{raw}'") from None
    if key in _BOOL_KEYS:
        return _parse_bool(raw)
    return raw


def _read_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    known = {f.name for f in dataclasses.fields(RunConfig)} - {"command"}
    out = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected KEY=VALUE")
        key, _, value = line.partition("=")
        key = key.strip().lower().replace("-", "_")
        if key not in known:
            raise ConfigError(f"{path}:{lineno}: unknown config key '{key}'")
        out[key] = _coerce(key, value.strip())
    return out


def _env_overrides() -> dict:
    out = {}
    for field in dataclasses.fields(RunConfig):
        if field.name == "command":
            continue
        raw = os.environ.get(ENV_PREFIX + field.name.upper())
        if raw is not None:
            out[field.name] = _coerce(field.name, raw)
    return out


def _assemble(args: argparse.Namespace) -> RunConfig:
    merged = {f.name: f.default for f in dataclasses.fields(RunConfig)}
    if getattr(args, "config", None):
        merged.update(_read_config_file(args.config))
    merged.update(_env_overrides())
    for key, value in vars(args).items():
        if key in merged and key != "command" and value is not None:
            merged[key] = value
    merged["command"] = args.command
    if merged.get("features") is not None:
        merged["features"] = _cast_features(merged["features"])
    return RunConfig(**merged)


# ---------------------------------------------------------------------------
# parser


def _add_common(sub):
    sub.add_argument("--config", help="KEY=VALUE config file")
    sub.add_argument("--server", help="forward to a running service at URL")
    sub.add_argument("--format", choices=("json", "table"),
                     help="output format (default json)")
    sub.add_argument("--output", help="write output to this path")
    sub.add_argument("--seed", type=int, help="random seed")
    sub.add_argument("--threads", type=int, help="worker thread cap")


def _add_data(sub):
    sub.add_argument("--input", "-i", help="input CSV path")
    sub.add_argument("--label", "-l", help="label column name or 0-based index")
    sub.add_argument("--bins", type=int, help="discretization bins (default 5)")
    sub.add_argument("--strategy", choices=("equal-frequency", "equal-width"),
                     help="binning strategy")
    sub.add_argument("--missing", choices=("drop", "impute"),
                     help="missing-value policy")


def _add_selection(sub):
    sub.add_argument("--measure", "-m",
                     choices=("maxrel", "mifs", "mrmr", "jmi", "d1", "d2"),
                     help="subset score (default mrmr)")
    sub.add_argument("--search", "-s",
                     choices=("fs", "be", "exhaustive", "cobra"),
                     help="search strategy (default fs)")
    sub.add_argument("--lam", type=float,
                     help="override the Q-matrix redundancy weight")
    sub.add_argument("--miller-madow", action=argparse.BooleanOptionalAction,
                     help="bias-correct plug-in entropies")
    sub.add_argument("--rounds", type=int, help="rounding rounds (cobra)")
    sub.add_argument("--tol", type=float, help="SDP tolerance")
    sub.add_argument("--max-iter", type=int, help="SDP iteration budget")
    sub.add_argument("--restrict", action=argparse.BooleanOptionalAction,
                     help="keep size adjustment inside the rounded candidate")
    sub.add_argument("--on-nonconverge", choices=("fail", "proceed"),
                     help="policy when the SDP hits its budget")


def _add_cv(sub):
    sub.add_argument("--folds", type=int, help="CV folds (default 5)")
    sub.add_argument("--loo", action=argparse.BooleanOptionalAction,
                     help="leave-one-out CV")
    sub.add_argument("--classifier", choices=("naive-bayes", "nb", "knn"),
                     help="built-in classifier")
    sub.add_argument("--knn-k", type=int, help="neighbours for knn (odd)")
    sub.add_argument("--stratified", action=argparse.BooleanOptionalAction,
                     help="stratify folds by class")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="miselect",
        description="Mutual-information feature selection toolkit")
    parser.add_argument("--version", action="version",
                        version=f"miselect {__version__}")
    subs = parser.add_subparsers(dest="command")

    sel = subs.add_parser("select", help="select a feature subset")
    _add_common(sel)
    _add_data(sel)
    _add_selection(sel)
    sel.add_argument("--p", "-p", type=int, help="target subset size")

    ev = subs.add_parser("evaluate", help="cross-validate a feature subset")
    _add_common(ev)
    _add_data(ev)
    _add_cv(ev)
    ev.add_argument("--features", help="comma-separated feature indices "
                                       "(default: all)")

    ps = subs.add_parser("psearch", help="search the subset cardinality")
    _add_common(ps)
    _add_data(ps)
    _add_selection(ps)
    _add_cv(ps)
    ps.add_argument("--grid", help="cardinality grid, e.g. 1:10 or 2,4,8")

    ver = subs.add_parser("verify", help="run the exact-identity self checks")
    _add_common(ver)

    sdp = subs.add_parser("solve-sdp", help="solve a relaxation problem JSON")
    _add_common(sdp)
    sdp.add_argument("--input", "-i", help="problem JSON path (q matrix + p)")
    sdp.add_argument("--p", "-p", type=int, help="target subset size")
    sdp.add_argument("--tol", type=float, help="SDP tolerance")
    sdp.add_argument("--max-iter", type=int, help="SDP iteration budget")
    sdp.add_argument("--rounds", type=int,
                     help="rounding rounds (0 = diagnostics only)")
    sdp.add_argument("--restrict", action=argparse.BooleanOptionalAction)
    sdp.add_argument("--on-nonconverge", choices=("fail", "proceed"))
    sdp.add_argument("--include-matrix", action=argparse.BooleanOptionalAction,
                     help="embed the PSD matrix in the output")

    srv = subs.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    return parser


# ---------------------------------------------------------------------------
# remote client


def _data_payload(cfg: RunConfig) -> dict:
    return {"path": cfg.input, "label": cfg.label, "bins": cfg.bins,
            "strategy": cfg.strategy, "missing": cfg.missing}


def _remote(base: str, cfg: RunConfig) -> dict:
    import httpx

    base = base.rstrip("/")
    cfg.validate()
    if cfg.command == "verify":
        resp = httpx.get(f"{base}/verify", params={"seed": cfg.seed},
                         timeout=600.0)
    elif cfg.command == "select":
        resp = httpx.post(f"{base}/select", timeout=600.0, json={
            "data": _data_payload(cfg), "measure": cfg.measure,
            "search": cfg.search, "p": cfg.p, "lam": cfg.lam,
            "miller_madow": cfg.miller_madow, "rounds": cfg.rounds,
            "seed": cfg.seed, "tol": cfg.tol, "max_iter": cfg.max_iter,
            "restrict": cfg.restrict, "on_nonconverge": cfg.on_nonconverge,
            "threads": cfg.threads})
    elif cfg.command == "evaluate":
        features = list(cfg.features) if cfg.features is not None else None
        resp = httpx.post(f"{base}/evaluate", timeout=600.0, json={
            "data": _data_payload(cfg), "features": features,
            "folds": cfg.folds, "loo": cfg.loo, "classifier": cfg.classifier,
            "knn_k": cfg.knn_k, "seed": cfg.seed,
            "stratified": cfg.stratified})
    elif cfg.command == "psearch":
        resp = httpx.post(f"{base}/psearch", timeout=600.0, json={
            "data": _data_payload(cfg), "measure": cfg.measure,
            "search": cfg.search, "grid": cfg.grid, "lam": cfg.lam,
            "miller_madow": cfg.miller_madow, "rounds": cfg.rounds,
            "seed": cfg.seed, "tol": cfg.tol, "max_iter": cfg.max_iter,
            "restrict": cfg.restrict, "on_nonconverge": cfg.on_nonconverge,
            "threads": cfg.threads, "folds": cfg.folds, "loo": cfg.loo,
            "classifier": cfg.classifier, "knn_k": cfg.knn_k,
            "stratified": cfg.stratified})
    elif cfg.command == "solve-sdp":
        try:
            with open(cfg.input, "r", encoding="utf-8") as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise DataError(f"cannot read problem file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DataError(f"problem file is not valid JSON: {exc}") from exc
        p = cfg.p if cfg.p is not None else obj.get("p", obj.get("p_target"))
        if p is None:
            raise ConfigError("target cardinality required")
        resp = httpx.post(f"{base}/solve-sdp", timeout=600.0, json={
            "q": obj["q"], "p": int(p), "tol": cfg.tol,
            "max_iter": cfg.max_iter, "rounds": cfg.rounds, "seed": cfg.seed,
            "restrict": cfg.restrict, "on_nonconverge": cfg.on_nonconverge,
            "include_matrix": cfg.include_matrix})
    else:
        raise ConfigError(f"command '{cfg.command}' cannot run remotely")
    if resp.status_code != 200:
        try:
            body = resp.json()
        except ValueError:
            raise DataError(f"service error {resp.status_code}: {resp.text}") \
                from None
        kind = {2: ConfigError, 3: DataError, 4: SolverError}.get(
            body.get("exit_code"), ToolkitError)
        raise kind(body.get("message", resp.text))
    return resp.json()


# ---------------------------------------------------------------------------
# table rendering


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def _table(headers, rows) -> list[str]:
    cells = [[_fmt(c) for c in row] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h)
              for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    for row in cells:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    return lines


def render_table(env: dict) -> str:
    command, result = env["command"], env["result"]
    lines = [f"command: {command} (miselect {env['version']})"]
    if command == "select":
        lines.append(f"selected: {', '.join(result['names'])}")
        lines.append(f"indices: {', '.join(str(i) for i in result['selected'])}")
        lines.append(f"score: {_fmt(result['score'])}")
        lines.append(f"strategy: {result['strategy']}")
        oracle = result.get("oracle", {})
        if oracle:
            lines.append(f"oracle calls: {oracle['calls']} "
                         f"(evaluations {oracle['evaluations']})")
        if result.get("trajectory"):
            heads = ("p", "round", "score") if result["strategy"] == "cobra" \
                else ("size", "moved", "score")
            lines.append("trajectory:")
            lines.extend("  " + ln for ln in
                         _table(heads, result["trajectory"]))
    elif command == "evaluate":
        lines.append(f"features: {', '.join(result['names'])}")
        lines.extend(_table(("fold", "accuracy"),
                            list(enumerate(result["fold_accuracies"]))))
        lines.append(f"mean accuracy: {_fmt(result['mean_accuracy'])}")
    elif command == "psearch":
        rows = [(row["p"], ", ".join(row["names"]),
                 row["mean_accuracy"]) for row in result["curve"]]
        lines.extend(_table(("P", "selected", "mean accuracy"), rows))
        lines.append(f"selected P: {result['selected_p']}")
        if result.get("similarity"):
            lines.append("similarity: "
                         + ", ".join(_fmt(s) for s in result["similarity"]))
    elif command == "verify":
        rows = [(c["name"], c["worst"], c["tol"],
                 "pass" if c["ok"] else "FAIL") for c in result["checks"]]
        lines.extend(_table(("check", "worst", "tol", "status"), rows))
        lines.append("overall: " + ("passed" if result["passed"] else "FAILED"))
    elif command == "solve-sdp":
        sol = result["solution"]
        for key in ("status", "objective", "iterations", "dual_bound",
                    "certificate_slack"):
            lines.append(f"{key.replace('_', ' ')}: {_fmt(sol[key])}")
        for name, val in sol["residuals"].items():
            lines.append(f"residual {name}: {_fmt(val)}")
        if "rounded" in result:
            sel = ", ".join(str(i) for i in result["rounded"]["selected"])
            lines.append(f"rounded subset: {sel} "
                         f"(score {_fmt(result['rounded']['score'])})")
    else:
        lines.append(json.dumps(result, indent=2, sort_keys=True))
    return "\n".join(lines) + "\n"


def _emit(text: str, output: str | None):
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _serve(args) -> int:
    import uvicorn

    from .service import app
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return 2
    try:
        if args.command == "serve":
            return _serve(args)
        cfg = _assemble(args)
        if getattr(args, "server", None):
            env = _remote(args.server, cfg)
        else:
            env = RUNNERS[cfg.command](cfg)
        code = 0
        if cfg.command == "verify" and not env["result"]["passed"]:
            code = 1
        if cfg.format == "table":
            text = render_table(env)
        else:
            text = json.dumps(env, indent=2, sort_keys=True) + "\n"
        _emit(text, cfg.output)
        return code
    except ToolkitError as exc:
        print(f"miselect: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
