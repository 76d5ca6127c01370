"""Experiment harness: dataset wiring, explanation runs, sweeps, reports.

Subcommands: ``explain``, ``stability``, ``adherence``, ``compare-exact``,
``layers``. Every run writes a ``config.resolved.json`` next to its outputs,
and every output file carries the resolved configuration, so re-running a
command byte-reproduces its results.

Exit codes: 0 success, 2 configuration error, 3 external-model bridge error,
4 exact-oracle cap refusal.
"""

from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import exact, metrics
from .coalitions import layer_size, n_layers
from .data import as_int_labels, load_csv, split_indices
from .errors import ConfigError, ModelBridgeError, OracleCapError, StableShapError
from .explainer import LAYER1, Explanation, explain, fit, plan_for, sparsify
from .games import SyntheticGame
from .layer1 import layer1_attribution
from .models import (
    ClassProbabilityModel,
    ExternalProcessModel,
    GameModel,
    KNNClassifierModel,
    RidgeRegressionModel,
)
from .sampling import KERNEL_SHAP, ST_SHAP, materialize
from .value_function import anchors, evaluate_batch

SAMPLING_STRATEGIES = (KERNEL_SHAP, ST_SHAP)
ALL_STRATEGIES = (KERNEL_SHAP, ST_SHAP, LAYER1)


@dataclass
class RunConfig:
    """Everything a run needs; JSON config file fields mirror these names."""

    dataset: str | None = None
    target: str | None = None
    features: list[str] | None = None
    encodings: dict = field(default_factory=dict)
    model: str = "ridge"                 # ridge | knn | external | game
    model_command: str | None = None
    game_file: str | None = None
    knn_k: int = 5
    explained_class: int | None = None
    task: str | None = None              # regression | classification
    background_size: int = 100
    background_rows: list[int] | None = None
    heldout_fraction: float = 0.25
    split_seed: int = 0
    instances: list[int] | None = None
    n_instances: int = 10
    strategy: str | None = None          # per-command default when omitted
    budgets: list[int] = field(default_factory=list)
    explanation_size: int | None = 4
    explain_runs: int = 1
    runs_per_instance: int = 20
    master_seed: int = 0
    oracle_cap: int = 20
    workers: int = 1
    output: str = "stableshap-run"


def derive_seed(master: int, instance_key: int, budget: int, run: int) -> int:
    """One 64-bit seed per explanation run; distinct runs get distinct seeds."""
    ss = np.random.SeedSequence((master, instance_key, budget, run))
    return int(ss.generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------------------
# configuration loading and wiring


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    known = {f.name for f in fields(RunConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return raw


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        cfg = replace(cfg, **_load_config_file(args.config))
    overrides = {
        name: value
        for name, value in vars(args).items()
        if name in {f.name for f in fields(RunConfig)} and value is not None
    }
    cfg = replace(cfg, **overrides)
    if cfg.master_seed < 0:
        raise ConfigError("master seed must be non-negative")
    return cfg


@dataclass
class Wiring:
    """Resolved experiment pieces shared by the run commands."""

    cfg: RunConfig
    n_features: int
    feature_names: tuple[str, ...]
    task: str
    background: np.ndarray | None
    instances: list[tuple[int, np.ndarray | None]]  # (original row id, x)
    model_for: "callable"                            # instance x -> scalar adapter
    resolved: dict                                   # reproducibility header
    bridge: ExternalProcessModel | None = None

    def close(self):
        if self.bridge is not None:
            self.bridge.close()


def _resolve_instances(cfg: RunConfig, heldout: np.ndarray,
                       n_background: int, n_rows: int) -> list[int]:
    if cfg.instances is not None:
        bad = [i for i in cfg.instances if not 0 <= i < n_rows]
        if bad:
            raise ConfigError(f"instance rows out of range: {bad}")
        return list(cfg.instances)
    pool = heldout[n_background:]
    if len(pool) < cfg.n_instances:
        raise ConfigError(
            f"held-out split leaves {len(pool)} rows after the background block; "
            f"{cfg.n_instances} instances requested"
        )
    return [int(i) for i in pool[: cfg.n_instances]]


def wire(cfg: RunConfig) -> Wiring:
    """Load data, train or attach the model, and pin all derived choices."""
    if cfg.model == "game":
        if not cfg.game_file:
            raise ConfigError("model 'game' needs --game-file")
        game = SyntheticGame.load(cfg.game_file)
        adapter = GameModel(game)
        resolved = asdict(cfg) | {
            "resolved_n_features": game.n_players,
            "resolved_task": cfg.task or "regression",
            "resolved_instances": [0],
        }
        return Wiring(
            cfg=cfg,
            n_features=game.n_players,
            feature_names=tuple(f"player_{i}" for i in range(game.n_players)),
            task=cfg.task or "regression",
            background=None,
            instances=[(0, None)],
            model_for=lambda x: adapter,
            resolved=resolved,
        )

    if not cfg.dataset or not cfg.target:
        raise ConfigError("a dataset path and target column are required")
    ds = load_csv(cfg.dataset, cfg.target, cfg.features, cfg.encodings)
    n_rows, m = ds.X.shape
    fit_idx, heldout_idx = split_indices(n_rows, cfg.heldout_fraction, cfg.split_seed)

    if cfg.background_rows is not None:
        bad = [i for i in cfg.background_rows if not 0 <= i < n_rows]
        if bad:
            raise ConfigError(f"background rows out of range: {bad}")
        bg_rows = list(cfg.background_rows)
    else:
        bg_rows = [int(i) for i in heldout_idx[: min(cfg.background_size, len(heldout_idx))]]
    if not bg_rows:
        raise ConfigError("background set resolved to zero rows")
    background = ds.X[bg_rows]

    instance_rows = _resolve_instances(cfg, heldout_idx, len(bg_rows), n_rows)

    if cfg.model == "ridge":
        task = cfg.task or "regression"
        model = RidgeRegressionModel.fit(ds.X[fit_idx], ds.y[fit_idx])
        model_for = lambda x: model  # noqa: E731
    elif cfg.model == "knn":
        task = cfg.task or "classification"
        labels = as_int_labels(ds.y[fit_idx], ds.path)
        knn = KNNClassifierModel(ds.X[fit_idx], labels, k=cfg.knn_k)

        def model_for(x, _knn=knn):
            cls = cfg.explained_class
            if cls is None:
                cls = _knn.predicted_class(x)
            return ClassProbabilityModel(_knn, cls)
    elif cfg.model == "external":
        if not cfg.model_command:
            raise ConfigError("model 'external' needs --model-command")
        task = cfg.task or "regression"
        bridge = ExternalProcessModel(cfg.model_command, m)
        model_for = lambda x: bridge  # noqa: E731
    else:
        raise ConfigError(f"unknown model kind: {cfg.model!r}")

    resolved = asdict(cfg) | {
        "resolved_n_features": m,
        "resolved_feature_names": list(ds.feature_names),
        "resolved_task": task,
        "resolved_background_rows": bg_rows,
        "resolved_instances": instance_rows,
    }
    return Wiring(
        cfg=cfg,
        n_features=m,
        feature_names=ds.feature_names,
        task=task,
        background=background,
        instances=[(r, ds.X[r]) for r in instance_rows],
        model_for=model_for,
        resolved=resolved,
        bridge=bridge if cfg.model == "external" else None,
    )


def _validate_budgets(cfg: RunConfig, m: int) -> None:
    top = 2**m - 2
    if not cfg.budgets:
        raise ConfigError("at least one budget is required (--budgets)")
    bad = [b for b in cfg.budgets if not 2 <= b <= top]
    if bad:
        raise ConfigError(f"budgets {bad} outside the valid range [2, {top}] for M={m}")
    if cfg.explanation_size is not None and not 1 <= cfg.explanation_size <= m:
        raise ConfigError(
            f"explanation size {cfg.explanation_size} outside 1..{m}"
        )


def _strategies(cfg: RunConfig, default: str, allowed: tuple[str, ...]) -> list[str]:
    tag = cfg.strategy or default
    if tag == "both":
        return list(SAMPLING_STRATEGIES)
    if tag == "all":
        return list(ALL_STRATEGIES)
    if tag not in allowed:
        raise ConfigError(f"strategy {tag!r} not valid here; choose from {allowed}")
    return [tag]


# ---------------------------------------------------------------------------
# output plumbing


class RunWriter:
    def __init__(self, out_dir: str, resolved: dict):
        self.root = Path(out_dir)
        self.resolved = resolved
        (self.root / "explanations").mkdir(parents=True, exist_ok=True)
        (self.root / "metrics").mkdir(parents=True, exist_ok=True)
        with open(self.root / "config.resolved.json", "w") as fh:
            json.dump(resolved, fh, indent=2, sort_keys=True)

    def write_explanation(self, name: str, payload: dict) -> Path:
        path = self.root / "explanations" / f"{name}.json"
        with open(path, "w") as fh:
            json.dump(payload | {"config": self.resolved}, fh, indent=2, sort_keys=True)
        return path

    def write_csv(self, name: str, header: list[str], rows: list[list]) -> Path:
        path = self.root / "metrics" / f"{name}.csv"
        with open(path, "w", newline="") as fh:
            fh.write("# config: " + json.dumps(self.resolved, sort_keys=True) + "\n")
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        return path


# ---------------------------------------------------------------------------
# shared explanation driver


def _one_explanation(wiring: Wiring, strategy: str, budget: int | None,
                     row_id: int, x, run: int,
                     explanation_size: int | None) -> Explanation:
    model = wiring.model_for(x)
    if strategy == LAYER1:
        # always full-length: the closed form has no coalition set to re-fit on
        return layer1_attribution(x, model, wiring.background)
    seed = derive_seed(wiring.cfg.master_seed, row_id, budget, run)
    return explain(x, model, wiring.background, strategy, budget, seed,
                   explanation_size=explanation_size)


def _explanation_and_training_set(wiring: Wiring, strategy: str, budget: int,
                                  row_id: int, x, run: int,
                                  explanation_size: int | None):
    """Like _one_explanation but also returns the coalition set and payoffs,
    for adherence evaluation."""
    model = wiring.model_for(x)
    seed = derive_seed(wiring.cfg.master_seed, row_id, budget, run)
    plan = plan_for(strategy, wiring.n_features, budget, seed)
    cset = materialize(plan)
    values = evaluate_batch(cset.masks, x, wiring.background, model)
    phi0, fx = anchors(x, wiring.background, model)
    e = fit(cset, values, phi0, fx, strategy=strategy, budget=budget, seed=seed)
    if explanation_size is not None:
        e = sparsify(e, explanation_size, cset, values)
    return e, cset, values


def _pool_map(workers: int, fn, items):
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))  # ordered collection keeps output deterministic


# ---------------------------------------------------------------------------
# commands


def layers_report(n_features: int, budget: int) -> dict:
    """Both strategies' plans for one (M, budget), in table-ready form."""
    st = plan_for(ST_SHAP, n_features, budget, seed=0)
    ks = plan_for(KERNEL_SHAP, n_features, budget, seed=0)
    sizes = [layer_size(n_features, i) for i in range(1, n_layers(n_features) + 1)]
    return {
        "M": n_features,
        "budget": budget,
        "layer_sizes": sizes,
        "st_shap_allocation": st.layer_counts(),
        "st_shap": st.to_json_dict(),
        "kernel_shap": ks.to_json_dict(),
    }


def cmd_layers(args) -> int:
    try:
        report = layers_report(args.m, args.budget)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    ks = report["kernel_shap"]
    ks_complete = set(ks["complete_layers"])
    print(f"M = {report['M']}, budget = {report['budget']}")
    print(f"{'Layer':>5}  {'Size':>8}  {'Kernel SHAP':>12}  {'ST-SHAP':>8}")
    for idx, size in enumerate(report["layer_sizes"], start=1):
        if idx in ks_complete:
            ks_cell = str(size)
        elif idx == min(ks["sampled_layers"], default=0):
            ks_cell = f"{ks['n_sampled']} random"
        else:
            ks_cell = "." if idx in ks["sampled_layers"] else "0"
        st_cell = report["st_shap_allocation"][idx - 1]
        print(f"{idx:>5}  {size:>8}  {ks_cell:>12}  {st_cell:>8}")
    if ks["sampled_layers"]:
        lo, hi = min(ks["sampled_layers"]), max(ks["sampled_layers"])
        print(f"kernel-shap draws {ks['n_sampled']} coalitions randomly "
              f"from layers {lo}-{hi}")
    if args.json:
        print(json.dumps(report, sort_keys=True))
    return 0


def cmd_explain(args) -> int:
    cfg = build_config(args)
    wiring = wire(cfg)
    strategies = _strategies(cfg, default=ST_SHAP, allowed=ALL_STRATEGIES)
    if any(s != LAYER1 for s in strategies):
        _validate_budgets(cfg, wiring.n_features)
    elif cfg.explanation_size is not None and cfg.explanation_size > wiring.n_features:
        raise ConfigError(
            f"explanation size {cfg.explanation_size} outside 1..{wiring.n_features}"
        )
    writer = RunWriter(cfg.output, wiring.resolved)
    written = []
    for row_id, x in wiring.instances:
        for strategy in strategies:
            if strategy == LAYER1:
                e = layer1_attribution(x, wiring.model_for(x), wiring.background)
                name = f"row{row_id}_layer1"
                written.append(writer.write_explanation(
                    name, {"instance_row": row_id} | e.to_json_dict()))
                continue
            for budget in cfg.budgets:
                for run in range(cfg.explain_runs):
                    e = _one_explanation(wiring, strategy, budget, row_id, x,
                                         run, cfg.explanation_size)
                    name = f"row{row_id}_{strategy}_b{budget}_r{run}"
                    written.append(writer.write_explanation(
                        name, {"instance_row": row_id, "run": run} | e.to_json_dict()))
    wiring.close()
    for path in written:
        print(path)
    return 0


def cmd_stability(args) -> int:
    cfg = build_config(args)
    if cfg.runs_per_instance < 2:
        raise ConfigError("stability needs at least 2 runs per instance")
    if cfg.explanation_size is None:
        raise ConfigError("stability needs an explanation size (the support sets "
                          "of full-length fits are trivially identical)")
    wiring = wire(cfg)
    _validate_budgets(cfg, wiring.n_features)
    strategies = _strategies(cfg, default="both", allowed=SAMPLING_STRATEGIES)
    writer = RunWriter(cfg.output, wiring.resolved)

    rows = []
    for strategy in strategies:
        for budget in cfg.budgets:
            def one_instance(item, strategy=strategy, budget=budget):
                row_id, x = item
                supports = []
                for run in range(cfg.runs_per_instance):
                    e = _one_explanation(wiring, strategy, budget, row_id, x,
                                         run, cfg.explanation_size)
                    supports.append(set(e.support))
                return metrics.StabilityReport(
                    jaccard=metrics.jaccard_n(supports),
                    n_runs=cfg.runs_per_instance,
                    budget=budget, strategy=strategy,
                )
            reports = _pool_map(cfg.workers, one_instance, wiring.instances)
            for (row_id, _), report in zip(wiring.instances, reports):
                rows.extend([row_id, *tail] for tail in report.csv_rows())
            mean = float(np.mean([r.jaccard for r in reports]))
            rows.append(["mean", budget, strategy, "jaccard", repr(mean)])
    wiring.close()
    path = writer.write_csv("stability",
                            ["instance", "budget", "strategy", "metric", "value"],
                            rows)
    print(path)
    return 0


def cmd_adherence(args) -> int:
    cfg = build_config(args)
    wiring = wire(cfg)
    _validate_budgets(cfg, wiring.n_features)
    strategies = _strategies(cfg, default="both", allowed=SAMPLING_STRATEGIES)
    writer = RunWriter(cfg.output, wiring.resolved)

    rows = []
    for strategy in strategies:
        for budget in cfg.budgets:
            def one_instance(item, strategy=strategy, budget=budget):
                row_id, x = item
                scores = []
                for run in range(cfg.explain_runs):
                    e, cset, values = _explanation_and_training_set(
                        wiring, strategy, budget, row_id, x, run,
                        cfg.explanation_size)
                    scores.append(metrics.adherence(cset, values, e, wiring.task))
                return float(np.mean(scores))
            scores = _pool_map(cfg.workers, one_instance, wiring.instances)
            for (row_id, _), s in zip(wiring.instances, scores):
                rows.append([row_id, budget, strategy, "adherence", repr(s)])
            rows.append(["mean", budget, strategy, "adherence",
                         repr(float(np.mean(scores)))])
    wiring.close()
    path = writer.write_csv("adherence",
                            ["instance", "budget", "strategy", "metric", "value"],
                            rows)
    print(path)
    return 0


def cmd_compare_exact(args) -> int:
    cfg = build_config(args)
    wiring = wire(cfg)
    if wiring.n_features > cfg.oracle_cap:
        raise OracleCapError(wiring.n_features, cfg.oracle_cap)
    strategies = _strategies(cfg, default=LAYER1, allowed=ALL_STRATEGIES)
    if any(s in SAMPLING_STRATEGIES for s in strategies):
        _validate_budgets(cfg, wiring.n_features)
    writer = RunWriter(cfg.output, wiring.resolved)

    def one_instance(item):
        row_id, x = item
        model = wiring.model_for(x)
        reference = exact.exact_shap(x, model, wiring.background,
                                     cap=cfg.oracle_cap).phi_array()
        out = []
        for strategy in strategies:
            budgets = [None] if strategy == LAYER1 else cfg.budgets
            for budget in budgets:
                # agreement metrics always use full-length attribution vectors
                e = _one_explanation(wiring, strategy, budget, row_id, x,
                                     run=0, explanation_size=None)
                out.append((row_id, metrics.AgreementReport(
                    kendall_tau=metrics.kendall_tau(reference, e.phi_array()),
                    r2=metrics.r2_score(reference, e.phi_array()),
                    reference="exact", budget=budget, strategy=strategy,
                )))
        return out

    per_instance = _pool_map(cfg.workers, one_instance, wiring.instances)
    rows = []
    by_key: dict[tuple, dict[str, list[float]]] = {}
    for chunk in per_instance:
        for row_id, report in chunk:
            rows.extend([row_id, *tail] for tail in report.csv_rows())
            slot = by_key.setdefault((report.budget, report.strategy),
                                     {"kendall_tau": [], "r2": []})
            slot["kendall_tau"].append(report.kendall_tau)
            slot["r2"].append(report.r2)
    for (budget, strategy), slot in by_key.items():
        budget_cell = "" if budget is None else budget
        for metric_name, values in slot.items():
            rows.append(["mean", budget_cell, strategy, metric_name,
                         repr(float(np.mean(values)))])
            rows.append(["median", budget_cell, strategy, metric_name,
                         repr(float(statistics.median(values)))])
    wiring.close()
    path = writer.write_csv("compare_exact",
                            ["instance", "budget", "strategy", "metric", "value"],
                            rows)
    print(path)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--dataset")
    p.add_argument("--target")
    p.add_argument("--features", type=lambda s: s.split(","))
    p.add_argument("--model", choices=["ridge", "knn", "external", "game"])
    p.add_argument("--model-command", dest="model_command")
    p.add_argument("--game-file", dest="game_file")
    p.add_argument("--knn-k", dest="knn_k", type=int)
    p.add_argument("--explained-class", dest="explained_class", type=int)
    p.add_argument("--task", choices=["regression", "classification"])
    p.add_argument("--background-size", dest="background_size", type=int)
    p.add_argument("--background-rows", dest="background_rows",
                   type=lambda s: [int(v) for v in s.split(",")])
    p.add_argument("--heldout-fraction", dest="heldout_fraction", type=float)
    p.add_argument("--split-seed", dest="split_seed", type=int)
    p.add_argument("--instances", type=lambda s: [int(v) for v in s.split(",")])
    p.add_argument("--n-instances", dest="n_instances", type=int)
    p.add_argument("--strategy")
    p.add_argument("--budgets", type=lambda s: [int(v) for v in s.split(",")])
    p.add_argument("--explanation-size", dest="explanation_size", type=int)
    p.add_argument("--runs", dest="explain_runs", type=int)
    p.add_argument("--runs-per-instance", dest="runs_per_instance", type=int)
    p.add_argument("--master-seed", dest="master_seed", type=int)
    p.add_argument("--oracle-cap", dest="oracle_cap", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stableshap",
        description="Stable Shapley-value attributions and their benchmarks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("layers", help="show both strategies' layer allocations")
    p.add_argument("m", type=int, help="number of features")
    p.add_argument("budget", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_layers)

    p = sub.add_parser("explain", help="write explanation JSON files")
    _add_run_flags(p)
    p.set_defaults(fn=cmd_explain)

    p = sub.add_parser("stability", help="Jaccard stability across repeated runs")
    _add_run_flags(p)
    p.set_defaults(fn=cmd_stability)

    p = sub.add_parser("adherence", help="surrogate fidelity over the budget sweep")
    _add_run_flags(p)
    p.set_defaults(fn=cmd_adherence)

    p = sub.add_parser("compare-exact",
                       help="agreement of a strategy with the exact values")
    _add_run_flags(p)
    p.set_defaults(fn=cmd_compare_exact)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ModelBridgeError as exc:
        print(f"model bridge error: {exc}", file=sys.stderr)
        return 3
    except OracleCapError as exc:
        print(f"oracle cap: {exc}", file=sys.stderr)
        return 4
    except StableShapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
