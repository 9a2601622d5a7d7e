"""Command orchestration shared by the CLI and the HTTP service.

Each ``run_*`` function takes a validated config, executes against the core
modules and returns a plain result object; when an output directory is given
the artifacts (reports, traces, summary CSV, DOT files) are written there
with the full config and tool version embedded for provenance.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .algorithms import PolicyTransform, SearchBudget, SearchTrace
from .algorithms.metrics import final_packing
from .algorithms.sweep import SweepResult, run_search as dispatch_search, sweep as run_param_sweep
from .andor import AndOrGraph, extract_routes
from .config import (
    EvalConfig,
    GenUniverseConfig,
    PrepConfig,
    ReportConfig,
    SearchConfig,
    SweepConfig,
)
from .dataprep import PrepResult, PrepThresholds, run_pipeline, write_fold_files
from .evaluation import EvalReport, evaluate, load_dataset, round_trip
from .inventory import Inventory, load as load_inventory
from .singlestep import (
    BackwardModel,
    FileBackedModel,
    SyntheticUniverse,
    UniverseConfig,
    UniverseModel,
    UniverseOracle,
    WireModel,
    generate_universe,
)
from .smiles import Molecule, normalize


def provenance(config) -> dict:
    return {"tool": "synthsearch", "version": __version__, "config": config.model_dump()}


def _provenance_comment(config) -> str:
    return f"synthsearch={__version__} config={json.dumps(config.model_dump(), sort_keys=True)}"


def build_model(spec) -> tuple[BackwardModel, Optional[SyntheticUniverse]]:
    if spec.kind == "file":
        return FileBackedModel(spec.path), None
    if spec.kind == "wire":
        return WireModel.from_endpoint(spec.endpoint, timeout=spec.timeout_s), None
    universe = SyntheticUniverse.load(spec.path)
    return UniverseModel(universe, true_only=spec.true_only), universe


def _build_budget(spec) -> SearchBudget:
    return SearchBudget(
        wall_time_s=spec.wall_time_s,
        max_model_calls=spec.max_model_calls,
        max_iterations=spec.max_iterations,
        stop_on_solve=spec.stop_on_solve,
    )


def _build_transform(policy) -> PolicyTransform:
    return PolicyTransform(policy.clip_lo, policy.clip_hi, policy.temperature)


def _algorithm_kwargs(algo) -> dict:
    if algo.name == "retro-star":
        return {"max_depth_andor": algo.max_depth_andor, "num_results": algo.num_results}
    if algo.name == "mcts":
        return {
            "bound_constant": algo.bound_constant,
            "node_value_constant": algo.node_value_constant,
            "max_depth_reactions": algo.max_depth_reactions,
            "num_results": algo.num_results,
        }
    return {"depth_cap": algo.depth_cap, "num_results": algo.num_results}


def _load_targets(config: SearchConfig | SweepConfig, universe) -> list[str]:
    if config.targets:
        lines = Path(config.targets).read_text().splitlines()
        return [
            normalize(l.strip()).id
            for l in lines
            if l.strip() and not l.startswith("#")
        ]
    if universe is not None:
        return list(universe.targets)
    raise ValueError("no targets: provide 'targets' or a universe model")


def _load_inventory(config: SearchConfig | SweepConfig, universe) -> Inventory:
    if config.inventory:
        return load_inventory(config.inventory)
    if universe is not None:
        return Inventory.from_smiles(universe.building_blocks)
    raise ValueError("no inventory: provide 'inventory' or a universe model")


# ---------------------------------------------------------------------------
# eval-single


@dataclass
class EvalRunResult:
    report: EvalReport
    files: list[str] = field(default_factory=list)


def run_eval_single(config: EvalConfig, out_dir: Optional[str | Path] = None) -> EvalRunResult:
    model, universe = build_model(config.model)
    samples = load_dataset(config.dataset)
    report = evaluate(model, samples, ks=config.ks, n=config.n)
    if config.round_trip:
        if universe is None:
            raise ValueError("round_trip requires a universe model (forward oracle)")
        precision, coverage = round_trip(model, UniverseOracle(universe), samples, ks=config.ks, n=config.n)
        report.round_trip_precision = precision
        report.round_trip_coverage = coverage
    result = EvalRunResult(report)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        report.write_json(out / "eval_report.json", provenance(config))
        report.write_csv(out / "eval_report.csv", _provenance_comment(config))
        result.files = ["eval_report.json", "eval_report.csv"]
    return result


# ---------------------------------------------------------------------------
# search

SUMMARY_COLUMNS = (
    "target",
    "algorithm",
    "model",
    "solved",
    "wall_time_to_solution",
    "calls_to_solution",
    "final_packing",
)


@dataclass
class TargetResult:
    target: str
    algorithm: str
    model: str
    solved: bool
    wall_time_to_solution: Optional[float]
    calls_to_solution: Optional[int]
    final_packing: int
    unique_calls: int
    total_queries: int

    def summary_row(self) -> list:
        return [
            self.target,
            self.algorithm,
            self.model,
            int(self.solved),
            "" if self.wall_time_to_solution is None else f"{self.wall_time_to_solution:.6f}",
            "" if self.calls_to_solution is None else self.calls_to_solution,
            self.final_packing,
        ]


@dataclass
class SearchRunResult:
    rows: list[TargetResult]
    files: list[str] = field(default_factory=list)

    @property
    def solved_count(self) -> int:
        return sum(r.solved for r in self.rows)


def _search_one(config: SearchConfig, target: str, model, inventory) -> tuple[TargetResult, AndOrGraph, SearchTrace]:
    graph, trace = dispatch_search(
        config.algorithm.name,
        Molecule(id=target),
        model,
        inventory,
        _build_budget(config.budget),
        _build_transform(config.algorithm.policy),
        **_algorithm_kwargs(config.algorithm),
    )
    first = trace.first_solution
    result = TargetResult(
        target=target,
        algorithm=config.algorithm.name,
        model=model.name,
        solved=graph.root_node.solved,
        wall_time_to_solution=None if first is None else first.wall_time,
        calls_to_solution=None if first is None else first.unique_calls,
        final_packing=final_packing(graph, trace, max_routes=config.max_routes),
        unique_calls=trace.events[-1].unique_calls_so_far if trace.events else 0,
        total_queries=len(trace.events),
    )
    return result, graph, trace


_WORKER_STATE: dict = {}


def _worker_init(config_json: str, out_dir: Optional[str]) -> None:
    config = SearchConfig.model_validate(json.loads(config_json))
    model, universe = build_model(config.model)
    _WORKER_STATE["config"] = config
    _WORKER_STATE["model"] = model
    _WORKER_STATE["inventory"] = _load_inventory(config, universe)
    _WORKER_STATE["out"] = Path(out_dir) if out_dir else None


def _emit_target_artifacts(config: SearchConfig, out: Path, idx: int, graph, trace) -> None:
    trace.write_jsonl(out / "traces" / f"{idx:04d}.jsonl", run_info=provenance(config))
    if config.export_dot:
        dot_dir = out / "routes"
        dot_dir.mkdir(exist_ok=True)
        for rix, route in enumerate(extract_routes(graph, max_routes=config.max_routes)):
            (dot_dir / f"{idx:04d}_{rix:02d}.dot").write_text(
                f"// {_provenance_comment(config)}\n" + route.to_dot(graph.root) + "\n"
            )
    if config.export_graph:
        graph_dir = out / "graphs"
        graph_dir.mkdir(exist_ok=True)
        payload = {"provenance": provenance(config), **graph.to_json_dict()}
        (graph_dir / f"{idx:04d}.json").write_text(json.dumps(payload, indent=1))


def _worker_search(task: tuple[int, str]) -> TargetResult:
    idx, target = task
    config = _WORKER_STATE["config"]
    result, graph, trace = _search_one(
        config, target, _WORKER_STATE["model"], _WORKER_STATE["inventory"]
    )
    if _WORKER_STATE["out"] is not None:
        _emit_target_artifacts(config, _WORKER_STATE["out"], idx, graph, trace)
    return result


def run_search(config: SearchConfig, out_dir: Optional[str | Path] = None) -> SearchRunResult:
    model, universe = build_model(config.model)
    inventory = _load_inventory(config, universe)
    targets = _load_targets(config, universe)

    out = None
    if out_dir is not None:
        out = Path(out_dir)
        (out / "traces").mkdir(parents=True, exist_ok=True)

    rows: list[TargetResult] = []
    if config.workers > 1:
        # Row order follows target order regardless of completion order, and
        # each worker builds its own model connection.
        with ProcessPoolExecutor(
            max_workers=config.workers,
            initializer=_worker_init,
            initargs=(json.dumps(config.model_dump()), str(out) if out else None),
        ) as pool:
            rows = list(pool.map(_worker_search, list(enumerate(targets))))
    else:
        for idx, target in enumerate(targets):
            result, graph, trace = _search_one(config, target, model, inventory)
            rows.append(result)
            if out is not None:
                _emit_target_artifacts(config, out, idx, graph, trace)

    run = SearchRunResult(rows)
    if out is not None:
        summary = out / "summary.csv"
        with open(summary, "w", newline="") as fh:
            fh.write(f"# {_provenance_comment(config)}\n")
            writer = csv.writer(fh)
            writer.writerow(SUMMARY_COLUMNS)
            for row in rows:
                writer.writerow(row.summary_row())
        run.files = ["summary.csv", "traces/"]
    return run


# ---------------------------------------------------------------------------
# prep / gen-universe / sweep / report


@dataclass
class PrepRunResult:
    result: PrepResult
    files: list[str] = field(default_factory=list)


def run_prep(config: PrepConfig, out_dir: Optional[str | Path] = None) -> PrepRunResult:
    thresholds = PrepThresholds(
        max_reactants=config.max_reactants,
        min_product_atoms=config.min_product_atoms,
        side_product_occurrence=config.side_product_occurrence,
        max_product_atoms=config.max_product_atoms,
        max_atom_ratio=config.max_atom_ratio,
    )
    lines = Path(config.input).read_text().splitlines()
    result = run_pipeline(lines, thresholds, tuple(config.ratio), config.seed, config.pinned)
    run = PrepRunResult(result)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_fold_files(result, out, header=_provenance_comment(config))
        result.report.write_json(out / "prep_report.json", provenance(config))
        run.files = ["train.tsv", "valid.tsv", "test.tsv", "survivors.smi", "prep_report.json"]
    return run


@dataclass
class UniverseRunResult:
    universe: SyntheticUniverse
    digest: str
    files: list[str] = field(default_factory=list)


def run_gen_universe(config: GenUniverseConfig, out_dir: Optional[str | Path] = None) -> UniverseRunResult:
    universe = generate_universe(
        UniverseConfig(
            num_blocks=config.num_blocks,
            num_nonblocks=config.num_nonblocks,
            max_reactants=config.max_reactants,
            distractor_rate=config.distractor_rate,
            max_depth=config.max_depth,
            seed=config.seed,
            num_targets=config.num_targets,
        )
    )
    run = UniverseRunResult(universe, universe.digest())
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        header = _provenance_comment(config)
        universe.save(out / "universe.json")
        universe.export_inventory(out / "blocks.smi", header=header)
        universe.export_targets(out / "targets.smi", header=header)
        universe.export_model_table(out / "model_table.tsv", header=header)
        universe.export_eval_dataset(out / "eval_dataset.tsv", header=header)
        (out / "provenance.json").write_text(json.dumps(provenance(config), indent=1))
        run.files = [
            "universe.json",
            "blocks.smi",
            "targets.smi",
            "model_table.tsv",
            "eval_dataset.tsv",
            "provenance.json",
        ]
    return run


@dataclass
class SweepRunResult:
    entries: list[SweepResult]
    files: list[str] = field(default_factory=list)


def run_sweep(config: SweepConfig, out_dir: Optional[str | Path] = None) -> SweepRunResult:
    model, universe = build_model(config.model)
    inventory = _load_inventory(config, universe)
    targets = [Molecule(id=t) for t in _load_targets(config, universe)]
    base = {
        "clip_lo": config.algorithm.policy.clip_lo,
        "clip_hi": config.algorithm.policy.clip_hi,
        "temperature": config.algorithm.policy.temperature,
    }
    base.update(_algorithm_kwargs(config.algorithm))
    entries = run_param_sweep(
        config.algorithm.name,
        model,
        inventory,
        targets,
        config.grid,
        _build_budget(config.trial_budget),
        base_params=base,
    )
    run = SweepRunResult(entries)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        payload = {
            "provenance": provenance(config),
            "ranking": [
                {
                    "params": e.params,
                    "score": e.score,
                    "solved": e.solved,
                    "median_packing": e.median_packing,
                    "mean_packing": e.mean_packing,
                }
                for e in entries
            ],
        }
        (out / "sweep.json").write_text(json.dumps(payload, indent=1))
        run.files = ["sweep.json"]
    return run


@dataclass
class ReportRunResult:
    tables: dict
    files: list[str] = field(default_factory=list)


def _read_summary(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = [line for line in fh if not line.startswith("#")]
    reader = csv.DictReader(rows)
    return list(reader)


def run_report(config: ReportConfig, out_dir: Optional[str | Path] = None) -> ReportRunResult:
    """Aggregate summary CSVs into box-plot-ready percentile tables."""
    tables: dict = {"percentiles": config.percentiles, "runs": []}
    for path in config.summaries:
        rows = _read_summary(path)
        solved = [r for r in rows if r["solved"] == "1"]
        times = [float(r["wall_time_to_solution"]) for r in solved if r["wall_time_to_solution"]]
        calls = [int(r["calls_to_solution"]) for r in solved if r["calls_to_solution"] != ""]
        packing = [int(r["final_packing"]) for r in rows]
        entry = {
            "summary": str(path),
            "num_targets": len(rows),
            "solved": len(solved),
            "solve_rate": len(solved) / len(rows) if rows else 0.0,
            "time_to_solution": _percentile_table(times, config.percentiles),
            "calls_to_solution": _percentile_table(calls, config.percentiles),
            "final_packing": _percentile_table(packing, config.percentiles),
            "packing_method": "greedy_running_max",
        }
        tables["runs"].append(entry)
    run = ReportRunResult(tables)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        payload = {"provenance": provenance(config), **tables}
        (out / "report.json").write_text(json.dumps(payload, indent=1))
        with open(out / "report.csv", "w", newline="") as fh:
            fh.write(f"# {_provenance_comment(config)}\n")
            writer = csv.writer(fh)
            writer.writerow(["summary", "metric"] + [f"p{p:g}" for p in config.percentiles])
            for entry in tables["runs"]:
                for metric in ("time_to_solution", "calls_to_solution", "final_packing"):
                    writer.writerow(
                        [entry["summary"], metric]
                        + [entry[metric].get(f"p{p:g}") for p in config.percentiles]
                    )
        run.files = ["report.json", "report.csv"]
    return run


def _percentile_table(values, percentiles) -> dict:
    if not values:
        return {f"p{p:g}": None for p in percentiles}
    arr = np.asarray(values, dtype=float)
    return {f"p{p:g}": float(np.percentile(arr, p)) for p in percentiles}
