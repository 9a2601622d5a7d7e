"""Pydantic response models for the HTTP service.

Request bodies are the command configs from :mod:`synthsearch.config`; the
models here shape what each endpoint returns.
"""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel

from ..evaluation import EvalReport
from ..runner import (
    EvalRunResult,
    PrepRunResult,
    ReportRunResult,
    SearchRunResult,
    SweepRunResult,
    TargetResult,
    UniverseRunResult,
)


class HealthResponse(BaseModel):
    status: str
    version: str


class TimingModel(BaseModel):
    mean: float
    median: float
    p95: float


class EvalReportModel(BaseModel):
    model: str
    num_samples: int
    samples_evaluated: int
    incomplete: bool
    ks: list[int]
    top_k_accuracy: dict[int, float]
    mrr: float
    round_trip_precision: Optional[dict[int, float]] = None
    round_trip_coverage: Optional[dict[int, float]] = None
    timing_s: TimingModel
    dropped_invalid: int
    dedup_removed: int
    files: list[str] = []

    @classmethod
    def from_run(cls, run: EvalRunResult) -> "EvalReportModel":
        report: EvalReport = run.report
        return cls(
            model=report.model_name,
            num_samples=report.num_samples,
            samples_evaluated=report.samples_evaluated,
            incomplete=report.incomplete,
            ks=list(report.ks),
            top_k_accuracy=report.top_k_accuracy,
            mrr=report.mrr,
            round_trip_precision=report.round_trip_precision,
            round_trip_coverage=report.round_trip_coverage,
            timing_s=TimingModel(
                mean=report.timing.mean, median=report.timing.median, p95=report.timing.p95
            ),
            dropped_invalid=report.dropped_invalid,
            dedup_removed=report.dedup_removed,
            files=run.files,
        )


class SearchRowModel(BaseModel):
    target: str
    algorithm: str
    model: str
    solved: bool
    wall_time_to_solution: Optional[float]
    calls_to_solution: Optional[int]
    final_packing: int
    unique_calls: int

    @classmethod
    def from_row(cls, row: TargetResult) -> "SearchRowModel":
        return cls(
            target=row.target,
            algorithm=row.algorithm,
            model=row.model,
            solved=row.solved,
            wall_time_to_solution=row.wall_time_to_solution,
            calls_to_solution=row.calls_to_solution,
            final_packing=row.final_packing,
            unique_calls=row.unique_calls,
        )


class SearchResponse(BaseModel):
    num_targets: int
    solved: int
    rows: list[SearchRowModel]
    files: list[str] = []

    @classmethod
    def from_run(cls, run: SearchRunResult) -> "SearchResponse":
        return cls(
            num_targets=len(run.rows),
            solved=run.solved_count,
            rows=[SearchRowModel.from_row(r) for r in run.rows],
            files=run.files,
        )


class PrepResponse(BaseModel):
    input_count: int
    removed: dict[str, int]
    survivors: int
    fold_sizes: dict[str, int]
    files: list[str] = []

    @classmethod
    def from_run(cls, run: PrepRunResult) -> "PrepResponse":
        report = run.result.report
        return cls(
            input_count=report.input_count,
            removed=dict(report.removed),
            survivors=report.survivors,
            fold_sizes=dict(report.fold_sizes),
            files=run.files,
        )


class UniverseResponse(BaseModel):
    digest: str
    num_blocks: int
    num_molecules: int
    num_targets: int
    solvable_targets: int
    files: list[str] = []

    @classmethod
    def from_run(cls, run: UniverseRunResult) -> "UniverseResponse":
        uni = run.universe
        return cls(
            digest=run.digest,
            num_blocks=len(uni.building_blocks),
            num_molecules=len(uni.molecules()),
            num_targets=len(uni.targets),
            solvable_targets=sum(uni.ground_truth[t].solvable for t in uni.targets),
            files=run.files,
        )


class SweepEntryModel(BaseModel):
    params: dict
    score: float
    solved: int
    median_packing: float
    mean_packing: float


class SweepResponse(BaseModel):
    ranking: list[SweepEntryModel]
    files: list[str] = []

    @classmethod
    def from_run(cls, run: SweepRunResult) -> "SweepResponse":
        return cls(
            ranking=[
                SweepEntryModel(
                    params=e.params,
                    score=e.score,
                    solved=e.solved,
                    median_packing=e.median_packing,
                    mean_packing=e.mean_packing,
                )
                for e in run.entries
            ],
            files=run.files,
        )


class ReportResponse(BaseModel):
    tables: dict
    files: list[str] = []

    @classmethod
    def from_run(cls, run: ReportRunResult) -> "ReportResponse":
        return cls(tables=run.tables, files=run.files)
