"""FastAPI service wrapping the engine.

Endpoints mirror the CLI subcommands one to one and take the same validated
config models as request bodies; an optional ``out_dir`` query parameter
makes the server also write the file artifacts it would produce in a CLI
run.  Long searches run synchronously; the client owns the wait.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..config import (
    EvalConfig,
    GenUniverseConfig,
    PrepConfig,
    ReportConfig,
    SearchConfig,
    SweepConfig,
)
from ..inventory import IoError
from ..runner import (
    run_eval_single,
    run_gen_universe,
    run_prep,
    run_report,
    run_search,
    run_sweep,
)
from ..singlestep.base import ModelUnavailable, ProtocolError
from .schemas import (
    EvalReportModel,
    HealthResponse,
    PrepResponse,
    ReportResponse,
    SearchResponse,
    SweepResponse,
    UniverseResponse,
)


def _guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ModelUnavailable, ProtocolError) as exc:
        raise HTTPException(status_code=502, detail=str(exc)) from exc
    except (FileNotFoundError, IoError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


def create_app() -> FastAPI:
    app = FastAPI(title="synthsearch", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/eval-single", response_model=EvalReportModel)
    def eval_single(config: EvalConfig, out_dir: Optional[str] = None) -> EvalReportModel:
        return EvalReportModel.from_run(_guard(run_eval_single, config, out_dir))

    @app.post("/search", response_model=SearchResponse)
    def search(config: SearchConfig, out_dir: Optional[str] = None) -> SearchResponse:
        return SearchResponse.from_run(_guard(run_search, config, out_dir))

    @app.post("/prep", response_model=PrepResponse)
    def prep(config: PrepConfig, out_dir: Optional[str] = None) -> PrepResponse:
        return PrepResponse.from_run(_guard(run_prep, config, out_dir))

    @app.post("/gen-universe", response_model=UniverseResponse)
    def gen_universe(config: GenUniverseConfig, out_dir: Optional[str] = None) -> UniverseResponse:
        return UniverseResponse.from_run(_guard(run_gen_universe, config, out_dir))

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(config: SweepConfig, out_dir: Optional[str] = None) -> SweepResponse:
        return SweepResponse.from_run(_guard(run_sweep, config, out_dir))

    @app.post("/report", response_model=ReportResponse)
    def report(config: ReportConfig, out_dir: Optional[str] = None) -> ReportResponse:
        return ReportResponse.from_run(_guard(run_report, config, out_dir))

    return app


app = create_app()
