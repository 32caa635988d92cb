"""HTTP facade over the experiment harness.

One endpoint per harness entry point, plus a health probe.  Requests carry
the same JSON configs the CLI reads from disk; validation errors come back
as 400s with the offending field path so clients can point at the mistake.
"""

from __future__ import annotations

from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__, harness
from .models import ConfigError

app = FastAPI(title="ciphercast", version=__version__)


class SimulateRequest(BaseModel):
    config: dict[str, Any]
    include_records: bool = False


class SimulateResponse(BaseModel):
    schema_version: str
    scenario_id: str
    summaries: list[dict[str, Any]]


class AttackRequest(BaseModel):
    config: dict[str, Any]


class AttackResponse(BaseModel):
    schema_version: str
    scenario_id: str
    rows: list[dict[str, Any]]
    csv: str


class RegionRequest(BaseModel):
    preset: str | None = None
    setting: str | None = None
    channel: dict[str, Any] | None = None
    point: dict[str, Any] | None = None
    crossover: float | None = None
    variance: float | None = None
    power: float | None = None

    def as_mapping(self) -> dict[str, Any]:
        return self.model_dump(exclude_none=True)


class RegionResponse(BaseModel):
    schema_version: str
    files: dict[str, str]


class VerifyRequest(BaseModel):
    seed: int = 7
    selector: str = "all"


class CheckRecord(BaseModel):
    name: str
    statistic: float
    threshold: float
    verdict: str
    detail: str = ""


class VerifyResponse(BaseModel):
    schema_version: str
    all_passed: bool
    checks: list[CheckRecord]


class Health(BaseModel):
    status: str = Field(default="ok")
    version: str
    schema_version: str


@app.exception_handler(ConfigError)
async def _config_error(_request: Request, exc: ConfigError) -> JSONResponse:
    return JSONResponse(
        status_code=400,
        content={"detail": {"field": exc.field_path, "message": exc.message}},
    )


@app.exception_handler(ValueError)
async def _value_error(_request: Request, exc: ValueError) -> JSONResponse:
    return JSONResponse(
        status_code=400, content={"detail": {"field": "", "message": str(exc)}}
    )


@app.get("/healthz", response_model=Health)
def healthz() -> Health:
    return Health(version=__version__, schema_version=harness.SCHEMA_VERSION)


@app.post("/simulate", response_model=SimulateResponse)
def simulate(req: SimulateRequest) -> SimulateResponse:
    spec = harness.parse_experiment(req.config)
    summaries = [
        harness.summary_to_dict(s, include_records=req.include_records)
        for s in harness.run_simulation(spec)
    ]
    return SimulateResponse(
        schema_version=harness.SCHEMA_VERSION,
        scenario_id=spec.scenario_id,
        summaries=summaries,
    )


@app.post("/attack", response_model=AttackResponse)
def attack(req: AttackRequest) -> AttackResponse:
    spec = harness.parse_experiment(req.config)
    rows = [dict(r) for r in harness.run_attacks(spec)]
    return AttackResponse(
        schema_version=harness.SCHEMA_VERSION,
        scenario_id=spec.scenario_id,
        rows=rows,
        csv=harness.attack_rows_csv(rows),
    )


@app.post("/region", response_model=RegionResponse)
def region(req: RegionRequest) -> RegionResponse:
    files = harness.emit_region(req.as_mapping())
    return RegionResponse(schema_version=harness.SCHEMA_VERSION, files=files)


@app.post("/verify", response_model=VerifyResponse)
def verify(req: VerifyRequest) -> VerifyResponse:
    checks = [
        CheckRecord(**c.to_dict()) for c in harness.verify_lemmas(req.seed, req.selector)
    ]
    return VerifyResponse(
        schema_version=harness.SCHEMA_VERSION,
        all_passed=all(c.verdict == "pass" for c in checks),
        checks=checks,
    )
