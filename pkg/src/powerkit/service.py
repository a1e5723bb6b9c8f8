"""JSON HTTP facade.

One POST endpoint per supported test under /api/v1, session endpoints for
the interactive loop, a long-term results store, a health route, and a
generated OpenAPI 3.1 document. The listener only binds after the app
factory has finished loading routes and the scenario corpus, so a TCP
readiness probe cannot see a half-initialized instance; a corrupt corpus
aborts the process with a nonzero exit before anything listens.

Configuration (environment):
    POWERKIT_PORT             listen port (default 5000)
    POWERKIT_DATA_DIR         result-log directory (default ./powerkit-data)
    POWERKIT_SESSION_TTL      session time-to-live, seconds (default 86400)
    POWERKIT_MODEL_URL        optional external model endpoint for free text
    POWERKIT_CORPUS           scenario corpus path (default: bundled corpus)
    POWERKIT_STARTUP_DELAY_S  artificial init delay, used by probe tests
"""

from __future__ import annotations

import dataclasses
import os
import sys
import time
from typing import Any, Literal

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field, create_model

from . import __version__
from .designs import EFFECT_FIELD, TESTS, InvalidDesignError, build_spec
from .grammar import ParseError
from .scenarios import load_corpus
from .session import HttpModelClient, ModelClient, StubModelClient, apply, new_session
from .solve import UnreachablePowerError, solve_effect, solve_n, solve_power
from .storage import (
    DEFAULT_SESSION_TTL,
    ResultStore,
    SessionExpiredError,
    SessionStore,
    UnknownIdError,
)

API_PREFIX = "/api/v1"

# wire names of the per-test endpoints
ENDPOINT_NAMES: dict[str, str] = {
    "one_sample_t": "one_sample_t_test",
    "two_sample_t": "two_sample_t_test",
    "paired_t": "paired_t_test",
    "one_way_anova": "one_way_anova",
    "one_proportion_z": "one_proportion_z_test",
    "two_proportions_z": "two_proportions_z_test",
    "chi_square": "chi_square_test",
    "correlation": "correlation_test",
    "mann_whitney": "mann_whitney",
    "paired_wilcoxon": "paired_wilcoxon",
    "kruskal_wallis": "kruskal_wallis",
    "log_rank": "log_rank_test",
    "cox_ph": "cox_ph",
}

_FIELD_TYPES: dict[str, type] = {"k": int, "df": int}


def _request_model(test: str) -> type[BaseModel]:
    """Strict request schema for one test, generated from the registry.

    Design fields are optional at the wire layer so one 400 can list every
    missing or malformed field at once; the engine enforces presence."""
    info = TESTS[test]
    fields: dict[str, tuple] = {}
    for f in info.param_fields:
        typ = _FIELD_TYPES.get(f.name, float)
        doc = f.doc if f.default is not None else f"{f.doc} (required)"
        fields[f.name] = (typ | None, Field(default=f.default, description=doc))
    fields["alpha"] = (float, Field(default=0.05, description="significance level"))
    fields["tails"] = (Literal["one", "two"], Field(default="two"))
    fields["power"] = (float | None, Field(default=None, description="target power"))
    fields["target"] = (Literal["sample_size", "power", "effect"],
                        Field(default="sample_size", description="which unknown to solve"))
    fields["n"] = (int | None, Field(default=None, description="fixed allocation for "
                                                               "power/effect targets"))
    model = create_model(f"{ENDPOINT_NAMES[test].title().replace('_', '')}Request",
                         __config__=ConfigDict(extra="forbid"), **fields)
    return model


class ApiResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    sample_size: int | None = Field(None, description="per-arm size for multi-arm "
                                                      "tests, total for one-sample")
    n_per_arm: list[int]
    n_total: int
    achieved_power: float
    events_required: int | None = None
    effect_solved: float | None = None
    formula_id: str
    inputs: dict[str, Any] = Field(description="request echoed with every default applied")
    result_id: str


class SessionCommandRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    text: str


class CurveRequest(BaseModel):
    """Sweep one variable, solving the rest; feeds the web UI's chart so no
    statistics run client-side."""
    model_config = ConfigDict(extra="forbid")

    test: Literal[tuple(ENDPOINT_NAMES)]  # type: ignore[valid-type]
    params: dict[str, Any]
    sweep: Literal["power", "n", "effect"]
    start: float = Field(alias="from")
    stop: float = Field(alias="to")
    steps: int = Field(default=10, ge=2, le=200)
    alpha: float = 0.05
    tails: Literal["one", "two"] = "two"
    power: float | None = None
    n: int | None = None


class AppConfig:
    def __init__(self, data_dir: str | None = None, session_ttl: float | None = None,
                 model_url: str | None = None, corpus_path: str | None = None,
                 clock=time.time):
        env = os.environ
        self.data_dir = data_dir or env.get("POWERKIT_DATA_DIR", "./powerkit-data")
        self.session_ttl = session_ttl if session_ttl is not None else float(
            env.get("POWERKIT_SESSION_TTL", DEFAULT_SESSION_TTL))
        self.model_url = model_url or env.get("POWERKIT_MODEL_URL")
        self.corpus_path = corpus_path or env.get("POWERKIT_CORPUS")
        self.clock = clock


def _solve_request(test: str, body: BaseModel) -> tuple[dict, dict]:
    """Run one compute request; returns (response payload, echoed inputs)."""
    raw = body.model_dump()
    target = raw.pop("target")
    alpha = raw.pop("alpha")
    tails = raw.pop("tails")
    power = raw.pop("power")
    n = raw.pop("n")
    params = {k: v for k, v in raw.items() if v is not None}

    # one diagnostic pass: every missing/malformed field in a single 400
    errors: dict[str, str] = {}
    spec = None
    try:
        spec = build_spec(test, params, alpha=alpha, tails=tails)
    except InvalidDesignError as exc:
        errors.update(exc.errors)
    if target in ("sample_size", "effect") and power is None:
        errors["power"] = "missing required parameter"
    if target in ("power", "effect") and n is None:
        errors["n"] = "missing required parameter"
    if errors:
        raise InvalidDesignError(errors)

    if target == "sample_size":
        result = solve_n(spec, power)
    elif target == "power":
        result = solve_power(spec, n)
    else:
        result = solve_effect(spec, n, power)

    echoed = dataclasses.asdict(spec.params)
    echoed = {k: v for k, v in echoed.items() if v is not None}
    echoed.update({"alpha": spec.alpha, "tails": spec.tails, "target": target})
    if power is not None:
        echoed["power"] = power
    if n is not None:
        echoed["n"] = n

    payload: dict[str, Any] = {
        "n_per_arm": list(result.n_per_arm),
        "n_total": result.n_total,
        "achieved_power": result.achieved_power,
        "events_required": result.events_required,
        "effect_solved": result.effect_solved,
        "formula_id": result.formula_id,
    }
    if target == "sample_size":
        multi = len(result.n_per_arm) > 1
        payload["sample_size"] = result.n_per_arm[0] if multi else result.n_total
    return payload, echoed


def create_app(config: AppConfig | None = None) -> FastAPI:
    """Build the fully initialized application. Raises on any init failure
    (bad corpus, bad store) so the process exits before binding a port."""
    config = config or AppConfig()
    if os.environ.get("POWERKIT_STARTUP_DELAY_S"):
        time.sleep(float(os.environ["POWERKIT_STARTUP_DELAY_S"]))

    corpus = load_corpus(config.corpus_path)  # init gate: a corrupt corpus aborts startup
    results = ResultStore(config.data_dir)
    sessions = SessionStore(config.session_ttl, clock=config.clock)
    model_client: ModelClient = (HttpModelClient(config.model_url)
                                 if config.model_url else StubModelClient())

    app = FastAPI(
        title="powerkit service",
        version=__version__,
        description="Statistical power analysis: per-test solvers and "
                    "interactive design sessions.",
        openapi_url=f"{API_PREFIX}/openapi.json",
    )
    # the browser companion app may be served from another origin
    from fastapi.middleware.cors import CORSMiddleware
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    app.state.results = results
    app.state.sessions = sessions
    app.state.corpus_size = len(corpus)
    app.state.model_client = model_client

    @app.exception_handler(RequestValidationError)
    async def _on_validation(_req: Request, exc: RequestValidationError):
        errors = {}
        for err in exc.errors():
            loc = ".".join(str(p) for p in err["loc"] if p != "body") or "body"
            errors[loc] = err["msg"]
        return JSONResponse(status_code=400, content={"errors": errors})

    @app.exception_handler(InvalidDesignError)
    async def _on_invalid(_req: Request, exc: InvalidDesignError):
        return JSONResponse(status_code=400, content={"errors": exc.errors})

    @app.exception_handler(UnreachablePowerError)
    async def _on_unreachable(_req: Request, exc: UnreachablePowerError):
        return JSONResponse(status_code=422, content={"errors": {"power": str(exc)}})

    @app.exception_handler(UnknownIdError)
    async def _on_unknown(_req: Request, exc: UnknownIdError):
        return JSONResponse(status_code=404,
                            content={"errors": {"id": f"unknown id {exc.args[0]!r}"}})

    @app.exception_handler(SessionExpiredError)
    async def _on_expired(_req: Request, exc: SessionExpiredError):
        return JSONResponse(status_code=410, content={
            "errors": {"session": f"session {exc.session_id} expired"},
            "expired_at": exc.expired_at})

    def _register(test_id: str) -> None:
        request_model = _request_model(test_id)
        endpoint = ENDPOINT_NAMES[test_id]

        async def handler(body):
            payload, echoed = _solve_request(test_id, body)
            record = results.append(request=body.model_dump(exclude_none=True),
                                    response=payload)
            return ApiResponse(**payload, inputs=echoed, result_id=record.result_id)

        # assign real class objects: postponed-evaluation strings cannot name
        # a per-endpoint model created in this closure
        handler.__annotations__ = {"body": request_model, "return": ApiResponse}

        app.post(f"{API_PREFIX}/{endpoint}", response_model=ApiResponse,
                 response_model_exclude_none=True, name=endpoint,
                 summary=f"Solve a {TESTS[test_id].label} design",
                 )(handler)

    for test_id in ENDPOINT_NAMES:
        _register(test_id)

    @app.post(f"{API_PREFIX}/sessions")
    async def create_session() -> dict:
        state = new_session(now=config.clock())
        sessions.put(state)
        return {"session_id": state.id, "created": state.created}

    @app.get(f"{API_PREFIX}/sessions/{{session_id}}")
    async def get_session(session_id: str) -> dict:
        state = sessions.get(session_id)
        return _session_view(state)

    @app.post(f"{API_PREFIX}/sessions/{{session_id}}/command")
    async def session_command(session_id: str, body: SessionCommandRequest) -> dict:
        def step(state):
            client = model_client
            try:
                cmd = client.interpret(body.text)
            except ParseError as exc:
                return state, {"reply": str(exc), "error": True,
                               "state": _session_view(state)}
            new_state, reply = apply(state, cmd, now=config.clock())
            out = {"reply": reply.text, "error": reply.error, "data": reply.data,
                   "state": _session_view(new_state)}
            if reply.data and "n_total" in reply.data:
                record = results.append(request={"session_command": body.text},
                                        response=reply.data, session_id=session_id,
                                        now=config.clock())
                out["result_id"] = record.result_id
            notice = getattr(client, "last_notice", None)
            if notice:
                out["notice"] = notice
            return new_state, out

        return sessions.mutate(session_id, step)

    @app.post(f"{API_PREFIX}/curve")
    async def curve(body: CurveRequest) -> dict:
        from .power import power_of
        from .solve import solve_n as _solve_n

        effect_field = EFFECT_FIELD[body.test]
        rows: list[list[float]] = []
        # an effect sweep reports power at fixed n, or required n at fixed power
        effect_y = "power" if body.n is not None else "n_total"
        y_name = {"power": "n_total", "n": "power", "effect": effect_y}[body.sweep]
        for i in range(body.steps):
            x = body.start + (body.stop - body.start) * i / (body.steps - 1)
            if body.sweep == "power":
                spec = build_spec(body.test, body.params, alpha=body.alpha,
                                  tails=body.tails)
                y: float = _solve_n(spec, x).n_total
            elif body.sweep == "n":
                spec = build_spec(body.test, body.params, alpha=body.alpha,
                                  tails=body.tails)
                x = int(round(x))
                y = power_of(spec, x)
            else:
                spec = build_spec(body.test, {**body.params, effect_field: x},
                                  alpha=body.alpha, tails=body.tails)
                if body.n is not None:
                    y = power_of(spec, body.n)
                elif body.power is not None:
                    y = _solve_n(spec, body.power).n_total
                else:
                    raise InvalidDesignError(
                        {"power": "effect sweeps need a fixed power or n"})
            rows.append([x, y])
        return {"sweep": body.sweep, "x": body.sweep if body.sweep != "effect"
                else effect_field, "y": y_name, "rows": rows}

    @app.get(f"{API_PREFIX}/results/{{result_id}}")
    async def get_result(result_id: str) -> dict:
        return results.get(result_id).to_json()

    @app.get(f"{API_PREFIX}/health")
    async def health() -> dict:
        return {
            "status": "ok",
            "version": __version__,
            "endpoints": len(ENDPOINT_NAMES),
            "scenarios": app.state.corpus_size,
            "results_stored": len(results),
        }

    return app


def _session_view(state) -> dict:
    return {
        "session_id": state.id,
        "created": state.created,
        "updated": state.updated,
        "descriptor": state.descriptor,
        "chosen_test": state.chosen_test,
        "known_params": dict(state.known_params),
        "pending": list(state.pending),
        "history": [dataclasses.asdict(e) for e in state.history],
    }


def serve(host: str = "0.0.0.0", port: int | None = None) -> None:
    """Initialize fully, then bind. Init failure exits nonzero with no
    listener, so a probe with failure threshold 1 replaces the instance."""
    import uvicorn

    if port is None:
        port = int(os.environ.get("POWERKIT_PORT", "5000"))
    try:
        app = create_app()
    except Exception as exc:  # noqa: BLE001 - anything fatal must refuse to serve
        print(f"initialization failed: {exc}", file=sys.stderr)
        raise SystemExit(1) from exc
    uvicorn.run(app, host=host, port=port, log_level="warning")
