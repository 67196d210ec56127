"""Local HTTP planning service.

Endpoints:
  GET  /health          liveness probe
  POST /plan            synchronous planning (default) or, with
                        ``?mode=job``, submission to the in-memory job table
  GET  /jobs/{id}       job status and, when finished, the result

The plan payload is the canonical mission-plan serialization, byte-identical
to what the CLI writes for the same config and seed.
"""

from __future__ import annotations

import threading
import uuid
from concurrent.futures import ThreadPoolExecutor

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from .config import parse_problem
from .errors import InfeasibleError, PlannerError, ValidationError
from .mission import plan_to_json_bytes
from .planner import build_regions, plan as run_plan

DEFAULT_CORS_ORIGINS = ["http://127.0.0.1:8080", "http://localhost:8080",
                        "http://127.0.0.1:5173", "http://localhost:5173"]


class JobTable:
    """In-memory job registry with atomic status transitions."""

    def __init__(self, max_workers: int = 2):
        self._jobs: dict[str, dict] = {}
        self._lock = threading.Lock()
        self._pool = ThreadPoolExecutor(max_workers=max_workers)

    def submit(self, config: dict) -> str:
        job_id = uuid.uuid4().hex
        with self._lock:
            self._jobs[job_id] = {"status": "queued"}
        self._pool.submit(self._run, job_id, config)
        return job_id

    def _set(self, job_id: str, **fields) -> None:
        with self._lock:
            self._jobs[job_id].update(fields)

    def _run(self, job_id: str, config: dict) -> None:
        self._set(job_id, status="running")
        try:
            spec = parse_problem(config)
            result = run_plan(spec)
            self._set(job_id, status="done", result=plan_to_json_bytes(result))
        except ValidationError as e:
            self._set(job_id, status="failed", error={"kind": "validation", "errors": e.errors})
        except InfeasibleError as e:
            self._set(
                job_id,
                status="infeasible",
                error={
                    "kind": "infeasible",
                    "message": str(e),
                    "viewpoint_index": e.viewpoint_index,
                    "doubling_trace": e.doubling_trace,
                },
            )
        except PlannerError as e:
            self._set(job_id, status="failed", error={"kind": "planner", "message": str(e)})

    def get(self, job_id: str) -> dict | None:
        with self._lock:
            job = self._jobs.get(job_id)
            return dict(job) if job is not None else None


def create_app(ui_dir: str | None = None, cors_origins: list[str] | None = None) -> FastAPI:
    app = FastAPI(title="snaproute planning service")
    jobs = JobTable()

    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins or DEFAULT_CORS_ORIGINS,
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/plan")
    async def plan_endpoint(request: Request, mode: str = "sync"):
        try:
            config = await request.json()
        except Exception:
            return JSONResponse(
                status_code=422,
                content={"errors": [{"field": "", "message": "request body is not valid JSON"}]},
            )
        if mode == "job":
            try:
                # validate schema and geometry before queueing
                build_regions(parse_problem(config))
            except ValidationError as e:
                return JSONResponse(status_code=422, content={"errors": e.errors})
            job_id = jobs.submit(config)
            return JSONResponse(status_code=202, content={"job_id": job_id})
        try:
            spec = parse_problem(config)
            result = run_plan(spec)
        except ValidationError as e:
            return JSONResponse(status_code=422, content={"errors": e.errors})
        except InfeasibleError as e:
            return JSONResponse(
                status_code=409,
                content={
                    "message": str(e),
                    "viewpoint_index": e.viewpoint_index,
                    "doubling_trace": e.doubling_trace,
                },
            )
        except PlannerError as e:
            return JSONResponse(status_code=422, content={"errors": [{"field": "", "message": str(e)}]})
        return Response(content=plan_to_json_bytes(result), media_type="application/json")

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            return JSONResponse(status_code=404, content={"message": f"unknown job {job_id}"})
        if job["status"] == "done":
            import json as _json

            return {"status": "done", "result": _json.loads(job["result"].decode("utf-8"))}
        out = {"status": job["status"]}
        if "error" in job:
            out["error"] = job["error"]
        return out

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app
