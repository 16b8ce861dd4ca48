"""REST interface for orchestrators: submit, cache-check, poll.

Message flow: a JSON request is validated in full (every violation reported
at once); on a cache hit the stored result returns immediately with 200;
otherwise the job is queued on a bounded worker pool and a 202 with a waiting
ID comes back, to be polled at ``GET /v1/chains/{request_id}``.

State (job records and the result cache) is in-memory and per-process: a
restart clears in-flight jobs and cached results. Run single-process; the
worker pool handles concurrency inside it.
"""

from __future__ import annotations

import logging
import os
import threading
import time
import uuid
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .domain import (
    OptimizationRequest,
    RequestValidationError,
    canonical_request_key,
    validate_request,
)
from .encoding import result_payload
from .optimize import optimize

logger = logging.getLogger(__name__)

DEFAULT_QUEUE_LIMIT = 64
DEFAULT_CACHE_CAPACITY = 128


class JobStatus(str, Enum):
    PENDING = "pending"
    RUNNING = "running"
    DONE = "done"
    FAILED = "failed"


@dataclass
class JobRecord:
    """Lifecycle of one accepted request; transitions pending -> running -> done|failed."""

    request_id: str
    cache_key: str
    status: JobStatus = JobStatus.PENDING
    submitted_at: float = field(default_factory=time.time)
    completed_at: float | None = None
    payload: dict[str, Any] | None = None  # full response body once done
    error: str | None = None


class ResultCache:
    """Bounded LRU of completed response payloads, exact-key match only."""

    def __init__(self, capacity: int):
        if capacity < 0:
            raise ValueError("cache capacity must be >= 0")
        self.capacity = capacity
        self._data: OrderedDict[str, dict[str, Any]] = OrderedDict()
        self._lock = threading.Lock()

    def get(self, key: str) -> dict[str, Any] | None:
        with self._lock:
            payload = self._data.get(key)
            if payload is not None:
                self._data.move_to_end(key)
            return payload

    def put_if_absent(self, key: str, payload: dict[str, Any]) -> None:
        if self.capacity == 0:
            return
        with self._lock:
            if key not in self._data:
                self._data[key] = payload
                while len(self._data) > self.capacity:
                    self._data.popitem(last=False)


class JobStore:
    """Thread-safe registry of job records with a bound on queued work."""

    def __init__(self, queue_limit: int):
        self.queue_limit = queue_limit
        self._jobs: dict[str, JobRecord] = {}
        self._lock = threading.Lock()

    def try_create(self, cache_key: str) -> JobRecord | None:
        """Register a new pending job, or None when the queue is full."""
        with self._lock:
            active = sum(
                1
                for job in self._jobs.values()
                if job.status in (JobStatus.PENDING, JobStatus.RUNNING)
            )
            if active >= self.queue_limit:
                return None
            job = JobRecord(request_id=uuid.uuid4().hex, cache_key=cache_key)
            self._jobs[job.request_id] = job
            return job

    def get(self, request_id: str) -> JobRecord | None:
        with self._lock:
            return self._jobs.get(request_id)

    def mark_running(self, request_id: str) -> None:
        with self._lock:
            job = self._jobs[request_id]
            if job.status is not JobStatus.PENDING:
                raise RuntimeError(f"job {request_id} is {job.status}, expected pending")
            job.status = JobStatus.RUNNING

    def mark_done(self, request_id: str, payload: dict[str, Any]) -> None:
        with self._lock:
            job = self._jobs[request_id]
            if job.status is not JobStatus.RUNNING:
                raise RuntimeError(f"job {request_id} is {job.status}, expected running")
            job.status = JobStatus.DONE
            job.completed_at = time.time()
            job.payload = payload

    def mark_failed(self, request_id: str, error: str) -> None:
        with self._lock:
            job = self._jobs[request_id]
            job.status = JobStatus.FAILED
            job.completed_at = time.time()
            job.error = error


@dataclass(frozen=True)
class ServiceConfig:
    workers: int | None = None  # None = available parallelism
    queue_limit: int = DEFAULT_QUEUE_LIMIT
    cache_capacity: int = DEFAULT_CACHE_CAPACITY


def _validation_response(exc: RequestValidationError) -> JSONResponse:
    return JSONResponse(
        status_code=400,
        content={"errors": [{"field": e.field, "message": e.message} for e in exc.errors]},
    )


def _execute_job(
    store: JobStore, cache: ResultCache, job_id: str, request: OptimizationRequest
) -> None:
    store.mark_running(job_id)
    try:
        result = optimize(request)
    except Exception as exc:  # surface solver/search failures to the poller
        logger.exception("job %s failed", job_id)
        store.mark_failed(job_id, f"{type(exc).__name__}: {exc}")
        return
    job = store.get(job_id)
    assert job is not None
    payload = {
        "request_id": job_id,
        "status": JobStatus.DONE.value,
        "elapsed_seconds": round(result.search_report.wall_time_seconds, 6),
        "result": result_payload(request, result),
    }
    cache.put_if_absent(job.cache_key, payload)
    store.mark_done(job_id, payload)


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    """Build the service application with its own job store and cache."""
    config = config or ServiceConfig()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.executor = ThreadPoolExecutor(
            max_workers=config.workers or os.cpu_count() or 1,
            thread_name_prefix="optimizer",
        )
        try:
            yield
        finally:
            app.state.executor.shutdown(wait=False, cancel_futures=True)

    app = FastAPI(title="sfcavail", lifespan=lifespan)
    app.state.store = JobStore(queue_limit=config.queue_limit)
    app.state.cache = ResultCache(capacity=config.cache_capacity)

    @app.post("/v1/chains")
    async def submit(request: Request) -> JSONResponse:
        try:
            raw = await request.json()
        except Exception:
            return JSONResponse(
                status_code=400,
                content={"errors": [{"field": "$", "message": "body is not valid JSON"}]},
            )
        try:
            validated = validate_request(raw)
        except RequestValidationError as exc:
            return _validation_response(exc)

        key = canonical_request_key(validated)
        cached = app.state.cache.get(key)
        if cached is not None:
            return JSONResponse(status_code=200, content=cached)

        job = app.state.store.try_create(key)
        if job is None:
            return JSONResponse(status_code=503, content={"error": "job queue is full"})
        accepted = {"request_id": job.request_id, "status": job.status.value}
        app.state.executor.submit(
            _execute_job, app.state.store, app.state.cache, job.request_id, validated
        )
        return JSONResponse(status_code=202, content=accepted)

    @app.get("/v1/chains/{request_id}")
    async def poll(request_id: str) -> JSONResponse:
        job = app.state.store.get(request_id)
        if job is None:
            return JSONResponse(status_code=404, content={"error": "unknown request_id"})
        if job.status is JobStatus.DONE:
            return JSONResponse(status_code=200, content=job.payload)
        if job.status is JobStatus.FAILED:
            return JSONResponse(
                status_code=200,
                content={
                    "request_id": job.request_id,
                    "status": job.status.value,
                    "error": job.error,
                },
            )
        return JSONResponse(
            status_code=200,
            content={"request_id": job.request_id, "status": job.status.value},
        )

    return app
