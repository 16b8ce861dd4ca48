"""REST message flow: validate, cache, waiting ID, poll."""

import threading
import time

import pytest
from fastapi.testclient import TestClient

from sfcavail import optimize, validate_request
from sfcavail.encoding import dumps_canonical, result_payload
from sfcavail.service import ServiceConfig, create_app
from helpers import load_vims_raw


def make_client(**kwargs):
    return TestClient(create_app(ServiceConfig(**kwargs)))


def poll_until_done(client, request_id, timeout=30.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        response = client.get(f"/v1/chains/{request_id}")
        assert response.status_code == 200
        body = response.json()
        if body["status"] in ("done", "failed"):
            return response
        time.sleep(0.01)
    raise AssertionError(f"job {request_id} did not finish within {timeout}s")


class TestSubmitFlow:
    def test_accepts_and_completes(self):
        with make_client(workers=2) as client:
            accepted = client.post("/v1/chains", json=load_vims_raw())
            assert accepted.status_code == 202
            body = accepted.json()
            assert set(body) == {"request_id", "status"}
            assert body["status"] == "pending"

            finished = poll_until_done(client, body["request_id"])
            done = finished.json()
            assert done["status"] == "done"
            assert done["request_id"] == body["request_id"]
            assert done["result"]["feasible"] is True
            assert len(done["result"]["chains"]) == 4
            assert done["elapsed_seconds"] >= 0

    def test_done_result_equals_direct_optimizer_run(self):
        raw = load_vims_raw()
        with make_client(workers=1) as client:
            accepted = client.post("/v1/chains", json=raw)
            done = poll_until_done(client, accepted.json()["request_id"]).json()
        request = validate_request(raw)
        direct = result_payload(request, optimize(request))
        assert dumps_canonical(done["result"]) == dumps_canonical(direct)

    def test_poll_before_completion_reports_progress(self, monkeypatch):
        import sfcavail.service as service

        original = service.optimize

        def slow(request):
            time.sleep(0.4)
            return original(request)

        monkeypatch.setattr(service, "optimize", slow)
        with make_client(workers=1) as client:
            accepted = client.post("/v1/chains", json=load_vims_raw())
            rid = accepted.json()["request_id"]
            early = client.get(f"/v1/chains/{rid}")
            assert early.status_code == 200
            assert early.json()["status"] in ("pending", "running")
            assert "result" not in early.json()
            poll_until_done(client, rid)

    def test_done_responses_are_immutable_and_repeatable(self):
        with make_client() as client:
            accepted = client.post("/v1/chains", json=load_vims_raw())
            rid = accepted.json()["request_id"]
            first = poll_until_done(client, rid)
            second = client.get(f"/v1/chains/{rid}")
            assert first.content == second.content


class TestCache:
    def test_resubmission_hits_cache_byte_identical(self):
        raw = load_vims_raw()
        with make_client() as client:
            accepted = client.post("/v1/chains", json=raw)
            assert accepted.status_code == 202
            done = poll_until_done(client, accepted.json()["request_id"])

            hit = client.post("/v1/chains", json=raw)
            assert hit.status_code == 200
            assert hit.content == done.content

    def test_semantically_equal_request_hits_cache(self):
        raw = load_vims_raw()
        with make_client() as client:
            accepted = client.post("/v1/chains", json=raw)
            poll_until_done(client, accepted.json()["request_id"])
            # same request, different field order and float spelling of a layer value
            reordered = dict(reversed(list(raw.items())))
            reordered["nodes"] = [dict(reversed(list(n.items()))) for n in raw["nodes"]]
            reordered["nodes"][0]["hw"]["mttf"] = float(raw["nodes"][0]["hw"]["mttf"])
            assert client.post("/v1/chains", json=reordered).status_code == 200

    def test_different_max_sfc_misses_cache(self):
        raw = load_vims_raw()
        with make_client() as client:
            accepted = client.post("/v1/chains", json=raw)
            poll_until_done(client, accepted.json()["request_id"])
            other = dict(raw)
            other["max_sfc"] = 2
            second = client.post("/v1/chains", json=other)
            assert second.status_code == 202
            poll_until_done(client, second.json()["request_id"])
            # both results now cached independently
            assert client.post("/v1/chains", json=raw).status_code == 200
            assert client.post("/v1/chains", json=other).status_code == 200

    def test_lru_eviction_capacity_one(self):
        raw_a = load_vims_raw()
        raw_b = dict(raw_a)
        raw_b["max_sfc"] = 2
        with make_client(cache_capacity=1) as client:
            first = client.post("/v1/chains", json=raw_a)
            poll_until_done(client, first.json()["request_id"])
            assert client.post("/v1/chains", json=raw_a).status_code == 200

            second = client.post("/v1/chains", json=raw_b)
            assert second.status_code == 202
            poll_until_done(client, second.json()["request_id"])
            assert client.post("/v1/chains", json=raw_b).status_code == 200
            # raw_a was evicted: resubmission starts a fresh job
            assert client.post("/v1/chains", json=raw_a).status_code == 202

    def test_capacity_zero_disables_caching(self):
        raw = load_vims_raw()
        with make_client(cache_capacity=0) as client:
            first = client.post("/v1/chains", json=raw)
            poll_until_done(client, first.json()["request_id"])
            again = client.post("/v1/chains", json=raw)
            assert again.status_code == 202

    def test_concurrent_identical_submissions_agree(self, monkeypatch):
        import sfcavail.service as service

        original = service.optimize
        release = threading.Event()

        def gated(request):
            release.wait(timeout=10)
            return original(request)

        monkeypatch.setattr(service, "optimize", gated)
        raw = load_vims_raw()
        with make_client(workers=2) as client:
            first = client.post("/v1/chains", json=raw)
            second = client.post("/v1/chains", json=raw)
            assert first.status_code == second.status_code == 202
            assert first.json()["request_id"] != second.json()["request_id"]
            release.set()
            done_a = poll_until_done(client, first.json()["request_id"]).json()
            done_b = poll_until_done(client, second.json()["request_id"]).json()
            assert dumps_canonical(done_a["result"]) == dumps_canonical(done_b["result"])
            # after completion, identical submissions come from the cache
            assert client.post("/v1/chains", json=raw).status_code == 200


class TestValidationResponses:
    def test_invalid_target_400(self):
        raw = load_vims_raw()
        raw["availability_target"] = 1.5
        with make_client() as client:
            response = client.post("/v1/chains", json=raw)
        assert response.status_code == 400
        errors = response.json()["errors"]
        assert errors == [
            {"field": "availability_target", "message": "must be in (0,1)"}
        ]

    def test_error_list_is_complete(self):
        raw = load_vims_raw()
        raw["availability_target"] = 2
        raw["max_vnf"] = 0
        raw["nodes"][0]["vm"]["mttf"] = -3
        with make_client() as client:
            response = client.post("/v1/chains", json=raw)
        assert response.status_code == 400
        fields = {e["field"] for e in response.json()["errors"]}
        assert fields == {"availability_target", "max_vnf", "nodes[0].vm.mttf"}

    def test_malformed_json_400(self):
        with make_client() as client:
            response = client.post(
                "/v1/chains", content=b"{not json", headers={"content-type": "application/json"}
            )
        assert response.status_code == 400
        assert response.json()["errors"]

    def test_unknown_id_404(self):
        with make_client() as client:
            response = client.get("/v1/chains/deadbeef")
        assert response.status_code == 404


class TestQueueBound:
    def test_full_queue_returns_503(self, monkeypatch):
        import sfcavail.service as service

        original = service.optimize
        release = threading.Event()

        def gated(request):
            release.wait(timeout=10)
            return original(request)

        monkeypatch.setattr(service, "optimize", gated)
        raw_a = load_vims_raw()
        raw_b = dict(raw_a)
        raw_b["max_sfc"] = 2
        with make_client(workers=1, queue_limit=1) as client:
            first = client.post("/v1/chains", json=raw_a)
            assert first.status_code == 202
            second = client.post("/v1/chains", json=raw_b)
            assert second.status_code == 503
            release.set()
            poll_until_done(client, first.json()["request_id"])
            third = client.post("/v1/chains", json=raw_b)
            assert third.status_code == 202
            poll_until_done(client, third.json()["request_id"])


class TestRestartSemantics:
    def test_restart_clears_jobs_and_cache(self):
        raw = load_vims_raw()
        with make_client() as client:
            accepted = client.post("/v1/chains", json=raw)
            rid = accepted.json()["request_id"]
            poll_until_done(client, rid)
        with make_client() as client:
            assert client.get(f"/v1/chains/{rid}").status_code == 404
            assert client.post("/v1/chains", json=raw).status_code == 202
