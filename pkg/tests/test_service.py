"""HTTP service endpoints over the evaluation pipeline."""

import pathlib

import pytest
from fastapi.testclient import TestClient

from corelucid.service import create_app

DATA = pathlib.Path(__file__).parent / "data"
LISTING = (DATA / "mixed.ipl").read_text()
NAT = (DATA / "nat.ipl").read_text()
MANIFEST = (DATA / "mixed.manifest").read_text()


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


class TestHealth:
    def test_health(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        assert response.json() == {"status": "ok"}


class TestRun:
    def test_nat(self, client):
        response = client.post("/run", json={
            "source": NAT, "context": "{t:7}"})
        assert response.status_code == 200
        payload = response.json()
        assert payload["ok"] is True
        assert payload["results"][0]["value"] == "7"
        assert payload["results"][0]["tag"] == "OBJECTIVELUCID"

    def test_listing_with_manifest(self, client):
        response = client.post("/run", json={
            "source": LISTING, "manifest": MANIFEST})
        assert response.status_code == 200
        payload = response.json()
        assert payload["ok"] is True
        assert payload["results"][0]["value"] == "float32<4.0>"

    def test_listing_without_manifest(self, client):
        response = client.post("/run", json={"source": LISTING})
        assert response.status_code == 400
        error = response.json()["error"]
        assert error["kind"] == "MissingProvider"
        assert "bar, f1, foo" in error["message"]

    def test_special_result(self, client):
        response = client.post("/run", json={"source": "1 / 0"})
        assert response.status_code == 200
        payload = response.json()
        assert payload["ok"] is False
        result = payload["results"][0]
        assert result["special"] is True
        assert result["value"] == "special<arith> at <request>:1"

    def test_diagnostics_block_evaluation(self, client):
        source = LISTING.replace("bar(B, C)", "bar(B)")
        response = client.post("/run", json={
            "source": source, "manifest": MANIFEST})
        payload = response.json()
        assert payload["ok"] is False
        result = payload["results"][0]
        assert result["value"] is None
        assert result["diagnostics"][0]["kind"] == "ArityMismatch"

    def test_parse_error_is_400_with_line(self, client):
        response = client.post("/run", json={"source": "1 + then"})
        assert response.status_code == 400
        error = response.json()["error"]
        assert error["kind"] == "ParseError"
        assert error["line"] == 1

    def test_bad_context_is_400(self, client):
        response = client.post("/run", json={
            "source": "1", "context": "{t:}"})
        assert response.status_code == 400

    def test_missing_source_is_422(self, client):
        assert client.post("/run", json={}).status_code == 422

    def test_trace_events(self, client):
        response = client.post("/run", json={
            "source": NAT, "context": "{t:4}", "trace": True})
        result = response.json()["results"][0]
        assert result["trace_events"] == len(result["trace"]) > 0
        assert result["stats"]["entries"] == 5

    def test_eager_modes(self, client):
        source = "X @ {d:1 / 0, q:2} where q = 5; X = 0; end"
        by_mode = {}
        for mode in ("context", "dimension"):
            response = client.post("/run", json={
                "source": source, "eager_mode": mode})
            by_mode[mode] = response.json()["results"][0]["value"]
        assert by_mode["context"].startswith("special<arith>")
        assert by_mode["dimension"].startswith("special<typeerr>")


class TestStructure:
    def test_segments(self, client):
        response = client.post("/segments", json={"source": LISTING})
        tags = [s["tag"] for s in response.json()["segments"]]
        assert tags == ["TYPEDECL", "FUNCDECL", "JAVA", "CPP",
                        "OBJECTIVELUCID"]

    def test_segments_ranges(self, client):
        response = client.post("/segments", json={"source": LISTING})
        first = response.json()["segments"][0]
        assert (first["start"], first["end"]) == (4, 7)

    def test_parse(self, client):
        response = client.post("/parse", json={"source": "next x"})
        ast = response.json()["segments"][0]["ast"]
        assert ast["node"] == "SurfaceOp"
        assert ast["op"] == "next"

    def test_parse_core_dialect(self, client):
        response = client.post("/parse", json={
            "source": "next x", "dialect": "core"})
        assert response.status_code == 400

    def test_translate(self, client):
        response = client.post("/translate", json={"source": "first X"})
        core = response.json()["segments"][0]["core"]
        assert "X @ {t:0}" in core

    def test_check(self, client):
        response = client.post("/check", json={"source": LISTING})
        payload = response.json()
        assert payload["types"] == ["myclass"]
        assert [f["name"] for f in payload["functions"]] == [
            "bar", "f1", "foo"]
        assert payload["aliases"] == {"baz": "bar"}
        report = payload["segments"][0]
        assert report["ok"] is True
        assert {a["type"] for a in report["annotations"]} == {
            "float", "object(myclass)", "integer"}

    def test_check_diagnostics(self, client):
        source = LISTING.replace("bar(B, C)", "nosuchfn(B, C)")
        response = client.post("/check", json={"source": source})
        report = response.json()["segments"][0]
        assert report["ok"] is False
        assert report["diagnostics"][0]["kind"] == "UnknownFunction"
