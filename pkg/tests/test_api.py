import threading

import pytest
from fastapi.testclient import TestClient

from vobe.api import create_app
from vobe.config import EngineConfig
from vobe.store import Store

from .conftest import FIXTURES, load_json


@pytest.fixture
def store(tmp_path):
    return Store(tmp_path / "data")


@pytest.fixture
def client(store):
    return TestClient(create_app(store))


@pytest.fixture
def seeded(store, client):
    client.put(
        "/organizations/softwaredev", json=load_json("softwaredev.json")
    ).raise_for_status()
    client.put("/organizations/softis", json=load_json("softis.json")).raise_for_status()
    client.put(
        "/classes/Polish Software Company",
        json={"source": (FIXTURES / "polish_software_company.ocls").read_text()},
    ).raise_for_status()
    client.put("/network", json=load_json("network.json")).raise_for_status()
    client.put("/specs/demo", json=load_json("demo_spec.json")).raise_for_status()
    return client


class TestOrganizations:
    def test_put_get_list(self, seeded):
        orgs = seeded.get("/organizations").json()["organizations"]
        assert [o["id"] for o in orgs] == ["softis", "softwaredev"]
        body = seeded.get("/organizations/softwaredev").json()
        assert body["registryVersion"] == 1
        assert body["record"]["organizationProfile"]["localization"] == "Poland"

    def test_get_unknown_is_404(self, client):
        assert client.get("/organizations/ghost").status_code == 404

    def test_invalid_record_is_400_with_violations(self, client):
        doc = load_json("softis.json")
        doc["organizationProfile"]["numberOfEmployees"] = -3
        resp = client.put("/organizations/softis", json=doc)
        assert resp.status_code == 400
        assert resp.json()["violations"]

    def test_mismatched_profile_id_is_400(self, client):
        resp = client.put("/organizations/other", json=load_json("softis.json"))
        assert resp.status_code == 400

    def test_version_conflict_is_409(self, seeded):
        doc = load_json("softwaredev.json")
        resp = seeded.put("/organizations/softwaredev?expected_version=5", json=doc)
        assert resp.status_code == 409
        ok = seeded.put("/organizations/softwaredev?expected_version=1", json=doc)
        assert ok.status_code == 200
        assert ok.json()["registryVersion"] == 2

    def test_version_history_endpoint(self, seeded):
        doc = load_json("softwaredev.json")
        doc["organizationProfile"]["numberOfEmployees"] = 50
        seeded.put("/organizations/softwaredev", json=doc).raise_for_status()
        v1 = seeded.get("/organizations/softwaredev/versions/1").json()
        assert v1["record"]["organizationProfile"]["numberOfEmployees"] == 34
        assert seeded.get("/organizations/softwaredev/versions/3").status_code == 404


class TestClasses:
    def test_put_get_round_trip(self, seeded):
        assert seeded.get("/classes").json()["classes"] == ["Polish Software Company"]
        body = seeded.get("/classes/Polish Software Company").json()
        assert 'localization = "Poland"' in body["source"]

    def test_name_mismatch_is_400(self, client):
        resp = client.put("/classes/Other", json={"source": 'class "X" { a exists }'})
        assert resp.status_code == 400

    def test_syntax_error_is_400(self, client):
        resp = client.put("/classes/X", json={"source": 'class "X" { a = }'})
        assert resp.status_code == 400
        assert resp.json()["violations"]

    def test_unknown_class_is_404(self, client):
        assert client.get("/classes/Nope").status_code == 404


class TestSearch:
    def test_by_stored_class_with_details(self, seeded):
        resp = seeded.post(
            "/search",
            json={
                "class": "Polish Software Company",
                "weights": {"0": 0.5, "1": 0.3, "2": 0.2},
            },
        )
        body = resp.json()
        assert [r["org"] for r in body["results"]] == ["softwaredev", "softis"]
        top = body["results"][0]
        assert top["isInstance"] is True and top["score"] == 1.0
        miss = body["results"][1]
        assert miss["score"] == pytest.approx(0.3)
        details = {r["path"]: r["detail"] for r in miss["requirements"]}
        assert details["organization:profile:localization"] == "value-mismatch"
        assert body["relaxationSuggested"] is False

    def test_inline_class_source(self, seeded):
        resp = seeded.post(
            "/search",
            json={"classSource": 'class "G" { organization:profile:localization = "Germany" }'},
        )
        results = resp.json()["results"]
        assert results[0]["org"] == "softis"

    def test_no_instances_suggests_relaxation(self, seeded):
        resp = seeded.post(
            "/search",
            json={"classSource": 'class "N" { organization:profile:localization = "Norway" }'},
        )
        assert resp.json()["relaxationSuggested"] is True

    def test_missing_class_key_is_400(self, client):
        assert client.post("/search", json={}).status_code == 400

    def test_bad_weight_key_is_400(self, seeded):
        resp = seeded.post(
            "/search", json={"class": "Polish Software Company", "weights": {"9": 1}}
        )
        assert resp.status_code == 400


class TestSpecs:
    def test_spec_round_trip(self, seeded):
        body = seeded.get("/specs/demo").json()
        assert body["spec"]["id"] == "demo"
        assert "lead" in body["normalized"]["roles"]

    def test_unknown_spec_is_404(self, seeded):
        assert seeded.get("/specs/nope").status_code == 404
        assert seeded.post("/specs/nope/variants", json={}).status_code == 404

    def test_spec_with_unknown_class_is_400(self, client):
        resp = client.put("/specs/demo", json=load_json("demo_spec.json"))
        assert resp.status_code == 400

    def test_candidates(self, seeded):
        body = seeded.post("/specs/demo/candidates", json={}).json()
        lead = body["roles"]["lead"]
        assert lead["candidates"] == {"softwaredev": 1.0}
        assert lead["services"] == {"softwaredev": "svc-sre"}

    def test_candidates_with_verification(self, seeded):
        body = seeded.post(
            "/specs/demo/candidates", json={"verify": True, "excludeDiscrepant": True}
        ).json()
        lead = body["roles"]["lead"]
        assert lead["excluded"] == ["softwaredev"]
        assert lead["relaxationSuggested"] is True

    def test_variants_default_and_context(self, seeded):
        plain = seeded.post("/specs/demo/variants", json={}).json()["variants"]
        assert len(plain) == 2
        assert plain[0]["totalCost"] == 100.0
        holidays = seeded.post(
            "/specs/demo/variants", json={"context": [["season", "is", "holidays"]]}
        ).json()["variants"]
        assert holidays[0]["totalCost"] > plain[0]["totalCost"]

    def test_variant_preference_overrides(self, seeded):
        body = seeded.post(
            "/specs/demo/variants",
            json={"preferences": {"allowMultiRoleOrg": False}},
        ).json()
        assert len(body["variants"]) == 1

    def test_cap_exceeded_is_422(self, store, seeded):
        app = create_app(store, EngineConfig(variant_cap=1))
        with TestClient(app) as capped:
            resp = capped.post("/specs/demo/variants", json={})
        assert resp.status_code == 422
        assert resp.json()["count"] == 2

    def test_incept_flow(self, seeded):
        resp = seeded.post("/specs/demo/incept", json={"variantIndex": 0})
        assert resp.status_code == 200
        body = resp.json()
        assert body["voId"] == "vo-1"
        weight = next(
            e["weight"]
            for e in seeded.get("/network").json()["edges"]
            if e["type"] == "pastCollaboration"
            and {e["source"], e["target"]} == {"softwaredev", "softis"}
        )
        assert weight == 2.0

    def test_incept_bad_index_is_404(self, seeded):
        assert (
            seeded.post("/specs/demo/incept", json={"variantIndex": 99}).status_code
            == 404
        )

    def test_incept_needs_index(self, seeded):
        assert seeded.post("/specs/demo/incept", json={}).status_code == 400


class TestNetworkAndVerify:
    def test_invalid_network_is_400(self, client):
        doc = load_json("network.json")
        doc["edges"][0]["weight"] = -1
        doc["edges"][0]["type"] = "trust"
        assert client.put("/network", json=doc).status_code == 400

    def test_verify_endpoint(self, seeded):
        body = seeded.post("/verify/softwaredev").json()
        assert body["hasDiscrepancy"] is True
        assert body["reliabilityScore"] == 0.0
        assert body["checks"][0]["flag"] == "discrepancy"
        assert seeded.post("/verify/ghost").status_code == 404


class TestEvents:
    def test_backlog_and_long_poll(self, seeded, store):
        body = seeded.get("/events", params={"topic": "record.updated"}).json()
        seqs = [e["sequence"] for e in body["events"]]
        assert seqs == [1, 2]

        results = {}

        def poll():
            results["body"] = seeded.get(
                "/events",
                params={"topic": "vo.incepted", "since": 0, "timeout": 10},
            ).json()

        th = threading.Thread(target=poll)
        th.start()
        seeded.post("/specs/demo/incept", json={"variantIndex": 0}).raise_for_status()
        th.join(timeout=10)
        assert not th.is_alive()
        assert results["body"]["events"][0]["payload"]["voId"] == "vo-1"

    def test_timeout_returns_empty(self, client):
        body = client.get(
            "/events", params={"topic": "nothing", "timeout": 0.05}
        ).json()
        assert body["events"] == []
