"""HTTP surface over the store and the selection pipeline (JSON bodies).

Error contract: 400 validation (body lists violations), 404 unknown id,
409 version conflict, 422 enumeration cap exceeded.
"""

from __future__ import annotations

from typing import Any

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import dsl
from .config import EngineConfig
from .errors import (
    AmbiguousServiceError,
    CapExceededError,
    DslSyntaxError,
    ResolutionError,
    SpecValidationError,
)
from .matching import WeightedClass, is_instance, score
from .pipeline import (
    Preferences,
    context_from_pairs,
    define_spec,
    generate_variants,
    select_candidates,
    spec_to_dict,
)
from .record_ops import flatten_properties
from .records import record_to_dict
from .socialnet import network_to_dict, verify_claims
from .store import IngestRejected, Store


def _weighted_class(cls: dsl.OrganizationClass, weights_doc: dict) -> WeightedClass:
    leaf_list = dsl.leaves(cls.expr)
    weights = {}
    for key, w in (weights_doc or {}).items():
        try:
            weights[leaf_list[int(key)]] = float(w)
        except (ValueError, IndexError):
            raise HTTPException(400, detail={"violations": [f"bad weight key {key!r}"]})
    try:
        return WeightedClass(cls, weights)
    except ValueError as exc:
        raise HTTPException(400, detail={"violations": [str(exc)]})


def _requirement_doc(res) -> dict:
    req = res.requirement
    return {
        "path": req.property_path,
        "predicate": dsl._predicate_text(req.predicate),
        "satisfied": res.satisfied,
        "detail": res.detail.value,
    }


def create_app(store: Store, config: EngineConfig | None = None,
               static_dir: str | None = None) -> FastAPI:
    config = config or EngineConfig()
    app = FastAPI(title="vobe registry")

    @app.exception_handler(IngestRejected)
    async def _rejected(_req: Request, exc: IngestRejected):
        return JSONResponse(status_code=400, content={"violations": exc._texts()})

    @app.exception_handler(SpecValidationError)
    async def _spec_invalid(_req: Request, exc: SpecValidationError):
        return JSONResponse(status_code=400, content={"violations": [str(exc)]})

    @app.exception_handler(DslSyntaxError)
    async def _dsl_error(_req: Request, exc: DslSyntaxError):
        return JSONResponse(status_code=400, content={"violations": [str(exc)]})

    @app.exception_handler(AmbiguousServiceError)
    async def _ambiguous(_req: Request, exc: AmbiguousServiceError):
        return JSONResponse(status_code=400, content={"violations": [str(exc)]})

    @app.exception_handler(CapExceededError)
    async def _cap(_req: Request, exc: CapExceededError):
        return JSONResponse(
            status_code=422, content={"error": str(exc), "count": exc.count, "cap": exc.cap}
        )

    @app.exception_handler(ResolutionError)
    async def _unresolved(_req: Request, exc: ResolutionError):
        return JSONResponse(status_code=404, content={"error": str(exc)})

    # organizations -----------------------------------------------------------

    @app.get("/organizations")
    def list_organizations():
        snap = store.snapshot()
        return {
            "organizations": [
                {
                    "id": org_id,
                    "name": rec.profile.name,
                    "registryVersion": len(snap.organization_histories[org_id]),
                }
                for org_id, rec in sorted(snap.organizations.items())
            ]
        }

    @app.get("/organizations/{org_id}")
    def get_organization(org_id: str):
        snap = store.snapshot()
        record = snap.organizations.get(org_id)
        if record is None:
            raise HTTPException(404, detail=f"unknown organization {org_id!r}")
        return {
            "registryVersion": len(snap.organization_histories[org_id]),
            "record": record_to_dict(record),
        }

    @app.get("/organizations/{org_id}/versions/{version}")
    def get_organization_version(org_id: str, version: int):
        snap = store.snapshot()
        history = snap.organization_histories.get(org_id)
        if history is None or not 1 <= version <= len(history):
            raise HTTPException(404, detail=f"unknown version {version} of {org_id!r}")
        return {"registryVersion": version, "record": record_to_dict(history[version - 1])}

    @app.put("/organizations/{org_id}")
    def put_organization(org_id: str, body: dict, expected_version: int | None = Query(None)):
        if body.get("organizationProfile", {}).get("id") != org_id:
            raise HTTPException(
                400, detail={"violations": ["organizationProfile.id must match the URL id"]}
            )
        snap = store.snapshot()
        current = len(snap.organization_histories.get(org_id, ()))
        if expected_version is not None and expected_version != current:
            raise HTTPException(
                409, detail=f"version conflict: expected {expected_version}, stored {current}"
            )
        store.ingest(body, "record")
        return {"orgId": org_id, "registryVersion": current + 1}

    # classes -------------------------------------------------------------------

    @app.get("/classes")
    def list_classes():
        snap = store.snapshot()
        return {"classes": sorted(snap.class_sources)}

    @app.get("/classes/{name}")
    def get_class(name: str):
        snap = store.snapshot()
        source = snap.class_sources.get(name)
        if source is None:
            raise HTTPException(404, detail=f"unknown class {name!r}")
        return {"name": name, "source": source}

    @app.put("/classes/{name}")
    def put_class(name: str, body: dict):
        cls = dsl.parse_class(body.get("source", ""))
        if cls.name != name:
            raise HTTPException(
                400,
                detail={"violations": [f"class is named {cls.name!r}, not {name!r}"]},
            )
        store.ingest(body["source"], "classfile")
        return {"name": name}

    # search ----------------------------------------------------------------------

    @app.post("/search")
    def search(body: dict):
        snap = store.snapshot()
        if "classSource" in body:
            cls = dsl.parse_class(body["classSource"])
        elif "class" in body:
            cls = snap.classes.get(body["class"])
            if cls is None:
                raise HTTPException(404, detail=f"unknown class {body['class']!r}")
        else:
            raise HTTPException(
                400, detail={"violations": ["body needs 'class' or 'classSource'"]}
            )
        weighted = _weighted_class(cls, body.get("weights", {}))
        results = []
        for org_id, record in sorted(snap.organizations.items()):
            view = flatten_properties(record)
            inst, leaf_results = is_instance(view, cls)
            results.append(
                {
                    "org": org_id,
                    "score": score(view, weighted),
                    "isInstance": inst,
                    "requirements": [_requirement_doc(r) for r in leaf_results],
                }
            )
        results.sort(key=lambda r: (not r["isInstance"], -r["score"], r["org"]))
        instances = [r for r in results if r["isInstance"]]
        return {
            "results": results,
            "relaxationSuggested": not instances,
        }

    # specs --------------------------------------------------------------------------

    @app.get("/specs/{spec_id}")
    def get_spec(spec_id: str):
        snap = store.snapshot()
        doc = snap.spec_docs.get(spec_id)
        if doc is None:
            raise HTTPException(404, detail=f"unknown spec {spec_id!r}")
        return {"spec": doc, "normalized": spec_to_dict(snap.spec(spec_id))}

    @app.put("/specs/{spec_id}")
    def put_spec(spec_id: str, body: dict):
        if body.get("id") != spec_id:
            raise HTTPException(400, detail={"violations": ["spec id must match the URL id"]})
        store.ingest(body, "spec")
        return {"specId": spec_id}

    @app.post("/specs/{spec_id}/candidates")
    def spec_candidates(spec_id: str, body: dict | None = None):
        body = body or {}
        snap = store.snapshot()
        spec = snap.spec(spec_id)
        per_role = select_candidates(
            spec,
            snap.organizations,
            snap.network,
            verify=body.get("verify", False),
            exclude_discrepant=body.get("excludeDiscrepant", False),
            rules=config.verification,
        )
        return {
            "roles": {
                name: {
                    "candidates": rc.candidates,
                    "relaxationSuggested": rc.relaxation_suggested,
                    "rejected": rc.rejected,
                    "services": rc.services,
                    "flagged": sorted(rc.flagged),
                    "excluded": sorted(rc.excluded),
                }
                for name, rc in per_role.items()
            }
        }

    def _spec_with_overrides(spec, overrides: dict):
        if not overrides:
            return spec
        prefs = spec.preferences
        sort_keys = tuple(
            (k["key"], k.get("order", "desc")) for k in overrides.get("sortKeys", ())
        ) or prefs.sort_keys
        new_prefs = Preferences(
            sort_keys=sort_keys,
            min_acceptable_score=overrides.get(
                "minAcceptableScore", prefs.min_acceptable_score
            ),
            allow_multi_role_org=overrides.get(
                "allowMultiRoleOrg", prefs.allow_multi_role_org
            ),
        )
        from dataclasses import replace as _replace

        return _replace(spec, preferences=new_prefs)

    def _variants_for(spec_id: str, body: dict):
        snap = store.snapshot()
        spec = _spec_with_overrides(snap.spec(spec_id), body.get("preferences", {}))
        context = context_from_pairs(body.get("context", ()))
        per_role = select_candidates(
            spec,
            snap.organizations,
            snap.network,
            verify=body.get("verify", False),
            exclude_discrepant=body.get("excludeDiscrepant", False),
            rules=config.verification,
        )
        variants = generate_variants(
            spec, per_role, snap.organizations, snap.network, context,
            cap=config.variant_cap,
        )
        return snap, spec, variants

    @app.post("/specs/{spec_id}/variants")
    def spec_variants(spec_id: str, body: dict | None = None):
        _, _, variants = _variants_for(spec_id, body or {})
        return {"variants": [v.to_dict() for v in variants]}

    @app.post("/specs/{spec_id}/incept")
    def spec_incept(spec_id: str, body: dict):
        if "variantIndex" not in body:
            raise HTTPException(400, detail={"violations": ["body needs variantIndex"]})
        _, spec, variants = _variants_for(spec_id, body)
        index = body["variantIndex"]
        if not 0 <= index < len(variants):
            raise HTTPException(404, detail=f"no variant at index {index}")
        vo_id = store.incept_vo(variants[index], spec)
        return {"voId": vo_id, "variant": variants[index].to_dict()}

    # network / verification -----------------------------------------------------------

    @app.get("/network")
    def get_network():
        return network_to_dict(store.snapshot().network)

    @app.put("/network")
    def put_network(body: dict):
        store.ingest(body, "network")
        return {"ok": True}

    @app.post("/verify/{org_id}")
    def verify(org_id: str):
        snap = store.snapshot()
        record = snap.organizations.get(org_id)
        if record is None:
            raise HTTPException(404, detail=f"unknown organization {org_id!r}")
        report = verify_claims(org_id, record, snap.network, config.verification)
        return {
            "orgId": org_id,
            "reliabilityScore": report.reliability_score,
            "hasDiscrepancy": report.has_discrepancy,
            "checks": [
                {
                    "claim": c.claim_description,
                    "sourceOfTruth": c.source_of_truth,
                    "claimed": c.claimed_value,
                    "observed": c.observed_value,
                    "flag": c.flag,
                }
                for c in report.checks
            ],
        }

    # events -----------------------------------------------------------------------------

    @app.get("/events")
    def events(topic: str, since: int = 0, timeout: float = 25.0):
        found = store.events.wait_for(topic, since, timeout=min(timeout, 25.0))
        return {"events": [e.to_dict() for e in found]}

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
