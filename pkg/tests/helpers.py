"""Shared test utilities: a random valid-record generator, violation
injectors, and independent brute-force oracles."""

from __future__ import annotations

import copy
import random

from vobe.records import record_from_dict


def random_record_doc(rng: random.Random, org_id: str | None = None) -> dict:
    """A structurally valid record document with random shape."""
    org_id = org_id or f"org{rng.randrange(10**6)}"
    n_act = rng.randint(1, 4)
    products = [{"id": f"prod{i}", "version": 1, "name": f"Product {i}"} for i in range(n_act)]
    activities = [
        {"id": f"act{i}", "version": 1, "name": f"Activity {i}", "productRef": f"prod{i}"}
        for i in range(n_act)
    ]
    capabilities = []
    for i in range(rng.randint(1, 5)):
        variants = [
            {
                "id": f"cap{i}-var0",
                "version": 1,
                "context": [],
                "cost": {"amount": rng.randint(0, 500), "currency": "EUR"},
                "capacities": [],
                "properties": {"duration": rng.randint(1, 20)},
            }
        ]
        for j in range(rng.randint(0, 2)):
            variants.append(
                {
                    "id": f"cap{i}-var{j + 1}",
                    "version": 1,
                    "context": [["season", "is", f"ctx{j}"]],
                    "cost": {"amount": rng.randint(0, 500), "currency": "EUR"},
                    "capacities": [],
                    "properties": {"duration": rng.randint(1, 30)},
                }
            )
        capabilities.append(
            {
                "id": f"cap{i}",
                "version": 1,
                "name": f"Capability {i}",
                "activityRef": f"act{rng.randrange(n_act)}",
                "variants": variants,
                "conspicuityRefs": [],
            }
        )
    competences = []
    for i in range(rng.randint(1, 6)):
        # sub-competence edges only point at earlier competences: acyclic
        subs = [f"comp{j}" for j in range(i) if rng.random() < 0.4]
        caps = [c["id"] for c in capabilities if rng.random() < 0.5]
        if not subs and not caps:
            caps = [rng.choice(capabilities)["id"]]
        competences.append(
            {
                "id": f"comp{i}",
                "version": 1,
                "name": f"Competence {i}",
                "capabilityRefs": caps,
                "subCompetenceRefs": subs,
                "externalizingServiceRef": None,
                "conspicuityRefs": [],
            }
        )
    services = []
    for comp in competences:
        if rng.random() < 0.4:
            svc_id = f"svc-{comp['id']}"
            comp["externalizingServiceRef"] = svc_id
            services.append(
                {
                    "id": svc_id,
                    "version": 1,
                    "ownerOrgId": org_id,
                    "name": f"Service of {comp['id']}",
                    "competenceRef": comp["id"],
                    "componentServiceRefs": [],
                    "businessInfo": {},
                }
            )
    return {
        "organizationProfile": {
            "id": org_id,
            "name": f"Organization {org_id}",
            "localization": rng.choice(["Poland", "Germany", "France"]),
            "creationDate": f"20{rng.randint(0, 20):02d}-01-15",
            "numberOfEmployees": rng.randint(0, 500),
            "memberships": [],
            "contact": "",
            "financialCapital": None,
            "board": [],
            "extra": {},
        },
        "competences": competences,
        "capabilities": capabilities,
        "activities": activities,
        "products": products,
        "resources": [],
        "services": services,
        "conspicuities": [],
    }


def random_record(rng: random.Random, org_id: str | None = None):
    return record_from_dict(random_record_doc(rng, org_id))


# violation injectors (each returns a NEW broken document) ---------------------


def inject_1to1_violation(doc: dict) -> dict:
    doc = copy.deepcopy(doc)
    comp = doc["competences"][0]
    doc["services"].append(
        {
            "id": "svc-dup",
            "version": 1,
            "ownerOrgId": doc["organizationProfile"]["id"],
            "name": "Duplicate service",
            "competenceRef": comp["id"],
            "componentServiceRefs": [],
            "businessInfo": {},
        }
    )
    return doc


def inject_competence_cycle(doc: dict) -> dict:
    doc = copy.deepcopy(doc)
    comps = doc["competences"]
    if len(comps) >= 2:
        comps[0]["subCompetenceRefs"] = [comps[1]["id"]]
        comps[1]["subCompetenceRefs"] = [comps[0]["id"]]
    else:
        comps[0]["subCompetenceRefs"] = [comps[0]["id"]]
    return doc


def inject_service_cycle(doc: dict) -> dict:
    doc = copy.deepcopy(doc)
    org = doc["organizationProfile"]["id"]
    for i in (0, 1):
        comp_id = f"comp-cyc{i}"
        doc["competences"].append(
            {
                "id": comp_id,
                "version": 1,
                "name": f"Cycle competence {i}",
                "capabilityRefs": [doc["capabilities"][0]["id"]],
                "subCompetenceRefs": [],
                "externalizingServiceRef": f"svc-cyc{i}",
                "conspicuityRefs": [],
            }
        )
        doc["services"].append(
            {
                "id": f"svc-cyc{i}",
                "version": 1,
                "ownerOrgId": org,
                "name": f"Cycle service {i}",
                "competenceRef": comp_id,
                "componentServiceRefs": [f"svc-cyc{1 - i}"],
                "businessInfo": {},
            }
        )
    return doc


def inject_duplicate_context(doc: dict) -> dict:
    doc = copy.deepcopy(doc)
    cap = doc["capabilities"][0]
    clone = copy.deepcopy(cap["variants"][0])
    clone["id"] = "var-clone"
    cap["variants"].append(clone)
    return doc


def inject_version_gap(doc: dict) -> dict:
    doc = copy.deepcopy(doc)
    doc["competences"][0]["version"] = 3
    return doc


INJECTORS = {
    "competence-service-1to1": inject_1to1_violation,
    "compound-competence-cycle": inject_competence_cycle,
    "compound-service-cycle": inject_service_cycle,
    "duplicate-variant-context": inject_duplicate_context,
    "version-gap": inject_version_gap,
}


# independent oracles -----------------------------------------------------------


def closure_oracle(record, comp_id: str) -> frozenset[str]:
    """Transitive-closure reachability computed Floyd-Warshall style, then the
    union of capability refs of reachable competences."""
    from vobe.records import current_versions

    comps = current_versions(record.competences)
    ids = sorted(comps)
    reach = {a: {b: b in comps[a].sub_competence_refs for b in ids} for a in ids}
    for k in ids:
        for i in ids:
            for j in ids:
                reach[i][j] = reach[i][j] or (reach[i][k] and reach[k][j])
    out = set(comps[comp_id].capability_refs)
    for other in ids:
        if reach[comp_id][other]:
            out |= comps[other].capability_refs
    return frozenset(out)
