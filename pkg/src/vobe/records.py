"""Domain types for organization records: profiles, competences, capabilities,
services, and the JSON interchange format.

One JSON document per organization; top-level keys are `organizationProfile`,
`competences`, `capabilities`, `activities`, `products`, `resources`,
`services`, `conspicuities`. Every entity carries `id` and `version`, and a
record may hold several versions of one entity (the current one is the highest
version).
"""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

CONSPICUITY_KINDS = ("certificate", "diploma", "reference-letter", "report", "other")
CONSPICUITY_TARGET_KINDS = (
    "service",
    "organization",
    "competence",
    "capability",
    "cost",
    "capacity",
)


@dataclass(frozen=True)
class Cost:
    amount: float
    currency: str = "EUR"


@dataclass(frozen=True)
class Capacity:
    amount: float
    unit: str
    resource_ref: str | None = None


@dataclass(frozen=True, order=True)
class ContextTriple:
    object: str
    predicate: str
    subject: str


@dataclass(frozen=True)
class CapabilityContext:
    """Circumstances under which a capability variant applies.

    The empty triple set is the default (unconditional) context.
    """

    triples: frozenset[ContextTriple] = frozenset()

    @property
    def is_default(self) -> bool:
        return not self.triples

    def covers(self, query: "CapabilityContext") -> bool:
        """True when every triple of this context appears in the query."""
        return self.triples <= query.triples


@dataclass(frozen=True)
class CapabilityVariant:
    variant_id: str
    version: int
    context: CapabilityContext
    cost: Cost
    capacities: tuple[Capacity, ...] = ()
    properties: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Capability:
    cap_id: str
    version: int
    name: str
    activity_ref: str
    variants: tuple[CapabilityVariant, ...] = ()
    conspicuity_refs: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Competence:
    comp_id: str
    version: int
    name: str
    capability_refs: frozenset[str] = frozenset()
    sub_competence_refs: frozenset[str] = frozenset()
    externalizing_service_ref: str | None = None
    conspicuity_refs: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Activity:
    act_id: str
    name: str
    product_ref: str
    version: int = 1


@dataclass(frozen=True)
class Product:
    prod_id: str
    name: str
    version: int = 1


@dataclass(frozen=True)
class Resource:
    res_id: str
    name: str
    kind: str = ""
    version: int = 1


@dataclass(frozen=True)
class ServiceProfile:
    svc_id: str
    owner_org_id: str
    name: str
    competence_ref: str
    component_service_refs: frozenset[str] = frozenset()
    business_info: Mapping[str, Any] = field(default_factory=dict)
    version: int = 1


@dataclass(frozen=True)
class Claim:
    kind: str
    value: float | str


@dataclass(frozen=True)
class Conspicuity:
    consp_id: str
    kind: str
    document_ref: str
    target_kind: str
    target_ref: str
    claim: Claim | None = None
    version: int = 1


@dataclass(frozen=True)
class OrganizationProfile:
    org_id: str
    name: str
    localization: str = ""
    creation_date: dt.date | None = None
    number_of_employees: int = 0
    memberships: frozenset[str] = frozenset()
    contact: str = ""
    financial_capital: Cost | None = None
    board: tuple[str, ...] = ()
    extra: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class OrganizationRecord:
    profile: OrganizationProfile
    competences: tuple[Competence, ...] = ()
    capabilities: tuple[Capability, ...] = ()
    activities: tuple[Activity, ...] = ()
    products: tuple[Product, ...] = ()
    resources: tuple[Resource, ...] = ()
    services: tuple[ServiceProfile, ...] = ()
    conspicuities: tuple[Conspicuity, ...] = ()

    @property
    def org_id(self) -> str:
        return self.profile.org_id


@dataclass(frozen=True)
class VersionedId:
    id: str
    version: int


# entity accessors -----------------------------------------------------------

_ID_FIELD = {
    Competence: "comp_id",
    Capability: "cap_id",
    CapabilityVariant: "variant_id",
    Activity: "act_id",
    Product: "prod_id",
    Resource: "res_id",
    ServiceProfile: "svc_id",
    Conspicuity: "consp_id",
}


def entity_id(entity: Any) -> str:
    return getattr(entity, _ID_FIELD[type(entity)])


def current_versions(entities: Iterable[Any]) -> dict[str, Any]:
    """Map id -> entity at its highest version."""
    out: dict[str, Any] = {}
    for e in entities:
        eid = entity_id(e)
        if eid not in out or e.version > out[eid].version:
            out[eid] = e
    return out


def version_history(entities: Iterable[Any], eid: str) -> list[Any]:
    """All stored versions of one entity, ascending."""
    return sorted((e for e in entities if entity_id(e) == eid), key=lambda e: e.version)


# JSON interchange -----------------------------------------------------------


def _date_to_json(d: dt.date | None) -> str | None:
    return d.isoformat() if d is not None else None


def _date_from_json(v: Any) -> dt.date | None:
    return dt.date.fromisoformat(v) if v else None


def _cost_to_json(c: Cost | None) -> dict | None:
    return {"amount": c.amount, "currency": c.currency} if c else None


def _cost_from_json(v: Any) -> Cost | None:
    return Cost(amount=v["amount"], currency=v.get("currency", "EUR")) if v else None


def record_to_dict(record: OrganizationRecord) -> dict:
    p = record.profile
    return {
        "organizationProfile": {
            "id": p.org_id,
            "name": p.name,
            "localization": p.localization,
            "creationDate": _date_to_json(p.creation_date),
            "numberOfEmployees": p.number_of_employees,
            "memberships": sorted(p.memberships),
            "contact": p.contact,
            "financialCapital": _cost_to_json(p.financial_capital),
            "board": list(p.board),
            "extra": dict(p.extra),
        },
        "competences": [
            {
                "id": c.comp_id,
                "version": c.version,
                "name": c.name,
                "capabilityRefs": sorted(c.capability_refs),
                "subCompetenceRefs": sorted(c.sub_competence_refs),
                "externalizingServiceRef": c.externalizing_service_ref,
                "conspicuityRefs": sorted(c.conspicuity_refs),
            }
            for c in record.competences
        ],
        "capabilities": [
            {
                "id": c.cap_id,
                "version": c.version,
                "name": c.name,
                "activityRef": c.activity_ref,
                "variants": [
                    {
                        "id": v.variant_id,
                        "version": v.version,
                        "context": [
                            [t.object, t.predicate, t.subject]
                            for t in sorted(v.context.triples)
                        ],
                        "cost": _cost_to_json(v.cost),
                        "capacities": [
                            {
                                "amount": cap.amount,
                                "unit": cap.unit,
                                "resourceRef": cap.resource_ref,
                            }
                            for cap in v.capacities
                        ],
                        "properties": dict(v.properties),
                    }
                    for v in c.variants
                ],
                "conspicuityRefs": sorted(c.conspicuity_refs),
            }
            for c in record.capabilities
        ],
        "activities": [
            {"id": a.act_id, "version": a.version, "name": a.name, "productRef": a.product_ref}
            for a in record.activities
        ],
        "products": [
            {"id": p_.prod_id, "version": p_.version, "name": p_.name}
            for p_ in record.products
        ],
        "resources": [
            {"id": r.res_id, "version": r.version, "name": r.name, "kind": r.kind}
            for r in record.resources
        ],
        "services": [
            {
                "id": s.svc_id,
                "version": s.version,
                "ownerOrgId": s.owner_org_id,
                "name": s.name,
                "competenceRef": s.competence_ref,
                "componentServiceRefs": sorted(s.component_service_refs),
                "businessInfo": dict(s.business_info),
            }
            for s in record.services
        ],
        "conspicuities": [
            {
                "id": c.consp_id,
                "version": c.version,
                "kind": c.kind,
                "documentRef": c.document_ref,
                "targetKind": c.target_kind,
                "targetRef": c.target_ref,
                "claim": (
                    {"kind": c.claim.kind, "value": c.claim.value} if c.claim else None
                ),
            }
            for c in record.conspicuities
        ],
    }


def record_from_dict(doc: Mapping[str, Any]) -> OrganizationRecord:
    prof = doc["organizationProfile"]
    profile = OrganizationProfile(
        org_id=prof["id"],
        name=prof.get("name", ""),
        localization=prof.get("localization", ""),
        creation_date=_date_from_json(prof.get("creationDate")),
        number_of_employees=prof.get("numberOfEmployees", 0),
        memberships=frozenset(prof.get("memberships", ())),
        contact=prof.get("contact", ""),
        financial_capital=_cost_from_json(prof.get("financialCapital")),
        board=tuple(prof.get("board", ())),
        extra=dict(prof.get("extra", {})),
    )
    competences = tuple(
        Competence(
            comp_id=c["id"],
            version=c.get("version", 1),
            name=c.get("name", ""),
            capability_refs=frozenset(c.get("capabilityRefs", ())),
            sub_competence_refs=frozenset(c.get("subCompetenceRefs", ())),
            externalizing_service_ref=c.get("externalizingServiceRef"),
            conspicuity_refs=frozenset(c.get("conspicuityRefs", ())),
        )
        for c in doc.get("competences", ())
    )
    capabilities = tuple(
        Capability(
            cap_id=c["id"],
            version=c.get("version", 1),
            name=c.get("name", ""),
            activity_ref=c.get("activityRef", ""),
            variants=tuple(
                CapabilityVariant(
                    variant_id=v["id"],
                    version=v.get("version", 1),
                    context=CapabilityContext(
                        frozenset(ContextTriple(*t) for t in v.get("context", ()))
                    ),
                    cost=_cost_from_json(v.get("cost")) or Cost(0.0),
                    capacities=tuple(
                        Capacity(
                            amount=cap["amount"],
                            unit=cap.get("unit", ""),
                            resource_ref=cap.get("resourceRef"),
                        )
                        for cap in v.get("capacities", ())
                    ),
                    properties=dict(v.get("properties", {})),
                )
                for v in c.get("variants", ())
            ),
            conspicuity_refs=frozenset(c.get("conspicuityRefs", ())),
        )
        for c in doc.get("capabilities", ())
    )
    activities = tuple(
        Activity(
            act_id=a["id"],
            version=a.get("version", 1),
            name=a.get("name", ""),
            product_ref=a.get("productRef", ""),
        )
        for a in doc.get("activities", ())
    )
    products = tuple(
        Product(prod_id=p["id"], version=p.get("version", 1), name=p.get("name", ""))
        for p in doc.get("products", ())
    )
    resources = tuple(
        Resource(
            res_id=r["id"],
            version=r.get("version", 1),
            name=r.get("name", ""),
            kind=r.get("kind", ""),
        )
        for r in doc.get("resources", ())
    )
    services = tuple(
        ServiceProfile(
            svc_id=s["id"],
            version=s.get("version", 1),
            owner_org_id=s.get("ownerOrgId", profile.org_id),
            name=s.get("name", ""),
            competence_ref=s.get("competenceRef", ""),
            component_service_refs=frozenset(s.get("componentServiceRefs", ())),
            business_info=dict(s.get("businessInfo", {})),
        )
        for s in doc.get("services", ())
    )
    conspicuities = tuple(
        Conspicuity(
            consp_id=c["id"],
            version=c.get("version", 1),
            kind=c.get("kind", "other"),
            document_ref=c.get("documentRef", ""),
            target_kind=c.get("targetKind", ""),
            target_ref=c.get("targetRef", ""),
            claim=(
                Claim(kind=c["claim"]["kind"], value=c["claim"]["value"])
                if c.get("claim")
                else None
            ),
        )
        for c in doc.get("conspicuities", ())
    )
    return OrganizationRecord(
        profile=profile,
        competences=competences,
        capabilities=capabilities,
        activities=activities,
        products=products,
        resources=resources,
        services=services,
        conspicuities=conspicuities,
    )


def record_to_json(record: OrganizationRecord, *, indent: int | None = 2) -> str:
    return json.dumps(record_to_dict(record), indent=indent, sort_keys=True)


def record_from_json(text: str) -> OrganizationRecord:
    return record_from_dict(json.loads(text))
