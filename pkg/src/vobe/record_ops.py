"""Operations over organization records: structural validation, compound
competence expansion, context-sensitive variant selection, versioning, and
the flattened property view used by requirement matching.

All functions are pure over an immutable record snapshot.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, replace
from typing import Any

from .errors import NoVariantError, ResolutionError
from .records import (
    Capability,
    CapabilityContext,
    CapabilityVariant,
    Competence,
    CONSPICUITY_KINDS,
    CONSPICUITY_TARGET_KINDS,
    OrganizationRecord,
    VersionedId,
    current_versions,
    entity_id,
    version_history,
)


@dataclass(frozen=True)
class Violation:
    rule: str
    entity_id: str
    path: str
    message: str


# missing-value sentinel for property views
MISSING = object()

PropertyView = dict[str, Any]


def _cycle_in(graph: dict[str, frozenset[str]]) -> str | None:
    """Return a node on a cycle of the reference graph, or None."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {n: WHITE for n in graph}

    def visit(node: str) -> str | None:
        color[node] = GREY
        for nxt in graph.get(node, frozenset()):
            if nxt not in graph:
                continue
            if color[nxt] == GREY:
                return nxt
            if color[nxt] == WHITE:
                found = visit(nxt)
                if found is not None:
                    return found
        color[node] = BLACK
        return None

    for n in graph:
        if color[n] == WHITE:
            found = visit(n)
            if found is not None:
                return found
    return None


def _check_versions(entities, kind: str, violations: list[Violation]) -> None:
    by_id: dict[str, list[int]] = {}
    for e in entities:
        by_id.setdefault(entity_id(e), []).append(e.version)
    for eid, versions in by_id.items():
        ordered = sorted(versions)
        if len(set(ordered)) != len(ordered):
            violations.append(
                Violation("version-duplicate", eid, kind, "duplicate version numbers")
            )
        elif ordered != list(range(1, len(ordered) + 1)):
            violations.append(
                Violation(
                    "version-gap",
                    eid,
                    kind,
                    f"versions {ordered} are not gapless from 1",
                )
            )


def validate_record(
    record: OrganizationRecord, *, today: dt.date | None = None
) -> list[Violation]:
    """Check every structural invariant; an empty list means the record is valid.

    Unresolved references are reported as violations, never raised.
    """
    v: list[Violation] = []
    today = today or dt.date.today()
    p = record.profile

    if p.number_of_employees < 0:
        v.append(
            Violation(
                "profile-non-negative-employees",
                p.org_id,
                "organizationProfile.numberOfEmployees",
                "numberOfEmployees must be >= 0",
            )
        )
    if p.creation_date is not None and p.creation_date > today:
        v.append(
            Violation(
                "profile-creation-date-future",
                p.org_id,
                "organizationProfile.creationDate",
                f"creationDate {p.creation_date} is in the future",
            )
        )

    for kind, entities in (
        ("competences", record.competences),
        ("capabilities", record.capabilities),
        ("services", record.services),
        ("activities", record.activities),
        ("products", record.products),
        ("resources", record.resources),
        ("conspicuities", record.conspicuities),
    ):
        _check_versions(entities, kind, v)
    for cap in record.capabilities:
        _check_versions(cap.variants, f"capabilities.{cap.cap_id}.variants", v)

    comps = current_versions(record.competences)
    caps = current_versions(record.capabilities)
    acts = current_versions(record.activities)
    prods = current_versions(record.products)
    svcs = current_versions(record.services)
    consps = current_versions(record.conspicuities)

    # competences
    for comp in comps.values():
        loc = f"competences.{comp.comp_id}"
        if not comp.capability_refs and not comp.sub_competence_refs:
            v.append(
                Violation(
                    "competence-empty-aggregation",
                    comp.comp_id,
                    loc,
                    "a competence aggregates at least one capability or sub-competence",
                )
            )
        for ref in comp.capability_refs:
            if ref not in caps:
                v.append(
                    Violation(
                        "unresolved-reference",
                        comp.comp_id,
                        f"{loc}.capabilityRefs",
                        f"capability {ref!r} not found",
                    )
                )
        for ref in comp.sub_competence_refs:
            if ref not in comps:
                v.append(
                    Violation(
                        "unresolved-reference",
                        comp.comp_id,
                        f"{loc}.subCompetenceRefs",
                        f"competence {ref!r} not found",
                    )
                )
        if comp.externalizing_service_ref is not None:
            svc = svcs.get(comp.externalizing_service_ref)
            if svc is None:
                v.append(
                    Violation(
                        "unresolved-reference",
                        comp.comp_id,
                        f"{loc}.externalizingServiceRef",
                        f"service {comp.externalizing_service_ref!r} not found",
                    )
                )
            elif svc.competence_ref != comp.comp_id:
                v.append(
                    Violation(
                        "competence-service-1to1",
                        comp.comp_id,
                        f"{loc}.externalizingServiceRef",
                        f"service {svc.svc_id!r} does not point back to this competence",
                    )
                )

    cycle_node = _cycle_in({c.comp_id: c.sub_competence_refs for c in comps.values()})
    if cycle_node is not None:
        v.append(
            Violation(
                "compound-competence-cycle",
                cycle_node,
                f"competences.{cycle_node}.subCompetenceRefs",
                "sub-competence references form a cycle",
            )
        )

    # capabilities
    for cap in caps.values():
        loc = f"capabilities.{cap.cap_id}"
        if not cap.variants:
            v.append(
                Violation(
                    "capability-no-variants", cap.cap_id, loc, "variants must be nonempty"
                )
            )
        if cap.activity_ref not in acts:
            v.append(
                Violation(
                    "unresolved-reference",
                    cap.cap_id,
                    f"{loc}.activityRef",
                    f"activity {cap.activity_ref!r} not found",
                )
            )
        seen_contexts: set[frozenset] = set()
        for var in current_versions(cap.variants).values():
            if var.context.triples in seen_contexts:
                v.append(
                    Violation(
                        "duplicate-variant-context",
                        cap.cap_id,
                        f"{loc}.variants.{var.variant_id}",
                        "two variants share an identical context triple set"
                        + (" (default)" if var.context.is_default else ""),
                    )
                )
            seen_contexts.add(var.context.triples)
        for var in cap.variants:
            vloc = f"{loc}.variants.{var.variant_id}"
            if var.cost.amount < 0:
                v.append(
                    Violation(
                        "negative-cost", var.variant_id, f"{vloc}.cost", "cost must be >= 0"
                    )
                )
            for cy in var.capacities:
                if cy.amount < 0:
                    v.append(
                        Violation(
                            "negative-capacity",
                            var.variant_id,
                            f"{vloc}.capacities",
                            "capacity amount must be >= 0",
                        )
                    )

    # activities
    for act in acts.values():
        if act.product_ref not in prods:
            v.append(
                Violation(
                    "unresolved-reference",
                    act.act_id,
                    f"activities.{act.act_id}.productRef",
                    f"product {act.product_ref!r} not found",
                )
            )

    # services
    by_competence: dict[str, list[str]] = {}
    for svc in svcs.values():
        loc = f"services.{svc.svc_id}"
        if svc.competence_ref not in comps:
            v.append(
                Violation(
                    "unresolved-reference",
                    svc.svc_id,
                    f"{loc}.competenceRef",
                    f"competence {svc.competence_ref!r} not found",
                )
            )
        else:
            by_competence.setdefault(svc.competence_ref, []).append(svc.svc_id)
            comp = comps[svc.competence_ref]
            if comp.externalizing_service_ref != svc.svc_id:
                v.append(
                    Violation(
                        "competence-service-1to1",
                        svc.svc_id,
                        f"{loc}.competenceRef",
                        f"competence {comp.comp_id!r} does not externalize via this service",
                    )
                )
        for ref in svc.component_service_refs:
            if ref not in svcs:
                v.append(
                    Violation(
                        "unresolved-reference",
                        svc.svc_id,
                        f"{loc}.componentServiceRefs",
                        f"service {ref!r} not found",
                    )
                )
    for comp_id, owners in by_competence.items():
        if len(owners) > 1:
            v.append(
                Violation(
                    "competence-service-1to1",
                    comp_id,
                    "services",
                    f"services {sorted(owners)} all reference competence {comp_id!r}",
                )
            )

    cycle_node = _cycle_in({s.svc_id: s.component_service_refs for s in svcs.values()})
    if cycle_node is not None:
        v.append(
            Violation(
                "compound-service-cycle",
                cycle_node,
                f"services.{cycle_node}.componentServiceRefs",
                "component service references form a cycle",
            )
        )

    # conspicuities
    for consp in consps.values():
        loc = f"conspicuities.{consp.consp_id}"
        if consp.kind not in CONSPICUITY_KINDS:
            v.append(
                Violation(
                    "conspicuity-kind",
                    consp.consp_id,
                    f"{loc}.kind",
                    f"unknown kind {consp.kind!r}",
                )
            )
        if consp.target_kind not in CONSPICUITY_TARGET_KINDS:
            v.append(
                Violation(
                    "conspicuity-target",
                    consp.consp_id,
                    f"{loc}.targetKind",
                    f"unknown target kind {consp.target_kind!r}",
                )
            )
            continue
        variant_ids = {
            var.variant_id for cap in caps.values() for var in cap.variants
        }
        resolved = {
            "service": lambda: consp.target_ref in svcs,
            "organization": lambda: consp.target_ref == p.org_id,
            "competence": lambda: consp.target_ref in comps,
            "capability": lambda: consp.target_ref in caps,
            # cost and capacity live inside variants; they are referenced
            # through the owning variant id
            "cost": lambda: consp.target_ref in variant_ids,
            "capacity": lambda: consp.target_ref in variant_ids,
        }[consp.target_kind]()
        if not resolved:
            v.append(
                Violation(
                    "conspicuity-target",
                    consp.consp_id,
                    f"{loc}.targetRef",
                    f"{consp.target_kind} {consp.target_ref!r} not found",
                )
            )

    return v


def competence_closure(comp_id: str, record: OrganizationRecord) -> frozenset[str]:
    """Transitive expansion of a compound competence into capability references."""
    comps = current_versions(record.competences)
    if comp_id not in comps:
        raise ResolutionError(f"competence {comp_id!r} not found")
    out: set[str] = set()
    seen: set[str] = set()
    stack = [comp_id]
    while stack:
        cid = stack.pop()
        if cid in seen:
            continue
        seen.add(cid)
        comp = comps.get(cid)
        if comp is None:
            raise ResolutionError(f"competence {cid!r} not found")
        out |= comp.capability_refs
        stack.extend(comp.sub_competence_refs)
    return frozenset(out)


def select_variant(
    cap_id: str, query: CapabilityContext, record: OrganizationRecord
) -> CapabilityVariant:
    """Pick the variant whose context is the largest subset of the query.

    The default (empty-context) variant is a subset of every query, so it acts
    as the fallback. Ties on subset size go to the highest version, then to
    the lexicographically smallest variant id.
    """
    caps = current_versions(record.capabilities)
    cap = caps.get(cap_id)
    if cap is None:
        raise ResolutionError(f"capability {cap_id!r} not found")
    candidates = [
        var
        for var in current_versions(cap.variants).values()
        if var.context.covers(query)
    ]
    if not candidates:
        raise NoVariantError(
            f"capability {cap_id!r} has no variant matching {query} and no default"
        )
    return min(
        candidates,
        key=lambda v: (-len(v.context.triples), -v.version, v.variant_id),
    )


_VERSIONED_POOLS = ("competences", "capabilities")


def new_version(
    entity_id_: str, changes: dict[str, Any], record: OrganizationRecord
) -> tuple[OrganizationRecord, VersionedId]:
    """Append a new version of a competence, capability, or capability variant.

    The previous versions stay in the record untouched. A variant edit does
    not bump the owning capability's version.
    """
    for pool_name in _VERSIONED_POOLS:
        pool = getattr(record, pool_name)
        history = version_history(pool, entity_id_)
        if history:
            head = history[-1]
            updated = replace(head, version=head.version + 1, **changes)
            return (
                replace(record, **{pool_name: pool + (updated,)}),
                VersionedId(entity_id_, updated.version),
            )
    # capability variants are nested in their owning capability
    for cap in record.capabilities:
        history = version_history(cap.variants, entity_id_)
        if history:
            head = history[-1]
            updated = replace(head, version=head.version + 1, **changes)
            new_cap = replace(cap, variants=cap.variants + (updated,))
            new_caps = tuple(new_cap if c is cap else c for c in record.capabilities)
            return (
                replace(record, capabilities=new_caps),
                VersionedId(entity_id_, updated.version),
            )
    raise ResolutionError(f"no versionable entity {entity_id_!r} in record")


def flatten_properties(record: OrganizationRecord) -> PropertyView:
    """Flatten a record into (path, value) pairs for requirement matching.

    Multi-valued paths carry frozensets. Paths use colon-separated segments;
    `extra` and `businessInfo` keys are emitted verbatim as paths.
    """
    p = record.profile
    view: PropertyView = {
        "organization:profile:name": p.name,
        "organization:profile:localization": p.localization,
        "organization:profile:numberOfEmployees": p.number_of_employees,
        "organization:profile:contact": p.contact,
        "organization:profile:memberships": frozenset(p.memberships),
    }
    if p.creation_date is not None:
        view["organization:profile:creationDate"] = p.creation_date
    if p.financial_capital is not None:
        view["organization:profile:financialCapital"] = p.financial_capital.amount
    view["competence:name"] = frozenset(
        c.name for c in current_versions(record.competences).values()
    )
    view["capability:name"] = frozenset(
        c.name for c in current_versions(record.capabilities).values()
    )
    view["service:name"] = frozenset(
        s.name for s in current_versions(record.services).values()
    )
    view["conspicuity:kind"] = frozenset(
        c.kind for c in current_versions(record.conspicuities).values()
    )
    for key, value in p.extra.items():
        view[key] = frozenset(value) if isinstance(value, (list, set)) else value
    merged: dict[str, set] = {}
    for svc in current_versions(record.services).values():
        for key, value in svc.business_info.items():
            bucket = merged.setdefault(key, set())
            if isinstance(value, (list, set)):
                bucket.update(value)
            else:
                bucket.add(value)
    for key, values in merged.items():
        view[key] = frozenset(values)
    return view


def service_property_view(service) -> PropertyView:
    """Property view of one service, used for per-role service requirements."""
    view: PropertyView = {"service:name": service.name}
    for key, value in service.business_info.items():
        view[key] = frozenset(value) if isinstance(value, (list, set)) else value
    return view
