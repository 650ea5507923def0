"""Multi-phase partner and service selection over VO specifications.

Phases: (1) specification definition, (2) per-role candidate selection with
optional claim verification, (3) exhaustive variant generation with social
evaluation and preference sorting, (4) KPI evaluation, (5) inception (applied
by the store). Phases 2-4 are pure over registry/network snapshots, so a
planning session can re-run them after requirement edits.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Any, Callable, Iterable, Mapping

from . import dsl
from .config import DEFAULT_SORT_KEYS, DEFAULT_VARIANT_CAP
from .errors import AmbiguousServiceError, CapExceededError, SpecValidationError
from .matching import CandidateSet, WeightedClass, _eval_leaf, candidates_for_role
from .record_ops import (
    competence_closure,
    flatten_properties,
    select_variant,
    service_property_view,
)
from .records import CapabilityContext, ContextTriple, OrganizationRecord, current_versions
from .socialnet import (
    CountAtLeast,
    EdgeExists,
    PathWithin,
    SocialNetwork,
    SocialNetworkSchema,
    SocialRequirement,
    VerificationRules,
    WeightAtLeast,
    evaluate_social_requirement,
    verify_claims,
)

SORT_KEY_NAMES = ("competenceScore", "socialScore", "totalCost")


@dataclass(frozen=True)
class ProcessStep:
    activity_ref: str
    role: str


@dataclass(frozen=True)
class RoleSpec:
    name: str
    weighted_class: WeightedClass
    service_requirements: tuple[dsl.Requirement, ...] = ()


@dataclass(frozen=True)
class Preferences:
    sort_keys: tuple[tuple[str, str], ...] = DEFAULT_SORT_KEYS
    min_acceptable_score: float = 0.0
    allow_multi_role_org: bool = True


@dataclass(frozen=True)
class VOSpecification:
    spec_id: str
    process_model: tuple[ProcessStep, ...]
    roles: tuple[RoleSpec, ...]
    schema: SocialNetworkSchema
    preferences: Preferences = Preferences()

    def role(self, name: str) -> RoleSpec:
        for r in self.roles:
            if r.name == name:
                return r
        raise KeyError(name)

    def role_activities(self, role_name: str) -> frozenset[str]:
        return frozenset(
            s.activity_ref for s in self.process_model if s.role == role_name
        )


# phase 1: specification definition -------------------------------------------


def _parse_constraint(doc: Mapping[str, Any]):
    kind = doc.get("kind", "edgeExists")
    if kind == "edgeExists":
        return EdgeExists()
    if kind == "weightAtLeast":
        return WeightAtLeast(float(doc["value"]))
    if kind == "countAtLeast":
        return CountAtLeast(int(doc["value"]))
    if kind == "pathWithin":
        return PathWithin(int(doc["value"]))
    raise SpecValidationError(f"unknown social constraint kind {kind!r}")


def define_spec(
    document: Mapping[str, Any],
    class_repo: Mapping[str, dsl.OrganizationClass] | None = None,
) -> VOSpecification:
    """Validate and build a VO specification from its JSON document.

    Role classes may be given inline (`classSource`) or by name (`classRef`)
    against the requirement repository.
    """
    class_repo = class_repo or {}
    problems: list[str] = []
    roles_doc = document.get("roles", {})
    process_doc = document.get("processModel", ())
    if not process_doc:
        problems.append("process model is empty")

    roles: list[RoleSpec] = []
    for name, role_doc in roles_doc.items():
        if "classSource" in role_doc:
            cls = dsl.parse_class(role_doc["classSource"])
        elif "classRef" in role_doc:
            cls = class_repo.get(role_doc["classRef"])
            if cls is None:
                problems.append(
                    f"role {name!r} references unknown class {role_doc['classRef']!r}"
                )
                continue
        else:
            problems.append(f"role {name!r} declares no organization class")
            continue
        leaf_list = dsl.leaves(cls.expr)
        weights: dict[dsl.Requirement, float] = {}
        for key, w in role_doc.get("weights", {}).items():
            try:
                leaf = leaf_list[int(key)]
            except (ValueError, IndexError):
                problems.append(f"role {name!r}: weight key {key!r} is not a leaf index")
                continue
            if w <= 0:
                problems.append(f"role {name!r}: weight {w} for leaf {key} must be > 0")
                continue
            weights[leaf] = float(w)
        service_reqs = tuple(
            dsl.parse_requirement_line(line)
            for line in role_doc.get("serviceRequirements", ())
        )
        roles.append(RoleSpec(name, WeightedClass(cls, weights), service_reqs))

    declared = {r.name for r in roles}
    steps = tuple(
        ProcessStep(s["activity"], s["role"]) for s in process_doc
    )
    for step in steps:
        if step.role not in declared:
            problems.append(f"process activity {step.activity_ref!r} names "
                            f"undeclared role {step.role!r}")

    schema_doc = document.get("schema", {})
    requirements = tuple(
        SocialRequirement(
            role_a=r["roleA"],
            role_b=r["roleB"],
            relation_type=r.get("type", "pastCollaboration"),
            constraint=_parse_constraint(r.get("constraint", {})),
        )
        for r in schema_doc.get("requirements", ())
    )
    schema = SocialNetworkSchema(
        roles=frozenset(schema_doc.get("roles", declared)), requirements=requirements
    )
    if not schema.roles <= declared:
        problems.append(
            f"schema roles {sorted(schema.roles - declared)} are not declared"
        )
    problems.extend(schema.validate())

    prefs_doc = document.get("preferences", {})
    sort_keys = tuple(
        (k["key"], k.get("order", "desc")) for k in prefs_doc.get("sortKeys", ())
    )
    for key, order in sort_keys:
        if key not in SORT_KEY_NAMES:
            problems.append(f"unknown sort key {key!r}")
        if order not in ("asc", "desc"):
            problems.append(f"unknown sort order {order!r}")
    preferences = Preferences(
        sort_keys=sort_keys or DEFAULT_SORT_KEYS,
        min_acceptable_score=prefs_doc.get("minAcceptableScore", 0.0),
        allow_multi_role_org=prefs_doc.get("allowMultiRoleOrg", True),
    )

    if problems:
        raise SpecValidationError("; ".join(problems))
    return VOSpecification(
        spec_id=document.get("id", ""),
        process_model=steps,
        roles=tuple(roles),
        schema=schema,
        preferences=preferences,
    )


def spec_to_dict(spec: VOSpecification) -> dict:
    def constraint_doc(c):
        if isinstance(c, EdgeExists):
            return {"kind": "edgeExists"}
        if isinstance(c, WeightAtLeast):
            return {"kind": "weightAtLeast", "value": c.threshold}
        if isinstance(c, CountAtLeast):
            return {"kind": "countAtLeast", "value": c.count}
        return {"kind": "pathWithin", "value": c.hops}

    return {
        "id": spec.spec_id,
        "processModel": [
            {"activity": s.activity_ref, "role": s.role} for s in spec.process_model
        ],
        "roles": {
            r.name: {
                "classSource": dsl.print_class(r.weighted_class.cls),
                "weights": {
                    str(i): r.weighted_class.weight_of(leaf)
                    for i, leaf in enumerate(dsl.leaves(r.weighted_class.cls.expr))
                },
                "serviceRequirements": [
                    f"{req.property_path} {dsl._predicate_text(req.predicate)}"
                    for req in r.service_requirements
                ],
            }
            for r in spec.roles
        },
        "schema": {
            "roles": sorted(spec.schema.roles),
            "requirements": [
                {
                    "roleA": q.role_a,
                    "roleB": q.role_b,
                    "type": q.relation_type,
                    "constraint": constraint_doc(q.constraint),
                }
                for q in spec.schema.requirements
            ],
        },
        "preferences": {
            "sortKeys": [
                {"key": k, "order": o} for k, o in spec.preferences.sort_keys
            ],
            "minAcceptableScore": spec.preferences.min_acceptable_score,
            "allowMultiRoleOrg": spec.preferences.allow_multi_role_org,
        },
    }


# phase 2: candidate selection -------------------------------------------------


@dataclass(frozen=True)
class RoleCandidates:
    role: str
    candidates: dict[str, float]
    relaxation_suggested: bool
    rejected: dict[str, float] = field(default_factory=dict)
    services: dict[str, str | None] = field(default_factory=dict)
    flagged: frozenset[str] = frozenset()  # orgs with verification discrepancies
    excluded: frozenset[str] = frozenset()  # flagged orgs dropped on request


def _qualifying_service(
    role: RoleSpec,
    activities: frozenset[str],
    record: OrganizationRecord,
) -> str | None:
    """The organization's single service whose competence closure covers the
    role's activities; None when no service covers them."""
    caps = current_versions(record.capabilities)
    qualifying = []
    for svc in current_versions(record.services).values():
        try:
            closure = competence_closure(svc.competence_ref, record)
        except Exception:
            continue
        covered = {
            caps[ref].activity_ref for ref in closure if ref in caps
        }
        if activities <= covered:
            qualifying.append(svc)
    if not qualifying:
        return None
    if len(qualifying) > 1:
        raise AmbiguousServiceError(
            f"organization {record.org_id!r} has {len(qualifying)} services covering "
            f"role {role.name!r}; split the role or the services"
        )
    return qualifying[0].svc_id


def _service_requirements_met(
    role: RoleSpec, svc_id: str | None, record: OrganizationRecord
) -> bool:
    if not role.service_requirements:
        return True
    if svc_id is None:
        return False
    svc = current_versions(record.services)[svc_id]
    view = service_property_view(svc)
    return all(_eval_leaf(view, req).satisfied for req in role.service_requirements)


def select_candidates(
    spec: VOSpecification,
    records: Mapping[str, OrganizationRecord],
    network: SocialNetwork,
    *,
    verify: bool = False,
    exclude_discrepant: bool = False,
    rules: VerificationRules | None = None,
) -> dict[str, RoleCandidates]:
    """Per-role candidate organizations, scored and optionally verified."""
    views = [(org_id, flatten_properties(rec)) for org_id, rec in sorted(records.items())]
    out: dict[str, RoleCandidates] = {}
    for role in spec.roles:
        base: CandidateSet = candidates_for_role(
            role.weighted_class, views, spec.preferences.min_acceptable_score
        )
        activities = spec.role_activities(role.name)
        candidates: dict[str, float] = {}
        rejected = dict(base.rejected)
        services: dict[str, str | None] = {}
        for org_id, s in base.candidates.items():
            svc = _qualifying_service(role, activities, records[org_id])
            if not _service_requirements_met(role, svc, records[org_id]):
                rejected[org_id] = s
                continue
            candidates[org_id] = s
            services[org_id] = svc
        flagged: set[str] = set()
        excluded: set[str] = set()
        if verify:
            for org_id in list(candidates):
                if org_id not in network.nodes:
                    continue
                report = verify_claims(org_id, records[org_id], network, rules)
                if report.has_discrepancy:
                    flagged.add(org_id)
                    if exclude_discrepant:
                        excluded.add(org_id)
                        rejected[org_id] = candidates.pop(org_id)
        out[role.name] = RoleCandidates(
            role=role.name,
            candidates=candidates,
            relaxation_suggested=not candidates,
            rejected=rejected,
            services=services,
            flagged=frozenset(flagged),
            excluded=frozenset(excluded),
        )
    return out


# phase 3: variant generation ----------------------------------------------------


@dataclass(frozen=True)
class Variant:
    assignment: tuple[tuple[str, str, str | None], ...]  # (role, orgId, svcId)
    per_role_score: tuple[tuple[str, float], ...]
    competence_score: float
    social_score: float
    social_satisfied: bool
    total_cost: float
    total_duration: float
    aggregate_key: tuple

    @property
    def org_ids(self) -> tuple[str, ...]:
        return tuple(org for _, org, _ in self.assignment)

    def assignment_map(self) -> dict[str, str]:
        return {role: org for role, org, _ in self.assignment}

    def to_dict(self) -> dict:
        return {
            "assignment": {
                role: {"orgId": org, "svcId": svc}
                for role, org, svc in self.assignment
            },
            "perRoleScore": {role: s for role, s in self.per_role_score},
            "competenceScore": self.competence_score,
            "socialScore": self.social_score,
            "socialSatisfied": self.social_satisfied,
            "totalCost": self.total_cost,
            "totalDuration": self.total_duration,
        }


def context_from_pairs(triples: Iterable[Iterable[str]]) -> CapabilityContext:
    return CapabilityContext(frozenset(ContextTriple(*t) for t in triples))


def _activity_costs(
    spec: VOSpecification,
    assignment: Mapping[str, str],
    records: Mapping[str, OrganizationRecord],
    context: CapabilityContext,
) -> tuple[float, float]:
    """Total cost and duration of the selected capability variants along the
    process activity list. Activities the assigned organization has no
    capability for contribute nothing."""
    cost = 0.0
    duration = 0.0
    for step in spec.process_model:
        org = assignment[step.role]
        record = records.get(org)
        if record is None:
            continue
        caps = [
            c
            for c in current_versions(record.capabilities).values()
            if c.activity_ref == step.activity_ref and c.variants
        ]
        if not caps:
            continue
        cap = min(caps, key=lambda c: c.cap_id)
        variant = select_variant(cap.cap_id, context, record)
        cost += variant.cost.amount
        dur = variant.properties.get("duration")
        if isinstance(dur, (int, float)):
            duration += dur
    return cost, duration


def _sort_value(variant: Variant, key: str) -> float:
    return {
        "competenceScore": variant.competence_score,
        "socialScore": variant.social_score,
        "totalCost": variant.total_cost,
    }[key]


def variant_sort_key(variant: Variant, preferences: Preferences) -> tuple:
    parts: list = []
    keyed_on_social = any(k == "socialScore" for k, _ in preferences.sort_keys)
    if not keyed_on_social:
        # fully satisfying variants come first, violating ones stay inspectable
        parts.append(0 if variant.social_satisfied else 1)
    for key, order in preferences.sort_keys:
        value = _sort_value(variant, key)
        parts.append(-value if order == "desc" else value)
    parts.append(variant.org_ids)
    return tuple(parts)


def generate_variants(
    spec: VOSpecification,
    candidates: Mapping[str, RoleCandidates],
    records: Mapping[str, OrganizationRecord],
    network: SocialNetwork,
    context: CapabilityContext = CapabilityContext(),
    cap: int = DEFAULT_VARIANT_CAP,
) -> list[Variant]:
    """Enumerate the cartesian product of per-role candidates, evaluate social
    requirements, and sort by the planner's preferences."""
    role_order = [r.name for r in spec.roles]
    pools = []
    count = 1
    for name in role_order:
        pool = sorted(candidates[name].candidates.items())
        pools.append(pool)
        count *= len(pool)
    if count > cap:
        raise CapExceededError(count, cap)

    n_reqs = len(spec.schema.requirements)
    variants: list[Variant] = []
    for combo in product(*pools):
        orgs = [org for org, _ in combo]
        if not spec.preferences.allow_multi_role_org and len(set(orgs)) != len(orgs):
            continue
        assignment = dict(zip(role_order, orgs))
        satisfied = sum(
            1
            for req in spec.schema.requirements
            if evaluate_social_requirement(req, assignment, network)
        )
        social_score = satisfied / n_reqs if n_reqs else 1.0
        cost, duration = _activity_costs(spec, assignment, records, context)
        per_role = tuple(
            (name, score_) for name, (_, score_) in zip(role_order, combo)
        )
        competence_score = statistics.fmean(s for _, s in per_role) if per_role else 0.0
        variant = Variant(
            assignment=tuple(
                (name, org, candidates[name].services.get(org))
                for name, org in zip(role_order, orgs)
            ),
            per_role_score=per_role,
            competence_score=competence_score,
            social_score=social_score,
            social_satisfied=social_score == 1.0,
            total_cost=cost,
            total_duration=duration,
            aggregate_key=(),
        )
        variants.append(variant)

    keyed = [
        replace(v, aggregate_key=variant_sort_key(v, spec.preferences))
        for v in variants
    ]
    keyed.sort(key=lambda v: v.aggregate_key)
    return keyed


# phase 4: performance evaluation -------------------------------------------------


@dataclass(frozen=True)
class KpiPlugin:
    name: str
    evaluate: Callable[[Variant, VOSpecification], list[tuple[str, float]]]


@dataclass(frozen=True)
class KpiReport:
    values: tuple[tuple[str, float], ...]
    failures: tuple[tuple[str, str], ...] = ()


def evaluate_performance(
    variant: Variant,
    spec: VOSpecification,
    records: Mapping[str, OrganizationRecord],
    plugins: Iterable[KpiPlugin] = (),
    context: CapabilityContext = CapabilityContext(),
) -> KpiReport:
    """Built-in totalCost/totalDuration KPIs plus plug-ins; a plug-in failure
    is isolated and reported without affecting other KPIs."""
    cost, duration = _activity_costs(
        spec, variant.assignment_map(), records, context
    )
    values: list[tuple[str, float]] = [
        ("totalCost", cost),
        ("totalDuration", duration),
    ]
    failures: list[tuple[str, str]] = []
    for plugin in plugins:
        try:
            values.extend(plugin.evaluate(variant, spec))
        except Exception as exc:  # noqa: BLE001 - isolation is the contract
            failures.append((plugin.name, str(exc)))
    return KpiReport(tuple(values), tuple(failures))


# phase 5 helper: collaboration pairs accreted at inception ------------------------


def collaboration_pairs(variant: Variant) -> list[tuple[str, str]]:
    """Unordered distinct organization pairs of a variant; no self-pairs."""
    orgs = sorted(set(variant.org_ids))
    return [(a, b) for i, a in enumerate(orgs) for b in orgs[i + 1:]]
