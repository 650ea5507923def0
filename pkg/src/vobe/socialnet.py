"""Typed, weighted social network over organizations plus claim verification.

Collaboration and financial-exchange relations are treated as undirected for
counting; trust and recognition stay directed. Opinions feed verification only
through the recognition rule (mean rating).
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping

from .errors import ResolutionError, VobeError
from .records import OrganizationRecord, current_versions

DEFAULT_RELATION_TYPES = frozenset(
    {"pastCollaboration", "recognition", "trust", "financialExchange"}
)
_RATED_TYPES = frozenset({"recognition", "trust"})
_UNDIRECTED_TYPES = frozenset({"pastCollaboration", "financialExchange"})


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    relation_type: str
    weight: float
    attributes: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Opinion:
    author: str
    subject: str
    rating: float
    text: str = ""


@dataclass(frozen=True)
class SocialNetwork:
    nodes: frozenset[str] = frozenset()
    edges: tuple[Edge, ...] = ()
    opinions: tuple[Opinion, ...] = ()
    relation_types: frozenset[str] = DEFAULT_RELATION_TYPES

    def validate(self) -> list[str]:
        problems = []
        for e in self.edges:
            if e.source == e.target:
                problems.append(f"self-loop on {e.source!r}")
            for end in (e.source, e.target):
                if end not in self.nodes:
                    problems.append(f"edge endpoint {end!r} is not a registered node")
            if e.relation_type not in self.relation_types:
                problems.append(f"unknown relation type {e.relation_type!r}")
            if e.relation_type in _RATED_TYPES and not 0.0 <= e.weight <= 1.0:
                problems.append(
                    f"{e.relation_type} weight {e.weight} outside [0, 1]"
                )
            if e.relation_type in _UNDIRECTED_TYPES and e.weight < 0:
                problems.append(f"{e.relation_type} weight {e.weight} negative")
        for o in self.opinions:
            if not 0.0 <= o.rating <= 1.0:
                problems.append(f"opinion rating {o.rating} outside [0, 1]")
        return problems

    # queries --------------------------------------------------------------

    def edge_weight(self, source: str, target: str, relation_type: str) -> float:
        """Summed weight between two nodes; undirected union for collaboration
        and financial exchange."""
        undirected = relation_type in _UNDIRECTED_TYPES
        total = 0.0
        for e in self.edges:
            if e.relation_type != relation_type:
                continue
            if (e.source, e.target) == (source, target) or (
                undirected and (e.source, e.target) == (target, source)
            ):
                total += e.weight
        return total

    def has_edge(self, source: str, target: str, relation_type: str) -> bool:
        undirected = relation_type in _UNDIRECTED_TYPES
        return any(
            e.relation_type == relation_type
            and (
                (e.source, e.target) == (source, target)
                or (undirected and (e.source, e.target) == (target, source))
            )
            for e in self.edges
        )

    def neighbors(self, org_id: str, relation_type: str) -> frozenset[str]:
        undirected = relation_type in _UNDIRECTED_TYPES
        out = set()
        for e in self.edges:
            if e.relation_type != relation_type:
                continue
            if e.source == org_id:
                out.add(e.target)
            elif undirected and e.target == org_id:
                out.add(e.source)
        return frozenset(out)

    def reachable_within(
        self, source: str, target: str, relation_type: str, hops: int
    ) -> bool:
        if source == target:
            return True
        seen = {source}
        frontier = deque([(source, 0)])
        while frontier:
            node, depth = frontier.popleft()
            if depth == hops:
                continue
            for nxt in self.neighbors(node, relation_type):
                if nxt == target:
                    return True
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append((nxt, depth + 1))
        return False

    def incoming_recognition(self, org_id: str) -> list[float]:
        ratings = [
            e.weight
            for e in self.edges
            if e.relation_type == "recognition" and e.target == org_id
        ]
        ratings.extend(o.rating for o in self.opinions if o.subject == org_id)
        return ratings


def subnetwork(org_ids: Iterable[str], network: SocialNetwork) -> SocialNetwork:
    """Induced subgraph; opinions kept only when author and subject are inside."""
    keep = frozenset(org_ids)
    unknown = keep - network.nodes
    if unknown:
        raise ResolutionError(f"unknown nodes: {sorted(unknown)}")
    return replace(
        network,
        nodes=keep,
        edges=tuple(
            e for e in network.edges if e.source in keep and e.target in keep
        ),
        opinions=tuple(
            o for o in network.opinions if o.author in keep and o.subject in keep
        ),
    )


# social requirements ---------------------------------------------------------


@dataclass(frozen=True)
class EdgeExists:
    pass


@dataclass(frozen=True)
class WeightAtLeast:
    threshold: float


@dataclass(frozen=True)
class CountAtLeast:
    count: int


@dataclass(frozen=True)
class PathWithin:
    hops: int


Constraint = EdgeExists | WeightAtLeast | CountAtLeast | PathWithin


@dataclass(frozen=True)
class SocialRequirement:
    role_a: str
    role_b: str
    relation_type: str
    constraint: Constraint

    def __post_init__(self):
        if self.role_a == self.role_b:
            raise ValueError("social requirement roles must be distinct")
        c = self.constraint
        if isinstance(c, WeightAtLeast) and c.threshold < 0:
            raise ValueError("weight threshold must be >= 0")
        if isinstance(c, CountAtLeast) and c.count < 1:
            raise ValueError("count threshold must be >= 1")
        if isinstance(c, PathWithin) and c.hops < 1:
            raise ValueError("hop bound must be >= 1")


@dataclass(frozen=True)
class SocialNetworkSchema:
    roles: frozenset[str] = frozenset()
    requirements: tuple[SocialRequirement, ...] = ()

    def validate(self) -> list[str]:
        problems = []
        for req in self.requirements:
            for role in (req.role_a, req.role_b):
                if role not in self.roles:
                    problems.append(f"requirement references undeclared role {role!r}")
        return problems


def evaluate_social_requirement(
    req: SocialRequirement, assignment: Mapping[str, str], network: SocialNetwork
) -> bool:
    try:
        org_a = assignment[req.role_a]
        org_b = assignment[req.role_b]
    except KeyError as exc:
        raise VobeError(f"role {exc.args[0]!r} is not assigned") from exc
    c = req.constraint
    if isinstance(c, EdgeExists):
        return network.has_edge(org_a, org_b, req.relation_type)
    if isinstance(c, WeightAtLeast):
        return (
            network.has_edge(org_a, org_b, req.relation_type)
            and network.edge_weight(org_a, org_b, req.relation_type) >= c.threshold
        )
    if isinstance(c, CountAtLeast):
        return (
            network.has_edge(org_a, org_b, req.relation_type)
            and network.edge_weight(org_a, org_b, req.relation_type) >= c.count
        )
    if isinstance(c, PathWithin):
        return network.reachable_within(org_a, org_b, req.relation_type, c.hops)
    raise TypeError(f"unknown constraint {c!r}")


# claim verification ----------------------------------------------------------


@dataclass(frozen=True)
class VerificationRules:
    """Tunable thresholds for the built-in verification rules.

    A collaboration-count claim is a discrepancy when the observed distinct
    neighbor count falls below claimed * tau; a recognition claim when the
    mean incoming rating falls below claimed - delta.
    """

    tau: float = 0.5
    delta: float = 0.2


@dataclass(frozen=True)
class Check:
    claim_description: str
    source_of_truth: str  # monitoring | history | opinions | relations
    claimed_value: Any
    observed_value: Any
    flag: str  # consistent | discrepancy | unverifiable


@dataclass(frozen=True)
class VerificationReport:
    org_id: str
    checks: tuple[Check, ...]

    @property
    def reliability_score(self) -> float:
        verifiable = [c for c in self.checks if c.flag != "unverifiable"]
        if not verifiable:
            return 1.0
        return sum(1 for c in verifiable if c.flag == "consistent") / len(verifiable)

    @property
    def has_discrepancy(self) -> bool:
        return any(c.flag == "discrepancy" for c in self.checks)


def _is_number(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def verify_claims(
    org_id: str,
    record: OrganizationRecord,
    network: SocialNetwork,
    rules: VerificationRules | None = None,
) -> VerificationReport:
    """Cross-check structured conspicuity claims against the social network."""
    if record.org_id != org_id:
        raise ResolutionError(f"record belongs to {record.org_id!r}, not {org_id!r}")
    if org_id not in network.nodes:
        raise ResolutionError(f"organization {org_id!r} is not in the network")
    rules = rules or VerificationRules()
    checks: list[Check] = []
    for consp in current_versions(record.conspicuities).values():
        if consp.claim is None:
            continue
        claim = consp.claim
        description = f"{consp.consp_id}: {claim.kind} = {claim.value!r}"
        if claim.kind == "collaborationCount" and _is_number(claim.value):
            observed = len(network.neighbors(org_id, "pastCollaboration"))
            flag = (
                "discrepancy"
                if observed < claim.value * rules.tau
                else "consistent"
            )
            checks.append(Check(description, "history", claim.value, observed, flag))
        elif claim.kind == "recognition" and _is_number(claim.value):
            ratings = network.incoming_recognition(org_id)
            if not ratings:
                checks.append(
                    Check(description, "relations", claim.value, None, "unverifiable")
                )
                continue
            observed = sum(ratings) / len(ratings)
            flag = (
                "discrepancy"
                if observed < claim.value - rules.delta
                else "consistent"
            )
            checks.append(Check(description, "relations", claim.value, observed, flag))
        else:
            checks.append(
                Check(description, "history", claim.value, None, "unverifiable")
            )
    return VerificationReport(org_id, tuple(checks))


# JSON interchange ------------------------------------------------------------


def network_to_dict(network: SocialNetwork) -> dict:
    return {
        "nodes": sorted(network.nodes),
        "edges": [
            {
                "source": e.source,
                "target": e.target,
                "type": e.relation_type,
                "weight": e.weight,
                "attributes": dict(e.attributes),
            }
            for e in network.edges
        ],
        "opinions": [
            {
                "author": o.author,
                "subject": o.subject,
                "rating": o.rating,
                "text": o.text,
            }
            for o in network.opinions
        ],
    }


def network_from_dict(doc: Mapping[str, Any]) -> SocialNetwork:
    return SocialNetwork(
        nodes=frozenset(doc.get("nodes", ())),
        edges=tuple(
            Edge(
                source=e["source"],
                target=e["target"],
                relation_type=e.get("type", "pastCollaboration"),
                weight=e.get("weight", 1.0),
                attributes=dict(e.get("attributes", {})),
            )
            for e in doc.get("edges", ())
        ),
        opinions=tuple(
            Opinion(
                author=o["author"],
                subject=o["subject"],
                rating=o["rating"],
                text=o.get("text", ""),
            )
            for o in doc.get("opinions", ())
        ),
    )


def network_to_json(network: SocialNetwork, *, indent: int | None = 2) -> str:
    return json.dumps(network_to_dict(network), indent=indent, sort_keys=True)


def network_from_json(text: str) -> SocialNetwork:
    return network_from_dict(json.loads(text))
