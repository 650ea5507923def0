"""Organization-class instance checking, weighted satisfaction scoring, and
candidate ranking.

Instancehood follows the class expression tree; the score ignores the tree
shape and is the weight-normalized fraction of satisfied leaves, so weights
govern ranking granularity while structure governs membership.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from .dsl import And, Expr, Not, Or, OrganizationClass, Requirement, eval_predicate
from .errors import EvalTypeError, PropertyMissingError
from .record_ops import MISSING, PropertyView


class Detail(str, Enum):
    SATISFIED = "satisfied"
    VALUE_MISMATCH = "value-mismatch"
    PROPERTY_MISSING = "property-missing"
    TYPE_ERROR = "type-error"


@dataclass(frozen=True)
class RequirementResult:
    requirement: Requirement
    satisfied: bool
    detail: Detail


@dataclass(frozen=True)
class WeightedClass:
    """A class plus per-leaf weights; weights need not sum to 1."""

    cls: OrganizationClass
    weights: Mapping[Requirement, float] = field(default_factory=dict)

    def __post_init__(self):
        from .dsl import leaves

        for leaf in leaves(self.cls.expr):
            w = self.weights.get(leaf, 1.0)
            if w <= 0:
                raise ValueError(f"weight for {leaf} must be > 0, got {w}")

    def weight_of(self, leaf: Requirement) -> float:
        return self.weights.get(leaf, 1.0)


def _lookup(view: PropertyView, path: str):
    value = view.get(path, MISSING)
    # an empty value set means the organization defines no values for the
    # path, which matching treats the same as an absent property
    if isinstance(value, (set, frozenset)) and not value:
        return MISSING
    return value


def _eval_leaf(view: PropertyView, leaf: Requirement) -> RequirementResult:
    try:
        ok = eval_predicate(leaf.predicate, _lookup(view, leaf.property_path))
    except PropertyMissingError:
        return RequirementResult(leaf, False, Detail.PROPERTY_MISSING)
    except EvalTypeError:
        return RequirementResult(leaf, False, Detail.TYPE_ERROR)
    return RequirementResult(
        leaf, ok, Detail.SATISFIED if ok else Detail.VALUE_MISMATCH
    )


def is_instance(
    view: PropertyView, cls: OrganizationClass
) -> tuple[bool, list[RequirementResult]]:
    """Evaluate the class expression over a property view.

    Returns the tree value plus one result per leaf in definition order.
    Missing properties and type errors make their leaf unsatisfied.
    """
    results: list[RequirementResult] = []

    def walk(expr: Expr) -> bool:
        if isinstance(expr, Requirement):
            res = _eval_leaf(view, expr)
            results.append(res)
            return res.satisfied
        if isinstance(expr, Not):
            return not walk(expr.child)
        values = [walk(c) for c in expr.children]
        return all(values) if isinstance(expr, And) else any(values)

    return walk(cls.expr), results


def score(view: PropertyView, weighted: WeightedClass) -> float:
    """Weight-normalized satisfaction in [0, 1]: sum(w_i * sat_i) / sum(w_i)."""
    _, results = is_instance(view, weighted.cls)
    total = sum(weighted.weight_of(r.requirement) for r in results)
    hit = sum(
        weighted.weight_of(r.requirement) for r in results if r.satisfied
    )
    return hit / total


def rank(
    views: Iterable[tuple[str, PropertyView]], weighted: WeightedClass
) -> list[tuple[str, float, bool]]:
    """Order organizations by (instance desc, score desc, orgId asc)."""
    rows = []
    for org_id, view in views:
        inst, _ = is_instance(view, weighted.cls)
        rows.append((org_id, score(view, weighted), inst))
    rows.sort(key=lambda r: (not r[2], -r[1], r[0]))
    return rows


@dataclass(frozen=True)
class CandidateSet:
    """Instances of a role's class with their scores.

    An empty set is a valid outcome; ``relaxation_suggested`` flags it so the
    planner can loosen the requirements and retry.
    """

    candidates: dict[str, float]
    relaxation_suggested: bool

    # near-misses kept for relaxation hints in the UI
    rejected: dict[str, float] = field(default_factory=dict)


def candidates_for_role(
    weighted: WeightedClass,
    views: Iterable[tuple[str, PropertyView]],
    min_score: float = 0.0,
) -> CandidateSet:
    accepted: dict[str, float] = {}
    rejected: dict[str, float] = {}
    for org_id, s, inst in rank(views, weighted):
        if inst and s >= min_score:
            accepted[org_id] = s
        else:
            rejected[org_id] = s
    return CandidateSet(accepted, relaxation_suggested=not accepted, rejected=rejected)
