"""Persistent registry: append-only document log, versioned organization
records, the class ("competence requirement") repository, VO specs, the
social network, and an in-process event bus.

Single-writer, multi-reader: every mutation is serialized through one lock
and becomes one log line (atomic per document); reads work on immutable
snapshots. After a restart, replaying the log reproduces the committed state
exactly.
"""

from __future__ import annotations

import datetime as dt
import json
import os
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Mapping

from . import dsl
from .errors import ResolutionError, StorageError, VobeError
from .pipeline import VOSpecification, Variant, collaboration_pairs, define_spec
from .record_ops import Violation, validate_record
from .records import OrganizationRecord, record_from_dict, record_to_dict
from .socialnet import Edge, SocialNetwork, network_from_dict, network_to_dict

INGEST_KINDS = ("record", "classfile", "network", "spec")

EVENT_RECORD_UPDATED = "record.updated"
EVENT_CLASS_DEFINED = "class.defined"
EVENT_NETWORK_UPDATED = "network.updated"
EVENT_SPEC_CREATED = "spec.created"
EVENT_VO_INCEPTED = "vo.incepted"


class IngestRejected(VobeError):
    """A document failed validation; nothing was stored."""

    def __init__(self, violations: list[Violation] | list[str]):
        self.violations = violations
        super().__init__("; ".join(self._texts()))

    def _texts(self) -> list[str]:
        out = []
        for v in self.violations:
            if isinstance(v, Violation):
                out.append(f"{v.rule} at {v.path}: {v.message}")
            else:
                out.append(str(v))
        return out


@dataclass(frozen=True)
class Event:
    topic: str
    sequence: int
    payload: Mapping[str, Any]

    def to_dict(self) -> dict:
        return {"topic": self.topic, "sequence": self.sequence, "payload": dict(self.payload)}


class EventBus:
    """Ordered per-topic queues with at-least-once synchronous delivery.

    Subscribing to an unknown topic creates it. Handlers must be idempotent.
    """

    def __init__(self):
        self._events: dict[str, list[Event]] = {}
        self._handlers: dict[str, list[Callable[[Event], None]]] = {}
        self._cond = threading.Condition()

    def publish(self, topic: str, payload: Mapping[str, Any]) -> Event:
        with self._cond:
            queue = self._events.setdefault(topic, [])
            event = Event(topic, len(queue) + 1, dict(payload))
            queue.append(event)
            handlers = list(self._handlers.get(topic, ()))
            self._cond.notify_all()
        for handler in handlers:
            handler(event)
        return event

    def subscribe(self, topic: str, handler: Callable[[Event], None]) -> None:
        with self._cond:
            self._handlers.setdefault(topic, []).append(handler)
            self._events.setdefault(topic, [])

    def events_since(self, topic: str, since: int = 0) -> list[Event]:
        with self._cond:
            return [e for e in self._events.get(topic, ()) if e.sequence > since]

    def wait_for(self, topic: str, since: int = 0, timeout: float = 25.0) -> list[Event]:
        """Long-poll helper: block until events past `since` exist or timeout."""
        deadline = dt.datetime.now().timestamp() + timeout
        with self._cond:
            while True:
                pending = [e for e in self._events.get(topic, ()) if e.sequence > since]
                if pending:
                    return pending
                remaining = deadline - dt.datetime.now().timestamp()
                if remaining <= 0:
                    return []
                self._cond.wait(remaining)


@dataclass(frozen=True)
class StoreSnapshot:
    """Consistent point-in-time view of the whole registry."""

    organizations: Mapping[str, OrganizationRecord]  # current versions
    organization_histories: Mapping[str, tuple[OrganizationRecord, ...]]
    classes: Mapping[str, dsl.OrganizationClass]
    class_sources: Mapping[str, str]
    spec_docs: Mapping[str, dict]
    network: SocialNetwork
    vos: Mapping[str, dict]

    def spec(self, spec_id: str) -> VOSpecification:
        doc = self.spec_docs.get(spec_id)
        if doc is None:
            raise ResolutionError(f"unknown spec {spec_id!r}")
        return define_spec(doc, self.classes)


class Store:
    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._log_path = self.data_dir / "log.jsonl"
        self._lock = threading.RLock()
        self.events = EventBus()
        self._org_histories: dict[str, list[OrganizationRecord]] = {}
        self._org_docs: dict[str, list[dict]] = {}
        self._class_sources: dict[str, str] = {}
        self._spec_docs: dict[str, dict] = {}
        self._network = SocialNetwork()
        self._vos: dict[str, dict] = {}
        self._replay()

    # persistence ------------------------------------------------------------

    def _replay(self) -> None:
        if not self._log_path.exists():
            return
        with self._log_path.open() as fh:
            for line in fh:
                line = line.strip()
                if line:
                    self._apply(json.loads(line))

    def _append(self, entry: dict) -> None:
        try:
            with self._log_path.open("a") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise StorageError(str(exc)) from exc

    def _apply(self, entry: dict) -> None:
        kind = entry["kind"]
        if kind == "record":
            record = record_from_dict(entry["doc"])
            self._org_histories.setdefault(record.org_id, []).append(record)
            self._org_docs.setdefault(record.org_id, []).append(entry["doc"])
        elif kind == "class":
            self._class_sources[entry["name"]] = entry["source"]
        elif kind == "network":
            self._network = network_from_dict(entry["doc"])
        elif kind == "spec":
            self._spec_docs[entry["doc"]["id"]] = entry["doc"]
        elif kind == "vo":
            doc = entry["doc"]
            self._vos[doc["voId"]] = doc
            self._network = _accrete_collaboration(self._network, doc["pairs"])
        else:
            raise StorageError(f"corrupt log entry kind {kind!r}")

    # ingestion ---------------------------------------------------------------

    def ingest(self, document: Any, kind: str) -> list[str]:
        """Validate and store one document; returns stored ids.

        Rejected documents leave the store untouched.
        """
        if kind not in INGEST_KINDS:
            raise VobeError(f"unknown ingest kind {kind!r}")
        with self._lock:
            if kind == "record":
                record = record_from_dict(document)
                violations = validate_record(record)
                if violations:
                    raise IngestRejected(violations)
                canonical = record_to_dict(record)
                self._append({"kind": "record", "doc": canonical})
                self._apply({"kind": "record", "doc": canonical})
                version = len(self._org_histories[record.org_id])
                self.events.publish(
                    EVENT_RECORD_UPDATED, {"orgId": record.org_id, "version": version}
                )
                return [record.org_id]
            if kind == "classfile":
                classes = dsl.parse_classes(document)
                if not classes:
                    raise IngestRejected(["class file defines no classes"])
                names = []
                for cls in classes:
                    source = dsl.print_class(cls)
                    self._append({"kind": "class", "name": cls.name, "source": source})
                    self._apply({"kind": "class", "name": cls.name, "source": source})
                    self.events.publish(EVENT_CLASS_DEFINED, {"name": cls.name})
                    names.append(cls.name)
                return names
            if kind == "network":
                network = network_from_dict(document)
                problems = network.validate()
                if problems:
                    raise IngestRejected(problems)
                doc = network_to_dict(network)
                self._append({"kind": "network", "doc": doc})
                self._apply({"kind": "network", "doc": doc})
                self.events.publish(EVENT_NETWORK_UPDATED, {})
                return ["network"]
            # spec
            define_spec(document, self.snapshot().classes)  # raises on problems
            if not document.get("id"):
                raise IngestRejected(["spec document needs an id"])
            self._append({"kind": "spec", "doc": document})
            self._apply({"kind": "spec", "doc": document})
            self.events.publish(EVENT_SPEC_CREATED, {"specId": document["id"]})
            return [document["id"]]

    # inception ----------------------------------------------------------------

    def incept_vo(self, variant: Variant, spec: VOSpecification) -> str:
        """Register a VO: persist the record and accrete collaboration edges.

        One log entry carries both effects, so a crash can never apply half.
        """
        with self._lock:
            vo_id = f"vo-{len(self._vos) + 1}"
            doc = {
                "voId": vo_id,
                "specId": spec.spec_id,
                "assignment": [
                    {"role": role, "org": org, "service": svc}
                    for role, org, svc in variant.assignment
                ],
                "timestamp": dt.datetime.now(dt.timezone.utc).isoformat(),
                "pairs": [list(p) for p in collaboration_pairs(variant)],
            }
            self._append({"kind": "vo", "doc": doc})
            self._apply({"kind": "vo", "doc": doc})
            self.events.publish(EVENT_VO_INCEPTED, {"voId": vo_id, "specId": spec.spec_id})
            return vo_id

    # reads ----------------------------------------------------------------------

    def snapshot(self) -> StoreSnapshot:
        with self._lock:
            classes = {}
            for name, source in self._class_sources.items():
                classes[name] = dsl.parse_class(source)
            return StoreSnapshot(
                organizations={
                    org: history[-1] for org, history in self._org_histories.items()
                },
                organization_histories={
                    org: tuple(history) for org, history in self._org_histories.items()
                },
                classes=classes,
                class_sources=dict(self._class_sources),
                spec_docs={k: dict(v) for k, v in self._spec_docs.items()},
                network=self._network,
                vos={k: dict(v) for k, v in self._vos.items()},
            )

    def export(self) -> str:
        """Canonical JSON dump of the committed state (used for audits and the
        durability check)."""
        with self._lock:
            state = {
                "organizations": self._org_docs,
                "classes": self._class_sources,
                "specs": self._spec_docs,
                "network": network_to_dict(self._network),
                "vos": self._vos,
            }
            return json.dumps(state, sort_keys=True, indent=2)


def _accrete_collaboration(network: SocialNetwork, pairs: list[list[str]]) -> SocialNetwork:
    nodes = set(network.nodes)
    edges = list(network.edges)
    for a, b in pairs:
        if a == b:
            continue  # never create self-loops
        nodes.update((a, b))
        for i, e in enumerate(edges):
            if e.relation_type == "pastCollaboration" and {e.source, e.target} == {a, b}:
                edges[i] = replace(e, weight=e.weight + 1)
                break
        else:
            edges.append(Edge(a, b, "pastCollaboration", 1.0))
    return replace(network, nodes=frozenset(nodes), edges=tuple(edges))
