#!/usr/bin/env python3
"""Run the five selection phases end to end on the demo fixtures and print
what each phase produces. Works on a throwaway store; nothing persists.

Usage: python3 scripts/walkthrough.py [--context season=holidays] [--verify]
"""

import argparse
import json
import tempfile
from pathlib import Path

from vobe.pipeline import (
    KpiPlugin,
    context_from_pairs,
    evaluate_performance,
    generate_variants,
    select_candidates,
)
from vobe.store import Store

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def parse_context(pairs):
    triples = []
    for raw in pairs:
        key, _, subject = raw.partition("=")
        obj, _, pred = key.partition(":")
        triples.append((obj, pred or "is", subject))
    return context_from_pairs(triples)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--context", action="append", default=[],
                        help="context triple object:predicate=subject")
    parser.add_argument("--verify", action="store_true",
                        help="cross-check candidate claims against the network")
    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        store = Store(tmp)
        for name, kind in [
            ("softwaredev.json", "record"),
            ("softis.json", "record"),
            ("polish_software_company.ocls", "classfile"),
            ("network.json", "network"),
            ("demo_spec.json", "spec"),
        ]:
            path = FIXTURES / name
            payload = path.read_text() if kind == "classfile" else json.loads(path.read_text())
            store.ingest(payload, kind)

        snap = store.snapshot()
        spec = snap.spec("demo")
        print(f"phase 1  spec {spec.spec_id!r}: roles {[r.name for r in spec.roles]}")

        candidates = select_candidates(
            spec, snap.organizations, snap.network, verify=args.verify
        )
        for name, rc in candidates.items():
            flags = f" flagged={sorted(rc.flagged)}" if rc.flagged else ""
            print(f"phase 2  role {name}: candidates {rc.candidates}{flags}")

        context = parse_context(args.context)
        variants = generate_variants(
            spec, candidates, snap.organizations, snap.network, context
        )
        for i, v in enumerate(variants):
            orgs = ", ".join(f"{role}={org}" for role, org, _ in v.assignment)
            print(
                f"phase 3  [{i}] {orgs} score={v.competence_score:.3f} "
                f"social={v.social_score:.2f} cost={v.total_cost:.0f}"
            )

        partner_count = KpiPlugin(
            "partnerCount",
            lambda variant, _: [("partnerCount", float(len(set(variant.org_ids))))],
        )
        report = evaluate_performance(
            variants[0], spec, snap.organizations, [partner_count], context
        )
        print(f"phase 4  best variant KPIs: {dict(report.values)}")

        vo_id = store.incept_vo(variants[0], spec)
        weight = store.snapshot().network.edge_weight(
            "softwaredev", "softis", "pastCollaboration"
        )
        print(f"phase 5  incepted {vo_id}; softwaredev-softis collaboration weight now {weight:.0f}")


if __name__ == "__main__":
    main()
