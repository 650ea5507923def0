#!/usr/bin/env python3
"""Seed a store directory with the bundled demo fixtures.

Usage: python3 scripts/seed_demo.py [--data DIR]

Afterwards `vobe --data DIR serve` exposes the demo registry over HTTP.
"""

import argparse
import json
from pathlib import Path

from vobe.store import Store

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data", default="./vobe-data", help="store directory")
    args = parser.parse_args()

    store = Store(args.data)
    plan = [
        ("softwaredev.json", "record"),
        ("softis.json", "record"),
        ("polish_software_company.ocls", "classfile"),
        ("network.json", "network"),
        ("demo_spec.json", "spec"),
    ]
    for name, kind in plan:
        path = FIXTURES / name
        payload = path.read_text() if kind == "classfile" else json.loads(path.read_text())
        ids = store.ingest(payload, kind)
        print(f"{name}: stored {kind} {', '.join(ids)}")
    snap = store.snapshot()
    print(
        f"store at {args.data}: {len(snap.organizations)} organizations, "
        f"{len(snap.classes)} classes, {len(snap.spec_docs)} specs"
    )


if __name__ == "__main__":
    main()
