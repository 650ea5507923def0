"""Command-line interface.

Exit codes: 0 ok, 1 validation failure, 2 I/O failure, 3 enumeration cap
exceeded.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import dsl
from .config import EngineConfig
from .errors import CapExceededError, DslSyntaxError, SpecValidationError, VobeError
from .matching import WeightedClass, is_instance, score
from .pipeline import (
    context_from_pairs,
    define_spec,
    generate_variants,
    select_candidates,
)
from .record_ops import flatten_properties, validate_record
from .records import record_from_dict
from .socialnet import verify_claims
from .store import IngestRejected, Store

EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_CAP = 3


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IO)


def _detect_kind(path: str, text: str) -> str:
    if path.endswith(".ocls"):
        return "classfile"
    doc = json.loads(text)
    if "organizationProfile" in doc:
        return "record"
    if "processModel" in doc:
        return "spec"
    if "nodes" in doc or "edges" in doc:
        return "network"
    raise VobeError(f"cannot detect document kind of {path}")


def _parse_context(pairs: tuple[str, ...]):
    """Context triples from CLI arguments: `object:predicate=subject`, or the
    shorthand `object=subject` which uses the predicate `is`."""
    triples = []
    for raw in pairs:
        key, _, subject = raw.partition("=")
        if not subject:
            raise click.BadParameter(f"context {raw!r} is not key=value")
        obj, _, pred = key.partition(":")
        triples.append((obj, pred or "is", subject))
    return context_from_pairs(triples)


@click.group()
@click.option("--data", "data_dir", default="./vobe-data", show_default=True,
              help="Store directory.")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True),
              help="JSON config with tau, delta, variantCap, defaultSortKeys.")
@click.pass_context
def main(ctx, data_dir, config_path):
    """Competence registry and partner-selection engine."""
    ctx.ensure_object(dict)
    ctx.obj["data_dir"] = data_dir
    ctx.obj["config"] = EngineConfig.load(config_path) if config_path else EngineConfig()


def _store(ctx) -> Store:
    return Store(ctx.obj["data_dir"])


@main.command()
@click.argument("files", nargs=-1, required=True, type=click.Path())
@click.option("--kind", type=click.Choice(["record", "classfile", "network", "spec"]),
              default=None, help="Override document-kind detection.")
@click.pass_context
def ingest(ctx, files, kind):
    """Validate and store documents (records, .ocls class files, network, specs)."""
    store = _store(ctx)
    for path in files:
        text = _read(path)
        doc_kind = kind or _detect_kind(path, text)
        payload = text if doc_kind == "classfile" else json.loads(text)
        try:
            ids = store.ingest(payload, doc_kind)
        except (IngestRejected, DslSyntaxError, SpecValidationError) as exc:
            click.echo(f"{path}: rejected: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
        click.echo(f"{path}: stored {doc_kind} {', '.join(ids)}")


@main.command()
@click.argument("files", nargs=-1, required=True, type=click.Path())
def validate(files):
    """Check record documents against the structural invariants."""
    failed = False
    for path in files:
        doc = json.loads(_read(path))
        violations = validate_record(record_from_dict(doc))
        if violations:
            failed = True
            for v in violations:
                click.echo(f"{path}: {v.rule} at {v.path}: {v.message}")
        else:
            click.echo(f"{path}: valid")
    sys.exit(EXIT_VALIDATION if failed else 0)


@main.command()
@click.argument("classfile", type=click.Path())
@click.option("--weights", "weights_path", type=click.Path(exists=True), default=None,
              help="JSON file mapping leaf index to weight.")
@click.pass_context
def search(ctx, classfile, weights_path):
    """Rank registered organizations against a class definition."""
    store = _store(ctx)
    try:
        cls = dsl.parse_class(_read(classfile))
    except DslSyntaxError as exc:
        click.echo(f"{classfile}: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    weights = {}
    if weights_path:
        leaf_list = dsl.leaves(cls.expr)
        for key, w in json.loads(_read(weights_path)).items():
            weights[leaf_list[int(key)]] = float(w)
    weighted = WeightedClass(cls, weights)
    snap = store.snapshot()
    rows = []
    for org_id, record in sorted(snap.organizations.items()):
        view = flatten_properties(record)
        inst, _ = is_instance(view, cls)
        rows.append((org_id, score(view, weighted), inst))
    rows.sort(key=lambda r: (not r[2], -r[1], r[0]))
    for org_id, s, inst in rows:
        click.echo(f"{org_id}\t{s:.4f}\t{'instance' if inst else '-'}")
    if not any(inst for _, _, inst in rows):
        click.echo("no instances; consider relaxing the requirements", err=True)


@main.command()
@click.argument("specfile", type=click.Path())
@click.option("--context", "context_pairs", multiple=True,
              help="Context triple object:predicate=subject (repeatable).")
@click.option("--verify/--no-verify", default=False,
              help="Cross-check candidate claims against the social network.")
@click.pass_context
def plan(ctx, specfile, context_pairs, verify):
    """Run candidate selection and variant generation for a VO specification."""
    store = _store(ctx)
    config: EngineConfig = ctx.obj["config"]
    snap = store.snapshot()
    try:
        spec = define_spec(json.loads(_read(specfile)), snap.classes)
        candidates = select_candidates(
            spec, snap.organizations, snap.network,
            verify=verify, rules=config.verification,
        )
        variants = generate_variants(
            spec, candidates, snap.organizations, snap.network,
            _parse_context(context_pairs), cap=config.variant_cap,
        )
    except (SpecValidationError, DslSyntaxError) as exc:
        click.echo(f"{specfile}: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    except CapExceededError as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_CAP)
    for name, rc in candidates.items():
        marker = " (relax requirements)" if rc.relaxation_suggested else ""
        click.echo(f"role {name}: {len(rc.candidates)} candidate(s){marker}")
    for i, v in enumerate(variants):
        orgs = ", ".join(f"{role}={org}" for role, org, _ in v.assignment)
        click.echo(
            f"[{i}] {orgs}  score={v.competence_score:.3f} "
            f"social={v.social_score:.2f} cost={v.total_cost:.2f}"
        )


@main.command()
@click.argument("org_id")
@click.pass_context
def verify(ctx, org_id):
    """Verify an organization's claims against the social network."""
    store = _store(ctx)
    config: EngineConfig = ctx.obj["config"]
    snap = store.snapshot()
    record = snap.organizations.get(org_id)
    if record is None:
        click.echo(f"unknown organization {org_id!r}", err=True)
        sys.exit(EXIT_VALIDATION)
    report = verify_claims(org_id, record, snap.network, config.verification)
    for c in report.checks:
        click.echo(f"{c.flag}\t{c.claim_description}\tobserved={c.observed_value}")
    click.echo(f"reliability {report.reliability_score:.2f}")


@main.command()
@click.argument("spec_id")
@click.argument("variant_index", type=int)
@click.option("--context", "context_pairs", multiple=True)
@click.pass_context
def incept(ctx, spec_id, variant_index, context_pairs):
    """Register the chosen variant as a VO."""
    store = _store(ctx)
    config: EngineConfig = ctx.obj["config"]
    snap = store.snapshot()
    try:
        spec = snap.spec(spec_id)
        candidates = select_candidates(
            spec, snap.organizations, snap.network, rules=config.verification
        )
        variants = generate_variants(
            spec, candidates, snap.organizations, snap.network,
            _parse_context(context_pairs), cap=config.variant_cap,
        )
    except CapExceededError as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_CAP)
    if not 0 <= variant_index < len(variants):
        click.echo(f"no variant at index {variant_index}", err=True)
        sys.exit(EXIT_VALIDATION)
    vo_id = store.incept_vo(variants[variant_index], spec)
    click.echo(vo_id)


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--static", "static_dir", default=None, type=click.Path(exists=True),
              help="Directory of UI assets to serve at /.")
@click.pass_context
def serve(ctx, port, host, static_dir):
    """Run the HTTP API."""
    import uvicorn

    from .api import create_app

    app = create_app(_store(ctx), ctx.obj["config"], static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.pass_context
def export(ctx):
    """Dump the committed store state as canonical JSON."""
    click.echo(_store(ctx).export())


if __name__ == "__main__":
    main()
