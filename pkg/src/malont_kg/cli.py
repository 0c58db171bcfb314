"""Command-line entry point.

Exit codes: 0 success, 1 content-level failure (violations, parse errors),
2 environment failure (missing or unreadable files). Data goes to stdout or
``-o``; summaries and diagnostics go to stderr.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click

from .brat import MappingConfig, load_mapping
from .errors import MalontError, SchemaError
from .nquads import export_nquads, export_provenance, load_store
from .ontology import builtin_malont, parse_schema, validate_ontology
from .pipeline import build, schema_of
from .query import evaluate, parse_query, serialize_results
from .reasoner import validate_instances


class EnvironmentFailure(click.ClickException):
    exit_code = 2


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise EnvironmentFailure(f"cannot read {path}: {exc}") from None


def _fail(message):
    click.echo(message, err=True)
    sys.exit(1)


def _load_ontology(source):
    if source == "builtin":
        return builtin_malont()
    try:
        return parse_schema(_read(source))
    except SchemaError as exc:
        for v in exc.violations or [exc]:
            click.echo(str(v), err=True)
        sys.exit(1)


def _load_kg(path):
    try:
        return load_store(_read(path))
    except MalontError as exc:
        _fail(f"{path}: {exc}")


def prov_path(output) -> Path:
    out = Path(output)
    return out.with_name(out.stem + ".prov.tsv")


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def main(verbose):
    """Malware threat-intelligence knowledge graph tools."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s")


@main.group()
def ontology():
    """Schema commands."""


@ontology.command("check")
@click.option("--builtin", "use_builtin", is_flag=True, help="Check the built-in schema.")
@click.argument("schema", required=False)
def ontology_check(use_builtin, schema):
    """Validate a .mos schema (or the built-in one)."""
    if use_builtin == bool(schema):
        raise click.UsageError("give exactly one of --builtin or a schema path")
    if use_builtin:
        onto = builtin_malont()
    else:
        text = _read(schema)
        try:
            onto = parse_schema(text)
        except SchemaError as exc:
            for v in exc.violations or [exc]:
                click.echo(str(v))
            sys.exit(1)
    violations = validate_ontology(onto)
    for v in violations:
        click.echo(str(v))
    if violations:
        sys.exit(1)
    c, op, dp = onto.counts()
    click.echo(f"ok: {c} classes, {op} object properties, {dp} datatype properties")


@main.group()
def kg():
    """Knowledge-graph commands."""


@kg.command("build")
@click.option("--ontology", "ontology_src", default="builtin", show_default=True, help="'builtin' or a .mos path.")
@click.option("--corpus", required=True, help="Directory of <doc-id>.ann (+ optional .txt) files.")
@click.option("--mapping", default=None, help="Annotation-type mapping file (.map).")
@click.option("--no-materialize", is_flag=True, help="Skip inference.")
@click.option("-o", "--output", required=True, help="Output N-Quads path.")
def kg_build(ontology_src, corpus, mapping, no_materialize, output):
    """Build a KG from an annotated corpus."""
    if not Path(corpus).is_dir():
        raise EnvironmentFailure(f"corpus directory not readable: {corpus}")
    onto = _load_ontology(ontology_src)
    config = MappingConfig()
    if mapping:
        _read(mapping)
        try:
            config = load_mapping(mapping, onto)
        except MalontError as exc:
            _fail(f"{mapping}: {exc}")
    store, summary = build(onto, corpus, config, run_reasoner=not no_materialize)
    try:
        Path(output).write_text(export_nquads(store), encoding="utf-8")
        prov_path(output).write_text(export_provenance(store), encoding="utf-8")
    except OSError as exc:
        raise EnvironmentFailure(f"cannot write {output}: {exc}") from None
    for line in summary.lines():
        click.echo(line, err=True)
    for w in summary.warnings:
        click.echo(f"warning: {w}", err=True)
    if summary.failed_docs:
        sys.exit(1)


@kg.command("query")
@click.option("--kg", "kg_path", required=True)
@click.option("--query", "query_path", required=True)
def kg_query(kg_path, query_path):
    """Evaluate a SELECT query and print TSV results."""
    text = _read(query_path)
    store = _load_kg(kg_path)
    try:
        q = parse_query(text)
    except MalontError as exc:
        _fail(f"{query_path}: {exc}")
    click.echo(serialize_results(evaluate(store, q)), nl=False)


@kg.command("validate")
@click.option("--kg", "kg_path", required=True)
@click.option("--ontology", "ontology_src", default=None, help="Override the schema stored in the KG.")
def kg_validate(kg_path, ontology_src):
    """Check instance triples against domains and ranges."""
    store = _load_kg(kg_path)
    if ontology_src:
        onto = _load_ontology(ontology_src)
    else:
        onto = schema_of(store) or builtin_malont()
    violations = validate_instances(store, onto)
    for v in violations:
        click.echo(str(v))
    if violations:
        sys.exit(1)


@kg.command("export")
@click.option("--kg", "kg_path", required=True)
@click.option("-o", "--output", default=None)
@click.option("--prov", is_flag=True, help="Also write <output>.prov.tsv.")
def kg_export(kg_path, output, prov):
    """Re-serialize a KG canonically."""
    if prov and not output:
        raise click.UsageError("--prov needs -o")
    store = _load_kg(kg_path)
    text = export_nquads(store)
    if output is None:
        click.echo(text, nl=False)
        return
    try:
        Path(output).write_text(text, encoding="utf-8")
        if prov:
            prov_path(output).write_text(export_provenance(store), encoding="utf-8")
    except OSError as exc:
        raise EnvironmentFailure(f"cannot write {output}: {exc}") from None


@kg.command("stats")
@click.option("--kg", "kg_path", required=True)
def kg_stats(kg_path):
    """Print store statistics as key<TAB>value lines."""
    store = _load_kg(kg_path)
    for line in store.stats().lines():
        click.echo(line)


if __name__ == "__main__":
    main()
