"""End-to-end KG construction: schema, corpus ingestion, materialization."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from .brat import MappingConfig, emit_triples, iter_corpus, parse_ann
from .errors import MalontError
from .ontology import Ontology, ontology_from_quads, reify
from .reasoner import InferenceReport, materialize
from .store import Store
from .terms import SCHEMA_GRAPH, Provenance

log = logging.getLogger(__name__)


@dataclass
class BuildManifest:
    ontology_path: str
    corpus_dir: str
    output_path: str
    mapping_path: Optional[str] = None
    materialize: bool = True


@dataclass
class BuildSummary:
    docs: int = 0
    failed_docs: list[str] = field(default_factory=list)
    entities: int = 0
    relations: int = 0
    attributes: int = 0
    asserted_quads: int = 0
    inferred_quads: int = 0
    warnings: list[str] = field(default_factory=list)
    inference: Optional[InferenceReport] = None

    def lines(self):
        return [
            f"docs\t{self.docs}",
            f"failed-docs\t{len(self.failed_docs)}",
            f"entities\t{self.entities}",
            f"relations\t{self.relations}",
            f"attributes\t{self.attributes}",
            f"asserted-quads\t{self.asserted_quads}",
            f"inferred-quads\t{self.inferred_quads}",
            f"warnings\t{len(self.warnings)}",
        ]


def new_store(ontology: Ontology) -> Store:
    store = Store()
    prov = Provenance.schema()
    for quad in reify(ontology):
        store.insert(quad, prov)
    return store


def ingest_document(store, summary, ontology, mapping, doc_id, ann_text, doc_text=None):
    doc = parse_ann(ann_text, doc_text, doc_id)
    summary.warnings.extend(f"{doc_id}: {w}" for w in doc.warnings)
    emission = emit_triples(doc, mapping, ontology)
    summary.warnings.extend(emission.warnings)
    summary.entities += emission.entities
    summary.relations += emission.relations
    summary.attributes += emission.attributes
    for quad, prov in emission.items:
        summary.asserted_quads += store.insert(quad, prov)


def build(ontology: Ontology, corpus_dir, mapping: Optional[MappingConfig] = None, run_reasoner=True):
    """Build a store from a brat corpus. Documents that fail to parse are
    recorded in ``summary.failed_docs`` and otherwise skipped."""
    mapping = mapping or MappingConfig()
    store = new_store(ontology)
    summary = BuildSummary()
    for doc_id, ann_path, txt_path in iter_corpus(corpus_dir):
        summary.docs += 1
        ann_text = ann_path.read_text(encoding="utf-8")
        doc_text = txt_path.read_text(encoding="utf-8") if txt_path else None
        try:
            ingest_document(store, summary, ontology, mapping, doc_id, ann_text, doc_text)
        except MalontError as exc:
            log.warning("%s: %s", doc_id, exc)
            summary.failed_docs.append(doc_id)
            summary.warnings.append(f"{doc_id}: {exc}")
    if run_reasoner:
        summary.inference = materialize(store, ontology)
        summary.inferred_quads = summary.inference.added_quads
    return store, summary


def schema_of(store: Store) -> Optional[Ontology]:
    """Ontology recovered from the store's schema graph, or None if absent."""
    quads = list(store.iter_match(g=SCHEMA_GRAPH))
    return ontology_from_quads(quads) if quads else None
