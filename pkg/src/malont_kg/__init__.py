"""Malware threat-intelligence knowledge graph engine."""

from .brat import emit_triples, mint_instance_iri, parse_ann, parse_mapping
from .nquads import export_nquads, import_nquads, load_store
from .ontology import Ontology, builtin_malont, parse_schema, reify, validate_ontology
from .query import evaluate, parse_query, serialize_results
from .reasoner import materialize, validate_instances
from .store import QuadPattern, Store
from .terms import Iri, Literal, Provenance, Quad, canonical_term, term_order

__all__ = [
    "Iri",
    "Literal",
    "Ontology",
    "Provenance",
    "Quad",
    "QuadPattern",
    "Store",
    "builtin_malont",
    "canonical_term",
    "emit_triples",
    "evaluate",
    "export_nquads",
    "import_nquads",
    "load_store",
    "materialize",
    "mint_instance_iri",
    "parse_ann",
    "parse_mapping",
    "parse_query",
    "parse_schema",
    "reify",
    "serialize_results",
    "term_order",
    "validate_instances",
    "validate_ontology",
]

__version__ = "0.1.0"
