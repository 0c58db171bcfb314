"""Terms, quads and provenance records: the vocabulary every module shares.

Terms are immutable values. Their canonical form is the N-Triples surface
spelling, which also defines the total order used wherever output must be
deterministic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union
from urllib.parse import quote, unquote

from .errors import InvalidQuadError, InvalidTermError

RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
OWL = "http://www.w3.org/2002/07/owl#"
XSD = "http://www.w3.org/2001/XMLSchema#"
MALONT = "https://malont.example/ontology#"
KG = "https://malont.example/kg#"

PREFIXES = {
    "rdf": RDF,
    "rdfs": RDFS,
    "owl": OWL,
    "xsd": XSD,
    "malont": MALONT,
    "kg": KG,
}

XSD_STRING = XSD + "string"
XSD_INTEGER = XSD + "integer"

_BAD_IRI_CHARS = re.compile(r"[\s<>]")


@dataclass(frozen=True, slots=True)
class Iri:
    value: str

    def __post_init__(self):
        if not isinstance(self.value, str) or not self.value:
            raise InvalidTermError("IRI text must be a non-empty string")
        if _BAD_IRI_CHARS.search(self.value):
            raise InvalidTermError(f"IRI contains whitespace or angle brackets: {self.value!r}")

    def __str__(self):
        return canonical_term(self)


@dataclass(frozen=True, slots=True)
class Literal:
    lexical: str
    datatype: str = XSD_STRING

    def __post_init__(self):
        if not isinstance(self.lexical, str):
            raise InvalidTermError("literal lexical form must be a string")
        if self.datatype is None:
            object.__setattr__(self, "datatype", XSD_STRING)
        elif (
            not isinstance(self.datatype, str)
            or not self.datatype
            or _BAD_IRI_CHARS.search(self.datatype)
        ):
            raise InvalidTermError(f"literal datatype is not a valid IRI: {self.datatype!r}")

    def __str__(self):
        return canonical_term(self)


Term = Union[Iri, Literal]

RDF_TYPE = Iri(RDF + "type")
RDFS_LABEL = Iri(RDFS + "label")
RDFS_SUBCLASS_OF = Iri(RDFS + "subClassOf")
RDFS_DOMAIN = Iri(RDFS + "domain")
RDFS_RANGE = Iri(RDFS + "range")
OWL_CLASS = Iri(OWL + "Class")
OWL_OBJECT_PROPERTY = Iri(OWL + "ObjectProperty")
OWL_DATATYPE_PROPERTY = Iri(OWL + "DatatypeProperty")
OWL_INVERSE_OF = Iri(OWL + "inverseOf")
OWL_NAMED_INDIVIDUAL = Iri(OWL + "NamedIndividual")

SCHEMA_GRAPH = Iri(KG + "graph--schema")
INFERRED_GRAPH = Iri(KG + "graph--inferred")
DOC_GRAPH_PREFIX = KG + "graph--doc--"


def malont(name: str) -> Iri:
    return Iri(MALONT + name)


def kg(name: str) -> Iri:
    return Iri(KG + name)


_ESCAPES = str.maketrans({"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"})


@lru_cache(maxsize=1 << 20)
def canonical_term(term: Term) -> str:
    """N-Triples spelling of ``term``; xsd:string literals use the bare quoted form."""
    if isinstance(term, Iri):
        return f"<{term.value}>"
    if isinstance(term, Literal):
        text = '"' + term.lexical.translate(_ESCAPES) + '"'
        if term.datatype == XSD_STRING:
            return text
        return f"{text}^^<{term.datatype}>"
    raise InvalidTermError(f"not a term: {term!r}")


def term_order(a: Term, b: Term) -> int:
    """Three-way comparison of canonical forms; -1, 0 or 1.

    Python compares ``str`` by code point, which matches UTF-8 byte order.
    """
    ka, kb = canonical_term(a), canonical_term(b)
    return (ka > kb) - (ka < kb)


@dataclass(frozen=True, slots=True)
class Quad:
    subject: Iri
    predicate: Iri
    object: Term
    graph: Iri

    def __post_init__(self):
        for name in ("subject", "predicate", "graph"):
            if not isinstance(getattr(self, name), Iri):
                raise InvalidQuadError(f"quad {name} must be an IRI, got {getattr(self, name)!r}")
        if not isinstance(self.object, (Iri, Literal)):
            raise InvalidQuadError(f"quad object must be a term, got {self.object!r}")

    @property
    def triple(self):
        return (self.subject, self.predicate, self.object)


def quad_key(quad: Quad) -> str:
    """Concatenated canonical forms; addresses a quad's provenance."""
    return (
        canonical_term(quad.subject)
        + canonical_term(quad.predicate)
        + canonical_term(quad.object)
        + canonical_term(quad.graph)
    )


def quad_sort_key(quad: Quad):
    return (
        canonical_term(quad.graph),
        canonical_term(quad.subject),
        canonical_term(quad.predicate),
        canonical_term(quad.object),
    )


def doc_graph(doc_id: str) -> Iri:
    if not doc_id:
        raise InvalidTermError("document id must be non-empty")
    return Iri(DOC_GRAPH_PREFIX + quote(doc_id, safe=""))


def doc_id_of(graph: Iri) -> str | None:
    """Inverse of :func:`doc_graph`; ``None`` for non-document graphs."""
    if graph.value.startswith(DOC_GRAPH_PREFIX) and len(graph.value) > len(DOC_GRAPH_PREFIX):
        return unquote(graph.value[len(DOC_GRAPH_PREFIX):])
    return None


PROVENANCE_KINDS = ("schema", "annotation", "inference")
IMPORTED_RULE = "imported"


@dataclass(frozen=True)
class Provenance:
    kind: str
    doc_id: str = ""
    annotation_ids: tuple[str, ...] = ()
    rule_id: str = ""
    premise_keys: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "annotation_ids", tuple(self.annotation_ids))
        object.__setattr__(self, "premise_keys", tuple(self.premise_keys))
        if self.kind not in PROVENANCE_KINDS:
            raise ValueError(f"unknown provenance kind {self.kind!r}")
        if self.kind == "annotation" and not self.doc_id:
            raise ValueError("annotation provenance needs a doc id")
        if self.kind == "inference":
            if not self.rule_id:
                raise ValueError("inference provenance needs a rule id")
            # quads re-imported from the inferred graph have lost their premises
            if not self.premise_keys and self.rule_id != IMPORTED_RULE:
                raise ValueError("inference provenance needs premise keys")
        if self.kind == "schema" and (self.doc_id or self.rule_id):
            raise ValueError("schema provenance carries neither doc id nor rule id")

    @classmethod
    def schema(cls):
        return cls("schema")

    @classmethod
    def annotation(cls, doc_id, annotation_ids=()):
        return cls("annotation", doc_id=doc_id, annotation_ids=tuple(annotation_ids))

    @classmethod
    def inference(cls, rule_id, premise_keys):
        return cls("inference", rule_id=rule_id, premise_keys=tuple(premise_keys))

