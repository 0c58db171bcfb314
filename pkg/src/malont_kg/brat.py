"""brat standoff ingestion: parse ``.ann`` files, map annotation types onto the
ontology, and emit instance quads with annotation provenance.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import AnnotationParseError, MappingError
from .ontology import DATATYPES, NAME_RE, Ontology
from .terms import (
    OWL_NAMED_INDIVIDUAL,
    RDF_TYPE,
    RDFS_LABEL,
    Iri,
    Literal,
    Provenance,
    Quad,
    doc_graph,
    kg,
    malont,
)

_ENTITY_ID = re.compile(r"T\d+\Z")
_RELATION_ID = re.compile(r"R\d+\Z")
_ATTRIBUTE_ID = re.compile(r"A\d+\Z")
_SKIPPED = {"E": "event", "M": "modification", "N": "normalization", "#": "note"}


@dataclass(frozen=True)
class EntityAnnotation:
    id: str
    type: str
    spans: tuple[tuple[int, int], ...]
    surface: str


@dataclass(frozen=True)
class RelationAnnotation:
    id: str
    type: str
    arg1: str
    arg2: str


@dataclass(frozen=True)
class AttributeAnnotation:
    id: str
    type: str
    target: str
    value: Optional[str] = None


@dataclass
class AnnotationDoc:
    doc_id: str
    entities: list[EntityAnnotation] = field(default_factory=list)
    relations: list[RelationAnnotation] = field(default_factory=list)
    attributes: list[AttributeAnnotation] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def _spans(text: str, lineno: int) -> tuple[tuple[int, int], ...]:
    spans = []
    for part in text.split(";"):
        bits = part.split(" ")
        if len(bits) != 2 or not all(b.isdigit() for b in bits):
            raise AnnotationParseError(f"bad offsets {part!r}", lineno)
        start, end = int(bits[0]), int(bits[1])
        if start >= end:
            raise AnnotationParseError(f"empty or reversed span {start} {end}", lineno)
        if spans and start < spans[-1][1]:
            raise AnnotationParseError("spans overlap or are not ascending", lineno)
        spans.append((start, end))
    return tuple(spans)


def parse_ann(ann_text: str, doc_text: Optional[str], doc_id: str) -> AnnotationDoc:
    """Parse standoff annotations; ``doc_text`` (when given) overrides surfaces."""
    if not doc_id:
        raise ValueError("doc_id must be non-empty")
    doc = AnnotationDoc(doc_id)
    ids: set[str] = set()
    pending_refs = []

    def claim(ident, lineno):
        if ident in ids:
            raise AnnotationParseError(f"duplicate id {ident}", lineno)
        ids.add(ident)

    for lineno, line in enumerate(ann_text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        lead = line[0]
        if lead in _SKIPPED:
            doc.warnings.append(f"line {lineno}: skipped {_SKIPPED[lead]} record {line.split(chr(9), 1)[0]}")
            continue
        fields = line.split("\t")
        ident = fields[0]
        if lead == "T":
            if len(fields) != 3:
                raise AnnotationParseError(f"entity record needs 3 tab-separated fields, got {len(fields)}", lineno)
            if not _ENTITY_ID.match(ident):
                raise AnnotationParseError(f"bad entity id {ident!r}", lineno)
            etype, _, offsets = fields[1].partition(" ")
            if not etype or not offsets:
                raise AnnotationParseError("entity record needs a type and offsets", lineno)
            spans = _spans(offsets, lineno)
            surface = fields[2]
            if doc_text is not None:
                if spans[-1][1] > len(doc_text):
                    raise AnnotationParseError(f"span end {spans[-1][1]} is past the end of the text", lineno)
                actual = " ".join(doc_text[s:e] for s, e in spans)
                if actual != surface:
                    doc.warnings.append(f"line {lineno}: {ident} surface {surface!r} differs from text {actual!r}")
                    surface = actual
            claim(ident, lineno)
            doc.entities.append(EntityAnnotation(ident, etype, spans, surface))
        elif lead == "R":
            if len(fields) == 3 and not fields[2]:
                fields = fields[:2]
            if len(fields) != 2:
                raise AnnotationParseError(f"relation record needs 2 tab-separated fields, got {len(fields)}", lineno)
            if not _RELATION_ID.match(ident):
                raise AnnotationParseError(f"bad relation id {ident!r}", lineno)
            parts = fields[1].split(" ")
            if len(parts) != 3:
                raise AnnotationParseError("relation record needs 'Type Arg1:T<i> Arg2:T<j>'", lineno)
            args = {}
            for part in parts[1:]:
                name, colon, ref = part.partition(":")
                if not colon or name not in ("Arg1", "Arg2") or name in args:
                    raise AnnotationParseError(f"bad relation argument {part!r}", lineno)
                args[name] = ref
            claim(ident, lineno)
            doc.relations.append(RelationAnnotation(ident, parts[0], args["Arg1"], args["Arg2"]))
            pending_refs.extend((lineno, ident, ref) for ref in (args["Arg1"], args["Arg2"]))
        elif lead == "A":
            if len(fields) != 2:
                raise AnnotationParseError(f"attribute record needs 2 tab-separated fields, got {len(fields)}", lineno)
            if not _ATTRIBUTE_ID.match(ident):
                raise AnnotationParseError(f"bad attribute id {ident!r}", lineno)
            parts = fields[1].split(" ", 2)
            if len(parts) < 2:
                raise AnnotationParseError("attribute record needs 'Type <target>[ <value>]'", lineno)
            claim(ident, lineno)
            value = parts[2] if len(parts) == 3 else None
            if not parts[1].startswith("T"):
                doc.warnings.append(f"line {lineno}: attribute {ident} on non-entity {parts[1]} ignored")
                continue
            doc.attributes.append(AttributeAnnotation(ident, parts[0], parts[1], value))
            pending_refs.append((lineno, ident, parts[1]))
        else:
            raise AnnotationParseError(f"unrecognized record {ident!r}", lineno)

    entity_ids = {e.id for e in doc.entities}
    for lineno, owner, ref in pending_refs:
        if ref not in entity_ids:
            raise AnnotationParseError(f"{owner} refers to undefined entity {ref}", lineno)
    return doc


@dataclass
class MappingConfig:
    entity_map: dict[str, str] = field(default_factory=dict)
    relation_map: dict[str, str] = field(default_factory=dict)
    attribute_map: dict[str, str] = field(default_factory=dict)

    def class_for(self, ann_type):
        return self.entity_map.get(ann_type, ann_type)

    def property_for(self, ann_type):
        return self.relation_map.get(ann_type, ann_type)

    def attribute_for(self, ann_type):
        return self.attribute_map.get(ann_type, ann_type)


class UnknownMappingTargetError(MappingError):
    pass


_MAPPING_LINE = re.compile(r"(entity|relation|attribute)\s+(\S+)\s+->\s+(\S+)\Z")


def parse_mapping(text: str, ontology: Ontology) -> MappingConfig:
    config = MappingConfig()
    targets = {
        "entity": (config.entity_map, ontology.class_map, "class"),
        "relation": (config.relation_map, ontology.object_property_map, "object property"),
        "attribute": (config.attribute_map, ontology.datatype_property_map, "datatype property"),
    }
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        m = _MAPPING_LINE.match(line)
        if not m:
            raise MappingError("expected '<entity|relation|attribute> <AnnType> -> <Name>'", lineno)
        kind, ann_type, name = m.groups()
        table, defined, what = targets[kind]
        if not NAME_RE.match(name) or name not in defined:
            raise UnknownMappingTargetError(f"{name} is not a {what} of the ontology", lineno)
        if ann_type in table:
            raise MappingError(f"{kind} type {ann_type} mapped twice", lineno)
        table[ann_type] = name
    return config


def load_mapping(path, ontology: Ontology) -> MappingConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_mapping(fh.read(), ontology)


_NON_SLUG = re.compile(r"[^a-z0-9]+")


def slugify(surface: str) -> str:
    slug = _NON_SLUG.sub("-", surface.lower()).strip("-")
    return slug or "x" + format(len(surface.encode("utf-8")), "x")


def mint_instance_iri(class_name: str, surface: str) -> Iri:
    return kg(f"{class_name}--{slugify(surface)}")


@dataclass
class Emission:
    items: list[tuple[Quad, Provenance]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    skipped: int = 0
    entities: int = 0
    relations: int = 0
    attributes: int = 0


def emit_triples(doc: AnnotationDoc, mapping: MappingConfig, ontology: Ontology) -> Emission:
    out = Emission()
    graph = doc_graph(doc.doc_id)
    nodes: dict[str, Iri] = {}

    def add(s, p, o, ann_id):
        out.items.append((Quad(s, p, o, graph), Provenance.annotation(doc.doc_id, (ann_id,))))

    def skip(message):
        out.warnings.append(f"{doc.doc_id}: {message}")
        out.skipped += 1

    for e in doc.entities:
        cls = mapping.class_for(e.type)
        if not ontology.has_class(cls):
            skip(f"{e.id} type {e.type!r} maps to undefined class {cls!r}")
            continue
        iri = mint_instance_iri(cls, e.surface)
        nodes[e.id] = iri
        add(iri, RDF_TYPE, malont(cls), e.id)
        add(iri, RDF_TYPE, OWL_NAMED_INDIVIDUAL, e.id)
        add(iri, RDFS_LABEL, Literal(e.surface), e.id)
        out.entities += 1

    for r in doc.relations:
        prop = mapping.property_for(r.type)
        if prop not in ontology.object_property_map:
            skip(f"{r.id} type {r.type!r} maps to undefined object property {prop!r}")
            continue
        if r.arg1 not in nodes or r.arg2 not in nodes:
            skip(f"{r.id} connects a skipped entity")
            continue
        add(nodes[r.arg1], malont(prop), nodes[r.arg2], r.id)
        out.relations += 1

    for a in doc.attributes:
        name = mapping.attribute_for(a.type)
        dprop = ontology.datatype_property_map.get(name)
        if dprop is None:
            skip(f"{a.id} type {a.type!r} maps to undefined datatype property {name!r}")
            continue
        if a.value is None:
            skip(f"{a.id} is a flag attribute; {name} needs a value")
            continue
        if a.target not in nodes:
            skip(f"{a.id} targets a skipped entity")
            continue
        add(nodes[a.target], malont(name), Literal(a.value, DATATYPES[dprop.range]), a.id)
        out.attributes += 1
    return out


def iter_corpus(corpus_dir):
    """Yield ``(doc_id, ann_path, txt_path or None)`` sorted by doc id."""
    root = Path(corpus_dir)
    for ann in sorted(root.glob("*.ann")):
        txt = ann.with_suffix(".txt")
        yield ann.stem, ann, (txt if txt.exists() else None)
