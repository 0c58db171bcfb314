"""Ontology schema: class/property definitions, the ``.mos`` schema language,
validation, and reification into queryable quads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional

from .errors import InvalidOntologyError, SchemaError
from .terms import (
    OWL_CLASS,
    OWL_DATATYPE_PROPERTY,
    OWL_INVERSE_OF,
    OWL_OBJECT_PROPERTY,
    RDF_TYPE,
    RDFS_DOMAIN,
    RDFS_LABEL,
    RDFS_RANGE,
    RDFS_SUBCLASS_OF,
    SCHEMA_GRAPH,
    XSD_INTEGER,
    XSD_STRING,
    Iri,
    MALONT,
    Literal,
    Quad,
    malont,
)

NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

DATATYPES = {"string": XSD_STRING, "integer": XSD_INTEGER}


@dataclass(frozen=True)
class ClassDef:
    name: str
    superclass: Optional[str] = None
    label: str = ""

    def __post_init__(self):
        if not self.label:
            object.__setattr__(self, "label", self.name)


@dataclass(frozen=True)
class ObjectPropertyDef:
    name: str
    domains: tuple[str, ...]
    range: str
    inverse: Optional[str] = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "domains", tuple(self.domains))
        if not self.label:
            object.__setattr__(self, "label", self.name)


@dataclass(frozen=True)
class DatatypePropertyDef:
    name: str
    domains: tuple[str, ...]
    range: str
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "domains", tuple(self.domains))
        if not self.label:
            object.__setattr__(self, "label", self.name)


@dataclass(frozen=True)
class Violation:
    rule: str
    args: tuple[str, ...]
    message: str = ""

    def __str__(self):
        return f"{self.rule}({','.join(self.args)})"


@dataclass(frozen=True)
class Ontology:
    """Definitions in declaration order.

    Duplicates and dangling references are representable so that
    :func:`validate_ontology` can report them; the lookup helpers assume a
    valid ontology.
    """

    classes: tuple[ClassDef, ...] = ()
    object_properties: tuple[ObjectPropertyDef, ...] = ()
    datatype_properties: tuple[DatatypePropertyDef, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "object_properties", tuple(self.object_properties))
        object.__setattr__(self, "datatype_properties", tuple(self.datatype_properties))

    @cached_property
    def class_map(self) -> dict[str, ClassDef]:
        return {c.name: c for c in self.classes}

    @cached_property
    def object_property_map(self) -> dict[str, ObjectPropertyDef]:
        return {p.name: p for p in self.object_properties}

    @cached_property
    def datatype_property_map(self) -> dict[str, DatatypePropertyDef]:
        return {p.name: p for p in self.datatype_properties}

    def has_class(self, name):
        return name in self.class_map

    def has_property(self, name):
        return name in self.object_property_map or name in self.datatype_property_map

    def ancestors(self, name: str) -> tuple[str, ...]:
        """Strict superclasses of ``name``, nearest first."""
        return self._ancestors.get(name, ())

    def descendants(self, name: str) -> tuple[str, ...]:
        return self._descendants.get(name, ())

    @cached_property
    def _ancestors(self):
        out = {}
        for c in self.classes:
            chain, seen = [], {c.name}
            sup = c.superclass
            while sup is not None and sup in self.class_map and sup not in seen:
                chain.append(sup)
                seen.add(sup)
                sup = self.class_map[sup].superclass
            out[c.name] = tuple(chain)
        return out

    @cached_property
    def _descendants(self):
        out = {c.name: [] for c in self.classes}
        for name, ups in self._ancestors.items():
            for up in ups:
                out[up].append(name)
        return {k: tuple(v) for k, v in out.items()}

    def counts(self):
        return len(self.classes), len(self.object_properties), len(self.datatype_properties)


def validate_ontology(o: Ontology) -> list[Violation]:
    violations: list[Violation] = []
    seen: dict[str, int] = {}
    all_defs = [*o.classes, *o.object_properties, *o.datatype_properties]
    for d in all_defs:
        seen[d.name] = seen.get(d.name, 0) + 1
    reported = set()
    for d in all_defs:
        if not NAME_RE.match(d.name):
            violations.append(Violation("invalid-name", (d.name,), f"{d.name!r} is not a valid identifier"))
        if seen[d.name] > 1 and d.name not in reported:
            reported.add(d.name)
            violations.append(Violation("duplicate-name", (d.name,), f"{d.name} is defined {seen[d.name]} times"))

    class_names = {c.name for c in o.classes}
    obj_props = {}
    for p in o.object_properties:
        obj_props.setdefault(p.name, p)

    def unresolved(owner, ref):
        violations.append(Violation("unresolved-reference", (owner, ref), f"{owner} refers to undefined {ref}"))

    for c in o.classes:
        if c.superclass is not None and c.superclass not in class_names:
            unresolved(c.name, c.superclass)
    for p in [*o.object_properties, *o.datatype_properties]:
        if not p.domains:
            violations.append(Violation("empty-domain", (p.name,), f"{p.name} has no domain"))
        for d in p.domains:
            if d not in class_names:
                unresolved(p.name, d)
    for p in o.object_properties:
        if p.range not in class_names:
            unresolved(p.name, p.range)
        if p.inverse is not None:
            q = obj_props.get(p.inverse)
            if q is None:
                unresolved(p.name, p.inverse)
            elif q.inverse != p.name:
                violations.append(
                    Violation("asymmetric-inverse", (p.name, q.name), f"{p.name} names {q.name} as inverse but not vice versa")
                )
    for p in o.datatype_properties:
        if p.range not in DATATYPES:
            violations.append(Violation("unsupported-datatype", (p.name, p.range), f"{p.range} is not string or integer"))

    supers = {}
    for c in o.classes:
        supers.setdefault(c.name, c.superclass)
    in_cycle = set()
    for start in supers:
        path, node = [], start
        while node is not None and node in supers and node not in path:
            path.append(node)
            node = supers[node]
        if node is not None and node in path:
            cycle = path[path.index(node):]
            if not in_cycle.intersection(cycle):
                in_cycle.update(cycle)
                violations.append(
                    Violation("cyclic-hierarchy", tuple(sorted(cycle)), "subclass cycle through " + " -> ".join(cycle))
                )
    return violations


def _split_names(value: str, lineno: int) -> tuple[str, ...]:
    names = tuple(value.split(","))
    for n in names:
        if not NAME_RE.match(n):
            raise SchemaError(f"line {lineno}: invalid name {n!r}", line=lineno)
    return names


def _options(tokens, allowed, lineno):
    opts = {}
    for tok in tokens:
        key, eq, value = tok.partition("=")
        if not eq or not value:
            raise SchemaError(f"line {lineno}: expected key=value, got {tok!r}", line=lineno)
        if key not in allowed:
            raise SchemaError(f"line {lineno}: unknown option {key!r}", line=lineno)
        if key in opts:
            raise SchemaError(f"line {lineno}: repeated option {key!r}", line=lineno)
        opts[key] = value
    return opts


def parse_schema(text: str) -> Ontology:
    """Parse ``.mos`` schema source and validate the result.

    Raises :class:`SchemaError`; for semantic problems its ``violations``
    lists every problem found.
    """
    classes, objprops, dataprops = [], [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split(" ")
        if "" in tokens:
            raise SchemaError(f"line {lineno}: tokens must be separated by single spaces", line=lineno)
        kind, rest = tokens[0], tokens[1:]
        if not rest or not NAME_RE.match(rest[0]):
            raise SchemaError(f"line {lineno}: expected a name after {kind!r}", line=lineno)
        name = rest[0]
        if kind == "class":
            if len(rest) == 1:
                classes.append(ClassDef(name))
            elif len(rest) == 3 and rest[1] == ":" and NAME_RE.match(rest[2]):
                classes.append(ClassDef(name, rest[2]))
            else:
                raise SchemaError(f"line {lineno}: expected 'class <Name> [: <SuperName>]'", line=lineno)
        elif kind == "objprop":
            opts = _options(rest[1:], {"domain", "range", "inverse"}, lineno)
            if "domain" not in opts or "range" not in opts:
                raise SchemaError(f"line {lineno}: objprop needs domain= and range=", line=lineno)
            (rng,) = _single(opts["range"], lineno)
            inverse = _single(opts["inverse"], lineno)[0] if "inverse" in opts else None
            objprops.append(ObjectPropertyDef(name, _split_names(opts["domain"], lineno), rng, inverse))
        elif kind == "dataprop":
            opts = _options(rest[1:], {"domain", "range"}, lineno)
            if "domain" not in opts or "range" not in opts:
                raise SchemaError(f"line {lineno}: dataprop needs domain= and range=", line=lineno)
            if opts["range"] not in DATATYPES:
                raise SchemaError(f"line {lineno}: dataprop range must be string or integer", line=lineno)
            dataprops.append(DatatypePropertyDef(name, _split_names(opts["domain"], lineno), opts["range"]))
        else:
            raise SchemaError(f"line {lineno}: unknown declaration {kind!r}", line=lineno)

    ontology = Ontology(tuple(classes), tuple(objprops), tuple(dataprops))
    violations = validate_ontology(ontology)
    if violations:
        raise SchemaError("invalid schema: " + "; ".join(map(str, violations)), violations)
    return ontology


def _single(value, lineno):
    names = _split_names(value, lineno)
    if len(names) != 1:
        raise SchemaError(f"line {lineno}: expected a single name, got {value!r}", line=lineno)
    return names


def load_schema(path) -> Ontology:
    with open(path, encoding="utf-8") as fh:
        return parse_schema(fh.read())


def to_dsl(o: Ontology) -> str:
    lines = []
    for c in o.classes:
        lines.append(f"class {c.name}" + (f" : {c.superclass}" if c.superclass else ""))
    for p in o.object_properties:
        line = f"objprop {p.name} domain={','.join(p.domains)} range={p.range}"
        if p.inverse:
            line += f" inverse={p.inverse}"
        lines.append(line)
    for p in o.datatype_properties:
        lines.append(f"dataprop {p.name} domain={','.join(p.domains)} range={p.range}")
    return "\n".join(lines) + "\n"


def reify(o: Ontology) -> list[Quad]:
    """Express the schema as quads in the schema graph, in declaration order."""
    violations = validate_ontology(o)
    if violations:
        raise InvalidOntologyError("cannot reify invalid ontology: " + "; ".join(map(str, violations)))
    g = SCHEMA_GRAPH
    out = []
    for c in o.classes:
        iri = malont(c.name)
        out.append(Quad(iri, RDF_TYPE, OWL_CLASS, g))
        out.append(Quad(iri, RDFS_LABEL, Literal(c.label), g))
        if c.superclass:
            out.append(Quad(iri, RDFS_SUBCLASS_OF, malont(c.superclass), g))
    for p in o.object_properties:
        iri = malont(p.name)
        out.append(Quad(iri, RDF_TYPE, OWL_OBJECT_PROPERTY, g))
        out.append(Quad(iri, RDFS_LABEL, Literal(p.label), g))
        out.extend(Quad(iri, RDFS_DOMAIN, malont(d), g) for d in p.domains)
        out.append(Quad(iri, RDFS_RANGE, malont(p.range), g))
        if p.inverse:
            out.append(Quad(iri, OWL_INVERSE_OF, malont(p.inverse), g))
    for p in o.datatype_properties:
        iri = malont(p.name)
        out.append(Quad(iri, RDF_TYPE, OWL_DATATYPE_PROPERTY, g))
        out.append(Quad(iri, RDFS_LABEL, Literal(p.label), g))
        out.extend(Quad(iri, RDFS_DOMAIN, malont(d), g) for d in p.domains)
        out.append(Quad(iri, RDFS_RANGE, Iri(DATATYPES[p.range]), g))
    return out


# Malware and Hash subclasses beyond TrojanHorse/Dropper are placeholders; a
# user-supplied .mos file replaces them.
_BUILTIN_CLASSES: tuple[tuple[str, Optional[str]], ...] = (
    ("Malware", None),
    ("TrojanHorse", "Malware"),
    ("Dropper", "Malware"),
    ("Ransomware", "Malware"),
    ("Spyware", "Malware"),
    ("MalwareFamily", None),
    ("MalwareCharacteristics", None),
    ("Attacker", None),
    ("AttackerGroup", None),
    ("ExploitTarget", None),
    ("Indicator", None),
    ("File", "Indicator"),
    ("Email", "Indicator"),
    ("Hash", "Indicator"),
    ("Address", "Indicator"),
    ("MD5", "Hash"),
    ("SHA1", "Hash"),
    ("SHA224", "Hash"),
    ("SHA256", "Hash"),
    ("SHA512", "Hash"),
    ("SSDEEP", "Hash"),
    ("Location", None),
    ("Software", None),
    ("Vulnerability", None),
    ("Campaign", None),
    ("Organization", None),
    ("Person", None),
    ("Host", None),
    ("Information", None),
)

_BUILTIN_OBJECT_PROPERTIES = (
    ObjectPropertyDef("hasFamily", ("Malware",), "MalwareFamily", "hasMember"),
    ObjectPropertyDef("hasMember", ("MalwareFamily",), "Malware", "hasFamily"),
    ObjectPropertyDef("indicates", ("Indicator",), "Malware", "indicatedBy"),
    ObjectPropertyDef("indicatedBy", ("Malware",), "Indicator", "indicates"),
    ObjectPropertyDef("hasVulnerability", ("ExploitTarget", "Software"), "Vulnerability"),
    ObjectPropertyDef("hasAttachment", ("Email",), "File"),
    ObjectPropertyDef("usesDropper", ("Attacker", "Malware", "Campaign", "AttackerGroup"), "Dropper"),
    ObjectPropertyDef("usesTrojan", ("AttackerGroup",), "TrojanHorse"),
    ObjectPropertyDef("hasTargetLocation", ("Malware",), "Location"),
    ObjectPropertyDef("hasCharacteristics", ("Malware",), "MalwareCharacteristics"),
    ObjectPropertyDef("targets", ("Campaign",), "Organization"),
)

_BUILTIN_DATATYPE_PROPERTIES = (
    DatatypePropertyDef("hasVersion", ("Software",), "string"),
    DatatypePropertyDef("hasReleaseYear", ("Software",), "integer"),
    DatatypePropertyDef("deliveredIn", ("Dropper",), "string"),
)


def builtin_malont() -> Ontology:
    return Ontology(
        tuple(ClassDef(name, sup) for name, sup in _BUILTIN_CLASSES),
        _BUILTIN_OBJECT_PROPERTIES,
        _BUILTIN_DATATYPE_PROPERTIES,
    )


def ontology_from_quads(quads: Iterable[Quad]) -> Ontology:
    """Rebuild an ontology from its reified form (the inverse of :func:`reify`).

    Definitions come back sorted by name, since quad order is not meaningful.
    """
    kinds, labels, supers, inverses = {}, {}, {}, {}
    domains: dict[str, list[str]] = {}
    ranges = {}
    datatype_names = {v: k for k, v in DATATYPES.items()}

    def local(term):
        if isinstance(term, Iri) and term.value.startswith(MALONT):
            return term.value[len(MALONT):]
        return None

    for q in quads:
        name = local(q.subject)
        if name is None:
            continue
        if q.predicate == RDF_TYPE:
            kinds[name] = q.object
        elif q.predicate == RDFS_LABEL and isinstance(q.object, Literal):
            labels[name] = q.object.lexical
        elif q.predicate == RDFS_SUBCLASS_OF:
            supers.setdefault(name, local(q.object))
        elif q.predicate == RDFS_DOMAIN:
            domains.setdefault(name, []).append(local(q.object))
        elif q.predicate == RDFS_RANGE:
            ranges[name] = local(q.object) or datatype_names.get(getattr(q.object, "value", None))
        elif q.predicate == OWL_INVERSE_OF:
            inverses[name] = local(q.object)

    classes, objprops, dataprops = [], [], []
    for name in sorted(kinds):
        label = labels.get(name, name)
        if kinds[name] == OWL_CLASS:
            classes.append(ClassDef(name, supers.get(name), label))
        elif kinds[name] == OWL_OBJECT_PROPERTY:
            objprops.append(ObjectPropertyDef(name, tuple(sorted(domains.get(name, ()))), ranges.get(name), inverses.get(name), label))
        elif kinds[name] == OWL_DATATYPE_PROPERTY:
            dataprops.append(DatatypePropertyDef(name, tuple(sorted(domains.get(name, ()))), ranges.get(name), label))
    return Ontology(tuple(classes), tuple(objprops), tuple(dataprops))


def load_ontology(source: str) -> Ontology:
    """``"builtin"`` or a path to a ``.mos`` file."""
    if source == "builtin":
        return builtin_malont()
    return load_schema(source)
