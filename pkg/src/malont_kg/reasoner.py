"""Forward-chaining materialization over an ontology, plus instance
conformance checks against declared domains and ranges.

Rules (conclusions land in the inferred graph):

R1-inverse                (s P o), P inverseOf Q        =>  (o Q s)
R2-subclass-transitive    (A sub B), (B sub C)          =>  (A sub C)
R3-type-inheritance       (x type C), (C sub D)         =>  (x type D)
R4-domain-typing          (s P o), P has one domain D   =>  (s type D)
R5-range-typing           (s P o), P object prop, range R => (o type R)

A conclusion is added only when its triple is absent from every graph, so
asserted facts are never duplicated into the inferred graph.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import MissingSchemaError
from .ontology import DATATYPES, Ontology, reify
from .store import Store
from .terms import (
    INFERRED_GRAPH,
    MALONT,
    OWL_INVERSE_OF,
    RDF_TYPE,
    RDFS_DOMAIN,
    RDFS_RANGE,
    RDFS_SUBCLASS_OF,
    SCHEMA_GRAPH,
    Iri,
    Literal,
    Provenance,
    Quad,
    canonical_term,
    malont,
    quad_key,
    quad_sort_key,
)

R1 = "R1-inverse"
R2 = "R2-subclass-transitive"
R3 = "R3-type-inheritance"
R4 = "R4-domain-typing"
R5 = "R5-range-typing"


@dataclass(frozen=True)
class InferenceRule:
    rule_id: str
    description: str


RULES = (
    InferenceRule(R1, "(s P o) and P inverseOf Q gives (o Q s)"),
    InferenceRule(R2, "rdfs:subClassOf is transitive over the schema"),
    InferenceRule(R3, "instances of a class are instances of its superclasses"),
    InferenceRule(R4, "subjects of a single-domain property are typed with that domain"),
    InferenceRule(R5, "objects of an object property are typed with its range"),
)


@dataclass
class InferenceReport:
    added_quads: int = 0
    iterations: int = 0
    per_rule: dict[str, int] = field(default_factory=lambda: {r.rule_id: 0 for r in RULES})


class _Materializer:
    def __init__(self, store: Store, ontology: Ontology):
        self.store = store
        self.report = InferenceReport()
        self.frontier: list[tuple] = []

        o = ontology
        self.inverse = {}
        for p in o.object_properties:
            if p.inverse:
                prop = malont(p.name)
                self.inverse[prop] = (malont(p.inverse), Quad(prop, OWL_INVERSE_OF, malont(p.inverse), SCHEMA_GRAPH))
        self.ancestors = {malont(c.name): tuple(malont(a) for a in o.ancestors(c.name)) for c in o.classes}
        self.single_domain = {}
        for p in (*o.object_properties, *o.datatype_properties):
            if len(p.domains) == 1:
                prop, dom = malont(p.name), malont(p.domains[0])
                self.single_domain[prop] = (dom, Quad(prop, RDFS_DOMAIN, dom, SCHEMA_GRAPH))
        self.object_range = {}
        for p in o.object_properties:
            prop, rng = malont(p.name), malont(p.range)
            self.object_range[prop] = (rng, Quad(prop, RDFS_RANGE, rng, SCHEMA_GRAPH))

    def _key(self, triple):
        """Key of one quad holding ``triple`` (its first graph)."""
        graph = self.store.graphs_of(triple)[0]
        return quad_key(Quad(*triple, graph))

    def add(self, triple, rule, premises):
        if self.store.graphs_of(triple):
            return
        keys = tuple(p if isinstance(p, str) else self._key(p) for p in premises)
        self.store.insert(Quad(*triple, INFERRED_GRAPH), Provenance.inference(rule, keys))
        self.report.added_quads += 1
        self.report.per_rule[rule] += 1
        self.frontier.append(triple)

    def close_subclasses(self):
        for cls, ups in self.ancestors.items():
            for i in range(1, len(ups)):
                self.add(
                    (cls, RDFS_SUBCLASS_OF, ups[i]),
                    R2,
                    ((cls, RDFS_SUBCLASS_OF, ups[i - 1]), (ups[i - 1], RDFS_SUBCLASS_OF, ups[i])),
                )

    def apply(self, triple):
        s, p, o = triple
        if p == RDF_TYPE:
            for up in self.ancestors.get(o, ()):
                self.add((s, RDF_TYPE, up), R3, (triple, (o, RDFS_SUBCLASS_OF, up)))
            return
        inv = self.inverse.get(p)
        if inv is not None and isinstance(o, Iri):
            self.add((o, inv[0], s), R1, (triple, quad_key(inv[1])))
        dom = self.single_domain.get(p)
        if dom is not None:
            self.add((s, RDF_TYPE, dom[0]), R4, (triple, quad_key(dom[1])))
        rng = self.object_range.get(p)
        if rng is not None and isinstance(o, Iri):
            self.add((o, RDF_TYPE, rng[0]), R5, (triple, quad_key(rng[1])))

    def run(self) -> InferenceReport:
        self.close_subclasses()
        work = list(self.store.triples())
        while True:
            self.report.iterations += 1
            self.frontier = []
            for triple in work:
                self.apply(triple)
            if not self.frontier:
                return self.report
            work = self.frontier


def _check_schema(store: Store, ontology: Ontology):
    if not store.count_estimate(g=SCHEMA_GRAPH):
        raise MissingSchemaError("store has no schema graph; insert the reified ontology first")
    missing = [q for q in reify(ontology) if q not in store]
    if missing:
        raise MissingSchemaError(
            f"schema graph does not match the ontology ({len(missing)} definitions missing, "
            f"e.g. {canonical_term(missing[0].subject)})"
        )


def materialize(store: Store, ontology: Ontology) -> InferenceReport:
    """Apply R1-R5 to fixpoint, inserting conclusions into the inferred graph."""
    _check_schema(store, ontology)
    return _Materializer(store, ontology).run()


@dataclass(frozen=True)
class ConformanceViolation:
    quad: Quad
    violated: str
    expected_classes: tuple[str, ...]
    actual_types: tuple[str, ...]
    reason: str = ""

    def __str__(self):
        q = self.quad
        text = (
            f"{self.violated}\t{canonical_term(q.subject)} {canonical_term(q.predicate)} "
            f"{canonical_term(q.object)} {canonical_term(q.graph)}\t"
            f"expected={','.join(self.expected_classes)}\tactual={','.join(self.actual_types)}"
        )
        return text + (f"\t{self.reason}" if self.reason else "")


_INTEGER = re.compile(r"[+-]?[0-9]+\Z")


def _local(iri: Iri):
    if iri.value.startswith(MALONT):
        return iri.value[len(MALONT):]
    return None


def validate_instances(store: Store, ontology: Ontology) -> list[ConformanceViolation]:
    """Check every asserted instance triple using a declared property.

    Inferred edges are not checked on their own: each one restates an
    asserted edge, which is where a problem gets reported.

    Types come from asserted rdf:type triples closed under the subclass
    hierarchy. Types the reasoner derived from domains and ranges are left
    out, since they would make those very constraints hold vacuously.
    """
    o = ontology
    types: dict[Iri, set[str]] = {}
    for quad in store.iter_match(p=RDF_TYPE):
        if quad.graph in (SCHEMA_GRAPH, INFERRED_GRAPH) or not isinstance(quad.object, Iri):
            continue
        name = _local(quad.object)
        if name is not None and o.has_class(name):
            bucket = types.setdefault(quad.subject, set())
            bucket.add(name)
            bucket.update(o.ancestors(name))

    def actual(term):
        return tuple(sorted(types.get(term, ())))

    violations = []
    for triple in store.triples():
        graphs = store.graphs_of(triple)
        graph = next((g for g in graphs if g not in (SCHEMA_GRAPH, INFERRED_GRAPH)), None)
        if graph is None:
            continue
        s, p, obj = triple
        name = _local(p)
        if name is None:
            continue
        quad = Quad(s, p, obj, graph)
        prop = o.object_property_map.get(name)
        dprop = o.datatype_property_map.get(name)
        if prop is None and dprop is None:
            continue
        definition = prop or dprop
        if not types.get(s, set()).intersection(definition.domains):
            violations.append(ConformanceViolation(quad, "domain", tuple(definition.domains), actual(s)))
        if prop is not None:
            if isinstance(obj, Literal):
                violations.append(
                    ConformanceViolation(quad, "range", (prop.range,), (), "literal object for object property")
                )
            elif prop.range not in types.get(obj, ()):
                violations.append(ConformanceViolation(quad, "range", (prop.range,), actual(obj)))
        else:
            reason = _datatype_problem(obj, dprop.range)
            if reason:
                actual_dt = (obj.datatype,) if isinstance(obj, Literal) else ()
                violations.append(ConformanceViolation(quad, "range", (dprop.range,), actual_dt, reason))
    violations.sort(key=lambda v: (quad_sort_key(v.quad), v.violated))
    return violations


def _datatype_problem(obj, range_name) -> str:
    if not isinstance(obj, Literal):
        return "IRI object for datatype property"
    if obj.datatype != DATATYPES[range_name]:
        return f"datatype {obj.datatype} is not {DATATYPES[range_name]}"
    if range_name == "integer" and not _INTEGER.match(obj.lexical):
        return f"invalid integer lexical {obj.lexical!r}"
    return ""
