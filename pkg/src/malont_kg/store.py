"""In-memory indexed quad store with per-quad provenance."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Optional

from .errors import InvalidQuadError
from .terms import (
    OWL_CLASS,
    OWL_DATATYPE_PROPERTY,
    OWL_NAMED_INDIVIDUAL,
    OWL_OBJECT_PROPERTY,
    RDF_TYPE,
    SCHEMA_GRAPH,
    Iri,
    Literal,
    Provenance,
    Quad,
    Term,
    canonical_term,
    quad_key,
    quad_sort_key,
)


class QuadPattern(NamedTuple):
    """``None`` in any position is a wildcard."""

    subject: Optional[Iri] = None
    predicate: Optional[Iri] = None
    object: Optional[Term] = None
    graph: Optional[Iri] = None

    def check(self):
        for name in ("subject", "predicate", "graph"):
            value = getattr(self, name)
            if value is not None and not isinstance(value, Iri):
                raise InvalidQuadError(f"pattern {name} must be an IRI or wildcard, got {value!r}")
        if self.object is not None and not isinstance(self.object, (Iri, Literal)):
            raise InvalidQuadError(f"pattern object must be a term or wildcard, got {self.object!r}")
        return self

    def matches(self, quad: Quad) -> bool:
        return (
            (self.subject is None or self.subject == quad.subject)
            and (self.predicate is None or self.predicate == quad.predicate)
            and (self.object is None or self.object == quad.object)
            and (self.graph is None or self.graph == quad.graph)
        )


@dataclass
class StatsReport:
    quads: int = 0
    subjects: int = 0
    instances: int = 0
    classes: int = 0
    object_properties: int = 0
    datatype_properties: int = 0
    graphs: dict[str, int] = field(default_factory=dict)

    def lines(self) -> list[str]:
        out = [
            f"quads\t{self.quads}",
            f"subjects\t{self.subjects}",
            f"instances\t{self.instances}",
            f"classes\t{self.classes}",
            f"object-properties\t{self.object_properties}",
            f"datatype-properties\t{self.datatype_properties}",
            f"graphs\t{len(self.graphs)}",
        ]
        out.extend(f"graph {g}\t{n}" for g, n in sorted(self.graphs.items()))
        return out


class Store:
    """Set of quads with subject, predicate, object, (predicate, object) and
    graph indexes.

    Index buckets are append-only lists in insertion order, so iteration is
    deterministic without sorting. There is no deletion.
    """

    def __init__(self, quads: Iterable[tuple[Quad, Provenance]] = ()):
        self._prov: dict[Quad, list[Provenance]] = {}
        self._by_s: dict[Term, list[Quad]] = {}
        self._by_p: dict[Term, list[Quad]] = {}
        self._by_o: dict[Term, list[Quad]] = {}
        self._by_po: dict[tuple, list[Quad]] = {}
        self._by_g: dict[Term, list[Quad]] = {}
        # triple-level indexes: one entry per distinct (s, p, o) across graphs
        self._triples: dict[tuple, list[Iri]] = {}
        self._t_by_s: dict[Term, list[tuple]] = {}
        self._t_by_p: dict[Term, list[tuple]] = {}
        self._t_by_o: dict[Term, list[tuple]] = {}
        self._t_by_po: dict[tuple, list[tuple]] = {}
        for quad, prov in quads:
            self.insert(quad, prov)

    def __len__(self):
        return len(self._prov)

    def __contains__(self, quad):
        return quad in self._prov

    def __iter__(self) -> Iterator[Quad]:
        return iter(self._prov)

    def insert(self, quad: Quad, prov: Provenance) -> bool:
        """Add ``quad``; returns True iff it was not already present.

        ``prov`` is recorded either way.
        """
        if not isinstance(quad, Quad):
            raise InvalidQuadError(f"not a quad: {quad!r}")
        if not isinstance(prov, Provenance):
            raise TypeError(f"not a provenance record: {prov!r}")
        records = self._prov.get(quad)
        if records is not None:
            records.append(prov)
            return False
        self._prov[quad] = [prov]
        s, p, o, g = quad.subject, quad.predicate, quad.object, quad.graph
        self._by_s.setdefault(s, []).append(quad)
        self._by_p.setdefault(p, []).append(quad)
        self._by_o.setdefault(o, []).append(quad)
        self._by_po.setdefault((p, o), []).append(quad)
        self._by_g.setdefault(g, []).append(quad)
        triple = (s, p, o)
        graphs = self._triples.get(triple)
        if graphs is None:
            self._triples[triple] = [g]
            self._t_by_s.setdefault(s, []).append(triple)
            self._t_by_p.setdefault(p, []).append(triple)
            self._t_by_o.setdefault(o, []).append(triple)
            self._t_by_po.setdefault((p, o), []).append(triple)
        else:
            graphs.append(g)
        return True

    def insert_all(self, items: Iterable[tuple[Quad, Provenance]]) -> int:
        return sum(self.insert(q, p) for q, p in items)

    def provenance(self, quad: Quad) -> list[Provenance]:
        return list(self._prov.get(quad, ()))

    def has_triple(self, s, p, o) -> bool:
        return (s, p, o) in self._triples

    def triples(self) -> Iterator[tuple]:
        """Distinct (s, p, o) triples, across all graphs, in insertion order."""
        return iter(self._triples)

    def triple_count(self) -> int:
        return len(self._triples)

    def graphs_of(self, triple) -> list[Iri]:
        """Graphs holding ``triple``, in insertion order (empty if absent)."""
        return self._triples.get(triple, [])

    def _triple_candidates(self, s=None, p=None, o=None):
        best = None
        if p is not None and o is not None:
            best = self._t_by_po.get((p, o), ())
        for value, index in ((s, self._t_by_s), (o, self._t_by_o), (p, self._t_by_p)):
            if value is not None:
                bucket = index.get(value, ())
                if best is None or len(bucket) < len(best):
                    best = bucket
        return self._triples.keys() if best is None else best

    def iter_triples(self, s=None, p=None, o=None) -> Iterator[tuple]:
        """Distinct matching triples, graph ignored (default-union view)."""
        if s is not None and p is not None and o is not None:
            if (s, p, o) in self._triples:
                yield (s, p, o)
            return
        for t in self._triple_candidates(s, p, o):
            if (s is None or t[0] == s) and (p is None or t[1] == p) and (o is None or t[2] == o):
                yield t

    def triple_estimate(self, s=None, p=None, o=None) -> int:
        if s is not None and p is not None and o is not None:
            return 1
        return len(self._triple_candidates(s, p, o))

    def fanout(self, position: str) -> float:
        """Average number of triples per distinct key at ``position`` (s, p, o or po)."""
        index = {"s": self._t_by_s, "p": self._t_by_p, "o": self._t_by_o, "po": self._t_by_po}[position]
        return len(self._triples) / len(index) if index else 0.0

    def graphs(self) -> list[Iri]:
        return list(self._by_g)

    def _candidates(self, s=None, p=None, o=None, g=None):
        """Smallest index bucket covering the concrete positions (unsorted,
        may contain non-matches in the other positions)."""
        best = None
        if p is not None and o is not None:
            best = self._by_po.get((p, o), ())
        for value, index in ((s, self._by_s), (o, self._by_o), (p, self._by_p), (g, self._by_g)):
            if value is not None:
                bucket = index.get(value, ())
                if best is None or len(bucket) < len(best):
                    best = bucket
                if not best:
                    return ()
        return self._prov.keys() if best is None else best

    def iter_match(self, s=None, p=None, o=None, g=None) -> Iterator[Quad]:
        """Unsorted matching quads; the hot path for the query engine and reasoner."""
        for q in self._candidates(s, p, o, g):
            if (
                (s is None or q.subject == s)
                and (p is None or q.predicate == p)
                and (o is None or q.object == o)
                and (g is None or q.graph == g)
            ):
                yield q

    def count_estimate(self, s=None, p=None, o=None, g=None) -> int:
        return len(self._candidates(s, p, o, g))

    def match(self, pattern: QuadPattern = QuadPattern()) -> list[Quad]:
        """Quads agreeing with every concrete position, sorted by (graph, s, p, o)."""
        pattern = QuadPattern(*pattern).check()
        return sorted(self.iter_match(*pattern), key=quad_sort_key)

    def stats(self) -> StatsReport:
        report = StatsReport(quads=len(self), subjects=len(self._by_s))
        report.instances = len({q.subject for q in self._by_po.get((RDF_TYPE, OWL_NAMED_INDIVIDUAL), ())})
        report.graphs = {canonical_term(g): len(qs) for g, qs in self._by_g.items()}
        if SCHEMA_GRAPH in self._by_g:
            for attr, kind in (
                ("classes", OWL_CLASS),
                ("object_properties", OWL_OBJECT_PROPERTY),
                ("datatype_properties", OWL_DATATYPE_PROPERTY),
            ):
                subjects = {q.subject for q in self.iter_match(p=RDF_TYPE, o=kind, g=SCHEMA_GRAPH)}
                setattr(report, attr, len(subjects))
        return report

    def keys(self) -> set[str]:
        return {quad_key(q) for q in self._prov}
