"""A SPARQL subset: ``SELECT [DISTINCT] ?v... WHERE { basic graph pattern }``.

Prefixes come from a fixed table (rdf, rdfs, owl, xsd, malont, kg); there
are no PREFIX declarations. Matching runs over the union of all graphs,
treating a triple present in several graphs as one fact.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

from .errors import QuerySyntaxError, UnsupportedFeatureError
from .store import Store
from .terms import PREFIXES, RDF_TYPE, XSD_STRING, Iri, Literal, Term, canonical_term

UNSUPPORTED = {
    "FILTER", "OPTIONAL", "UNION", "MINUS", "BIND", "VALUES", "GRAPH", "SERVICE",
    "ORDER", "GROUP", "HAVING", "LIMIT", "OFFSET", "CONSTRUCT", "ASK", "DESCRIBE",
    "PREFIX", "BASE", "FROM", "NOT", "EXISTS", "REDUCED",
}


class UnknownPrefixError(QuerySyntaxError):
    pass


class Variable(NamedTuple):
    name: str

    def __str__(self):
        return "?" + self.name


Node = Union[Variable, Iri, Literal]


class TriplePattern(NamedTuple):
    subject: Node
    predicate: Node
    object: Node

    def variables(self):
        return [n.name for n in self if isinstance(n, Variable)]


@dataclass(frozen=True)
class SelectQuery:
    projected: tuple[str, ...]
    distinct: bool
    patterns: tuple[TriplePattern, ...]

    def unbound_projections(self) -> list[str]:
        seen = {v for p in self.patterns for v in p.variables()}
        return [v for v in self.projected if v not in seen]


@dataclass
class ResultTable:
    header: tuple[str, ...]
    rows: list[tuple[Optional[Term], ...]]


# --- tokenizer -------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<var>[?$][A-Za-z_][A-Za-z0-9_]*)
  | (?P<iri><[^\s<>]*>)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<dtype>\^\^)
  | (?P<pname>[A-Za-z][A-Za-z0-9_\-]*:(?:[A-Za-z0-9_](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?)?)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[{}.])
  | (?P<other>.)
    """,
    re.VERBOSE | re.DOTALL,
)

_STRING_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t", "'": "'"}


class _Token(NamedTuple):
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, line_start = 1, 0
    for m in _TOKEN.finditer(text):
        kind, value = m.lastgroup, m.group()
        column = m.start() - line_start + 1
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, value, line, column))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = m.start() + value.rindex("\n") + 1
    return tokens


# --- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> Optional[_Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self, expected="token") -> _Token:
        tok = self.peek()
        if tok is None:
            raise QuerySyntaxError(f"unexpected end of query, expected {expected}")
        self.pos += 1
        return tok

    def fail(self, tok, message):
        raise QuerySyntaxError(message, tok.line, tok.column)

    def check_unsupported(self, tok):
        if tok.kind == "other":
            if tok.text in "()*;,":
                feature = {"*": "SELECT *", ";": "predicate-object list", ",": "object list"}.get(tok.text, "expression")
                raise UnsupportedFeatureError(
                    feature, f"line {tok.line}, column {tok.column}: unsupported construct {tok.text!r}"
                )
            self.fail(tok, f"unexpected character {tok.text!r}")
        if tok.kind == "word" and tok.text.upper() in UNSUPPORTED:
            raise UnsupportedFeatureError(
                tok.text.upper(), f"line {tok.line}, column {tok.column}: {tok.text.upper()} is not supported"
            )

    def keyword(self, word):
        tok = self.next(word)
        self.check_unsupported(tok)
        if tok.kind != "word" or tok.text != word:
            self.fail(tok, f"expected {word}, got {tok.text!r}")

    def parse(self) -> SelectQuery:
        first = self.peek()
        if first is not None:
            self.check_unsupported(first)
        self.keyword("SELECT")
        distinct = False
        tok = self.peek()
        if tok is not None and tok.kind == "word" and tok.text == "DISTINCT":
            distinct = True
            self.pos += 1
        projected = []
        while (tok := self.peek()) is not None and tok.kind == "var":
            projected.append(tok.text[1:])
            self.pos += 1
        if not projected:
            tok = self.peek()
            if tok is None:
                raise QuerySyntaxError("expected at least one projected variable")
            self.check_unsupported(tok)
            self.fail(tok, "expected at least one projected variable")
        self.keyword("WHERE")
        tok = self.next("'{'")
        if tok.text != "{":
            self.fail(tok, "expected '{'")
        patterns = []
        while True:
            tok = self.peek()
            if tok is None:
                raise QuerySyntaxError("unterminated group: missing '}'")
            if tok.text == "}" and tok.kind == "punct":
                self.pos += 1
                break
            self.check_unsupported(tok)
            if tok.text == "{":
                raise UnsupportedFeatureError("nested group", f"line {tok.line}: nested groups are not supported")
            s = self.node(tok_role="subject")
            p = self.predicate()
            o = self.node(tok_role="object")
            patterns.append(TriplePattern(s, p, o))
            tok = self.peek()
            if tok is not None and tok.kind == "punct" and tok.text == ".":
                self.pos += 1
            elif tok is None or tok.text != "}":
                if tok is not None:
                    self.check_unsupported(tok)
                    self.fail(tok, f"expected '.' or '}}', got {tok.text!r}")
        tok = self.peek()
        if tok is not None:
            self.check_unsupported(tok)
            self.fail(tok, f"unexpected {tok.text!r} after query body")
        return SelectQuery(tuple(projected), distinct, tuple(patterns))

    def resolve(self, tok) -> Iri:
        if tok.kind == "iri":
            try:
                return Iri(tok.text[1:-1])
            except ValueError as exc:
                self.fail(tok, str(exc))
        prefix, _, local = tok.text.partition(":")
        if prefix not in PREFIXES:
            raise UnknownPrefixError(f"unknown prefix {prefix!r}", tok.line, tok.column)
        return Iri(PREFIXES[prefix] + local)

    def node(self, tok_role):
        tok = self.next(tok_role)
        self.check_unsupported(tok)
        if tok.kind == "var":
            return Variable(tok.text[1:])
        if tok.kind in ("pname", "iri"):
            return self.resolve(tok)
        if tok.kind == "string":
            lexical = re.sub(r"\\(.)", lambda m: self._unescape(m, tok), tok.text[1:-1])
            datatype = XSD_STRING
            nxt = self.peek()
            if nxt is not None and nxt.kind == "dtype":
                self.pos += 1
                dt = self.next("datatype")
                if dt.kind not in ("pname", "iri"):
                    self.fail(dt, "expected datatype name after '^^'")
                datatype = self.resolve(dt).value
            return Literal(lexical, datatype)
        self.fail(tok, f"expected {tok_role}, got {tok.text!r}")

    def _unescape(self, m, tok):
        ch = m.group(1)
        if ch not in _STRING_ESCAPES:
            self.fail(tok, f"invalid escape \\{ch}")
        return _STRING_ESCAPES[ch]

    def predicate(self):
        tok = self.peek()
        if tok is not None and tok.kind == "word" and tok.text == "a":
            self.pos += 1
            return RDF_TYPE
        if tok is not None and tok.kind == "string":
            self.fail(tok, "a literal cannot be a predicate")
        return self.node(tok_role="predicate")


def parse_query(text: str) -> SelectQuery:
    """Parse query source. Projected variables that no pattern binds only warn."""
    query = _Parser(text).parse()
    unbound = query.unbound_projections()
    if unbound:
        warnings.warn(f"projected variables never bound: {', '.join('?' + v for v in unbound)}", stacklevel=2)
    return query


# --- evaluation ------------------------------------------------------------


def _plan(store: Store, patterns) -> list[TriplePattern]:
    """Greedy join order: cheapest estimated pattern next, preferring ones that
    share a variable with what is already bound. Affects speed only."""
    remaining = list(patterns)
    bound: set[str] = set()
    order = []
    fan = {pos: store.fanout(pos) for pos in ("s", "o")}
    while remaining:
        best, best_cost = None, None
        for i, pat in enumerate(remaining):
            consts = [None if isinstance(n, Variable) else n for n in pat]
            cost = float(store.triple_estimate(*consts))
            s, _, o = pat
            if isinstance(s, Variable) and s.name in bound:
                cost = min(cost, fan["s"])
            if isinstance(o, Variable) and o.name in bound:
                cost = min(cost, fan["o"])
            connected = not bound or any(v in bound for v in pat.variables())
            if not connected and cost > 1:
                cost = cost * (1 + store.triple_count()) + 1
            if best_cost is None or cost < best_cost:
                best, best_cost = i, cost
        pat = remaining.pop(best)
        order.append(pat)
        bound.update(pat.variables())
    return order


def _solutions(store: Store, patterns):
    solutions = [{}]
    for pat in patterns:
        s, p, o = pat
        out = []
        for binding in solutions:
            cs = binding.get(s.name) if isinstance(s, Variable) else s
            cp = binding.get(p.name) if isinstance(p, Variable) else p
            co = binding.get(o.name) if isinstance(o, Variable) else o
            for triple in store.iter_triples(cs, cp, co):
                extended = binding
                ok = True
                for node, value in zip(pat, triple):
                    if isinstance(node, Variable):
                        current = extended.get(node.name)
                        if current is None:
                            if extended is binding:
                                extended = dict(binding)
                            extended[node.name] = value
                        elif current != value:
                            ok = False
                            break
                if ok:
                    out.append(extended)
        solutions = out
        if not solutions:
            break
    return solutions


def row_sort_key(row):
    return tuple("" if t is None else canonical_term(t) for t in row)


def evaluate(store: Store, query: SelectQuery) -> ResultTable:
    solutions = _solutions(store, _plan(store, query.patterns))
    rows = [tuple(b.get(v) for v in query.projected) for b in solutions]
    if query.distinct:
        rows = list(dict.fromkeys(rows))
    rows.sort(key=row_sort_key)
    return ResultTable(tuple(query.projected), rows)


def serialize_results(table: ResultTable) -> str:
    lines = ["\t".join("?" + v for v in table.header)]
    for row in table.rows:
        lines.append("\t".join("" if t is None else canonical_term(t) for t in row))
    return "\n".join(lines) + "\n"
