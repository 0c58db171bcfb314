"""N-Quads export/import (no blank nodes, no language tags) and the
provenance sidecar."""

from __future__ import annotations

import re

from .errors import InvalidTermError, NQuadsSyntaxError, UnsupportedFeatureError
from .store import Store
from .terms import (
    IMPORTED_RULE,
    SCHEMA_GRAPH,
    Iri,
    Literal,
    Provenance,
    Quad,
    Term,
    canonical_term,
    doc_id_of,
    quad_key,
    quad_sort_key,
)

_IRI = re.compile(r"<([^\s<>]+)>")
_LITERAL = re.compile(r'"((?:[^"\\]|\\.)*)"')
_WS = re.compile(r"[ \t]*")
_UNESCAPE = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t", "'": "'", "b": "\b", "f": "\f"}
_ESCAPE_SEQ = re.compile(r"\\(u[0-9A-Fa-f]{4}|U[0-9A-Fa-f]{8}|.)")

PROV_HEADER = "quad-key\tkind\tdoc-id\tannotation-ids\trule-id\tpremise-keys"


def _unescape(body: str, lineno, column) -> str:
    def repl(m):
        code = m.group(1)
        if code[0] in "uU" and len(code) > 1:
            return chr(int(code[1:], 16))
        if code in _UNESCAPE:
            return _UNESCAPE[code]
        raise NQuadsSyntaxError(f"invalid escape \\{code}", lineno, column)

    return _ESCAPE_SEQ.sub(repl, body)


def _read_term(line: str, pos: int, lineno: int, allow_literal: bool) -> tuple[Term, int]:
    if line.startswith("_:", pos):
        raise UnsupportedFeatureError("blank-node", f"line {lineno}: blank nodes are not supported")
    m = _IRI.match(line, pos)
    if m:
        try:
            return Iri(m.group(1)), m.end()
        except InvalidTermError as exc:
            raise NQuadsSyntaxError(str(exc), lineno, pos + 1) from None
    if allow_literal:
        m = _LITERAL.match(line, pos)
        if m:
            lexical = _unescape(m.group(1), lineno, pos + 1)
            end = m.end()
            datatype = None
            if line.startswith("^^", end):
                dm = _IRI.match(line, end + 2)
                if not dm:
                    raise NQuadsSyntaxError("expected datatype IRI after '^^'", lineno, end + 1)
                datatype, end = dm.group(1), dm.end()
            elif line.startswith("@", end):
                raise UnsupportedFeatureError("language-tag", f"line {lineno}: language-tagged literals are not supported")
            try:
                return Literal(lexical, datatype), end
            except InvalidTermError as exc:
                raise NQuadsSyntaxError(str(exc), lineno, pos + 1) from None
    what = "IRI or literal" if allow_literal else "IRI"
    raise NQuadsSyntaxError(f"expected {what}", lineno, pos + 1)


def parse_term(text: str) -> Term:
    """Parse a single canonical term; inverse of :func:`canonical_term`."""
    term, end = _read_term(text, 0, 1, allow_literal=True)
    if end != len(text):
        raise NQuadsSyntaxError("trailing characters after term", 1, end + 1)
    return term


def parse_line(line: str, lineno: int = 1) -> Quad:
    pos = _WS.match(line).end()
    terms = []
    for i in range(4):
        if i:
            ws = _WS.match(line, pos).end()
            if ws == pos:
                raise NQuadsSyntaxError("expected whitespace between terms", lineno, pos + 1)
            pos = ws
        term, pos = _read_term(line, pos, lineno, allow_literal=(i == 2))
        terms.append(term)
    pos = _WS.match(line, pos).end()
    if not line.startswith(".", pos) or line[pos + 1:].strip():
        raise NQuadsSyntaxError("expected terminal ' .'", lineno, pos + 1)
    return Quad(*terms)


def import_nquads(text: str) -> list[Quad]:
    quads = []
    # str.splitlines would also break on U+2028 and friends inside literals
    for lineno, line in enumerate(text.split("\n"), start=1):
        if line.endswith("\r"):
            line = line[:-1]
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        quads.append(parse_line(line, lineno))
    return quads


def import_provenance(quad: Quad) -> Provenance:
    """Provenance inferred from the graph an imported quad lives in."""
    if quad.graph == SCHEMA_GRAPH:
        return Provenance.schema()
    doc_id = doc_id_of(quad.graph)
    if doc_id:
        return Provenance.annotation(doc_id)
    return Provenance.inference(IMPORTED_RULE, ())


def load_store(text: str, store: Store | None = None) -> Store:
    store = Store() if store is None else store
    for quad in import_nquads(text):
        store.insert(quad, import_provenance(quad))
    return store


def read_store(path) -> Store:
    with open(path, encoding="utf-8") as fh:
        return load_store(fh.read())


def format_quad(quad: Quad) -> str:
    return (
        f"{canonical_term(quad.subject)} {canonical_term(quad.predicate)} "
        f"{canonical_term(quad.object)} {canonical_term(quad.graph)} .\n"
    )


def export_nquads(store) -> str:
    return "".join(format_quad(q) for q in sorted(store, key=quad_sort_key))


def export_provenance(store: Store) -> str:
    """Sidecar TSV: one row per provenance record; list cells comma-joined."""
    rows = [PROV_HEADER]
    for quad in sorted(store, key=quad_sort_key):
        key = quad_key(quad)
        for prov in store.provenance(quad):
            rows.append(
                "\t".join(
                    (
                        key,
                        prov.kind,
                        prov.doc_id,
                        ",".join(prov.annotation_ids),
                        prov.rule_id,
                        ",".join(prov.premise_keys),
                    )
                )
            )
    return "\n".join(rows) + "\n"
