"""Dictionary-encoded in-memory triple store.

Terms are interned into dense integer ids in first-seen order; triples are
stored as id-tuples together with SPO/POS/OSP hash indexes so that any
bound-position shape of a triple pattern resolves without a full scan.
Graphs are built single-writer, then frozen; every read path assumes an
immutable graph.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Iterable, Iterator, Optional

from .errors import KgCubeError, NTriplesError, StructuralError

XSD = "http://www.w3.org/2001/XMLSchema#"
XSD_INTEGER = XSD + "integer"
XSD_DOUBLE = XSD + "double"

_NUMERIC_DATATYPES = {
    XSD_INTEGER,
    XSD_DOUBLE,
    XSD + "decimal",
    XSD + "float",
    XSD + "int",
    XSD + "long",
    XSD + "short",
    XSD + "nonNegativeInteger",
}


class TermKind(Enum):
    IRI = "iri"
    BLANK = "blank"
    LITERAL = "literal"


@dataclass(frozen=True, slots=True)
class Term:
    kind: TermKind
    lexical: str
    datatype: str | None = None
    lang: str | None = None

    def __post_init__(self):
        if self.kind is not TermKind.LITERAL and (self.datatype or self.lang):
            raise ValueError("datatype/lang only apply to literals")
        if self.kind is TermKind.IRI and not self.lexical:
            raise ValueError("IRI must be non-empty")
        if (
            self.kind is TermKind.LITERAL
            and self.datatype in _NUMERIC_DATATYPES
            and numeric_from_lexical(self.lexical) is None
        ):
            raise ValueError(f"literal {self.lexical!r} not parseable as {self.datatype}")

    def sort_key(self) -> tuple:
        return (self.kind.value, self.lexical, self.datatype or "", self.lang or "")

    def to_ntriples(self) -> str:
        if self.kind is TermKind.IRI:
            return f"<{self.lexical}>"
        if self.kind is TermKind.BLANK:
            return f"_:{self.lexical}"
        out = f'"{escape_literal(self.lexical)}"'
        if self.lang:
            out += f"@{self.lang}"
        elif self.datatype:
            out += f"^^<{self.datatype}>"
        return out

    def to_json(self) -> dict:
        d: dict = {"kind": self.kind.value, "lexical": self.lexical}
        if self.datatype:
            d["datatype"] = self.datatype
        if self.lang:
            d["lang"] = self.lang
        return d


def iri(value: str) -> Term:
    return Term(TermKind.IRI, value)


def bnode(label: str) -> Term:
    return Term(TermKind.BLANK, label)


def literal(lexical: str, datatype: str | None = None, lang: str | None = None) -> Term:
    return Term(TermKind.LITERAL, lexical, datatype, lang)


_INT_RE = re.compile(r"[+-]?[0-9]+\Z")
_DECIMAL_RE = re.compile(r"[+-]?(?:[0-9]+\.[0-9]*|\.[0-9]+|[0-9]+)(?:[eE][+-]?[0-9]+)?\Z")


def numeric_from_lexical(lexical: str) -> int | float | None:
    """Integer lexical forms stay exact ints; decimal forms become floats."""
    if _INT_RE.match(lexical):
        return int(lexical)
    if _DECIMAL_RE.match(lexical):
        return float(lexical)
    return None


def numeric_value(term: Term) -> int | float | None:
    """Numeric value of a literal, or None for IRIs/bnodes/non-numeric text."""
    if term.kind is not TermKind.LITERAL:
        return None
    return numeric_from_lexical(term.lexical)


def literal_for_number(value: int | float) -> Term:
    """Encode a number as a typed literal: xsd:integer for ints, xsd:double otherwise."""
    if isinstance(value, int):
        return Term(TermKind.LITERAL, str(value), XSD_INTEGER)
    return Term(TermKind.LITERAL, repr(float(value)), XSD_DOUBLE)


def escape_literal(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )


@dataclass
class GraphStats:
    """Per-predicate frequencies used for join planning and cost features."""

    predicate_counts: dict[str, int] = field(default_factory=dict)
    predicate_distinct_subjects: dict[str, int] = field(default_factory=dict)
    predicate_distinct_objects: dict[str, int] = field(default_factory=dict)
    total_triples: int = 0
    total_terms: int = 0

    def to_json(self) -> dict:
        return {
            "totalTriples": self.total_triples,
            "totalTerms": self.total_terms,
            "predicates": {
                p: {
                    "triples": self.predicate_counts[p],
                    "distinctSubjects": self.predicate_distinct_subjects[p],
                    "distinctObjects": self.predicate_distinct_objects[p],
                }
                for p in sorted(self.predicate_counts)
            },
        }


class Graph:
    """A set of dictionary-encoded triples with SPO/POS/OSP indexes.

    Construction is single-writer: `add` until `freeze()`, after which the
    graph is immutable and safe for concurrent readers.
    """

    __slots__ = ("_terms", "_ids", "_triples", "_spo", "_pos", "_osp", "_frozen", "_stats", "__weakref__")

    def __init__(self):
        self._terms: list[Term] = []
        self._ids: dict[Term, int] = {}
        self._triples: set[tuple[int, int, int]] = set()
        self._spo: dict[int, dict[int, set[int]]] = {}
        self._pos: dict[int, dict[int, set[int]]] = {}
        self._osp: dict[int, dict[int, set[int]]] = {}
        self._frozen = False
        self._stats: GraphStats | None = None

    # -- construction ------------------------------------------------------

    def intern(self, term: Term) -> int:
        tid = self._ids.get(term)
        if tid is None:
            if self._frozen:
                raise KgCubeError("graph is frozen")
            tid = len(self._terms)
            self._terms.append(term)
            self._ids[term] = tid
        return tid

    def add(self, s: Term, p: Term, o: Term) -> None:
        if self._frozen:
            raise KgCubeError("graph is frozen")
        if s.kind is TermKind.LITERAL:
            raise StructuralError(f"literal subject {s.to_ntriples()}")
        if p.kind is not TermKind.IRI:
            raise StructuralError(f"non-IRI predicate {p.to_ntriples()}")
        sid, pid, oid = self.intern(s), self.intern(p), self.intern(o)
        triple = (sid, pid, oid)
        if triple in self._triples:
            return
        self._triples.add(triple)
        self._spo.setdefault(sid, {}).setdefault(pid, set()).add(oid)
        self._pos.setdefault(pid, {}).setdefault(oid, set()).add(sid)
        self._osp.setdefault(oid, {}).setdefault(sid, set()).add(pid)

    def freeze(self) -> "Graph":
        self._frozen = True
        return self

    @classmethod
    def from_triples(cls, triples: Iterable[tuple[Term, Term, Term]]) -> "Graph":
        g = cls()
        for s, p, o in triples:
            g.add(s, p, o)
        return g.freeze()

    # -- lookups -----------------------------------------------------------

    def term(self, tid: int) -> Term:
        return self._terms[tid]

    def term_id(self, term: Term) -> Optional[int]:
        return self._ids.get(term)

    @property
    def n_triples(self) -> int:
        return len(self._triples)

    @property
    def n_terms(self) -> int:
        return len(self._terms)

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, spo: tuple[Term, Term, Term]) -> bool:
        ids = tuple(self._ids.get(t) for t in spo)
        return None not in ids and ids in self._triples

    def triples(self) -> Iterator[tuple[Term, Term, Term]]:
        for sid, pid, oid in self._triples:
            yield self._terms[sid], self._terms[pid], self._terms[oid]

    # -- pattern matching ----------------------------------------------------

    def match_ids(
        self, sid: int | None, pid: int | None, oid: int | None
    ) -> Iterator[tuple[int, int, int]]:
        """All id-triples agreeing with every bound position.

        The index is chosen by the bound-position shape; an unbound pattern
        streams the whole triple set.
        """
        if sid is not None and pid is not None and oid is not None:
            if (sid, pid, oid) in self._triples:
                yield (sid, pid, oid)
        elif sid is not None and pid is not None:
            for o in self._spo.get(sid, {}).get(pid, ()):
                yield (sid, pid, o)
        elif pid is not None and oid is not None:
            for s in self._pos.get(pid, {}).get(oid, ()):
                yield (s, pid, oid)
        elif sid is not None and oid is not None:
            for p in self._osp.get(oid, {}).get(sid, ()):
                yield (sid, p, oid)
        elif sid is not None:
            for p, objs in self._spo.get(sid, {}).items():
                for o in objs:
                    yield (sid, p, o)
        elif pid is not None:
            for o, subs in self._pos.get(pid, {}).items():
                for s in subs:
                    yield (s, pid, o)
        elif oid is not None:
            for s, preds in self._osp.get(oid, {}).items():
                for p in preds:
                    yield (s, p, oid)
        else:
            yield from self._triples

    def match(
        self, s: Term | None = None, p: Term | None = None, o: Term | None = None
    ) -> Iterator[tuple[Term, Term, Term]]:
        """Stream triples matching the pattern; unbound positions are None."""
        ids = []
        for t in (s, p, o):
            if t is None:
                ids.append(None)
            else:
                tid = self._ids.get(t)
                if tid is None:
                    return  # term not in dictionary: nothing can match
                ids.append(tid)
        for sid, pid, oid in self.match_ids(*ids):
            yield self._terms[sid], self._terms[pid], self._terms[oid]

    def count_pattern(self, sid: int | None, pid: int | None, oid: int | None) -> int:
        """Exact match count from index sizes (no triple materialization)."""
        if sid is not None and pid is not None and oid is not None:
            return 1 if (sid, pid, oid) in self._triples else 0
        if sid is not None and pid is not None:
            return len(self._spo.get(sid, {}).get(pid, ()))
        if pid is not None and oid is not None:
            return len(self._pos.get(pid, {}).get(oid, ()))
        if sid is not None and oid is not None:
            return len(self._osp.get(oid, {}).get(sid, ()))
        if sid is not None:
            return sum(len(v) for v in self._spo.get(sid, {}).values())
        if pid is not None:
            return sum(len(v) for v in self._pos.get(pid, {}).values())
        if oid is not None:
            return sum(len(v) for v in self._osp.get(oid, {}).values())
        return len(self._triples)

    # -- statistics ----------------------------------------------------------

    def stats(self) -> GraphStats:
        if self._stats is None:
            counts: dict[str, int] = {}
            subjects: dict[str, set[int]] = {}
            objects: dict[str, set[int]] = {}
            for sid, pid, oid in self._triples:
                p = self._terms[pid].lexical
                counts[p] = counts.get(p, 0) + 1
                subjects.setdefault(p, set()).add(sid)
                objects.setdefault(p, set()).add(oid)
            self._stats = GraphStats(
                predicate_counts=counts,
                predicate_distinct_subjects={p: len(v) for p, v in subjects.items()},
                predicate_distinct_objects={p: len(v) for p, v in objects.items()},
                total_triples=len(self._triples),
                total_terms=len(self._terms),
            )
        return self._stats

    # -- serialization -------------------------------------------------------

    def serialize(self) -> str:
        """Graph as N-Triples text, sorted for run-to-run determinism."""
        lines = [
            f"{s.to_ntriples()} {p.to_ntriples()} {o.to_ntriples()} ."
            for s, p, o in self.triples()
        ]
        return "".join(line + "\n" for line in sorted(lines))


# -- N-Triples parsing --------------------------------------------------------

_ESCAPES = {"t": "\t", "n": "\n", "r": "\r", "b": "\b", "f": "\f", '"': '"', "\\": "\\", "'": "'"}


def _unescape(raw: str, line_no: int) -> str:
    if "\\" not in raw:
        return raw
    out: list[str] = []
    i = 0
    while i < len(raw):
        ch = raw[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        if i + 1 >= len(raw):
            raise NTriplesError("dangling escape", line_no)
        esc = raw[i + 1]
        if esc in _ESCAPES:
            out.append(_ESCAPES[esc])
            i += 2
        elif esc == "u" or esc == "U":
            width = 4 if esc == "u" else 8
            hexpart = raw[i + 2 : i + 2 + width]
            if len(hexpart) != width:
                raise NTriplesError("truncated unicode escape", line_no)
            try:
                out.append(chr(int(hexpart, 16)))
            except ValueError:
                raise NTriplesError(f"bad unicode escape \\{esc}{hexpart}", line_no) from None
            i += 2 + width
        else:
            raise NTriplesError(f"unknown escape \\{esc}", line_no)
    return "".join(out)


class _LineScanner:
    def __init__(self, line: str, line_no: int):
        self.line = line
        self.pos = 0
        self.line_no = line_no

    def error(self, message: str) -> NTriplesError:
        return NTriplesError(message, self.line_no)

    def skip_ws(self) -> None:
        while self.pos < len(self.line) and self.line[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        return self.pos >= len(self.line)

    def expect(self, ch: str) -> None:
        if self.at_end() or self.line[self.pos] != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def read_iri(self) -> Term:
        self.expect("<")
        end = self.line.find(">", self.pos)
        if end < 0:
            raise self.error("unterminated IRI")
        value = self.line[self.pos : end]
        if not value or any(c in value for c in ' "<{}|^`'):
            raise self.error(f"invalid IRI <{value}>")
        self.pos = end + 1
        return iri(value)

    def read_bnode(self) -> Term:
        self.pos += 2  # "_:"
        start = self.pos
        while self.pos < len(self.line) and self.line[self.pos] not in " \t":
            self.pos += 1
        label = self.line[start : self.pos]
        if not label:
            raise self.error("empty blank node label")
        return bnode(label)

    def read_literal(self) -> Term:
        self.expect('"')
        out: list[str] = []
        while True:
            if self.at_end():
                raise self.error("unterminated literal")
            ch = self.line[self.pos]
            if ch == "\\":
                if self.pos + 1 >= len(self.line):
                    raise self.error("dangling escape")
                out.append(self.line[self.pos : self.pos + 2])
                self.pos += 2
            elif ch == '"':
                self.pos += 1
                break
            else:
                out.append(ch)
                self.pos += 1
        lexical = _unescape("".join(out), self.line_no)
        datatype = None
        lang = None
        if self.pos < len(self.line) and self.line[self.pos] == "@":
            self.pos += 1
            start = self.pos
            while self.pos < len(self.line) and (self.line[self.pos].isalnum() or self.line[self.pos] == "-"):
                self.pos += 1
            lang = self.line[start : self.pos]
            if not lang:
                raise self.error("empty language tag")
        elif self.line.startswith("^^", self.pos):
            self.pos += 2
            datatype = self.read_iri().lexical
        try:
            return literal(lexical, datatype, lang)
        except ValueError as exc:
            raise self.error(str(exc)) from None

    def read_subject(self) -> Term:
        if self.line.startswith("_:", self.pos):
            return self.read_bnode()
        if not self.at_end() and self.line[self.pos] == "<":
            return self.read_iri()
        raise self.error("subject must be an IRI or blank node")

    def read_object(self) -> Term:
        if self.at_end():
            raise self.error("missing object")
        ch = self.line[self.pos]
        if ch == "<":
            return self.read_iri()
        if ch == '"':
            return self.read_literal()
        if self.line.startswith("_:", self.pos):
            return self.read_bnode()
        raise self.error("object must be an IRI, blank node or literal")


def parse_ntriples_line(line: str, line_no: int) -> tuple[Term, Term, Term] | None:
    """One triple from one line, or None for blank/comment lines."""
    sc = _LineScanner(line.rstrip("\r\n"), line_no)
    sc.skip_ws()
    if sc.at_end() or sc.line[sc.pos] == "#":
        return None
    s = sc.read_subject()
    sc.skip_ws()
    if sc.at_end() or sc.line[sc.pos] != "<":
        raise StructuralError(f"line {line_no}: predicate must be an IRI")
    p = sc.read_iri()
    sc.skip_ws()
    o = sc.read_object()
    sc.skip_ws()
    sc.expect(".")
    sc.skip_ws()
    if not sc.at_end() and sc.line[sc.pos] != "#":
        raise sc.error("trailing content after '.'")
    return s, p, o


def load_ntriples(source: str | bytes | IO) -> Graph:
    """Parse line-oriented N-Triples into a frozen graph (duplicates collapse)."""
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    g = Graph()
    for line_no, line in enumerate(text.splitlines(), start=1):
        parsed = parse_ntriples_line(line, line_no)
        if parsed is not None:
            g.add(*parsed)
    return g.freeze()
