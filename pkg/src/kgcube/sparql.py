"""Parser and renderer for the analytical query grammar.

Grammar (keywords case-insensitive, PREFIX declarations allowed):

    PREFIX name: <iri>                                          (zero or more)
    SELECT var* ( AGG ( var ) AS var )
    WHERE { triplePattern ( . triplePattern )*
            ( FILTER ( var CMP constant ) )* }
    GROUP BY var+

AGG is one of SUM, AVG, COUNT, MAX, MIN; CMP one of = != < <= > >=; IRIs in
angle brackets or prefixed names; constants may be IRIs, numbers or quoted
literals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import QuerySemanticError, QuerySyntaxError
from .query import Agg, AnalyticalQuery, FilterExpr, TriplePattern, Variable
from .store import Term, iri, literal

_TOKEN_RE = re.compile(
    r"""
    (?P<WS>\s+)
  | (?P<COMMENT>\#[^\n]*)
  | (?P<IRIREF><[^<>"{}|^`\\\s]*>)
  | (?P<VAR>\?\w+)
  | (?P<NUMBER>[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<STRING>"(?:[^"\\]|\\.)*")
  | (?P<LANGTAG>@[A-Za-z]+(?:-[A-Za-z0-9]+)*)
  | (?P<DTYPE>\^\^)
  | (?P<PNAME>[A-Za-z_][\w-]*:[\w.-]*)
  | (?P<NAME>[A-Za-z_]\w*)
  | (?P<CMP><=|>=|!=|=|<|>)
  | (?P<PUNCT>[(){}.;,])
""",
    re.VERBOSE,
)

_KEYWORDS = {"select", "where", "group", "by", "as", "filter", "prefix"}
_AGGREGATES = {"sum": Agg.SUM, "avg": Agg.AVG, "count": Agg.COUNT, "max": Agg.MAX, "min": Agg.MIN}

_STRING_ESCAPES = {"t": "\t", "n": "\n", "r": "\r", "b": "\b", "f": "\f", '"': '"', "\\": "\\", "'": "'"}


@dataclass(frozen=True)
class _Token:
    type: str
    value: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        assert kind is not None
        if kind not in ("WS", "COMMENT"):
            tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("EOF", "", len(text)))
    return tokens


def _unescape_string(raw: str, pos: int) -> str:
    body = raw[1:-1]
    if "\\" not in body:
        return body
    out: list[str] = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        esc = body[i + 1]
        if esc in _STRING_ESCAPES:
            out.append(_STRING_ESCAPES[esc])
            i += 2
        elif esc in "uU":
            width = 4 if esc == "u" else 8
            hexpart = body[i + 2 : i + 2 + width]
            try:
                out.append(chr(int(hexpart, 16)))
            except ValueError:
                raise QuerySyntaxError(f"bad unicode escape in string", pos) from None
            i += 2 + width
        else:
            raise QuerySyntaxError(f"unknown escape \\{esc}", pos)
    return "".join(out)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.idx = 0
        self.prefixes: dict[str, str] = {}

    # -- token helpers ----------------------------------------------------

    @property
    def cur(self) -> _Token:
        return self.tokens[self.idx]

    def advance(self) -> _Token:
        tok = self.cur
        if tok.type != "EOF":
            self.idx += 1
        return tok

    def error(self, message: str) -> QuerySyntaxError:
        return QuerySyntaxError(message, self.cur.pos)

    def at_keyword(self, word: str) -> bool:
        return self.cur.type == "NAME" and self.cur.value.lower() == word

    def expect_keyword(self, word: str) -> None:
        if not self.at_keyword(word):
            raise self.error(f"expected {word.upper()}")
        self.advance()

    def expect_punct(self, ch: str) -> None:
        if not (self.cur.type in ("PUNCT", "CMP") and self.cur.value == ch):
            raise self.error(f"expected {ch!r}")
        self.advance()

    def accept_punct(self, ch: str) -> bool:
        if self.cur.type == "PUNCT" and self.cur.value == ch:
            self.advance()
            return True
        return False

    def expect_var(self) -> str:
        if self.cur.type != "VAR":
            raise self.error("expected a ?variable")
        return self.advance().value[1:]

    # -- terms -------------------------------------------------------------

    def resolve_pname(self, tok: _Token) -> Term:
        prefix, _, local = tok.value.partition(":")
        ns = self.prefixes.get(prefix)
        if ns is None:
            raise QuerySemanticError(f"undeclared prefix {prefix}:")
        return iri(ns + local)

    def parse_term(self) -> Term:
        tok = self.cur
        if tok.type == "IRIREF":
            self.advance()
            return iri(tok.value[1:-1])
        if tok.type == "PNAME":
            self.advance()
            return self.resolve_pname(tok)
        if tok.type == "NUMBER":
            self.advance()
            return literal(tok.value)
        if tok.type == "STRING":
            self.advance()
            lexical = _unescape_string(tok.value, tok.pos)
            if self.cur.type == "LANGTAG":
                lang = self.advance().value[1:]
                return literal(lexical, lang=lang)
            if self.cur.type == "DTYPE":
                self.advance()
                if self.cur.type == "IRIREF":
                    dtype = self.advance().value[1:-1]
                elif self.cur.type == "PNAME":
                    dtype = self.resolve_pname(self.advance()).lexical
                else:
                    raise self.error("expected datatype IRI after ^^")
                return literal(lexical, datatype=dtype)
            return literal(lexical)
        raise self.error("expected an IRI, literal or number")

    def parse_pattern_part(self):
        if self.cur.type == "VAR":
            return Variable(self.advance().value[1:])
        return self.parse_term()

    # -- clauses -----------------------------------------------------------

    def parse_prefixes(self) -> None:
        while self.at_keyword("prefix"):
            self.advance()
            if self.cur.type != "PNAME" or not self.cur.value.endswith(":"):
                raise self.error("expected prefix name ending in ':'")
            name = self.advance().value[:-1]
            if self.cur.type != "IRIREF":
                raise self.error("expected <iri> in PREFIX declaration")
            self.prefixes[name] = self.advance().value[1:-1]

    def parse_aggregate(self) -> tuple[Agg, str]:
        self.expect_punct("(")
        if self.cur.type != "NAME":
            raise self.error("expected aggregate function")
        agg_name = self.cur.value.lower()
        if agg_name not in _AGGREGATES:
            raise QuerySemanticError(f"unsupported aggregate {self.cur.value.upper()}")
        self.advance()
        self.expect_punct("(")
        agg_var = self.expect_var()
        self.expect_punct(")")
        self.expect_keyword("as")
        self.expect_var()  # output alias, cosmetic
        self.expect_punct(")")
        return _AGGREGATES[agg_name], agg_var

    def parse_triple_pattern(self) -> TriplePattern:
        s = self.parse_pattern_part()
        p = self.parse_pattern_part()
        o = self.parse_pattern_part()
        try:
            return TriplePattern(s, p, o)
        except ValueError as exc:
            raise QuerySemanticError(str(exc)) from None

    def parse_filter(self) -> FilterExpr:
        self.advance()  # FILTER
        self.expect_punct("(")
        var = self.expect_var()
        if self.cur.type != "CMP":
            raise self.error("expected comparator")
        op = self.advance().value
        constant = self.parse_term()
        self.expect_punct(")")
        try:
            return FilterExpr(var, op, constant)
        except ValueError as exc:
            raise QuerySemanticError(str(exc)) from None

    def parse_where(self) -> tuple[tuple[TriplePattern, ...], tuple[FilterExpr, ...]]:
        self.expect_keyword("where")
        self.expect_punct("{")
        patterns = [self.parse_triple_pattern()]
        while self.accept_punct("."):
            if self.cur.type == "PUNCT" and self.cur.value == "}":
                break
            if self.at_keyword("filter"):
                break
            patterns.append(self.parse_triple_pattern())
        filters: list[FilterExpr] = []
        while self.at_keyword("filter"):
            filters.append(self.parse_filter())
            self.accept_punct(".")
        self.expect_punct("}")
        seen: set[TriplePattern] = set()
        unique = [tp for tp in patterns if not (tp in seen or seen.add(tp))]
        return tuple(unique), tuple(filters)

    def parse_query(self) -> AnalyticalQuery:
        self.parse_prefixes()
        self.expect_keyword("select")
        select_vars: list[str] = []
        while self.cur.type == "VAR":
            select_vars.append(self.expect_var())
        agg, agg_var = self.parse_aggregate()
        pattern, filters = self.parse_where()
        self.expect_keyword("group")
        self.expect_keyword("by")
        group_vars = [self.expect_var()]
        while self.cur.type == "VAR":
            group_vars.append(self.expect_var())
        if self.cur.type != "EOF":
            raise self.error("unexpected trailing content")
        if set(select_vars) != set(group_vars):
            raise QuerySemanticError("SELECT variables must match GROUP BY variables")
        return AnalyticalQuery(tuple(group_vars), pattern, filters, agg, agg_var)


def parse_query(text: str) -> AnalyticalQuery:
    """Parse query text into a validated AnalyticalQuery."""
    return _Parser(text).parse_query()


def query_to_text(q: AnalyticalQuery) -> str:
    """Render a query back into the grammar (display form; an apex query with
    no grouping variables omits the GROUP BY clause)."""
    head = " ".join(f"?{v}" for v in q.group_vars)
    if head:
        head += " "
    parts = " . ".join(str(tp) for tp in q.pattern)
    filters = "".join(f" {f}" for f in q.filters)
    text = f"SELECT {head}({q.agg.value}(?{q.agg_var}) AS ?agg) WHERE {{ {parts}{filters} }}"
    if q.group_vars:
        text += " GROUP BY " + " ".join(f"?{v}" for v in q.group_vars)
    return text
