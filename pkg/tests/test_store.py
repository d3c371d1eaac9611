import random

import pytest

from kgcube import (
    Graph,
    NTriplesError,
    StructuralError,
    bnode,
    iri,
    literal,
    load_ntriples,
)
from kgcube.store import literal_for_number, numeric_value

from .conftest import EX, FIXPOP_NT
from .oracles import brute_force_match


def test_empty_stream():
    g = load_ntriples("")
    assert g.n_triples == 0
    assert g.n_terms == 0


def test_fixpop_triple_count(fixpop):
    expected = len([line for line in FIXPOP_NT.splitlines() if line.strip()])
    assert expected == 16
    assert fixpop.n_triples == expected


def test_duplicate_lines_collapse():
    line = f"<{EX}s> <{EX}p> <{EX}o> .\n"
    g = load_ntriples(line + line)
    assert g.n_triples == 1


def test_load_accepts_comments_and_blanks():
    text = f"# header\n\n<{EX}s> <{EX}p> \"v\" . # trailing\n"
    g = load_ntriples(text)
    assert g.n_triples == 1


@pytest.mark.parametrize(
    "bad,line",
    [
        ("<urn:a> <urn:b> .\n", 1),
        ("<urn:a> <urn:b> <urn:c>\n", 1),
        ('<urn:a> <urn:b> "unterminated .\n', 1),
        ("<urn:ok> <urn:p> <urn:o> .\nnot a triple .\n", 2),
    ],
)
def test_malformed_line_reports_line_number(bad, line):
    with pytest.raises(NTriplesError) as err:
        load_ntriples(bad)
    assert err.value.line == line


def test_predicate_must_be_iri():
    with pytest.raises(StructuralError):
        load_ntriples("<urn:a> _:b <urn:c> .\n")
    g = Graph()
    with pytest.raises(StructuralError):
        g.add(iri("urn:a"), bnode("b"), iri("urn:c"))


def test_literal_subject_rejected():
    with pytest.raises(NTriplesError):
        load_ntriples('"lit" <urn:p> <urn:o> .\n')
    g = Graph()
    with pytest.raises(StructuralError):
        g.add(literal("lit"), iri("urn:p"), iri("urn:o"))


def test_typed_and_tagged_literals_roundtrip():
    text = (
        '<urn:s> <urn:p> "10"^^<http://www.w3.org/2001/XMLSchema#integer> .\n'
        '<urn:s> <urn:p> "bonjour"@fr .\n'
        '<urn:s> <urn:p> "line\\nbreak \\"quoted\\"" .\n'
    )
    g = load_ntriples(text)
    assert g.n_triples == 3
    again = load_ntriples(g.serialize())
    assert set(again.triples()) == set(g.triples())


def test_serialize_roundtrip_fixpop(fixpop):
    again = load_ntriples(fixpop.serialize())
    assert set(again.triples()) == set(fixpop.triples())
    assert again.serialize() == fixpop.serialize()


def test_serialize_roundtrip_hostile_lexicals():
    rng = random.Random(6021)
    alphabet = 'abc"\\\n\r\té中 ~^<>'
    g = Graph()
    for i in range(300):
        s = iri(f"urn:s:{i % 7}")
        p = iri(f"urn:p:{i % 3}")
        kind = rng.randrange(3)
        if kind == 0:
            text = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 12)))
            o = literal(text, lang="en" if rng.random() < 0.3 else None)
        elif kind == 1:
            o = bnode(f"b{i % 5}")
        else:
            o = iri(f"urn:o:{i % 11}")
        g.add(s, p, o)
    g.freeze()
    again = load_ntriples(g.serialize())
    assert set(again.triples()) == set(g.triples())
    assert again.serialize() == g.serialize()


# -- match ----------------------------------------------------------------------


def _triple_sort_key(t3):
    return tuple(t.sort_key() for t in t3)


def test_match_bound_po(fixpop):
    expected = brute_force_match(fixpop, None, iri(EX + "lang"), iri(EX + "Dutch"))
    got = list(fixpop.match(None, iri(EX + "lang"), iri(EX + "Dutch")))
    assert sorted(got, key=_triple_sort_key) == sorted(expected, key=_triple_sort_key)
    assert got == [(iri(EX + "o4"), iri(EX + "lang"), iri(EX + "Dutch"))]


def test_match_unbound_streams_all(fixpop):
    assert len(list(fixpop.match())) == 16


def test_match_subject_only_appearing_as_object(fixpop):
    assert list(fixpop.match(iri(EX + "FR"), None, None)) == []


def test_match_unknown_term_is_empty(fixpop):
    assert list(fixpop.match(iri("urn:absent"), None, None)) == []


def test_match_equals_brute_force_on_random_graphs():
    rng = random.Random(4711)
    from .oracles import random_pool_graph

    for _ in range(25):
        g = random_pool_graph(rng, rng.randint(0, 120))
        terms = [g.term(i) for i in range(g.n_terms)]
        choices = terms + [None]
        for _ in range(40):
            s = rng.choice(choices)
            p = rng.choice(choices)
            o = rng.choice(choices)
            got = sorted(g.match(s, p, o), key=_triple_sort_key)
            expected = sorted(brute_force_match(g, s, p, o), key=_triple_sort_key)
            assert got == expected


def test_no_stored_triple_violates_signature():
    rng = random.Random(99)
    from .oracles import random_pool_graph

    g = random_pool_graph(rng, 200)
    for s, p, o in g.triples():
        assert s.kind.value in ("iri", "blank")
        assert p.kind.value == "iri"


# -- stats ------------------------------------------------------------------------


def test_stats_empty_graph():
    stats = Graph().freeze().stats()
    assert stats.total_triples == 0
    assert stats.total_terms == 0
    assert stats.predicate_counts == {}


def test_stats_fixpop_lang(fixpop):
    stats = fixpop.stats()
    assert stats.predicate_counts[EX + "lang"] == 4
    assert stats.predicate_distinct_objects[EX + "lang"] == 2
    assert stats.predicate_distinct_subjects[EX + "lang"] == 4
    assert stats.total_triples == 16


def test_stats_fixpop_total_terms(fixpop):
    # oracle: enumerate every distinct term of the fixture
    seen = set()
    for s, p, o in fixpop.triples():
        seen.update((s, p, o))
    # 4 subjects + 4 predicates + objects {FR, BE, French, Dutch, 2020, 2021,
    # 10, 12, 4, 6} = 18 distinct terms
    assert len(seen) == 18
    assert fixpop.stats().total_terms == len(seen)
    assert fixpop.n_terms == len(seen)


# -- numeric handling ----------------------------------------------------------------


def test_numeric_values():
    assert numeric_value(literal("10")) == 10
    assert isinstance(numeric_value(literal("10")), int)
    assert numeric_value(literal("2.5")) == 2.5
    assert numeric_value(literal("-3")) == -3
    assert numeric_value(literal("1_0")) is None
    assert numeric_value(literal(" 10")) is None
    assert numeric_value(literal("ten")) is None
    assert numeric_value(iri("urn:10")) is None
    assert numeric_value(literal("7", lang=None)) == 7


def test_literal_for_number_typing():
    assert literal_for_number(26).datatype.endswith("integer")
    assert literal_for_number(2.5).datatype.endswith("double")
    assert numeric_value(literal_for_number(26)) == 26
    assert numeric_value(literal_for_number(2.5)) == 2.5


def test_bad_numeric_datatype_rejected():
    with pytest.raises(ValueError):
        literal("abc", datatype="http://www.w3.org/2001/XMLSchema#integer")


def test_dictionary_ids_dense_first_seen():
    g = Graph()
    g.add(iri("urn:a"), iri("urn:p"), iri("urn:b"))
    g.add(iri("urn:b"), iri("urn:p"), iri("urn:a"))
    g.freeze()
    assert [g.term(i).lexical for i in range(g.n_terms)] == ["urn:a", "urn:p", "urn:b"]


def test_frozen_graph_rejects_writes(fixpop):
    with pytest.raises(Exception):
        fixpop.add(iri("urn:x"), iri("urn:y"), iri("urn:z"))
