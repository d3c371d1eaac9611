#!/usr/bin/env python3
# Load a tiny population graph, match patterns, and run grouped aggregates.

from kgcube import evaluate, iri, load_ntriples, parse_query

EX = "http://example.org/"

NT = "".join(
    f"<{EX}{o}> <{EX}country> <{EX}{c}> .\n"
    f"<{EX}{o}> <{EX}lang> <{EX}{l}> .\n"
    f'<{EX}{o}> <{EX}year> "{y}" .\n'
    f'<{EX}{o}> <{EX}pop> "{u}" .\n'
    for o, c, l, y, u in [
        ("o1", "FR", "French", "2020", "10"),
        ("o2", "FR", "French", "2021", "12"),
        ("o3", "BE", "French", "2020", "4"),
        ("o4", "BE", "Dutch", "2020", "6"),
    ]
)

g = load_ntriples(NT)
print(f"loaded {g.n_triples} triples over {g.n_terms} distinct terms")

# index-backed pattern matching: who speaks Dutch?
for s, p, o in g.match(None, iri(EX + "lang"), iri(EX + "Dutch")):
    print("dutch speaker observation:", s.lexical)

# population per language
q = parse_query(
    """
    PREFIX ex: <http://example.org/>
    SELECT ?l (SUM(?u) AS ?total)
    WHERE { ?o ex:lang ?l . ?o ex:pop ?u }
    GROUP BY ?l
    """
)
table = evaluate(g, q)
for key, value in table.sorted_rows():
    print(f"SUM(pop) for {key[0].lexical}: {value}")

# filters narrow the bindings before grouping
q = parse_query(
    """
    PREFIX ex: <http://example.org/>
    SELECT ?l (AVG(?u) AS ?avg)
    WHERE { ?o ex:lang ?l . ?o ex:pop ?u . ?o ex:year ?y . FILTER(?y = 2020) }
    GROUP BY ?l
    """
)
for key, value in evaluate(g, q).sorted_rows():
    print(f"AVG(pop) in 2020 for {key[0].lexical}: {value}")
