import pytest

from kgcube import Facet, Graph, build_lattice, load_ntriples

EX = "http://example.org/"

# 4 observations: (country, language, year, population)
FIXPOP_ROWS = [
    ("o1", "FR", "French", "2020", "10"),
    ("o2", "FR", "French", "2021", "12"),
    ("o3", "BE", "French", "2020", "4"),
    ("o4", "BE", "Dutch", "2020", "6"),
]

FIXPOP_NT = "".join(
    f"<{EX}{o}> <{EX}country> <{EX}{c}> .\n"
    f"<{EX}{o}> <{EX}lang> <{EX}{l}> .\n"
    f'<{EX}{o}> <{EX}year> "{y}" .\n'
    f'<{EX}{o}> <{EX}pop> "{u}" .\n'
    for o, c, l, y, u in FIXPOP_ROWS
)

FIXPOP_FACET_TEXT = """
PREFIX ex: <http://example.org/>
SELECT ?c ?l ?y (SUM(?u) AS ?total)
WHERE { ?o ex:country ?c . ?o ex:lang ?l . ?o ex:year ?y . ?o ex:pop ?u }
GROUP BY ?c ?l ?y
"""


@pytest.fixture(scope="session")
def fixpop() -> Graph:
    return load_ntriples(FIXPOP_NT)


@pytest.fixture(scope="session")
def fixpop_facet() -> Facet:
    return Facet.from_text(FIXPOP_FACET_TEXT)


@pytest.fixture(scope="session")
def fixpop_lattice(fixpop_facet):
    return build_lattice(fixpop_facet)
