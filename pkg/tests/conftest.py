import json
from pathlib import Path

import pytest

from pfspec.algebra import closure
from pfspec.mso import parse
from pfspec.theory import TheoryEngine

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
SCHEMAS = ROOT / "src" / "pfspec" / "schemas"

# criterion number -> (passed, note); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def corpus_sentences():
    return [(p.stem, parse(p.read_text())) for p in sorted(CORPUS.glob("*.mso"))]


@pytest.fixture(scope="session")
def corpus():
    return corpus_sentences()


@pytest.fixture(scope="session")
def engine():
    return TheoryEngine()


@pytest.fixture(scope="session")
def table0(engine):
    return closure(0, (), engine)


@pytest.fixture(scope="session")
def table1(engine):
    return closure(1, (), engine)


@pytest.fixture(scope="session")
def schema():
    from jsonschema import Draft202012Validator
    from referencing import Registry, Resource

    docs = {p.name: json.loads(p.read_text()) for p in SCHEMAS.glob("*.json")}
    registry = Registry().with_resources(
        (name, Resource.from_contents(doc)) for name, doc in docs.items())

    def validate(name, obj):
        Draft202012Validator(docs[name], registry=registry).validate(obj)

    return validate


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, note = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {note}")
