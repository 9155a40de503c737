from pathlib import Path

import pytest

from tcmonoid import parse_presentation
from tcmonoid.concrete_monoids import example_boolean_monoid

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"


def load(name):
    """(presentation, pairs, kind) for a corpus file, by stem."""
    return parse_presentation((CORPUS / f"{name}.pres").read_text(encoding="utf-8"))


def words(p, *texts):
    return [p.parse_word(t) for t in texts]


@pytest.fixture(scope="session")
def boolean_pair():
    return load("boolean_pair")


@pytest.fixture(scope="session")
def bool_monoid():
    return example_boolean_monoid()
