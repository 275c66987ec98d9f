import pytest

from lrlab.equivalence import gen_closed_term
from lrlab.kernel import LEVEL_PRESETS
from lrlab.logrel import ValueCorpus
from lrlab.relational import RelCatalog


@pytest.fixture(scope="session")
def corpus():
    return ValueCorpus(depth=3, seed=0)


@pytest.fixture(scope="session")
def catalog(corpus):
    return RelCatalog(corpus, size=16)


@pytest.fixture(scope="session")
def stlc_terms():
    """A shared batch of closed well-typed simply-typed terms."""
    return [gen_closed_term(LEVEL_PRESETS["stlc"], 25, seed) for seed in range(60)]


@pytest.fixture(scope="session")
def full_terms():
    return [gen_closed_term(LEVEL_PRESETS["full"], 25, seed) for seed in range(60)]
