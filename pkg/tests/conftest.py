import pytest

from lpt import corpus
from lpt.verify import ExtensionCache


@pytest.fixture(scope="session")
def naive_sort():
    return corpus.load_program("naive_sort")


@pytest.fixture(scope="session")
def lemma_env():
    return corpus.load_program("lemma_env")


@pytest.fixture(scope="session")
def shared_cache():
    # one extension cache across the whole run; keyed by reachable
    # sub-program content, so staleness is impossible
    return ExtensionCache()
