import pytest

from superfcm import corpus, scp


@pytest.fixture(scope="session")
def corpus_programs():
    return {name: corpus.load(name) for name in corpus.NAMES}


@pytest.fixture(scope="session")
def scp_results(corpus_programs):
    """Residual program and report for every corpus program."""
    out = {}
    for name, p in corpus_programs.items():
        out[name] = scp.supercompile(p)
    return out
