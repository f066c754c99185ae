import pytest

from voxbridge import corpus


@pytest.fixture(scope="session")
def default_corpus(tmp_path_factory):
    """The default synthetic corpus, generated once per test session."""
    root = tmp_path_factory.mktemp("corpus")
    return corpus.generate_corpus(corpus.CorpusConfig(), root)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """A 2x2x3 corpus for tests that only need shape, not statistics."""
    root = tmp_path_factory.mktemp("small_corpus")
    cfg = corpus.CorpusConfig(locales=["alpha", "beta"], speakers_per_locale=2,
                              utterances_per_speaker=3, phonemes_per_utterance=5)
    return corpus.generate_corpus(cfg, root)
