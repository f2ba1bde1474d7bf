from pathlib import Path

import pytest
from hypothesis import settings

from fuzzyrank.fuzzy import FuzzySystem
from fuzzyrank.opinion import default_lexicon_path, load_lexicon
from fuzzyrank.pipeline import Pipeline
from fuzzyrank.tagger import TrainConfig, crf_train, read_conll

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def train_data():
    return read_conll(FIXTURES / "train.conll")


@pytest.fixture(scope="session")
def trained_model(train_data):
    return crf_train(train_data, TrainConfig(epochs=10, seed=0))


@pytest.fixture(scope="session")
def lexicon():
    return load_lexicon(default_lexicon_path())


@pytest.fixture(scope="session")
def pipeline(trained_model, lexicon):
    return Pipeline(trained_model, lexicon, FuzzySystem())


# criterion number -> (title, passed); filled in by test_acceptance.py
ACCEPTANCE: dict[int, tuple[str, bool]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}")
