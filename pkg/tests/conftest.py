import numpy as np
import pytest

from parkplate.classifier import build_model
from parkplate.config import DEFAULT_ALPHABET
from parkplate.synth import generate_glyph_corpus


@pytest.fixture(scope="session")
def glyph_corpus():
    return generate_glyph_corpus(0, 50)


@pytest.fixture(scope="session")
def model(glyph_corpus):
    """Recognizer trained on the full default corpus, as the CLI would ship it."""
    return build_model(glyph_corpus, DEFAULT_ALPHABET)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_configure(config):
    config.acceptance_lines = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    number, title = mark.args
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    verdict = "PASS" if rep.passed else "FAIL"
    if rep.passed and any(k == "warning" for k, _ in item.user_properties):
        verdict = "WARN"
    item.config.acceptance_lines[number] = f"criterion {number:>2} {verdict}  {title}" + \
        (f"  ({detail})" if detail else "")


def pytest_terminal_summary(terminalreporter, config):
    lines = config.acceptance_lines
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
