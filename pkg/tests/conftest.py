from importlib import resources

import numpy as np
import pytest

from scenevideo.render import render_scene
from scenevideo.scene import build_scene, load_lexicon


@pytest.fixture(scope="session")
def lexicon():
    return load_lexicon()


@pytest.fixture(scope="session")
def prompts():
    text = resources.files("scenevideo.data").joinpath("prompts.txt").read_text("utf-8")
    return [ln.strip() for ln in text.splitlines() if ln.strip()]


@pytest.fixture(scope="session")
def scenes(prompts, lexicon):
    return [build_scene(p, lexicon) for p in prompts]


@pytest.fixture(scope="session")
def rendered(scenes):
    return [render_scene(g, 64, 64, 8) for g in scenes]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def accept():
    """Record one acceptance verdict; the test fails when the verdict does."""

    def record(name: str, ok: bool, detail: str) -> None:
        _ACCEPTANCE.append((name, bool(ok), detail))
        assert ok, f"{name}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
