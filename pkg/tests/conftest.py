from __future__ import annotations

import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fixtures import SCHEMA, Fixture, fixture_set  # noqa: E402
from treecollage.optimizer import PipelineResult, run_pipeline  # noqa: E402


class FixtureRun:
    """One fixture's pipeline run plus its wall-clock time."""

    def __init__(self, fixture: Fixture, result: PipelineResult, shape, elapsed: float):
        self.fixture = fixture
        self.result = result
        self.shape = shape
        self.elapsed = elapsed


@pytest.fixture(scope="session")
def fixture_runs() -> list[FixtureRun]:
    """Run the full pipeline once per bundled fixture; shared by the suite."""
    runs = []
    for fx in fixture_set():
        shape = fx.make_shape()
        start = time.perf_counter()
        result = run_pipeline(list(fx.items), SCHEMA, shape)
        elapsed = time.perf_counter() - start
        runs.append(FixtureRun(fx, result, shape, elapsed))
    return runs
