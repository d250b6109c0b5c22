"""Shared fixtures: tuned pipelines are expensive, so they are built once
per session and memoized per (ell, rotation target)."""

import pytest

from flatcircle.maps import FlatCircleMap
from flatcircle.pipeline import default_template, run_pipeline, tune_map
from flatcircle.precision import PrecisionContext
from flatcircle.rotation import preset

# the silver target's denominators grow fast (q_8 = 985), so it gets a
# shallower run than the golden one
SETTINGS = {
    "golden": {"n_max": 13, "depth": 18, "length": 20},
    "silver": {"n_max": 6, "depth": 8, "length": 11},
}


class Lab:
    def __init__(self, bits=512):
        self.ctx = PrecisionContext(bits=bits)
        self._runs = {}

    def target(self, name):
        return preset(name, SETTINGS[name]["length"])

    def run(self, ell, target="golden"):
        key = (ell, target)
        if key not in self._runs:
            s = SETTINGS[target]
            self._runs[key] = run_pipeline(
                default_template(ell, self.ctx), self.target(target),
                s["n_max"], self.ctx, depth=s["depth"])
        return self._runs[key]


@pytest.fixture(scope="session")
def lab():
    return Lab()


@pytest.fixture(scope="session")
def ctx():
    return PrecisionContext(bits=256)


@pytest.fixture(scope="session")
def small_run(ctx):
    """A cheap full pipeline (golden, ell = 3, shallow) for structural
    tests that do not need the production precision."""
    return run_pipeline(default_template("3", ctx), preset("golden", 14),
                        8, ctx, depth=11)


@pytest.fixture(scope="session")
def small_map(ctx):
    """A quickly tuned golden map at ell = 2, for geometry-free tests."""
    params = tune_map(default_template("2", ctx), preset("golden", 14),
                      9, ctx)
    return FlatCircleMap(params, ctx)


# -- acceptance reporting ---------------------------------------------------

_ACCEPTANCE = []


def record_criterion(name: str, ok: bool, detail: str = ""):
    line = f"{'PASS' if ok else 'FAIL'}  {name}" + \
        (f"  [{detail}]" if detail else "")
    print(line)
    _ACCEPTANCE.append(line)
    return ok


@pytest.fixture
def record():
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
