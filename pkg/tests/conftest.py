import functools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from twisted_kzb.gs_basis import build_gs
from twisted_kzb.lie import build_root_system, build_twist, make_rep
from twisted_kzb.rmatrix import RMatrix

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
    derandomize=True,
)
settings.load_profile("default")

# every (N, l) with l | N used by the sweeps
SWEEP = [(2, 1), (2, 2), (3, 1), (3, 3), (4, 1), (4, 2), (4, 4)]


@functools.lru_cache(maxsize=None)
def setup(n: int, l: int, j: int = 1):
    """Root system, twist and GS basis for sl_n with an order-l twist."""
    rs = build_root_system("A", n - 1)
    tw = build_twist(rs, l, j)
    return rs, tw, build_gs(tw)


@functools.lru_cache(maxsize=None)
def evaluator(n: int, l: int, **kw) -> RMatrix:
    return RMatrix(setup(n, l)[2], **kw)


@functools.lru_cache(maxsize=None)
def rep(n: int, name: str):
    return make_rep(setup(n, 1)[0], name)


def random_tau(rng) -> complex:
    return complex(rng.uniform(-0.4, 0.4), rng.uniform(0.85, 1.4))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE = {}


def record_acceptance(number: int, title: str, ok: bool, detail: str) -> str:
    line = f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    _ACCEPTANCE[number] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[k])
