import random
from fractions import Fraction
from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings

from nsbox import LocalRelabeling, Scenario, apply_relabeling, enumerate_specs, mix, table2_box

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@lru_cache(maxsize=None)
def specs_for(dx, dy):
    return tuple(enumerate_specs(dx, dy))


def random_relabeling(rng: random.Random, s: Scenario) -> LocalRelabeling:
    def perm(n):
        p = list(range(n))
        rng.shuffle(p)
        return tuple(p)

    return LocalRelabeling(
        perm(s.dx),
        perm(s.dy),
        tuple(perm(s.da) for _ in range(s.dx)),
        tuple(perm(s.db) for _ in range(s.dy)),
    )


def catalog_vertex(rng: random.Random, dx: int, dy: int):
    """A relabeled catalog box: always a vertex of the binary polytope."""
    spec = rng.choice(specs_for(dx, dy))
    return apply_relabeling(table2_box(spec), random_relabeling(rng, spec.scenario))


def random_ns_table(rng: random.Random, dx: int, dy: int, k_max: int = 5):
    """Exact mixture of 1..k_max catalog vertices with random rational weights."""
    k = rng.randint(1, k_max)
    ws = [Fraction(rng.randint(1, 12)) for _ in range(k)]
    total = sum(ws)
    return mix((w / total, catalog_vertex(rng, dx, dy)) for w in ws)


@pytest.fixture
def rng():
    return random.Random(20261015)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for _, _, line in sorted(mod.RESULTS):
        terminalreporter.write_line(line)
