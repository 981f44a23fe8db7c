"""Shared fixtures: the seeded polynomial corpus and the acceptance summary."""

from __future__ import annotations

import numpy as np
import pytest

from hyperlab import generators as gen
from hyperlab.stability import homogenize

ACCEPTANCE_LINES: list = []


def polynomial_corpus():
    """``(name, f, v)`` triples with ``deg f <= 6`` and ``nvars <= 5``.

    Every entry is hyperbolic with respect to ``v`` by construction.
    """
    out = []
    for n in (2, 3, 4, 5):
        v = np.zeros(n)
        v[0] = 1.0
        out.append((f"lorentzian{n}", gen.lorentzian(n), v))
    for k, d in ((1, 3), (1, 5), (2, 3), (2, 4), (3, 4)):
        out.append((f"gk{k}_{d}", gen.gk_compose(k, d), np.ones(d)))
    out.append(("herm_det2", gen.herm_det(2), gen.identity_coords(2)))
    rng = np.random.default_rng(2024)
    for d in (3, 5, 6):
        A, B = gen.random_symmetric(rng, d), gen.random_symmetric(rng, d)
        out.append((f"lax{d}", gen.lax_pencil(A, B), np.array([1.0, 0.0, 0.0])))
    for seed, (m, n) in enumerate(((2, 2), (3, 2), (3, 3), (4, 3))):
        f = gen.random_determinantal(100 + seed, m=m, n=n)
        out.append((f"detH{m}_{n}", homogenize(f), np.append(np.ones(n), 0.0)))
    return out


@pytest.fixture(scope="session")
def corpus():
    return polynomial_corpus()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
