import itertools

import numpy as np
import pytest

from netinf.core import Cascade, CascadeSet, DirectedNetwork, TransmissionConfig


@pytest.fixture
def cfg():
    return TransmissionConfig("exp", alpha=1.0, beta=0.5, epsilon=1e-9)


@pytest.fixture
def triangle():
    # a=0, b=1, c=2 with every forward pair a network edge
    return DirectedNetwork(3, {(0, 1), (1, 2), (0, 2)})


def random_network(rng, n, p):
    edges = [(u, v) for u in range(n) for v in range(n) if u != v and rng.random() < p]
    return DirectedNetwork(n, frozenset(edges))


def random_cascade(rng, n, size, integer_times=False):
    nodes = rng.choice(n, size=size, replace=False)
    if integer_times:
        times = np.concatenate([[0.0], rng.integers(1, 4, size=size - 1).astype(float)])
    else:
        times = np.concatenate([[0.0], rng.uniform(0.01, 5.0, size=size - 1)])
    return Cascade(nodes, times)


def random_corpus(rng, n, num, max_size, integer_times=False):
    out = []
    for _ in range(num):
        size = int(rng.integers(2, max_size + 1))
        out.append(random_cascade(rng, n, size, integer_times))
    return CascadeSet(n, out)


def enumerate_arborescences(nodes, root):
    """Every assignment of a parent (any other node) to each non-root node that forms a tree."""
    others = [v for v in nodes if v != root]
    for choice in itertools.product(*[[u for u in nodes if u != v] for v in others]):
        parent = dict(zip(others, choice))
        ok = True
        for v in others:
            seen = set()
            x = v
            while x != root:
                if x in seen:
                    ok = False
                    break
                seen.add(x)
                x = parent[x]
            if not ok:
                break
        if ok:
            yield parent


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line, then assert."""
    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
