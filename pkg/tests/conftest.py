import numpy as np
import pytest

from hcvq.geometry import PointCloud

SQRT2 = float(np.sqrt(2.0))

#: criterion number -> one-line PASS/FAIL summary, filled by test_acceptance
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])


def unit_square():
    return PointCloud([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def kruskal_weights(points):
    """MST edge weights by Kruskal with a plain list-based union-find."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    edges = sorted(
        (float(np.sqrt(np.sum((pts[i] - pts[j]) ** 2))), i, j) for i in range(n) for j in range(i + 1, n)
    )
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            a = parent[a]
        return a

    out = []
    for w, i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            out.append(w)
    return out


def random_rotation(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    return q * np.sign(np.diag(r))


def triple_multiset(diagram, include_essential=False):
    return sorted(diagram.triples(include_essential=include_essential))


def assert_same_triples(a, b, atol=1e-9):
    ta, tb = triple_multiset(a), triple_multiset(b)
    assert len(ta) == len(tb)
    for (da, ba, ea), (db, bb, eb) in zip(ta, tb):
        assert da == db
        assert abs(ba - bb) <= atol
        assert abs(ea - eb) <= atol


@pytest.fixture
def square():
    return unit_square()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
