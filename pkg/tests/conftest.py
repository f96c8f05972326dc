import math
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from coverage_control.geometry import ConvexPolygon

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_convex(rng, sides=None, radius=1.0):
    """Random convex polygon: hull of sorted angles on a jittered circle."""
    k = int(rng.integers(3, 9)) if sides is None else sides
    ang = np.sort(rng.uniform(0, 2 * math.pi, k))
    # enforce a minimum angular gap so vertices stay distinct
    ang = ang + np.arange(k) * 0.05
    ang = ang * (2 * math.pi / (ang[-1] + 0.05 + 1e-9))
    r = radius * rng.uniform(0.6, 1.0)
    c = rng.uniform(-0.5, 0.5, 2)
    return ConvexPolygon.from_vertices([(c[0] + r * math.cos(a), c[1] + r * math.sin(a)) for a in ang])


def points_in(rng, Q, n, min_sep=1e-3):
    v = Q.as_array()
    lo, hi = v.min(axis=0), v.max(axis=0)
    out = []
    while len(out) < n:
        q = rng.uniform(lo, hi)
        if Q.contains(q, tol=0.0) and all(np.hypot(*(q - p)) > min_sep for p in out):
            out.append(q)
    return np.array(out)


@st.composite
def configurations(draw, n_min=1, n_max=12):
    seed = draw(st.integers(0, 2**31 - 1))
    n = draw(st.integers(n_min, n_max))
    rng = np.random.default_rng(seed)
    Q = random_convex(rng)
    return Q, points_in(rng, Q, n)


@pytest.fixture
def unit_square():
    return ConvexPolygon.box(0, 0, 1, 1)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(mod.RESULTS):
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
