"""Shared hypothesis strategies and settings."""

from __future__ import annotations

import math

import numpy as np
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from genai_forum.model import (ExpDecay, Instance, Linear, Logistic, TabulatedDecay,
                               TabulatedNetwork, TrainingScheme)

settings.register_profile(
    "default", max_examples=200, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("default")

unit = st.floats(0.0, 1.0, allow_nan=False)


@st.composite
def network_utilities(draw):
    kind = draw(st.sampled_from(["linear", "logistic", "table"]))
    if kind == "linear":
        s = draw(st.floats(0.05, 3.0))
        return Linear(s * draw(st.floats(1.0, 2.0)), s)
    if kind == "logistic":
        return Logistic(draw(st.floats(0.5, 40.0)), draw(unit))
    n = draw(st.integers(1, 4))
    inner = sorted(draw(st.lists(st.floats(0.05, 0.95), min_size=n, max_size=n, unique=True)))
    vals = sorted(draw(st.lists(st.floats(0.0, 3.0), min_size=n + 2, max_size=n + 2)), reverse=True)
    vals[0] += 0.05
    return TabulatedNetwork(tuple(zip([0.0] + inner + [1.0], vals)))


@st.composite
def decay_utilities(draw, rs0: float):
    """R^c with R^c(0) > rs0 > inf R^c."""
    if draw(st.booleans()):
        return ExpDecay(rs0 * draw(st.floats(1.05, 6.0)) + 0.01, draw(st.floats(0.1, 0.97)),
                        rs0 * draw(st.floats(0.0, 0.9)))
    n = draw(st.integers(1, 6))
    top = rs0 * draw(st.floats(1.05, 6.0)) + 0.01
    tail = rs0 * draw(st.floats(0.0, 0.9))
    vals = sorted(draw(st.lists(st.floats(tail, top), min_size=n, max_size=n)), reverse=True)
    return TabulatedDecay((top,) + tuple(vals), tail)


@st.composite
def instances(draw, max_T: int = 25, strategic: bool = True):
    rs = draw(network_utilities())
    rc = draw(decay_utilities(float(rs(0.0))))
    beta = draw(st.one_of(st.floats(0.0, 12.0), st.just(math.inf))) if strategic \
        else draw(st.floats(0.0, 12.0))
    return Instance(
        r=draw(st.floats(0.0, 3.0)), c_m=draw(st.floats(0.0, 1.0)), c_train=draw(st.floats(0.0, 1.0)),
        rc=rc, rs=rs, beta=beta, p1=draw(unit), T=draw(st.integers(1, max_T)),
    )


@st.composite
def eligible_instances(draw, max_T: int = 25):
    """R^s(1) = 0 and beta * L < 16/7, so the contraction results apply."""
    s = draw(st.floats(0.1, 3.0))
    beta = draw(st.floats(0.02, 0.98)) * (16 / 7) / s
    rc = ExpDecay(s * draw(st.floats(1.05, 5.0)), draw(st.floats(0.05, 0.97)), 0.0)
    return Instance(
        r=draw(st.floats(0.1, 3.0)), c_m=draw(st.floats(0.0, 1.0)), c_train=draw(st.floats(0.0, 1.0)),
        rc=rc, rs=Linear(s, s), beta=beta, p1=draw(unit), T=draw(st.integers(1, max_T)),
    )


@st.composite
def schemes(draw, T: int):
    density = draw(st.floats(0.0, 1.0))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    bits = [1] + [int(b) for b in rng.random(T - 1) < density]
    return TrainingScheme(tuple(bits))


@st.composite
def instance_and_scheme(draw, max_T: int = 25, eligible: bool = False):
    inst = draw(eligible_instances(max_T) if eligible else instances(max_T))
    return inst, draw(schemes(inst.T))


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(module.RESULTS):
        terminalreporter.write_line(line)
