import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import instance_and_scheme, unit
from genai_forum.dynamics import (choice_prob, counterfactual_welfare, is_socially_beneficial,
                                  proportions, simulate, transition, welfare_between)
from genai_forum.errors import RangeError, ShapeError
from genai_forum.model import TrainingScheme, example1_instance


def test_choice_prob_matches_softmax():
    # e^{b a} / (e^{b a} + e^{b c}) written out directly
    a, c, b = 3.0, 1.0, 1.0
    assert choice_prob(a, c, b) == pytest.approx(math.exp(3) / (math.exp(3) + math.exp(1)))
    assert choice_prob(0.0, 0.0, 5.0) == 0.5
    assert choice_prob(1.0, 2.0, 0.0) == 0.5


def test_choice_prob_no_overflow():
    assert choice_prob(1000.0, 0.0, 10.0) == 1.0
    assert choice_prob(0.0, 1000.0, 10.0) == 0.0


def test_strategic_users():
    assert choice_prob(2.0, 1.0, math.inf) == 1.0
    assert choice_prob(1.0, 2.0, math.inf) == 0.0
    assert choice_prob(1.0, 1.0, math.inf) == 0.5


def test_example1_first_rounds():
    traj = simulate(example1_instance(), TrainingScheme.no_training(20))
    assert traj.u[0] == 3.0
    assert traj.v[0] == pytest.approx(-0.104, abs=1e-12)
    assert traj.p[1] == pytest.approx(math.exp(3) / (math.exp(3) + 1), rel=1e-12)
    assert traj.p[2] == pytest.approx(0.8104, abs=1e-4)
    assert traj.counterfactual == 20.0
    np.testing.assert_allclose(traj.counterfactual_cum, np.arange(1, 21))


def test_single_round():
    inst = example1_instance(T=1)
    traj = simulate(inst, TrainingScheme.all_ones(1))
    assert traj.T == 1 and traj.U == 3.0


def test_shape_mismatch():
    with pytest.raises(ShapeError):
        simulate(example1_instance(T=5), TrainingScheme.all_ones(4))


def test_welfare_between():
    inst = example1_instance()
    x = TrainingScheme.no_training(20)
    traj = simulate(inst, x)
    assert welfare_between(inst, x, 1, 20) == pytest.approx(traj.U)
    assert welfare_between(inst, x, 3, 3) == pytest.approx(traj.u[2])
    with pytest.raises(RangeError):
        welfare_between(inst, x, 5, 4)


def test_socially_beneficial_examples():
    inst = example1_instance()
    assert is_socially_beneficial(inst, TrainingScheme.all_ones(20))
    assert not is_socially_beneficial(inst, TrainingScheme.no_training(20))
    assert counterfactual_welfare(inst) == 20.0


@given(instance_and_scheme())
def test_trajectory_accounting(case):
    inst, x = case
    traj = simulate(inst, x)
    assert np.all((traj.p >= 0) & (traj.p <= 1))
    assert traj.U == pytest.approx(traj.U_cum[-1])
    assert traj.V == pytest.approx(traj.V_cum[-1] / inst.T)
    p_next = [transition(traj.p[t], x.gaps[t], inst) for t in range(inst.T - 1)]
    np.testing.assert_allclose(traj.p[1:], p_next, rtol=0, atol=0)


@given(instance_and_scheme(), unit, unit)
def test_shares_monotone_in_start(case, a, b):
    """A larger starting share never produces a smaller share later on."""
    inst, x = case
    lo, hi = sorted((a, b))
    assert np.all(proportions(inst, x, lo) <= proportions(inst, x, hi))


@given(instance_and_scheme(), st.integers(0, 10**6))
def test_training_raises_next_share(case, seed):
    """Training in round t (gap 0) gives at least the share of skipping it."""
    inst, x = case
    if inst.T < 2:
        return
    t = np.random.default_rng(seed).integers(2, inst.T + 1)
    bits = list(x.bits)
    bits[t - 1] = 0
    skip = TrainingScheme(tuple(bits))
    bits[t - 1] = 1
    train = TrainingScheme(tuple(bits))
    if t < inst.T:
        assert proportions(inst, train)[t] >= proportions(inst, skip)[t]
