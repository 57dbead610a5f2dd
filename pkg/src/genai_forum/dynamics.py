"""Round-by-round simulation of user shares, welfare and GenAI revenue."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RangeError, ShapeError
from .model import Instance, TrainingScheme, _sigmoid


def choice_prob(rc_value, rs_value, beta: float):
    """Softmax share of GenAI given last round's two utilities.

    Written as sigmoid(beta * (R^c - R^s)) so large beta cannot overflow.
    Vectorised over numpy arrays. With beta = inf the share is 1, 0.5 or 0
    according to the sign of R^c - R^s.
    """
    diff = np.asarray(rc_value, dtype=float) - np.asarray(rs_value, dtype=float)
    if math.isinf(beta):
        out = np.where(diff > 0, 1.0, np.where(diff < 0, 0.0, 0.5))
        return out[()] if out.ndim == 0 else out
    return _sigmoid(beta * diff)


def transition(p: float, gap: int, instance: Instance) -> float:
    """Next-round GenAI share from share ``p`` and current gap ``gap``."""
    return float(choice_prob(instance.rc(gap), instance.rs(p), instance.beta))


@dataclass(frozen=True)
class Trajectory:
    """Per-round series for rounds 1..T (stored 0-indexed: ``p[t - 1]`` is p_t).

    ``U`` is cumulative welfare, ``V`` the average revenue (1/T) sum v_t and
    ``counterfactual`` the Forum-only welfare T * R^s(0).
    """

    p: np.ndarray
    gamma: np.ndarray
    u: np.ndarray
    v: np.ndarray
    U: float
    V: float
    counterfactual: float

    @property
    def T(self) -> int:
        return len(self.p)

    @property
    def U_cum(self) -> np.ndarray:
        return np.cumsum(self.u)

    @property
    def V_cum(self) -> np.ndarray:
        """Running sum of per-round revenue (not divided by t)."""
        return np.cumsum(self.v)

    @property
    def counterfactual_cum(self) -> np.ndarray:
        return self.counterfactual / self.T * np.arange(1, self.T + 1)


def proportions(instance: Instance, scheme: TrainingScheme, p1: float | None = None) -> np.ndarray:
    """p_1..p_T for ``scheme``; ``p1`` overrides the instance's initial share."""
    if scheme.T != instance.T:
        raise ShapeError(f"scheme has {scheme.T} rounds, instance has T={instance.T}")
    gaps = scheme.gaps
    p = np.empty(instance.T)
    p[0] = instance.p1 if p1 is None else p1
    for t in range(1, instance.T):
        p[t] = transition(p[t - 1], gaps[t - 1], instance)
    return p


def simulate(instance: Instance, scheme: TrainingScheme) -> Trajectory:
    p = proportions(instance, scheme)
    gamma = np.asarray(scheme.gaps, dtype=int)
    x = np.asarray(scheme.bits, dtype=float)
    u = p * instance.rc(gamma) + (1.0 - p) * instance.rs(p)
    v = p * instance.r - instance.c_m - x * instance.c_train
    return Trajectory(
        p=p, gamma=gamma, u=u, v=v,
        U=float(np.sum(u)), V=float(np.sum(v) / instance.T),
        counterfactual=counterfactual_welfare(instance),
    )


def counterfactual_welfare(instance: Instance) -> float:
    """Welfare with every user on Forum in every round."""
    return instance.T * float(instance.rs(0.0))


def is_socially_beneficial(instance: Instance, scheme: TrainingScheme) -> bool:
    return simulate(instance, scheme).U >= counterfactual_welfare(instance)


def welfare_between(instance: Instance, scheme: TrainingScheme, t: int, t2: int) -> float:
    """sum of u_i for i = t..t2 (inclusive, 1-indexed)."""
    if not 1 <= t <= t2 <= instance.T:
        raise RangeError(f"need 1 <= t <= t2 <= {instance.T}, got t={t}, t2={t2}")
    traj = simulate(instance, scheme)
    return float(np.sum(traj.u[t - 1:t2]))
