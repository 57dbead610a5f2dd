"""Regulator-side welfare bounds that need no knowledge of the training scheme.

Offsets are counted from a training round tau, so offset t has gap t. The
auxiliary sequence q^alpha seeded at alpha = p_tau reproduces the true
shares p_{tau+t}; seeding at 0 and 1 sandwiches them for any scheme.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .dynamics import choice_prob
from .errors import EligibilityError, ParameterError
from .model import Instance, lipschitz_constant, vanishes_at_one


def aux_sequence(instance: Instance, alpha: float, length: int) -> np.ndarray:
    """q^alpha_0..q^alpha_{length-1} with q_0 = alpha and gap t-1 feeding q_t."""
    if not 0.0 <= alpha <= 1.0:
        raise ParameterError(f"alpha must lie in [0, 1], got {alpha}")
    if length < 1:
        raise ParameterError(f"length must be >= 1, got {length}")
    q = np.empty(length)
    q[0] = alpha
    for t in range(1, length):
        q[t] = choice_prob(instance.rc(t - 1), instance.rs(q[t - 1]), instance.beta)
    return q


@dataclass(frozen=True)
class WelfareBounds:
    """Per-offset share and welfare bounds over a window of ``delta`` rounds.

    ``mode`` is ``"crude"`` (seeds 0 and 1) or ``"noisy"`` (seeds
    p_hat -/+ eps). ``guarantee`` tells whether eps is small enough for the
    per-offset accuracy bounds to be proven; it is None in crude mode.
    """

    q_lo: np.ndarray
    q_hi: np.ndarray
    u_lo: np.ndarray
    u_hi: np.ndarray
    delta: int
    mode: str
    p_hat: Optional[float] = None
    eps: Optional[float] = None
    guarantee: Optional[bool] = None

    @property
    def lower(self) -> float:
        return float(np.sum(self.u_lo))

    @property
    def upper(self) -> float:
        return float(np.sum(self.u_hi))


def _utility_bounds(instance: Instance, q_lo: np.ndarray, q_hi: np.ndarray):
    rc = np.asarray(instance.rc(np.arange(q_lo.size)), dtype=float)
    u_lo = q_lo * rc + (1.0 - q_hi) * instance.rs(q_hi)
    u_hi = q_hi * rc + (1.0 - q_lo) * instance.rs(q_lo)
    return u_lo, u_hi


def _check_delta(delta: int):
    if delta < 1:
        raise ParameterError(f"delta must be >= 1, got {delta}")


def crude_welfare_bounds(instance: Instance, delta: int) -> WelfareBounds:
    _check_delta(delta)
    q_lo = aux_sequence(instance, 0.0, delta)
    q_hi = aux_sequence(instance, 1.0, delta)
    u_lo, u_hi = _utility_bounds(instance, q_lo, q_hi)
    return WelfareBounds(q_lo, q_hi, u_lo, u_hi, delta, "crude")


def check_sufficient(instance: Instance, delta: int) -> bool:
    """Window lower bound clears delta * R^s(0)."""
    return crude_welfare_bounds(instance, delta).lower >= delta * float(instance.rs(0.0))


def check_necessary(instance: Instance, delta: int) -> bool:
    """Window upper bound clears delta * R^s(0); False certifies harm."""
    return crude_welfare_bounds(instance, delta).upper >= delta * float(instance.rs(0.0))


# ---------------------------------------------------------------------------
# Contraction and noisy estimates
# ---------------------------------------------------------------------------


def eps_threshold(instance: Instance) -> float:
    """(16 - 7 beta L) / (14 beta L e^{beta L}), after checking eligibility.

    Raises EligibilityError whose reason is the first failed precondition,
    checking the sensitivity bound before R^s(1) = 0; the message lists all
    failures.
    """
    L = lipschitz_constant(instance.rs)
    bl = instance.beta * L
    failures = []
    if math.isnan(bl) or math.isinf(bl) or bl >= 16 / 7:
        failures.append((EligibilityError.BETA_L_TOO_LARGE, f"beta * L = {bl} must be below 16/7"))
    if not vanishes_at_one(instance.rs):
        failures.append((EligibilityError.NOT_LIPSCHITZ_ZERO_AT_ONE,
                         f"R^s(1) = {float(instance.rs(1.0)):.3g} must be 0"))
    if failures:
        raise EligibilityError(failures[0][0], "; ".join(msg for _, msg in failures))
    if bl <= 0:
        # beta = 0 or constant R^s: shares forget their start after one step
        return math.inf
    return (16 - 7 * bl) / (14 * bl * math.exp(bl))


def contraction_factor(instance: Instance, eps: float) -> float:
    """gamma = 1 / (1 + 2 e^{beta L} delta) with delta = threshold - eps.

    Two share paths under the same scheme that start closer than eps shrink
    their distance by at least gamma per round. eps = 0 gives the limiting
    factor.
    """
    if eps < 0:
        raise ParameterError(f"eps must be >= 0, got {eps}")
    thr = eps_threshold(instance)
    if math.isinf(thr):
        return 0.0
    if eps >= thr:
        raise EligibilityError(EligibilityError.EPS_TOO_LARGE,
                               f"eps = {eps} must be below {thr:.6g}")
    bl = instance.beta * lipschitz_constant(instance.rs)
    return 1.0 / (1.0 + 2.0 * math.exp(bl) * (thr - eps))


def _noisy_gamma(instance: Instance, eps: float) -> float:
    """Contraction factor for the two seeds p_hat -/+ eps, which start 2 eps apart."""
    thr = eps_threshold(instance)
    if not 2.0 * eps < thr:
        raise EligibilityError(EligibilityError.EPS_TOO_LARGE,
                               f"eps = {eps} must be below {thr / 2:.6g} for the accuracy bounds")
    return contraction_factor(instance, 2.0 * eps)


def noisy_welfare_bounds(instance: Instance, p_hat: float, eps: float, delta: int) -> WelfareBounds:
    """Bounds seeded at the clamped estimates p_hat - eps and p_hat + eps.

    Requires the contraction preconditions at ``eps``; ``guarantee`` is False
    when eps is too large for the per-offset accuracy bounds.
    """
    _check_delta(delta)
    if not 0.0 <= p_hat <= 1.0:
        raise ParameterError(f"p_hat must lie in [0, 1], got {p_hat}")
    contraction_factor(instance, eps)
    q_lo = aux_sequence(instance, max(0.0, p_hat - eps), delta)
    q_hi = aux_sequence(instance, min(1.0, p_hat + eps), delta)
    u_lo, u_hi = _utility_bounds(instance, q_lo, q_hi)
    return WelfareBounds(q_lo, q_hi, u_lo, u_hi, delta, "noisy",
                         p_hat=p_hat, eps=eps, guarantee=bool(2.0 * eps < eps_threshold(instance)))


def bound_gap(instance: Instance, eps: float, delta: int) -> float:
    """4 eps sum_t gamma^t (R^c(t) + 2L): cap on upper minus lower noisy sum."""
    _check_delta(delta)
    gamma = _noisy_gamma(instance, eps)
    L = lipschitz_constant(instance.rs)
    t = np.arange(delta)
    rc = np.asarray(instance.rc(t), dtype=float)
    return float(4.0 * eps * np.sum(gamma ** t * (rc + 2.0 * L)))


def check_sufficient_noisy(instance: Instance, p_hat: float, eps: float, delta: int) -> bool:
    b = noisy_welfare_bounds(instance, p_hat, eps, delta)
    return b.lower >= delta * float(instance.rs(0.0))


def check_necessary_noisy(instance: Instance, p_hat: float, eps: float, delta: int) -> bool:
    b = noisy_welfare_bounds(instance, p_hat, eps, delta)
    return b.upper >= delta * float(instance.rs(0.0))


@dataclass(frozen=True)
class VerdictReport:
    delta: int
    mode: str
    verdict_sufficient: bool
    verdict_necessary: bool
    bound_gap: Optional[float]
    guarantee: Optional[bool]
    offsets: list

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def verdict_report(instance: Instance, delta: int, p_hat: float | None = None,
                   eps: float | None = None) -> VerdictReport:
    """Crude verdict when ``p_hat`` is None, noisy verdict otherwise."""
    if p_hat is None:
        b = crude_welfare_bounds(instance, delta)
        gap_value = None
    else:
        eps = 0.0 if eps is None else eps
        b = noisy_welfare_bounds(instance, p_hat, eps, delta)
        gap_value = bound_gap(instance, eps, delta) if b.guarantee else None
    target = delta * float(instance.rs(0.0))
    offsets = [
        {"t": t, "q_lo": float(b.q_lo[t]), "q_hi": float(b.q_hi[t]),
         "u_lo": float(b.u_lo[t]), "u_hi": float(b.u_hi[t])}
        for t in range(delta)
    ]
    return VerdictReport(delta=delta, mode=b.mode,
                         verdict_sufficient=b.lower >= target,
                         verdict_necessary=b.upper >= target,
                         bound_gap=gap_value, guarantee=b.guarantee, offsets=offsets)
