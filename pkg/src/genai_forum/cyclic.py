"""Cyclic and alternating training schemes and their long-run revenue.

A periodic scheme is described by its blocks: ``(k,)`` for the k-cyclic
scheme and ``(a1, a2)`` for the alternating one. The share at the start of
each period evolves by a monotone map G; its fixed point a* determines the
limiting shares inside a period and hence the limiting average revenue.

Enclosures are certified without trusting the contraction estimate: if
G(lo) >= lo and G(hi) <= hi, the monotone G maps [lo, hi] into itself and
therefore has a fixed point there.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .dynamics import transition
from .errors import ConvergenceError, EligibilityError, ParameterError
from .model import BoundedValue, Instance, TrainingScheme
from .optimizer import _default_threads
from .regulator import contraction_factor

# Outward rounding applied per floating-point operation on interval endpoints.
ROUND = 1e-12
# Distance below which the analytic per-round contraction constant applies.
NEIGHBOURHOOD = 0.002
STALL_CYCLES = 100
MAX_CYCLES = 1_000_000
DEFAULT_K_MAX = 8


def cyclic_scheme(k: int, T: int) -> TrainingScheme:
    """Train at rounds 1, 1+k, 1+2k, ..."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if T < 1:
        raise ParameterError(f"T must be >= 1, got {T}")
    return TrainingScheme(tuple(1 if (t - 1) % k == 0 else 0 for t in range(1, T + 1)))


def alternating_scheme(a1: int, a2: int, T: int) -> TrainingScheme:
    """Train at 1, 1+a1, 1+a1+a2, 1+2a1+a2, ..."""
    if a1 < 1 or a2 < 1:
        raise ParameterError(f"a1 and a2 must be >= 1, got {a1}, {a2}")
    if T < 1:
        raise ParameterError(f"T must be >= 1, got {T}")
    rounds, t, step = [], 1, 0
    while t <= T:
        rounds.append(t)
        t += (a1, a2)[step % 2]
        step += 1
    return TrainingScheme.from_rounds(rounds, T)


def transition_compose(instance: Instance, gaps: Sequence[int], p: float) -> float:
    """Apply the one-round transition for each gap in turn, starting from ``p``."""
    for g in gaps:
        p = transition(p, g, instance)
    return p


def _period_gaps(blocks: Sequence[int]) -> list[int]:
    return [g for b in blocks for g in range(b)]


def _period_shares(instance: Instance, gaps: Sequence[int], a: float) -> np.ndarray:
    """Shares at every round of one period starting from ``a``, plus the next start."""
    out = np.empty(len(gaps) + 1)
    out[0] = a
    for i, g in enumerate(gaps):
        out[i + 1] = transition(out[i], g, instance)
    return out


@dataclass(frozen=True)
class CycleFixedPoint:
    """Limiting shares over one period with certified enclosures.

    ``q_star[i]`` encloses the share at position i+1 of the period (the
    first entry is the share in the training round). ``iterates`` holds
    a_1 = p1, a_2, ... up to the stopping iterate. ``certificate`` is
    ``"analytic"`` when the proven per-round constant backed the stopping
    rule and ``"empirical"`` when the observed ratio did.
    """

    k: int
    blocks: tuple[int, ...]
    q_star: tuple[BoundedValue, ...]
    contraction_gamma: float
    iterates: tuple[float, ...]
    certificate: str

    @property
    def a_star(self) -> BoundedValue:
        return self.q_star[0]


def _analytic_gamma(instance: Instance, k: int) -> Optional[float]:
    try:
        return contraction_factor(instance, NEIGHBOURHOOD) ** k
    except EligibilityError:
        return None


def _enclose(G, centre: float, radius: float) -> tuple[float, float]:
    """Smallest doubling of ``radius`` whose interval G maps into itself."""
    radius = max(radius, 1e-13)
    for _ in range(60):
        lo, hi = max(0.0, centre - radius), min(1.0, centre + radius)
        if G(lo) >= lo and G(hi) <= hi:
            return lo, hi
        radius *= 2.0
    raise ConvergenceError("could not certify an enclosure of the fixed point")


def periodic_fixed_point(instance: Instance, blocks: Sequence[int], tol: float = 1e-12) -> CycleFixedPoint:
    """Fixed point of the period map for a scheme with the given blocks."""
    blocks = tuple(int(b) for b in blocks)
    if not blocks or min(blocks) < 1:
        raise ParameterError(f"blocks must be positive, got {blocks}")
    if not tol > 0:
        raise ParameterError(f"tol must be > 0, got {tol}")
    gaps = _period_gaps(blocks)
    period = len(gaps)

    def G(a):
        return transition_compose(instance, gaps, a)

    analytic = _analytic_gamma(instance, period)
    iterates = [float(instance.p1)]
    iterates.append(G(iterates[0]))
    d_prev = abs(iterates[1] - iterates[0])
    gamma, kind, stalled = 0.0, "empirical", 0
    while True:
        d = d_prev
        if d == 0.0:
            gamma = 0.0
            break
        iterates.append(G(iterates[-1]))
        d_next = abs(iterates[-1] - iterates[-2])
        ratio = d_next / d
        stalled = stalled + 1 if ratio >= 1.0 else 0
        if stalled >= STALL_CYCLES:
            raise ConvergenceError(f"period map for blocks {blocks} is not contracting")
        if len(iterates) > MAX_CYCLES:
            raise ConvergenceError(f"no convergence after {MAX_CYCLES} periods")
        if analytic is not None and d < NEIGHBOURHOOD:
            gamma, kind = max(ratio, analytic), "analytic"
        else:
            gamma, kind = ratio, "empirical"
        d_prev = d_next
        if gamma < 1.0 and d / (1.0 - gamma) <= tol:
            # vicinity bound centred on the second-to-last iterate
            iterates.pop()
            break
    centre = iterates[-2] if len(iterates) > 1 else iterates[-1]
    radius = d / (1.0 - gamma) if d > 0 else 0.0
    lo, hi = _enclose(G, centre, radius)
    lo_path = _period_shares(instance, gaps, lo)
    hi_path = _period_shares(instance, gaps, hi)
    mid_path = _period_shares(instance, gaps, centre)
    q_star = []
    for i in range(period):
        slack = ROUND * (i + 1)
        q_lo = max(0.0, float(lo_path[i]) - slack)
        q_hi = min(1.0, float(hi_path[i]) + slack)
        q_star.append(BoundedValue(min(max(float(mid_path[i]), q_lo), q_hi), q_lo, q_hi))
    return CycleFixedPoint(k=period, blocks=blocks, q_star=tuple(q_star),
                           contraction_gamma=float(gamma), iterates=tuple(float(a) for a in iterates), certificate=kind)


def cycle_fixed_point(instance: Instance, k: int, tol: float = 1e-12) -> CycleFixedPoint:
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    return periodic_fixed_point(instance, (k,), tol)


def vicinity_radius(step: float, gamma: float) -> float:
    """Bound on |a_i - a*| given |a_{i+1} - a_i| = step and contraction gamma."""
    if not 0.0 <= gamma < 1.0:
        raise ParameterError(f"gamma must lie in [0, 1), got {gamma}")
    return step / (1.0 - gamma)


@dataclass(frozen=True)
class RevenueInterval:
    """Enclosure of the long-run average revenue lim V.

    ``sum_lo``/``sum_hi`` enclose the sum of limiting shares over a period.
    ``per_round`` is True because lim V is an average per round.
    """

    lower: float
    upper: float
    sum_lo: float
    sum_hi: float
    per_round: bool = True

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError(f"lower {self.lower} > upper {self.upper}")

    def shifted(self, c: float) -> tuple[float, float]:
        return self.lower + c, self.upper + c

    def overlaps(self, other: "RevenueInterval") -> bool:
        return self.lower <= other.upper and other.lower <= self.upper


def periodic_revenue(instance: Instance, blocks: Sequence[int], tol: float = 1e-12) -> RevenueInterval:
    fp = periodic_fixed_point(instance, blocks, tol)
    n = len(fp.q_star)
    sum_lo = sum(q.lo for q in fp.q_star) - ROUND * n
    sum_hi = sum(q.hi for q in fp.q_star) + ROUND * n
    trainings = len(fp.blocks)
    r, c_train, c_m = instance.r, instance.c_train, instance.c_m
    lower = (r * sum_lo - c_train * trainings) / n - c_m - 3 * ROUND
    upper = (r * sum_hi - c_train * trainings) / n - c_m + 3 * ROUND
    return RevenueInterval(float(lower), float(upper), float(sum_lo), float(sum_hi))


def asymptotic_cycle_revenue(instance: Instance, k: int, tol: float = 1e-12) -> RevenueInterval:
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    return periodic_revenue(instance, (k,), tol)


def asymptotic_alternating_revenue(instance: Instance, a1: int, a2: int,
                                   tol: float = 1e-12) -> RevenueInterval:
    """lim V for the scheme alternating gaps a1 and a2 (two trainings per period)."""
    if a1 < 1 or a2 < 1:
        raise ParameterError(f"a1 and a2 must be >= 1, got {a1}, {a2}")
    return periodic_revenue(instance, (a1, a2), tol)


def _cycle_table(instance: Instance, k_max: int) -> dict[int, RevenueInterval]:
    if k_max < 1:
        raise ParameterError(f"k_max must be >= 1, got {k_max}")
    ks = range(1, k_max + 1)
    threads = _default_threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return dict(zip(ks, pool.map(lambda k: asymptotic_cycle_revenue(instance, k), ks)))
    return {k: asymptotic_cycle_revenue(instance, k) for k in ks}


class CycleChoice(NamedTuple):
    k: int
    interval: RevenueInterval
    undecided: bool


def best_cycle(instance: Instance, k_max: int = DEFAULT_K_MAX) -> CycleChoice:
    """Cycle length with the largest certified lower bound on lim V.

    ``undecided`` is set when another cycle's interval overlaps the winner's.
    """
    table = _cycle_table(instance, k_max)
    k = max(table, key=lambda j: table[j].lower)
    undecided = any(j != k and table[j].overlaps(table[k]) for j in table)
    return CycleChoice(k, table[k], undecided)


def noncyclic_beats_cyclic(instance: Instance, a1: int, a2: int,
                           k_max: int = DEFAULT_K_MAX) -> float:
    """Certified margin of the alternating scheme over every k-cyclic one.

    A positive value proves lim V(alternating) > lim V(x^k) for all k <= k_max.
    """
    alt = asymptotic_alternating_revenue(instance, a1, a2)
    table = _cycle_table(instance, k_max)
    return alt.lower - max(iv.upper for iv in table.values())


TABLE_HEADER = ["scheme", "sum_lo", "sum_hi", "limV_plus_cm_lo", "limV_plus_cm_hi"]


def revenue_table(instance: Instance, k_max: int = DEFAULT_K_MAX,
                  pairs: Sequence[tuple[int, int]] = ((2, 3),)) -> list[tuple[str, RevenueInterval]]:
    """Rows for x^1..x^{k_max} followed by the given alternating pairs."""
    rows = [(f"x^{k}", iv) for k, iv in _cycle_table(instance, k_max).items()]
    rows += [(f"x^{a1},{a2}", asymptotic_alternating_revenue(instance, a1, a2)) for a1, a2 in pairs]
    return rows


def table_csv(instance: Instance, rows: list[tuple[str, RevenueInterval]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_HEADER)
    for name, iv in rows:
        lo, hi = iv.shifted(instance.c_m)
        w.writerow([name] + [f"{x:.12g}" for x in (iv.sum_lo, iv.sum_hi, lo, hi)])
    return buf.getvalue()
