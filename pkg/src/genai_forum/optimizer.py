"""Revenue and welfare maximisation over training schemes.

Exact optimisation enumerates all 2^(T-1) schemes, vectorised over scheme
chunks. ``arms`` is the backward-induction dynamic program over an
eps-grid of proportions, which is polynomial in T and 1/eps.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import choice_prob, simulate
from .errors import CapacityError, ParameterError
from .model import Instance, TrainingScheme, lipschitz_constant, vanishes_at_one

BRUTE_FORCE_CAP = 24
CHUNK_BITS = 16
# Objectives closer than this (relative) count as ties.
TIE_RTOL = 1e-12
THREADS_ENV = "GENAI_FORUM_THREADS"


@dataclass(frozen=True)
class OptimizationResult:
    """Optimal (or eps-approximate) scheme and its re-simulated objective.

    ``optimality`` is ``"exact"`` or ``"approx"``; for the latter ``eps`` is
    the grid step and ``guarantee`` says whether the instance met the
    preconditions of the eps * r * T bound. ``ties`` is only set in exact
    mode. ``dp_value`` is the discretised DP estimate of the average revenue.
    """

    scheme: TrainingScheme
    objective: float
    optimality: str
    ties: Optional[int] = None
    eps: Optional[float] = None
    guarantee: Optional[bool] = None
    dp_value: Optional[float] = None


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _check_cap(instance: Instance, cap: int):
    if instance.T > cap:
        raise CapacityError(f"T={instance.T} exceeds the brute-force cap of {cap}")


def _mask_to_scheme(mask: int, T: int) -> TrainingScheme:
    bits = [1] + [(mask >> (T - t)) & 1 for t in range(2, T + 1)]
    return TrainingScheme(tuple(bits))


def _evaluate_chunk(instance: Instance, masks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(V, U) for every scheme encoded in ``masks``.

    Bit (T - t) of a mask is x_t for t >= 2, so integer order equals the
    lexicographic order of the bit vectors.
    """
    T = instance.T
    n = masks.size
    p = np.full(n, float(instance.p1))
    g = np.zeros(n, dtype=np.int64)
    rc_table = np.asarray(instance.rc(np.arange(T + 1)), dtype=float)
    revenue = np.zeros(n)
    welfare = np.zeros(n)
    trainings = np.ones(n)
    for t in range(1, T + 1):
        if t > 1:
            x = (masks >> (T - t)) & 1
            p = choice_prob(rc_table[g], instance.rs(p), instance.beta)
            g = np.where(x == 1, 0, g + 1)
            trainings += x
        rs_p = instance.rs(p)
        revenue += p
        welfare += p * rc_table[g] + (1.0 - p) * rs_p
    V = (instance.r * revenue - instance.c_train * trainings) / T - instance.c_m
    return V, welfare


def _evaluate_all(instance: Instance, threads: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    T = instance.T
    total = 1 << (T - 1)
    chunk = 1 << CHUNK_BITS
    starts = list(range(0, total, chunk))
    V = np.empty(total)
    U = np.empty(total)

    def work(start):
        masks = np.arange(start, min(start + chunk, total), dtype=np.int64)
        V[start:start + masks.size], U[start:start + masks.size] = _evaluate_chunk(instance, masks)

    threads = _default_threads() if threads is None else threads
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, starts))
    else:
        for s in starts:
            work(s)
    return V, U


def _ties(values: np.ndarray, best: float) -> np.ndarray:
    return values >= best - TIE_RTOL * max(1.0, abs(best))


def _argmax_result(instance: Instance, values: np.ndarray, objective: str) -> OptimizationResult:
    best = float(values.max())
    tied = _ties(values, best)
    first = int(np.argmax(tied))
    scheme = _mask_to_scheme(first, instance.T)
    traj = simulate(instance, scheme)
    return OptimizationResult(
        scheme=scheme,
        objective=traj.V if objective == "V" else traj.U,
        optimality="exact",
        ties=int(tied.sum()),
    )


def brute_force_revenue_opt(instance: Instance, cap: int = BRUTE_FORCE_CAP,
                            threads: int | None = None) -> OptimizationResult:
    """Revenue-maximising scheme by exhaustive search.

    Ties resolve to the lexicographically smallest bit vector.
    """
    _check_cap(instance, cap)
    V, _ = _evaluate_all(instance, threads)
    return _argmax_result(instance, V, "V")


def brute_force_welfare_opt(instance: Instance, cap: int = BRUTE_FORCE_CAP,
                            threads: int | None = None) -> OptimizationResult:
    _check_cap(instance, cap)
    _, U = _evaluate_all(instance, threads)
    return _argmax_result(instance, U, "U")


def price_of_anarchy(instance: Instance, cap: int = BRUTE_FORCE_CAP,
                     threads: int | None = None) -> float:
    """max_x U(x) / min of U over all revenue-maximising schemes.

    Returns ``math.inf`` when the denominator is zero.
    """
    _check_cap(instance, cap)
    V, U = _evaluate_all(instance, threads)
    revenue_optimal = _ties(V, float(V.max()))
    worst = float(U[revenue_optimal].min())
    best = float(U.max())
    if worst == 0.0:
        return math.inf
    return best / worst


# ---------------------------------------------------------------------------
# ARMS: dynamic program over a discretised proportion grid
# ---------------------------------------------------------------------------


def arms_eps_bound(instance: Instance) -> float:
    """Largest eps (exclusive) for which the eps * r * T guarantee holds.

    Returns 0 when the instance itself is ineligible.
    """
    L = lipschitz_constant(instance.rs)
    bl = instance.beta * L
    if not vanishes_at_one(instance.rs) or math.isinf(bl) or bl <= 0 or bl >= 16 / 7:
        return 0.0
    return (16 - 7 * bl) / (14 * bl * math.exp(bl) * instance.T)


@dataclass(frozen=True)
class DpTable:
    """Value and action tables of the ARMS recursion.

    ``value[t, s, i]`` is the best undiscounted revenue (without the
    maintenance cost) collectable from rounds t..T when round t starts at
    grid proportion ``i * eps`` and the gap in round t-1 was ``s``;
    ``train[t, s, i]`` is the maximising action. Row t = T+1 is zero.
    """

    eps: float
    grid: np.ndarray
    value: np.ndarray
    train: np.ndarray
    next_cell: np.ndarray

    def cell(self, p: float) -> int:
        return _floor_cell(np.asarray(p), self.eps, self.grid.size)[()]


def _floor_cell(p, eps: float, n: int):
    # floor onto the grid; the tiny guard stops 0.3/0.1 = 2.9999... from
    # dropping a whole cell.
    idx = np.floor(np.asarray(p) / eps + 1e-9).astype(np.int64)
    return np.clip(idx, 0, n - 1)


def build_dp_table(instance: Instance, eps: float) -> DpTable:
    if not eps > 0:
        raise ParameterError(f"eps must be > 0, got {eps}")
    T = instance.T
    n = int(math.floor(1.0 / eps + 1e-9)) + 1
    grid = np.arange(n) * eps
    gmax = T + 1
    rs_grid = instance.rs(np.minimum(grid, 1.0))
    rc_table = np.asarray(instance.rc(np.arange(gmax + 1)), dtype=float)
    # next_cell[g, i]: grid cell reached from cell i when the current gap is g
    next_cell = np.stack([
        _floor_cell(choice_prob(rc_table[g], rs_grid, instance.beta), eps, n)
        for g in range(gmax + 1)
    ])

    value = np.zeros((T + 2, gmax + 1, n))
    train = np.zeros((T + 2, gmax + 1, n), dtype=bool)
    reward = instance.r * grid
    for t in range(T, 0, -1):
        nxt = value[t + 1]
        train_val = reward - instance.c_train + nxt[0][next_cell[0]]
        for s in range(min(t, gmax)):
            skip_val = reward + nxt[s + 1][next_cell[s + 1]]
            # exact ties prefer skipping
            do_train = train_val > skip_val
            if t == 1:
                do_train = np.ones(n, dtype=bool)
            value[t, s] = np.where(do_train, train_val, skip_val)
            train[t, s] = do_train
    return DpTable(eps=eps, grid=grid, value=value, train=train, next_cell=next_cell)


def extract_scheme(table: DpTable, instance: Instance) -> TrainingScheme:
    """Follow the DP actions forward along the discretised proportions."""
    i = table.cell(instance.p1)
    s = 0
    bits = []
    for t in range(1, instance.T + 1):
        x = bool(table.train[t, s, i])
        bits.append(int(x))
        s = 0 if x else s + 1
        i = int(table.next_cell[s, i])
    return TrainingScheme(tuple(bits))


def arms(instance: Instance, eps: float) -> OptimizationResult:
    """Approximately revenue-optimal scheme via the ARMS dynamic program.

    The reported objective is the true (undiscretised) V of the extracted
    scheme. ``guarantee`` is True when R^s(1) = 0, beta * L < 16/7 and eps is
    below the bound from ``arms_eps_bound``; the run proceeds either way.
    """
    table = build_dp_table(instance, eps)
    scheme = extract_scheme(table, instance)
    traj = simulate(instance, scheme)
    dp_value = table.value[1, 0, table.cell(instance.p1)] / instance.T - instance.c_m
    return OptimizationResult(
        scheme=scheme, objective=traj.V, optimality="approx", eps=eps,
        guarantee=eps < arms_eps_bound(instance), dp_value=float(dp_value),
    )


# ---------------------------------------------------------------------------
# Bounded training gaps of optimal schemes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapCertificate:
    """Evidence that optimal schemes never wait more than ``T0`` rounds.

    ``T0`` is the first horizon from which the train-once scheme's cumulative
    revenue stays negative when starting from p1 = 1; ``p_limit`` is the
    share that scheme decays to. ``scheme`` is a cyclic scheme whose
    cumulative revenue on the p1 = 0 variant is ``revenue`` >= 0 after
    ``horizon`` >= T0 rounds.
    """

    T0: int
    decreasing_from: int
    p_limit: float
    scheme: TrainingScheme
    horizon: int
    revenue: float


def _limit_share(instance: Instance, tol: float = 1e-14) -> float:
    """Fixed point of p = choice_prob(inf R^c, R^s(p)), by bisection."""
    floor_rc = instance.rc.infimum

    def h(p):
        return float(choice_prob(floor_rc, instance.rs(p), instance.beta)) - p

    # h(0) >= 0 >= h(1) and h is non-increasing: a single sign change
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if h(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def no_training_horizon(instance: Instance, horizon: int = 10_000) -> Optional[tuple[int, int, float]]:
    """(T0, first drop round, limit share) for the train-once scheme from p1 = 1.

    T0 is the first horizon from which cumulative revenue stays negative.
    Requires the shares to start decreasing and to tend to a limit below
    c_m / r; returns None otherwise.
    """
    if instance.r == 0:
        return None
    worst = instance.replace(p1=1.0, T=horizon)
    p = simulate(worst, TrainingScheme.no_training(horizon)).p
    drops = np.nonzero(p[:-1] >= p[1:])[0]
    if drops.size == 0:
        return None
    t_drop = int(drops[0]) + 1
    p_limit = _limit_share(instance)
    threshold = instance.c_m / instance.r
    if not p_limit < threshold:
        return None
    v = p * instance.r - instance.c_m
    v[0] -= instance.c_train
    cum = np.cumsum(v)
    # Past the first drop the shares keep decreasing, so once p_t < c_m / r
    # every later increment is negative and a negative running sum stays so.
    below = np.nonzero((p < threshold) & (np.arange(1, horizon + 1) > t_drop))[0]
    if below.size == 0:
        return None
    nonneg = np.nonzero(cum >= 0)[0]
    if nonneg.size and nonneg[-1] >= max(int(below[0]), horizon - 1):
        return None
    T0 = int(nonneg[-1]) + 2 if nonneg.size else 1
    return T0, t_drop, p_limit


def gap_certificate(instance: Instance, max_horizon: int = 2_000) -> Optional[GapCertificate]:
    """Certificate bounding the gap between consecutive optimal training rounds.

    Step (a) computes T0 via ``no_training_horizon``. Step (b) searches the
    k-cyclic schemes, k <= T0, on the p1 = 0 variant for the shortest
    horizon T >= T0 at which cumulative revenue is non-negative.
    Returns None if either step fails.
    """
    head = no_training_horizon(instance)
    if head is None:
        return None
    T0, t_drop, p_limit = head
    n = max(max_horizon, T0)
    cold = instance.replace(p1=0.0, T=n)
    best = None
    for k in range(1, T0 + 1):
        scheme = TrainingScheme(tuple(1 if (t - 1) % k == 0 else 0 for t in range(1, n + 1)))
        cum = np.cumsum(simulate(cold, scheme).v)
        ok = np.nonzero(cum[T0 - 1:] >= 0)[0]
        if ok.size:
            horizon = T0 + int(ok[0])
            if best is None or horizon < best[1]:
                best = (k, horizon, float(cum[horizon - 1]))
    if best is None:
        return None
    k, horizon, revenue = best
    scheme = TrainingScheme(tuple(1 if (t - 1) % k == 0 else 0 for t in range(1, horizon + 1)))
    return GapCertificate(T0=T0, decreasing_from=t_drop, p_limit=p_limit,
                          scheme=scheme, horizon=horizon, revenue=revenue)


def training_gap_bound(instance: Instance) -> Optional[int]:
    """T0 when the gap certificate exists, else None."""
    cert = gap_certificate(instance)
    return None if cert is None else cert.T0
