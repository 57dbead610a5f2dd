"""Domain types: utility functions, problem instances and training schemes.

Rounds are 1-indexed everywhere in the public API: ``scheme.bits[0]`` is the
decision for round 1, ``gap(scheme, 1)`` is the gap in round 1, and so on.
Utility objects are callables that also accept numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Union

import numpy as np

from .errors import RangeError, ValidationError

# Horizon up to which R^c is scanned when checking the "GenAI eventually
# becomes worse than Forum" half of the utility assumption.
PROBE_HORIZON = 10_000


# ---------------------------------------------------------------------------
# GenAI utility R^c (decays with rounds since last training)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpDecay:
    """R^c(t) = a * b**t + c."""

    a: float
    b: float
    c: float = 0.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValidationError(f"exp_decay: a must be > 0, got {self.a}")
        if not 0 < self.b < 1:
            raise ValidationError(f"exp_decay: b must lie in (0, 1), got {self.b}")
        if not self.c >= 0:
            raise ValidationError(f"exp_decay: c must be >= 0, got {self.c}")

    def __call__(self, t):
        return self.a * np.power(self.b, t) + self.c

    @property
    def infimum(self) -> float:
        return float(self.c)


@dataclass(frozen=True)
class TabulatedDecay:
    """R^c(t) = values[t] for t < len(values), ``tail`` afterwards."""

    values: tuple[float, ...]
    tail: float

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "tail", float(self.tail))
        if not vals:
            raise ValidationError("tabulated decay needs at least one value")
        seq = vals + (self.tail,)
        if any(v < 0 for v in seq):
            raise ValidationError("tabulated decay values must be >= 0")
        if any(b > a for a, b in zip(seq, seq[1:])):
            raise ValidationError("tabulated decay must be non-increasing (tail <= last value)")

    def __call__(self, t):
        table = np.asarray(self.values + (self.tail,))
        idx = np.minimum(np.asarray(t), len(self.values))
        out = table[idx]
        return float(out) if np.ndim(out) == 0 else out

    @property
    def infimum(self) -> float:
        return self.tail


DecayUtility = Union[ExpDecay, TabulatedDecay]


# ---------------------------------------------------------------------------
# Forum utility R^s (network effect, decreasing in the GenAI share p)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Linear:
    """R^s(p) = u0 - s * p.

    Negative values at p = 1 are rejected unless ``allow_negative`` is set.
    """

    u0: float
    s: float
    allow_negative: bool = False

    def __post_init__(self):
        if not self.s > 0:
            raise ValidationError(f"linear: slope s must be > 0, got {self.s}")
        if not self.allow_negative and self.u0 - self.s < 0:
            raise ValidationError(
                f"linear: R^s(1) = {self.u0 - self.s} < 0; pass allow_negative to permit it"
            )

    def __call__(self, p):
        out = self.u0 - self.s * np.asarray(p, dtype=float)
        return float(out) if out.ndim == 0 else out

    def lipschitz(self) -> float:
        return float(self.s)


@dataclass(frozen=True)
class Logistic:
    """R^s(p) = 1 / (1 + exp(-k (m - p)))."""

    k: float
    m: float

    def __post_init__(self):
        if not self.k > 0:
            raise ValidationError(f"logistic: k must be > 0, got {self.k}")
        if not 0 <= self.m <= 1:
            raise ValidationError(f"logistic: midpoint m must lie in [0, 1], got {self.m}")

    def __call__(self, p):
        z = self.k * (self.m - np.asarray(p, dtype=float))
        out = _sigmoid(z)
        return float(out) if np.ndim(out) == 0 else out

    def lipschitz(self) -> float:
        return self.k / 4.0


@dataclass(frozen=True)
class TabulatedNetwork:
    """Piecewise-linear R^s through ``points`` = ((p, value), ...) covering [0, 1]."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(p), float(v)) for p, v in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise ValidationError("tabulated network utility needs at least two points")
        ps = [p for p, _ in pts]
        vs = [v for _, v in pts]
        if ps[0] != 0.0 or ps[-1] != 1.0:
            raise ValidationError("tabulated network utility grid must start at 0 and end at 1")
        if any(b <= a for a, b in zip(ps, ps[1:])):
            raise ValidationError("tabulated network utility grid must be strictly increasing")
        if any(b > a for a, b in zip(vs, vs[1:])):
            raise ValidationError("tabulated network utility values must be non-increasing")
        if any(v < 0 for v in vs):
            raise ValidationError("tabulated network utility values must be >= 0")

    def __call__(self, p):
        xs, ys = zip(*self.points)
        out = np.interp(p, xs, ys)
        return float(out) if np.ndim(out) == 0 else out

    def lipschitz(self) -> float:
        return max(abs(v2 - v1) / (p2 - p1) for (p1, v1), (p2, v2) in zip(self.points, self.points[1:]))


NetworkUtility = Union[Linear, Logistic, TabulatedNetwork]


def _sigmoid(z):
    """Overflow-free 1 / (1 + exp(-z)) for scalars and arrays."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out[()] if out.ndim == 0 else out


def eval_rc(rc: DecayUtility, t: int) -> float:
    if t < 0:
        raise RangeError(f"R^c is defined for t >= 0, got {t}")
    return float(rc(t))


def eval_rs(rs: NetworkUtility, p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise RangeError(f"R^s is defined on [0, 1], got p={p}")
    return float(rs(p))


def lipschitz_constant(rs: NetworkUtility) -> float:
    return float(rs.lipschitz())


def vanishes_at_one(rs: NetworkUtility, atol: float = 1e-12) -> bool:
    """Whether R^s(1) = 0, the precondition of the contraction results."""
    return abs(float(rs(1.0))) <= atol


# ---------------------------------------------------------------------------
# Instance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Instance:
    """Problem tuple <r, c_m, c_train, R^c, R^s, beta, p1> plus horizon T.

    ``beta = math.inf`` models utility-maximising users: the share jumps to
    1, 0.5 or 0 depending on which platform was better last round.
    """

    r: float
    c_m: float
    c_train: float
    rc: DecayUtility
    rs: NetworkUtility
    beta: float
    p1: float
    T: int

    def __post_init__(self):
        for name in ("r", "c_m", "c_train"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val >= 0):
                raise ValidationError(f"{name} must be a finite non-negative number, got {val!r}")
        if not (isinstance(self.beta, (int, float)) and self.beta >= 0) or math.isnan(self.beta):
            raise ValidationError(f"beta must be >= 0 (or inf), got {self.beta!r}")
        if not 0.0 <= self.p1 <= 1.0:
            raise ValidationError(f"p1 must lie in [0, 1], got {self.p1}")
        if isinstance(self.T, bool) or not isinstance(self.T, (int, np.integer)) or self.T < 1:
            raise ValidationError(f"T must be an integer >= 1, got {self.T!r}")
        object.__setattr__(self, "T", int(self.T))
        self._check_utility_assumption()

    def _check_utility_assumption(self):
        rs0 = float(self.rs(0.0))
        rc0 = float(self.rc(0))
        if not rs0 < rc0:
            raise ValidationError(
                f"utility assumption violated: need R^s(0) < R^c(0), got {rs0} >= {rc0}"
            )
        # R^c is monotone with a known limit, so scanning a finite horizon and
        # comparing against the limit are equivalent; the limit check is exact.
        if not self.rc.infimum < rs0:
            raise ValidationError(
                "utility assumption violated: R^c(t) never drops below "
                f"R^s(0) = {rs0} (inf R^c = {self.rc.infimum})"
            )

    @property
    def strategic(self) -> bool:
        return math.isinf(self.beta)

    def replace(self, **changes) -> "Instance":
        return replace(self, **changes)

    def witness_round(self) -> int:
        """Smallest t with R^c(t) < R^s(0)."""
        rs0 = float(self.rs(0.0))
        horizon = max(self.T, PROBE_HORIZON)
        ts = np.arange(horizon + 1)
        below = np.nonzero(np.asarray(self.rc(ts)) < rs0)[0]
        if below.size:
            return int(below[0])
        t = horizon
        while not float(self.rc(t)) < rs0:
            t *= 2
        return t


# ---------------------------------------------------------------------------
# Training schemes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrainingScheme:
    """Binary training decisions for rounds 1..T; round 1 always trains."""

    bits: tuple[int, ...]
    _gaps: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        bits = tuple(int(bool(b)) for b in self.bits)
        if not bits:
            raise ValidationError("a training scheme needs at least one round")
        if bits[0] != 1:
            raise ValidationError("a training scheme must train in round 1")
        object.__setattr__(self, "bits", bits)
        gaps, g = [], 0
        for b in bits:
            g = 0 if b else g + 1
            gaps.append(g)
        object.__setattr__(self, "_gaps", tuple(gaps))

    @classmethod
    def from_rounds(cls, rounds: Iterable[int], T: int) -> "TrainingScheme":
        rounds = set(rounds)
        if any(not 1 <= t <= T for t in rounds):
            raise RangeError(f"training rounds must lie in [1, {T}]")
        return cls(tuple(1 if t in rounds else 0 for t in range(1, T + 1)))

    @classmethod
    def from_string(cls, text: str) -> "TrainingScheme":
        if not text or set(text) - {"0", "1"}:
            raise ValidationError(f"scheme string must consist of 0/1 characters, got {text!r}")
        return cls(tuple(int(c) for c in text))

    @classmethod
    def all_ones(cls, T: int) -> "TrainingScheme":
        return cls((1,) * T)

    @classmethod
    def no_training(cls, T: int) -> "TrainingScheme":
        return cls((1,) + (0,) * (T - 1))

    @property
    def T(self) -> int:
        return len(self.bits)

    @property
    def training_rounds(self) -> tuple[int, ...]:
        return tuple(t for t, b in enumerate(self.bits, start=1) if b)

    @property
    def gaps(self) -> tuple[int, ...]:
        """gamma_t for t = 1..T (as a 0-indexed tuple)."""
        return self._gaps

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


def gap(scheme: TrainingScheme, t: int) -> int:
    """Rounds since the last training at or before round t."""
    if not 1 <= t <= scheme.T:
        raise RangeError(f"round {t} outside [1, {scheme.T}]")
    return scheme.gaps[t - 1]


def max_gap(scheme: TrainingScheme) -> int:
    """Longest distance between consecutive training rounds, with T+1 as sentinel."""
    taus = list(scheme.training_rounds) + [scheme.T + 1]
    return max(b - a for a, b in zip(taus, taus[1:]))


# ---------------------------------------------------------------------------
# Certified scalars
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundedValue:
    """A point estimate with an enclosing interval [lo, hi]."""

    value: float
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.value <= self.hi:
            raise ValueError(f"value {self.value} outside [{self.lo}, {self.hi}]")

    @property
    def radius(self) -> float:
        return max(self.value - self.lo, self.hi - self.value)

    def __contains__(self, x: float) -> bool:
        return self.lo <= x <= self.hi


def example1_instance(T: int = 20, p1: float = 1.0) -> Instance:
    """The running example: r=1, c_m=0.6, c_train=0.504, R^c=3*0.5^t, R^s=1-p, beta=1."""
    return Instance(
        r=1.0, c_m=0.6, c_train=0.504, rc=ExpDecay(3.0, 0.5, 0.0), rs=Linear(1.0, 1.0),
        beta=1.0, p1=p1, T=T,
    )


def example2_instance(T: int = 20, p1: float = 1.0) -> Instance:
    """Bistable instance: R^c=1.1*0.8^t, logistic R^s (k=100, m=0.8), beta=10.

    Only the user-side parameters are pinned down; the revenue parameters
    reuse the running example's values.
    """
    return Instance(
        r=1.0, c_m=0.6, c_train=0.504, rc=ExpDecay(1.1, 0.8, 0.0), rs=Logistic(100.0, 0.8),
        beta=10.0, p1=p1, T=T,
    )


def strategic_instance(T: int = 20) -> Instance:
    """Strategic users (beta = inf) with prohibitive training cost c_train = 2T."""
    return Instance(
        r=1.0, c_m=0.6, c_train=2.0 * T, rc=ExpDecay(3.0, 0.5, 0.0), rs=Linear(1.0, 1.0),
        beta=math.inf, p1=1.0, T=T,
    )
