"""Command-line entry point: config parsing, subcommands and CSV/report output.

Config files hold one ``key = value`` per line; ``#`` starts a comment.
Utility functions are written as calls, for example::

    r = 1.0
    c_m = 0.6
    c_train = 0.504
    rc = exp_decay(3.0, 0.5, 0.0)
    rs = linear(1.0, 1.0)
    beta = 1.0
    p1 = 1.0
    T = 20

Supported function specs: ``exp_decay(a, b, c)``, ``tabulated_decay(v0, v1,
...; tail)``, ``linear(u0, s)`` (append ``, allow_negative`` to permit
R^s(1) < 0), ``logistic(k, m)`` and ``tabulated_network(p:v, p:v, ...)``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import dataclass, fields, replace
from typing import Optional, Sequence

from . import cyclic, dynamics, optimizer, regulator
from .errors import ConfigError, GenAIForumError, ValidationError
from .model import (ExpDecay, Instance, Linear, Logistic, TabulatedDecay, TabulatedNetwork,
                    TrainingScheme, max_gap)

INSTANCE_KEYS = ("r", "c_m", "c_train", "rc", "rs", "beta", "p1", "T")
OPTION_KEYS = ("scheme", "delta", "eps", "p_hat", "k_max", "p1_values", "out")
TRAJECTORY_HEADER = ["round", "p", "gamma", "u", "v", "U_cum", "V_cum", "counterfactual_cum"]
COMMANDS = ("simulate", "optimize", "cyclic", "regulate", "poa", "figure1", "figure2")
DEFAULT_P1_VALUES = tuple(round(0.1 * i, 1) for i in range(11))

_CALL = re.compile(r"^([a-z_]+)\((.*)\)$")
_SCHEME = re.compile(
    r"^(?:[01]+|cyclic:\d+|alternating:\d+:\d+|optimal:brute|optimal:arms:[^:\s]+|welfare-opt|none:x0)$"
)


@dataclass(frozen=True)
class RunConfig:
    instance: Instance
    scheme: Optional[str] = None
    delta: Optional[int] = None
    eps: Optional[float] = None
    p_hat: Optional[float] = None
    k_max: Optional[int] = None
    p1_values: Optional[tuple[float, ...]] = None
    out: Optional[str] = None


# ---------------------------------------------------------------------------
# Parsing and emission
# ---------------------------------------------------------------------------


def fmt(x: float) -> str:
    """Shortest text that parses back to the same float."""
    return "inf" if math.isinf(x) else repr(float(x))


def _num(text: str, line: int, key: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(ConfigError.TYPE_MISMATCH, f"{key}: expected a number, got {text!r}",
                          line, key) from None


def _int(text: str, line: int, key: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(ConfigError.TYPE_MISMATCH, f"{key}: expected an integer, got {text!r}",
                          line, key) from None


def _args(body: str) -> list[str]:
    return [a.strip() for a in body.split(",")] if body.strip() else []


def parse_function(text: str, line: int = 0, key: str = "") -> object:
    m = _CALL.match(text.replace(" ", ""))
    if not m:
        raise ConfigError(ConfigError.SYNTAX, f"{key}: expected name(args), got {text!r}", line, key)
    name, body = m.groups()
    try:
        if name == "exp_decay":
            args = [_num(a, line, key) for a in _args(body)]
            if len(args) not in (2, 3):
                raise ConfigError(ConfigError.SYNTAX, "exp_decay takes 2 or 3 arguments", line, key)
            return ExpDecay(*args)
        if name == "tabulated_decay":
            values, sep, tail = body.partition(";")
            if not sep:
                raise ConfigError(ConfigError.SYNTAX, "tabulated_decay needs '; tail'", line, key)
            return TabulatedDecay(tuple(_num(a, line, key) for a in _args(values)), _num(tail, line, key))
        if name == "linear":
            args = _args(body)
            flag = bool(args) and args[-1] == "allow_negative"
            nums = [_num(a, line, key) for a in (args[:-1] if flag else args)]
            if len(nums) != 2:
                raise ConfigError(ConfigError.SYNTAX, "linear takes (u0, s)", line, key)
            return Linear(*nums, allow_negative=flag)
        if name == "logistic":
            nums = [_num(a, line, key) for a in _args(body)]
            if len(nums) != 2:
                raise ConfigError(ConfigError.SYNTAX, "logistic takes (k, m)", line, key)
            return Logistic(*nums)
        if name == "tabulated_network":
            pts = []
            for a in _args(body):
                p, sep, v = a.partition(":")
                if not sep:
                    raise ConfigError(ConfigError.SYNTAX, f"expected p:value, got {a!r}", line, key)
                pts.append((_num(p, line, key), _num(v, line, key)))
            return TabulatedNetwork(tuple(pts))
    except ValidationError as exc:
        raise ConfigError(ConfigError.INVALID_INSTANCE, f"{key}: {exc}", line, key) from None
    raise ConfigError(ConfigError.SYNTAX, f"{key}: unknown function {name!r}", line, key)


def emit_function(fn) -> str:
    if isinstance(fn, ExpDecay):
        return f"exp_decay({fmt(fn.a)}, {fmt(fn.b)}, {fmt(fn.c)})"
    if isinstance(fn, TabulatedDecay):
        return f"tabulated_decay({', '.join(fmt(v) for v in fn.values)}; {fmt(fn.tail)})"
    if isinstance(fn, Linear):
        extra = ", allow_negative" if fn.allow_negative else ""
        return f"linear({fmt(fn.u0)}, {fmt(fn.s)}{extra})"
    if isinstance(fn, Logistic):
        return f"logistic({fmt(fn.k)}, {fmt(fn.m)})"
    if isinstance(fn, TabulatedNetwork):
        return f"tabulated_network({', '.join(f'{fmt(p)}:{fmt(v)}' for p, v in fn.points)})"
    raise TypeError(f"cannot emit {fn!r}")


def parse_config(text: str) -> RunConfig:
    """Parse and validate config text; errors carry a code, line and key."""
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(ConfigError.SYNTAX, f"expected 'key = value', got {line!r}", lineno)
        if key not in INSTANCE_KEYS and key not in OPTION_KEYS:
            raise ConfigError(ConfigError.UNKNOWN_KEY, f"unknown key {key!r}", lineno, key)
        if key in raw:
            raise ConfigError(ConfigError.DUPLICATE_KEY, f"{key!r} given twice", lineno, key)
        raw[key] = (value, lineno)
    for key in INSTANCE_KEYS:
        if key not in raw:
            raise ConfigError(ConfigError.MISSING_KEY, f"missing required key {key!r}", key=key)

    vals: dict[str, object] = {}
    for key in ("r", "c_m", "c_train", "beta", "p1"):
        vals[key] = _num(*raw[key], key)
    vals["T"] = _int(*raw["T"], "T")
    vals["rc"] = parse_function(*raw["rc"], "rc")
    vals["rs"] = parse_function(*raw["rs"], "rs")
    try:
        instance = Instance(**vals)
    except ValidationError as exc:
        raise ConfigError(ConfigError.INVALID_INSTANCE, str(exc)) from None

    opts: dict[str, object] = {}
    if "scheme" in raw:
        spec, lineno = raw["scheme"]
        check_scheme_spec(spec, lineno)
        opts["scheme"] = spec
    for key in ("delta", "k_max"):
        if key in raw:
            opts[key] = _int(*raw[key], key)
    for key in ("eps", "p_hat"):
        if key in raw:
            opts[key] = _num(*raw[key], key)
    if "p1_values" in raw:
        text, lineno = raw["p1_values"]
        opts["p1_values"] = tuple(_num(a, lineno, "p1_values") for a in _args(text))
    if "out" in raw:
        opts["out"] = raw["out"][0]
    return RunConfig(instance=instance, **opts)


def emit_config(cfg: RunConfig) -> str:
    """Canonical text form; ``parse_config(emit_config(c)) == c``."""
    inst = cfg.instance
    lines = [
        f"r = {fmt(inst.r)}",
        f"c_m = {fmt(inst.c_m)}",
        f"c_train = {fmt(inst.c_train)}",
        f"rc = {emit_function(inst.rc)}",
        f"rs = {emit_function(inst.rs)}",
        f"beta = {fmt(inst.beta)}",
        f"p1 = {fmt(inst.p1)}",
        f"T = {inst.T}",
    ]
    if cfg.scheme is not None:
        lines.append(f"scheme = {cfg.scheme}")
    for key in ("delta", "k_max"):
        if getattr(cfg, key) is not None:
            lines.append(f"{key} = {getattr(cfg, key)}")
    for key in ("eps", "p_hat"):
        if getattr(cfg, key) is not None:
            lines.append(f"{key} = {fmt(getattr(cfg, key))}")
    if cfg.p1_values is not None:
        lines.append(f"p1_values = {', '.join(fmt(v) for v in cfg.p1_values)}")
    if cfg.out is not None:
        lines.append(f"out = {cfg.out}")
    return "\n".join(lines) + "\n"


def check_scheme_spec(spec: str, line: int | None = None):
    if not _SCHEME.match(spec):
        raise ConfigError(ConfigError.SYNTAX, f"bad scheme spec {spec!r}", line, "scheme")
    if spec.startswith("optimal:arms:"):
        _num(spec.split(":", 2)[2], line or 0, "scheme")


def resolve_scheme(spec: str, instance: Instance):
    """TrainingScheme for ``spec``, plus the OptimizationResult when one was run."""
    check_scheme_spec(spec)
    T = instance.T
    if spec == "none:x0":
        return TrainingScheme.no_training(T), None
    if spec.startswith("cyclic:"):
        return cyclic.cyclic_scheme(int(spec.split(":")[1]), T), None
    if spec.startswith("alternating:"):
        _, a1, a2 = spec.split(":")
        return cyclic.alternating_scheme(int(a1), int(a2), T), None
    if spec == "optimal:brute":
        res = optimizer.brute_force_revenue_opt(instance)
        return res.scheme, res
    if spec.startswith("optimal:arms:"):
        res = optimizer.arms(instance, float(spec.split(":", 2)[2]))
        return res.scheme, res
    if spec == "welfare-opt":
        res = optimizer.brute_force_welfare_opt(instance)
        return res.scheme, res
    if len(spec) != T:
        raise ConfigError(ConfigError.SYNTAX, f"bit string has {len(spec)} rounds, T = {T}",
                          key="scheme")
    try:
        return TrainingScheme.from_string(spec), None
    except ValueError as exc:
        raise ConfigError(ConfigError.SYNTAX, str(exc), key="scheme") from None


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _g(x) -> str:
    return f"{float(x):.12g}"


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def trajectory_csv(traj: dynamics.Trajectory) -> str:
    cols = (traj.p, traj.gamma, traj.u, traj.v, traj.U_cum, traj.V_cum, traj.counterfactual_cum)
    rows = []
    for t in range(traj.T):
        p, g, u, v, Uc, Vc, cf = (c[t] for c in cols)
        rows.append([t + 1, _g(p), int(g), _g(u), _g(v), _g(Uc), _g(Vc), _g(cf)])
    return _csv(TRAJECTORY_HEADER, rows)


def _simulate(cfg: RunConfig) -> str:
    scheme, _ = resolve_scheme(cfg.scheme or "none:x0", cfg.instance)
    return trajectory_csv(dynamics.simulate(cfg.instance, scheme))


def _optimize(cfg: RunConfig) -> str:
    spec = cfg.scheme or "optimal:brute"
    if cfg.eps is not None and cfg.scheme is None:
        spec = f"optimal:arms:{fmt(cfg.eps)}"
    scheme, res = resolve_scheme(spec, cfg.instance)
    traj = dynamics.simulate(cfg.instance, scheme)
    report = {
        "scheme": str(scheme),
        "training_rounds": list(scheme.training_rounds),
        "V": traj.V,
        "U": traj.U,
        "counterfactual": traj.counterfactual,
    }
    if res is not None:
        report.update(objective=res.objective, optimality=res.optimality, ties=res.ties,
                      eps=res.eps, guarantee=res.guarantee, dp_value=res.dp_value)
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _cyclic(cfg: RunConfig) -> str:
    pairs = [(2, 3)]
    if cfg.scheme and cfg.scheme.startswith("alternating:"):
        _, a1, a2 = cfg.scheme.split(":")
        pairs = [(int(a1), int(a2))]
    k_max = cfg.k_max or cyclic.DEFAULT_K_MAX
    rows = cyclic.revenue_table(cfg.instance, k_max, pairs)
    return cyclic.table_csv(cfg.instance, rows)


def _regulate(cfg: RunConfig) -> str:
    delta = cfg.delta
    if delta is None:
        if cfg.scheme is None:
            raise ConfigError(ConfigError.MISSING_KEY, "regulate needs delta or a scheme", key="delta")
        scheme, _ = resolve_scheme(cfg.scheme, cfg.instance)
        delta = max_gap(scheme)
    return regulator.verdict_report(cfg.instance, delta, cfg.p_hat, cfg.eps).to_json() + "\n"


def _poa(cfg: RunConfig) -> str:
    return _g(optimizer.price_of_anarchy(cfg.instance)) + "\n"


def _figure1(cfg: RunConfig) -> str:
    inst = cfg.instance
    x0 = dynamics.simulate(inst, TrainingScheme.no_training(inst.T))
    xr = dynamics.simulate(inst, optimizer.brute_force_revenue_opt(inst).scheme)
    xw = dynamics.simulate(inst, optimizer.brute_force_welfare_opt(inst).scheme)
    rows = [[t + 1, _g(x0.U_cum[t]), _g(xr.U_cum[t]), _g(xw.U_cum[t]), _g(x0.counterfactual_cum[t])]
            for t in range(inst.T)]
    return _csv(["round", "x0", "xr", "xw", "counterfactual"], rows)


def _figure2(cfg: RunConfig) -> str:
    inst = cfg.instance
    p1s = cfg.p1_values or DEFAULT_P1_VALUES
    scheme, _ = resolve_scheme(cfg.scheme or "none:x0", inst)
    series = [dynamics.proportions(inst, scheme, p1) for p1 in p1s]
    rows = [[t + 1] + [_g(s[t]) for s in series] for t in range(inst.T)]
    return _csv(["round"] + [f"p1={fmt(p)}" for p in p1s], rows)


_DISPATCH = {
    "simulate": _simulate, "optimize": _optimize, "cyclic": _cyclic, "regulate": _regulate,
    "poa": _poa, "figure1": _figure1, "figure2": _figure2,
}


def run(command: str, cfg: RunConfig) -> str:
    """Output text of ``command``; raises a GenAIForumError subclass on failure."""
    if command not in _DISPATCH:
        raise ConfigError(ConfigError.SYNTAX, f"unknown command {command!r}")
    return _DISPATCH[command](cfg)


# ---------------------------------------------------------------------------
# argparse front end
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="genai-forum", description=__doc__.split("\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="key = value config file")
    ap.add_argument("--out", help="output path (default: stdout)")
    ap.add_argument("--scheme", help="bit string, cyclic:k, alternating:a1:a2, optimal:brute, "
                                     "optimal:arms:eps, welfare-opt or none:x0")
    ap.add_argument("--eps", type=float)
    ap.add_argument("--delta", type=int)
    ap.add_argument("--p-hat", type=float, dest="p_hat")
    ap.add_argument("--k-max", type=int, dest="k_max")
    ap.add_argument("--p1-values", dest="p1_values",
                    help="comma-separated initial shares for figure2")
    return ap


def _apply_overrides(cfg: RunConfig, ns: argparse.Namespace) -> RunConfig:
    changes = {}
    for f in fields(RunConfig):
        if f.name == "instance":
            continue
        val = getattr(ns, f.name, None)
        if val is None:
            continue
        if f.name == "p1_values":
            val = tuple(_num(a, 0, "p1_values") for a in _args(val))
        if f.name == "scheme":
            check_scheme_spec(val)
        changes[f.name] = val
    return replace(cfg, **changes)


def main(argv: Sequence[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        try:
            with open(ns.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(ConfigError.SYNTAX, f"cannot read config: {exc}") from None
        cfg = _apply_overrides(parse_config(text), ns)
        output = run(ns.command, cfg)
    except GenAIForumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(output)
    else:
        sys.stdout.write(output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
