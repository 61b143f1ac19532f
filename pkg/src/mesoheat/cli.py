"""Command-line front end.

Every command reads an optional JSON config (``--config``) whose keys are the
long option names with ``-`` replaced by ``_``; flags given on the command
line override config values.

Exit status: 0 success, 1 configuration/validation/I/O error, 2 numerical
failure (ill-posed growth, stability violation, missing initial rate, front
not detected, or a study outside its declared tolerance).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import io, lattice as lat
from .analysis import (FrontNotDetected, coefficient_report, compare_fields, convergence_study,
                       front_speed, lattice_history, speed_refinement, Snapshot)
from .lattice import LatticeField, Line, MicroParams, Ring, Stencil
from .models import LinearPDE, predicted_speed
from .opcalc import MIXED, SPATIAL, reduce_to_mixed_form
from .rational import format_fraction, parse_fraction
from .solvers import (CLOSURES, POLICIES, InitialData, NumericalFailure, profile,
                      spectral_solve)

__all__ = ["ExperimentConfig", "ConfigError", "run", "main", "build_parser"]

COMMANDS = ("simulate-lattice", "derive", "solve", "compare", "speed", "study")


class ConfigError(ValueError):
    def __init__(self, name, message):
        super().__init__(f"{name}: {message}")
        self.field = name


class StudyFailed(NumericalFailure):
    pass


# defaults per command; these keys are also the accepted config keys
DEFAULTS = {
    "simulate-lattice": dict(p="1/3", profile="delta", topology="line", cells=None, steps=0,
                             mode="rational", input=None, x_a="1", t_a="1", out=None,
                             json=None, width=2.0, amplitude="1"),
    "derive": dict(p="1/3", level=1, form="spatial", out=None),
    "solve": dict(model="heat", D=1.0, tau=1.0, eps1=0.0, eps2=0.0, D1=0.0, level=1, p="1/3",
                  dx=None, dt=None, L=2 * math.pi, x0=0.0, modes=64, profile="gaussian",
                  input=None, k=1.0, width=None, center=None, amplitude=1.0, times=[1.0],
                  closure="compatibility", policy="reject", out=None, json=None),
    "compare": dict(a=None, b=None, norm="l2", out=None),
    "speed": dict(model="lattice", p="1/3", steps=20, x_a="1", t_a="1", D=1.0, tau=1.0,
                  threshold=None, L=60.0, modes=4096, width=0.05, t_end=10.0, samples=40,
                  closure="compatibility", refine=0, out=None, json=None),
    "study": dict(level=0, variant="corrected", p="1/3", D="1", L="1", t_final="1/48",
                  dxs=["1/16", "1/32", "1/64", "1/128"], norm="linf", width=None,
                  expect_slope=None, slope_tol=None, out=None, json=None),
}


@dataclass
class ExperimentConfig:
    command: str
    params: dict = field(default_factory=dict)

    @classmethod
    def from_sources(cls, command, config_doc=None, overrides=None):
        if command not in COMMANDS:
            raise ConfigError("command", f"unknown command {command!r}")
        params = dict(DEFAULTS[command])
        for source in (config_doc or {}), (overrides or {}):
            for key, value in source.items():
                if key == "command":
                    continue
                if key not in params:
                    raise ConfigError(key, f"not a setting of {command}")
                params[key] = value
        cfg = cls(command, params)
        cfg.validate()
        return cfg

    def validate(self):
        p = self.params
        if "p" in p:
            try:
                Stencil(parse_fraction(p["p"]))
            except ValueError as exc:
                raise ConfigError("p", str(exc)) from None
        for key in ("input", "a", "b"):
            if p.get(key) and not Path(p[key]).is_file():
                raise ConfigError(key, f"file not found: {p[key]}")
        for key in ("out", "json"):
            if p.get(key) and not Path(p[key]).resolve().parent.is_dir():
                raise ConfigError(key, f"output directory does not exist: {p[key]}")
        choices = {"closure": CLOSURES, "policy": POLICIES, "mode": ("rational", "float"),
                   "topology": ("ring", "line"), "form": (SPATIAL, MIXED),
                   "norm": ("l2", "linf"), "variant": ("corrected", "printed")}
        for key, allowed in choices.items():
            if key in p and p[key] not in allowed:
                raise ConfigError(key, f"must be one of {', '.join(allowed)}")
        if self.command == "compare" and not (p["a"] and p["b"]):
            raise ConfigError("a" if not p["a"] else "b", "two solution files are required")


def _frac(params, key):
    try:
        return parse_fraction(params[key])
    except (ValueError, TypeError) as exc:
        raise ConfigError(key, str(exc)) from None


def _float(params, key):
    try:
        return float(parse_fraction(params[key])) if isinstance(params[key], str) else float(params[key])
    except (ValueError, TypeError) as exc:
        raise ConfigError(key, str(exc)) from None


def _int(params, key, minimum=None):
    try:
        v = int(params[key])
    except (ValueError, TypeError):
        raise ConfigError(key, f"expected an integer, got {params[key]!r}") from None
    if minimum is not None and v < minimum:
        raise ConfigError(key, f"must be >= {minimum}")
    return v


def _emit(summary, data_to_stdout):
    print(summary, file=sys.stderr if data_to_stdout else sys.stdout)


# --- commands -------------------------------------------------------------------


def _cmd_simulate(p):
    stencil = Stencil(_frac(p, "p"))
    exact = p["mode"] == "rational"
    steps = _int(p, "steps", 0)
    if p["input"]:
        try:
            field0 = io.read_lattice_csv(p["input"], p["topology"])
        except (ValueError, OSError) as exc:
            raise ConfigError("input", str(exc)) from None
        field0 = field0 if exact == field0.exact else (field0.to_rational() if exact else field0.to_float())
    else:
        cells = p["cells"]
        amp = _frac(p, "amplitude") if exact else _float(p, "amplitude")
        zero = Fraction(0) if exact else 0.0
        if p["topology"] == "ring":
            m = _int(p, "cells", 3) if cells is not None else 16
            topo = Ring(m)
        else:
            m = _int(p, "cells", 1) if cells is not None else 1
            topo = Line()
        if p["profile"] == "delta":
            vals = [zero] * m
            vals[m // 2] = amp
        elif p["profile"] == "constant":
            vals = [amp] * m
        elif p["profile"] == "gaussian":
            w = _float(p, "width")
            raw = [math.exp(-((i - m // 2) ** 2) / (2 * w * w)) * float(amp) for i in range(m)]
            vals = [Fraction(v) for v in raw] if exact else raw
        else:
            raise ConfigError("profile", "must be delta, constant or gaussian")
        origin = 0 if p["topology"] == "ring" else -(m // 2)
        field0 = LatticeField(vals, topo, origin=origin, exact=exact)
    out = lat.evolve(field0, stencil, steps)
    micro = MicroParams(_frac(p, "x_a"), _frac(p, "t_a"))
    if p["out"]:
        io.write_lattice_csv(out, p["out"])
    else:
        sys.stdout.write("s,u\n")
        for s, v in zip(out.positions(), out.values):
            sys.stdout.write(f"{s},{io.format_number(v)}\n")
    if p["json"]:
        io.write_json(p["json"], lattice_to_json_doc(out, stencil, micro))
    _emit(f"simulate-lattice: p={format_fraction(stencil.p)} r={out.r} cells={len(out)} "
          f"mode={out.mode} total_heat={io.format_number(lat.total_heat(out))}", not p["out"])
    return 0


def lattice_to_json_doc(field, stencil, micro):
    doc = io.lattice_to_json(field, stencil)
    doc["x_a"] = io.format_number(micro.x_a)
    doc["t_a"] = io.format_number(micro.t_a)
    return doc


def _cmd_derive(p):
    stencil = Stencil(_frac(p, "p"))
    level = _int(p, "level", 0)
    report = coefficient_report(stencil, level)
    pde = report["pde"]
    if p["form"] == MIXED:
        try:
            pde = reduce_to_mixed_form(pde)
        except ValueError as exc:
            raise ConfigError("form", str(exc)) from None
    doc = pde.to_dict()
    doc["oracle_agrees"] = report["oracle_agrees"]
    text = json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if p["out"]:
        Path(p["out"]).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    _emit(f"derive: level {level} ({p['form']}): {pde.pretty()}; "
          f"oracle {'agrees' if report['oracle_agrees'] else 'DISAGREES'}; "
          f"{len(pde.notes)} printed-value discrepancies", not p["out"])
    return 0 if report["oracle_agrees"] else 2


def _solve_model(p):
    kind = p["model"]
    D = _float(p, "D")
    if kind == "heat":
        return LinearPDE.heat(D)
    if kind == "telegraph":
        return LinearPDE.telegraph(_float(p, "tau"), D)
    if kind == "fourth-order":
        return LinearPDE.fourth_order(D, _float(p, "eps2"), _float(p, "eps1"))
    if kind == "mixed":
        return LinearPDE.mixed(_float(p, "tau"), D, _float(p, "D1"))
    if kind == "hierarchy":
        from .opcalc import derive_hierarchy

        if p["dx"] is None or p["dt"] is None:
            raise ConfigError("dx" if p["dx"] is None else "dt", "required for model 'hierarchy'")
        pde = derive_hierarchy(Stencil(_frac(p, "p")), _int(p, "level", 0))
        try:
            return LinearPDE.from_modified(pde, _frac(p, "dx"), _frac(p, "dt")).as_float()
        except ValueError as exc:
            raise ConfigError("level", str(exc)) from None
    raise ConfigError("model", "must be heat, telegraph, fourth-order, mixed or hierarchy")


def _solve_initial(p):
    L = _float(p, "L")
    M = _int(p, "modes", 4)
    if M % 2:
        raise ConfigError("modes", "must be even")
    if p["input"]:
        try:
            return io.read_initial_csv(p["input"])
        except (ValueError, OSError) as exc:
            raise ConfigError("input", str(exc)) from None
    kwargs = dict(x0=_float(p, "x0"), amplitude=_float(p, "amplitude"), k=_float(p, "k"))
    if p["center"] is not None:
        kwargs["center"] = _float(p, "center")
    if p["width"] is not None:
        kwargs["width"] = _float(p, "width")
    elif p["profile"] == "spike":
        kwargs["width"] = None
    try:
        return profile(p["profile"], L, M, **kwargs)
    except ValueError as exc:
        raise ConfigError("profile", str(exc)) from None


def _cmd_solve(p):
    try:
        pde = _solve_model(p)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("model", str(exc)) from None
    u0 = _solve_initial(p)
    times = p["times"] if isinstance(p["times"], list) else [p["times"]]
    times = [float(parse_fraction(t)) if isinstance(t, str) else float(t) for t in times]
    fields = [spectral_solve(pde, InitialData(u0), t, closure=p["closure"], policy=p["policy"])
              for t in times]
    if p["out"]:
        io.write_solution_csv(fields, p["out"])
    else:
        sys.stdout.write("t,x,u\n")
        for f in fields:
            for x, u in zip(f.x, f.values):
                sys.stdout.write(f"{io.format_number(f.t)},{io.format_number(x)},{io.format_number(u)}\n")
    if p["json"]:
        io.write_json(p["json"], {"pde": pde.to_dict(),
                                  "snapshots": [io.snapshot_to_json(f) for f in fields]})
    last = fields[-1]
    _emit(f"solve: {pde.kind} M={u0.M} t={times[-1]:g} mean={np.mean(last.values):.6g} "
          f"min={np.min(last.values):.6g} max={np.max(last.values):.6g}", not p["out"])
    return 0


def _cmd_compare(p):
    try:
        a = io.read_solution_csv(p["a"])
        b = io.read_solution_csv(p["b"])
    except (ValueError, OSError) as exc:
        raise ConfigError("a", str(exc)) from None
    if sorted(a) != sorted(b):
        raise ConfigError("b", "solution files contain different snapshot times")
    rows = []
    for t in sorted(a):
        xa, ua = a[t]
        xb, ub = b[t]
        if xa.shape != xb.shape or not np.allclose(xa, xb, rtol=1e-12, atol=1e-12):
            raise ConfigError("b", f"grids differ at t={t}")
        dx = float(xa[1] - xa[0]) if len(xa) > 1 else 1.0
        rows.append((t, compare_fields(ua, ub, p["norm"], dx=dx)))
    if p["out"]:
        io.write_csv(p["out"], ["t", "error", "norm"], [(t, e, p["norm"]) for t, e in rows])
    worst = max(e for _, e in rows)
    print(f"compare: {len(rows)} snapshot(s) {p['norm']} max error {worst:.17g}")
    return 0


def _cmd_speed(p):
    threshold = p["threshold"]
    kind = p["model"]
    if kind == "lattice":
        stencil = Stencil(_frac(p, "p"))
        micro = MicroParams(_frac(p, "x_a"), _frac(p, "t_a"))
        fields = lat.history(lat.delta(), stencil, _int(p, "steps", 2))
        hist = lattice_history(fields, micro)
        est = front_speed(hist, 0 if threshold is None else _float(p, "threshold"),
                          predicted=predicted_speed(micro))
        estimates = [est]
    else:
        D = _float(p, "D")
        pde = LinearPDE.heat(D) if kind == "heat" else LinearPDE.telegraph(_float(p, "tau"), D)
        thr = 1e-6 if threshold is None else _float(p, "threshold")
        if _int(p, "refine", 0) > 0:
            estimates = speed_refinement(pde, levels=_int(p, "refine"), threshold=thr)
        else:
            L, M = _float(p, "L"), _int(p, "modes", 4)
            u0 = profile("spike", L, M, x0=-L / 2, center=0.0, width=_float(p, "width"))
            n = _int(p, "samples", 2)
            t_end = _float(p, "t_end")
            hist = [Snapshot(0.0, u0.x, u0.values)]
            for i in range(1, n + 1):
                sol = spectral_solve(pde, InitialData(u0), t_end * i / n, closure=p["closure"])
                hist.append(Snapshot(sol.t, sol.x, sol.values))
            pred = predicted_speed(pde) if pde.c_tt else None
            estimates = [front_speed(hist, thr, center=0.0, predicted=pred)]
    est = estimates[-1]
    if p["out"]:
        io.write_speed_csv(est, p["out"])
    if p["json"]:
        io.write_json(p["json"], {"model": kind, "estimates": [e.to_dict() for e in estimates]})
    speeds = ", ".join(io.format_number(e.speed) for e in estimates)
    pred = "infinite" if est.predicted is None else io.format_number(est.predicted)
    print(f"speed: {kind} fitted [{speeds}] predicted {pred}")
    return 0


def _cmd_study(p):
    width = p["width"]
    L = _frac(p, "L")
    u0 = None
    if width is not None:
        w = _float(p, "width")
        u0 = lambda x: np.exp(-((x - float(L) / 2) ** 2) / (2 * w * w))
    try:
        report = convergence_study(_int(p, "level", 0), D=_frac(p, "D"), t_final=_frac(p, "t_final"),
                                   dxs=[parse_fraction(d) for d in p["dxs"]], p=_frac(p, "p"), L=L,
                                   u0=u0, norm=p["norm"], variant=p["variant"])
    except ValueError as exc:
        raise ConfigError("dxs", str(exc)) from None
    if p["out"]:
        io.write_report_csv(report, p["out"])
    doc = report.to_dict()
    ok = True
    if p["expect_slope"] is not None:
        target, tol = _float(p, "expect_slope"), _float(p, "slope_tol") if p["slope_tol"] is not None else 0.5
        ok = abs(report.slope - target) <= tol
        doc.update(expect_slope=target, slope_tol=tol, passed=ok)
    if p["json"]:
        io.write_json(p["json"], doc)
    print(f"study: {report.model} {report.norm} slope {report.slope:.4f}"
          + ("" if p["expect_slope"] is None else (" PASS" if ok else " FAIL")))
    if not ok:
        raise StudyFailed(f"slope {report.slope:.4f} outside {doc['expect_slope']} ± {doc['slope_tol']}")
    return 0


HANDLERS = {"simulate-lattice": _cmd_simulate, "derive": _cmd_derive, "solve": _cmd_solve,
            "compare": _cmd_compare, "speed": _cmd_speed, "study": _cmd_study}


def run(config: ExperimentConfig) -> int:
    """Dispatch a validated config; returns the process exit status."""
    try:
        return HANDLERS[config.command](config.params)
    except ConfigError as exc:
        print(f"error: config field {exc}", file=sys.stderr)
        return 1
    except (NumericalFailure, FrontNotDetected) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return 1


def build_parser():
    parser = argparse.ArgumentParser(prog="mesoheat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    def common(sp):
        sp.add_argument("--config", default=S, help="JSON experiment config")
        return sp

    sp = common(sub.add_parser("simulate-lattice", argument_default=S, help="evolve the lattice model"))
    sp.add_argument("--p")
    sp.add_argument("--profile", choices=["delta", "constant", "gaussian"])
    sp.add_argument("--topology", choices=["ring", "line"])
    sp.add_argument("--cells", type=int)
    sp.add_argument("--steps", type=int)
    sp.add_argument("--mode", choices=["rational", "float"])
    sp.add_argument("--input")
    sp.add_argument("--x-a", dest="x_a")
    sp.add_argument("--t-a", dest="t_a")
    sp.add_argument("--width", type=float)
    sp.add_argument("--amplitude")
    sp.add_argument("--out")
    sp.add_argument("--json")

    sp = common(sub.add_parser("derive", argument_default=S, help="derive a modified PDE"))
    sp.add_argument("--p")
    sp.add_argument("--level", type=int)
    sp.add_argument("--form", choices=[SPATIAL, MIXED])
    sp.add_argument("--out")

    sp = common(sub.add_parser("solve", argument_default=S, help="solve a model spectrally"))
    sp.add_argument("--model", choices=["heat", "telegraph", "fourth-order", "mixed", "hierarchy"])
    for name in ("D", "tau", "eps1", "eps2", "D1", "L", "x0", "k", "width", "center", "amplitude"):
        sp.add_argument(f"--{name}")
    sp.add_argument("--level", type=int)
    sp.add_argument("--p")
    sp.add_argument("--dx")
    sp.add_argument("--dt")
    sp.add_argument("--modes", type=int)
    sp.add_argument("--profile", choices=["gaussian", "sine", "spike", "constant"])
    sp.add_argument("--input")
    sp.add_argument("--times", nargs="+")
    sp.add_argument("--closure", choices=CLOSURES)
    sp.add_argument("--policy", choices=POLICIES)
    sp.add_argument("--out")
    sp.add_argument("--json")

    sp = common(sub.add_parser("compare", argument_default=S, help="compare two solution CSVs"))
    sp.add_argument("--a")
    sp.add_argument("--b")
    sp.add_argument("--norm", choices=["l2", "linf"])
    sp.add_argument("--out")

    sp = common(sub.add_parser("speed", argument_default=S, help="measure front speed"))
    sp.add_argument("--model", choices=["lattice", "telegraph", "heat"])
    for name in ("p", "x_a", "t_a", "D", "tau", "threshold", "L", "width", "t_end"):
        sp.add_argument(f"--{name.replace('_', '-')}", dest=name)
    sp.add_argument("--steps", type=int)
    sp.add_argument("--modes", type=int)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--refine", type=int)
    sp.add_argument("--closure", choices=CLOSURES)
    sp.add_argument("--out")
    sp.add_argument("--json")

    sp = common(sub.add_parser("study", argument_default=S, help="hierarchy convergence study"))
    sp.add_argument("--level", type=int)
    sp.add_argument("--variant", choices=["corrected", "printed"])
    for name in ("p", "D", "L", "t_final", "width", "expect_slope", "slope_tol"):
        sp.add_argument(f"--{name.replace('_', '-')}", dest=name)
    sp.add_argument("--dxs", nargs="+")
    sp.add_argument("--norm", choices=["l2", "linf"])
    sp.add_argument("--out")
    sp.add_argument("--json")
    return parser


def main(argv=None):
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    config_doc = None
    config_path = args.pop("config", None)
    try:
        if config_path:
            try:
                config_doc = json.loads(Path(config_path).read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError("config", str(exc)) from None
            if not isinstance(config_doc, dict):
                raise ConfigError("config", "must be a JSON object")
            if config_doc.get("command", command) != command:
                raise ConfigError("command", f"config is for {config_doc['command']!r}")
        config = ExperimentConfig.from_sources(command, config_doc, args)
    except ConfigError as exc:
        print(f"error: config field {exc}", file=sys.stderr)
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
