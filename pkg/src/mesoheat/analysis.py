"""Verification harness: positivity, parity, propagation speed, accuracy order.

Histories are plain lists of :class:`Snapshot` so lattice output and
continuum solutions go through the same scans.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from . import lattice as lat
from .lattice import LatticeField, MicroParams, Stencil
from .models import LinearPDE, predicted_speed
from .opcalc import derive_hierarchy, expand_stencil, printed_level1
from .rational import format_fraction, is_exact
from .solvers import ContinuumField, InitialData, profile, spectral_solve

__all__ = [
    "Snapshot",
    "ConvergenceReport",
    "SpeedEstimate",
    "FrontNotDetected",
    "GridMismatch",
    "lattice_history",
    "continuum_history",
    "negativity_scan",
    "parity_check",
    "periodic_mirror",
    "front_speed",
    "speed_refinement",
    "convergence_study",
    "compare_fields",
    "fit_slope",
    "taylor_fit_oracle",
    "coefficient_report",
    "worker_count",
]


class FrontNotDetected(RuntimeError):
    pass


class GridMismatch(ValueError):
    pass


class Snapshot(NamedTuple):
    t: object
    x: np.ndarray
    u: np.ndarray


def lattice_history(fields: Sequence[LatticeField], micro: MicroParams = MicroParams()):
    """Snapshots at ``t = r t_a``, ``x = s x_a`` (exact when the field and scales are)."""
    out = []
    for f in fields:
        xs = [s * micro.x_a for s in f.positions()]
        dtype = object if f.exact else np.float64
        out.append(Snapshot(f.r * micro.t_a, np.array(xs, dtype=dtype),
                            np.array(f.values, dtype=dtype)))
    return out


def continuum_history(fields: Sequence[ContinuumField]):
    return [Snapshot(f.t, f.x, np.asarray(f.values)) for f in fields]


def negativity_scan(history, tol=1e-10):
    """First ``(x, t, u)`` in time order with ``u < -tol``, else ``None``."""
    if tol < 0:
        raise ValueError("tolerance must be non-negative")
    for snap in sorted(history, key=lambda s: s.t):
        bad = [i for i, v in enumerate(snap.u) if v < -tol]
        if bad:
            i = bad[0]
            return snap.x[i], snap.t, snap.u[i]
    return None


def periodic_mirror(values):
    """Reflect samples about index 0 on a periodic grid: ``m -> -m mod M``."""
    v = np.asarray(values)
    return np.concatenate((v[:1], v[:0:-1]))


def _mirror_any(obj):
    if isinstance(obj, LatticeField):
        return lat.mirror(obj)
    if isinstance(obj, ContinuumField):
        return obj.with_values(periodic_mirror(obj.values))
    return periodic_mirror(obj)


def _max_difference(a, b):
    if isinstance(a, LatticeField):
        if a.is_ring:
            return max(abs(x - y) for x, y in zip(a.values, b.values))
        lo = min(a.origin, b.origin)
        hi = max(a.origin + len(a) - 1, b.origin + len(b) - 1)
        return max(abs(x - y) for x, y in zip(a.window(lo, hi), b.window(lo, hi)))
    va = np.asarray(getattr(a, "values", a), dtype=np.float64)
    vb = np.asarray(getattr(b, "values", b), dtype=np.float64)
    return float(np.max(np.abs(va - vb)))


def parity_check(evolver: Callable, u0, tol=1e-12) -> bool:
    """``evolver(mirror(u0)) == mirror(evolver(u0))`` to ``tol`` (exactly for rationals)."""
    lhs = evolver(_mirror_any(u0))
    rhs = _mirror_any(evolver(u0))
    diff = _max_difference(lhs, rhs)
    if isinstance(u0, LatticeField) and u0.exact:
        return diff == 0
    return diff <= tol


@dataclass
class SpeedEstimate:
    threshold: float
    times: list
    fronts: list
    speed: object
    predicted: Optional[float] = None

    @property
    def relative_deviation(self):
        if self.predicted is None:
            return None
        return abs(float(self.speed) - float(self.predicted)) / float(self.predicted)

    @property
    def monotone(self):
        return all(b >= a for a, b in zip(self.fronts, self.fronts[1:]))

    def to_dict(self):
        num = lambda v: format_fraction(v) if is_exact(v) else float(v)
        return {"threshold": float(self.threshold), "speed": num(self.speed),
                "predicted": None if self.predicted is None else num(self.predicted),
                "relative_deviation": self.relative_deviation,
                "times": [num(t) for t in self.times], "fronts": [num(f) for f in self.fronts]}


def fit_slope(xs, ys):
    """Least-squares slope; exact when every input is a rational."""
    if len(xs) < 2:
        raise ValueError("need at least two points to fit a slope")
    if all(is_exact(v) for v in list(xs) + list(ys)):
        n = len(xs)
        xm = sum(xs, Fraction(0)) / n
        ym = sum(ys, Fraction(0)) / n
        sxx = sum(((x - xm) ** 2 for x in xs), Fraction(0))
        sxy = sum(((x - xm) * (y - ym) for x, y in zip(xs, ys)), Fraction(0))
        return sxy / sxx
    return float(np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)[0])


def _front(snap, center, threshold):
    hit = [abs(x - center) for x, v in zip(snap.x, snap.u) if abs(v) > threshold]
    return max(hit) if hit else None


def front_speed(history, threshold, center=None, predicted=None) -> SpeedEstimate:
    """Fit the speed of the largest ``|x - center|`` where ``|u| > threshold``.

    Snapshots in which the front has not yet left the initial extent are
    skipped.  ``center`` defaults to the midpoint of the initial support.
    """
    snaps = sorted(history, key=lambda s: s.t)
    first = snaps[0]
    if center is None:
        idx = [i for i, v in enumerate(first.u) if abs(v) > threshold]
        if not idx:
            raise FrontNotDetected("initial data never exceeds the threshold")
        lo, hi = first.x[idx[0]], first.x[idx[-1]]
        center = (lo + hi) / 2
    start = _front(first, center, threshold) or 0
    times, fronts = [], []
    for snap in snaps[1:]:
        f = _front(snap, center, threshold)
        if f is not None and f > start:
            times.append(snap.t)
            fronts.append(f)
    if len(times) < 2:
        raise FrontNotDetected(f"threshold {threshold} is never crossed outside the initial support")
    # the initial front anchors the fit when every later front moved
    if len(times) == len(snaps) - 1:
        times.insert(0, first.t)
        fronts.insert(0, start)
    return SpeedEstimate(threshold, times, fronts, fit_slope(times, fronts), predicted)


def speed_refinement(pde: LinearPDE, levels=4, threshold=1e-6, width=0.1, window=4.0,
                     L=40.0, M=2048, samples=40, closure="compatibility"):
    """Front speeds under self-similar refinement towards a point source at ``t = 0``.

    Level ``l`` uses spike width ``width / 2^l``, observation window
    ``window / 4^l`` and ``M * 2^l`` modes.  A finite signal speed gives a
    bounded sequence; the heat equation's apparent speed doubles per level.
    """
    out = []
    for level in range(levels):
        w = width / 2**level
        tw = window / 4**level
        m = M * 2**level
        u0 = profile("spike", L, m, x0=-L / 2, center=0.0, width=w)
        times = tw * np.arange(0, samples + 1) / samples
        hist = [Snapshot(0.0, u0.x, u0.values)]
        for t in times[1:]:
            sol = spectral_solve(pde, InitialData(u0), t, closure=closure)
            hist.append(Snapshot(t, sol.x, sol.values))
        pred = predicted_speed(pde) if pde.c_tt else None
        out.append(front_speed(hist, threshold, center=0.0, predicted=pred))
    return out


def compare_fields(a, b, norm="l2", dx=None):
    """Grid-weighted L2 or max-norm difference of two sampled fields."""
    va = np.asarray(getattr(a, "values", a), dtype=np.float64)
    vb = np.asarray(getattr(b, "values", b), dtype=np.float64)
    if va.shape != vb.shape:
        raise GridMismatch(f"fields sampled on different grids: {va.shape} vs {vb.shape}")
    if isinstance(a, ContinuumField) and isinstance(b, ContinuumField):
        if not (np.isclose(float(a.L), float(b.L)) and np.isclose(a.x0, b.x0)):
            raise GridMismatch("fields live on different domains")
    diff = va - vb
    if norm in ("linf", "inf", "max"):
        return float(np.max(np.abs(diff)))
    if norm == "l2":
        if dx is None:
            dx = float(a.dx) if isinstance(a, ContinuumField) else 1.0
        return math.sqrt(math.fsum(diff * diff) * dx)
    raise ValueError(f"unknown norm {norm!r}")


@dataclass
class ConvergenceReport:
    model: str
    norm: str
    rows: list = field(default_factory=list)
    slope: float = float("nan")
    fit_levels: int = 3

    def to_dict(self):
        return {"model": self.model, "norm": self.norm, "slope": self.slope,
                "fit_levels": self.fit_levels,
                "rows": [{"dx": format_fraction(dx), "dt": format_fraction(dt), "error": err}
                         for dx, dt, err in self.rows]}


def worker_count():
    """Worker threads from ``MESOHEAT_THREADS`` (0 or unset: automatic)."""
    import os

    raw = os.environ.get("MESOHEAT_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("MESOHEAT_THREADS must be >= 0")
    return n or min(8, os.cpu_count() or 1)


def _level_pde(level, variant, stencil, dx, dt):
    if level == 0:
        return LinearPDE.from_modified(derive_hierarchy(stencil, 0), dx, dt).as_float()
    if level == 1:
        modified = printed_level1() if variant == "printed" else derive_hierarchy(stencil, 1)
        return LinearPDE.from_modified(modified, dx, dt).as_float()
    raise ValueError("the linear solver family covers hierarchy levels 0 and 1")


def convergence_study(level=0, D=1, t_final=Fraction(1, 48), dxs=None, p=Fraction(1, 3),
                      L=1, u0: Callable = None, norm="linf", variant="corrected",
                      policy="cutoff", fit_levels=3) -> ConvergenceReport:
    """Error of the level-``N`` PDE against the lattice it was derived from.

    For each ``dx`` the lattice uses ``x_a = dx`` and ``t_a = p dx^2 / D`` so the
    diffusivity is fixed; the PDE is solved exactly in time from the same
    samples and both are compared on the coarsest grid without interpolation.

    ``u0`` maps sample positions to initial values; the default is a Gaussian
    of width ``L/10`` centred in the domain.
    """
    stencil = Stencil(p)
    D, t_final, L = Fraction(D), Fraction(t_final), Fraction(L)
    dxs = [Fraction(d) for d in (dxs or [Fraction(1, 16), Fraction(1, 32),
                                         Fraction(1, 64), Fraction(1, 128)])]
    if u0 is None:
        u0 = lambda x: np.exp(-((x - float(L) / 2) ** 2) / (2 * (float(L) / 10) ** 2))
    coarse = max(dxs)

    def one(dx):
        dt = stencil.p * dx * dx / D
        steps = t_final / dt
        cells = L / dx
        if steps.denominator != 1 or cells.denominator != 1:
            raise ValueError(f"dx = {dx}: t_final/dt and L/dx must be integers")
        stride = coarse / dx
        if stride.denominator != 1:
            raise ValueError("every dx must divide the coarsest dx")
        x = np.arange(int(cells)) * float(dx)
        start = u0(x)
        ring = LatticeField(start, lat.Ring(int(cells)), exact=False)
        lattice_end = lat.evolve(ring, stencil, int(steps)).values
        pde = _level_pde(level, variant, stencil, dx, dt)
        field0 = ContinuumField(float(L), start)
        pde_end = spectral_solve(pde, InitialData(field0), float(t_final), policy=policy).values
        s = int(stride)
        err = compare_fields(lattice_end[::s], pde_end[::s], norm, dx=float(coarse))
        return dx, dt, err

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        rows = list(pool.map(one, dxs))
    rows.sort(key=lambda r: -r[0])
    fit = rows[-fit_levels:]
    slope = fit_slope([math.log(float(r[0])) for r in fit], [math.log(r[2]) for r in fit])
    name = f"level-{level}" + ("-printed" if variant == "printed" else "")
    return ConvergenceReport(name, norm, rows, slope, fit_levels)


# --- independent coefficient oracle -------------------------------------------


def _solve_exact(a, b):
    """Gaussian elimination over the rationals."""
    n = len(b)
    m = [list(map(Fraction, row)) + [Fraction(v)] for row, v in zip(a, b)]
    for col in range(n):
        piv = next(r for r in range(col, n) if m[r][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col] / m[col][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[i][n] / m[i][i] for i in range(n)]


def _fit_polynomial(func, degree):
    """Exact coefficients of a polynomial of known degree from ``degree + 1`` samples."""
    hs = [Fraction(i + 1, 2) for i in range(degree + 1)]
    rows = [[h**e for e in range(degree + 1)] for h in hs]
    return _solve_exact(rows, [func(h) for h in hs])


def taylor_fit_oracle(weights, offsets, t_order, x_order, x0=Fraction(1), t0=Fraction(1)):
    """Recover expansion coefficients by applying the rule to monomials.

    For ``f = x^n`` the quantity ``sum_i w_i f(x0 + i h) - f(x0)`` is a
    polynomial in ``h`` whose ``h^n`` coefficient is ``n! * c_n``; the time
    side uses ``((t0 + d)^n - t0^n)`` the same way.  Nothing here shares code
    with :func:`mesoheat.opcalc.expand_stencil`.

    Returns ``{(j, k): (coeff, dt_power, dx_power)}``.
    """
    out = {}
    for n in range(1, t_order + 1):
        coeffs = _fit_polynomial(lambda d: (t0 + d) ** n - t0**n, n)
        c = coeffs[n] / math.factorial(n)
        if c:
            out[(n, 0)] = (c, n - 1, 0)
    for n in range(1, x_order + 1):
        coeffs = _fit_polynomial(
            lambda h: sum(Fraction(w) * (x0 + i * h) ** n for w, i in zip(weights, offsets)) - x0**n,
            n)
        c = coeffs[n] / math.factorial(n)
        if c:
            out[(0, n)] = (c, -1, n)
    return out


def coefficient_report(stencil: Stencil, level=1, t_order=None, x_order=None):
    """Derived coefficients, oracle agreement and annotated printed values."""
    pde = derive_hierarchy(stencil, level)
    t_order = t_order or level + 1
    x_order = x_order or 2 * (level + 1)
    raw = expand_stencil(stencil, t_order, x_order)
    oracle = taylor_fit_oracle(stencil.weights, stencil.offsets, t_order, x_order)
    derived = {(t.j, t.k): (t.coeff, t.dt_power, t.dx_power) for t in raw.terms}
    return {
        "pde": pde,
        "oracle_agrees": oracle == derived,
        "oracle": oracle,
        "notes": pde.notes,
    }
