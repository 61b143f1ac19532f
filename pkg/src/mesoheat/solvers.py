"""Periodic solvers for the linear model family.

:func:`spectral_solve` advances every Fourier mode exactly in time.  With
roots ``s_fast``, ``s_slow`` (``Re s_slow >= Re s_fast``) and ``d = s_fast - s_slow``
a mode evolves as

    u(t) = exp(s_slow t) * [u0 + (v0 - s_slow u0) * (exp(d t) - 1) / d]

which never overflows for damped modes, loses no accuracy when one root is
huge (``c_tt`` tiny), and becomes ``(A + B t) exp(s t)`` at a double root.

:func:`fd_heat_solve` is the explicit forward-time centred-space scheme, kept
as the cross-check against the lattice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .models import LinearPDE, stable_roots
from .rational import is_exact

__all__ = [
    "ContinuumField",
    "InitialData",
    "NumericalFailure",
    "IllPosedGrowth",
    "MissingInitialRate",
    "StabilityViolation",
    "CLOSURES",
    "POLICIES",
    "grid",
    "profile",
    "wavenumbers",
    "spectral_solve",
    "spectral_propagate",
    "spectral_history",
    "fd_heat_solve",
    "compatibility_initial_rate",
]

CLOSURES = ("compatibility", "zero", "none")
POLICIES = ("reject", "cutoff", "allow")


class NumericalFailure(RuntimeError):
    """Base class for failures that are properties of the numerics, not of the input format."""


class IllPosedGrowth(NumericalFailure):
    pass


class MissingInitialRate(NumericalFailure):
    pass


class StabilityViolation(NumericalFailure):
    pass


@dataclass(frozen=True, eq=False)
class ContinuumField:
    """Samples ``u(x_m, t)`` at ``x_m = x0 + m L / M`` on a periodic domain."""

    L: float
    values: np.ndarray
    t: float = 0.0
    x0: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.dtype != object:
            vals = vals.astype(np.float64)
        if vals.ndim != 1:
            raise ValueError("field values must be one-dimensional")
        m = len(vals)
        if m < 4 or m % 2:
            raise ValueError(f"need an even number of samples >= 4, got {m}")
        if not self.L > 0:
            raise ValueError("domain length must be positive")
        object.__setattr__(self, "values", vals)

    @property
    def M(self):
        return len(self.values)

    @property
    def dx(self):
        return self.L / self.M

    @property
    def x(self):
        return self.x0 + np.arange(self.M) * (float(self.L) / self.M)

    def with_values(self, values, t=None):
        return ContinuumField(self.L, values, self.t if t is None else t, self.x0)


@dataclass(frozen=True, eq=False)
class InitialData:
    u0: ContinuumField
    u0_t: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.u0_t is not None:
            rate = np.asarray(getattr(self.u0_t, "values", self.u0_t), dtype=np.float64)
            if rate.shape != self.u0.values.shape:
                raise ValueError("initial rate must be sampled on the same grid as u0")
            object.__setattr__(self, "u0_t", rate)


def grid(L, M, x0=0.0):
    return x0 + np.arange(M) * (float(L) / M)


def profile(name, L, M, x0=0.0, center=None, width=0.1, amplitude=1.0, k=1):
    """Named initial profile sampled on ``M`` points.

    ``gaussian``: ``A exp(-(x-c)^2 / (2 w^2))``; ``spike``: same with a narrow
    default width ``L/200``; ``sine``: ``A sin(k x)`` (``k`` an integer number
    of periods across the domain is ``2 pi n / L``); ``constant``: ``A``.
    """
    x = grid(L, M, x0)
    c = x0 + float(L) / 2 if center is None else center
    if name == "gaussian":
        return ContinuumField(L, amplitude * np.exp(-((x - c) ** 2) / (2 * width**2)), 0.0, x0)
    if name == "spike":
        w = float(L) / 200 if width is None else width
        return ContinuumField(L, amplitude * np.exp(-((x - c) ** 2) / (2 * w**2)), 0.0, x0)
    if name == "sine":
        return ContinuumField(L, amplitude * np.sin(k * x), 0.0, x0)
    if name == "constant":
        return ContinuumField(L, np.full(M, float(amplitude)), 0.0, x0)
    raise ValueError(f"unknown profile {name!r}")


def wavenumbers(L, M):
    """Non-negative wavenumbers of the real FFT, ``2 pi m / L``."""
    return 2.0 * np.pi * np.arange(M // 2 + 1) / float(L)


def compatibility_initial_rate(pde: LinearPDE, u0: ContinuumField) -> ContinuumField:
    """Level-0 closure ``u_t(x, 0) = D u_xx(x, 0)``, differentiated spectrally."""
    k = wavenumbers(u0.L, u0.M)
    vals = np.asarray(u0.values, dtype=np.float64)
    rate = np.fft.irfft(-float(pde.c_xx) * k**2 * np.fft.rfft(vals), u0.M)
    return u0.with_values(rate)


def _resolve_rate(pde, init, closure):
    if init.u0_t is not None:
        return np.asarray(init.u0_t, dtype=np.float64)
    if not pde.c_tt:
        return None
    if closure == "compatibility":
        return compatibility_initial_rate(pde, init.u0).values
    if closure == "zero":
        return np.zeros(init.u0.M)
    raise MissingInitialRate(
        "model is second order in time and no initial rate u_t(x, 0) was given; "
        "choose closure='compatibility' or 'zero'")


def _t_phi(d, t):
    """``(exp(d t) - 1) / d`` evaluated stably, equal to ``t`` at ``d = 0``."""
    z = d * t
    small = np.abs(z) < 1e-5
    safe_d = np.where(small, 1.0, d)
    series = t * (1 + z / 2 + z * z / 6 + z * z * z / 24)
    return np.where(small, series, np.expm1(z) / safe_d)


def _apply_policy(pde, k, uh, vh, policy, amplitude_floor):
    if not pde.c_x4:
        return uh, vh
    bad = float(pde.c_x4) * k**2 > float(pde.c_xx)
    bad[0] = False
    if not bad.any():
        return uh, vh
    if policy == "allow":
        return uh, vh
    if policy == "cutoff":
        uh = np.where(bad, 0, uh)
        vh = None if vh is None else np.where(bad, 0, vh)
        return uh, vh
    scale = max(np.abs(uh).max(), 0 if vh is None else np.abs(vh).max())
    carried = bad & ((np.abs(uh) > amplitude_floor * scale)
                     | (False if vh is None else np.abs(vh) > amplitude_floor * scale))
    if carried.any():
        ks = k[carried]
        raise IllPosedGrowth(
            f"{int(carried.sum())} mode(s) above the stability threshold "
            f"k* = {pde.instability_threshold():.6g} carry data (k = {ks[0]:.6g}"
            f"{' ...' if len(ks) > 1 else ''}); use policy 'cutoff' or 'allow'")
    # below the floor the content is roundoff; left in, it would still blow up
    uh = np.where(bad, 0, uh)
    vh = None if vh is None else np.where(bad, 0, vh)
    return uh, vh


def spectral_propagate(pde: LinearPDE, init: InitialData, t, closure="compatibility",
                       policy="reject", amplitude_floor=1e-12) -> InitialData:
    """Exact solution and its time derivative at time ``init.u0.t + t``."""
    if closure not in CLOSURES:
        raise ValueError(f"closure must be one of {CLOSURES}")
    if policy not in POLICIES:
        raise ValueError(f"policy must be one of {POLICIES}")
    if t < 0:
        raise ValueError("time must be non-negative")
    u0 = init.u0
    M = u0.M
    k = wavenumbers(u0.L, M)
    k2 = k * k
    a = float(pde.c_tt)
    b = 1.0 + float(pde.c_xxt) * k2
    c = float(pde.c_xx) * k2 - float(pde.c_x4) * k2 * k2
    uh = np.fft.rfft(np.asarray(u0.values, dtype=np.float64))
    rate = _resolve_rate(pde, init, closure)
    vh = None if rate is None else np.fft.rfft(rate)
    uh, vh = _apply_policy(pde, k, uh, vh, policy, amplitude_floor)
    t = float(t)
    if a == 0:
        s = -c / b
        with np.errstate(over="ignore", invalid="ignore"):
            g = np.exp(s * t)
            # a supplied rate is ignored: first-order dynamics fix it from u0
            ut = np.where(uh == 0, 0, uh * g)
            rt = s * ut
    else:
        fast, slow = stable_roots(a, b, c)
        d = fast - slow
        with np.errstate(over="ignore", invalid="ignore"):
            es = np.exp(slow * t)
            ef = np.exp(fast * t)
            w = vh - slow * uh
            empty = (uh == 0) & (vh == 0)
            ut = np.where(empty, 0, es * (uh + w * _t_phi(d, t)))
            rt = np.where(empty, 0, slow * ut + ef * w)
    out_u = np.fft.irfft(ut, M)
    out_r = np.fft.irfft(rt, M)
    return InitialData(u0.with_values(out_u, t=u0.t + t), out_r)


def spectral_solve(pde: LinearPDE, init: InitialData, t, closure="compatibility",
                   policy="reject", amplitude_floor=1e-12) -> ContinuumField:
    """Solve the periodic initial-value problem exactly in time.

    Parameters
    ----------
    closure : {"compatibility", "zero", "none"}
        Initial rate used when the model is second order in time and
        ``init.u0_t`` is missing.  ``"none"`` raises :class:`MissingInitialRate`.
    policy : {"reject", "cutoff", "allow"}
        Treatment of modes above the fourth-order instability threshold.
        ``"reject"`` raises :class:`IllPosedGrowth` if such a mode carries
        more than ``amplitude_floor`` times the largest amplitude, and
        otherwise zeroes them as roundoff.
    """
    return spectral_propagate(pde, init, t, closure, policy, amplitude_floor).u0


def spectral_history(pde: LinearPDE, init: InitialData, times, **kwargs):
    """Snapshots at each time in ``times`` (each solved from the initial data)."""
    return [spectral_solve(pde, init, t, **kwargs) for t in times]


def fd_heat_solve(D, init, dx, dt, steps) -> ContinuumField:
    """Explicit scheme ``u += r (u[m+1] - 2 u[m] + u[m-1])`` with ``r = D dt / dx^2``.

    Exact when ``D``, ``dx``, ``dt`` are rationals and the samples are Fractions.
    """
    u0 = init.u0 if isinstance(init, InitialData) else init
    exact = all(is_exact(v) for v in (D, dx, dt)) and u0.values.dtype == object
    r_num = Fraction(D) * Fraction(dt) / Fraction(dx) ** 2 if exact else float(D) * float(dt) / float(dx) ** 2
    if r_num > Fraction(1, 2):
        raise StabilityViolation(f"D dt / dx^2 = {r_num} exceeds 1/2; the explicit scheme is unstable")
    if not math.isclose(float(dx), float(u0.L) / u0.M, rel_tol=1e-12):
        raise ValueError(f"dx = {dx} does not match the field spacing L/M = {float(u0.L) / u0.M}")
    if steps < 0:
        raise ValueError("steps must be non-negative")
    u = u0.values.copy() if exact else np.asarray(u0.values, dtype=np.float64)
    for _ in range(int(steps)):
        u = u + r_num * (np.roll(u, -1) - 2 * u + np.roll(u, 1))
    t_end = Fraction(u0.t) + Fraction(dt) * steps if exact else u0.t + float(dt) * steps
    return u0.with_values(u, t=t_end)
