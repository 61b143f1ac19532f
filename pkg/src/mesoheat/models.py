"""Phenomenological linear PDE family, scales and dispersion relations.

Every model has the form

    c_tt U_tt + U_t = c_xx U_xx + c_x4 U_xxxx + c_xxt U_xxt

with at most one of ``c_x4``/``c_xxt`` nonzero.  A Fourier mode ``exp(ikx + st)``
satisfies ``c_tt s^2 + (1 + c_xxt k^2) s + (c_xx k^2 - c_x4 k^4) = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .lattice import MicroParams
from .opcalc import ModifiedPDE
from .rational import as_fraction, format_fraction, is_exact

__all__ = [
    "LinearPDE",
    "ScaleSpec",
    "DimensionlessModel",
    "DispersionRoots",
    "InfiniteSpeedError",
    "dimensionless_params",
    "nondimensionalize",
    "redimensionalize",
    "predicted_speed",
    "dispersion_roots",
    "stable_roots",
]


class InfiniteSpeedError(ValueError):
    """Raised for parabolic models, whose signals propagate at infinite speed."""


def _num(v):
    # ints and "num/den" strings become Fractions; floats stay floats
    if isinstance(v, str) or (isinstance(v, int) and not isinstance(v, bool)):
        return as_fraction(v)
    return v


def _num_text(v):
    return format_fraction(v) if is_exact(v) else float(v)


@dataclass(frozen=True)
class LinearPDE:
    c_tt: object = 0
    c_xx: object = 1
    c_x4: object = 0
    c_xxt: object = 0

    def __post_init__(self):
        for name in ("c_tt", "c_xx", "c_x4", "c_xxt"):
            object.__setattr__(self, name, _num(getattr(self, name)))
        if not self.c_xx > 0:
            raise ValueError("c_xx (diffusivity) must be positive")
        if self.c_tt < 0 or self.c_x4 < 0 or self.c_xxt < 0:
            raise ValueError("c_tt, c_x4 and c_xxt must be non-negative")
        if self.c_x4 != 0 and self.c_xxt != 0:
            raise ValueError("c_x4 and c_xxt are alternative closures; at most one may be nonzero")

    @classmethod
    def heat(cls, D):
        return cls(0, D)

    @classmethod
    def telegraph(cls, tau, D):
        return cls(tau, D)

    @classmethod
    def fourth_order(cls, D, eps2, eps1=0):
        """``eps1 U_tt + U_t = D U_xx + eps2 D U_xxxx``."""
        return cls(eps1, D, _num(eps2) * _num(D))

    @classmethod
    def mixed(cls, tau, D, D1):
        return cls(tau, D, 0, D1)

    @classmethod
    def from_modified(cls, pde: ModifiedPDE, dx, dt):
        """Evaluate a level-0/1 modified PDE at concrete scales."""
        known = {(1, 0), (2, 0), (0, 2), (0, 4), (1, 2)}
        extra = {(t.j, t.k) for t in pde.terms} - known
        if extra:
            raise ValueError(f"terms {sorted(extra)} do not fit the linear model family")
        vals = pde.evaluate(_num(dx), _num(dt))
        if vals.get((1, 0), 1) != 1:
            raise ValueError("U_t coefficient must be 1")
        return cls(vals.get((2, 0), 0), vals[(0, 2)], vals.get((0, 4), 0), vals.get((1, 2), 0))

    @property
    def kind(self):
        if self.c_x4:
            return "fourth-order"
        if self.c_xxt:
            return "mixed"
        return "telegraph" if self.c_tt else "heat"

    @property
    def second_order_in_time(self):
        return self.c_tt != 0

    def instability_threshold(self):
        """Wavenumber above which a mode grows (``inf`` without a quartic term)."""
        if not self.c_x4:
            return math.inf
        return math.sqrt(float(self.c_xx) / float(self.c_x4))

    def as_float(self):
        return LinearPDE(float(self.c_tt), float(self.c_xx), float(self.c_x4), float(self.c_xxt))

    def to_dict(self):
        return {"kind": self.kind, "c_tt": _num_text(self.c_tt), "c_xx": _num_text(self.c_xx),
                "c_x4": _num_text(self.c_x4), "c_xxt": _num_text(self.c_xxt)}

    @classmethod
    def from_dict(cls, d):
        return cls(*(_num(d.get(k, 0)) for k in ("c_tt", "c_xx", "c_x4", "c_xxt")))


def _is_integer(ratio):
    if isinstance(ratio, Fraction) or isinstance(ratio, int):
        return Fraction(ratio).denominator == 1
    return abs(ratio - round(ratio)) <= 1e-9 * max(1.0, abs(ratio))


@dataclass(frozen=True)
class ScaleSpec:
    """Micro ``(x_a, t_a)``, meso ``(dx, dt)`` and macro ``(L, T)`` scales.

    ``x_a``/``t_a`` default to the meso scales.  The meso scales must be
    integer multiples of the micro ones unless ``allow_noninteger`` is set.
    """

    dx: object
    dt: object
    L: object = 1
    T: object = 1
    x_a: Optional[object] = None
    t_a: Optional[object] = None
    allow_noninteger: bool = False

    def __post_init__(self):
        for name in ("dx", "dt", "L", "T", "x_a", "t_a"):
            v = getattr(self, name)
            if v is None:
                object.__setattr__(self, name, getattr(self, {"x_a": "dx", "t_a": "dt"}[name]))
                v = getattr(self, name)
            v = _num(v)
            object.__setattr__(self, name, v)
            if not v > 0:
                raise ValueError(f"scale {name} must be strictly positive, got {v}")
        for label, ratio in (("N1 = dx/x_a", self.N1), ("N2 = dt/t_a", self.N2)):
            if ratio < 1 - 1e-12:
                raise ValueError(f"{label} = {ratio} must be >= 1")
            if not self.allow_noninteger and not _is_integer(ratio):
                raise ValueError(f"{label} = {ratio} is not an integer")
        for label, eps in (("eps1", self.eps1), ("eps2", self.eps2)):
            if not 0 < eps < 1:
                raise ValueError(f"{label} = {eps} must lie in (0, 1)")

    @property
    def N1(self):
        return self.dx / self.x_a

    @property
    def N2(self):
        return self.dt / self.t_a

    @property
    def integral(self):
        return _is_integer(self.N1) and _is_integer(self.N2)

    @property
    def eps1(self):
        return self.dt / self.T / 2

    @property
    def eps2(self):
        return (self.dx / self.L) ** 2

    @property
    def micro(self):
        return MicroParams(self.x_a, self.t_a)

    def to_dict(self):
        return {k: _num_text(getattr(self, k)) for k in ("dx", "dt", "L", "T", "x_a", "t_a")}

    @classmethod
    def from_dict(cls, d, allow_noninteger=False):
        return cls(**{k: d[k] for k in ("dx", "dt", "L", "T", "x_a", "t_a") if k in d},
                   allow_noninteger=bool(d.get("allow_noninteger", allow_noninteger)))


@dataclass(frozen=True)
class DimensionlessModel:
    D_bar: object
    eps1: object
    eps2: object

    def __post_init__(self):
        if not (self.D_bar > 0 and self.eps1 > 0 and self.eps2 > 0):
            raise ValueError("dimensionless parameters must be strictly positive")

    def to_dict(self):
        return {k: _num_text(getattr(self, k)) for k in ("D_bar", "eps1", "eps2")}


def dimensionless_params(scales: ScaleSpec, D) -> DimensionlessModel:
    D = _num(D)
    return DimensionlessModel(D * scales.T / scales.L**2, scales.eps1, scales.eps2)


def nondimensionalize(pde: LinearPDE, scales: ScaleSpec):
    """Rescale ``t = T tbar``, ``x = L xbar``; returns ``(params, barred_pde)``.

    For the level-1 PDE built at ``scales.dx``/``scales.dt`` the barred
    coefficients are ``c_tt = eps1``, ``c_xx = D_bar`` and
    ``c_x4 = eps2 * D_bar / 12`` for every admissible ``p``.
    """
    if not scales.integral:
        raise ValueError("scales violate dx = N1 x_a, dt = N2 t_a with integer N1, N2")
    if pde.c_xxt:
        raise ValueError("nondimensionalize expects the spatial-only (c_xxt = 0) form")
    L, T = scales.L, scales.T
    params = dimensionless_params(scales, pde.c_xx)
    barred = LinearPDE(pde.c_tt / T, pde.c_xx * T / L**2, pde.c_x4 * T / L**4, 0)
    return params, barred


def redimensionalize(barred: LinearPDE, scales: ScaleSpec) -> LinearPDE:
    L, T = scales.L, scales.T
    return LinearPDE(barred.c_tt * T, barred.c_xx * L**2 / T, barred.c_x4 * L**4 / T,
                     barred.c_xxt * L**2)


def predicted_speed(model):
    """Signal speed: ``sqrt(c_xx / c_tt)`` for a PDE, ``x_a / t_a`` for the lattice."""
    if isinstance(model, MicroParams):
        return model.x_a / model.t_a
    if not model.c_tt:
        raise InfiniteSpeedError(
            "c_tt = 0: the parabolic model transmits information at an infinite speed")
    return math.sqrt(float(model.c_xx) / float(model.c_tt))


def stable_roots(a, b, c):
    """Roots of ``a s^2 + b s + c`` for ``a > 0``, ``b >= 1`` without cancellation.

    Returns ``(fast, slow)`` as complex arrays where ``slow`` has the larger
    real part.  Works elementwise on arrays of ``c``.
    """
    c = np.asarray(c, dtype=np.float64)
    disc = b * b - 4.0 * a * c
    sq = np.sqrt(disc.astype(np.complex128))
    q = -0.5 * (b + sq)
    fast = q / a
    with np.errstate(divide="ignore", invalid="ignore"):
        slow = np.where(q != 0, c / np.where(q != 0, q, 1.0), 0.0)
    swap = slow.real < fast.real
    return np.where(swap, slow, fast), np.where(swap, fast, slow)


@dataclass(frozen=True)
class DispersionRoots:
    roots: tuple
    unstable: bool

    def __iter__(self):
        return iter(self.roots)


def dispersion_roots(pde: LinearPDE, k) -> DispersionRoots:
    """Growth rates ``s`` of mode ``exp(ikx + st)``; ``unstable`` if any ``Re s > 0``."""
    k2 = float(k) ** 2
    a = float(pde.c_tt)
    b = 1.0 + float(pde.c_xxt) * k2
    c = float(pde.c_xx) * k2 - float(pde.c_x4) * k2 * k2
    if a == 0:
        roots = (complex(-c / b),)
    else:
        fast, slow = stable_roots(a, b, np.array([c]))
        roots = (complex(slow[0]), complex(fast[0]))
    return DispersionRoots(roots, any(r.real > 0 for r in roots))
