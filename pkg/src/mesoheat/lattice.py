"""Discrete micro-level heat model on a ring or an unbounded line.

The update rule is the symmetric three-point stencil

    u[s]^(r+1) = p*u[s+1]^r + (1 - 2p)*u[s]^r + p*u[s-1]^r,    0 < p <= 1/2.

Every operation runs in one of two arithmetic modes, chosen by the field's
values: exact rationals (``fractions.Fraction``) or float64.  Float evolution
dispatches to the compiled kernels in :mod:`mesoheat._backend`; rational
evolution raises the stencil polynomial to the r-th power with GMP integers.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import gmpy2
import numpy as np

from . import _backend
from .rational import as_fraction, is_exact

__all__ = [
    "Stencil",
    "Ring",
    "Line",
    "LatticeField",
    "MicroParams",
    "NonDissipativeWarning",
    "TopologyError",
    "step",
    "evolve",
    "exact_evolve_ring",
    "diffusion_coefficient",
    "amplification_factor",
    "total_heat",
    "apply_weights",
    "mirror",
    "delta",
]


class NonDissipativeWarning(UserWarning):
    """p = 1/2 leaves the checkerboard mode undamped (g(pi) = -1)."""


class TopologyError(ValueError):
    pass


def _exact_param(value):
    # floats are read as the decimal the user typed, e.g. 0.4 -> 2/5
    if isinstance(value, float):
        return Fraction(repr(value))
    return as_fraction(value)


@dataclass(frozen=True)
class Stencil:
    """Hop probability ``p`` and the derived weights ``[p, 1-2p, p]``."""

    p: Fraction = Fraction(1, 3)

    def __post_init__(self):
        p = _exact_param(self.p)
        if not (0 < p <= Fraction(1, 2)):
            raise ValueError(f"hop probability p={p} outside the admissible band (0, 1/2]")
        object.__setattr__(self, "p", p)
        if p == Fraction(1, 2):
            warnings.warn(
                "p = 1/2 gives amplification factor -1 at theta = pi; "
                "the checkerboard mode is not damped",
                NonDissipativeWarning,
                stacklevel=3,
            )

    @property
    def offsets(self):
        return (-1, 0, 1)

    @property
    def weights(self):
        return (self.p, 1 - 2 * self.p, self.p)


@dataclass(frozen=True)
class Ring:
    M: int

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 3:
            raise ValueError(f"ring needs M >= 3 cells, got {self.M}")


@dataclass(frozen=True)
class Line:
    """Infinite line; only the compact support is stored."""


@dataclass(frozen=True)
class MicroParams:
    x_a: Union[Fraction, float] = 1
    t_a: Union[Fraction, float] = 1

    def __post_init__(self):
        for name in ("x_a", "t_a"):
            v = getattr(self, name)
            if isinstance(v, str):
                v = as_fraction(v)
                object.__setattr__(self, name, v)
            if not v > 0:
                raise ValueError(f"{name} must be strictly positive, got {v}")

    @property
    def speed(self):
        return self.x_a / self.t_a


def _coerce_values(values, exact):
    if exact is None:
        exact = not isinstance(values, np.ndarray) and all(is_exact(v) for v in values)
    if exact:
        return tuple(as_fraction(v) for v in values), True
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("lattice values must be one-dimensional")
    arr.setflags(write=False)
    return arr, False


class LatticeField:
    """Temperatures ``u[s]`` at lattice step ``r``.

    For a :class:`Line` the values cover ``s = origin .. origin + len - 1`` and
    are zero everywhere else.  For a :class:`Ring` the values cover
    ``s = 0 .. M - 1``.

    Parameters
    ----------
    values : sequence
        Cell values.  All ints/Fractions selects rational mode, anything else
        float mode; ``exact`` forces the choice.
    topology : Ring or Line, optional
        Defaults to ``Ring(len(values))``.
    """

    __slots__ = ("values", "topology", "origin", "r", "exact")

    def __init__(self, values, topology=None, origin=0, r=0, exact=None):
        vals, is_rat = _coerce_values(values, exact)
        if topology is None:
            topology = Ring(len(vals))
        if isinstance(topology, Ring):
            if len(vals) != topology.M:
                raise ValueError(f"ring of {topology.M} cells given {len(vals)} values")
            origin = 0
        elif not isinstance(topology, Line):
            raise TypeError(f"unknown topology {topology!r}")
        if r < 0:
            raise ValueError("step index r must be non-negative")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "topology", topology)
        object.__setattr__(self, "origin", int(origin))
        object.__setattr__(self, "r", int(r))
        object.__setattr__(self, "exact", is_rat)

    def __setattr__(self, name, value):
        raise AttributeError("LatticeField is immutable")

    @classmethod
    def temperatures(cls, values, topology=None, origin=0, exact=None):
        """Build a field from physical (Kelvin) data, rejecting negative values."""
        field = cls(values, topology, origin, exact=exact)
        if any(v < 0 for v in field.values):
            raise ValueError("absolute temperatures must be non-negative")
        return field

    @property
    def mode(self):
        return "rational" if self.exact else "float"

    @property
    def is_ring(self):
        return isinstance(self.topology, Ring)

    def __len__(self):
        return len(self.values)

    def __repr__(self):
        vals = list(self.values) if self.exact else self.values.tolist()
        if len(vals) > 8:
            vals = vals[:4] + ["..."] + vals[-3:]
        return (f"LatticeField({vals}, {self.topology}, origin={self.origin}, "
                f"r={self.r}, mode={self.mode})")

    def __eq__(self, other):
        if not isinstance(other, LatticeField):
            return NotImplemented
        return (
            self.topology == other.topology
            and self.origin == other.origin
            and self.r == other.r
            and self.exact == other.exact
            and len(self) == len(other)
            and all(a == b for a, b in zip(self.values, other.values))
        )

    __hash__ = None

    def positions(self):
        return list(range(self.origin, self.origin + len(self.values)))

    def value_at(self, s):
        zero = Fraction(0) if self.exact else 0.0
        if self.is_ring:
            return self.values[s % self.topology.M]
        i = s - self.origin
        if 0 <= i < len(self.values):
            return self.values[i]
        return zero

    def window(self, lo, hi):
        """Values for ``s = lo .. hi`` inclusive (zero-padded on a line)."""
        return [self.value_at(s) for s in range(lo, hi + 1)]

    def support(self):
        """``(lo, hi)`` of the nonzero cells, or ``None`` for the zero field."""
        nz = [i for i, v in enumerate(self.values) if v != 0]
        if not nz:
            return None
        return self.origin + nz[0], self.origin + nz[-1]

    def as_array(self):
        return np.array([float(v) for v in self.values]) if self.exact else self.values.copy()

    def to_float(self):
        return LatticeField(self.as_array(), self.topology, self.origin, self.r, exact=False)

    def to_rational(self):
        return LatticeField([as_fraction(float(v)) for v in self.values],
                            self.topology, self.origin, self.r, exact=True)

    def with_values(self, values, origin=None, r=None):
        return LatticeField(values, self.topology,
                            self.origin if origin is None else origin,
                            self.r if r is None else r, exact=self.exact)


def delta(topology=None, size=1, at=0, exact=True):
    """Unit spike: a line field ``[1]`` at ``s = at``, or a ring of ``size`` cells."""
    one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
    if topology is None or isinstance(topology, Line):
        vals = [zero] * size
        vals[size // 2] = one
        return LatticeField(vals, Line(), origin=at - size // 2, exact=exact)
    vals = [zero] * topology.M
    vals[at % topology.M] = one
    return LatticeField(vals, topology, exact=exact)


def mirror(field):
    """Reflect ``s -> -s`` (parity transformation)."""
    if field.is_ring:
        vals = list(field.values)
        vals = [vals[0]] + vals[:0:-1]
        return field.with_values(vals)
    n = len(field.values)
    return field.with_values(list(field.values)[::-1], origin=-(field.origin + n - 1))


def apply_weights(field, weights):
    """One step of an arbitrary three-point rule ``sum_i w_i u[s+i]``, i = -1, 0, 1.

    Used for harness self-tests with deliberately non-symmetric rules; the
    admissible model always goes through :func:`step`.
    """
    wl, wc, wr = weights
    vals = list(field.values)
    zero = Fraction(0) if field.exact else 0.0
    if field.is_ring:
        m = len(vals)
        new = [wr * vals[(s + 1) % m] + wc * vals[s] + wl * vals[s - 1] for s in range(m)]
        return field.with_values(new, r=field.r + 1)
    padded = [zero, zero] + vals + [zero, zero]
    new = [wr * padded[j + 2] + wc * padded[j + 1] + wl * padded[j] for j in range(len(vals) + 2)]
    return field.with_values(new, origin=field.origin - 1, r=field.r + 1)


def step(field: LatticeField, stencil: Stencil) -> LatticeField:
    """Advance one lattice step."""
    return evolve(field, stencil, 1)


def _rational_kernel(p, r, modulus_cells=None):
    """Integer coefficients of ``(a x^-1 + (b - 2a) + a x)^r`` and the scale ``b^r``.

    Returns ``(coeffs, scale)`` where ``coeffs[e]`` belongs to offset ``e - r``.
    With ``modulus_cells=M`` the polynomial is reduced mod ``x^M - 1`` and
    ``coeffs[o]`` belongs to offset ``o`` (mod M).
    """
    a, b = p.numerator, p.denominator
    c = b - 2 * a
    scale = gmpy2.mpz(b) ** r
    # every coefficient is bounded by the total mass b^r, so this slot width is exact
    width = int(scale.bit_length()) + 1
    base = gmpy2.mpz(a) + (gmpy2.mpz(c) << width) + (gmpy2.mpz(a) << (2 * width))
    if modulus_cells is None:
        packed = base ** r
        coeffs = gmpy2.unpack(packed, width)
        coeffs += [gmpy2.mpz(0)] * (2 * r + 1 - len(coeffs))
        return coeffs[: 2 * r + 1], scale
    m = modulus_cells
    packed = _cyclic_pow(base, r, width * m)
    slots = gmpy2.unpack(packed, width)
    slots += [gmpy2.mpz(0)] * (m - len(slots))
    # slot e holds exponent e = offset + r (mod M)
    coeffs = [slots[(o + r) % m] for o in range(m)]
    return coeffs, scale


def _cyclic_fold(value, nbits, mask):
    # reduce mod 2**nbits - 1 (x^M == 1) with shifts; GMP powmod ignores this structure
    while value >> nbits:
        value = (value & mask) + (value >> nbits)
    return value


def _cyclic_pow(base, r, nbits):
    mask = (gmpy2.mpz(1) << nbits) - 1
    result = gmpy2.mpz(1)
    base = _cyclic_fold(base, nbits, mask)
    while r:
        if r & 1:
            result = _cyclic_fold(result * base, nbits, mask)
        r >>= 1
        if r:
            base = _cyclic_fold(base * base, nbits, mask)
    return result


def _evolve_rational(field, p, r):
    vals = field.values
    common = 1
    for v in vals:
        common = math.lcm(common, v.denominator)
    ints = [gmpy2.mpz(v.numerator * (common // v.denominator)) for v in vals]
    if field.is_ring:
        m = len(ints)
        kern, scale = _rational_kernel(p, r, modulus_cells=m)
        live = [(o, k) for o, k in enumerate(kern) if k]
        out = []
        for s in range(m):
            acc = gmpy2.mpz(0)
            for o, k in live:
                acc += k * ints[(s + o) % m]
            out.append(Fraction(int(acc), int(scale) * common))
        return field.with_values(out, r=field.r + r)
    kern, scale = _rational_kernel(p, r)
    n = len(ints)
    out = []
    # output cell j sits at s = origin - r + j and reads input index j + e - 2r
    for j in range(n + 2 * r):
        acc = gmpy2.mpz(0)
        lo = max(0, 2 * r - j)
        hi = min(2 * r, n - 1 + 2 * r - j)
        for e in range(lo, hi + 1):
            acc += kern[e] * ints[j + e - 2 * r]
        out.append(Fraction(int(acc), int(scale) * common))
    return field.with_values(out, origin=field.origin - r, r=field.r + r)


def evolve(field: LatticeField, stencil: Stencil, r: int) -> LatticeField:
    """Apply :func:`step` ``r`` times.

    Rational mode is exact.  Float mode runs the compiled kernel and is
    bit-identical to the numpy fallback.
    """
    if r < 0 or int(r) != r:
        raise ValueError(f"step count must be a non-negative integer, got {r}")
    r = int(r)
    if r == 0:
        return field
    if field.exact:
        return _evolve_rational(field, stencil.p, r)
    u = np.ascontiguousarray(field.values, dtype=np.float64)
    p = float(stencil.p)
    if field.is_ring:
        return field.with_values(_backend.ring_evolve(u, p, r), r=field.r + r)
    return field.with_values(_backend.line_evolve(u, p, r),
                             origin=field.origin - r, r=field.r + r)


def amplification_factor(stencil: Stencil, theta):
    """Per-step growth ``g(theta) = 1 - 2p(1 - cos theta)`` of a Fourier mode."""
    return 1.0 - 2.0 * float(stencil.p) * (1.0 - np.cos(theta))


def exact_evolve_ring(field: LatticeField, stencil: Stencil, r: int) -> LatticeField:
    """Evolve a ring field by diagonalising the stencil with the DFT.

    Mode ``j`` is multiplied by ``g(2 pi j / M)**r``.  The result is always a
    float field.
    """
    if not field.is_ring:
        raise TopologyError("exact_evolve_ring requires a Ring topology")
    if r < 0:
        raise ValueError("step count must be non-negative")
    m = field.topology.M
    u = field.as_array()
    g = amplification_factor(stencil, 2.0 * np.pi * np.arange(m // 2 + 1) / m)
    out = np.fft.irfft(np.fft.rfft(u) * g**r, m)
    return LatticeField(out, field.topology, r=field.r + r, exact=False)


def diffusion_coefficient(stencil: Stencil, micro: MicroParams):
    """``D = p * x_a**2 / t_a``."""
    p = stencil.p
    if is_exact(micro.x_a) and is_exact(micro.t_a):
        return p * as_fraction(micro.x_a) ** 2 / as_fraction(micro.t_a)
    return float(p) * micro.x_a**2 / micro.t_a


def total_heat(field: LatticeField):
    if field.exact:
        return sum(field.values, Fraction(0))
    return math.fsum(field.values)


def history(field: LatticeField, stencil: Stencil, steps: int) -> Sequence[LatticeField]:
    """``[field, step(field), ..., evolve(field, steps)]``."""
    out = [field]
    for _ in range(steps):
        out.append(step(out[-1], stencil))
    return out


__all__.append("history")
