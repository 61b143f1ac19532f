"""Exact operator calculus for the stencil recurrence.

Taylor-expanding ``U(x, t + dt) = sum_i w_i U(x + i dx, t)`` and dividing by
``dt`` gives

    sum_{j>=1} dt^(j-1)/j! d_t^j U  =  sum_{k>=1} (m_k / k!) dx^k/dt d_x^k U,

with ``m_k = sum_i w_i i^k`` the stencil moments.  Each coefficient is stored
as an exact rational times ``dt^a dx^b``.  Truncation treats ``dt`` as order
``dx^2`` (diffusivity held fixed), so a term of ``dt^a dx^b`` has order
``2a + b`` relative to ``U_t``.

The second half of the module is a tiny truncated power-series algebra used
to check the shift/difference operator identities exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .lattice import Stencil
from .rational import format_fraction

__all__ = [
    "SeriesTerm",
    "ModifiedPDE",
    "PrintedNote",
    "OperatorSeries",
    "SPATIAL",
    "MIXED",
    "expand_stencil",
    "expand_weights",
    "derive_hierarchy",
    "reduce_to_mixed_form",
    "expand_mixed_form",
    "printed_level1",
    "log_series_coeffs",
    "shift_series_coeffs",
    "difference_series_coeffs",
    "operator_identity_check",
    "inverse_identity_check",
]

SPATIAL = "spatial"
MIXED = "mixed"


@dataclass(frozen=True, order=True)
class SeriesTerm:
    """``coeff * dt**dt_power * dx**dx_power`` multiplying ``d_t^j d_x^k U``.

    Terms with ``k == 0`` sit on the left of the equation, all others on the
    right.  Powers may be negative (``dx^2/dt`` is the diffusivity).
    """

    j: int
    k: int
    coeff: Fraction
    dt_power: int
    dx_power: int

    def __post_init__(self):
        if self.j < 0 or self.k < 0:
            raise ValueError("derivative orders must be non-negative")
        object.__setattr__(self, "coeff", Fraction(self.coeff))

    @property
    def lhs(self):
        return self.k == 0

    @property
    def order(self):
        """Order in ``dx`` relative to ``U_t`` under ``dt ~ dx^2``."""
        return 2 * self.dt_power + self.dx_power

    def is_homogeneous(self):
        """True when the term has units temperature/time like ``U_t``."""
        return self.dt_power == self.j - 1 and self.dx_power == self.k

    def value(self, dx, dt):
        return self.coeff * dt**self.dt_power * dx**self.dx_power

    def symbol(self):
        """Compact text such as ``1/2·δt`` or ``1/3·δx²/δt``."""
        parts = [str(self.coeff)]
        num = _symbols(self.dt_power, self.dx_power, positive=True)
        den = _symbols(self.dt_power, self.dx_power, positive=False)
        if num:
            parts.append(num)
        text = "·".join(parts)
        if den:
            text += "/" + den
        return text

    def derivative_name(self):
        return "U_" + "x" * self.k + "t" * self.j if self.k and self.j else (
            "U_" + ("t" * self.j if self.j else "x" * self.k))

    def to_dict(self):
        return {
            "j": self.j,
            "k": self.k,
            "coeff": format_fraction(self.coeff),
            "dt_power": self.dt_power,
            "dx_power": self.dx_power,
            "display": self.symbol(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["j"]), int(d["k"]), Fraction(d["coeff"]),
                   int(d["dt_power"]), int(d["dx_power"]))


_SUPERSCRIPT = str.maketrans("0123456789-", "⁰¹²³⁴⁵⁶⁷⁸⁹⁻")


def _pow(name, n):
    return name if n == 1 else name + str(n).translate(_SUPERSCRIPT)


def _symbols(dt_power, dx_power, positive):
    out = []
    for name, n in (("δx", dx_power), ("δt", dt_power)):
        if positive and n > 0:
            out.append(_pow(name, n))
        elif not positive and n < 0:
            out.append(_pow(name, -n))
    return "".join(out)


def _coefficient_text(term):
    """Parenthesised magnitude, e.g. ``(δx⁴/(36δt))``; empty for a bare 1."""
    q = abs(term.coeff)
    num_sym = _symbols(term.dt_power, term.dx_power, True)
    den_sym = _symbols(term.dt_power, term.dx_power, False)
    num = num_sym if q.numerator == 1 and num_sym else (
        f"{q.numerator}{num_sym}" if num_sym else str(q.numerator))
    den_parts = []
    if q.denominator != 1:
        den_parts.append(str(q.denominator))
    if den_sym:
        den_parts.append(den_sym)
    den = "".join(den_parts)
    if not den:
        return "" if num == "1" else f"({num})"
    if len(den_parts) > 1 or len(den_sym) > 2:
        den = f"({den})"
    return f"({num}/{den})"


@dataclass(frozen=True)
class PrintedNote:
    """A printed value that disagrees with the derived one."""

    j: int
    k: int
    computed: str
    printed: str
    note: str

    def to_dict(self):
        return dict(j=self.j, k=self.k, computed=self.computed, printed=self.printed,
                    note=self.note)


@dataclass(frozen=True)
class ModifiedPDE:
    """One member of the modified-equation hierarchy.

    ``level`` is ``None`` for a raw expansion that was not truncated by order.
    The ``U_t`` coefficient is always 1.
    """

    level: Optional[int]
    terms: tuple
    form: str = SPATIAL
    p: Fraction = Fraction(1, 3)
    notes: tuple = field(default=(), compare=False)

    def __post_init__(self):
        terms = tuple(sorted(t for t in self.terms if t.coeff != 0))
        keys = [(t.j, t.k) for t in terms]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate derivative in modified PDE")
        object.__setattr__(self, "terms", terms)
        if self.form not in (SPATIAL, MIXED):
            raise ValueError(f"unknown form {self.form!r}")

    def term(self, j, k):
        for t in self.terms:
            if (t.j, t.k) == (j, k):
                return t
        return None

    def coefficient(self, j, k):
        t = self.term(j, k)
        return Fraction(0) if t is None else t.coeff

    def max_time_order(self):
        return max(t.j for t in self.terms)

    def max_space_order(self):
        return max(t.k for t in self.terms)

    def is_homogeneous(self):
        return all(t.is_homogeneous() for t in self.terms)

    def evaluate(self, dx, dt):
        """Numeric coefficients ``{(j, k): value}`` for given scales."""
        return {(t.j, t.k): t.value(dx, dt) for t in self.terms}

    def pretty(self):
        lhs = sorted((t for t in self.terms if t.lhs), key=lambda t: -t.j)
        rhs = sorted((t for t in self.terms if not t.lhs), key=lambda t: (t.k, t.j))
        return f"{_join(lhs)} = {_join(rhs)}"

    def to_dict(self):
        return {
            "level": self.level,
            "form": self.form,
            "p": format_fraction(self.p),
            "equation": self.pretty(),
            "terms": [t.to_dict() for t in self.terms],
            "printed_discrepancies": [n.to_dict() for n in self.notes],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["level"], tuple(SeriesTerm.from_dict(t) for t in d["terms"]),
                   d.get("form", SPATIAL), Fraction(d.get("p", "1/3")))


def _join(terms):
    out = ""
    for i, t in enumerate(terms):
        mag = _coefficient_text(t)
        piece = f"{mag}·{t.derivative_name()}" if mag else t.derivative_name()
        if i == 0:
            out = ("-" if t.coeff < 0 else "") + piece
        else:
            out += (" - " if t.coeff < 0 else " + ") + piece
    return out or "0"


def expand_weights(weights, offsets, t_order, x_order):
    """Raw expansion of an arbitrary explicit rule; odd moments are kept."""
    terms = [SeriesTerm(j, 0, Fraction(1, math.factorial(j)), j - 1, 0)
             for j in range(1, t_order + 1)]
    for k in range(1, x_order + 1):
        moment = sum(Fraction(w) * Fraction(i) ** k for w, i in zip(weights, offsets))
        if moment:
            terms.append(SeriesTerm(0, k, moment / math.factorial(k), -1, k))
    return terms


def expand_stencil(stencil: Stencil, t_order: int, x_order: int) -> ModifiedPDE:
    """Two-sided Taylor expansion of the stencil through ``d_t^J`` and ``d_x^K``."""
    if t_order < 1:
        raise ValueError("t_order must be >= 1")
    if x_order < 2 or x_order % 2:
        raise ValueError("x_order must be even and >= 2; odd orders vanish by parity")
    terms = expand_weights(stencil.weights, stencil.offsets, t_order, x_order)
    if any(t.k % 2 for t in terms):
        raise AssertionError("symmetric stencil produced an odd spatial derivative")
    pde = ModifiedPDE(None, tuple(terms), SPATIAL, stencil.p)
    return _annotate(pde)


def derive_hierarchy(stencil: Stencil, level: int) -> ModifiedPDE:
    """Level-``N`` modified PDE: all terms of relative order ``dx^(2N)`` or lower."""
    if level < 0:
        raise ValueError("hierarchy level must be >= 0")
    raw = expand_stencil(stencil, level + 1, 2 * (level + 1))
    kept = tuple(t for t in raw.terms if t.order <= 2 * level)
    return _annotate(ModifiedPDE(level, kept, SPATIAL, stencil.p))


def reduce_to_mixed_form(pde: ModifiedPDE) -> ModifiedPDE:
    """Swap ``U_xxxx`` for ``U_xxt / D`` using the level-0 relation ``U_t = D U_xx``."""
    if pde.level != 1 or pde.form != SPATIAL:
        raise ValueError("mixed-form reduction is only defined for the level-1 spatial form")
    diff = pde.term(0, 2)
    quartic = pde.term(0, 4)
    terms = [t for t in pde.terms if (t.j, t.k) != (0, 4)]
    if quartic is not None:
        terms.append(SeriesTerm(1, 2, quartic.coeff / diff.coeff,
                                quartic.dt_power - diff.dt_power,
                                quartic.dx_power - diff.dx_power))
    return _annotate(ModifiedPDE(1, tuple(terms), MIXED, pde.p))


def expand_mixed_form(pde: ModifiedPDE) -> ModifiedPDE:
    """Inverse of :func:`reduce_to_mixed_form` to the kept order (``U_xxt -> D U_xxxx``)."""
    if pde.form != MIXED:
        raise ValueError("expected a mixed-form PDE")
    diff = pde.term(0, 2)
    terms = []
    for t in pde.terms:
        if (t.j, t.k) == (1, 2):
            terms.append(SeriesTerm(0, 4, t.coeff * diff.coeff, t.dt_power + diff.dt_power,
                                    t.dx_power + diff.dx_power))
        else:
            terms.append(t)
    return ModifiedPDE(pde.level, tuple(terms), SPATIAL, pde.p, pde.notes)


def printed_level1(form: str = SPATIAL) -> ModifiedPDE:
    """Level-1 PDE with the fourth-order/mixed coefficient exactly as printed.

    The printed value ``(D/36) dx^2`` with ``D = dx^2/(3 dt)`` is ``dx^4/(108 dt)``;
    the mixed form prints the same quantity on ``U_xxt``.
    """
    base = [SeriesTerm(1, 0, Fraction(1), 0, 0),
            SeriesTerm(2, 0, Fraction(1, 2), 1, 0),
            SeriesTerm(0, 2, Fraction(1, 3), -1, 2)]
    extra = (0, 4) if form == SPATIAL else (1, 2)
    base.append(SeriesTerm(extra[0], extra[1], Fraction(1, 108), -1, 4))
    return ModifiedPDE(1, tuple(base), form, Fraction(1, 3))


def _annotate(pde: ModifiedPDE) -> ModifiedPDE:
    # the printed coefficients refer to p = 1/3 only
    if pde.p != Fraction(1, 3):
        return pde
    notes = []
    quartic = pde.term(0, 4)
    if quartic is not None and quartic.coeff != Fraction(1, 108):
        notes.append(PrintedNote(
            0, 4, quartic.symbol() + " = (D/12)·δx²", "(D/36)·δx² = 1/108·δx⁴/δt",
            "printed fourth-derivative coefficient is smaller by a factor of 3"))
    mixed = pde.term(1, 2)
    if mixed is not None:
        notes.append(PrintedNote(
            1, 2, mixed.symbol(), "(δx²·D/36) = 1/108·δx⁴/δt",
            "printed mixed-derivative coefficient has units length^4/time, "
            "not length^2; the homogeneous value is δx²/12"))
    return ModifiedPDE(pde.level, pde.terms, pde.form, pde.p, tuple(notes))


# --- truncated power series ------------------------------------------------


@dataclass(frozen=True)
class OperatorSeries:
    """Truncated series ``sum_{i<=order} coeffs[i] z^i`` with exact coefficients."""

    coeffs: tuple
    order: int

    def __post_init__(self):
        c = [Fraction(x) for x in self.coeffs[: self.order + 1]]
        c += [Fraction(0)] * (self.order + 1 - len(c))
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def identity(cls, order):
        """The series ``z``."""
        return cls((0, 1), order)

    def __getitem__(self, i):
        return self.coeffs[i]

    def __add__(self, other):
        n = min(self.order, other.order)
        return OperatorSeries(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), n)

    def __sub__(self, other):
        n = min(self.order, other.order)
        return OperatorSeries(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)), n)

    def __mul__(self, other):
        n = min(self.order, other.order)
        out = [Fraction(0)] * (n + 1)
        for i, a in enumerate(self.coeffs[: n + 1]):
            if a:
                for j, b in enumerate(other.coeffs[: n + 1 - i]):
                    out[i + j] += a * b
        return OperatorSeries(tuple(out), n)

    def compose(self, inner):
        """``self(inner(z))``; ``inner`` must have zero constant term."""
        if inner.coeffs[0] != 0:
            raise ValueError("inner series must vanish at z = 0")
        n = min(self.order, inner.order)
        result = OperatorSeries((self.coeffs[n],), n)
        for c in reversed(self.coeffs[:n]):
            result = result * inner
            result = OperatorSeries((result.coeffs[0] + c,) + result.coeffs[1:], n)
        return result

    def nonzero(self):
        """``{power: coeff}`` for the nonzero coefficients."""
        return {i: c for i, c in enumerate(self.coeffs) if c}

    def is_zero(self):
        return not self.nonzero()


def log_series_coeffs(order: int) -> OperatorSeries:
    """``ln(1 + w) = w - w^2/2 + w^3/3 - ...`` through ``w^order``."""
    if order < 1:
        raise ValueError("order must be >= 1")
    return OperatorSeries((0,) + tuple(Fraction((-1) ** (k + 1), k) for k in range(1, order + 1)),
                          order)


def shift_series_coeffs(order: int) -> OperatorSeries:
    """``e^z = sum z^k / k!``: the shift operator in powers of ``aD``."""
    if order < 0:
        raise ValueError("order must be >= 0")
    return OperatorSeries(tuple(Fraction(1, math.factorial(k)) for k in range(order + 1)), order)


def difference_series_coeffs(order: int) -> OperatorSeries:
    """Forward difference ``e^z - 1``."""
    e = shift_series_coeffs(order)
    return OperatorSeries((0,) + e.coeffs[1:], order)


def operator_identity_check(order: int) -> OperatorSeries:
    """Residual of ``ln(1 + (e^z - 1)) - z`` through ``z^order`` (zero if the identity holds)."""
    if order < 1:
        raise ValueError("order must be >= 1")
    composed = log_series_coeffs(order).compose(difference_series_coeffs(order))
    return composed - OperatorSeries.identity(order)


def inverse_identity_check(order: int) -> OperatorSeries:
    """Residual of ``e^(ln(1 + w)) - 1 - w`` through ``w^order``."""
    composed = difference_series_coeffs(order).compose(log_series_coeffs(order))
    return composed - OperatorSeries.identity(order)
