import math
import warnings
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mesoheat import lattice as lat
from mesoheat.analysis import parity_check
from mesoheat.lattice import (LatticeField, Line, MicroParams, NonDissipativeWarning, Ring, Stencil,
                              TopologyError)

THIRD = Stencil()

ps = st.fractions(min_value=F(1, 50), max_value=F(1, 2), max_denominator=50).filter(lambda p: p > 0)
cells = st.lists(st.fractions(min_value=0, max_value=10, max_denominator=9), min_size=3, max_size=12)


def _quiet(p):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonDissipativeWarning)
        return Stencil(p)


class TestStencil:
    def test_default_weights(self):
        assert THIRD.weights == (F(1, 3), F(1, 3), F(1, 3))
        assert sum(THIRD.weights) == 1

    def test_float_read_as_decimal(self):
        assert Stencil(0.4).p == F(2, 5)

    @pytest.mark.parametrize("p", [0, F(-1, 3), F(3, 5), 1])
    def test_outside_band(self, p):
        with pytest.raises(ValueError, match="admissible"):
            Stencil(p)

    def test_half_warns(self):
        with pytest.warns(NonDissipativeWarning):
            Stencil(F(1, 2))


class TestField:
    def test_immutable(self):
        f = lat.delta()
        with pytest.raises(AttributeError):
            f.values = ()
        g = lat.delta(exact=False)
        with pytest.raises(ValueError):
            g.values[0] = 2.0

    def test_temperatures_reject_negative(self):
        with pytest.raises(ValueError, match="non-negative"):
            LatticeField.temperatures([F(1), F(-1), F(0)])

    def test_ring_size_mismatch(self):
        with pytest.raises(ValueError):
            LatticeField([1, 2, 3], Ring(4))

    def test_small_ring(self):
        with pytest.raises(ValueError):
            Ring(2)

    def test_window_zero_pads(self):
        f = lat.step(LatticeField([F(0), F(0), F(1), F(0), F(0)], Line(), origin=-2), THIRD)
        assert f.window(-2, 2) == [0, F(1, 3), F(1, 3), F(1, 3), 0]
        assert f.value_at(99) == 0

    def test_round_trip_modes(self):
        f = LatticeField([F(1, 3), F(1, 4), F(0)])
        # floats convert to their exact binary value
        assert f.to_float().to_rational().values == (F(float(F(1, 3))), F(1, 4), F(0))

    def test_micro_positive(self):
        with pytest.raises(ValueError):
            MicroParams(0, 1)


class TestEvolve:
    def test_delta_two_steps(self):
        out = lat.evolve(lat.delta(), THIRD, 2)
        assert list(out.values) == [F(1, 9), F(2, 9), F(1, 3), F(2, 9), F(1, 9)]
        assert out.origin == -2 and out.r == 2

    def test_support_grows_one_per_step(self):
        assert lat.evolve(lat.delta(), THIRD, 20).support() == (-20, 20)

    def test_negative_steps(self):
        with pytest.raises(ValueError):
            lat.evolve(lat.delta(), THIRD, -1)

    @given(ps, cells, st.integers(0, 6))
    @settings(max_examples=40, deadline=None)
    def test_rational_matches_repeated_rule(self, p, vals, r):
        s = _quiet(p)
        for topo in (Ring(len(vals)), Line()):
            f = LatticeField(vals, topo)
            ref = f
            for _ in range(r):
                ref = lat.apply_weights(ref, s.weights)
            assert lat.evolve(f, s, r) == ref

    @given(ps, cells, st.integers(0, 30))
    @settings(max_examples=40, deadline=None)
    def test_conservation(self, p, vals, r):
        s = _quiet(p)
        for topo in (Ring(len(vals)), Line()):
            f = LatticeField(vals, topo)
            assert lat.total_heat(lat.evolve(f, s, r)) == lat.total_heat(f)

    @given(ps, cells, st.integers(0, 30))
    @settings(max_examples=40, deadline=None)
    def test_max_principle_and_positivity(self, p, vals, r):
        s = _quiet(p)
        out = lat.evolve(LatticeField(vals, Ring(len(vals))), s, r)
        assert min(out.values) >= min(vals) >= 0
        assert max(out.values) <= max(vals)

    @given(ps, cells, st.integers(0, 10))
    @settings(max_examples=30, deadline=None)
    def test_parity(self, p, vals, r):
        s = _quiet(p)
        for topo in (Ring(len(vals)), Line()):
            assert parity_check(lambda f: lat.evolve(f, s, r), LatticeField(vals, topo))

    @given(ps, st.integers(0, 8), st.integers(0, 8))
    @settings(max_examples=30, deadline=None)
    def test_semigroup(self, p, a, b):
        s = _quiet(p)
        f = LatticeField([F(i % 3) for i in range(7)], Ring(7))
        assert lat.evolve(lat.evolve(f, s, a), s, b) == lat.evolve(f, s, a + b)

    def test_float_close_to_rational(self):
        f = LatticeField([F(i * i % 11, 3) for i in range(32)], Ring(32))
        exact = lat.evolve(f, THIRD, 50).as_array()
        approx = lat.evolve(f.to_float(), THIRD, 50).values
        assert np.max(np.abs(exact - approx)) < 1e-13

    def test_line_float(self):
        out = lat.evolve(lat.delta(exact=False), THIRD, 2)
        assert np.allclose(out.values, [1 / 9, 2 / 9, 1 / 3, 2 / 9, 1 / 9], rtol=0, atol=1e-16)
        assert out.origin == -2

    def test_long_ring_rational(self):
        f = lat.delta(Ring(64), exact=True)
        out = lat.evolve(f, THIRD, 6000)
        assert lat.total_heat(out) == 1
        assert np.allclose(out.as_array(), 1 / 64, atol=1e-8)


class TestSpectral:
    @given(ps, st.floats(0, 2 * math.pi))
    def test_amplification_bounded(self, p, theta):
        assert abs(lat.amplification_factor(_quiet(p), theta)) <= 1 + 1e-15

    def test_half_checkerboard_not_damped(self):
        s = _quiet(F(1, 2))
        assert lat.amplification_factor(s, math.pi) == -1

    def test_exact_evolve_matches(self):
        f = LatticeField(np.sin(np.arange(24)) + 2, Ring(24), exact=False)
        a = lat.exact_evolve_ring(f, THIRD, 17).values
        b = lat.evolve(f, THIRD, 17).values
        assert np.max(np.abs(a - b)) < 1e-13

    def test_exact_evolve_needs_ring(self):
        with pytest.raises(TopologyError):
            lat.exact_evolve_ring(lat.delta(), THIRD, 2)


def test_diffusion_coefficient():
    assert lat.diffusion_coefficient(THIRD, MicroParams(F(1, 10), F(1, 100))) == F(1, 3)
    assert lat.diffusion_coefficient(THIRD, MicroParams(0.5, 0.25)) == pytest.approx(1 / 3)


def test_mirror_line():
    f = LatticeField([F(1), F(2)], Line(), origin=3)
    m = lat.mirror(f)
    assert m.origin == -4 and list(m.values) == [2, 1]


def test_history_lengths():
    h = lat.history(lat.delta(), THIRD, 3)
    assert [f.r for f in h] == [0, 1, 2, 3]
