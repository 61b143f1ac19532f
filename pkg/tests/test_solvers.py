import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mesoheat import lattice as lat
from mesoheat.models import LinearPDE
from mesoheat.solvers import (ContinuumField, IllPosedGrowth, InitialData, MissingInitialRate,
                              StabilityViolation, compatibility_initial_rate, fd_heat_solve,
                              profile, spectral_history, spectral_propagate, spectral_solve)

TWO_PI = 2 * math.pi


def _sine(M=64, k=1):
    return profile("sine", TWO_PI, M, k=k)


class TestField:
    @pytest.mark.parametrize("M", [3, 5, 2])
    def test_even_size(self, M):
        with pytest.raises(ValueError):
            ContinuumField(1.0, np.zeros(M))

    def test_grid(self):
        f = ContinuumField(2.0, np.zeros(8), x0=-1)
        assert f.dx == 0.25 and f.x[0] == -1 and f.x[-1] == 0.75

    def test_unknown_profile(self):
        with pytest.raises(ValueError):
            profile("square", 1, 8)

    def test_rate_shape(self):
        with pytest.raises(ValueError):
            InitialData(_sine(), np.zeros(3))


class TestSpectral:
    @pytest.mark.parametrize("k", [1, 2, 5])
    def test_heat_mode_decay(self, k):
        sol = spectral_solve(LinearPDE.heat(1), InitialData(_sine(k=k)), 0.5)
        assert np.allclose(sol.values, np.exp(-k * k * 0.5) * np.sin(k * sol.x), atol=1e-14)

    def test_telegraph_mode(self):
        tau, D, k, t = 0.25, 1.0, 3, 0.7
        sol = spectral_solve(LinearPDE.telegraph(tau, D), InitialData(_sine(k=k), np.zeros(64)), t)
        # tau s^2 + s + D k^2 = 0 with u(0) = 1, u'(0) = 0
        s1, s2 = np.roots([tau, 1, D * k * k])
        amp = ((s2 * np.exp(s1 * t) - s1 * np.exp(s2 * t)) / (s2 - s1)).real
        assert np.allclose(sol.values, amp * np.sin(k * sol.x), atol=1e-13)

    def test_double_root(self):
        # critical damping 4 tau D k^2 = 1: u = (1 - s t) e^{s t} with s = -1/(2 tau)
        tau, k, t = 1.0, 0.5, 2.0
        u0 = profile("sine", 4 * math.pi, 32, k=k)
        sol = spectral_solve(LinearPDE.telegraph(tau, 1.0), InitialData(u0, np.zeros(32)), t)
        s = -1 / (2 * tau)
        assert np.allclose(sol.values, (1 - s * t) * math.exp(s * t) * np.sin(k * sol.x), atol=1e-14)

    def test_mean_conserved(self):
        u0 = profile("gaussian", 10.0, 128, width=0.5)
        for pde in (LinearPDE.heat(1), LinearPDE.telegraph(1, 1), LinearPDE.mixed(1, 1, 0.1)):
            sol = spectral_solve(pde, InitialData(u0), 3.0)
            assert np.mean(sol.values) == pytest.approx(np.mean(u0.values), abs=1e-14)

    @given(st.floats(0, 2), st.floats(0, 2))
    @settings(max_examples=25, deadline=None)
    def test_semigroup(self, a, b):
        pde = LinearPDE.telegraph(0.5, 1.0)
        init = InitialData(profile("gaussian", 10.0, 64, width=1.0))
        mid = spectral_propagate(pde, init, a)
        two = spectral_solve(pde, mid, b)
        one = spectral_solve(pde, init, a + b)
        assert np.max(np.abs(two.values - one.values)) < 1e-12

    def test_telegraph_tends_to_heat(self):
        init = InitialData(profile("gaussian", 10.0, 64, width=1.0))
        heat = spectral_solve(LinearPDE.heat(1), init, 1.0).values
        errs = [np.max(np.abs(spectral_solve(LinearPDE.telegraph(tau, 1), init, 1.0).values - heat))
                for tau in (1e-2, 1e-3, 1e-4)]
        assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-4

    def test_tiny_tau_no_overflow(self):
        init = InitialData(profile("gaussian", 10.0, 256, width=0.2))
        sol = spectral_solve(LinearPDE.telegraph(1e-12, 1), init, 1.0)
        assert np.all(np.isfinite(sol.values))

    def test_missing_rate(self):
        with pytest.raises(MissingInitialRate):
            spectral_solve(LinearPDE.telegraph(1, 1), InitialData(_sine()), 1.0, closure="none")

    def test_zero_closure(self):
        a = spectral_solve(LinearPDE.telegraph(1, 1), InitialData(_sine()), 1.0, closure="zero")
        b = spectral_solve(LinearPDE.telegraph(1, 1), InitialData(_sine(), np.zeros(64)), 1.0)
        assert np.array_equal(a.values, b.values)

    def test_compatibility_rate(self):
        rate = compatibility_initial_rate(LinearPDE.heat(2), _sine(k=3))
        assert np.allclose(rate.values, -18 * np.sin(3 * rate.x), atol=1e-12)

    def test_history(self):
        hist = spectral_history(LinearPDE.heat(1), InitialData(_sine()), [0, 1, 2])
        assert [h.t for h in hist] == [0, 1, 2]

    @pytest.mark.parametrize("bad", [dict(closure="x"), dict(policy="x")])
    def test_bad_options(self, bad):
        with pytest.raises(ValueError):
            spectral_solve(LinearPDE.heat(1), InitialData(_sine()), 1.0, **bad)

    def test_negative_time(self):
        with pytest.raises(ValueError):
            spectral_solve(LinearPDE.heat(1), InitialData(_sine()), -1.0)


class TestPolicies:
    pde = LinearPDE.fourth_order(1.0, 0.01)

    def test_reject(self):
        with pytest.raises(IllPosedGrowth, match="k\\* = 10"):
            spectral_solve(self.pde, InitialData(_sine(k=20)), 0.1, policy="reject")

    def test_reject_passes_band_limited(self):
        sol = spectral_solve(self.pde, InitialData(_sine(k=3)), 0.1, policy="reject")
        assert np.all(np.isfinite(sol.values))

    def test_cutoff(self):
        sol = spectral_solve(self.pde, InitialData(_sine(k=20)), 0.1, policy="cutoff")
        assert np.max(np.abs(sol.values)) < 1e-12

    def test_allow_grows(self):
        sol = spectral_solve(self.pde, InitialData(_sine(k=20)), 0.01, policy="allow")
        assert np.max(np.abs(sol.values)) > 10


class TestFiniteDifference:
    def test_matches_lattice_exactly(self):
        vals = [F(i % 5, 3) for i in range(12)]
        dx = F(1, 4)
        fd = fd_heat_solve(F(1), ContinuumField(3, np.array(vals, dtype=object)), dx, dx * dx / 3, 25)
        assert list(fd.values) == list(lat.evolve(lat.LatticeField(vals), lat.Stencil(), 25).values)
        assert fd.t == F(25, 48)

    def test_float_close_to_spectral(self):
        M = 64
        dx = TWO_PI / M
        dt = 0.25 * dx * dx
        steps = int(round(0.5 / dt))
        fd = fd_heat_solve(1.0, _sine(M), dx, dt, steps)
        exact = math.exp(-fd.t) * np.sin(fd.x)
        assert np.max(np.abs(fd.values - exact)) < 1e-3

    def test_unstable(self):
        with pytest.raises(StabilityViolation):
            fd_heat_solve(F(1), _sine(8), F(1, 4), F(1, 16), 1)

    def test_spacing_mismatch(self):
        with pytest.raises(ValueError):
            fd_heat_solve(1.0, _sine(8), 0.1, 0.001, 1)
