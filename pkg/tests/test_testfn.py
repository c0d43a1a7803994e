"""Test functions: evaluation, transforms, causal cuts, support geometry.

Oracles: direct scipy quadrature for transforms, pointwise resummation for
cuts, box algebra for causal classification.
"""

import numpy as np
import pytest
from scipy.integrate import dblquad, quad

from fieldprobe.testfn import (
    SpacetimePoint,
    SupportBox,
    bump,
    causal_relation,
    gaussian,
    l1_normalized_gaussian,
)

RNG = np.random.default_rng(42)


class TestEvaluate:
    def test_gaussian_peak_is_amplitude(self):
        f = gaussian(0.0, [0.0], 1.0, 1.0, amplitude=1.0)
        assert f(0.0, [0.0]) == 1.0
        g = gaussian(0.5, [2.0, 0.0, -1.0], 0.3, 0.7, amplitude=-2.5)
        assert g(0.5, [2.0, 0.0, -1.0]) == pytest.approx(-2.5, abs=0)

    def test_bump_compact_support_exact(self):
        b = bump(0.0, [0.0], 1.0, 1.0)
        assert b(0.0, [0.0]) == 1.0
        for t, x in [(1.5, 0.0), (-1.0001, 0.0), (0.0, 1.0), (0.3, 2.0)]:
            assert b(t, [x]) == 0.0

    def test_sum_linearity_exact(self):
        f = gaussian(0.0, [0.0], 1.0, 1.0)
        z = f + (-1.0) * f
        for t, x in RNG.normal(size=(20, 2)):
            assert z(t, [x]) == 0.0

    def test_dimension_mismatch(self):
        f = gaussian(0.0, [0.0], 1.0, 1.0)
        with pytest.raises(ValueError):
            f.evaluate(SpacetimePoint(0.0, (0.0, 0.0, 0.0)))

    def test_invalid_widths(self):
        with pytest.raises(ValueError):
            gaussian(0.0, [0.0], -1.0, 1.0)
        with pytest.raises(ValueError):
            bump(0.0, [0.0], 1.0, 0.0)


class TestFourier:
    def test_zero_frequency_is_integral(self):
        f = gaussian(0.0, [0.0], 0.8, 1.3)
        val = f.fourier(0.0, [0.0])
        assert val.imag == pytest.approx(0.0, abs=1e-14)
        assert val.real == pytest.approx(f.integral(), rel=1e-12)

    def test_shift_theorem(self):
        f = gaussian(0.0, [0.0], 0.8, 0.6)
        tau = 0.9
        g = f.translated(tau, [0.0])
        for k0, k in [(0.7, 0.2), (1.9, -1.1)]:
            ratio = g.fourier(k0, [k]) / f.fourier(k0, [k])
            assert ratio == pytest.approx(np.exp(1j * k0 * tau), abs=1e-12)

    def test_spatial_shift_phase(self):
        f = bump(0.0, [0.0], 0.7, 0.7)
        g = f.translated(0.0, [0.5])
        k0, k = 0.4, 1.2
        ratio = g.fourier(k0, [k]) / f.fourier(k0, [k])
        assert ratio == pytest.approx(np.exp(-1j * k * 0.5), abs=1e-10)

    def test_bump_fourier_against_direct_quadrature(self):
        b = bump(0.1, [0.2], 0.9, 0.8)
        k0, k = 1.2, -0.7
        re = dblquad(lambda x, t: b(t, [x]) * np.cos(k0 * t - k * x), -0.9, 1.1, -0.6, 1.0, epsabs=1e-12)[0]
        im = dblquad(lambda x, t: b(t, [x]) * np.sin(k0 * t - k * x), -0.9, 1.1, -0.6, 1.0, epsabs=1e-12)[0]
        assert b.fourier(k0, [k]) == pytest.approx(re + 1j * im, abs=5e-10)

    def test_fourier_linearity(self):
        f = gaussian(0.0, [0.0], 0.5, 0.5)
        b = bump(0.3, [0.1], 0.6, 0.6)
        s = f + 2.0 * b
        k0, k = 0.8, 0.3
        assert s.fourier(k0, [k]) == pytest.approx(f.fourier(k0, [k]) + 2.0 * b.fourier(k0, [k]), rel=1e-12)

    def test_cut_gaussian_fourier_closed_form_vs_quadrature(self):
        f = gaussian(0.0, [0.0], 0.7, 0.7)
        fut, _ = f.cut(0.2)
        tp = fut.atoms()[0].tprof
        k0 = 1.1
        re = quad(lambda t: tp.value(t) * np.cos(k0 * t), 0.2, 8.0, epsabs=1e-13)[0]
        im = quad(lambda t: tp.value(t) * np.sin(k0 * t), 0.2, 8.0, epsabs=1e-13)[0]
        assert tp.fourier(k0) == pytest.approx(re + 1j * im, abs=1e-11)


class TestCut:
    def test_cut_misses_support(self):
        f = gaussian(0.0, [0.0], 0.5, 0.5)
        fut, past = f.cut(-50.0)
        pts = RNG.normal(size=(50, 2))
        assert all(fut(t, [x]) == f(t, [x]) for t, x in pts)
        assert all(past(t, [x]) == 0.0 for t, x in pts)
        assert past.l1() == 0.0

    def test_sharp_characteristic_split(self):
        f = gaussian(0.0, [0.0], 1.0, 1.0)
        fut, past = f.cut(0.3)
        assert fut(0.0, [0.1]) == 0.0
        assert past(0.0, [0.1]) == f(0.0, [0.1])
        assert fut(0.5, [0.1]) == f(0.5, [0.1])
        assert past(0.5, [0.1]) == 0.0

    def test_resum_pointwise_oracle(self):
        f = gaussian(0.1, [0.4], 0.8, 1.1) + 0.5 * bump(-0.2, [0.0], 0.9, 0.9)
        fut, past = f.cut(0.15)
        pts = RNG.normal(scale=1.2, size=(10_000, 2))
        worst = max(abs(fut(t, [x]) + past(t, [x]) - f(t, [x])) for t, x in pts)
        assert worst <= 1e-12

    def test_smoothed_resum_and_support(self):
        f = gaussian(0.0, [0.0], 0.8, 0.8)
        w = 0.25
        fut, past = f.cut(0.1, w)
        pts = RNG.normal(size=(500, 2))
        worst = max(abs(fut(t, [x]) + past(t, [x]) - f(t, [x])) for t, x in pts)
        assert worst <= 1e-14
        assert fut(0.1 - w - 1e-9, [0.0]) == 0.0
        assert past(0.1 + w + 1e-9, [0.0]) == 0.0

    def test_disjoint_open_supports(self):
        f = gaussian(0.0, [0.0], 1.0, 1.0)
        fut, past = f.cut(0.2)
        ts = np.concatenate([RNG.normal(size=200), [0.2]])
        for t in ts:
            prod = fut(t, [0.0]) * past(t, [0.0])
            assert prod == 0.0

    def test_negative_width_rejected(self):
        with pytest.raises(ValueError):
            gaussian(0.0, [0.0], 1.0, 1.0).cut(0.0, -0.1)


class TestCausalRelation:
    def test_wide_spatial_separation(self):
        a = gaussian(0.0, [0.0], 1.0, 1.0).support()
        b = gaussian(0.0, [10.0 + 32.0], 1.0, 1.0).support()
        assert causal_relation(a, b) == "spacelike"
        assert causal_relation(b, a) == "spacelike"

    def test_timelike_stacking(self):
        a = bump(0.0, [0.0], 0.5, 0.5).support()
        b = bump(5.0, [0.0], 0.5, 0.5).support()
        assert causal_relation(a, b) == "a_precedes_b"
        assert causal_relation(b, a) == "b_precedes_a"

    def test_sorkin_triple(self):
        # A lower-left, B central band, C upper-right; A & C spacelike
        A = bump(0.0, [-2.5], 0.4, 0.4).support()
        B = bump(1.5, [0.0], 0.4, 2.2).support()
        C = bump(3.0, [2.5], 0.4, 0.4).support()
        assert causal_relation(A, B) == "a_precedes_b"
        assert causal_relation(B, C) == "a_precedes_b"
        assert causal_relation(A, C) == "spacelike"

    def test_overlap_verdict(self):
        a = bump(0.0, [0.0], 1.0, 1.0).support()
        b = bump(0.5, [0.5], 1.0, 1.0).support()
        assert causal_relation(a, b) == "overlap"

    def test_dimension_mismatch(self):
        a = bump(0.0, [0.0], 1.0, 1.0).support()
        b = bump(0.0, [0.0, 0.0, 0.0], 1.0, 1.0).support()
        with pytest.raises(ValueError):
            causal_relation(a, b)


class TestSupportBox:
    def test_gaussian_tail_bound(self):
        f = gaussian(0.0, [0.0], 1.0, 1.0)
        box = f.support(n_sigma=8.0)
        assert box.tmin == -8.0 and box.tmax == 8.0
        assert 0.0 < box.eps_tail < 1e-13

    def test_bump_box_exact(self):
        b = bump(1.0, [2.0], 0.5, 0.7)
        box = b.support()
        assert (box.tmin, box.tmax) == (0.5, 1.5)
        assert box.xmin == (1.3,) and box.xmax == (2.7,)
        assert box.eps_tail == 0.0

    def test_outside_box_is_tail_small(self):
        f = gaussian(0.0, [0.0], 1.0, 1.0)
        box = f.support()
        assert abs(f(box.tmax + 0.5, [0.0])) < 1e-15

    def test_cut_box_respects_halfspace(self):
        f = gaussian(0.0, [0.0], 1.0, 1.0)
        fut, past = f.cut(0.25)
        assert past.support().tmax == 0.25
        assert fut.support().tmin == 0.25
