"""Pointer measurement model: kernels, POVMs, channels, factorisation identities."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from fieldprobe.ccr import AlgebraElement, Kinematics, QuasiFreeState, expectation
from fieldprobe.gauss1d import GaussianExp, GridFunction1D
from fieldprobe.pointer import (
    AnalyticProbe,
    GaussianProbe,
    MomentError,
    TabulatedProbe,
    canonical_probe_split,
    channel_on_element,
    channel_oracle_expectation,
    continuous_additivity_check,
    convolution_identity_check,
    dilation_probe_state,
    effect_width,
    hammerstein_check,
    kraus_kernel,
    outcome_distribution,
    overlap_identity,
    povm_density,
    sharpness,
    smatrix,
)
from fieldprobe.propagator import FieldModel, kinematic_matrices, retarded
from fieldprobe.testfn import ScaledFunction, gaussian, l1_normalized_gaussian

RNG = np.random.default_rng(5)
M0 = FieldModel(0.0, 1)
M1 = FieldModel(1.0, 1)
F = l1_normalized_gaussian(0.0, [0.0], 0.6, 0.4)
KIN2 = Kinematics.from_matrix(np.array([[0.0, 0.3], [-0.3, 0.0]]))


class TestSMatrix:
    def test_zero_function_is_identity(self):
        S = smatrix(ScaledFunction(F, 0.0), M0)
        assert S.R == 0.0
        assert np.all(S.phase_exponent([0.5, 1.0, 2.0]) == 0.0)

    def test_purely_spatial_coupling(self):
        thin = gaussian(0.0, [0.0], 1e-3 * 0.5, 0.5)
        ref = gaussian(0.0, [0.0], 0.5, 0.5)
        assert smatrix(thin, M0).R <= 1e-3 * smatrix(ref, M0).R

    def test_phase_exponent_cross_check(self):
        S = smatrix(F, M0)
        assert S.phase_exponent(1.0) == pytest.approx(-0.5 * retarded(M0, F, F).real, rel=1e-12)
        assert S.displacement_scale(1.0) == -1.0


class TestSharpness:
    def test_minimum_on_curve(self):
        R = 0.37
        assert sharpness(math.sqrt(R), R) == pytest.approx(math.sqrt(R), abs=1e-15)

    def test_r_zero(self):
        assert sharpness(0.8, 0.0) == pytest.approx(0.8 / math.sqrt(2.0), rel=1e-15)

    def test_divergence_for_sharp_probe(self):
        R = 0.2
        sigmas = np.geomspace(math.sqrt(R), 1e-4, 12)  # start at the minimiser
        vals = [sharpness(s, R) for s in sigmas]
        assert all(b > a for a, b in zip(vals, vals[1:]))
        assert vals[-1] > 1e3

    def test_negative_r_hard_error(self):
        with pytest.raises(ValueError):
            sharpness(1.0, -1e-3)
        with pytest.raises(ValueError):
            sharpness(0.0, 0.1)


class TestKrausKernel:
    def test_no_phase_returns_probe(self):
        probe = GaussianProbe(0.7, center=0.4)
        k = kraus_kernel(F, probe, M0, R_override=0.0)
        us = np.linspace(-3, 3, 11)
        assert np.max(np.abs(k.sample(us) - probe.psi_gauss()(us))) <= 1e-14

    def test_completeness(self):
        k = kraus_kernel(F, GaussianProbe(0.9), M0)
        assert k.l2_norm_squared() == pytest.approx(1.0, abs=1e-10)

    def test_width_matches_sharpness(self):
        sig = 0.8
        k = kraus_kernel(F, GaussianProbe(sig), M0)
        assert effect_width(k) == pytest.approx(sharpness(sig, k.R), abs=1e-9)

    def test_grid_path_matches_closed_form(self):
        sig = 0.8
        probe = GaussianProbe(sig)
        tab = TabulatedProbe(GridFunction1D.sample(probe.psi_gauss(), 0.0, 12.0, 2**15))
        k_closed = kraus_kernel(F, probe, M0)
        k_grid = kraus_kernel(F, tab, M0, n_grid=2**15)
        us = np.linspace(-4, 4, 41)
        assert np.max(np.abs(k_grid.sample(us) - k_closed.sample(us))) <= 1e-7

    def test_povm_density_gaussian(self):
        sig = 0.6
        k = kraus_kernel(F, GaussianProbe(sig), M0)
        dens = povm_density(k)
        st = sharpness(sig, k.R)
        us = np.linspace(-3, 3, 21)
        expected = np.exp(-(us**2) / (2 * st * st)) / (math.sqrt(2 * math.pi) * st)
        assert np.max(np.abs(dens(us) - expected)) <= 1e-12
        assert dens.total_mass() == pytest.approx(1.0, abs=1e-9)

    def test_povm_nonnegative_unit_mass_grid(self):
        probe = TabulatedProbe(GridFunction1D.sample(GaussianExp.wavepacket(0.7, 0.2), 0.0, 12.0, 2**13))
        k = kraus_kernel(F, probe, M0)
        dens = povm_density(k)
        us = np.linspace(-5, 5, 101)
        assert np.all(dens(us) >= 0)
        assert dens.total_mass() == pytest.approx(1.0, abs=1e-9)


class TestOutcomeDistribution:
    def test_vacuum_closed_form_and_quadrature_oracle(self):
        f = gaussian(0.0, [0.0], 0.5, 0.5)
        K = kinematic_matrices(M1, [f])
        sig = 1.0
        k = kraus_kernel(f, GaussianProbe(sig), M1)
        vac = QuasiFreeState.vacuum(K)
        dist = outcome_distribution(k, vac, K)
        var_expected = sharpness(sig, k.R) ** 2 + K.Wsym[0, 0]
        assert dist.total_mass() == pytest.approx(1.0, abs=1e-9)
        assert dist.variance() == pytest.approx(var_expected, rel=1e-10)
        # direct convolution quadrature at sample outcomes
        prof = povm_density(k)
        wff = K.Wsym[0, 0]
        for q in (0.0, 0.7, -1.3):
            oracle = quad(
                lambda u: prof(q - u) * np.exp(-(u**2) / (2 * wff)) / math.sqrt(2 * math.pi * wff),
                -12,
                12,
                epsabs=1e-12,
            )[0]
            assert dist(q) == pytest.approx(oracle, abs=1e-8)

    def test_translation_covariance(self):
        f = gaussian(0.0, [0.0], 0.5, 0.5)
        K = kinematic_matrices(M1, [f])
        k = kraus_kernel(f, GaussianProbe(1.0), M1)
        shifted = QuasiFreeState.coherent(K, [0.9])
        dist0 = outcome_distribution(k, QuasiFreeState.vacuum(K), K)
        dist1 = outcome_distribution(k, shifted, K)
        assert dist1.mean() == pytest.approx(dist0.mean() + 0.9, abs=1e-10)
        assert dist1.variance() == pytest.approx(dist0.variance(), rel=1e-10)

    def test_wide_probe_dominates(self):
        f = gaussian(0.0, [0.0], 0.5, 0.5)
        K = kinematic_matrices(M1, [f])
        k = kraus_kernel(f, GaussianProbe(30.0), M1)
        dist = outcome_distribution(k, QuasiFreeState.vacuum(K), K)
        st2 = sharpness(30.0, k.R) ** 2
        assert dist.variance() == pytest.approx(st2, rel=2e-3)

    def test_outside_span_rejected(self):
        f = gaussian(0.0, [0.0], 0.5, 0.5)
        other = gaussian(3.0, [0.0], 0.5, 0.5)
        K = kinematic_matrices(M1, [f])
        k = kraus_kernel(other, GaussianProbe(1.0), M1)
        with pytest.raises(ValueError):
            outcome_distribution(k, QuasiFreeState.vacuum(K), K)


class TestChannel:
    def test_unitality_exact(self):
        X = AlgebraElement.identity(KIN2)
        out = channel_on_element([1.0, 0.0], GaussianProbe(0.9), X)
        assert (out - X).coeff_norm() <= 1e-14

    def test_linear_observable_even_probe_invariant(self):
        X = AlgebraElement.generator(KIN2, 1)
        out = channel_on_element([1.0, 0.0], GaussianProbe(0.9), X)
        assert out.equals(X, tol=1e-13)

    def test_weyl_dephasing_factor(self):
        X = AlgebraElement.weyl(KIN2, (0.0, 1.0))
        probe = GaussianProbe(0.9)
        out = channel_on_element([1.0, 0.0], probe, X)
        (key, coeff), = out.terms.items()
        # factor F_psi(-Delta(f, g)); Delta(f, g) = D[0, 1] = 0.3
        assert coeff == pytest.approx(probe.char_function(-0.3), abs=1e-14)
        assert abs(coeff) <= 1.0

    def test_transparency_when_commuting(self):
        kin = Kinematics.from_matrix(np.zeros((2, 2)))
        X = AlgebraElement.weyl(kin, (0.0, 1.0))
        out = channel_on_element([1.0, 0.0], GaussianProbe(0.7), X)
        (key, coeff), = out.terms.items()
        assert coeff == pytest.approx(1.0, abs=1e-12)

    def test_boosted_probe_shifts_linear_observable(self):
        probe = GaussianProbe(0.9, momentum=0.8)
        X = AlgebraElement.generator(KIN2, 1)
        out = channel_on_element([1.0, 0.0], probe, X)
        # phi_g -> phi_g + <p> w_g with w = Delta @ e_f
        shift = (out - X).identity_coefficient()
        assert shift == pytest.approx(0.8 * (-0.3), abs=1e-12)

    def test_grid_oracle_weyl(self):
        W = np.array([[0.5, 0.1], [0.1, 0.4]])
        st = QuasiFreeState.make([0.0, 0.0], W)
        probe = GaussianProbe(0.9)
        X = AlgebraElement.weyl(KIN2, (0.0, 1.0))
        direct = expectation(st, channel_on_element([1, 0], probe, X))
        orc = channel_oracle_expectation([1, 0], probe, X, st, R=0.17, window=30.0, n_nodes=301)
        assert abs(direct - orc) <= 1e-6

    def test_grid_oracle_polynomial(self):
        W = np.array([[0.5, 0.1], [0.1, 0.4]])
        st = QuasiFreeState.make([0.0, 0.0], W)
        probe = GaussianProbe(0.9)
        X = AlgebraElement.generator(KIN2, 1) * AlgebraElement.generator(KIN2, 1)
        direct = expectation(st, channel_on_element([1, 0], probe, X))
        orc = channel_oracle_expectation([1, 0], probe, X, st, R=0.0, window=30.0, n_nodes=301)
        assert abs(direct - orc) <= 1e-6

    def test_tabulated_moment_error_reports_order(self):
        # sech probe: |psitilde|^2 ~ exp(-pi |p|); a coarse grid resolves the
        # L2 mass but not the high momentum moments
        n = 256
        du = np.pi / 6.6
        u0 = -0.5 * n * du
        q = u0 + du * np.arange(n)
        probe = TabulatedProbe(GridFunction1D(u0, du, 1.0 / np.cosh(q)))
        assert probe.momentum_moment(0) == pytest.approx(1.0, abs=1e-6)
        with pytest.raises(MomentError) as err:
            probe.momentum_moment(6)
        assert err.value.order == 6


class TestContinuousAdditivity:
    def test_generic_cut(self):
        rep = continuous_additivity_check(F, 0.1, M0)
        assert rep.passed and rep.residual <= 1e-8

    def test_cut_outside_support(self):
        rep = continuous_additivity_check(F, -80.0, M0)
        assert rep.residual <= 1e-12

    def test_fault_injection_detected(self):
        rep = continuous_additivity_check(F, 0.1, M0, drop_cross_term=True)
        assert not rep.passed
        assert rep.details["coeff_residual"] == pytest.approx(rep.details["cross"], rel=1e-10)


class TestHammerstein:
    def test_overlap_geometry(self):
        f1 = gaussian(2.0, [0.0], 0.3, 0.3)
        f2 = gaussian(1.0, [0.2], 0.5, 0.5)
        f3 = gaussian(0.0, [0.0], 0.3, 0.3)
        rep = hammerstein_check(f1, f2, f3, M0)
        assert rep.passed and rep.residual <= 1e-6

    def test_weakest_reduction(self):
        f1 = gaussian(2.0, [0.0], 0.3, 0.3)
        f3 = gaussian(0.0, [0.0], 0.3, 0.3)
        rep = hammerstein_check(f1, None, f3, M0)
        assert rep.passed

    def test_pure_unitarity_case(self):
        f2 = gaussian(0.5, [0.0], 0.4, 0.4)
        zero = ScaledFunction(f2, 0.0)
        rep = hammerstein_check(zero, f2, zero, M0)
        assert rep.residual <= 1e-12

    def test_wrong_time_order_detected(self):
        f1 = gaussian(0.0, [0.0], 0.3, 0.3)
        f3 = gaussian(2.0, [0.0], 0.3, 0.3)
        rep = hammerstein_check(f1, None, f3, M0)
        assert not rep.passed
        assert rep.details["coeff_residual"] == pytest.approx(rep.details["expected_obstruction"], rel=1e-8)


class TestConvolutionIdentity:
    def test_three_cuts(self):
        probe = GaussianProbe(0.8)
        psi_p, psi_m = canonical_probe_split(probe)
        for tc in (-0.3, 0.05, 0.4):
            rep = convolution_identity_check(F, tc, psi_p, psi_m, M0)
            assert rep.passed and rep.residual <= 1e-6

    def test_degenerate_split_below_support(self):
        probe = GaussianProbe(0.8)
        psi_p, psi_m = canonical_probe_split(probe)
        rep = convolution_identity_check(F, -50.0, psi_p, psi_m, M0)
        assert rep.residual <= 1e-8

    def test_fault_injection_detected(self):
        probe = GaussianProbe(0.8)
        psi_p, psi_m = canonical_probe_split(probe)
        rep = convolution_identity_check(F, 0.05, psi_p, psi_m, M0, drop_cross_term=True)
        assert not rep.passed

    def test_square_root_split_normalisation(self):
        # psi_+ * psi_- convolves back to psi (the 2 pi bookkeeping)
        probe = GaussianProbe(0.8, center=0.3)
        psi_p, psi_m = canonical_probe_split(probe)
        lhs = psi_p.psi_gauss().convolve(psi_m.psi_gauss())
        us = np.linspace(-3, 3, 13)
        assert np.max(np.abs(lhs(us) - probe.psi_gauss()(us))) <= 1e-12


class TestOverlapIdentity:
    def test_trace_preservation_at_equal_shift(self):
        k = kraus_kernel(F, GaussianProbe(0.8), M0)
        scalar, opres, Fval = overlap_identity([1.0], k, 0.5, 0.5)
        assert scalar == pytest.approx(1.0, abs=1e-10)
        assert Fval == pytest.approx(1.0, abs=1e-12)

    def test_gaussian_characteristic_function(self):
        k = kraus_kernel(F, GaussianProbe(0.8), M0)
        for tau in np.linspace(-2, 2, 9):
            scalar, _, Fval = overlap_identity([1.0], k, tau, 0.0)
            assert scalar == pytest.approx(Fval, abs=1e-10)

    def test_operator_residual_in_canonical_form(self):
        k = kraus_kernel(F, GaussianProbe(0.8), M0)
        scalar, opres, Fval = overlap_identity([1.0, 0.0], k, 0.7, 0.1, kin=KIN2)
        assert opres <= 1e-10

    def test_tabulated_kernel_autocorrelation(self):
        probe = TabulatedProbe(GridFunction1D.sample(GaussianExp.wavepacket(0.8), 0.0, 12.0, 2**13))
        k = kraus_kernel(F, probe, M0)
        scalar, _, Fval = overlap_identity([1.0], k, 0.6, 0.0)
        assert scalar == pytest.approx(Fval, abs=1e-6)


class TestDilation:
    def test_gaussian_no_phase(self):
        kappa = GaussianExp.wavepacket(0.5)
        psi = dilation_probe_state(kappa, F, M0, R_override=0.0)
        us = np.linspace(-2, 2, 9)
        assert np.max(np.abs(psi.psi_gauss()(us) - kappa(us))) <= 1e-13

    def test_gaussian_round_trip(self):
        kappa = GaussianExp.wavepacket(0.5, 0.3)
        psi = dilation_probe_state(kappa, F, M0)
        k = kraus_kernel(F, psi, M0)
        us = np.linspace(-3, 3, 21)
        assert np.max(np.abs(k.sample(us) - kappa(us))) <= 1e-7

    def test_compact_support_round_trip(self):
        n = 2**13
        u = -6.0 + 12.0 / n * np.arange(n)
        vals = np.where(np.abs(u) < 1.0, np.exp(-1.0 / np.clip(1 - u * u, 1e-12, None)), 0.0)
        kappa = GridFunction1D(-6.0, 12.0 / n, vals.astype(complex)).normalized()
        psi = dilation_probe_state(kappa, F, M0)
        k = kraus_kernel(F, psi, M0)
        recovered = np.asarray([k.kernel(x) for x in u[:: n // 256]])
        target = kappa.values[:: n // 256]
        assert np.max(np.abs(recovered - target)) <= 1e-6

    def test_unnormalised_kappa_rejected(self):
        kappa = GaussianExp.wavepacket(0.5) * 2.0
        with pytest.raises(ValueError):
            dilation_probe_state(kappa, F, M0, R_override=0.1)
