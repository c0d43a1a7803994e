"""Smeared propagator forms: convention lock, closed-form oracles, backends.

Frozen oracles (verified against brute-force double quadrature before
freezing):

* massless 1+1 diagonal: Delta_R(f, f) = arctan(sigma_T/sigma_S)/(2 pi) (int f)^2
* massless 3+1 diagonal: Delta_R(f, f) = sigma_T / (8 pi^2 sigma_S (sigma_S^2 + sigma_T^2)) (int f)^2
* narrow timelike massless pair (unit integrals, f later): Delta(f, g) = +1/2
"""

import numpy as np
import pytest

from fieldprobe.propagator import (
    FieldModel,
    QuadratureSpec,
    advanced,
    crossvalidate,
    kinematic_matrices,
    pauli_jordan,
    retarded,
    retarded_scaling_scan,
    wightman,
    wightman_sym,
)
from fieldprobe.testfn import bump, gaussian, l1_normalized_gaussian

RNG = np.random.default_rng(11)
M0 = FieldModel(0.0, 1)
M1 = FieldModel(1.0, 1)
M03 = FieldModel(0.0, 3)
M13 = FieldModel(1.0, 3)


def random_gaussian(rng, dim=1, tspread=1.5):
    return gaussian(
        rng.uniform(-tspread, tspread),
        rng.uniform(-1.5, 1.5, size=dim),
        rng.uniform(0.25, 0.8),
        rng.uniform(0.25, 0.8),
        rng.uniform(0.5, 1.5),
    )


class TestClosedFormOracles:
    def test_massless_1d_diagonal(self):
        for st, ss in [(0.7, 0.3), (0.4, 1.1), (1.0, 1.0)]:
            f = l1_normalized_gaussian(0.2, [0.4], st, ss)
            r = retarded(M0, f, f)
            assert r.real == pytest.approx(np.arctan(st / ss) / (2 * np.pi), rel=1e-9)

    def test_massless_3d_diagonal(self):
        for st, ss in [(0.7, 0.3), (0.2, 2.0)]:
            f = l1_normalized_gaussian(-0.1, [0.0, 0.3, 0.0], st, ss)
            r = retarded(M03, f, f)
            assert r.real == pytest.approx(st / (8 * np.pi**2 * ss * (ss**2 + st**2)), rel=1e-9)

    def test_narrow_timelike_pair_magnitude_half(self):
        f = l1_normalized_gaussian(2.0, [0.0], 0.05, 0.05)
        g = l1_normalized_gaussian(0.0, [0.0], 0.05, 0.05)
        d = pauli_jordan(M0, f, g)
        assert abs(d.real) == pytest.approx(0.5, rel=0.01)
        # sign record: with the first argument later, Delta(f, g) = +1/2
        assert d.real > 0


class TestPauliJordan:
    def test_antisymmetry_diagonal_exact(self):
        f = gaussian(0.3, [0.1], 0.5, 0.5)
        assert pauli_jordan(M1, f, f).value == 0.0

    def test_antisymmetry_random_pairs(self):
        spec = QuadratureSpec(rel_tol=1e-7, abs_tol=1e-11)
        worst = 0.0
        for _ in range(100):
            f, g = random_gaussian(RNG), random_gaussian(RNG)
            a = pauli_jordan(M1, f, g, spec)
            b = pauli_jordan(M1, g, f, spec)
            tol = 2 * (a.error_estimate + b.error_estimate) + 1e-12
            worst = max(worst, abs(a.real + b.real) - tol)
        assert worst <= 0.0

    def test_microcausality_spacelike_bumps(self):
        f = bump(0.4, [0.0], 0.5, 0.5)
        g = bump(-0.3, [4.0], 0.5, 0.5)
        ref = bump(-0.3, [1.7], 0.5, 0.5)  # lightlike touching scale
        d = pauli_jordan(M0, f, g)
        dref = pauli_jordan(M0, f, ref)
        assert abs(d.real) <= 1e-10 * abs(dref.real) + 1e-13

    def test_bilinearity(self):
        f1, f2, g = (random_gaussian(RNG) for _ in range(3))
        a, b = 1.7, -0.6
        lhs = pauli_jordan(M1, a * f1 + b * f2, g)
        rhs = a * pauli_jordan(M1, f1, g).real + b * pauli_jordan(M1, f2, g).real
        assert lhs.real == pytest.approx(rhs, abs=5e-11)

    def test_backend_agreement(self):
        f, g = random_gaussian(RNG), random_gaussian(RNG)
        pos = pauli_jordan(M1, f, g, QuadratureSpec(backend="position"))
        mom = pauli_jordan(M1, f, g, QuadratureSpec(backend="momentum"))
        assert pos.real == pytest.approx(mom.real, abs=1e-10)


class TestRetarded:
    def test_cut_pair_vanishes(self):
        # no propagation from the future part into the past part
        f = gaussian(0.0, [0.0], 0.6, 0.6)
        fut, past = f.cut(0.1)
        assert retarded(M0, fut, past).real == pytest.approx(0.0, abs=1e-12)
        assert retarded(M1, fut, past).real == pytest.approx(0.0, abs=1e-12)
        # the advanced form is the transpose: Delta_A(f-, f+) = Delta_R(f+, f-) = 0
        assert advanced(M1, past, fut).real == pytest.approx(0.0, abs=1e-12)

    def test_cut_additivity_identity(self):
        f = gaussian(0.0, [0.0], 0.6, 0.6)
        for tc in (-0.4, 0.0, 0.35):
            fut, past = f.cut(tc)
            lhs = retarded(M0, f, f).real
            rhs = (
                retarded(M0, fut, fut).real
                + retarded(M0, past, past).real
                + retarded(M0, past, fut).real
            )
            assert lhs == pytest.approx(rhs, rel=1e-8)

    def test_purely_spatial_limit(self):
        ss = 0.6
        ref = retarded(M0, *(2 * [gaussian(0.0, [0.0], ss, ss)])).real
        thin = retarded(M0, *(2 * [gaussian(0.0, [0.0], 1e-3 * ss, ss)])).real
        assert abs(thin) <= 1e-3 * abs(ref)

    def test_nonnegativity_random(self):
        for _ in range(20):
            f = random_gaussian(RNG)
            model = RNG.choice([M0, M1])
            assert retarded(model, f, f).real >= -1e-10

    def test_causal_support_direction(self):
        # g entirely in the past of f: no propagation from f to g (exact for bumps)
        f = bump(2.0, [0.0], 0.6, 0.6)
        g = bump(0.0, [0.0], 0.6, 0.6)
        assert retarded(M0, f, g).real == pytest.approx(0.0, abs=1e-13)
        assert retarded(M0, g, f).real > 1e-4
        # gaussian version vanishes only up to the tail mass
        fg = gaussian(2.0, [0.0], 0.3, 0.3)
        gg = gaussian(0.0, [0.0], 0.3, 0.3)
        assert abs(retarded(M0, fg, gg).real) <= 1e-4 * retarded(M0, gg, fg).real

    def test_momentum_backend_matches_position(self):
        f = gaussian(1.4, [0.3], 0.4, 0.25)
        g = gaussian(0.0, [0.0], 0.3, 0.35)
        for a, b in [(f, g), (g, f), (f, f)]:
            pos = retarded(M1, a, b)
            mom = retarded(M1, a, b, QuadratureSpec(backend="momentum"))
            assert pos.real == pytest.approx(mom.real, abs=5e-9)


class TestWightman:
    def test_positive_diagonal(self):
        f = gaussian(0.0, [0.2], 0.5, 0.5)
        w = wightman(M1, f, f)
        assert abs(np.imag(w.value)) < 1e-12
        assert np.real(w.value) > 0

    def test_hermiticity(self):
        f, g = random_gaussian(RNG), random_gaussian(RNG)
        a = wightman(M1, f, g).value
        b = wightman(M1, g, f).value
        assert a == pytest.approx(np.conj(b), abs=1e-11)

    def test_imaginary_part_is_half_commutator(self):
        # cross-backend: the convention gives Im W(f, g) = -Delta(f, g)/2
        f, g = random_gaussian(RNG), random_gaussian(RNG)
        w = wightman(M1, f, g)
        d = pauli_jordan(M1, f, g, QuadratureSpec(backend="position"))
        assert abs(np.imag(w.value)) == pytest.approx(0.5 * abs(d.real), abs=1e-10)
        assert np.imag(w.value) == pytest.approx(-0.5 * d.real, abs=1e-10)

    def test_massless_2d_infrared_divergence_flagged(self):
        f = gaussian(0.0, [0.0], 0.5, 0.5)
        w = wightman(M0, f, f)
        assert w.failed


class TestKinematicData:
    def test_single_generator(self):
        f = gaussian(0.0, [0.0], 0.5, 0.5)
        K = kinematic_matrices(M1, [f])
        assert K.Delta.shape == (1, 1) and K.Delta[0, 0] == 0.0
        assert K.R[0, 0] == pytest.approx(retarded(M1, f, f).real, rel=1e-12)
        assert K.Wsym[0, 0] == pytest.approx(wightman_sym(M1, f, f).real, rel=1e-10)

    def test_sorkin_triple_spacelike_entry(self):
        h = bump(0.0, [-2.5], 0.4, 0.4)
        f = bump(1.2, [0.0], 0.4, 1.5)
        g = bump(2.4, [2.5], 0.4, 0.4)
        K = kinematic_matrices(M1, [h, f, g])
        assert abs(K.Delta[0, 2]) <= 1e-12

    def test_convention_lock_internal_consistency(self):
        gens = [random_gaussian(RNG) for _ in range(3)]
        K = kinematic_matrices(M1, gens)
        assert K.convention_residual() <= 1e-8

    def test_state_positivity(self):
        gens = [random_gaussian(RNG) for _ in range(3)]
        K = kinematic_matrices(M1, gens)
        assert K.state_positivity_min_eig() >= -1e-9

    def test_empty_generator_list(self):
        with pytest.raises(ValueError):
            kinematic_matrices(M1, [])


class TestCrossValidation:
    @pytest.mark.parametrize(
        "model,f,g",
        [
            (M0, gaussian(2.0, [0.1], 0.3, 0.3), gaussian(0.0, [0.0], 0.3, 0.3)),
            (M13, gaussian(2.0, [2.0, 0, 0], 0.2, 0.2), gaussian(0.0, [0.0, 0, 0], 0.2, 0.2)),
        ],
    )
    def test_mutual_oracle(self, model, f, g):
        cv = crossvalidate(model, f, g)
        assert cv.passed

    def test_spacelike_both_near_zero(self):
        f = gaussian(0.0, [0.0], 0.2, 0.2)
        g = gaussian(0.0, [8.0], 0.2, 0.2)
        cv = crossvalidate(M0, f, g)
        assert cv.passed
        assert abs(cv.position.real) < 1e-10 and abs(cv.momentum.real) < 1e-10


class TestScalingScan:
    def test_massless_ratio_constant(self):
        rows = retarded_scaling_scan(M03, np.geomspace(0.3, 3.0, 6), [0.7])
        vals = [r[4] * r[0] * (r[0] ** 2 + r[1] ** 2) / r[1] for r in rows]
        spread = (max(vals) - min(vals)) / abs(np.mean(vals))
        assert spread <= 0.10

    def test_monotone_at_fixed_scale(self):
        vals = []
        for ratio in np.linspace(1.5, 6.0, 5):
            st = np.sqrt(1.0 / (1 + ratio**2))
            f = l1_normalized_gaussian(0, [0, 0, 0], st, ratio * st)
            vals.append(retarded(M03, f, f).real)
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_row_order_and_flags(self):
        rows = retarded_scaling_scan(M0, [0.4, 0.8], [0.5, 1.0])
        assert [(r[0], r[1]) for r in rows] == [(0.4, 0.5), (0.4, 1.0), (0.8, 0.5), (0.8, 1.0)]
        assert all(r[6] for r in rows)
