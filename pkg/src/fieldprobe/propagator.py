"""Smeared bilinear forms of the free scalar field in 1+1 and 3+1 Minkowski.

Two cross-validating backends evaluate the commutator (Pauli-Jordan) form
Delta(f, g), the retarded form Delta_R(f, g), and the Wightman two-point
function W(f, g):

* position backend: the double spacetime integral is reduced to cone
  integrals over cross-correlations of the separable profiles, with the
  lightcone delta integrated out analytically in 3+1 and Bessel kernels
  (J0 in 1+1, a J1 tail in 3+1) inside the cone for m > 0;
* momentum backend: on-shell mode integrals for W, and a principal-value
  integral over off-shell frequencies for the time-symmetric part of
  Delta_R.

Convention (locked by the invariant suite and used everywhere):

    Delta_R(f, g) = iint f(x) G_ret(y - x) g(y) dx dy,

i.e. Delta_R(f, g) is nonzero only when supp g meets the causal *future* of
supp f ("propagation from f to g"); the advanced form is the transpose
Delta_A(f, g) = Delta_R(g, f); and

    Delta = Delta_A - Delta_R,   so   Delta(f, g) = Delta_R(g, f) - Delta_R(f, g).

Under this convention Delta(f, g) = -2 Im W(f, g), Delta_R(f_+, f_-) = 0 for
any future/past split, and Delta_R(f, f) >= 0 for real f.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.special import j0, j1


def _quad(*args, **kwargs):
    """scipy quad with the (spurious, piecewise-split) IntegrationWarning muted.

    Accuracy bookkeeping stays in the returned error estimates.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return quad(*args, **kwargs)

from .testfn import Atom, TestFunction, causal_relation

__all__ = [
    "FieldModel",
    "QuadratureSpec",
    "BilinearResult",
    "KinematicData",
    "pauli_jordan",
    "retarded",
    "advanced",
    "wightman",
    "wightman_sym",
    "kinematic_matrices",
    "retarded_scaling_scan",
    "fit_loglog_slope",
    "crossvalidate",
    "CrossValidation",
]


@dataclass(frozen=True)
class FieldModel:
    """Free real scalar field of mass m in d spatial dimensions (c = hbar = 1)."""

    mass: float = 0.0
    dim: int = 1

    def __post_init__(self):
        if self.mass < 0 or not math.isfinite(self.mass):
            raise ValueError("mass must be finite and >= 0")
        if self.dim not in (1, 3):
            raise ValueError("spatial dimension must be 1 or 3")

    def omega(self, k: float) -> float:
        return math.hypot(k, self.mass)


@dataclass(frozen=True)
class QuadratureSpec:
    backend: str = "both"  # 'position' | 'momentum' | 'both'
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    depth: int = 20
    momentum_cutoff: float = 40.0

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")

    @property
    def limit(self) -> int:
        return max(50, 25 * self.depth)


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class BilinearResult:
    value: complex
    error_estimate: float
    backend_used: str
    evaluations: int
    failed: bool = False

    @property
    def real(self) -> float:
        return float(np.real(self.value))


class _Counter:
    __slots__ = ("n",)

    def __init__(self):
        self.n = 0


# ---------------------------------------------------------------------------
# spatial cross-correlations
# ---------------------------------------------------------------------------


def _space_corr_1d(sa, sb):
    """xi -> integral Sa(x) Sb(x + xi) dx and its cumulative over [-tau, tau]."""
    if sa.base == "gauss" and sb.base == "gauss":
        s2 = sa.scale**2 + sb.scale**2
        mu = sb.center[0] - sa.center[0]
        c = math.sqrt(2.0 * math.pi) * sa.scale * sb.scale / math.sqrt(s2)

        def corr(xi):
            return c * np.exp(-((xi - mu) ** 2) / (2.0 * s2))

        from scipy.special import erf

        amp = c * math.sqrt(2.0 * math.pi * s2) * 0.5

        def cum(tau):
            rt = math.sqrt(2.0 * s2)
            return amp * (erf((tau - mu) / rt) - erf((-tau - mu) / rt))

        support = (mu - 9.0 * math.sqrt(s2), mu + 9.0 * math.sqrt(s2))
        return corr, cum, support

    # numeric path (bump or mixed)
    from .testfn import _fixed_quad

    ra, rb = sa.radius(9.0), sb.radius(9.0)
    ca, cb = sa.center[0], sb.center[0]
    lo, hi = (cb - ca) - (ra + rb), (cb - ca) + (ra + rb)

    def corr(x):
        x = float(x)
        a = max(ca - ra, cb - rb - x)
        b = min(ca + ra, cb + rb - x)
        if b <= a:
            return 0.0
        return float(
            _fixed_quad(
                lambda u: np.array([sa.value([uu]) * sb.value([uu + x]) for uu in np.atleast_1d(u)]),
                a,
                b,
            )
        )

    def cum(tau):
        a, b = max(lo, -tau), min(hi, tau)
        if b <= a:
            return 0.0
        v, _ = _quad(lambda x: corr(x), a, b, limit=200)
        return v

    return corr, cum, (lo, hi)


def _space_corr_3d_angular(sa, sb):
    """r -> integral over the sphere |xi| = r of the 3D cross-correlation.

    For isotropic gaussians the correlation is a gaussian around the center
    separation M, and the angular integral has the stable closed form
    2 pi c (s^2/(r M)) [exp(-(r-M)^2/2s^2) - exp(-(r+M)^2/2s^2)].
    """
    if sa.base != "gauss" or sb.base != "gauss":
        raise NotImplementedError("3+1 position backend supports gaussian spatial profiles")
    s2 = sa.scale**2 + sb.scale**2
    dvec = np.asarray(sb.center) - np.asarray(sa.center)
    M = float(np.linalg.norm(dvec))
    c3 = (2.0 * math.pi) ** 1.5 * (sa.scale * sb.scale) ** 3 / s2**1.5

    def ang(r):
        r = float(r)
        if r <= 0:
            return 0.0
        if M < 1e-12 * max(1.0, r):
            return 4.0 * math.pi * c3 * math.exp(-r * r / (2.0 * s2))
        return (
            2.0
            * math.pi
            * c3
            * (s2 / (r * M))
            * (math.exp(-((r - M) ** 2) / (2.0 * s2)) - math.exp(-((r + M) ** 2) / (2.0 * s2)))
        )

    support = (max(0.0, M - 9.0 * math.sqrt(s2)), M + 9.0 * math.sqrt(s2))
    return ang, support


# ---------------------------------------------------------------------------
# position backend
# ---------------------------------------------------------------------------


def _retarded_atom_pair_position(model: FieldModel, a: Atom, b: Atom, spec: QuadratureSpec, counter: _Counter):
    """Delta_R contribution of the atom pair (a source, b receiver)."""
    m, d = model.mass, model.dim
    tlo, thi = a.tprof.corr_support(b.tprof)
    tlo = max(tlo, 0.0)
    if thi <= tlo:
        return 0.0, 0.0

    if d == 1:
        corr, cum, (slo, shi) = _space_corr_1d(a.sprof, b.sprof)
        if m == 0.0:

            def K(tau):
                return 0.5 * cum(tau)

        else:

            def K(tau):
                lo, hi = max(slo, -tau), min(shi, tau)
                if hi <= lo:
                    return 0.0
                v, _ = _quad(
                    lambda xi: corr(xi) * j0(m * math.sqrt(max(tau * tau - xi * xi, 0.0))),
                    lo,
                    hi,
                    epsabs=spec.abs_tol * 0.01,
                    epsrel=spec.rel_tol * 0.01,
                    limit=spec.limit,
                )
                return 0.5 * v

    else:
        ang, (slo, shi) = _space_corr_3d_angular(a.sprof, b.sprof)

        def K_cone(tau):
            return tau * ang(tau) / (4.0 * math.pi)

        if m == 0.0:
            K = K_cone
        else:

            def K(tau):
                # tail in the variable u = sqrt(tau^2 - r^2); integrand smooth
                def g(u):
                    r = math.sqrt(max(tau * tau - u * u, 0.0))
                    return r * ang(r) * j1(m * u)

                v, _ = _quad(g, 0.0, tau, epsabs=spec.abs_tol * 0.01, epsrel=spec.rel_tol * 0.01, limit=spec.limit)
                return K_cone(tau) - (m / (4.0 * math.pi)) * v

    def integrand(tau):
        counter.n += 1
        return a.tprof.corr(b.tprof, tau) * K(tau)

    val, err = _quad(
        integrand,
        tlo,
        thi,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=spec.limit,
    )
    return a.coef * b.coef * val, abs(a.coef * b.coef) * err


def _retarded_position(model, f: TestFunction, g: TestFunction, spec, counter) -> tuple[float, float]:
    total, err = 0.0, 0.0
    for a in f.atoms():
        for b in g.atoms():
            v, e = _retarded_atom_pair_position(model, a, b, spec, counter)
            total += v
            err += e
    return total, err


# ---------------------------------------------------------------------------
# momentum backend
# ---------------------------------------------------------------------------


def _onshell_pair_factor(model, a: Atom, b: Atom, k: float):
    """conj(atilde(omega,k)) btilde(omega,k) with the angular factor, per radial k >= 0."""
    w = model.omega(k)
    Ta = a.tprof.fourier(w)
    Tb = b.tprof.fourier(w)
    ea = a.sprof.envelope(k)
    eb = b.sprof.envelope(k)
    dvec = np.asarray(b.sprof.center) - np.asarray(a.sprof.center)
    if model.dim == 1:
        X = float(dvec[0])
        angular = 2.0 * math.cos(k * X) / (2.0 * math.pi)
    else:
        X = float(np.linalg.norm(dvec))
        angular = 4.0 * math.pi * k * k * np.sinc(k * X / math.pi) / (2.0 * math.pi) ** 3
    return np.conj(Ta) * Tb * ea * eb * angular, w


def _momentum_cutoff(model, f: TestFunction, g: TestFunction, spec) -> float:
    """Radial cutoff where the envelope product is negligible."""
    scales = []
    for fn in (f, g):
        for a in fn.atoms():
            scales.append(a.tprof.scale)
            scales.append(a.sprof.scale)
    kmin = spec.momentum_cutoff * max(1.0 / min(scales), model.mass, 1.0)
    # geometric scan for heavy-tailed (bump) envelopes
    ref = None
    k = max(1.0 / max(scales), 1e-3)
    best = kmin
    for _ in range(60):
        mag = 0.0
        w = model.omega(k)
        for a in f.atoms():
            for b in g.atoms():
                mag = max(
                    mag,
                    abs(a.coef * b.coef)
                    * abs(a.tprof.fourier(w))
                    * abs(b.tprof.fourier(w))
                    * abs(a.sprof.envelope(k) * b.sprof.envelope(k))
                    * (k**2 if model.dim == 3 else 1.0),
                )
        if ref is None or mag > ref:
            ref = mag
        if ref and mag < 1e-17 * ref:
            best = k
            break
        k *= 1.6
        best = k
    if not ref:
        # on-shell product underflowed everywhere: the integral is negligible
        return kmin
    return max(best, 4.0 * model.mass + 4.0)


def _wightman_momentum(model, f, g, spec, counter) -> tuple[complex, float]:
    kmax = _momentum_cutoff(model, f, g, spec)
    atoms_f, atoms_g = f.atoms(), g.atoms()

    def integrand(k, part):
        counter.n += 1
        total = 0.0j
        w = model.omega(k)
        for a in atoms_f:
            for b in atoms_g:
                fac, _ = _onshell_pair_factor(model, a, b, k)
                total += a.coef * b.coef * fac
        total /= 2.0 * w
        return total.real if part == 0 else total.imag

    pieces = np.unique(np.concatenate([np.geomspace(max(kmax * 1e-6, 1e-9), kmax, 8), [kmax]]))
    lo = 0.0
    re_val = im_val = 0.0
    re_err = im_err = 0.0
    for hi in pieces:
        v, e = _quad(lambda k: integrand(k, 0), lo, hi, epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.limit)
        re_val += v
        re_err += e
        v, e = _quad(lambda k: integrand(k, 1), lo, hi, epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.limit)
        im_val += v
        im_err += e
        lo = hi
    return complex(re_val, im_val), re_err + im_err


def _pauli_jordan_momentum(model, f, g, spec, counter) -> tuple[float, float]:
    """Delta(f, g) = -2 Im W(f, g); the imaginary part alone is infrared-safe."""
    kmax = _momentum_cutoff(model, f, g, spec)
    atoms_f, atoms_g = f.atoms(), g.atoms()

    def integrand(k):
        counter.n += 1
        total = 0.0j
        w = model.omega(k)
        for a in atoms_f:
            for b in atoms_g:
                fac, _ = _onshell_pair_factor(model, a, b, k)
                total += a.coef * b.coef * fac
        return total.imag / (2.0 * w)

    pieces = np.unique(np.concatenate([np.geomspace(max(kmax * 1e-6, 1e-9), kmax, 8), [kmax]]))
    lo = 0.0
    val = err = 0.0
    for hi in pieces:
        v, e = _quad(integrand, lo, hi, epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.limit)
        val += v
        err += e
        lo = hi
    return -2.0 * val, 2.0 * err


def _pv_quad(F, omega: float, k0max: float, spec) -> tuple[float, float]:
    """PV integral of F(k0)/(omega^2 - k0^2) over [0, k0max] (F even contributions folded by caller)."""
    # 1/(omega^2 - k0^2) = -(1/(k0 + omega)) * 1/(k0 - omega)
    val = err = 0.0
    h = min(0.5 * omega, 0.25) if omega > 0 else 0.0
    segments = []
    if omega <= 0 or omega >= k0max:
        segments.append(("plain", 0.0, k0max))
    else:
        if omega - h > 0:
            segments.append(("plain", 0.0, omega - h))
        segments.append(("cauchy", omega - h, omega + h))
        if omega + h < k0max:
            segments.append(("plain", omega + h, k0max))
    for kind, a, b in segments:
        if kind == "plain":
            v, e = _quad(
                lambda k0: F(k0) / (omega * omega - k0 * k0),
                a,
                b,
                epsabs=spec.abs_tol,
                epsrel=spec.rel_tol,
                limit=spec.limit,
            )
        else:
            v, e = _quad(
                lambda k0: -F(k0) / (k0 + omega),
                a,
                b,
                weight="cauchy",
                wvar=omega,
                epsabs=spec.abs_tol,
                epsrel=spec.rel_tol,
                limit=spec.limit,
            )
        val += v
        err += e
    return val, err


def _retarded_momentum(model, f, g, spec, counter) -> tuple[float, float]:
    """Delta_R = symmetric (PV) part - Delta/2, both from momentum integrals.

    The symmetric part is an off-shell integral, so the radial cutoff comes
    from the spatial envelopes alone and the frequency cutoff from the time
    envelopes alone (the on-shell product may underflow long before either).
    """
    atoms_f, atoms_g = f.atoms(), g.atoms()
    sscales = [a.sprof.scale for a in atoms_f + atoms_g]
    tscales = [a.tprof.scale for a in atoms_f + atoms_g]
    kmax = spec.momentum_cutoff * max(1.0 / min(sscales), 1e-3)
    k0max = max(spec.momentum_cutoff * max(1.0 / min(tscales), 1e-3), 2.0 * model.omega(kmax))

    def sym_inner(k):
        counter.n += 1
        w = model.omega(k)
        dvec_terms = []
        for a in atoms_f:
            for b in atoms_g:
                dvec = np.asarray(b.sprof.center) - np.asarray(a.sprof.center)
                if model.dim == 1:
                    X = float(dvec[0])
                    angular = 2.0 * math.cos(k * X) / (2.0 * math.pi)
                else:
                    X = float(np.linalg.norm(dvec))
                    angular = 4.0 * math.pi * k * k * np.sinc(k * X / math.pi) / (2.0 * math.pi) ** 3
                ea = a.sprof.envelope(k) * b.sprof.envelope(k)
                dvec_terms.append((a, b, angular * ea * a.coef * b.coef))

        def F(k0):
            # even-in-k0 fold: conj(Ttilde_a(k0)) Ttilde_b(k0) + (k0 -> -k0), halved
            tot = 0.0
            for a, b, w8 in dvec_terms:
                Ta, Tb = a.tprof.fourier(k0), b.tprof.fourier(k0)
                Tam, Tbm = a.tprof.fourier(-k0), b.tprof.fourier(-k0)
                tot += w8 * (np.conj(Ta) * Tb + np.conj(Tam) * Tbm).real
            return tot / (2.0 * math.pi)

        v, e = _pv_quad(F, w, k0max, spec)
        return v, e

    pieces = np.unique(np.concatenate([np.geomspace(max(kmax * 1e-6, 1e-9), kmax, 8), [kmax]]))
    lo = 0.0
    val = err = 0.0
    for hi in pieces:
        v, e = _quad(lambda k: sym_inner(k)[0], lo, hi, epsabs=spec.abs_tol * 10, epsrel=spec.rel_tol, limit=spec.limit)
        val += v
        err += e
        lo = hi
    delta, derr = _pauli_jordan_momentum(model, f, g, spec, counter)
    return val - 0.5 * delta, err + 0.5 * derr


# ---------------------------------------------------------------------------
# public bilinear operations
# ---------------------------------------------------------------------------


def _check_dims(model, *fns):
    for fn in fns:
        if fn.dim != model.dim:
            raise ValueError("test function dimension does not match the field model")


from functools import lru_cache


@lru_cache(maxsize=4096)
def retarded(model: FieldModel, f: TestFunction, g: TestFunction, spec: QuadratureSpec = DEFAULT_SPEC) -> BilinearResult:
    """Delta_R(f, g): retarded propagation from f into the causal future part of g.

    Results are memoised: test functions, models and quadrature specs are
    immutable value objects.
    """
    _check_dims(model, f, g)
    counter = _Counter()
    backend = spec.backend
    if backend == "both":
        backend = "position"
    if backend == "position":
        val, err = _retarded_position(model, f, g, spec, counter)
    elif backend == "momentum":
        val, err = _retarded_momentum(model, f, g, spec, counter)
    else:
        raise ValueError(f"unknown backend {spec.backend!r}")
    return BilinearResult(float(val), float(err), backend, counter.n)


def advanced(model, f, g, spec: QuadratureSpec = DEFAULT_SPEC) -> BilinearResult:
    """Delta_A(f, g) = Delta_R(g, f)."""
    return retarded(model, g, f, spec)


@lru_cache(maxsize=4096)
def pauli_jordan(model: FieldModel, f, g, spec: QuadratureSpec = DEFAULT_SPEC) -> BilinearResult:
    """Commutator form Delta(f, g) = Delta_A(f, g) - Delta_R(f, g); antisymmetric."""
    _check_dims(model, f, g)
    counter = _Counter()
    backend = spec.backend
    if backend == "both":
        atoms = f.atoms() + g.atoms()
        windowed_gauss = any(a.tprof.windows for a in atoms) and all(
            a.tprof.base == "gauss" and a.sprof.base == "gauss" and a.tprof.sharp_windows_only for a in atoms
        )
        # sharp cuts give 1/k0 spectral tails; the erf position kernels stay exact
        backend = "position" if windowed_gauss else "momentum"
    if backend == "momentum":
        val, err = _pauli_jordan_momentum(model, f, g, spec, counter)
    elif backend == "position":
        v1, e1 = _retarded_position(model, g, f, spec, counter)
        v2, e2 = _retarded_position(model, f, g, spec, counter)
        val, err = v1 - v2, e1 + e2
    else:
        raise ValueError(f"unknown backend {spec.backend!r}")
    return BilinearResult(float(val), float(err), backend, counter.n)


@lru_cache(maxsize=4096)
def wightman(model: FieldModel, f, g, spec: QuadratureSpec = DEFAULT_SPEC) -> BilinearResult:
    """Vacuum two-point form W(f, g) = int d^dk/((2 pi)^d 2 w) conj(ftilde) gtilde on shell.

    For m = 0 in 1+1 the real part is infrared-divergent whenever both
    functions have nonzero spacetime integral; the result is flagged failed.
    """
    _check_dims(model, f, g)
    counter = _Counter()
    if model.mass == 0.0 and model.dim == 1:
        ir = abs(f.integral() * g.integral())
        scale = max(f.l1() * g.l1(), 1e-300)
        if ir > 1e-10 * scale:
            val, err = _wightman_momentum(model, f, g, replace(spec, abs_tol=1e-6, rel_tol=1e-4), counter)
            return BilinearResult(val, max(err, abs(val)), "momentum", counter.n, failed=True)
    val, err = _wightman_momentum(model, f, g, spec, counter)
    return BilinearResult(val, err, "momentum", counter.n)


def wightman_sym(model, f, g, spec: QuadratureSpec = DEFAULT_SPEC) -> BilinearResult:
    """Real symmetrised part (1/2)<{phi(f), phi(g)}> = Re W(f, g) for real f, g."""
    r = wightman(model, f, g, spec)
    return BilinearResult(float(np.real(r.value)), r.error_estimate, r.backend_used, r.evaluations, r.failed)


# ---------------------------------------------------------------------------
# kinematic matrices
# ---------------------------------------------------------------------------


@dataclass
class KinematicData:
    """All smeared bilinear data for a finite generator list.

    Delta[i, j] = Delta(f_i, f_j) (antisymmetric), R[i, j] = Delta_R(f_i, f_j),
    Wsym[i, j] = Re W(f_i, f_j) (symmetric PSD after the documented repair).
    """

    generators: tuple[TestFunction, ...]
    Delta: np.ndarray
    R: np.ndarray
    Wsym: np.ndarray
    model: FieldModel
    psd_shift: float = 0.0
    entry_errors: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.generators)

    def convention_residual(self) -> float:
        """max |Delta - (R^T - R)| entrywise: cross-backend convention lock."""
        return float(np.max(np.abs(self.Delta - (self.R.T - self.R)))) if self.n else 0.0

    def state_positivity_min_eig(self) -> float:
        mat = self.Wsym + 0.5j * self.Delta
        return float(np.min(np.linalg.eigvalsh(mat)))


def kinematic_matrices(
    model: FieldModel,
    generators,
    spec: QuadratureSpec = DEFAULT_SPEC,
    psd_tol: float = 1e-9,
    with_wightman: bool = True,
    with_retarded: bool = True,
) -> KinematicData:
    gens = tuple(generators)
    if not gens:
        raise ValueError("generator list is empty")
    n = len(gens)
    Delta = np.zeros((n, n))
    R = np.zeros((n, n))
    W = np.zeros((n, n))
    errors = {}
    if with_retarded:
        for i in range(n):
            for j in range(n):
                if gens[i].l1() == 0.0 or gens[j].l1() == 0.0:
                    continue
                r = retarded(model, gens[i], gens[j], spec)
                if r.failed:
                    raise ArithmeticError(f"quadrature failed for R entry ({i}, {j})")
                R[i, j] = r.real
                errors[("R", i, j)] = r.error_estimate
    for i in range(n):
        for j in range(i + 1, n):
            if gens[i].l1() == 0.0 or gens[j].l1() == 0.0:
                continue
            d = pauli_jordan(model, gens[i], gens[j], spec)
            if d.failed:
                raise ArithmeticError(f"quadrature failed for Delta entry ({i}, {j})")
            Delta[i, j] = d.real
            Delta[j, i] = -d.real
            errors[("Delta", i, j)] = d.error_estimate
    if with_wightman:
        for i in range(n):
            for j in range(i, n):
                if gens[i].l1() == 0.0 or gens[j].l1() == 0.0:
                    continue
                w = wightman_sym(model, gens[i], gens[j], spec)
                if w.failed:
                    raise ArithmeticError(f"quadrature failed for Wsym entry ({i}, {j})")
                W[i, j] = W[j, i] = w.real
                errors[("W", i, j)] = w.error_estimate
        # PSD repair: clip eigenvalues in [-psd_tol, 0) to zero; below -psd_tol is a hard error
        eigvals, eigvecs = np.linalg.eigh(W)
        if np.min(eigvals) < -psd_tol:
            raise ArithmeticError(f"Wsym has eigenvalue {np.min(eigvals):.3e} below -{psd_tol:.1e}")
        clipped = np.clip(eigvals, 0.0, None)
        shift = float(np.max(np.abs(clipped - eigvals))) if n else 0.0
        W = (eigvecs * clipped) @ eigvecs.T
        W = 0.5 * (W + W.T)
    else:
        shift = 0.0
    return KinematicData(gens, Delta, R, W, model, shift, errors)


# ---------------------------------------------------------------------------
# scaling scan and cross-validation
# ---------------------------------------------------------------------------


def retarded_scaling_scan(
    model: FieldModel,
    sigma_s_grid,
    sigma_t_grid,
    spec: QuadratureSpec = DEFAULT_SPEC,
    backend: str | None = None,
):
    """Delta_R(f, f) for unit-integral gaussians on the (sigma_S, sigma_T) grid.

    Rows are emitted row-major over (sigma_S, sigma_T); each row is
    (sigma_s, sigma_t, mass, dim, delta_r, err, ok).
    """
    from .testfn import l1_normalized_gaussian

    if backend is None:
        backend = "momentum" if model.mass > 0 else "position"
    use = replace(spec, backend=backend)
    rows = []
    for ss in sigma_s_grid:
        for st in sigma_t_grid:
            f = l1_normalized_gaussian(0.0, [0.0] * model.dim, st, ss)
            try:
                r = retarded(model, f, f, use)
                rows.append((float(ss), float(st), model.mass, model.dim, r.real, r.error_estimate, not r.failed))
            except Exception:
                rows.append((float(ss), float(st), model.mass, model.dim, math.nan, math.inf, False))
    return rows


def fit_loglog_slope(xs, ys) -> float:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    mask = np.isfinite(xs) & np.isfinite(ys) & (xs > 0) & (ys > 0)
    if mask.sum() < 2:
        raise ValueError("not enough valid points for a slope fit")
    coeffs = np.polyfit(np.log(xs[mask]), np.log(ys[mask]), 1)
    return float(coeffs[0])


@dataclass(frozen=True)
class CrossValidation:
    position: BilinearResult
    momentum: BilinearResult
    passed: bool
    tolerance: float

    @property
    def discrepancy(self) -> float:
        return abs(float(np.real(self.position.value)) - float(np.real(self.momentum.value)))


def crossvalidate(model: FieldModel, f, g, spec: QuadratureSpec = DEFAULT_SPEC) -> CrossValidation:
    """Evaluate Delta(f, g) on both backends and compare within combined errors."""
    pos = pauli_jordan(model, f, g, replace(spec, backend="position"))
    mom = pauli_jordan(model, f, g, replace(spec, backend="momentum"))
    scale = max(abs(pos.real), abs(mom.real))
    tol = 4.0 * (pos.error_estimate + mom.error_estimate) + 1e-8 * scale + 100.0 * spec.abs_tol
    passed = abs(pos.real - mom.real) <= tol
    return CrossValidation(pos, mom, passed, tol)
