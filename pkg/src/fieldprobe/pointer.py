"""The exactly solved pointer-coupling measurement model.

A pointer with conjugate pair [Q, P] = i couples to the field through the
smeared vertex f(x) phi(x) (x) P.  The time-ordered evolution collapses, via
the Magnus expansion (the commutator of vertices is central), to the
quantum-controlled form

    S[f] = int dp exp(-i p phi(f)) exp(-i p^2 R / 2) (x) |p><p|,   R = Delta_R(f, f),

so measuring the pointer at q induces field Kraus operators Pi_q = g(q - phi(f))
with kernel g = F^{-1}[ psitilde(p) exp(-i p^2 R / 2) ].  This module builds the
kernels (closed complex-Gaussian forms for gaussian probes, FFT grids
otherwise), their POVMs and outcome statistics, the induced non-selective
channel on the field algebra, and machine checks of the factorisation
identities: continuous additivity, the Hammerstein property, the kernel
convolution identity, and the overlap identity.

Pointer-side Fourier convention: psitilde(p) = <p|psi> with <q|p> = e^{ipq}/sqrt(2 pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .ccr import AlgebraElement, adjoint_linear
from .gauss1d import GaussianExp, GridFunction1D
from .propagator import (
    DEFAULT_SPEC,
    BilinearResult,
    FieldModel,
    QuadratureSpec,
    pauli_jordan,
    retarded,
)
from .testfn import TestFunction

__all__ = [
    "ProbeState",
    "GaussianProbe",
    "AnalyticProbe",
    "TabulatedProbe",
    "ControlledSMatrix",
    "KrausKernel",
    "smatrix",
    "kraus_kernel",
    "sharpness",
    "povm_density",
    "effect_width",
    "outcome_distribution",
    "channel_on_element",
    "channel_oracle_expectation",
    "continuous_additivity_check",
    "hammerstein_check",
    "convolution_identity_check",
    "overlap_identity",
    "dilation_probe_state",
    "canonical_probe_split",
    "IdentityReport",
]

NORM_TOL = 1e-8


class MomentError(ArithmeticError):
    """A required |psitilde|^2 moment is not trustworthy on the grid."""

    def __init__(self, order: int):
        super().__init__(f"momentum moment of order {order} not resolved by the probe grid")
        self.order = order


# ---------------------------------------------------------------------------
# probe states
# ---------------------------------------------------------------------------


class ProbeState:
    """Initial pointer state psi(q), L2-normalised."""

    kind = "abstract"

    def psi_hat_gauss(self) -> GaussianExp | None:
        """Closed-form psitilde if available."""
        return None

    def psi_gauss(self) -> GaussianExp | None:
        return None

    def psi_hat_grid(self, n: int = 2**14) -> GridFunction1D:
        raise NotImplementedError

    def momentum_moment(self, order: int, s0: float = 0.0) -> complex:
        """integral dp |psitilde(p)|^2 p^order exp(i p s0)."""
        raise NotImplementedError

    def char_function(self, s) -> complex:
        """F_psi(s) = integral dp |psitilde(p)|^2 exp(i p s)."""
        return self.momentum_moment(0, s)

    def mean_momentum(self) -> float:
        return float(np.real(self.momentum_moment(1)))

    def momentum_variance(self) -> float:
        m1 = self.mean_momentum()
        return float(np.real(self.momentum_moment(2))) - m1 * m1


def _gauss_poly_integral(g: GaussianExp, order: int) -> complex:
    """integral u^order g(u) du by differentiating the closed form in b."""
    # I(b) = sqrt(-pi/c) exp(a - b^2/(4c)); d/db brings down (-b/(2c))
    c = g.c
    base = g.integral()
    if order == 0:
        return base
    # polynomial q_k(b) with d^k/db^k exp(-b^2/4c) = q_k exp(...)
    poly = np.zeros(order + 2, dtype=complex)
    poly[0] = 1.0
    b = g.b
    lin = np.array([-b / (2.0 * c), -1.0 / (2.0 * c)], dtype=complex)
    for _ in range(order):
        dpoly = np.polynomial.polynomial.polyder(poly)
        prod = np.polynomial.polynomial.polymul(lin, poly)  # may trim trailing zeros
        nlen = max(len(prod), len(dpoly), order + 2)
        newpoly = np.zeros(nlen, dtype=complex)
        newpoly[: len(prod)] = prod
        newpoly[: len(dpoly)] += dpoly
        poly = newpoly
    # now integral u^k g = value of the k-th derivative of I with respect to b
    return complex(np.polynomial.polynomial.polyval(0.0, poly)) * base


@dataclass(frozen=True)
class GaussianProbe(ProbeState):
    """psi(q) = (pi sigma^2)^{-1/4} exp(-(q - center)^2/(2 sigma^2) + i momentum q).

    |psi|^2 has standard deviation sigma/sqrt(2); <p^2> = 1/(2 sigma^2) + momentum^2.
    """

    sigma: float
    center: float = 0.0
    momentum: float = 0.0
    kind = "gaussian"

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("probe width must be positive")

    def psi_gauss(self) -> GaussianExp:
        return GaussianExp.wavepacket(self.sigma, self.center, self.momentum)

    def psi_hat_gauss(self) -> GaussianExp:
        return self.psi_gauss().fourier()

    def psi_hat_grid(self, n: int = 2**14) -> GridFunction1D:
        ph = self.psi_hat_gauss()
        half = 12.0 * max(1.0 / self.sigma, abs(self.momentum), 1e-6)
        return GridFunction1D.sample(ph, self.momentum, half, n)

    def momentum_moment(self, order: int, s0: float = 0.0) -> complex:
        dens = self.psi_hat_gauss().abs_squared().phase_mul(s0)
        return _gauss_poly_integral(dens, order)


@dataclass(frozen=True)
class AnalyticProbe(ProbeState):
    """Probe given by a closed-form complex-Gaussian wavefunction (dilation output)."""

    psi: GaussianExp
    kind = "gaussexp"

    def psi_gauss(self) -> GaussianExp:
        return self.psi

    def psi_hat_gauss(self) -> GaussianExp:
        return self.psi.fourier()

    def psi_hat_grid(self, n: int = 2**14) -> GridFunction1D:
        ph = self.psi_hat_gauss()
        halfp = 12.0 * math.sqrt(abs(1.0 / (2.0 * ph.abs_squared().c.real)))
        pc = float((-ph.abs_squared().b / (2 * ph.abs_squared().c)).real)
        return GridFunction1D.sample(ph, pc, halfp, n)

    def momentum_moment(self, order: int, s0: float = 0.0) -> complex:
        dens = self.psi_hat_gauss().abs_squared().phase_mul(s0)
        return _gauss_poly_integral(dens, order)


class TabulatedProbe(ProbeState):
    """psi sampled on a uniform power-of-two grid; normalised on construction."""

    kind = "tabulated"

    def __init__(self, grid: GridFunction1D):
        self.grid = grid.normalized()
        self._hat = self.grid.fourier()
        if self._hat.edge_band_fraction() > 1e-8:
            raise ValueError("probe grid aliases: momentum mass in the outer band exceeds 1e-8")

    @staticmethod
    def from_samples(u0: float, du: float, values) -> "TabulatedProbe":
        return TabulatedProbe(GridFunction1D(u0, du, values))

    def psi_hat_grid(self, n: int = 2**14) -> GridFunction1D:
        return self._hat

    def momentum_moment(self, order: int, s0: float = 0.0) -> complex:
        p = self._hat.grid
        w = np.abs(self._hat.values) ** 2
        integrand = w * p**order
        edge = max(abs(integrand[0]), abs(integrand[-1]))
        if edge > 1e-7 * max(np.max(np.abs(integrand)), 1e-300):
            raise MomentError(order)
        return complex(np.sum(integrand * np.exp(1j * p * s0)) * self._hat.du)


# ---------------------------------------------------------------------------
# S-matrix and kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ControlledSMatrix:
    """Quantum-controlled representation p -> (phase exponent, field displacement)."""

    f: TestFunction
    retarded_diag: BilinearResult

    @property
    def R(self) -> float:
        return self.retarded_diag.real

    def phase_exponent(self, p) -> np.ndarray:
        """Exponent of the central phase at control value p: -p^2 R / 2."""
        p = np.asarray(p, dtype=float)
        return -0.5 * p * p * self.R

    def displacement_scale(self, p) -> np.ndarray:
        """phi-coefficient: the controlled unitary displaces by (-p) * f."""
        return -np.asarray(p, dtype=float)


def smatrix(
    f: TestFunction, model: FieldModel, spec: QuadratureSpec = DEFAULT_SPEC, r_tol: float = 1e-9
) -> ControlledSMatrix:
    """Solve the pointer coupling exactly; R = Delta_R(f, f) must be >= -r_tol."""
    r = retarded(model, f, f, spec)
    if r.failed:
        raise ArithmeticError("retarded quadrature failed for the S-matrix phase")
    if r.real < -r_tol:
        raise ArithmeticError(f"Delta_R(f, f) = {r.real:.3e} < 0: sharpness bound undefined")
    if r.real < 0.0:
        r = BilinearResult(0.0, r.error_estimate, r.backend_used, r.evaluations)
    return ControlledSMatrix(f, r)


def sharpness(sigma: float, R: float) -> float:
    """POVM width sigma~ = sqrt(sigma^2/2 + R^2/(2 sigma^2)) >= sqrt(R)."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if R < 0:
        raise ValueError("negative retarded diagonal: measurement model undefined")
    return math.sqrt(0.5 * sigma * sigma + 0.5 * (R / sigma) ** 2)


@dataclass(frozen=True)
class KrausKernel:
    """Pi_q = g(q - phi(f)) with g the inverse transform of psitilde e^{-i p^2 R/2}."""

    f: TestFunction
    R: float
    probe: ProbeState
    gauss: GaussianExp | None  # closed form when the probe admits one
    grid: GridFunction1D | None

    def kernel(self, u):
        if self.gauss is not None:
            return self.gauss(u)
        return self.grid.interp(u)

    def kernel_hat_gauss(self) -> GaussianExp | None:
        if self.gauss is None:
            return None
        return self.gauss.fourier()

    def l2_norm_squared(self) -> float:
        if self.gauss is not None:
            return self.gauss.l2_norm_squared()
        return self.grid.l2_norm_squared()

    def sample(self, us) -> np.ndarray:
        return np.asarray([self.kernel(u) for u in np.atleast_1d(us)], dtype=complex)


def kraus_kernel(
    f: TestFunction,
    probe: ProbeState,
    model: FieldModel,
    spec: QuadratureSpec = DEFAULT_SPEC,
    n_grid: int = 2**14,
    R_override: float | None = None,
) -> KrausKernel:
    """Kernel of the induced Kraus family; completeness holds by construction."""
    R = smatrix(f, model, spec).R if R_override is None else float(R_override)
    ph = probe.psi_hat_gauss()
    if ph is not None:
        ghat = ph.chirp(-0.5j * R)
        g = ghat.inverse_fourier()
        k = KrausKernel(f, R, probe, g, None)
    else:
        hat = probe.psi_hat_grid(n_grid)
        chirped = GridFunction1D(hat.u0, hat.du, hat.values * np.exp(-0.5j * R * hat.grid**2))
        g = chirped.inverse_fourier()
        if g.edge_band_fraction() > 1e-8:
            raise ValueError("kernel grid aliases: the time-ordering chirp spread past the window")
        k = KrausKernel(f, R, probe, None, g)
    nrm = k.l2_norm_squared()
    if abs(nrm - 1.0) > 1e-6:
        raise ArithmeticError(f"kernel completeness violated: ||g||^2 = {nrm:.2e}")
    return k


@dataclass(frozen=True)
class EffectProfile:
    """u -> |g(u)|^2, the POVM density in the spectral variable u = q - phi(f)."""

    kernel: KrausKernel

    def __call__(self, u):
        return np.abs(self.kernel.kernel(u)) ** 2

    def gauss(self) -> GaussianExp | None:
        if self.kernel.gauss is None:
            return None
        return self.kernel.gauss.abs_squared()

    def total_mass(self) -> float:
        return self.kernel.l2_norm_squared()

    def width(self) -> float:
        return effect_width(self.kernel)


def povm_density(kernel: KrausKernel) -> EffectProfile:
    return EffectProfile(kernel)


def effect_width(kernel: KrausKernel) -> float:
    """Standard deviation of the effect profile |g|^2."""
    if kernel.gauss is not None:
        return kernel.gauss.width()
    grid = kernel.grid
    w = np.abs(grid.values) ** 2
    u = grid.grid
    tot = np.sum(w) * grid.du
    mean = np.sum(u * w) * grid.du / tot
    var = np.sum((u - mean) ** 2 * w) * grid.du / tot
    return float(np.sqrt(var))


@dataclass(frozen=True)
class OutcomeDistribution:
    """Density of pointer outcomes: effect profile convolved with the field statistics."""

    kernel: KrausKernel
    field_mean: float
    field_variance: float

    def gauss(self) -> GaussianExp | None:
        g = self.kernel.gauss
        if g is None:
            return None
        profile = g.abs_squared()
        if self.field_variance <= 0:
            return profile.shift(self.field_mean)
        noise = GaussianExp.density(math.sqrt(self.field_variance), self.field_mean)
        return profile.convolve(noise)

    def __call__(self, q):
        g = self.gauss()
        if g is not None:
            return np.real(g(q))
        # numeric convolution on the kernel grid
        grid = self.kernel.grid
        u = grid.grid
        w = np.abs(grid.values) ** 2
        q = np.atleast_1d(np.asarray(q, dtype=float))
        if self.field_variance <= 0:
            vals = np.interp(q - self.field_mean, u, w, left=0.0, right=0.0)
            return vals if vals.size > 1 else float(vals[0])
        out = []
        sig = math.sqrt(self.field_variance)
        for qq in q:
            gg = np.exp(-((qq - u - self.field_mean) ** 2) / (2 * sig * sig)) / (math.sqrt(2 * math.pi) * sig)
            out.append(float(np.sum(w * gg) * grid.du))
        return np.asarray(out) if len(out) > 1 else out[0]

    def total_mass(self) -> float:
        g = self.gauss()
        if g is not None:
            return float(np.real(g.integral()))
        grid = self.kernel.grid
        return float(np.sum(np.abs(grid.values) ** 2) * grid.du)

    def mean(self) -> float:
        g = self.gauss()
        if g is not None:
            return float(np.real(_gauss_poly_integral(g, 1)))
        raise NotImplementedError

    def variance(self) -> float:
        m = self.mean()
        g = self.gauss()
        return float(np.real(_gauss_poly_integral(g, 2))) - m * m


def outcome_distribution(kernel: KrausKernel, state, kin, coeffs=None) -> OutcomeDistribution:
    """Pointer-outcome density tr(rho Pi_q^dag Pi_q) for a quasi-free field state.

    ``coeffs`` expresses phi(f) in the generator span of ``kin``;  when omitted
    the kernel's test function must itself be one of the generators.
    """
    if coeffs is None:
        matches = [i for i, g in enumerate(kin.generators) if g == kernel.f]
        if not matches:
            raise ValueError("kernel smearing is outside the state's generator span")
        coeffs = np.zeros(len(kin.generators))
        coeffs[matches[0]] = 1.0
    coeffs = np.asarray(coeffs, dtype=float)
    mu = float(np.asarray(state.mu) @ coeffs)
    var = float(coeffs @ np.asarray(state.wsym) @ coeffs)
    return OutcomeDistribution(kernel, mu, var)


# ---------------------------------------------------------------------------
# the induced non-selective channel on the field algebra
# ---------------------------------------------------------------------------


def channel_on_element(coeffs, probe: ProbeState, X: AlgebraElement, R: float = 0.0) -> AlgebraElement:
    """Phi[f](X) = int dp |psitilde(p)|^2 e^{i p phi(f)} X e^{-i p phi(f)}.

    Exact: polynomial parts integrate moments of |psitilde|^2; Weyl factors pick
    up the dephasing value of the characteristic function at the commutator
    shift.  The time-ordering phase R cancels between Pi^dag and Pi, so the
    result depends on the probe only through |psitilde|^2 (R accepted for
    interface symmetry and ignored).
    """
    del R
    coeffs = np.asarray(coeffs, dtype=float)
    D = X.kin.matrix
    if coeffs.shape != (X.n,):
        raise ValueError("coeffs must index the element's generators")
    w = D @ coeffs  # phi_j -> phi_j + p * w_j under e^{ip phi(f)} . e^{-ip phi(f)}
    from .ccr import _poly_shift

    out: dict = {}
    for (a, e), c in X.terms.items():
        s0 = float(np.asarray(a) @ w)
        if sum(e) == 0:
            factor = probe.momentum_moment(0, s0)
            key = (a, e)
            out[key] = out.get(key, 0.0j) + c * factor
            continue
        # expand prod_j (x_j + p w_j)^{e_j}: collect p powers
        by_power: dict[int, dict] = {0: {tuple([0] * X.n): 1.0 + 0.0j}}
        for j, ej in enumerate(e):
            if ej == 0:
                continue
            new: dict[int, dict] = {}
            for k in range(ej + 1):
                binom = math.comb(ej, k)
                coeff = binom * (w[j] ** (ej - k))
                if coeff == 0.0 and ej != k:
                    continue
                for r, poly in by_power.items():
                    tgt = new.setdefault(r + (ej - k), {})
                    for key, cc in poly.items():
                        nk = list(key)
                        nk[j] += k
                        nk = tuple(nk)
                        tgt[nk] = tgt.get(nk, 0.0j) + cc * coeff
            by_power = new
        for r, poly in by_power.items():
            factor = probe.momentum_moment(r, s0)
            for e2, cc in poly.items():
                key = (a, e2)
                out[key] = out.get(key, 0.0j) + c * cc * factor
    return AlgebraElement(X.kin, out)


def channel_oracle_expectation(
    coeffs,
    probe: ProbeState,
    X: AlgebraElement,
    state,
    R: float,
    window: float = 30.0,
    n_nodes: int = 301,
) -> complex:
    """tr(rho Phi[f](X)) by direct (p, p') grid integration of the uncollapsed map.

    Evaluates (1/2pi) iint dp dp' conj(ghat(p)) ghat(p') S_L(p - p')
    < e^{i p phi(f)} X e^{-i p' phi(f)} > with the finite-window kernel
    S_L(d) = 2 sin(d L)/d in place of the delta collapse; no use of the
    closed-form channel.  Converges exponentially in the window L.
    """
    from numpy.polynomial.legendre import leggauss

    from .ccr import expectation

    coeffs = np.asarray(coeffs, dtype=float)
    ph = probe.psi_hat_gauss()
    if ph is None:
        raise NotImplementedError("grid probes: use the gaussian-probe oracle")
    dens = ph.abs_squared()
    pc = float((-dens.b / (2 * dens.c)).real)
    pw = math.sqrt(-1.0 / (2.0 * dens.c.real))
    pmax = 9.0 * pw
    nodes, weights = leggauss(n_nodes)
    ps = pc + pmax * nodes
    ws = pmax * weights
    ghat_vals = np.array([ph(p) * np.exp(-0.5j * R * p * p) for p in ps]).reshape(-1)

    # precompute W(p u) as elements once per node
    weyl_plus = [AlgebraElement.weyl(X.kin, tuple(p * coeffs)) for p in ps]
    weyl_minus = [AlgebraElement.weyl(X.kin, tuple(-p * coeffs)) for p in ps]

    total = 0.0j
    L = window
    for i, p in enumerate(ps):
        left = weyl_plus[i] * X
        for k, pp in enumerate(ps):
            d = p - pp
            sL = 2.0 * L if abs(d) < 1e-14 else 2.0 * math.sin(d * L) / d
            if abs(sL) < 1e-300:
                continue
            val = expectation(state, left * weyl_minus[k])
            total += ws[i] * ws[k] * np.conj(ghat_vals[i]) * ghat_vals[k] * sL * val
    return complex(total / (2.0 * math.pi))


# ---------------------------------------------------------------------------
# factorisation identity checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityReport:
    check: str
    residual: float
    tolerance: float
    scale: float
    details: dict

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    @property
    def relative_residual(self) -> float:
        return self.residual / self.scale if self.scale else self.residual


def _default_p_grid(sigma_min: float) -> np.ndarray:
    return np.linspace(-8.0 / sigma_min, 8.0 / sigma_min, 2**12)


def continuous_additivity_check(
    f: TestFunction,
    t_cut: float,
    model: FieldModel,
    spec: QuadratureSpec = DEFAULT_SPEC,
    p_grid=None,
    tolerance: float = 1e-6,
    drop_cross_term: bool = False,
) -> IdentityReport:
    """Compare S[f] against S[f_+] S[f_-] in the controlled representation.

    The displacements add exactly (f_+ + f_- = f pointwise), so the check is
    carried by the phase exponents: the composition inserts the Weyl phase
    -p^2 Delta(f_+, f_-)/2 and the residual is the Appendix-style combination
    R(f,f) - R(f_+,f_+) - R(f_-,f_-) - Delta(f_+,f_-), evaluated from
    independent quadratures.  ``drop_cross_term`` is the injected fault.
    """
    fplus, fminus = f.cut(t_cut)
    Rff = retarded(model, f, f, spec).real
    Rpp = retarded(model, fplus, fplus, spec).real
    Rmm = retarded(model, fminus, fminus, spec).real
    cross = pauli_jordan(model, fplus, fminus, spec).real  # = Delta(f+, f-) = R(f-, f+)
    if drop_cross_term:
        cross = 0.0
    coeff_resid = Rff - Rpp - Rmm - cross
    if p_grid is None:
        sig = min(a.tprof.scale for a in f.atoms())
        p_grid = _default_p_grid(sig)
    p_grid = np.asarray(p_grid)
    exponent_resid = float(np.max(0.5 * p_grid**2 * abs(coeff_resid)))
    scale = float(np.max(0.5 * p_grid**2 * abs(Rff))) or 1.0
    return IdentityReport(
        "continuous_additivity",
        exponent_resid / scale,
        tolerance,
        1.0,
        {
            "R_ff": Rff,
            "R_pp": Rpp,
            "R_mm": Rmm,
            "cross": cross,
            "coeff_residual": coeff_resid,
            "max_exponent_residual": exponent_resid,
            "t_cut": t_cut,
        },
    )


def hammerstein_check(
    f1: TestFunction,
    f2: TestFunction | None,
    f3: TestFunction,
    model: FieldModel,
    spec: QuadratureSpec = DEFAULT_SPEC,
    p_grid=None,
    tolerance: float = 1e-6,
) -> IdentityReport:
    """S[f1+f2+f3] ?= S[f1+f2] S[f2]^{-1} S[f2+f3] in the controlled representation.

    f1 must lie to the causal future of f3 across a constant-time hypersurface
    (the middle smearing f2 is unrestricted and cancels identically); the
    residual reduces to 2 R(f1, f3) plus quadrature noise.
    """
    from .testfn import ScaledFunction

    if f2 is None:
        f2 = ScaledFunction(f1, 0.0)
    gens = (f1, f2, f3)
    n = 3
    R = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if gens[i].l1() == 0.0 or gens[j].l1() == 0.0:
                continue
            R[i, j] = retarded(model, gens[i], gens[j], spec).real
    D = R.T - R

    def E(v):
        v = np.asarray(v, dtype=float)
        return float(v @ R @ v)

    v1 = np.array([1.0, 1.0, 0.0])
    v2 = np.array([0.0, 1.0, 0.0])
    v3 = np.array([0.0, 1.0, 1.0])
    parts = [(E(v1), v1), (-E(v2), -v2), (E(v3), v3)]
    coeff = 0.0
    disp = np.zeros(n)
    for c, d in parts:
        coeff += c + float(disp @ D @ d)
        disp = disp + d
    full = np.array([1.0, 1.0, 1.0])
    lhs = E(full)
    coeff_resid = lhs - coeff
    disp_resid = float(np.max(np.abs(disp - full)))
    if p_grid is None:
        sig = min(a.tprof.scale for g in (f1, f3) for a in g.atoms())
        p_grid = _default_p_grid(sig)
    p_grid = np.asarray(p_grid)
    exponent_resid = float(np.max(0.5 * p_grid**2 * abs(coeff_resid)))
    scale = float(np.max(0.5 * p_grid**2 * abs(lhs))) or 1.0
    return IdentityReport(
        "hammerstein",
        exponent_resid / scale + disp_resid,
        tolerance,
        1.0,
        {
            "lhs_coeff": lhs,
            "rhs_coeff": coeff,
            "coeff_residual": coeff_resid,
            "expected_obstruction": 2.0 * R[0, 2],
            "displacement_residual": disp_resid,
        },
    )


def canonical_probe_split(probe: GaussianProbe) -> tuple[AnalyticProbe, AnalyticProbe]:
    """The square-root split: psitilde_+ = psitilde_- = (2 pi)^{-1/4} sqrt(psitilde).

    Then psitilde_+ psitilde_- = psitilde/sqrt(2 pi), i.e. psi = psi_+ * psi_-
    (plain convolution).  The halves are not normalised probe states.
    """
    ph = probe.psi_hat_gauss()
    half_hat = GaussianExp(0.5 * ph.a - 0.25 * math.log(2.0 * math.pi), 0.5 * ph.b, 0.5 * ph.c)
    psi_half = half_hat.inverse_fourier()
    return AnalyticProbe(psi_half), AnalyticProbe(psi_half)


def convolution_identity_check(
    f: TestFunction,
    t_cut: float,
    psi_plus: ProbeState,
    psi_minus: ProbeState,
    model: FieldModel,
    spec: QuadratureSpec = DEFAULT_SPEC,
    n_grid: int = 2**12,
    tolerance: float = 1e-6,
    drop_cross_term: bool = False,
) -> IdentityReport:
    """Kernel-level convolution identity for the split measurement.

    LHS: the kernel of Pi^(psi_+ * psi_-)[f].  RHS: the numeric s-convolution
    of the sub-kernels for (f_+, psi_+) and (f_-, psi_-) with the relative
    Weyl phase exp(-i p^2 Delta(f_+, f_-)/2) folded into the future factor.
    Returns sup-norm and L2 residuals over the outcome grid.
    """
    fplus, fminus = f.cut(t_cut)
    Rff = retarded(model, f, f, spec).real
    Rpp = retarded(model, fplus, fplus, spec).real
    Rmm = retarded(model, fminus, fminus, spec).real
    cross = pauli_jordan(model, fplus, fminus, spec).real
    if drop_cross_term:
        cross = 0.0

    php = psi_plus.psi_hat_gauss()
    phm = psi_minus.psi_hat_gauss()
    if php is None or phm is None:
        raise NotImplementedError("convolution check requires closed-form probe halves")

    # LHS kernel: psi = psi_+ * psi_- (convolution), full R(f, f)
    psi_hat = php * phm * complex(math.sqrt(2.0 * math.pi))
    g_full = psi_hat.chirp(-0.5j * Rff).inverse_fourier()

    # RHS: twisted future kernel convolved with the past kernel, numerically
    g_plus_tw = php.chirp(-0.5j * (Rpp + cross)).inverse_fourier()
    g_minus = phm.chirp(-0.5j * Rmm).inverse_fourier()

    width = max(effective_halfwidth(g_full), effective_halfwidth(g_plus_tw), effective_halfwidth(g_minus))
    center = g_full.center()
    half = 10.0 * width
    us = np.linspace(center - half, center + half, n_grid)
    du = us[1] - us[0]
    a_vals = np.asarray(g_plus_tw(us))
    b_vals = np.asarray(g_minus(us))
    conv = np.convolve(a_vals, b_vals, mode="full") * du
    grid_full = np.linspace(2 * (center - half), 2 * (center + half), 2 * n_grid - 1)
    lhs_vals = np.asarray(g_full(grid_full))
    resid = np.abs(conv - lhs_vals)
    sup = float(np.max(resid))
    l2 = float(np.sqrt(np.sum(resid**2) * du))
    scale = float(np.max(np.abs(lhs_vals))) or 1.0
    return IdentityReport(
        "convolution_identity",
        sup / scale,
        tolerance,
        scale,
        {
            "sup_residual": sup,
            "l2_residual": l2,
            "scale": scale,
            "R_ff": Rff,
            "R_pp": Rpp,
            "R_mm": Rmm,
            "cross": cross,
            "t_cut": t_cut,
        },
    )


def effective_halfwidth(g: GaussianExp) -> float:
    return max(g.width(), 1e-6)


def overlap_identity(
    f_coeffs,
    kernel: KrausKernel,
    s: float,
    s_prime: float,
    kin=None,
    n_nodes: int = 241,
) -> tuple[complex, float, complex]:
    """int dq Pi_{q-s}^dag Pi_{q-s'} = F_psi(s - s') * identity.

    Returns (scalar, operator_residual, F_psi(s - s')).  The scalar is the
    kernel autocorrelation at lag s - s'; the operator part is assembled in
    canonical algebra form on a control grid (every W(p u) W(-p u) pair
    collapses to the identity), so its non-identity norm is the residual.
    """
    tau = s - s_prime
    if kernel.gauss is not None:
        scalar = (kernel.gauss.conj() * kernel.gauss.shift(-tau)).integral()
    else:
        grid = kernel.grid
        shifted = grid.interp(grid.grid + tau)
        scalar = complex(np.sum(np.conj(grid.values) * shifted) * grid.du)
    F = kernel.probe.char_function(tau)
    op_resid = 0.0
    if kin is not None:
        from numpy.polynomial.legendre import leggauss

        coeffs = np.asarray(f_coeffs, dtype=float)
        ph = kernel.probe.psi_hat_gauss()
        if ph is not None:
            dens = ph.abs_squared()
            pc = float((-dens.b / (2 * dens.c)).real)
            pw = math.sqrt(-1.0 / (2.0 * dens.c.real))
            nodes, weights = leggauss(n_nodes)
            ps = pc + 9.0 * pw * nodes
            ws = 9.0 * pw * weights
            elem = AlgebraElement.zero(kin)
            for p, wgt in zip(ps, ws):
                c = wgt * np.exp(1j * p * tau) * abs(ph(p)) ** 2
                pair = AlgebraElement.weyl(kin, tuple(p * coeffs)) * AlgebraElement.weyl(kin, tuple(-p * coeffs))
                elem = elem + complex(c) * pair
            op_resid = elem.non_identity_norm()
    return complex(scalar), float(op_resid), complex(F)


def dilation_probe_state(
    kappa,
    f: TestFunction,
    model: FieldModel,
    spec: QuadratureSpec = DEFAULT_SPEC,
    R_override: float | None = None,
) -> ProbeState:
    """Probe whose induced kernel is exactly the requested shape kappa.

    psi = F^{-1}( F(kappa)(p) exp(+i p^2 R/2) ); the chirp undoes the
    time-ordering phase, so kraus_kernel(f, psi) returns kappa.
    """
    R = smatrix(f, model, spec).R if R_override is None else float(R_override)
    if isinstance(kappa, GaussianExp):
        if abs(kappa.l2_norm_squared() - 1.0) > 1e-8:
            raise ValueError("kappa must be L2-normalised")
        psi = kappa.fourier().chirp(0.5j * R).inverse_fourier()
        return AnalyticProbe(psi)
    if isinstance(kappa, GridFunction1D):
        k = kappa.normalized()
        hat = k.fourier()
        chirped = GridFunction1D(hat.u0, hat.du, hat.values * np.exp(0.5j * R * hat.grid**2))
        if chirped.edge_band_fraction() > 1e-6:
            raise ValueError("kappa cannot be dilated on this grid: chirped spectrum aliases")
        return TabulatedProbe(chirped.inverse_fourier())
    raise TypeError("kappa must be a GaussianExp or a GridFunction1D")
