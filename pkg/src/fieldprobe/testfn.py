"""Spacetime test functions: construction, evaluation, transforms, causal splitting.

Units are natural (c = hbar = 1); a point is (t, x) with x a spatial vector of
length d, d in {1, 3}.  Two families are provided:

* Gaussians: separable exp(-(t-t0)^2/(2 sigma_t^2)) exp(-|x-x0|^2/(2 sigma_s^2)),
  peak value = ``amplitude``.  Analytic Fourier transforms; effective support
  box is center +/- n_sigma * sigma with the stranded L1 tail reported.
* Bumps: separable exp(1 - 1/(1 - r^2)) profiles with hard support radii, so
  compact support (and hence microcausality) is exact; transforms are numeric.

Sharp or smoothed causal cuts in time produce (future, past) pairs that re-sum
to the original function pointwise.  The Fourier convention is fixed once here:

    ftilde(k0, k) = integral dt d^dx f(t, x) exp(i (k0 t - k . x)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import erf, wofz

__all__ = [
    "SpacetimePoint",
    "SupportBox",
    "TestFunction",
    "GaussianFunction",
    "BumpFunction",
    "SumFunction",
    "ScaledFunction",
    "CutFunction",
    "gaussian",
    "bump",
    "l1_normalized_gaussian",
    "causal_relation",
]

_SQRT2PI = math.sqrt(2.0 * math.pi)
DEFAULT_N_SIGMA = 8.0


@dataclass(frozen=True)
class SpacetimePoint:
    """A point (t, x) in 1+d Minkowski space."""

    t: float
    x: tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class SupportBox:
    """Axis-aligned effective support with the stranded L1 tail bound."""

    tmin: float
    tmax: float
    xmin: tuple[float, ...]
    xmax: tuple[float, ...]
    eps_tail: float = 0.0

    @property
    def dim(self) -> int:
        return len(self.xmin)

    def contains(self, p: SpacetimePoint) -> bool:
        if not (self.tmin <= p.t <= self.tmax):
            return False
        return all(lo <= xi <= hi for xi, lo, hi in zip(p.x, self.xmin, self.xmax))

    def translated(self, dt: float, dx: tuple[float, ...]) -> "SupportBox":
        return SupportBox(
            self.tmin + dt,
            self.tmax + dt,
            tuple(a + d for a, d in zip(self.xmin, dx)),
            tuple(a + d for a, d in zip(self.xmax, dx)),
            self.eps_tail,
        )

    @staticmethod
    def union(a: "SupportBox", b: "SupportBox") -> "SupportBox":
        return SupportBox(
            min(a.tmin, b.tmin),
            max(a.tmax, b.tmax),
            tuple(min(p, q) for p, q in zip(a.xmin, b.xmin)),
            tuple(max(p, q) for p, q in zip(a.xmax, b.xmax)),
            a.eps_tail + b.eps_tail,
        )


def causal_relation(a: SupportBox, b: SupportBox) -> str:
    """Classify two support boxes: 'spacelike', 'a_precedes_b', 'b_precedes_a', 'overlap'.

    Conservative: uses box corners, so 'spacelike' is certified while the
    precedence verdicts assume any causal connection that the boxes allow.
    """
    if a.dim != b.dim:
        raise ValueError("boxes have different spatial dimension")
    gaps = []
    for lo1, hi1, lo2, hi2 in zip(a.xmin, a.xmax, b.xmin, b.xmax):
        gaps.append(max(0.0, lo2 - hi1, lo1 - hi2))
    min_dist = math.sqrt(sum(g * g for g in gaps))
    max_dt = max(abs(a.tmax - b.tmin), abs(b.tmax - a.tmin), abs(a.tmin - b.tmax), abs(b.tmin - a.tmax))
    if min_dist > max_dt:
        return "spacelike"
    if a.tmax <= b.tmin:
        return "a_precedes_b"
    if b.tmax <= a.tmin:
        return "b_precedes_a"
    return "overlap"


def causal_margin(a: SupportBox, b: SupportBox) -> float:
    """Lightcone clearance: positive when the boxes are strictly spacelike."""
    gaps = []
    for lo1, hi1, lo2, hi2 in zip(a.xmin, a.xmax, b.xmin, b.xmax):
        gaps.append(max(0.0, lo2 - hi1, lo1 - hi2))
    min_dist = math.sqrt(sum(g * g for g in gaps))
    max_dt = max(abs(a.tmax - b.tmin), abs(b.tmax - a.tmin), abs(a.tmin - b.tmax), abs(b.tmin - a.tmax))
    return min_dist - max_dt


# ---------------------------------------------------------------------------
# time windows (causal cuts act on the time profile only)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeWindow:
    """Multiplicative cut weight in time.

    side='past' keeps t below t_cut, side='future' keeps t above.  width w = 0
    is the sharp characteristic split (the future side owns the boundary
    point); w > 0 uses a C^1 raised-cosine ramp on [t_cut - w, t_cut + w].
    """

    t_cut: float
    side: str
    width: float = 0.0

    def weight(self, t):
        t = np.asarray(t, dtype=float)
        w = self.width
        if w == 0.0:
            past = (t < self.t_cut).astype(float)
        else:
            u = np.clip((t - (self.t_cut - w)) / (2.0 * w), 0.0, 1.0)
            past = 0.5 * (1.0 + np.cos(np.pi * u))
        return past if self.side == "past" else 1.0 - past

    def bounds(self) -> tuple[float, float]:
        if self.side == "past":
            return (-math.inf, self.t_cut + self.width)
        return (self.t_cut - self.width, math.inf)


# ---------------------------------------------------------------------------
# separable profiles
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = leggauss(160)
_GL_NODES_HI, _GL_WEIGHTS_HI = leggauss(220)


def _fixed_quad(fn, lo: float, hi: float, hi_order: bool = False):
    nodes, weights = (_GL_NODES_HI, _GL_WEIGHTS_HI) if hi_order else (_GL_NODES, _GL_WEIGHTS)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    return half * np.sum(weights * fn(mid + half * nodes))


def _erf_scaled(x: float, beta: float) -> complex:
    """F(x; beta) = exp(-beta^2/4) erf(x - i beta/2), overflow-stable.

    Via the Faddeeva function: F = exp(-beta^2/4) - exp(-x^2 + i beta x) w(beta/2 + i x),
    with the x < 0 branch reflected so w is only evaluated in its stable
    half-plane.  Needed because sharp time cuts give 1/k0 spectral tails whose
    naive erf form overflows at |k0| sigma ~ 38.
    """
    if x == math.inf:
        return complex(math.exp(-0.25 * beta * beta))
    if x == -math.inf:
        return complex(-math.exp(-0.25 * beta * beta))
    if x < 0.0:
        return -_erf_scaled(-x, -beta)
    zeta = 0.5 * beta + 1j * x
    return complex(math.exp(-0.25 * beta * beta) - np.exp(-x * x + 1j * beta * x) * wofz(zeta))


@dataclass(frozen=True)
class TimeProfile:
    """Profile in t: gaussian or bump base, times optional cut windows."""

    base: str  # 'gauss' | 'bump'
    center: float
    scale: float  # sigma_t for gauss, support radius for bump
    windows: tuple[TimeWindow, ...] = ()

    def value(self, t):
        t = np.asarray(t, dtype=float)
        if self.base == "gauss":
            v = np.exp(-((t - self.center) ** 2) / (2.0 * self.scale**2))
        else:
            r = (t - self.center) / self.scale
            v = np.zeros_like(t, dtype=float)
            inside = np.abs(r) < 1.0
            rr = r[inside] if v.shape else (r if abs(r) < 1 else None)
            if v.shape:
                v[inside] = np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
            else:
                v = math.exp(1.0 - 1.0 / (1.0 - r * r)) if abs(r) < 1.0 else 0.0
                v = np.asarray(v)
        for w in self.windows:
            v = v * w.weight(t)
        return v

    def bounds(self, n_sigma: float = DEFAULT_N_SIGMA) -> tuple[float, float]:
        if self.base == "gauss":
            lo, hi = self.center - n_sigma * self.scale, self.center + n_sigma * self.scale
        else:
            lo, hi = self.center - self.scale, self.center + self.scale
        for w in self.windows:
            wlo, whi = w.bounds()
            lo, hi = max(lo, wlo), min(hi, whi)
        return (lo, min(lo, hi) if hi < lo else hi) if hi < lo else (lo, hi)

    @property
    def sharp_windows_only(self) -> bool:
        return all(w.width == 0.0 for w in self.windows)

    def window_interval(self) -> tuple[float, float]:
        lo, hi = -math.inf, math.inf
        for w in self.windows:
            wlo, whi = w.bounds()
            lo, hi = max(lo, wlo), min(hi, whi)
        return lo, hi

    def l1(self) -> float:
        if self.base == "gauss" and not self.windows:
            return _SQRT2PI * self.scale
        if self.base == "gauss" and self.sharp_windows_only:
            lo, hi = self.window_interval()
            s = self.scale
            a = -math.inf if lo == -math.inf else (lo - self.center) / (s * math.sqrt(2))
            b = math.inf if hi == math.inf else (hi - self.center) / (s * math.sqrt(2))
            ea = -1.0 if a == -math.inf else erf(a)
            eb = 1.0 if b == math.inf else erf(b)
            return 0.5 * _SQRT2PI * s * (eb - ea)
        lo, hi = self.bounds()
        if hi <= lo:
            return 0.0
        return float(_fixed_quad(self.value, lo, hi, hi_order=True))

    def fourier(self, k0) -> complex:
        """integral T(t) exp(i k0 t) dt."""
        k0 = complex(k0)
        if self.base == "gauss" and not self.windows:
            s = self.scale
            return _SQRT2PI * s * np.exp(1j * k0 * self.center - 0.5 * (k0 * s) ** 2)
        if self.base == "gauss" and self.sharp_windows_only:
            lo, hi = self.window_interval()
            s = self.scale
            # integral_lo^hi exp(-(t-c)^2/(2s^2) + i k0 t) dt
            #   = sqrt(2) s e^{i k0 c} (sqrt(pi)/2) [F(u; beta)]_{ua}^{ub},
            # u = (t-c)/(sqrt(2) s), beta = sqrt(2) s k0, F the stable scaled erf
            k0r = float(np.real(k0))
            beta = math.sqrt(2.0) * s * k0r
            ua = -math.inf if lo == -math.inf else (lo - self.center) / (math.sqrt(2.0) * s)
            ub = math.inf if hi == math.inf else (hi - self.center) / (math.sqrt(2.0) * s)
            val = _erf_scaled(ub, beta) - _erf_scaled(ua, beta)
            return math.sqrt(2.0) * s * np.exp(1j * k0r * self.center) * 0.5 * math.sqrt(math.pi) * val
        lo, hi = self.bounds()
        if hi <= lo:
            return 0.0 + 0.0j
        if self.base == "bump" and abs(np.real(k0)) * self.scale > _BUMP_FT_KMAX:
            return 0.0 + 0.0j
        re = _fixed_quad(lambda t: self.value(t) * np.cos(np.real(k0) * t), lo, hi, hi_order=True)
        im = _fixed_quad(lambda t: self.value(t) * np.sin(np.real(k0) * t), lo, hi, hi_order=True)
        return complex(re, im)

    def corr(self, other: "TimeProfile", tau: float) -> float:
        """integral self(t) * other(t + tau) dt."""
        if (
            self.base == "gauss"
            and other.base == "gauss"
            and self.sharp_windows_only
            and other.sharp_windows_only
        ):
            s1, s2 = self.scale, other.scale
            c1, c2 = self.center, other.center - tau
            # product gaussian: exp(-(t-c1)^2/2s1^2 - (t-c2)^2/2s2^2)
            s2sum = s1 * s1 + s2 * s2
            amp = math.exp(-((c1 - c2) ** 2) / (2.0 * s2sum))
            sprod = s1 * s2 / math.sqrt(s2sum)
            cbar = (c1 * s2 * s2 + c2 * s1 * s1) / s2sum
            lo1, hi1 = self.window_interval()
            lo2, hi2 = other.window_interval()
            lo = max(lo1, -math.inf if lo2 == -math.inf else lo2 - tau)
            hi = min(hi1, math.inf if hi2 == math.inf else hi2 - tau)
            if hi <= lo:
                return 0.0
            a = -math.inf if lo == -math.inf else (lo - cbar) / (sprod * math.sqrt(2))
            b = math.inf if hi == math.inf else (hi - cbar) / (sprod * math.sqrt(2))
            ea = -1.0 if a == -math.inf else erf(a)
            eb = 1.0 if b == math.inf else erf(b)
            return float(amp * 0.5 * _SQRT2PI * sprod * (eb - ea))
        lo1, hi1 = self.bounds()
        lo2, hi2 = other.bounds()
        lo = max(lo1, lo2 - tau)
        hi = min(hi1, hi2 - tau)
        if hi <= lo:
            return 0.0
        return float(_fixed_quad(lambda t: self.value(t) * other.value(t + tau), lo, hi, hi_order=True))

    def corr_support(self, other: "TimeProfile") -> tuple[float, float]:
        lo1, hi1 = self.bounds()
        lo2, hi2 = other.bounds()
        return (lo2 - hi1, hi2 - lo1)


@dataclass(frozen=True)
class SpaceProfile:
    """Isotropic spatial profile around a center, d in {1, 3}."""

    base: str  # 'gauss' | 'bump'
    center: tuple[float, ...]
    scale: float

    @property
    def dim(self) -> int:
        return len(self.center)

    def value(self, x) -> float:
        dx = np.asarray(x, dtype=float) - np.asarray(self.center)
        r2 = float(np.dot(dx, dx))
        if self.base == "gauss":
            return math.exp(-r2 / (2.0 * self.scale**2))
        rr = r2 / self.scale**2
        if rr >= 1.0:
            return 0.0
        return math.exp(1.0 - 1.0 / (1.0 - rr))

    def radius(self, n_sigma: float = DEFAULT_N_SIGMA) -> float:
        return n_sigma * self.scale if self.base == "gauss" else self.scale

    def l1(self) -> float:
        d = self.dim
        if self.base == "gauss":
            return (_SQRT2PI * self.scale) ** d
        if d == 1:
            return self.scale * _bump_l1_1d()
        return self.scale**3 * _bump_l1_3d()

    def envelope(self, k: float) -> float:
        """Radial transform: integral S(x) exp(-i k . x) d^dx without the center phase."""
        if self.base == "gauss":
            d = self.dim
            return (_SQRT2PI * self.scale) ** d * math.exp(-0.5 * (k * self.scale) ** 2)
        if self.dim == 1:
            return self.scale * _bump_ft_1d(k * self.scale)
        return self.scale**3 * _bump_ft_3d(k * self.scale)


@lru_cache(maxsize=None)
def _bump_l1_1d() -> float:
    return float(_fixed_quad(lambda u: np.exp(1.0 - 1.0 / (1.0 - u * u)), -0.999999999, 0.999999999, True))


@lru_cache(maxsize=None)
def _bump_l1_3d() -> float:
    return float(
        4.0
        * math.pi
        * _fixed_quad(lambda u: u * u * np.exp(1.0 - 1.0 / (1.0 - u * u)), 0.0, 0.999999999, True)
    )


_BUMP_FT_KMAX = 250.0  # beyond this |B(kappa)| < e^{-2 sqrt(2 kappa)} ~ 4e-20: below float relevance


def _bump_ft_1d(kappa: float) -> float:
    """integral_{-1}^{1} exp(1 - 1/(1-u^2)) cos(kappa u) du."""
    kappa = abs(float(kappa))
    if kappa > _BUMP_FT_KMAX:
        return 0.0
    return float(
        _fixed_quad(
            lambda u: np.exp(1.0 - 1.0 / (1.0 - u * u)) * np.cos(kappa * u),
            -0.999999999,
            0.999999999,
            True,
        )
    )


def _bump_ft_3d(kappa: float) -> float:
    """integral exp(1-1/(1-r^2)) e^{-i k.x} d^3x on the unit ball = 4 pi int r^2 b(r) sinc(kappa r)."""
    kappa = abs(float(kappa))
    if kappa > _BUMP_FT_KMAX:
        return 0.0
    return float(
        4.0
        * math.pi
        * _fixed_quad(
            lambda u: u * u * np.exp(1.0 - 1.0 / (1.0 - u * u)) * np.sinc(kappa * u / np.pi),
            0.0,
            0.999999999,
            True,
        )
    )


@dataclass(frozen=True)
class Atom:
    """coef * T(t) * S(x): the terminal separable piece of any test function."""

    coef: float
    tprof: TimeProfile
    sprof: SpaceProfile

    @property
    def dim(self) -> int:
        return self.sprof.dim

    def value(self, t: float, x) -> float:
        return self.coef * float(self.tprof.value(t)) * self.sprof.value(x)

    def fourier(self, k0: float, kvec) -> complex:
        kvec = np.asarray(kvec, dtype=float)
        kmag = float(np.linalg.norm(kvec))
        phase = np.exp(-1j * float(np.dot(kvec, self.sprof.center)))
        return self.coef * self.tprof.fourier(k0) * self.sprof.envelope(kmag) * phase

    def l1(self) -> float:
        return abs(self.coef) * self.tprof.l1() * self.sprof.l1()

    def integral(self) -> float:
        return self.coef * self.tprof.l1() * self.sprof.l1()


# ---------------------------------------------------------------------------
# public test-function tree
# ---------------------------------------------------------------------------


class TestFunction:
    """Base class; immutable value objects, safe to share across workers."""

    kind: str = "abstract"

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def atoms(self) -> tuple[Atom, ...]:
        raise NotImplementedError

    def evaluate(self, p: SpacetimePoint) -> float:
        if p.dim != self.dim:
            raise ValueError(f"point dimension {p.dim} != function dimension {self.dim}")
        return sum(a.value(p.t, p.x) for a in self.atoms())

    def __call__(self, t: float, x) -> float:
        return self.evaluate(SpacetimePoint(float(t), tuple(np.atleast_1d(x).astype(float))))

    def fourier(self, k0: float, kvec) -> complex:
        """ftilde(k0, k) = integral f exp(i(k0 t - k.x)); analytic where possible."""
        kvec = np.atleast_1d(np.asarray(kvec, dtype=float))
        if len(kvec) != self.dim:
            raise ValueError("momentum dimension mismatch")
        return sum(a.fourier(k0, kvec) for a in self.atoms())

    def support(self, n_sigma: float = DEFAULT_N_SIGMA) -> SupportBox:
        boxes = []
        total_l1 = sum(a.l1() for a in self.atoms()) or 1.0
        eps = 0.0
        for a in self.atoms():
            tlo, thi = a.tprof.bounds(n_sigma)
            r = a.sprof.radius(n_sigma)
            xmin = tuple(c - r for c in a.sprof.center)
            xmax = tuple(c + r for c in a.sprof.center)
            if a.tprof.base == "gauss" or a.sprof.base == "gauss":
                # stranded tail of a product gaussian: one erfc term per axis
                tail = (self.dim + 1) * math.erfc(n_sigma / math.sqrt(2.0))
            else:
                tail = 0.0
            eps += tail * a.l1() / total_l1
            boxes.append(SupportBox(tlo, thi, xmin, xmax, 0.0))
        box = boxes[0]
        for b in boxes[1:]:
            box = SupportBox.union(box, b)
        return SupportBox(box.tmin, box.tmax, box.xmin, box.xmax, eps)

    def l1(self) -> float:
        return sum(a.l1() for a in self.atoms())

    def integral(self) -> float:
        """integral f dVol (signed)."""
        return sum(a.integral() for a in self.atoms())

    def cut(self, t_cut: float, width: float = 0.0) -> tuple["TestFunction", "TestFunction"]:
        """Split into (future part, past part) across the hypersurface t = t_cut.

        The pieces re-sum to this function pointwise; width = 0 is the sharp
        characteristic split, width > 0 smooths over [t_cut - w, t_cut + w].
        """
        if width < 0:
            raise ValueError("cut width must be >= 0")
        fut = CutFunction(self, t_cut, "future", width)
        past = CutFunction(self, t_cut, "past", width)
        return fut, past

    # arithmetic sugar
    def __add__(self, other: "TestFunction") -> "TestFunction":
        return SumFunction((self, other))

    def __mul__(self, factor: float) -> "TestFunction":
        return ScaledFunction(self, float(factor))

    __rmul__ = __mul__

    def __neg__(self) -> "TestFunction":
        return ScaledFunction(self, -1.0)

    def __sub__(self, other: "TestFunction") -> "TestFunction":
        return SumFunction((self, ScaledFunction(other, -1.0)))

    def translated(self, dt: float, dx) -> "TestFunction":
        raise NotImplementedError


@dataclass(frozen=True)
class GaussianFunction(TestFunction):
    center_t: float
    center_x: tuple[float, ...]
    sigma_t: float
    sigma_s: float
    amplitude: float = 1.0
    kind = "gaussian"

    def __post_init__(self):
        if self.sigma_t <= 0 or self.sigma_s <= 0:
            raise ValueError("widths must be strictly positive")
        if not math.isfinite(self.amplitude):
            raise ValueError("amplitude must be finite")

    @property
    def dim(self) -> int:
        return len(self.center_x)

    def atoms(self) -> tuple[Atom, ...]:
        return (
            Atom(
                self.amplitude,
                TimeProfile("gauss", self.center_t, self.sigma_t),
                SpaceProfile("gauss", self.center_x, self.sigma_s),
            ),
        )

    def translated(self, dt: float, dx) -> "GaussianFunction":
        dx = tuple(np.atleast_1d(np.asarray(dx, dtype=float)))
        return GaussianFunction(
            self.center_t + dt,
            tuple(c + d for c, d in zip(self.center_x, dx)),
            self.sigma_t,
            self.sigma_s,
            self.amplitude,
        )


@dataclass(frozen=True)
class BumpFunction(TestFunction):
    center_t: float
    center_x: tuple[float, ...]
    radius_t: float
    radius_s: float
    amplitude: float = 1.0
    kind = "bump"

    def __post_init__(self):
        if self.radius_t <= 0 or self.radius_s <= 0:
            raise ValueError("radii must be strictly positive")

    @property
    def dim(self) -> int:
        return len(self.center_x)

    def atoms(self) -> tuple[Atom, ...]:
        return (
            Atom(
                self.amplitude,
                TimeProfile("bump", self.center_t, self.radius_t),
                SpaceProfile("bump", self.center_x, self.radius_s),
            ),
        )

    def translated(self, dt: float, dx) -> "BumpFunction":
        dx = tuple(np.atleast_1d(np.asarray(dx, dtype=float)))
        return BumpFunction(
            self.center_t + dt,
            tuple(c + d for c, d in zip(self.center_x, dx)),
            self.radius_t,
            self.radius_s,
            self.amplitude,
        )


@dataclass(frozen=True)
class SumFunction(TestFunction):
    children: tuple[TestFunction, ...]
    kind = "sum"

    @property
    def dim(self) -> int:
        dims = {c.dim for c in self.children}
        if len(dims) != 1:
            raise ValueError("summands have mixed dimensions")
        return dims.pop()

    def atoms(self) -> tuple[Atom, ...]:
        out: list[Atom] = []
        for c in self.children:
            out.extend(c.atoms())
        return tuple(out)

    def translated(self, dt, dx):
        return SumFunction(tuple(c.translated(dt, dx) for c in self.children))


@dataclass(frozen=True)
class ScaledFunction(TestFunction):
    child: TestFunction
    factor: float
    kind = "scaled"

    @property
    def dim(self) -> int:
        return self.child.dim

    def atoms(self) -> tuple[Atom, ...]:
        return tuple(Atom(a.coef * self.factor, a.tprof, a.sprof) for a in self.child.atoms())

    def translated(self, dt, dx):
        return ScaledFunction(self.child.translated(dt, dx), self.factor)


@dataclass(frozen=True)
class CutFunction(TestFunction):
    child: TestFunction
    t_cut: float
    side: str  # 'future' | 'past'
    width: float = 0.0
    kind = "cut"

    def __post_init__(self):
        if self.side not in ("future", "past"):
            raise ValueError("side must be 'future' or 'past'")
        if self.width < 0:
            raise ValueError("cut width must be >= 0")

    @property
    def dim(self) -> int:
        return self.child.dim

    def atoms(self) -> tuple[Atom, ...]:
        win = TimeWindow(self.t_cut, "past" if self.side == "past" else "future", self.width)
        out = []
        for a in self.child.atoms():
            tp = a.tprof
            out.append(Atom(a.coef, TimeProfile(tp.base, tp.center, tp.scale, tp.windows + (win,)), a.sprof))
        return tuple(out)

    def translated(self, dt, dx):
        return CutFunction(self.child.translated(dt, dx), self.t_cut + dt, self.side, self.width)


def gaussian(center_t: float, center_x, sigma_t: float, sigma_s: float, amplitude: float = 1.0) -> GaussianFunction:
    cx = tuple(np.atleast_1d(np.asarray(center_x, dtype=float)))
    return GaussianFunction(float(center_t), cx, float(sigma_t), float(sigma_s), float(amplitude))


def bump(center_t: float, center_x, radius_t: float, radius_s: float, amplitude: float = 1.0) -> BumpFunction:
    cx = tuple(np.atleast_1d(np.asarray(center_x, dtype=float)))
    return BumpFunction(float(center_t), cx, float(radius_t), float(radius_s), float(amplitude))


def l1_normalized_gaussian(center_t: float, center_x, sigma_t: float, sigma_s: float) -> GaussianFunction:
    """Gaussian with unit spacetime integral (used by the scaling experiments)."""
    cx = tuple(np.atleast_1d(np.asarray(center_x, dtype=float)))
    d = len(cx)
    amp = 1.0 / ((_SQRT2PI * sigma_t) * (_SQRT2PI * sigma_s) ** d)
    return GaussianFunction(float(center_t), cx, float(sigma_t), float(sigma_s), amp)
