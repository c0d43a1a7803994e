"""Closed-form calculus for one-dimensional complex Gaussian exponentials.

Everything the pointer-measurement kernels need (Fourier multipliers,
convolutions, L2 inner products, moment generating derivatives) stays inside
the family  g(u) = exp(a + b*u + c*u^2)  with complex a, b, c and Re(c) < 0.
The closed forms here anchor the grid-based (FFT) path at machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["GaussianExp", "GridFunction1D"]

_SQRT2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class GaussianExp:
    """g(u) = exp(a + b u + c u^2) with Re(c) < 0 (or c purely imaginary chirp)."""

    a: complex
    b: complex
    c: complex

    # -- constructors ------------------------------------------------------

    @staticmethod
    def wavepacket(sigma: float, center: float = 0.0, momentum: float = 0.0) -> "GaussianExp":
        """L2-normalised packet exp(-(u-center)^2/(2 sigma^2) + i momentum u).

        |g|^2 integrates to one; |g|^2 has standard deviation sigma/sqrt(2).
        """
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        c = -1.0 / (2.0 * sigma**2)
        b = -2.0 * c * center + 1j * momentum
        a = c * center**2 - 0.25 * np.log(np.pi * sigma**2)
        return GaussianExp(complex(a), complex(b), complex(c))

    @staticmethod
    def density(sigma: float, center: float = 0.0) -> "GaussianExp":
        """Normalised probability density exp(-(u-center)^2/(2 sigma^2))/(sqrt(2 pi) sigma)."""
        c = -1.0 / (2.0 * sigma**2)
        b = -2.0 * c * center
        a = c * center**2 - np.log(_SQRT2PI * sigma)
        return GaussianExp(complex(a), complex(b), complex(c))

    # -- evaluation --------------------------------------------------------

    def __call__(self, u):
        u = np.asarray(u, dtype=complex)
        return np.exp(self.a + self.b * u + self.c * u * u)

    # -- algebra -----------------------------------------------------------

    def __mul__(self, other):
        if isinstance(other, GaussianExp):
            return GaussianExp(self.a + other.a, self.b + other.b, self.c + other.c)
        z = complex(other)
        if z == 0:
            raise ValueError("cannot scale GaussianExp by zero")
        return GaussianExp(self.a + np.log(z), self.b, self.c)

    __rmul__ = __mul__

    def conj(self) -> "GaussianExp":
        return GaussianExp(np.conj(self.a), np.conj(self.b), np.conj(self.c))

    def shift(self, u0: complex) -> "GaussianExp":
        """g(u - u0)."""
        return GaussianExp(
            self.a + self.b * (-u0) + self.c * u0 * u0,
            self.b - 2.0 * self.c * u0,
            self.c,
        )

    def phase_mul(self, k: complex) -> "GaussianExp":
        """g(u) * exp(i k u)."""
        return GaussianExp(self.a, self.b + 1j * k, self.c)

    def chirp(self, alpha: complex) -> "GaussianExp":
        """g(u) * exp(alpha u^2); caller keeps Re(c + alpha) <= 0."""
        return GaussianExp(self.a, self.b, self.c + alpha)

    # -- integrals ---------------------------------------------------------

    def integral(self) -> complex:
        """Integral of g over the real line."""
        c = self.c
        if c.real >= 0:
            raise ValueError("integral diverges: Re(c) >= 0")
        return np.exp(self.a - self.b**2 / (4.0 * c)) * np.sqrt(-np.pi / c)

    def fourier(self) -> "GaussianExp":
        """Unitary transform ghat(p) = (2 pi)^{-1/2} integral g(u) exp(-i p u) du."""
        c = self.c
        if c.real >= 0 and abs(c.imag) < 1e-300:
            raise ValueError("fourier undefined: Re(c) >= 0")
        a2 = self.a - self.b**2 / (4.0 * c) + 0.5 * np.log(-1.0 / (2.0 * c))
        b2 = 1j * self.b / (2.0 * c)
        c2 = 1.0 / (4.0 * c)
        return GaussianExp(a2, b2, c2)

    def inverse_fourier(self) -> "GaussianExp":
        """Unitary inverse: g(u) = (2 pi)^{-1/2} integral ghat(p) exp(+i p u) dp."""
        c = self.c
        a2 = self.a - self.b**2 / (4.0 * c) + 0.5 * np.log(-1.0 / (2.0 * c))
        b2 = -1j * self.b / (2.0 * c)
        c2 = 1.0 / (4.0 * c)
        return GaussianExp(a2, b2, c2)

    def convolve(self, other: "GaussianExp") -> "GaussianExp":
        """(g * h)(u) = integral g(s) h(u - s) ds."""
        fw = self.fourier() * other.fourier()
        return (fw * complex(_SQRT2PI)).inverse_fourier()

    def abs_squared(self) -> "GaussianExp":
        return self.conj() * self

    def l2_norm_squared(self) -> float:
        return float(self.abs_squared().integral().real)

    def inner(self, other: "GaussianExp") -> complex:
        """<self, other> = integral conj(self) other."""
        return (self.conj() * other).integral()

    # -- shape -------------------------------------------------------------

    def center(self) -> float:
        """Mean of |g|^2 (assumes normalisable)."""
        h = self.abs_squared()
        return float((-h.b / (2.0 * h.c)).real)

    def width(self) -> float:
        """Standard deviation of |g|^2."""
        h = self.abs_squared()
        var = -1.0 / (2.0 * h.c.real)
        return float(np.sqrt(var))

    def derivatives(self, u0: complex, order: int) -> list[complex]:
        """[g(u0), g'(u0), ..., g^(order)(u0)] via the polynomial recursion."""
        # maintain polynomial q_k with g^(k) = q_k(u) g(u); q_{k+1} = q_k' + (b+2cu) q_k
        out = []
        g0 = complex(np.exp(self.a + self.b * u0 + self.c * u0 * u0))
        poly = np.zeros(order + 2, dtype=complex)
        poly[0] = 1.0
        lin = np.array([self.b, 2.0 * self.c], dtype=complex)
        for k in range(order + 1):
            out.append(complex(np.polynomial.polynomial.polyval(u0, poly)) * g0)
            dpoly = np.polynomial.polynomial.polyder(poly)
            prod = np.polynomial.polynomial.polymul(lin, poly)  # may trim trailing zeros
            nlen = max(len(prod), len(dpoly), order + 2)
            newpoly = np.zeros(nlen, dtype=complex)
            newpoly[: len(prod)] = prod
            newpoly[: len(dpoly)] += dpoly
            poly = newpoly
        return out


class GridFunction1D:
    """Complex samples on a uniform grid, with unitary Fourier transforms.

    The grid has power-of-two length; transforms keep track of the grid
    offset so phases are exact, and an aliasing monitor reports the mass
    stranded in the outer band.
    """

    def __init__(self, u0: float, du: float, values):
        values = np.asarray(values, dtype=complex)
        n = len(values)
        if n & (n - 1):
            raise ValueError("grid length must be a power of two")
        self.u0 = float(u0)
        self.du = float(du)
        self.values = values

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def grid(self) -> np.ndarray:
        return self.u0 + self.du * np.arange(self.n)

    @staticmethod
    def sample(fn, center: float, halfwidth: float, n: int = 2**14) -> "GridFunction1D":
        u0 = center - halfwidth
        du = 2.0 * halfwidth / n
        g = u0 + du * np.arange(n)
        return GridFunction1D(u0, du, fn(g))

    def l2_norm_squared(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.du)

    def normalized(self) -> "GridFunction1D":
        nrm = np.sqrt(self.l2_norm_squared())
        if nrm == 0:
            raise ValueError("cannot normalise the zero function")
        return GridFunction1D(self.u0, self.du, self.values / nrm)

    def fourier(self) -> "GridFunction1D":
        """ghat(p_j) = (2 pi)^{-1/2} integral g(u) exp(-i p u) du on the dual grid."""
        n, du = self.n, self.du
        p = 2.0 * np.pi * np.fft.fftfreq(n, d=du)
        raw = np.fft.fft(self.values) * du / _SQRT2PI
        vals = raw * np.exp(-1j * p * self.u0)
        order = np.argsort(np.fft.fftshift(p), kind="stable")
        p_sorted = np.fft.fftshift(p)
        v_sorted = np.fft.fftshift(vals)
        dp = 2.0 * np.pi / (n * du)
        out = GridFunction1D(p_sorted[0], dp, v_sorted)
        del order
        return out

    def inverse_fourier(self) -> "GridFunction1D":
        """Inverse of :meth:`fourier` (up to grid duality)."""
        n, dp = self.n, self.du
        u = 2.0 * np.pi * np.fft.fftfreq(n, d=dp)
        raw = np.fft.ifft(self.values) * n * dp / _SQRT2PI
        vals = raw * np.exp(1j * u * self.u0)
        u_sorted = np.fft.fftshift(u)
        v_sorted = np.fft.fftshift(vals)
        duu = 2.0 * np.pi / (n * dp)
        return GridFunction1D(u_sorted[0], duu, v_sorted)

    def edge_band_fraction(self, band: float = 0.1) -> float:
        """Fraction of the squared mass in the outer ``band`` of the grid."""
        m = int(self.n * band / 2)
        w = np.abs(self.values) ** 2
        total = np.sum(w)
        if total == 0:
            return 0.0
        return float((np.sum(w[:m]) + np.sum(w[-m:])) / total)

    def interp(self, x):
        """Linear interpolation of real and imaginary parts."""
        g = self.grid
        re = np.interp(x, g, self.values.real, left=0.0, right=0.0)
        im = np.interp(x, g, self.values.imag, left=0.0, right=0.0)
        return re + 1j * im
