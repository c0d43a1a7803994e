"""Brute-force oracle: explicit truncated-oscillator matrices for the CCR algebra.

Independent verification backend for ccr: the generators are realised as

    phi_j = sum_k [ V_{jk} a_k + conj(V_{jk}) a_k^dag ] + mu_j,

where V V^dag = Wsym + (i/2) Delta (the state's two-point matrix, Hermitian
PSD exactly when the quasi-free state is physical) and the state is the Fock
vacuum of the K <= n modes.  Mode truncation at N levels; expectation values
are evaluated matrix-free on low-rank tensor kets (outer products of per-mode
vectors), so nothing bigger than N x N is ever materialised.
"""

from __future__ import annotations

import math
from itertools import permutations

import numpy as np
from scipy.linalg import expm

from .ccr import AlgebraElement, QuasiFreeState, _as_kinematics, _poly_shift

__all__ = ["FockOracle", "fock_oracle"]


def _multiset_orderings(e: tuple) -> list[tuple[int, ...]]:
    """Distinct orderings of the generator factors encoded by exponents e."""
    letters = []
    for j, k in enumerate(e):
        letters.extend([j] * k)
    return sorted(set(permutations(letters)))


class FockOracle:
    """Matrix realisation of (Delta, state) on truncated oscillators."""

    def __init__(self, kin, state: QuasiFreeState, truncation: int = 60, mode_tol: float = 1e-12, pos_tol: float = 1e-8):
        if truncation < 4 or truncation > 200:
            raise ValueError("truncation out of the supported range")
        kin = _as_kinematics(kin)
        D = kin.matrix
        n = kin.n
        if n > 4:
            raise ValueError("oracle supports at most 4 generators")
        if state.n != n:
            raise ValueError("state size mismatch")
        M = np.asarray(state.wsym) + 0.5j * D
        lam, U = np.linalg.eigh(M)
        if lam.min() < -pos_tol:
            raise ValueError(f"kinematics unrealisable: two-point matrix eigenvalue {lam.min():.3e}")
        keep = lam > max(mode_tol * max(lam.max(), 1.0), 0.0)
        self.V = (U[:, keep] * np.sqrt(np.clip(lam[keep], 0.0, None))).astype(complex)  # n x K
        self.K = int(self.V.shape[1])
        self.n = n
        self.N = truncation
        self.mu = np.asarray(state.mu, dtype=float)
        self.kin = kin
        a = np.diag(np.sqrt(np.arange(1, truncation)), 1).astype(complex)
        self._a = a
        self._adag = a.conj().T
        # per-generator, per-mode single-mode operator V a + conj(V) a^dag
        self._mode_ops = [
            [self.V[j, k] * a + np.conj(self.V[j, k]) * self._adag for k in range(self.K)]
            for j in range(n)
        ]

    # -- low-rank kets -------------------------------------------------------

    def _vac(self):
        v = np.zeros(self.N, dtype=complex)
        v[0] = 1.0
        return [(1.0 + 0.0j, [v.copy() for _ in range(self.K)])]

    def _apply_phi(self, j: int, ket):
        out = []
        for c, vecs in ket:
            for k in range(self.K):
                nv = list(vecs)
                nv[k] = self._mode_ops[j][k] @ vecs[k]
                out.append((c, nv))
            if self.mu[j] != 0.0:
                out.append((c * self.mu[j], list(vecs)))
        return out

    def _apply_field(self, coeffs, ket):
        """Apply phi(sum_j coeffs_j f_j) using one composite mode operator per mode."""
        coeffs = np.asarray(coeffs, dtype=complex)
        cmode = coeffs @ self.V  # length K
        shift = complex(coeffs @ self.mu)
        out = []
        for c, vecs in ket:
            for k in range(self.K):
                op = cmode[k] * self._a + np.conj(cmode[k]) * self._adag
                nv = list(vecs)
                nv[k] = op @ vecs[k]
                out.append((c, nv))
            if shift != 0.0:
                out.append((c * shift, list(vecs)))
        return out

    def _displacements(self, alpha):
        """Per-mode unitaries of exp(i phi(alpha.f)) and the mean phase."""
        alpha = np.asarray(alpha, dtype=float)
        cmode = alpha @ self.V
        mats = [expm(1j * (cmode[k] * self._a + np.conj(cmode[k]) * self._adag)) for k in range(self.K)]
        phase = np.exp(1j * float(alpha @ self.mu))
        return mats, phase

    def _apply_weyl(self, alpha, ket):
        mats, phase = self._displacements(alpha)
        out = []
        for c, vecs in ket:
            out.append((c * phase, [mats[k] @ vecs[k] for k in range(self.K)]))
        return out

    def _vac_overlap(self, ket) -> complex:
        total = 0.0j
        for c, vecs in ket:
            prod = c
            for v in vecs:
                prod *= v[0]
            total += prod
        return complex(total)

    # -- public evaluations ----------------------------------------------------

    def expectation(self, X: AlgebraElement) -> complex:
        """<X> by explicit matrices: Op(c x^e e^{ia.x}) = c W(a) S[(phi - Dla/2)^e]."""
        if X.kin.delta != self.kin.delta:
            raise ValueError("element lives over different kinematics")
        D = self.kin.matrix
        total = 0.0j
        for (a, e), c in X.terms.items():
            av = np.asarray(a)
            shift = tuple(-0.5 * (D @ av))
            poly = _poly_shift({e: 1.0 + 0.0j}, shift) if sum(e) else {e: 1.0 + 0.0j}
            term_val = 0.0j
            for e2, cm in poly.items():
                if sum(e2) == 0:
                    mono_val = 1.0 + 0.0j
                    ket = self._vac()
                else:
                    orderings = _multiset_orderings(e2)
                    acc = 0.0j
                    for order in orderings:
                        ket = self._vac()
                        for j in reversed(order):
                            ket = self._apply_phi(j, ket)
                        if any(x != 0.0 for x in a):
                            ket = self._apply_weyl(a, ket)
                        acc += self._vac_overlap(ket)
                    term_val += cm * acc / len(orderings)
                    continue
                if any(x != 0.0 for x in a):
                    ket = self._apply_weyl(a, ket)
                term_val += cm * mono_val * self._vac_overlap(ket)
            total += c * term_val
        return complex(total)

    def expectation_of_sequence(self, factors) -> complex:
        """<F_1 F_2 ... F_m> for primitive factors, evaluated as raw matrix products.

        Factors: ("field", coeff_vector) for phi(sum c_j f_j) or
        ("weyl", alpha) for exp(i phi(alpha.f)).
        """
        ket = self._vac()
        for kind, arg in reversed(list(factors)):
            if kind == "field":
                ket = self._apply_field(arg, ket)
            elif kind == "weyl":
                ket = self._apply_weyl(arg, ket)
            else:
                raise ValueError(f"unknown factor kind {kind!r}")
        return self._vac_overlap(ket)

    def weyl_matrix(self, alpha) -> np.ndarray:
        """Dense matrix of exp(i phi(alpha.f)) (small K only)."""
        if self.N**self.K > 20000:
            raise ValueError("dense Weyl matrix too large at this truncation")
        mats, phase = self._displacements(alpha)
        out = np.array([[phase]], dtype=complex)
        for m in mats:
            out = np.kron(out, m)
        return out


def fock_oracle(
    kin,
    X: AlgebraElement,
    state: QuasiFreeState,
    truncation: int = 60,
    stability_step: int = 10,
) -> tuple[complex, float]:
    """Expectation of X via explicit matrices, with a truncation-delta estimate.

    Returns (value at N, |value at N - value at N + stability_step|).
    """
    v1 = FockOracle(kin, state, truncation).expectation(X)
    v2 = FockOracle(kin, state, truncation + stability_step).expectation(X)
    return v2, abs(v2 - v1)
