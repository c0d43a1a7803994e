"""Exact symbolic calculus for the finite CCR algebra over phi(f_1)..phi(f_n).

The commutators [phi_i, phi_j] = i Delta_ij are central, so every operator the
measurement model needs lives in the span of

    (complex coefficient) x (symmetric-ordered monomial in the phi_j)
                          x (single Weyl factor exp(i phi(a . f))).

Elements are stored as Weyl symbols: the term (c, e, a) stands for the Weyl
quantisation of c * x^e * exp(i a.x).  Operator multiplication is the Moyal
star product, which is exact (finite) on this class:

    (P e_a) * (Q e_b) = exp(-i/2 a.Delta b) *
        [ P(. - Dla/2) *_M Q(. + Dlb/2) ](x + Dl(a - b)/2) * e_{a+b},

with (Dl v)_j = sum_k Delta_jk v_k and *_M the polynomial Moyal product.
Quasi-free expectations reduce to Gaussian moments of the symbol:
E[Op(u)] = E_{N(mu, Wsym)}[u], evaluated by exact finite recursions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Kinematics",
    "QuasiFreeState",
    "AlgebraElement",
    "weyl_product",
    "adjoint_linear",
    "adjoint_series",
    "expectation",
    "AdjointSeriesError",
]

MERGE_TOL = 1e-12  # displacement merge tolerance in canonical form
COEFF_TOL = 1e-10  # coefficient tolerance for canonical-form equality


class AdjointSeriesError(RuntimeError):
    """The nested-commutator series did not terminate within max_depth."""


@dataclass(frozen=True)
class Kinematics:
    """Commutator matrix for a generator list: [phi_i, phi_j] = i Delta[i, j].

    Any object with an ``n x n`` antisymmetric ``Delta`` works (in particular
    propagator.KinematicData); this wrapper exists for synthetic algebras.
    """

    delta: tuple[tuple[float, ...], ...]

    @staticmethod
    def from_matrix(D) -> "Kinematics":
        D = np.asarray(D, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise ValueError("Delta must be square")
        if not np.allclose(D, -D.T, atol=1e-10):
            raise ValueError("Delta must be antisymmetric")
        D = 0.5 * (D - D.T)
        return Kinematics(tuple(tuple(float(x) for x in row) for row in D))

    @property
    def n(self) -> int:
        return len(self.delta)

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.delta, dtype=float)


def _as_kinematics(kin) -> Kinematics:
    if isinstance(kin, Kinematics):
        return kin
    return Kinematics.from_matrix(kin.Delta if hasattr(kin, "Delta") else kin)


# ---------------------------------------------------------------------------
# polynomial helpers on exponent dictionaries
# ---------------------------------------------------------------------------


def _poly_mul(P: dict, Q: dict) -> dict:
    out: dict = {}
    for e1, c1 in P.items():
        for e2, c2 in Q.items():
            key = tuple(a + b for a, b in zip(e1, e2))
            out[key] = out.get(key, 0.0j) + c1 * c2
    return out


def _poly_shift(P: dict, s) -> dict:
    """P(x + s) expanded monomial by monomial (s may be complex)."""
    n = len(s)
    out: dict = {}
    for e, c in P.items():
        # expand prod_j (x_j + s_j)^{e_j}
        partial = {tuple([0] * n): c}
        for j, ej in enumerate(e):
            if ej == 0:
                continue
            new: dict = {}
            for k in range(ej + 1):
                binom = math.comb(ej, k)
                sfac = s[j] ** (ej - k) if ej != k else 1.0
                if sfac == 0.0 and ej != k:
                    continue
                for key, cc in partial.items():
                    nk = list(key)
                    nk[j] += k
                    nk = tuple(nk)
                    new[nk] = new.get(nk, 0.0j) + cc * binom * sfac
            partial = new
        for key, cc in partial.items():
            out[key] = out.get(key, 0.0j) + cc
    return {k: v for k, v in out.items() if v != 0.0}


def _poly_moyal(P: dict, Q: dict, D: np.ndarray) -> dict:
    """Moyal product of polynomials: sum_k (i/2)^k/k! Delta-contracted derivatives."""
    out: dict = {}
    pairs = {(e1, e2): c1 * c2 for e1, c1 in P.items() for e2, c2 in Q.items()}
    n = D.shape[0]
    k = 0
    factor = 1.0 + 0.0j
    while pairs:
        for (e1, e2), c in pairs.items():
            key = tuple(a + b for a, b in zip(e1, e2))
            out[key] = out.get(key, 0.0j) + c * factor
        nxt: dict = {}
        for (e1, e2), c in pairs.items():
            for i in range(n):
                if e1[i] == 0:
                    continue
                for j in range(n):
                    if e2[j] == 0 or D[i, j] == 0.0:
                        continue
                    ne1 = list(e1)
                    ne1[i] -= 1
                    ne2 = list(e2)
                    ne2[j] -= 1
                    key = (tuple(ne1), tuple(ne2))
                    nxt[key] = nxt.get(key, 0.0j) + c * D[i, j] * e1[i] * e2[j]
        pairs = nxt
        k += 1
        factor *= 0.5j / k
    return out


# ---------------------------------------------------------------------------
# algebra elements
# ---------------------------------------------------------------------------


class AlgebraElement:
    """Finite sum of (coeff) x (Weyl-ordered monomial) x (Weyl factor).

    Immutable; all operations return new canonicalised values.  Terms are kept
    as {(a, e): coeff} with a the Weyl displacement tuple and e the exponent
    multi-index of the symmetric monomial.
    """

    __slots__ = ("kin", "terms")

    def __init__(self, kin, terms: dict, already_canonical: bool = False):
        self.kin = _as_kinematics(kin)
        self.terms = terms if already_canonical else _canonicalize(terms, self.kin.n)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(kin) -> "AlgebraElement":
        return AlgebraElement(kin, {})

    @staticmethod
    def identity(kin) -> "AlgebraElement":
        k = _as_kinematics(kin)
        zero = tuple([0.0] * k.n)
        ezero = tuple([0] * k.n)
        return AlgebraElement(k, {(zero, ezero): 1.0 + 0.0j})

    @staticmethod
    def scalar(kin, value: complex) -> "AlgebraElement":
        return AlgebraElement.identity(kin) * value

    @staticmethod
    def generator(kin, j: int) -> "AlgebraElement":
        """phi(f_j)."""
        k = _as_kinematics(kin)
        e = [0] * k.n
        e[j] = 1
        return AlgebraElement(k, {(tuple([0.0] * k.n), tuple(e)): 1.0 + 0.0j})

    @staticmethod
    def field(kin, coeffs) -> "AlgebraElement":
        """phi(sum_j coeffs_j f_j)."""
        k = _as_kinematics(kin)
        terms = {}
        for j, c in enumerate(coeffs):
            if c == 0:
                continue
            e = [0] * k.n
            e[j] = 1
            terms[(tuple([0.0] * k.n), tuple(e))] = complex(c)
        return AlgebraElement(k, terms)

    @staticmethod
    def weyl(kin, a) -> "AlgebraElement":
        """exp(i phi(sum_j a_j f_j))."""
        k = _as_kinematics(kin)
        a = tuple(float(x) for x in a)
        if len(a) != k.n:
            raise ValueError("displacement length mismatch")
        return AlgebraElement(k, {(a, tuple([0] * k.n)): 1.0 + 0.0j})

    # -- inspection ----------------------------------------------------------

    @property
    def n(self) -> int:
        return self.kin.n

    def coeff_norm(self) -> float:
        return sum(abs(c) for c in self.terms.values())

    def identity_coefficient(self) -> complex:
        zero = (tuple([0.0] * self.n), tuple([0] * self.n))
        return self.terms.get(zero, 0.0j)

    def non_identity_norm(self) -> float:
        zero = (tuple([0.0] * self.n), tuple([0] * self.n))
        return sum(abs(c) for key, c in self.terms.items() if key != zero)

    def is_polynomial(self) -> bool:
        return all(all(x == 0.0 for x in a) for (a, _e) in self.terms)

    def degree(self) -> int:
        return max((sum(e) for (_a, e) in self.terms), default=0)

    def equals(self, other: "AlgebraElement", tol: float = COEFF_TOL) -> bool:
        return (self - other).coeff_norm() <= tol * max(1.0, self.coeff_norm(), other.coeff_norm())

    def render(self) -> str:
        """Deterministic human-readable string (golden-test stable)."""
        if not self.terms:
            return "0"
        pieces = []
        for (a, e), c in sorted(self.terms.items()):
            mono = "".join(f"phi{j}^{k}" if k > 1 else f"phi{j}" for j, k in enumerate(e) if k)
            disp = ""
            if any(x != 0.0 for x in a):
                disp = "W(" + ",".join(f"{x:.6g}" for x in a) + ")"
            body = "*".join(p for p in (mono, disp) if p) or "1"
            pieces.append(f"({c.real:.6g}{c.imag:+.6g}j)*{body}")
        return " + ".join(pieces)

    def __repr__(self) -> str:
        return f"AlgebraElement[{self.render()}]"

    # -- linear structure ----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = AlgebraElement.scalar(self.kin, other)
        self._check_same(other)
        terms = dict(self.terms)
        for key, c in other.terms.items():
            terms[key] = terms.get(key, 0.0j) + c
        return AlgebraElement(self.kin, terms)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, float, complex)):
            other = AlgebraElement.scalar(self.kin, other)
        return self + (other * (-1.0))

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return AlgebraElement(self.kin, {k: c * other for k, c in self.terms.items()})
        self._check_same(other)
        return _star(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    def dag(self) -> "AlgebraElement":
        """Operator adjoint: conj(c) x^e exp(-i a.x)."""
        terms = {}
        for (a, e), c in self.terms.items():
            key = (tuple(-x for x in a), e)
            terms[key] = terms.get(key, 0.0j) + np.conj(c)
        return AlgebraElement(self.kin, terms)

    def commutator(self, other: "AlgebraElement") -> "AlgebraElement":
        return self * other - other * self

    def _check_same(self, other: "AlgebraElement"):
        if self.kin.delta != other.kin.delta:
            raise ValueError("elements live over different kinematic data")


def _canonicalize(terms: dict, n: int) -> dict:
    items = []
    for (a, e), c in terms.items():
        a = tuple(float(x) for x in a)
        e = tuple(int(x) for x in e)
        if c != 0.0:
            items.append(((a, e), complex(c)))
    items.sort(key=lambda kv: (kv[0][1], kv[0][0]))
    out: dict = {}
    prev_key = None
    for key, c in items:
        if prev_key is not None and prev_key[1] == key[1]:
            da = max(abs(x - y) for x, y in zip(prev_key[0], key[0])) if key[0] else 0.0
            if da <= MERGE_TOL:
                out[prev_key] += c
                continue
        out[key] = out.get(key, 0.0j) + c
        prev_key = key
    return {k: v for k, v in out.items() if abs(v) > 1e-300}


def _star(U: AlgebraElement, V: AlgebraElement) -> AlgebraElement:
    D = U.kin.matrix
    n = U.kin.n
    out: dict = {}
    for (a, eP), cP in U.terms.items():
        av = np.asarray(a)
        Da = D @ av
        for (b, eQ), cQ in V.terms.items():
            bv = np.asarray(b)
            Db = D @ bv
            phase = np.exp(-0.5j * float(av @ Db))
            coeff = cP * cQ * phase
            csum = tuple(float(x) for x in (av + bv))
            if sum(eP) == 0 and sum(eQ) == 0:
                key = (csum, eP)
                out[key] = out.get(key, 0.0j) + coeff
                continue
            Phat = _poly_shift({eP: 1.0 + 0.0j}, tuple(-0.5 * Da)) if sum(eP) else {eP: 1.0 + 0.0j}
            Qhat = _poly_shift({eQ: 1.0 + 0.0j}, tuple(0.5 * Db)) if sum(eQ) else {eQ: 1.0 + 0.0j}
            M = _poly_moyal(Phat, Qhat, D)
            M = _poly_shift(M, tuple(0.5 * (Da - Db)))
            for e, cm in M.items():
                key = (csum, e)
                out[key] = out.get(key, 0.0j) + coeff * cm
    return AlgebraElement(U.kin, out)


# ---------------------------------------------------------------------------
# the named operations
# ---------------------------------------------------------------------------


def weyl_product(kin, a, b) -> AlgebraElement:
    """exp(i phi(a.f)) exp(i phi(b.f)) = exp(i phi((a+b).f)) exp(-i a.Delta b / 2)."""
    return AlgebraElement.weyl(kin, a) * AlgebraElement.weyl(kin, b)


def adjoint_linear(h, X: AlgebraElement) -> AlgebraElement:
    """Conjugation exp(i phi(h.f)) X exp(-i phi(h.f)), exact (no series).

    Every generator shifts by the central scalar: phi_j -> phi_j + (Delta h)_j,
    and Weyl factors pick up the phase exp(i a . Delta h).
    """
    D = X.kin.matrix
    h = np.asarray(h, dtype=float)
    if h.shape != (X.n,):
        raise ValueError("h must be a coefficient vector over the generators")
    s = D @ h  # shift of phi_j
    out: dict = {}
    for (a, e), c in X.terms.items():
        phase = np.exp(1j * float(np.asarray(a) @ s))
        shifted = _poly_shift({e: 1.0 + 0.0j}, tuple(s)) if sum(e) else {e: 1.0 + 0.0j}
        for e2, cm in shifted.items():
            key = (a, e2)
            out[key] = out.get(key, 0.0j) + c * phase * cm
    return AlgebraElement(X.kin, out)


def adjoint_series(P: AlgebraElement, X: AlgebraElement, max_depth: int = 16) -> AlgebraElement:
    """Ad_{exp(iP)}(X) = sum_k (i ad_P)^k X / k! for polynomial P of degree <= 2.

    Exact when the nested commutators terminate (the quadratic-kick class);
    raises AdjointSeriesError otherwise -- no truncated approximation is
    returned.
    """
    if not P.is_polynomial():
        raise ValueError("P must be a polynomial element (no Weyl factor)")
    if P.degree() > 2:
        raise ValueError("P must have degree <= 2")
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    total = X
    term = X
    scale = max(X.coeff_norm(), 1.0)
    prev_degree = X.degree()
    for k in range(1, max_depth + 1):
        term = (P * term - term * P) * (1j / k)
        # genuine termination keeps the degree from growing; the Weyl-factor
        # series raises it each step even when coefficients underflow
        if term.coeff_norm() <= 1e-13 * scale and term.degree() <= prev_degree:
            return total
        prev_degree = max(prev_degree, term.degree())
        total = total + term
    raise AdjointSeriesError(
        f"nested commutators of P with X did not vanish within depth {max_depth}"
    )


# ---------------------------------------------------------------------------
# quasi-free states and expectations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuasiFreeState:
    """Gaussian state: mean mu_j = <phi_j> and symmetric covariance Wsym."""

    mu: tuple[float, ...]
    wsym: tuple[tuple[float, ...], ...]

    @staticmethod
    def make(mu, Wsym) -> "QuasiFreeState":
        mu = np.asarray(mu, dtype=float)
        W = np.asarray(Wsym, dtype=float)
        if W.shape != (len(mu), len(mu)):
            raise ValueError("covariance shape mismatch")
        if not np.allclose(W, W.T, atol=1e-10):
            raise ValueError("Wsym must be symmetric")
        return QuasiFreeState(tuple(float(x) for x in mu), tuple(tuple(float(x) for x in r) for r in W))

    @staticmethod
    def vacuum(kinematic_data) -> "QuasiFreeState":
        W = np.asarray(kinematic_data.Wsym, dtype=float)
        return QuasiFreeState.make(np.zeros(W.shape[0]), W)

    @staticmethod
    def coherent(kinematic_data, mu) -> "QuasiFreeState":
        W = np.asarray(kinematic_data.Wsym, dtype=float)
        return QuasiFreeState.make(mu, W)

    @property
    def n(self) -> int:
        return len(self.mu)

    def validate_against(self, kin, tol: float = 1e-8) -> float:
        """Min eigenvalue of Wsym + (i/2) Delta; raises if below -tol."""
        D = _as_kinematics(kin).matrix
        W = np.asarray(self.wsym)
        lam = float(np.min(np.linalg.eigvalsh(W + 0.5j * D)))
        if lam < -tol:
            raise ValueError(f"state positivity violated: min eig {lam:.3e}")
        return lam


def _gauss_moment(e: tuple, mean: np.ndarray, W: np.ndarray, memo: dict) -> complex:
    if sum(e) == 0:
        return 1.0 + 0.0j
    if e in memo:
        return memo[e]
    j = next(i for i, v in enumerate(e) if v > 0)
    em = list(e)
    em[j] -= 1
    em = tuple(em)
    val = mean[j] * _gauss_moment(em, mean, W, memo)
    for k, vk in enumerate(em):
        if vk == 0 or W[j, k] == 0.0:
            continue
        emm = list(em)
        emm[k] -= 1
        val += W[j, k] * vk * _gauss_moment(tuple(emm), mean, W, memo)
    memo[e] = val
    return val


def expectation(state: QuasiFreeState, X: AlgebraElement) -> complex:
    """<X> in the quasi-free state: exact Wick combinatorics with Weyl source.

    Uses E[Op_W(u)] = E_{N(mu, Wsym)}[u(x)]: per term c x^e exp(i a.x),
    the value is c chi(a) E[(y)^e] with chi the Gaussian characteristic
    function and y ~ N(mu + i W a, W).
    """
    if state.n != X.n:
        raise ValueError("state and element have different generator counts")
    mu = np.asarray(state.mu)
    W = np.asarray(state.wsym)
    total = 0.0j
    for (a, e), c in X.terms.items():
        av = np.asarray(a)
        chi = np.exp(1j * float(av @ mu) - 0.5 * float(av @ W @ av))
        mean = mu + 1j * (W @ av)
        memo: dict = {}
        total += c * chi * _gauss_moment(e, mean, W, memo)
    return complex(total)
