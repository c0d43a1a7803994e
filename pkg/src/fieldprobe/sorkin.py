"""Three-region signalling experiments: A acts, B measures, C observes.

The geometry is the standard impossible-measurement arrangement: region A
(smearing family h_lambda) partially precedes B (smearing f), B partially
precedes C (observable smearing g), while A and C are strictly spacelike.
For each lambda the harness assembles the kinematic matrices, pushes the
observable through B's operation and then A's kick in the Heisenberg order
tr(Phi_A(Phi_B(C)) rho), and reports delta(lambda) against the baseline
tr(Phi_B(C) rho).

Operations: Weyl kicks e^{i phi(h)}, quadratic kicks e^{i phi(f)^2}, the
pointer-measurement Kraus channel, and its quadratic variant (the channel
controlled by phi(f)^2, which is genuinely signalling on squared-field
observables).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .ccr import (
    AdjointSeriesError,
    AlgebraElement,
    QuasiFreeState,
    adjoint_linear,
    adjoint_series,
    expectation,
)
from .pointer import GaussianProbe, ProbeState, channel_on_element, kraus_kernel
from .propagator import (
    DEFAULT_SPEC,
    FieldModel,
    KinematicData,
    QuadratureSpec,
    kinematic_matrices,
    pauli_jordan,
    retarded,
)
from .testfn import TestFunction, causal_margin, causal_relation

__all__ = [
    "LambdaFamily",
    "OperationSpec",
    "SorkinScenario",
    "SignallingReport",
    "GeometryDiagnostics",
    "validate_geometry",
    "signalling_functional",
    "kraus_channel_scenario",
    "effective_kraus_scan",
    "quadratic_kraus_scenario",
    "quadratic_kraus_wick_oracle",
    "sorkin_bump_geometry",
    "sorkin_kick_geometry",
]

OBSERVABLES = ("phi_g", "weyl_g", "phi_g_squared")


def sorkin_bump_geometry(
    tau: float = 2.5,
    probe_radius: float = 0.25,
    b_radius_t: float = 2.0,
    b_radius_s: float = 1.0,
    offset: float = 4.8,
    dim: int = 1,
):
    """Reference three-region layout with exact (bump) supports.

    Small regions A at (0, -offset) and C at (2 tau, +offset) flank a
    temporally extended B at (tau, 0): A precedes B (the causal contact lies
    in B's upper half), B precedes C (contact in B's lower half), and A, C
    are strictly spacelike.  Cuts of B in the middle band keep the past part
    spacelike to A and the future part spacelike to C.  Returns (h, f, g).
    """
    from .testfn import bump as _bump

    zeros = [0.0] * dim
    xa = [-offset] + [0.0] * (dim - 1)
    xc = [offset] + [0.0] * (dim - 1)
    h = _bump(0.0, xa, probe_radius, probe_radius)
    f = _bump(tau, zeros, b_radius_t, b_radius_s)
    g = _bump(2.0 * tau, xc, probe_radius, probe_radius)
    return h, f, g


def sorkin_kick_geometry(
    tau: float = 1.6,
    b_radius_t: float = 1.2,
    b_radius_s: float = 1.5,
    probe_radius: float = 0.3,
    dim: int = 1,
):
    """Deep-flank layout for the unitary-kick experiments (no cut required).

    A and C sit at offset tau + b_radius_s/2, just outside each other's cones
    (spacelike margin b_radius_s - 4 probe_radius) but with their cones cutting
    deep into B's bulk, so the commutator entries Delta(h, f) and Delta(f, g)
    are of order 1e-2 rather than corner-tail sized.  Returns (h, f, g).
    """
    from .testfn import bump as _bump

    offset = tau + 0.5 * b_radius_s
    zeros = [0.0] * dim
    xa = [-offset] + [0.0] * (dim - 1)
    xc = [offset] + [0.0] * (dim - 1)
    h = _bump(0.0, xa, probe_radius, probe_radius)
    f = _bump(tau, zeros, b_radius_t, b_radius_s)
    g = _bump(2.0 * tau, xc, probe_radius, probe_radius)
    return h, f, g


@dataclass(frozen=True)
class LambdaFamily:
    """Parameterised family of smearings for region A.

    kind='translation': h_lambda = h shifted by lambda along a spatial direction;
    kind='amplitude':   h_lambda = lambda * h.
    """

    base: TestFunction
    kind: str = "translation"
    direction: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        if self.kind not in ("translation", "amplitude"):
            raise ValueError("family kind must be 'translation' or 'amplitude'")

    def at(self, lam: float) -> TestFunction:
        if self.kind == "amplitude":
            return self.base * float(lam)
        dx = tuple(float(lam) * d for d in self.direction)
        return self.base.translated(0.0, dx)


@dataclass(frozen=True)
class OperationSpec:
    """Operation kind for one region; the smearing is supplied by the scenario."""

    kind: str  # 'weyl_kick' | 'quadratic_kick' | 'kraus_channel' | 'quadratic_kraus'
    probe: ProbeState | None = None
    region: str = "B"

    def __post_init__(self):
        if self.kind not in ("weyl_kick", "quadratic_kick", "kraus_channel", "quadratic_kraus"):
            raise ValueError(f"unknown operation kind {self.kind!r}")
        if self.kind in ("kraus_channel", "quadratic_kraus") and self.probe is None:
            raise ValueError(f"{self.kind} requires a probe state")


@dataclass(frozen=True)
class SorkinScenario:
    model: FieldModel
    family: LambdaFamily
    f: TestFunction
    g: TestFunction
    op_a: OperationSpec
    op_b: OperationSpec
    observable: str = "phi_g"
    state: str | tuple = "vacuum"
    quadrature: QuadratureSpec = DEFAULT_SPEC

    def __post_init__(self):
        if self.observable not in OBSERVABLES:
            raise ValueError(f"observable must be one of {OBSERVABLES}")


@dataclass
class GeometryDiagnostics:
    ok: bool
    relations: dict
    margins: dict
    warnings: list
    failures: list

    def text_block(self) -> str:
        lines = ["geometry: " + ("PASS" if self.ok else "FAIL")]
        for key, rel in sorted(self.relations.items()):
            lines.append(f"  {key}: {rel} (margin {self.margins.get(key, float('nan')):+.4f})")
        for w in self.warnings:
            lines.append("  warning: " + w)
        for f in self.failures:
            lines.append("  failure: " + f)
        return "\n".join(lines)


def _tail_radius(fn: TestFunction) -> float:
    box = fn.support()
    return 0.0 if box.eps_tail == 0.0 else 2.0 * max(a.sprof.scale for a in fn.atoms())


def validate_geometry(scn: SorkinScenario, lambdas) -> GeometryDiagnostics:
    """Check A < B < C with A, C spacelike across the whole lambda range."""
    relations = {}
    margins = {}
    warnings: list[str] = []
    failures: list[str] = []
    box_f = scn.f.support()
    box_g = scn.g.support()
    rel_bc = causal_relation(box_f, box_g)
    relations["B,C"] = rel_bc
    margins["B,C"] = causal_margin(box_f, box_g)
    if rel_bc != "a_precedes_b":
        failures.append(f"B must precede C, found {rel_bc}")
    lams = list(lambdas)
    probes = sorted({lams[0], lams[len(lams) // 2], lams[-1]} | set(lams))
    for lam in probes:
        h = scn.family.at(lam)
        if h.l1() == 0.0:
            continue
        box_h = h.support()
        rel_ab = causal_relation(box_h, box_f)
        rel_ac = causal_relation(box_h, box_g)
        m_ab = causal_margin(box_h, box_f)
        m_ac = causal_margin(box_h, box_g)
        relations[f"A({lam:g}),B"] = rel_ab
        margins[f"A({lam:g}),B"] = m_ab
        relations[f"A({lam:g}),C"] = rel_ac
        margins[f"A({lam:g}),C"] = m_ac
        if rel_ab != "a_precedes_b":
            failures.append(f"A must precede B at lambda={lam:g}, found {rel_ab}")
        if rel_ac != "spacelike":
            slack = _tail_radius(h) + _tail_radius(scn.g)
            if m_ac > -slack and slack > 0:
                warnings.append(
                    f"A,C margin {m_ac:+.4f} at lambda={lam:g} within gaussian tail slack {slack:.4f}"
                )
            else:
                failures.append(f"A and C must be spacelike at lambda={lam:g}, found {rel_ac}")
    return GeometryDiagnostics(not failures, relations, margins, warnings, failures)


# ---------------------------------------------------------------------------
# state and observable assembly
# ---------------------------------------------------------------------------


def _resolve_state(scn: SorkinScenario, kin: KinematicData) -> QuasiFreeState:
    if scn.state == "vacuum":
        return QuasiFreeState.vacuum(kin)
    if isinstance(scn.state, tuple) and scn.state[0] == "coherent":
        alpha = float(scn.state[1])
        mu = np.array([alpha * g.integral() for g in kin.generators])
        return QuasiFreeState.coherent(kin, mu)
    raise ValueError(f"unknown state spec {scn.state!r}")


def _observable(kin_obj, index_g: int, name: str) -> AlgebraElement:
    phi_g = AlgebraElement.generator(kin_obj, index_g)
    if name == "phi_g":
        return phi_g
    if name == "phi_g_squared":
        return phi_g * phi_g
    n = len(kin_obj.delta) if hasattr(kin_obj, "delta") else kin_obj.Delta.shape[0]
    a = [0.0] * n
    a[index_g] = 1.0
    return AlgebraElement.weyl(kin_obj, tuple(a))


def _apply_operation(
    op: OperationSpec,
    coeff_index: int,
    X: AlgebraElement,
) -> AlgebraElement:
    n = X.n
    e = np.zeros(n)
    e[coeff_index] = 1.0
    if op.kind == "weyl_kick":
        return adjoint_linear(e, X)
    if op.kind == "quadratic_kick":
        P = AlgebraElement.generator(X.kin, coeff_index)
        return adjoint_series(P * P, X)
    if op.kind == "kraus_channel":
        return channel_on_element(e, op.probe, X)
    if op.kind == "quadratic_kraus":
        return _quadratic_kraus_channel(op.probe, coeff_index, X)
    raise ValueError(op.kind)


def _quadratic_kraus_channel(probe: ProbeState, coeff_index: int, X: AlgebraElement, max_depth: int = 16) -> AlgebraElement:
    """Phi(X) = int dp |psitilde(p)|^2 Ad_{exp(-i p phi(f)^2)}(X).

    Expands Ad as the nested-commutator series in powers of (-p) and folds in
    the probe's momentum moments; exact for observables in the nilpotent class.
    """
    P = AlgebraElement.generator(X.kin, coeff_index)
    P = P * P
    total = X * probe.momentum_moment(0)
    term = X
    scale = max(X.coeff_norm(), 1.0)
    prev_degree = X.degree()
    for k in range(1, max_depth + 1):
        term = (P * term - term * P) * (-1j / k)  # (ad_{-i p P})^k picks (-p)^k
        if term.coeff_norm() <= 1e-13 * scale and term.degree() <= prev_degree:
            return total
        prev_degree = max(prev_degree, term.degree())
        total = total + term * probe.momentum_moment(k)
    raise AdjointSeriesError("quadratic Kraus channel: series does not terminate for this observable")


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass
class SignallingReport:
    lambdas: np.ndarray
    values: np.ndarray
    baseline: complex
    deltas: np.ndarray
    predictions: np.ndarray | None
    observable: str
    details: dict = field(default_factory=dict)

    @property
    def max_abs_delta(self) -> float:
        return float(np.max(np.abs(self.deltas))) if len(self.deltas) else 0.0

    def max_prediction_error(self) -> float:
        if self.predictions is None:
            return math.nan
        return float(np.max(np.abs(np.abs(self.deltas) - np.abs(self.predictions))))

    def rows(self):
        for i, lam in enumerate(self.lambdas):
            pred = self.predictions[i] if self.predictions is not None else math.nan
            err = abs(abs(self.deltas[i]) - abs(pred)) if self.predictions is not None else math.nan
            yield (
                float(lam),
                complex(self.values[i]),
                complex(self.baseline),
                complex(self.deltas[i]),
                float(np.real(pred)),
                float(err),
            )


def _scenario_matrices(scn: SorkinScenario, generators, need_retarded: bool, lambdas):
    """Per-lambda kinematic data with the lambda-independent block cached.

    generators[0] is the A slot (h_lambda); the rest are fixed functions.
    """
    from .propagator import wightman_sym

    fixed = tuple(generators[1:])
    base = kinematic_matrices(
        scn.model,
        fixed,
        scn.quadrature,
        with_wightman=True,
        with_retarded=False,
    )
    n = len(fixed) + 1
    spec = scn.quadrature

    def h_rows(h: TestFunction):
        drow = np.zeros(n)
        wrow = np.zeros(n)
        whh = 0.0
        if h.l1() > 0.0:
            for j, gj in enumerate(fixed, start=1):
                if gj.l1() == 0.0:
                    continue
                drow[j] = pauli_jordan(scn.model, h, gj, spec).real
                wrow[j] = wightman_sym(scn.model, h, gj, spec).real
            whh = wightman_sym(scn.model, h, h, spec).real
        return drow, wrow, whh

    if scn.family.kind == "amplitude":
        # bilinearity: Delta(lam h, .) = lam Delta(h, .), W(lam h, lam h) = lam^2 W(h, h)
        drow1, wrow1, whh1 = h_rows(scn.family.base)

    out = []
    for lam in lambdas:
        h = scn.family.at(lam)
        if scn.family.kind == "amplitude":
            drow, wrow, whh = lam * drow1, lam * wrow1, lam * lam * whh1
        else:
            drow, wrow, whh = h_rows(h)
        Delta = np.zeros((n, n))
        W = np.zeros((n, n))
        Delta[1:, 1:] = base.Delta
        W[1:, 1:] = base.Wsym
        Delta[0, :] = drow
        Delta[:, 0] = -drow
        W[0, :] = wrow
        W[:, 0] = wrow
        W[0, 0] = whh
        kdata = KinematicData((h,) + fixed, Delta, np.zeros((n, n)), _psd_repair(W), scn.model)
        out.append(kdata)
    del need_retarded
    return out


def _psd_repair(W: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    vals, vecs = np.linalg.eigh(0.5 * (W + W.T))
    if vals.min() < -tol:
        raise ArithmeticError(f"Wsym eigenvalue {vals.min():.3e} below -{tol:.1e}")
    vals = np.clip(vals, 0.0, None)
    W2 = (vecs * vals) @ vecs.T
    return 0.5 * (W2 + W2.T)


def signalling_functional(scn: SorkinScenario, lambdas) -> SignallingReport:
    """delta(lambda) = tr(Phi_A^lambda(Phi_B(C)) rho) - tr(Phi_B(C) rho).

    Generators are ordered (h_lambda, f, g); the analytic prediction column is
    filled for the known cases (quadratic kick at B on phi_g, and the
    non-signalling Weyl/Kraus cases where it is zero).
    """
    lambdas = np.asarray(list(lambdas), dtype=float)
    geo = validate_geometry(scn, lambdas)
    if not geo.ok:
        raise ValueError("scenario geometry invalid:\n" + geo.text_block())
    kdatas = _scenario_matrices(scn, [None, scn.f, scn.g], need_retarded=False, lambdas=lambdas)
    H, F, G = 0, 1, 2
    values = np.zeros(len(lambdas), dtype=complex)
    preds = np.zeros(len(lambdas))
    baseline = None
    have_pred = True
    for i, (lam, kd) in enumerate(zip(lambdas, kdatas)):
        state = _resolve_state(scn, kd)
        obs = _observable(kd, G, scn.observable)
        after_b = _apply_operation(scn.op_b, F, obs)
        if baseline is None:
            baseline = expectation(state, after_b)
        after_a = _apply_operation(scn.op_a, H, after_b)
        values[i] = expectation(state, after_a)
        if scn.op_b.kind == "quadratic_kick" and scn.observable == "phi_g" and scn.op_a.kind == "weyl_kick":
            preds[i] = 2.0 * kd.Delta[H, F] * kd.Delta[F, G]
        elif scn.op_b.kind in ("weyl_kick", "kraus_channel"):
            preds[i] = 0.0
        else:
            have_pred = False
    deltas = values - baseline
    return SignallingReport(
        lambdas,
        values,
        baseline,
        deltas,
        preds if have_pred else None,
        scn.observable,
        {"geometry": geo},
    )


def kraus_channel_scenario(
    scn: SorkinScenario,
    t_cut: float,
    lambdas,
    decomposed_route: bool = False,
    fault_injection: bool = False,
) -> dict:
    """The half-an-operation check for B's pointer-measurement channel.

    Per lambda computes (i) the full composition tr(Phi_A Phi_B[f](C) rho),
    (ii) tr(Phi_B[f_-](C) rho) and (iii) tr(Phi_B[f](C) rho); the cut must
    leave f_- spacelike to A and f_+ spacelike to C.  ``decomposed_route``
    additionally evaluates (i) through the convolution split and the overlap
    collapse on a momentum grid; ``fault_injection`` corrupts that collapse
    (dropping the s != s' correlation) to demonstrate detectability.
    """
    if scn.op_b.kind != "kraus_channel":
        raise ValueError("kraus_channel_scenario requires op_b = kraus_channel")
    lambdas = np.asarray(list(lambdas), dtype=float)
    geo = validate_geometry(scn, lambdas)
    if not geo.ok:
        raise ValueError("scenario geometry invalid:\n" + geo.text_block())
    fplus, fminus = scn.f.cut(t_cut)
    box_g = scn.g.support()
    if causal_relation(fplus.support(), box_g) != "spacelike":
        raise ValueError("cut leaves the future part of f causally connected to C")
    for lam in (lambdas[0], lambdas[len(lambdas) // 2], lambdas[-1]):
        h = scn.family.at(lam)
        if h.l1() > 0 and causal_relation(h.support(), fminus.support()) != "spacelike":
            raise ValueError(f"cut leaves the past part of f causally connected to A at lambda={lam:g}")

    kdatas = _scenario_matrices(scn, [None, scn.f, fminus, scn.g], need_retarded=False, lambdas=lambdas)
    H, F, FM, G = 0, 1, 2, 3
    probe = scn.op_b.probe
    full = np.zeros(len(lambdas), dtype=complex)
    past_only = np.zeros(len(lambdas), dtype=complex)
    uncut = np.zeros(len(lambdas), dtype=complex)
    decomposed = np.zeros(len(lambdas), dtype=complex)
    for i, (lam, kd) in enumerate(zip(lambdas, kdatas)):
        state = _resolve_state(scn, kd)
        obs = _observable(kd, G, scn.observable)
        ef = np.zeros(4)
        ef[F] = 1.0
        em = np.zeros(4)
        em[FM] = 1.0
        chan_full = channel_on_element(ef, probe, obs)
        after_a = _apply_operation(scn.op_a, H, chan_full)
        full[i] = expectation(state, after_a)
        past_only[i] = expectation(state, channel_on_element(em, probe, obs))
        uncut[i] = expectation(state, chan_full)
        if decomposed_route:
            decomposed[i] = _decomposed_half_operation(
                scn, kd, state, obs, em, probe, fplus, fminus, fault_injection
            )
    return {
        "lambdas": lambdas,
        "full_composition": full,
        "past_part_only": past_only,
        "uncut_channel": uncut,
        "decomposed": decomposed if decomposed_route else None,
        "max_half_residual": float(np.max(np.abs(full - past_only))),
        "max_uncut_residual": float(np.max(np.abs(full - uncut))),
        "geometry": geo,
        "t_cut": t_cut,
        "scale": float(max(np.max(np.abs(full)), np.max(np.abs(past_only)), 1e-300)),
    }


def _decomposed_half_operation(scn, kd, state, obs, em, probe, fplus, fminus, fault: bool) -> complex:
    """Evaluate the composition through the split-and-collapse route.

    With the square-root probe split, |psitilde(p)|^2 = 2 pi |psitilde_+ psitilde_-|^2;
    the A-side overlap collapse reduces the composition to an integral over the
    control momentum of the past-part conjugation only.  The injected fault
    replaces the correlated weight by the uncorrelated one (all s != s'
    contributions of the future-part overlap dropped).
    """
    from numpy.polynomial.legendre import leggauss

    ph = probe.psi_hat_gauss()
    if ph is None:
        raise NotImplementedError("decomposed route needs a gaussian probe")
    dens = ph.abs_squared()
    pc = float((-dens.b / (2 * dens.c)).real)
    pw = math.sqrt(-1.0 / (2.0 * dens.c.real))
    nodes, weights = leggauss(161)
    ps = pc + 9.0 * pw * nodes
    ws = 9.0 * pw * weights
    if fault:
        # uncorrelated collapse: the past half's |psitilde_-|^2 alone carries the
        # p-dependence (shape sqrt of the full density), renormalised to unit mass
        halfdens_vals = np.sqrt(np.abs(np.asarray(dens(ps)).reshape(-1)))
        wvals = halfdens_vals / float(np.sum(ws * halfdens_vals))
    else:
        wvals = np.abs(np.asarray(dens(ps)).reshape(-1))
    total = 0.0j
    for p, wgt, wv in zip(ps, ws, wvals):
        conj = adjoint_linear(p * em, obs)
        total += wgt * wv * expectation(state, conj)
    return complex(total)


def effective_kraus_scan(scn: SorkinScenario, cut_times) -> list[dict]:
    """Channel action of Phi_B[f_-(t)] on the observable as the cut advances.

    Tracks the expectation value, the change against the previous cut, the
    retarded diagonal of the past part, and the dephasing strength on the Weyl
    observable; stabilises once the cut has exhausted the part of f in the
    causal past of C.
    """
    rows = []
    prev_val = None
    spec = scn.quadrature
    base = kinematic_matrices(scn.model, (scn.f, scn.g), spec, with_wightman=True, with_retarded=False)
    probe = scn.op_b.probe if scn.op_b.probe is not None else GaussianProbe(1.0)
    for t in cut_times:
        _, fminus = scn.f.cut(float(t))
        if fminus.l1() == 0.0:
            gens = (fminus, scn.g)
            Delta = np.zeros((2, 2))
            W = np.zeros((2, 2))
            W[1, 1] = base.Wsym[1, 1]
            kd = KinematicData(gens, Delta, np.zeros((2, 2)), W, scn.model)
            rminus = 0.0
        else:
            kd = kinematic_matrices(scn.model, (fminus, scn.g), spec, with_wightman=True, with_retarded=False)
            rminus = retarded(scn.model, fminus, fminus, spec).real
        state = QuasiFreeState.vacuum(kd)
        obs = _observable(kd, 1, scn.observable)
        chan = channel_on_element([1.0, 0.0], probe, obs)
        val = expectation(state, chan)
        dephasing = abs(probe.char_function(-kd.Delta[0, 1]))
        rows.append(
            {
                "t_cut": float(t),
                "value": val,
                "change": abs(val - prev_val) if prev_val is not None else math.nan,
                "r_minus": rminus,
                "delta_fm_g": float(kd.Delta[0, 1]),
                "dephasing": float(dephasing),
            }
        )
        prev_val = val
    return rows


def quadratic_kraus_wick_oracle(delta_hf: float, delta_fg: float, p2_moment: float, mu_f: float = 0.0) -> float:
    """Hand-assembled Wick value of delta(lambda) for B = quadratic Kraus, C = phi(g)^2.

    Phi_B(phi_g^2) = phi_g^2 + <p^2> (2 Delta(f,g) phi_f)^2-term; the A kick
    shifts phi_f by -Delta(h,f); in a state with one-point function mu_f the
    difference of expectations is

        4 <p^2> Delta(f,g)^2 (Delta(h,f)^2 - 2 mu_f Delta(h,f)).
    """
    return 4.0 * p2_moment * delta_fg**2 * (delta_hf**2 - 2.0 * mu_f * delta_hf)


def quadratic_kraus_scenario(scn: SorkinScenario, lambdas) -> SignallingReport:
    """Signalling functional for B = quadratic Kraus channel (even probe).

    For the squared-field observable the report carries the pre-built Wick
    oracle prediction; the dependence on lambda demonstrates signalling.
    """
    if scn.op_b.kind != "quadratic_kraus":
        raise ValueError("quadratic_kraus_scenario requires op_b = quadratic_kraus")
    probe = scn.op_b.probe
    if abs(probe.mean_momentum()) > 1e-10:
        raise ValueError("quadratic Kraus scenario requires a real even probe (zero mean momentum)")
    lambdas = np.asarray(list(lambdas), dtype=float)
    geo = validate_geometry(scn, lambdas)
    if not geo.ok:
        raise ValueError("scenario geometry invalid:\n" + geo.text_block())
    kdatas = _scenario_matrices(scn, [None, scn.f, scn.g], need_retarded=False, lambdas=lambdas)
    H, F, G = 0, 1, 2
    values = np.zeros(len(lambdas), dtype=complex)
    preds = np.zeros(len(lambdas))
    baseline = None
    p2 = float(np.real(probe.momentum_moment(2)))
    for i, (lam, kd) in enumerate(zip(lambdas, kdatas)):
        state = _resolve_state(scn, kd)
        obs = _observable(kd, G, scn.observable)
        after_b = _quadratic_kraus_channel(probe, F, obs)
        if baseline is None:
            baseline = expectation(state, after_b)
        after_a = _apply_operation(scn.op_a, H, after_b)
        values[i] = expectation(state, after_a)
        if scn.observable == "phi_g_squared":
            mu_f = float(state.mu[F])
            preds[i] = quadratic_kraus_wick_oracle(kd.Delta[H, F], kd.Delta[F, G], p2, mu_f)
        else:
            preds[i] = 0.0
    deltas = values - baseline
    return SignallingReport(lambdas, values, baseline, deltas, preds, scn.observable, {"geometry": geo, "p2": p2})
