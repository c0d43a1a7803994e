"""Config-driven experiment runner: models, functions, scenarios, checks in one file.

The config is YAML (JSON is accepted as an alternative encoding of the same
schema; see README for the schema).  Experiments validate before anything
executes, run in declared order, and write RFC-4180 CSV files with '\n' line
endings and %.12e numerics, so reruns with the same config and seed are
byte-identical.  The process exits 0 only if every declared check passed.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .ccr import AlgebraElement, Kinematics, QuasiFreeState, expectation
from .fock import FockOracle
from .gauss1d import GaussianExp
from .pointer import (
    GaussianProbe,
    canonical_probe_split,
    continuous_additivity_check,
    convolution_identity_check,
    hammerstein_check,
    kraus_kernel,
    overlap_identity,
    sharpness,
)
from .propagator import (
    FieldModel,
    QuadratureSpec,
    crossvalidate,
    fit_loglog_slope,
    pauli_jordan,
    retarded,
    retarded_scaling_scan,
    wightman,
)
from .sorkin import (
    LambdaFamily,
    OperationSpec,
    SorkinScenario,
    effective_kraus_scan,
    kraus_channel_scenario,
    quadratic_kraus_scenario,
    signalling_functional,
    sorkin_bump_geometry,
    sorkin_kick_geometry,
    validate_geometry,
)
from .testfn import TestFunction, bump, gaussian, l1_normalized_gaussian

EXPERIMENT_KINDS = (
    "propagator_eval",
    "scaling_scan",
    "sharpness_scan",
    "identity_suite",
    "sorkin_run",
    "oracle_suite",
)


class ConfigError(ValueError):
    """Configuration failed to parse or validate; message names the block."""


# ---------------------------------------------------------------------------
# config loading and resolution
# ---------------------------------------------------------------------------


def load_config(path: str | Path) -> dict:
    path = Path(path)
    text = path.read_text()
    try:
        if path.suffix == ".json":
            cfg = json.loads(text)
        else:
            cfg = yaml.safe_load(text)
    except (yaml.YAMLError, json.JSONDecodeError) as exc:
        raise ConfigError(f"config parse error in {path.name}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a mapping")
    cfg["_raw_bytes"] = text.encode()
    return cfg


def _build_function(name: str, block: dict, table: dict, building: set) -> TestFunction:
    if name in table:
        return table[name]
    if name in building:
        raise ConfigError(f"functions.{name}: circular reference")
    building.add(name)
    kind = block.get("kind")
    if kind == "gaussian":
        if block.get("normalize") == "l1":
            fn = l1_normalized_gaussian(block["center_t"], block["center_x"], block["sigma_t"], block["sigma_s"])
        else:
            fn = gaussian(
                block["center_t"], block["center_x"], block["sigma_t"], block["sigma_s"], block.get("amplitude", 1.0)
            )
    elif kind == "bump":
        fn = bump(
            block["center_t"], block["center_x"], block["radius_t"], block["radius_s"], block.get("amplitude", 1.0)
        )
    elif kind == "sum":
        children = [_require_function(c, table, building) for c in block["children"]]
        fn = children[0]
        for c in children[1:]:
            fn = fn + c
    elif kind == "scaled":
        fn = _require_function(block["child"], table, building) * float(block["factor"])
    elif kind == "cut":
        child = _require_function(block["child"], table, building)
        fut, past = child.cut(float(block["t_cut"]), float(block.get("width", 0.0)))
        fn = past if block.get("side", "past") == "past" else fut
    else:
        raise ConfigError(f"functions.{name}: unknown kind {kind!r}")
    building.discard(name)
    table[name] = fn
    return fn


def _require_function(name: str, table: dict, building: set) -> TestFunction:
    if name not in table and name not in _FUNCTION_BLOCKS:
        raise ConfigError(f"unknown function name {name!r}")
    if name in table:
        return table[name]
    return _build_function(name, _FUNCTION_BLOCKS[name], table, building)


_FUNCTION_BLOCKS: dict = {}


@dataclass
class ResolvedConfig:
    model: FieldModel
    quadrature: QuadratureSpec
    functions: dict
    probes: dict
    experiments: list
    plots: list
    seed: int
    output: str
    tol_scale: float = 1.0
    raw_bytes: bytes = b""

    def config_hash(self) -> str:
        return hashlib.sha256(self.raw_bytes).hexdigest()


def resolve_config(cfg: dict, tol_scale: float = 1.0) -> ResolvedConfig:
    global _FUNCTION_BLOCKS
    mb = cfg.get("model", {})
    model = FieldModel(float(mb.get("mass", 0.0)), int(mb.get("dim", 1)))
    tb = cfg.get("tolerances", {})
    quadrature = QuadratureSpec(
        rel_tol=float(tb.get("rel", 1e-8)),
        abs_tol=float(tb.get("abs", 1e-12)),
        depth=int(tb.get("depth", 20)),
        momentum_cutoff=float(tb.get("momentum_cutoff", 40.0)),
    )
    fblocks = cfg.get("functions", {}) or {}
    _FUNCTION_BLOCKS = fblocks
    functions: dict = {}
    building: set = set()
    for name, block in fblocks.items():
        try:
            _build_function(name, block, functions, building)
        except KeyError as exc:
            raise ConfigError(f"functions.{name}: missing field {exc}") from exc
    for name, fn in functions.items():
        if fn.dim != model.dim:
            raise ConfigError(f"functions.{name}: dimension {fn.dim} != model dim {model.dim}")
    probes: dict = {}
    for name, block in (cfg.get("probes", {}) or {}).items():
        if block.get("kind", "gaussian") != "gaussian":
            raise ConfigError(f"probes.{name}: only gaussian probes are configurable")
        probes[name] = GaussianProbe(
            float(block["sigma"]), float(block.get("center", 0.0)), float(block.get("momentum", 0.0))
        )
    experiments = list(cfg.get("experiments", []) or [])
    names = set()
    for i, ex in enumerate(experiments):
        name = ex.get("name")
        if not name:
            raise ConfigError(f"experiments[{i}]: missing name")
        if name in names:
            raise ConfigError(f"experiments[{i}]: duplicate name {name!r}")
        names.add(name)
        kind = ex.get("kind")
        if kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"experiment {name!r}: unknown kind {kind!r}")
        _validate_experiment(ex, functions, probes)
    plots = list(cfg.get("plots", []) or [])
    for i, pl in enumerate(plots):
        if pl.get("experiment") not in names:
            raise ConfigError(f"plots[{i}]: unknown experiment {pl.get('experiment')!r}")
    return ResolvedConfig(
        model,
        quadrature,
        functions,
        probes,
        experiments,
        plots,
        int(cfg.get("seed", 0)),
        str(cfg.get("output", os.environ.get("FIELDPROBE_OUT", "out"))),
        tol_scale,
        cfg.get("_raw_bytes", b""),
    )


def _validate_experiment(ex: dict, functions: dict, probes: dict):
    name = ex["name"]
    kind = ex["kind"]

    def need_fn(key):
        v = ex.get(key)
        if v is None:
            raise ConfigError(f"experiment {name!r}: missing {key}")
        if v not in functions:
            raise ConfigError(f"experiment {name!r}: unknown function {v!r} in {key}")

    def need_probe(key, optional=False):
        v = ex.get(key)
        if v is None:
            if optional:
                return
            raise ConfigError(f"experiment {name!r}: missing {key}")
        if v not in probes:
            raise ConfigError(f"experiment {name!r}: unknown probe {v!r} in {key}")

    if kind == "propagator_eval":
        for pair in ex.get("pairs", []):
            for fname in pair:
                if fname not in functions:
                    raise ConfigError(f"experiment {name!r}: unknown function {fname!r} in pairs")
        if not ex.get("pairs"):
            raise ConfigError(f"experiment {name!r}: pairs must be nonempty")
    elif kind == "scaling_scan":
        if not ex.get("sigma_s") or not ex.get("sigma_t"):
            raise ConfigError(f"experiment {name!r}: sigma_s and sigma_t grids required")
    elif kind == "sharpness_scan":
        if not ex.get("sigmas") or not ex.get("r_values"):
            raise ConfigError(f"experiment {name!r}: sigmas and r_values required")
    elif kind == "identity_suite":
        need_fn("function")
        need_probe("probe", optional=True)
    elif kind == "sorkin_run":
        sc = ex.get("scenario")
        if not isinstance(sc, dict):
            raise ConfigError(f"experiment {name!r}: scenario block required")
        geo = sc.get("geometry", "kick")
        if isinstance(geo, dict):
            for key in ("h", "f", "g"):
                if sc["geometry"].get(key) not in functions:
                    raise ConfigError(f"experiment {name!r}: scenario geometry needs function {key}")
        elif geo not in ("kick", "cut"):
            raise ConfigError(f"experiment {name!r}: geometry must be 'kick', 'cut', or explicit functions")
        opb = sc.get("op_b", {"kind": "weyl_kick"})
        if opb.get("kind") in ("kraus_channel", "quadratic_kraus") and opb.get("probe") not in probes:
            raise ConfigError(f"experiment {name!r}: op_b probe missing or unknown")
    elif kind == "oracle_suite":
        if int(ex.get("n_elements", 0)) < 1:
            raise ConfigError(f"experiment {name!r}: n_elements must be >= 1")


# ---------------------------------------------------------------------------
# CSV / SVG / manifest output
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, complex):
        return f"{x.real:.12e}"
    if isinstance(x, (float, np.floating)):
        return f"{x:.12e}"
    return str(x)


def write_csv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue())


def write_svg_plot(csv_path: Path, out_path: Path, kind: str, xcol: str, ycol: str, annotate_slope: bool = False):
    """Minimal hand-emitted SVG line plot; deterministic bytes for fixed input."""
    with open(csv_path) as fh:
        reader = csv.DictReader(fh)
        xs, ys = [], []
        for row in reader:
            if xcol not in row or ycol not in row:
                raise ConfigError(f"plot: column {xcol!r}/{ycol!r} missing from {csv_path.name}")
            try:
                x, y = float(row[xcol]), float(row[ycol])
            except ValueError:
                continue
            xs.append(x)
            ys.append(y)
    if not xs:
        raise ConfigError(f"plot: no data rows in {csv_path.name}")
    xs = np.asarray(xs)
    ys = np.asarray(ys)
    slope = None
    if kind == "loglog":
        mask = (xs > 0) & (ys != 0)
        xs, ys = xs[mask], np.abs(ys[mask])
        if len(xs) < 1:
            raise ConfigError("plot: no positive data for loglog axes")
        if annotate_slope and len(xs) > 1:
            slope = fit_loglog_slope(xs, ys)
        xs, ys = np.log10(xs), np.log10(ys)
    order = np.argsort(xs, kind="stable")
    xs, ys = xs[order], ys[order]
    W, H, M = 640, 440, 60
    xmin, xmax = float(xs.min()), float(xs.max())
    ymin, ymax = float(ys.min()), float(ys.max())
    if xmax == xmin:
        xmax = xmin + 1.0
    if ymax == ymin:
        ymax = ymin + 1.0

    def sx(x):
        return M + (x - xmin) / (xmax - xmin) * (W - 2 * M)

    def sy(y):
        return H - M - (y - ymin) / (ymax - ymin) * (H - 2 * M)

    pts = " ".join(f"{sx(x):.3f},{sy(y):.3f}" for x, y in zip(xs, ys))
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<line x1="{M}" y1="{H - M}" x2="{W - M}" y2="{H - M}" stroke="black" stroke-width="1"/>',
        f'<line x1="{M}" y1="{M}" x2="{M}" y2="{H - M}" stroke="black" stroke-width="1"/>',
        f'<polyline points="{pts}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>',
        f'<text x="{W // 2}" y="{H - 18}" text-anchor="middle" font-size="13">{xcol}'
        + (" (log10)" if kind == "loglog" else "")
        + "</text>",
        f'<text x="18" y="{H // 2}" text-anchor="middle" font-size="13" transform="rotate(-90 18 {H // 2})">{ycol}'
        + (" (log10)" if kind == "loglog" else "")
        + "</text>",
        f'<text x="{M}" y="{H - M + 16}" font-size="11">{xmin:.4g}</text>',
        f'<text x="{W - M}" y="{H - M + 16}" text-anchor="end" font-size="11">{xmax:.4g}</text>',
        f'<text x="{M - 6}" y="{H - M}" text-anchor="end" font-size="11">{ymin:.4g}</text>',
        f'<text x="{M - 6}" y="{M + 4}" text-anchor="end" font-size="11">{ymax:.4g}</text>',
    ]
    if slope is not None:
        lines.append(f'<text x="{W - M}" y="{M}" text-anchor="end" font-size="13">slope = {slope:.4f}</text>')
    lines.append("</svg>")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(lines) + "\n")


def _param_hash(*parts) -> str:
    return hashlib.sha256("::".join(str(p) for p in parts).encode()).hexdigest()[:12]


def write_manifest(path: Path, manifest: dict) -> None:
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# experiment implementations
# ---------------------------------------------------------------------------


@dataclass
class ExperimentResult:
    name: str
    kind: str
    status: str
    checks_passed: bool
    outputs: list[str] = field(default_factory=list)
    wall_time: float = 0.0
    message: str = ""


def _run_propagator_eval(ex, rc: ResolvedConfig, outdir: Path) -> ExperimentResult:
    rows = []
    passed = True
    for fname, gname in ex["pairs"]:
        f, g = rc.functions[fname], rc.functions[gname]
        for quantity in ex.get("quantities", ["pauli_jordan", "retarded"]):
            if quantity == "pauli_jordan":
                r = pauli_jordan(rc.model, f, g, rc.quadrature)
            elif quantity == "retarded":
                r = retarded(rc.model, f, g, rc.quadrature)
            elif quantity == "wightman":
                r = wightman(rc.model, f, g, rc.quadrature)
            else:
                raise ConfigError(f"experiment {ex['name']!r}: unknown quantity {quantity!r}")
            rows.append(
                (fname, gname, quantity, np.real(r.value), np.imag(r.value), r.error_estimate, r.backend_used, r.evaluations, not r.failed)
            )
            passed = passed and not r.failed
        if ex.get("crossvalidate", False):
            cv = crossvalidate(rc.model, f, g, rc.quadrature)
            rows.append(
                (fname, gname, "crossvalidate", cv.position.real, cv.momentum.real, cv.discrepancy, "both", 0, cv.passed)
            )
            passed = passed and cv.passed
    out = outdir / f"{ex['name']}.csv"
    write_csv(out, ["f", "g", "quantity", "value_re", "value_im", "err", "backend", "evaluations", "ok"], rows)
    return ExperimentResult(ex["name"], ex["kind"], "done", passed, [str(out)])


def _run_scaling_scan(ex, rc: ResolvedConfig, outdir: Path) -> ExperimentResult:
    rows = retarded_scaling_scan(rc.model, ex["sigma_s"], ex["sigma_t"], rc.quadrature, ex.get("backend"))
    out = outdir / f"{ex['name']}.csv"
    write_csv(out, ["sigma_S", "sigma_T", "mass", "dim", "delta_R", "err"], [r[:6] for r in rows])
    passed = all(r[6] for r in rows)
    checks = ex.get("checks", {})
    msg = []
    if "slope_s" in checks:
        st_mid = ex["sigma_t"][len(ex["sigma_t"]) // 2]
        pts = [(r[0], r[4]) for r in rows if r[1] == st_mid and r[6]]
        slope = fit_loglog_slope([p[0] for p in pts], [abs(p[1]) for p in pts])
        lo, hi = checks["slope_s"]
        ok = lo <= slope <= hi
        passed = passed and ok
        msg.append(f"slope_s={slope:.4f} in [{lo},{hi}]: {ok}")
    if "slope_t" in checks:
        ss_mid = ex["sigma_s"][len(ex["sigma_s"]) // 2]
        pts = [(r[1], r[4]) for r in rows if r[0] == ss_mid and r[6]]
        slope = fit_loglog_slope([p[0] for p in pts], [abs(p[1]) for p in pts])
        lo, hi = checks["slope_t"]
        ok = lo <= slope <= hi
        passed = passed and ok
        msg.append(f"slope_t={slope:.4f} in [{lo},{hi}]: {ok}")
    if "massless_ratio_spread" in checks:
        vals = [r[4] * r[0] * (r[0] ** 2 + r[1] ** 2) / r[1] for r in rows if r[6]]
        spread = (max(vals) - min(vals)) / abs(np.mean(vals))
        ok = spread <= checks["massless_ratio_spread"] * rc.tol_scale
        passed = passed and ok
        msg.append(f"ratio_spread={spread:.3e}: {ok}")
    return ExperimentResult(ex["name"], ex["kind"], "done", passed, [str(out)], message="; ".join(msg))


def _run_sharpness_scan(ex, rc: ResolvedConfig, outdir: Path) -> ExperimentResult:
    rows = []
    passed = True
    for sig in ex["sigmas"]:
        for rv in ex["r_values"]:
            st = sharpness(float(sig), float(rv))
            ok = st >= math.sqrt(rv) - 1e-12
            rows.append((sig, rv, st, math.sqrt(rv), ok))
            passed = passed and ok
    out = outdir / f"{ex['name']}.csv"
    write_csv(out, ["sigma", "R", "sigma_tilde", "bound", "ok"], rows)
    return ExperimentResult(ex["name"], ex["kind"], "done", passed, [str(out)])


def _run_identity_suite(ex, rc: ResolvedConfig, outdir: Path) -> ExperimentResult:
    f = rc.functions[ex["function"]]
    probe = rc.probes[ex["probe"]] if ex.get("probe") else GaussianProbe(1.0)
    cut_times = ex.get("cut_times", [0.0])
    tol = float(ex.get("tolerance", 1e-6)) * rc.tol_scale
    rows = []
    passed = True

    for tc in cut_times:
        rep = continuous_additivity_check(f, float(tc), rc.model, rc.quadrature, tolerance=tol)
        rows.append((rep.check, _param_hash(ex["function"], tc), rep.residual, rep.tolerance, rep.passed))
        passed = passed and rep.passed
        psi_p, psi_m = canonical_probe_split(probe)
        repc = convolution_identity_check(f, float(tc), psi_p, psi_m, rc.model, rc.quadrature, tolerance=tol)
        rows.append((repc.check, _param_hash(ex["function"], tc, probe.sigma), repc.residual, repc.tolerance, repc.passed))
        passed = passed and repc.passed

    # overlap identity on an (s - s') grid
    kernel = kraus_kernel(f, probe, rc.model, rc.quadrature)
    stol = 1e-8 * rc.tol_scale
    for tau in np.linspace(-2.0, 2.0, int(ex.get("overlap_points", 21))):
        scalar, opres, F = overlap_identity([1.0], kernel, float(tau), 0.0)
        resid = abs(scalar - F) + opres
        ok = resid <= stol
        rows.append(("overlap_identity", _param_hash(ex["function"], tau), resid, stol, ok))
        passed = passed and ok

    # hammerstein from a mid-support split of f with an overlapping middle
    box = f.support()
    tc = 0.5 * (box.tmin + box.tmax)
    f1, f3 = f.cut(tc)
    f2 = f * float(ex.get("hammerstein_middle_scale", 0.5))
    reph = hammerstein_check(f1, f2, f3, rc.model, rc.quadrature, tolerance=tol)
    rows.append((reph.check, _param_hash(ex["function"], tc), reph.residual, reph.tolerance, reph.passed))
    passed = passed and reph.passed

    out = outdir / f"{ex['name']}.csv"
    write_csv(out, ["check", "param_hash", "residual", "tolerance", "pass"], rows)
    return ExperimentResult(ex["name"], ex["kind"], "done", passed, [str(out)])


def _build_scenario(sc: dict, rc: ResolvedConfig) -> tuple[SorkinScenario, np.ndarray, dict]:
    geo = sc.get("geometry", "kick")
    if isinstance(geo, dict):
        h, f, g = (rc.functions[geo[k]] for k in ("h", "f", "g"))
    elif geo == "kick":
        h, f, g = sorkin_kick_geometry(dim=rc.model.dim)
    else:
        h, f, g = sorkin_bump_geometry(dim=rc.model.dim)
    fb = sc.get("family", {})
    fam = LambdaFamily(h, fb.get("kind", "amplitude"), tuple(fb.get("direction", [1.0] + [0.0] * (rc.model.dim - 1))))
    lams = np.linspace(float(fb.get("lambda_min", 0.2)), float(fb.get("lambda_max", 2.0)), int(fb.get("points", 21)))

    def op_of(block, default_kind):
        block = block or {}
        kind = block.get("kind", default_kind)
        probe = rc.probes[block["probe"]] if block.get("probe") else None
        if kind in ("kraus_channel", "quadratic_kraus") and probe is None:
            probe = GaussianProbe(1.0)
        return OperationSpec(kind, probe)

    scn = SorkinScenario(
        rc.model,
        fam,
        f,
        g,
        op_of(sc.get("op_a"), "weyl_kick"),
        op_of(sc.get("op_b"), "weyl_kick"),
        sc.get("observable", "phi_g"),
        tuple(sc["state"]) if isinstance(sc.get("state"), (list, tuple)) else sc.get("state", "vacuum"),
        rc.quadrature,
    )
    return scn, lams, sc


def _run_sorkin(ex, rc: ResolvedConfig, outdir: Path) -> ExperimentResult:
    scn, lams, sc = _build_scenario(ex["scenario"], rc)
    variant = sc.get("variant", "signalling")
    tol = float(ex.get("tolerance", 1e-6)) * rc.tol_scale
    outputs = []
    rows = []
    msg = ""
    if variant == "signalling":
        rep = signalling_functional(scn, lams)
        rows = list(rep.rows())
        if rep.predictions is not None and np.max(np.abs(rep.predictions)) > 0:
            err = np.max(np.abs(np.abs(rep.deltas) - np.abs(rep.predictions))) / np.max(np.abs(rep.predictions))
            passed = err <= tol
            msg = f"max relative prediction error {err:.3e}"
        else:
            scale = max(abs(rep.baseline), 1e-300)
            passed = rep.max_abs_delta <= tol * scale
            msg = f"max |delta| {rep.max_abs_delta:.3e} against scale {scale:.3e}"
    elif variant == "quadratic_kraus":
        rep = quadratic_kraus_scenario(scn, lams)
        rows = list(rep.rows())
        scale = max(np.max(np.abs(rep.predictions)), 1e-300)
        err = np.max(np.abs(rep.deltas - rep.predictions)) / scale
        passed = err <= tol
        if scn.observable == "phi_g_squared":
            passed = passed and (np.ptp(np.abs(rep.deltas)) > 10 * tol * scale)
        msg = f"max relative oracle error {err:.3e}"
    elif variant == "kraus_half":
        cut_times = sc.get("cut_times", [scn.f.support().tmin + 0.6 * (scn.f.support().tmax - scn.f.support().tmin)])
        worst = 0.0
        for tc in cut_times:
            out = kraus_channel_scenario(scn, float(tc), lams)
            worst = max(worst, out["max_half_residual"] / out["scale"])
            for lam, vf, vp, vu in zip(out["lambdas"], out["full_composition"], out["past_part_only"], out["uncut_channel"]):
                rows.append((lam, vf, vp, vf - vp, np.real(vu), abs(vf - vp)))
        passed = worst <= tol
        msg = f"max relative half-operation residual {worst:.3e}"
    elif variant == "effective_scan":
        cut_times = sc.get("cut_times")
        if not cut_times:
            box = scn.f.support()
            cut_times = list(np.linspace(box.tmin - 0.2, box.tmax + 0.2, 9))
        data = effective_kraus_scan(scn, cut_times)
        out2 = outdir / f"{ex['name']}_scan.csv"
        write_csv(
            out2,
            ["t_cut", "value_re", "value_im", "change", "r_minus", "delta_fm_g", "dephasing"],
            [
                (r["t_cut"], np.real(r["value"]), np.imag(r["value"]), r["change"], r["r_minus"], r["delta_fm_g"], r["dephasing"])
                for r in data
            ],
        )
        outputs.append(str(out2))
        tail = [r["change"] for r in data[-2:] if not math.isnan(r["change"])]
        passed = bool(tail) and max(tail) <= tol
        msg = f"stabilisation tail change {max(tail) if tail else math.nan:.3e}"
        rows = [(r["t_cut"], r["value"], 0.0, r["change"], r["dephasing"], r["r_minus"]) for r in data]
    else:
        raise ConfigError(f"experiment {ex['name']!r}: unknown sorkin variant {variant!r}")
    out = outdir / f"{ex['name']}.csv"
    write_csv(out, ["lambda", "value", "baseline", "delta", "prediction", "abs_err"], rows)
    outputs.insert(0, str(out))
    geo_txt = validate_geometry(scn, lams).text_block()
    gout = outdir / f"{ex['name']}_geometry.txt"
    gout.write_text(geo_txt + "\n")
    outputs.append(str(gout))
    return ExperimentResult(ex["name"], ex["kind"], "done", passed, outputs, message=msg)


def _random_element(kin, rng: np.random.Generator, max_degree: int = 4) -> AlgebraElement:
    n = kin.n
    X = AlgebraElement.zero(kin)
    for _ in range(rng.integers(1, 4)):
        factors = []
        for _ in range(rng.integers(1, max_degree + 1)):
            if rng.random() < 0.5:
                factors.append(AlgebraElement.field(kin, rng.normal(scale=0.7, size=n)))
            else:
                factors.append(AlgebraElement.weyl(kin, rng.normal(scale=0.6, size=n)))
        term = factors[0]
        for fac in factors[1:]:
            term = term * fac
        X = X + complex(rng.normal(), rng.normal()) * term
    return X


def _run_oracle_suite(ex, rc: ResolvedConfig, outdir: Path) -> ExperimentResult:
    rng = np.random.default_rng(rc.seed + 1000)
    n_el = int(ex.get("n_elements", 20))
    n_gen = int(ex.get("generators", 3))
    trunc = int(ex.get("truncation", 60))
    tol = float(ex.get("tolerance", 1e-6)) * rc.tol_scale
    V = rng.normal(size=(n_gen, n_gen)) * 0.45 + 1j * rng.normal(size=(n_gen, n_gen)) * 0.45
    M = V @ V.conj().T
    kin = Kinematics.from_matrix(2.0 * M.imag)
    state = QuasiFreeState.make(np.zeros(n_gen), M.real)
    oracle = FockOracle(kin, state, trunc)
    oracle_hi = FockOracle(kin, state, trunc + 10)
    rows = []
    passed = True
    for i in range(n_el):
        X = _random_element(kin, rng)
        a = expectation(state, X)
        b = oracle.expectation(X)
        b2 = oracle_hi.expectation(X)
        err = abs(a - b2)
        stab = abs(b - b2)
        scale = max(abs(a), 1.0)
        ok = err <= tol * scale and stab <= tol * scale
        rows.append((i, np.real(a), np.imag(a), np.real(b2), np.imag(b2), err, stab, ok))
        passed = passed and ok
    out = outdir / f"{ex['name']}.csv"
    write_csv(out, ["index", "ccr_re", "ccr_im", "fock_re", "fock_im", "abs_err", "stability", "pass"], rows)
    return ExperimentResult(ex["name"], ex["kind"], "done", passed, [str(out)])


_RUNNERS = {
    "propagator_eval": _run_propagator_eval,
    "scaling_scan": _run_scaling_scan,
    "sharpness_scan": _run_sharpness_scan,
    "identity_suite": _run_identity_suite,
    "sorkin_run": _run_sorkin,
    "oracle_suite": _run_oracle_suite,
}


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def run(rc: ResolvedConfig, only: str | None = None, jobs: int = 1) -> int:
    outdir = Path(rc.output)
    outdir.mkdir(parents=True, exist_ok=True)
    experiments = [ex for ex in rc.experiments if only is None or ex["name"] == only]
    if only is not None and not experiments:
        raise ConfigError(f"--only: no experiment named {only!r}")
    results: list[ExperimentResult] = []

    def run_one(ex):
        t0 = time.perf_counter()
        try:
            res = _RUNNERS[ex["kind"]](ex, rc, outdir)
        except ConfigError:
            raise
        except Exception as exc:  # runtime failure: recorded, remaining experiments still run
            res = ExperimentResult(ex["name"], ex["kind"], "error", False, [], message=f"{type(exc).__name__}: {exc}")
        res.wall_time = time.perf_counter() - t0
        return res

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_one, experiments))
    else:
        results = [run_one(ex) for ex in experiments]

    for pl in rc.plots:
        try:
            src = outdir / f"{pl['experiment']}.csv"
            dst = outdir / f"{pl.get('name', pl['experiment'])}.svg"
            write_svg_plot(src, dst, pl.get("kind", "line"), pl["x"], pl["y"], pl.get("annotate_slope", False))
        except ConfigError as exc:
            results.append(ExperimentResult(str(pl.get("name", "plot")), "plot", "error", False, [], message=str(exc)))

    overall = bool(all(bool(r.checks_passed) and r.status == "done" for r in results))
    manifest = {
        "config_hash": rc.config_hash(),
        "version": __version__,
        "seed": rc.seed,
        "overall_pass": overall,
        "experiments": [
            {
                "name": r.name,
                "kind": r.kind,
                "status": r.status,
                "checks_passed": bool(r.checks_passed),
                "wall_time_s": round(r.wall_time, 3),
                "outputs": r.outputs,
                "message": r.message,
            }
            for r in results
        ],
    }
    write_manifest(outdir / "run_manifest.json", manifest)
    for r in results:
        print(f"[{'PASS' if r.checks_passed and r.status == 'done' else 'FAIL'}] {r.name} ({r.kind}) {r.message}")
    return 0 if overall else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fieldprobe", description="Run configured field-measurement experiments.")
    parser.add_argument("--config", required=True, help="YAML or JSON experiment file")
    parser.add_argument("--out", default=None, help="output directory (overrides config/output)")
    parser.add_argument("--tol-scale", type=float, default=1.0, help="multiply all check tolerances")
    parser.add_argument("--only", default=None, help="run a single experiment by name")
    parser.add_argument("--list", action="store_true", help="validate the config and print the plan")
    parser.add_argument("--jobs", type=int, default=1, help="run independent experiments in parallel")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        rc = resolve_config(cfg, args.tol_scale)
    except (ConfigError, FileNotFoundError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        rc.output = args.out
    if args.list:
        print(f"model: mass={rc.model.mass} dim={rc.model.dim}; seed={rc.seed}; output={rc.output}")
        for ex in rc.experiments:
            print(f"  {ex['name']}: {ex['kind']}")
        for pl in rc.plots:
            print(f"  plot {pl.get('name', pl['experiment'])}: {pl.get('kind', 'line')} of {pl['experiment']}")
        return 0
    try:
        return run(rc, args.only, max(1, args.jobs))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
