"""Deterministic report serialization and the standard experiment sweeps."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Iterable

import numpy as np

from . import __version__
from .criteria import delta_threshold, kadets_threshold, theorem_verdict
from .golden import GOLDEN
from .gram import bari_defect, frame_sweep
from .kernel import kernel_diagnostics
from .products import (MatrixLab, ProductContext, c_distance, envelope_grid, envelope_sweep,
                       fit_decay_rates, integral_test_partial)
from .sequences import (SequenceSpec, WeightParams, lambda_log_modulus, linear_spec, realize,
                        reference_spec, sigma_log_modulus)
from .weights import (build_moment_table, moment_log_asymptotic, moment_log_exact, table_size_for)

JOBS_ENV = "FOCKRIESZ_JOBS"
DEFAULT_SEED = 20240229


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


def parallel_map(fn: Callable, items: Iterable, jobs: int = 1) -> list:
    """Ordered map; worker processes only change speed, never the output."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def fmt_float(x: float) -> str:
    """17 significant digits; non-finite values become JSON strings."""
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return "%.17g" % x


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    return obj


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON with sorted keys and ``%.17g`` floats, byte-stable across runs."""
    obj = _plain(obj)
    pad = " " * indent

    def enc(o, level):
        if o is None:
            return "null"
        if o is True:
            return "true"
        if o is False:
            return "false"
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return fmt_float(o)
        if isinstance(o, str):
            import json
            return json.dumps(o)
        inner = pad * (level + 1)
        if isinstance(o, dict):
            if not o:
                return "{}"
            parts = [f"{inner}{enc(str(k), 0)}: {enc(o[k], level + 1)}" for k in sorted(o)]
            return "{\n" + ",\n".join(parts) + "\n" + pad * level + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in o):
                return "[" + ", ".join(enc(v, 0) for v in o) + "]"
            return "[\n" + ",\n".join(inner + enc(v, level + 1) for v in o) + "\n" + pad * level + "]"
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return enc(obj, 0) + "\n"


def to_csv(header: list[str], rows: Iterable[Iterable]) -> str:
    def cell(v):
        if isinstance(v, (float, np.floating)):
            return fmt_float(float(v)).strip('"')
        return str(v)

    lines = [",".join(header)]
    lines += [",".join(cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def envelope(command: str, config: dict, results: Any, golden_keys: Iterable[str] = ()) -> dict:
    """Report header shared by every command."""
    return {
        "tool": "fockriesz",
        "version": __version__,
        "command": command,
        "config": config,
        "golden": {k: GOLDEN[k] for k in golden_keys},
        "results": results,
    }


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


def moment_rows(beta: float, n_max: int, tol: float = 1e-12) -> list[tuple]:
    rows = []
    for n in range(n_max + 1):
        ex = moment_log_exact(n, beta, tol)
        asy = moment_log_asymptotic(n, beta)
        rows.append((n, ex, asy, ex - asy))
    return rows


def moment_drift(beta: float, n_lo: int = 200, n_hi: int = 400) -> float:
    d = np.array([moment_log_exact(n, beta) - moment_log_asymptotic(n, beta)
                  for n in range(n_lo, n_hi + 1)])
    return float(np.max(np.abs(np.diff(d))))


def parse_points(spec: str, beta: float) -> list[float]:
    """``lambda:a..b``, ``sigma:a..b`` or ``grid:s0,s1,count`` into log-moduli."""
    kind, _, rng = spec.partition(":")
    if kind in ("lambda", "sigma"):
        a, _, b = rng.partition("..")
        idx = range(int(a), int(b) + 1)
        if kind == "lambda":
            return [lambda_log_modulus(n, beta) for n in idx]
        return [sigma_log_modulus(n, beta) for n in idx]
    if kind == "grid":
        s0, s1, count = rng.split(",")
        return [float(x) for x in np.linspace(float(s0), float(s1), int(count))]
    raise ValueError(f"unknown point set {spec!r}; use lambda:a..b, sigma:a..b or grid:s0,s1,count")


def kernel_rows(beta: float, s_values: list[float]) -> list[dict]:
    table = build_moment_table(table_size_for(max(s_values), beta), beta)
    out = []
    for s in s_values:
        d = kernel_diagnostics(s, beta, table)
        out.append({"s": s, "exact": d.exact_log_norm2, "estimate": d.estimate_log_norm2,
                    "kernEstim_lower": d.lower_log, "kernEstim_upper": d.upper_log,
                    "branch_zrho": d.branch_zrho, "branch_rho2": d.branch_rho2,
                    "laplacian_ratio_log": d.laplacian_ratio_log})
    return out


def kernel_width(beta: float, count: int = 100) -> dict:
    u40 = lambda_log_modulus(40, beta)
    s_values = [float(x) for x in np.linspace(1.0, u40, count)]
    rows = kernel_rows(beta, s_values)
    diff = np.array([r["exact"] - r["estimate"] for r in rows])
    lower_gap = np.array([r["exact"] - r["kernEstim_lower"] for r in rows])
    upper_gap = np.array([r["exact"] - r["kernEstim_upper"] for r in rows])
    return {"beta": beta, "count": count, "s_max": u40,
            "width": float(diff.max() - diff.min()),
            "min_exact_minus_lower": float(lower_gap.min()),
            "max_exact_minus_upper": float(upper_gap.max())}


def branch_gaps(beta: float, n_lo: int = 2, n_hi: int = 40) -> dict:
    lam, sig = [], []
    table = build_moment_table(table_size_for(lambda_log_modulus(n_hi, beta), beta), beta)
    for n in range(n_lo, n_hi + 1):
        d = kernel_diagnostics(lambda_log_modulus(n, beta), beta, table)
        lam.append(d.branch_zrho - d.branch_rho2)
        d = kernel_diagnostics(sigma_log_modulus(n, beta), beta, table)
        sig.append(d.branch_rho2 - d.branch_zrho)
    return {"beta": beta, "lambda_gap_min": min(lam), "sigma_gap_min": min(sig)}


def _phase_row(args) -> dict:
    beta, c, count, sizes, d_min = args
    spec = linear_spec(beta, count, c)
    rep = theorem_verdict(spec, d_min=d_min)
    rows, trend = frame_sweep(spec, sizes)
    return {"c": c, "verdict": rep.verdict, "violated_condition": rep.violated_condition,
            "trend": trend, "lambda_min": [r.lambda_min for r in rows],
            "lambda_max": [r.lambda_max for r in rows],
            # recorded side by side; no relation between the two is assumed
            "margin": {str(n): w.tail_margin for n, w in rep.cond3.items()},
            "cond": [r.cond for r in rows]}


def phase_transition(beta: float = 0.5, cs=(0.1, 0.3, 0.4, 0.5, 0.7), count: int = 256,
                     sizes=(8, 16, 32, 64), d_min: float = 1e-3, jobs: int = 1) -> list[dict]:
    """Verdict and Gram trend for ``delta_n = c (1 + n)`` at each ``c``."""
    return parallel_map(_phase_row, [(beta, c, count, tuple(sizes), d_min) for c in cs], jobs)


def standard_bundle(seed: int = DEFAULT_SEED, jobs: int = 1) -> dict:
    """Every standard sweep, in a fixed order."""
    betas = (0.3, 0.5, 0.7)
    out: dict[str, Any] = {}
    out["moments"] = {str(b): {"max_step_200_400": v}
                      for b, v in zip(betas, parallel_map(moment_drift, betas, jobs))}
    out["kernel"] = {str(b): {**kernel_width(b), **branch_gaps(b)} for b in betas}
    out["thresholds"] = {"delta": delta_threshold(0.5), "kadets": kadets_threshold(0.5)}
    out["phase_transition"] = phase_transition(jobs=jobs)

    lam = realize(reference_spec(0.5, 80))
    grid = envelope_grid(float(lam.u[30]), 200, seed)
    out["seed"] = seed
    env = envelope_sweep(lam, 0.0, 0.0, grid)
    env2 = envelope_sweep(lam, 0.0, 0.0, grid, M=2 * env.M)
    out["envelope"] = {"M": env.M, "constant": env.constant, "band_width": env.band_width,
                       "max_change_doubling_M": max(abs(a.excess - b.excess)
                                                    for a, b in zip(env.samples, env2.samples))}

    big = realize(reference_spec(0.5, 2000))
    out["integral_test"] = {str(a): integral_test_partial(big, a).converged
                            for a in (0.5, 1.0, 1.0001, 2.0, 3.0)}

    bari = bari_defect(0.5, range(0, 61))
    out["bari"] = {"tail_30_60": bari.tail(30, 60), "total": float(bari.partial_sums[-1]),
                   "J1_le_J2": bool(np.all(bari.J1 <= bari.J2))}

    ctx = ProductContext(lam, 40)
    out["biorthogonal"] = {
        "max_pairing_error": max(abs(ctx.pairing(n, m) - (n == m)) for n in range(11) for m in range(11)),
        "norms": [math.exp(ctx.biorthogonal_g_norm_log(n)) for n in range(11)]}

    out["matrix"] = matrix_summary()
    return out


def matrix_summary(beta: float = 0.5, count: int = 60) -> dict:
    rot = realize(SequenceSpec(WeightParams(beta), np.zeros(count), np.full(count, math.pi / 2)))
    lab = MatrixLab(rot, count)
    xs, ys = [], []
    for n in range(25):
        for m in range(25):
            if m != n:
                xs.append(c_distance(n, float(rot.u[m]), beta))
                ys.append(lab.log_C(n, m))
    slope, lo, hi = fit_decay_rates(ys, xs)
    viol = MatrixLab(realize(linear_spec(beta, count, 0.6)), count)
    # the band starts at A_(2,1); A_(1,0) still sees the unperturbed origin factor
    band = [viol.log_A(n + 1, n) for n in range(1, 40)]
    return {"C_decay_slope": slope, "C_decay_min": lo, "C_decay_max": hi,
            "A_witness_band": band,
            "A_witness_monotone": bool(np.all(np.diff(band) > 0))}
