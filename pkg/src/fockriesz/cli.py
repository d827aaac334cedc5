"""Command-line front end: ``fockriesz <command> ...``.

Every JSON output carries a header with the tool version, the full
configuration and the golden constants it consumed, and is validated against
``schemas/report.json`` before it is written. CSV outputs start with ``#``
comment lines holding the same header.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import traceback
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from . import report as rp
from .criteria import theorem_verdict
from .golden import GOLDEN
from .gram import bari_defect, frame_sweep
from .products import (MatrixLab, ProductContext, envelope_grid, envelope_sweep,
                       factors_for_tail, product_eval_log, uniform_interp_L)
from .sequences import (SequenceSpec, SpecError, is_d_separated, linear_spec, log_separation,
                        realize, reference_spec)
from .weights import phi_log

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2


class CliError(Exception):
    """A user-facing failure; ``where`` names the field or module at fault."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _report_schema() -> dict:
    return json.loads(resources.files("fockriesz").joinpath("schemas/report.json").read_text())


def validate_report(doc: dict) -> None:
    import jsonschema

    jsonschema.validate(json.loads(rp.dumps(doc)), _report_schema())


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def emit_json(command: str, config: dict, results, out: str | None, golden_keys=()) -> None:
    doc = rp.envelope(command, config, results, golden_keys)
    validate_report(doc)
    _emit(rp.dumps(doc), out)


def emit_csv(command: str, config: dict, header: list[str], rows, out: str | None) -> None:
    meta = f"# fockriesz {__version__} {command}\n# config {json.dumps(rp._plain(config), sort_keys=True)}\n"
    _emit(meta + rp.to_csv(header, rows), out)


def emit_table(args, command: str, config: dict, header: list[str], rows) -> None:
    if args.format == "json":
        emit_json(command, config, [dict(zip(header, r)) for r in rows], args.out)
    else:
        emit_csv(command, config, header, rows, args.out)


def load_spec(path: str) -> SequenceSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError("--spec", str(exc)) from None
    return SequenceSpec.from_json(text)


def _load_json(path: str, flag: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise CliError(flag, str(exc)) from None
    except json.JSONDecodeError as exc:
        raise CliError(flag, f"invalid JSON: {exc}") from None


def _range(text: str, flag: str) -> range:
    a, sep, b = text.partition("..")
    try:
        lo, hi = int(a), int(b)
    except ValueError:
        raise CliError(flag, f"expected a..b, got {text!r}") from None
    if not sep or hi < lo:
        raise CliError(flag, f"expected a..b with a <= b, got {text!r}")
    return range(lo, hi + 1)


def _config(args) -> dict:
    skip = {"func", "out", "format"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_moments(args) -> int:
    rows = rp.moment_rows(args.beta, args.n_max, args.tol)
    emit_table(args, "moments", _config(args), ["n", "w_exact", "w_asymptotic", "diff"], rows)
    return EXIT_OK


def cmd_kernel(args) -> int:
    try:
        s_values = rp.parse_points(args.points, args.beta)
    except ValueError as exc:
        raise CliError("--points", str(exc)) from None
    rows = rp.kernel_rows(args.beta, s_values)
    header = ["s", "exact", "estimate", "kernEstim_lower", "kernEstim_upper",
              "branch_zrho", "branch_rho2"]
    emit_table(args, "kernel", _config(args), header, [[r[h] for h in header] for r in rows])
    return EXIT_OK


def cmd_seq_gen(args) -> int:
    doc = {"beta": args.beta, "count": args.count,
           "deltas": {"kind": args.kind, "params": {"c": args.c, "d": args.d, "e": args.e}},
           "thetas": {"kind": "constant", "params": {"c": args.theta}}}
    SequenceSpec.from_dict(doc)  # validate before writing
    _emit(json.dumps(doc, sort_keys=True, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_seq_inspect(args) -> int:
    spec = load_spec(args.spec)
    seq = realize(spec)
    sep = is_d_separated(seq, args.d_min)
    inf_gap, union = log_separation(seq)
    head = min(len(seq), args.head)
    results = {"beta": spec.beta, "count": spec.count, "separation": sep,
               "log_gap_inf": inf_gap, "union_count": union,
               "head": [{"index": int(seq.order[i]), "u": float(seq.u[i]), "theta": float(seq.theta[i])}
                        for i in range(head)]}
    emit_json("seq inspect", _config(args), results, args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    spec = load_spec(args.spec)
    n_max = spec.count - 1 if args.n_max is None else args.n_max
    burn = n_max // 4 if args.burn_in is None else args.burn_in
    try:
        rep = theorem_verdict(spec, d_min=args.d_min, N_max=args.N_max, horizon=(burn, n_max))
    except ValueError as exc:
        raise CliError("--n-max/--burn-in", str(exc)) from None
    emit_json("check", _config(args), rep, args.out)
    if args.strict and rep.verdict == "inconclusive":
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def _grid_arg(text: str | None, default_s_max: float):
    if text is None:
        return default_s_max, 200
    try:
        s_max, count = text.split(",")
        return float(s_max), int(count)
    except ValueError:
        raise CliError("--grid", f"expected s_max,count, got {text!r}") from None


def cmd_product(args) -> int:
    spec = load_spec(args.spec)
    seq = realize(spec)
    s_max, count = _grid_arg(args.grid, float(seq.u[min(30, len(seq) - 1)]))
    grid = envelope_grid(s_max, count, args.seed)
    try:
        M = args.M or factors_for_tail(seq, s_max)
    except ValueError as exc:
        raise CliError("--grid", str(exc)) from None
    config = _config(args)
    config["M"] = M
    if args.envelope:
        env = envelope_sweep(seq, args.delta, args.eps, grid, M)
        results = {"M": env.M, "constant": env.constant, "band_width": env.band_width,
                   "sup_minus_slack": env.sup_minus_slack, "inf_plus_slack": env.inf_plus_slack,
                   "skipped": env.skipped,
                   "samples": [{"s": x.s, "angle": x.angle, "log_G": x.log_G,
                                "dist_log": x.dist_log, "excess": x.excess} for x in env.samples]}
        emit_json("product", config, results, args.out, ["envelope_band_width_max"])
        return EXIT_OK
    rows = []
    for s, a in grid:
        pv = product_eval_log(seq, M, (s, a))
        zero = pv.zero_index is not None
        rows.append((s, a, pv.value.log_magnitude, pv.value.argument, int(zero)))
    emit_table(args, "product", config, ["s", "angle", "log_abs_G", "arg_G", "is_zero"], rows)
    return EXIT_OK


def _parse_values(doc) -> np.ndarray:
    if not isinstance(doc, list) or not doc:
        raise CliError("--data", "expected a nonempty list of values")
    out = []
    for i, v in enumerate(doc):
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            out.append(complex(v))
        elif isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
            out.append(complex(v[0], v[1]))
        else:
            raise CliError(f"--data/{i}", "expected a number or a [re, im] pair")
    return np.array(out)


def _parse_points(doc) -> list[tuple[float, float]]:
    if not isinstance(doc, list) or not doc:
        raise CliError("--eval", "expected a nonempty list of [log_modulus, angle] pairs")
    out = []
    for i, z in enumerate(doc):
        if not (isinstance(z, list) and len(z) == 2 and all(isinstance(x, (int, float)) for x in z)):
            raise CliError(f"--eval/{i}", "expected a [log_modulus, angle] pair")
        out.append((float(z[0]), float(z[1])))
    return out


def cmd_interp(args) -> int:
    spec = load_spec(args.spec)
    seq = realize(spec)
    v = _parse_values(_load_json(args.data, "--data"))
    zs = _parse_points(_load_json(args.eval, "--eval"))
    M = args.M or len(seq)
    if len(v) > M:
        raise CliError("--data", f"{len(v)} values but only {M} nodes")
    ctx = ProductContext(seq, M)
    star = None if args.star_origin else (0.0, math.pi)
    rows = []
    for s, a in zs:
        val = uniform_interp_L(ctx, v, (s, a), star, complex(args.v_star))
        rows.append((s, a, val.log_magnitude, val.argument,
                     val.log_magnitude - phi_log(max(s, 0.0), spec.params)))
    emit_table(args, "interp", _config(args), ["s", "angle", "log_abs_L", "arg_L", "log_abs_L_minus_phi"], rows)
    return EXIT_OK


def cmd_matrix(args) -> int:
    rows_txt, sep, cols_txt = args.range.partition(",")
    if not sep:
        raise CliError("--range", "expected n0..n1,m0..m1")
    rows_r, cols_r = _range(rows_txt, "--range"), _range(cols_txt, "--range")
    spec = load_spec(args.spec) if args.spec else reference_spec(args.beta, args.count)
    seq = realize(spec)
    M = args.M or len(seq)
    if max(rows_r.stop, cols_r.stop) > M:
        raise CliError("--range", f"indices must stay below M = {M}")
    lab = MatrixLab(seq, M, None if args.star_origin else (0.0, math.pi))
    block = lab.block(args.which, rows_r, cols_r)
    rows = [(n, m, block[i, j]) for i, n in enumerate(rows_r) for j, m in enumerate(cols_r)]
    emit_table(args, "matrix", _config(args), ["n", "m", f"log_abs_{args.which}"], rows)
    return EXIT_OK


def cmd_gram(args) -> int:
    spec = load_spec(args.spec)
    try:
        sizes = [int(x) for x in args.sizes.split(",")]
    except ValueError:
        raise CliError("--sizes", f"expected comma-separated integers, got {args.sizes!r}") from None
    try:
        rows, trend = frame_sweep(spec, sizes)
    except ValueError as exc:
        raise CliError("--sizes", str(exc)) from None
    out = [(r.M, r.lambda_min, r.lambda_max, r.cond, trend) for r in rows]
    emit_table(args, "gram", _config(args), ["M", "lambda_min", "lambda_max", "cond", "trend"], out)
    return EXIT_OK


def cmd_bari(args) -> int:
    rep = bari_defect(args.beta, range(0, args.n_max + 1), k_window=args.k_window)
    rows = [(int(n), rep.J1[i], rep.J2[i], rep.defect[i], rep.partial_sums[i], rep.tail_bound[i])
            for i, n in enumerate(rep.n)]
    emit_table(args, "bari", _config(args),
               ["n", "J1", "J2", "defect", "partial_sum", "window_tail_bound"], rows)
    return EXIT_OK


def cmd_report(args) -> int:
    results = rp.standard_bundle(seed=args.seed, jobs=args.jobs)
    config = {"seed": args.seed, "betas": [0.3, 0.5, 0.7], "kernel_samples": 100,
              "phase_c": [0.1, 0.3, 0.4, 0.5, 0.7], "phase_count": 256, "gram_sizes": [8, 16, 32, 64],
              "envelope_samples": 200, "integral_alphas": [0.5, 1.0, 1.0001, 2.0, 3.0],
              "bari_n": [0, 60], "biorthogonal_M": 40}
    # --jobs only changes speed, so it stays out of the header
    emit_json("report", config, results, args.out, sorted(GOLDEN))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """Usage errors exit 1; exit 2 is reserved for inconclusive verdicts."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _beta(text: str) -> float:
    try:
        b = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < b <= 1.0:
        raise argparse.ArgumentTypeError(f"beta must lie in (0, 1], got {b}")
    return b


def _positive_int(text: str) -> int:
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if k < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {k}")
    return k


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(
        prog="fockriesz",
        description="Numerical experiments on kernels, sequences and Riesz-basis criteria "
                    "in radial Fock spaces with weight phi(r) = (log+ r)^(1+beta).",
        epilog="Exit codes: 0 success, 1 error, 2 inconclusive verdict under --strict. "
               f"Default worker count comes from ${rp.JOBS_ENV}.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, fmt=True):
        p.add_argument("--out", help="write here instead of stdout")
        if fmt:
            p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--jobs", type=_positive_int, default=rp.default_jobs(),
                       help=f"worker processes (default from ${rp.JOBS_ENV}, else 1)")

    p = sub.add_parser("moments", help="exact and asymptotic log-moments",
                       description="CSV columns: n, w_exact = log||z^n||^2, w_asymptotic, diff (nats).")
    p.add_argument("--beta", type=_beta, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    common(p)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("kernel", help="kernel diagonal against its two-sided estimate",
                       description="CSV columns: s = log|z|, exact = log||k_z||^2, estimate, "
                                   "kernEstim_lower, kernEstim_upper, branch_zrho, branch_rho2 (nats).")
    p.add_argument("--beta", type=_beta, required=True)
    p.add_argument("--points", required=True, help="lambda:a..b | sigma:a..b | grid:s0,s1,count")
    common(p)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("seq", help="generate or inspect sequence specs")
    seq_sub = p.add_subparsers(dest="seq_command", required=True)
    g = seq_sub.add_parser("gen", help="write a sequence spec JSON",
                           description="delta_n by kind: constant c; linear c(1+n)+d; "
                                       "power c(1+n)^e; alternating (-1)^n c(1+n)^e.")
    g.add_argument("--beta", type=_beta, required=True)
    g.add_argument("--count", type=_positive_int, required=True)
    g.add_argument("--kind", choices=("constant", "linear", "power", "alternating"), default="linear")
    g.add_argument("--c", type=float, default=0.0)
    g.add_argument("--d", type=float, default=0.0)
    g.add_argument("--e", type=float, default=1.0)
    g.add_argument("--theta", type=float, default=0.0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_seq_gen)
    i = seq_sub.add_parser("inspect", help="separation summary of a spec (JSON)")
    i.add_argument("--spec", required=True)
    i.add_argument("--d-min", type=float, default=1e-3)
    i.add_argument("--head", type=int, default=10)
    i.add_argument("--out")
    i.set_defaults(func=cmd_seq_inspect)

    p = sub.add_parser("check", help="evaluate the three-condition criterion (JSON)")
    p.add_argument("--spec", required=True)
    p.add_argument("--d-min", type=float, default=1e-3)
    p.add_argument("--n-max", type=int, help="last index of the horizon (default: count - 1)")
    p.add_argument("--burn-in", type=int, help="first index of the horizon (default: n_max // 4)")
    p.add_argument("--N-max", type=_positive_int, default=4, help="largest window length")
    p.add_argument("--strict", action="store_true", help="exit 2 on an inconclusive verdict")
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("product", help="truncated product on a seeded grid",
                       description="CSV columns: s, angle, log_abs_G, arg_G, is_zero. "
                                   "With --envelope, JSON with the excess band and per-sample rows.")
    p.add_argument("--spec", required=True)
    p.add_argument("--grid", help="s_max,count (default: u_30 of the sequence, 200)")
    p.add_argument("--seed", type=int, default=rp.DEFAULT_SEED)
    p.add_argument("--M", type=int, help="factor count (default: tail below 1e-12 at s_max)")
    p.add_argument("--envelope", action="store_true")
    p.add_argument("--delta", type=float, default=0.0, help="slack coefficient delta")
    p.add_argument("--eps", type=float, default=0.0, help="slack coefficient epsilon")
    common(p)
    p.set_defaults(func=cmd_product)

    p = sub.add_parser("interp", help="Lagrange-type interpolation L_v",
                       description="--data: list of values (number or [re, im]); --eval: list of "
                                   "[log_modulus, angle]. CSV columns: s, angle, log_abs_L, arg_L, "
                                   "log_abs_L_minus_phi.")
    p.add_argument("--spec", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--eval", required=True)
    p.add_argument("--M", type=int)
    p.add_argument("--star-origin", action="store_true", help="extra node at 0 instead of -1")
    p.add_argument("--v-star", type=float, default=0.0, help="value at the extra node")
    common(p)
    p.set_defaults(func=cmd_interp)

    p = sub.add_parser("matrix", help="log-entries of the A, B or C matrices",
                       description="CSV columns: n, m, log_abs_<which>.")
    p.add_argument("--which", choices=("A", "B", "C"), required=True)
    p.add_argument("--range", required=True, help="n0..n1,m0..m1")
    p.add_argument("--spec", help="perturbed sequence (default: reference)")
    p.add_argument("--beta", type=_beta, default=0.5)
    p.add_argument("--count", type=_positive_int, default=60)
    p.add_argument("--M", type=int)
    p.add_argument("--star-origin", action="store_true")
    common(p)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("gram", help="extreme eigenvalues of Gram sections",
                       description="CSV columns: M, lambda_min, lambda_max, cond, trend.")
    p.add_argument("--spec", required=True)
    p.add_argument("--sizes", default="8,16,32,64")
    common(p)
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("bari", help="per-n Bari defect of the reference sequence",
                       description="CSV columns: n, J1, J2, defect, partial_sum, window_tail_bound.")
    p.add_argument("--beta", type=_beta, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--k-window", type=_positive_int, default=12)
    common(p)
    p.set_defaults(func=cmd_bari)

    p = sub.add_parser("report", help="every standard sweep as one JSON bundle")
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=rp.DEFAULT_SEED)
    p.add_argument("--jobs", type=_positive_int, default=rp.default_jobs())
    p.set_defaults(func=cmd_report)
    return ap


def _origin(exc: BaseException) -> str:
    """Module of the innermost package frame that raised."""
    where = "fockriesz"
    for frame, _ in traceback.walk_tb(exc.__traceback__):
        mod = frame.f_globals.get("__name__", "")
        if mod.startswith("fockriesz."):
            where = mod
    return where


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpecError as exc:
        print(f"error: invalid spec field '{exc.path}': {exc.message}", file=sys.stderr)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (ValueError, ArithmeticError) as exc:
        print(f"error [{_origin(exc)}]: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
