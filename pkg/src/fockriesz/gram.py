"""Finite Gram sections of normalized kernels and the Bari defect series."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernel import kernel_diag_log, normalized_feature_rows
from .numerics import hermitian_extreme_eigs
from .sequences import PointSeq, SequenceSpec, lambda_log_modulus, realize
from .weights import MomentTable, TableTooShort, as_params, build_moment_table, table_size_for

FLUSH_BELOW = 1e-300


@dataclass(frozen=True)
class GramSection:
    size: int
    matrix: np.ndarray = field(repr=False)
    lambda_min: float
    lambda_max: float

    @property
    def cond(self) -> float:
        return self.lambda_max / self.lambda_min if self.lambda_min > 0 else math.inf


def table_for(seq: PointSeq, extra: int = 0) -> MomentTable:
    """A cached moment table long enough for every point of ``seq``."""
    s_max = float(np.max(seq.u)) if len(seq) else 1.0
    n = table_size_for(s_max, seq.params) + extra
    while True:
        table = build_moment_table(n, seq.params)
        try:
            for s in (s_max,):
                kernel_diag_log(s, seq.params, table)
            return table
        except TableTooShort as exc:
            n = max(exc.needed, 2 * n)


def gram_matrix(seq: PointSeq, M: int | None = None, table: MomentTable | None = None,
                rel_tol: float = 1e-17) -> np.ndarray:
    """``G[i, j] = <k_i, k_j> / (||k_i|| ||k_j||)`` for the first ``M`` points."""
    pts = seq if M is None else seq.head(M)
    table = table or table_for(pts)
    rows, _ = normalized_feature_rows(pts.u, pts.theta, pts.params, table, rel_tol)
    g = rows @ rows.conj().T
    g[np.abs(g) < FLUSH_BELOW] = 0.0
    np.fill_diagonal(g, 1.0)
    # symmetrize the rounding of the product
    g = 0.5 * (g + g.conj().T)
    if np.all(pts.theta == pts.theta[0]) if len(pts) else True:
        g = g.real.copy()
    return g


def build_gram(seq: PointSeq, M: int | None = None, table: MomentTable | None = None,
               rel_tol: float = 1e-17) -> GramSection:
    g = gram_matrix(seq, M, table, rel_tol)
    lo, hi = hermitian_extreme_eigs(g)
    return GramSection(g.shape[0], g, lo, hi)


@dataclass(frozen=True)
class SweepRow:
    M: int
    lambda_min: float
    lambda_max: float
    cond: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def classify_trend(rows: list[SweepRow], factor: float = 2.0) -> str:
    """``degenerating-min`` if ``lambda_min`` drops by ``factor`` over two consecutive
    doublings of ``M``; ``exploding-max`` likewise for growth of ``lambda_max``;
    otherwise ``stable``."""
    by_m = {r.M: r for r in rows}
    degen = explode = False
    for r in rows:
        r2, r4 = by_m.get(2 * r.M), by_m.get(4 * r.M)
        if r2 is None or r4 is None:
            continue
        if r.lambda_min >= factor * r2.lambda_min and r2.lambda_min >= factor * r4.lambda_min:
            degen = True
        if r2.lambda_max >= factor * r.lambda_max and r4.lambda_max >= factor * r2.lambda_max:
            explode = True
    if degen:
        return "degenerating-min"
    if explode:
        return "exploding-max"
    return "stable"


def frame_sweep(spec: SequenceSpec | PointSeq, sizes) -> tuple[list[SweepRow], str]:
    sizes = [int(m) for m in sizes]
    if sizes != sorted(sizes) or not sizes or sizes[0] < 1:
        raise ValueError("sizes must be ascending positive integers")
    seq = spec if isinstance(spec, PointSeq) else realize(spec)
    if sizes[-1] > len(seq):
        raise ValueError(f"largest size {sizes[-1]} exceeds the {len(seq)} realized points")
    table = table_for(seq.head(sizes[-1]))
    rows = []
    for m in sizes:
        sec = build_gram(seq, m, table)
        rows.append(SweepRow(m, sec.lambda_min, sec.lambda_max, sec.cond))
    return rows, classify_trend(rows)


# ---------------------------------------------------------------------------
# Bari defect of the reference sequence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BariReport:
    n: np.ndarray
    J1: np.ndarray
    J2: np.ndarray
    defect: np.ndarray
    partial_sums: np.ndarray
    tail_bound: np.ndarray
    k_window: int

    def tail(self, n_lo: int, n_hi: int) -> float:
        sel = (self.n >= n_lo) & (self.n <= n_hi)
        return math.fsum(self.defect[sel])


def bari_gaussian_bound(n: int, k, p) -> np.ndarray:
    """``exp(-2 (1+beta)^(-(1+beta)/beta) |k-n|^2 (1+n)^(1/beta - 1))``, the decay guide for ``|e_k(lambda_n)|^2 / ||k_lambda_n||^2``."""
    beta = as_params(p).beta
    k = np.asarray(k, dtype=float)
    c = (1.0 + beta) ** (-(1.0 + beta) / beta)
    return np.exp(-2.0 * c * (k - n) ** 2 * (1.0 + n) ** (1.0 / beta - 1.0))


def bari_defect(p, n_range, table: MomentTable | None = None, k_window: int | None = None) -> BariReport:
    """Per-``n`` terms of ``sum_n ||h_n - kk_(lambda_n)||^2`` for the reference sequence.

    ``J2_n = sum_{k != n} |e_k(lambda_n)|^2 / ||k_(lambda_n)||^2`` with
    ``e_k = z^k / ||z^k||``, and ``J1_n = (1 - |e_n(lambda_n)| / ||k_(lambda_n)||)^2``.
    Since ``|e_n|^2 / ||k||^2 = 1 - J2_n``, ``J1_n`` is evaluated as
    ``(J2_n / (1 + sqrt(1 - J2_n)))^2`` to avoid cancellation.
    """
    params = as_params(p)
    ns = np.array(list(n_range), dtype=int)
    if len(ns) == 0:
        raise ValueError("empty n range")
    u = lambda_log_modulus(ns, params)
    if k_window is None:
        # the Gaussian guide is below 1e-40 beyond this many steps
        k_window = 12
    needed = int(ns.max()) + k_window
    if table is None:
        table = build_moment_table(max(needed, table_size_for(float(u.max()), params)), params)
    table.require(needed)
    J1 = np.empty(len(ns))
    J2 = np.empty(len(ns))
    for i, (n, s) in enumerate(zip(ns, u)):
        L = kernel_diag_log(s, params, table)
        k = np.arange(max(0, n - k_window), n + k_window + 1)
        k = k[k != n]
        J2[i] = math.fsum(np.exp(2.0 * k * s - table.w[k] - L))
        J1[i] = (J2[i] / (1.0 + math.sqrt(max(0.0, 1.0 - J2[i])))) ** 2
    defect = J1 + J2
    partial = np.array([math.fsum(defect[:i + 1]) for i in range(len(defect))])
    tail = np.array([math.fsum(bari_gaussian_bound(n, [n - k_window - 1, n + k_window + 1], params))
                     for n in ns])
    return BariReport(ns, J1, J2, defect, partial, tail, k_window)
