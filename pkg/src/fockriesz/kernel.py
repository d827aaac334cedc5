"""Reproducing-kernel norms: exact monomial series and the two-branch estimate.

The kernel of a radial weight is ``k(z, w) = sum_n (z conj(w))^n / ||z^n||^2``,
so ``log ||k_z||^2 = log sum_n exp(2 n s - w[n])`` with ``s = log|z|``. The
moment sequence is log-convex, hence the terms are log-concave in ``n`` and
the series is a single hump around ``n ~ (1+beta) s^beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import log_sum_exp
from .weights import MomentTable, TableTooShort, as_params, log_rho, phi_log

#: consecutive negligible terms required on each side before truncating
TAIL_RUN = 10


def g_s(t, s: float, p):
    """``s t - beta (t/(1+beta))^((1+beta)/beta)``, maximal at ``t = (1+beta) s^beta``."""
    beta = as_params(p).beta
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("g_s needs t >= 0")
    out = s * t - beta * np.power(t / (1.0 + beta), (1.0 + beta) / beta)
    return float(out) if out.ndim == 0 else out


def peak_index(s: float, p) -> int:
    """``n_z = floor((1+beta) s^beta)``, the integer part of the maximizer of ``g_s``."""
    beta = as_params(p).beta
    if s <= 0:
        return 0
    # the guard keeps exact integers like (1+beta) u_n^beta = n+1 from rounding down
    return int(math.floor((1.0 + beta) * s ** beta + 1e-9))


def phi_tilde(s: float, p) -> float:
    nz = peak_index(s, p)
    return max(g_s(nz, s, p), g_s(nz + 1, s, p))


def _series_window(s: float, table: MomentTable, rel_tol: float) -> tuple[int, int, np.ndarray]:
    """Index range ``[lo, hi]`` holding every term above ``rel_tol * peak``, plus all terms."""
    n = np.arange(table.n_max + 1, dtype=float)
    if s == -math.inf:
        terms = np.full(n.shape, -math.inf)
        terms[0] = -table.w[0]
    else:
        terms = 2.0 * n * s - table.w
    k = int(np.argmax(terms))
    cut = terms[k] + math.log(rel_tol)
    below = terms < cut
    hi = k
    run = 0
    while run < TAIL_RUN:
        hi += 1
        if hi > table.n_max:
            # the hump's own width is a fair guess for how much more is needed
            raise TableTooShort(2 * max(k, 1) + TAIL_RUN + 20, table.n_max)
        run = run + 1 if below[hi] else 0
    lo = k
    run = 0
    while lo > 0 and run < TAIL_RUN:
        lo -= 1
        run = run + 1 if below[lo] else 0
    return lo, hi, terms


def kernel_diag_log(s: float, p, table: MomentTable, rel_tol: float = 1e-17) -> float:
    """``log ||k_z||^2`` at ``s = log|z|`` from the monomial series.

    Truncation stops once ``TAIL_RUN`` consecutive terms on each side of the
    peak fall below ``rel_tol`` times the largest term; the terms are
    log-concave so nothing beyond that point can come back.
    """
    if table.beta != as_params(p).beta:
        raise ValueError("moment table was built for a different beta")
    lo, hi, terms = _series_window(float(s), table, rel_tol)
    return log_sum_exp(terms[lo:hi + 1])


def kernel_diag_log_many(s_values, p, table: MomentTable, rel_tol: float = 1e-17) -> np.ndarray:
    return np.array([kernel_diag_log(s, p, table, rel_tol) for s in np.asarray(s_values, float)])


def estimate_branches(s: float, p) -> tuple[float, float]:
    """The two log-branches ``2 phi~ - s - log rho`` and ``2 phi - 2 log rho``."""
    if s <= 0:
        raise ValueError("the estimate is stated for |z| > 1")
    lr = log_rho(s, p)
    return 2.0 * phi_tilde(s, p) - s - lr, 2.0 * phi_log(s, p) - 2.0 * lr


def kernel_diag_estimate_log(s: float, p) -> float:
    """Log of the two-term estimate of ``||k_z||^2`` (implicit constants set to 1)."""
    a, b = estimate_branches(s, p)
    return float(np.logaddexp(a, b))


def two_sided_bounds_log(s: float, p) -> tuple[float, float]:
    """Logs of ``e^(2 phi) / rho^2`` (lower) and ``e^(2 phi) / (|z| rho)`` (upper)."""
    lr = log_rho(s, p)
    two_phi = 2.0 * phi_log(s, p)
    return two_phi - 2.0 * lr, two_phi - s - lr


def log_laplacian_phi(s: float, p) -> float:
    """``log Delta phi`` at ``|z| = e^s``; ``Delta phi = beta (1+beta) s^(beta-1) e^(-2s)``."""
    beta = as_params(p).beta
    return math.log(beta * (1.0 + beta)) + (beta - 1.0) * math.log(s) - 2.0 * s


@dataclass(frozen=True)
class KernelDiagnostics:
    z_log_modulus: float
    n_z: int
    g_at_nz: float
    g_at_nz_plus_1: float
    phi_tilde: float
    exact_log_norm2: float
    estimate_log_norm2: float
    lower_log: float
    upper_log: float
    branch_zrho: float
    branch_rho2: float
    laplacian_ratio_log: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def kernel_diagnostics(s: float, p, table: MomentTable, rel_tol: float = 1e-17) -> KernelDiagnostics:
    nz = peak_index(s, p)
    g0, g1 = g_s(nz, s, p), g_s(nz + 1, s, p)
    exact = kernel_diag_log(s, p, table, rel_tol)
    a, b = estimate_branches(s, p)
    lower, upper = two_sided_bounds_log(s, p)
    return KernelDiagnostics(
        z_log_modulus=float(s), n_z=nz, g_at_nz=g0, g_at_nz_plus_1=g1,
        phi_tilde=max(g0, g1), exact_log_norm2=exact,
        estimate_log_norm2=float(np.logaddexp(a, b)), lower_log=lower, upper_log=upper,
        branch_zrho=a, branch_rho2=b,
        laplacian_ratio_log=log_laplacian_phi(s, p) + 2.0 * phi_log(s, p) - exact,
    )


def kernel_offdiag_normalized(z, w, p, table: MomentTable, rel_tol: float = 1e-17,
                              log_norms: tuple[float, float] | None = None) -> complex:
    """``<k_z, k_w> / (||k_z|| ||k_w||)`` for points given as ``(log-modulus, angle)``.

    Each term is at most the geometric mean of the two diagonal terms, so the
    union of both diagonal windows carries everything above ``rel_tol``. The
    real and imaginary parts are accumulated with ``math.fsum``.
    """
    (sz, tz), (sw, tw) = z, w
    lo1, hi1, _ = _series_window(float(sz), table, rel_tol)
    lo2, hi2, _ = _series_window(float(sw), table, rel_tol)
    if log_norms is None:
        log_norms = (kernel_diag_log(sz, p, table, rel_tol), kernel_diag_log(sw, p, table, rel_tol))
    lz, lw = log_norms
    n = np.arange(min(lo1, lo2), max(hi1, hi2) + 1)
    if sz == -math.inf or sw == -math.inf:
        # only the constant term survives at the origin
        n = n[:1] if n[0] == 0 else n[:0]
        mag = -table.w[n] - 0.5 * (lz + lw)
    else:
        mag = n * (sz + sw) - table.w[n] - 0.5 * (lz + lw)
    arg = n * (tz - tw)
    amp = np.exp(mag)
    return complex(math.fsum(amp * np.cos(arg)), math.fsum(amp * np.sin(arg)))


def normalized_feature_rows(s_values, thetas, p, table: MomentTable,
                            rel_tol: float = 1e-17) -> tuple[np.ndarray, np.ndarray]:
    """Rows ``exp(n s_i - w[n]/2 - L_i/2 + i n theta_i)`` over the whole table.

    The normalized kernel Gram matrix is ``F F^H``. Coverage of every row's
    series window by the table is checked first.
    """
    s_values = np.asarray(s_values, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    logs = np.empty(len(s_values))
    for i, s in enumerate(s_values):
        lo, hi, terms = _series_window(s, table, rel_tol)
        logs[i] = log_sum_exp(terms[lo:hi + 1])
    n = np.arange(table.n_max + 1, dtype=float)
    mag = 0.5 * (2.0 * np.outer(s_values, n) - table.w[None, :] - logs[:, None])
    rows = np.exp(mag) * np.exp(1j * np.outer(thetas, n))
    return rows, logs
