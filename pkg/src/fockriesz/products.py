"""Truncated canonical products, Lagrange-type interpolation and matrix diagnostics.

``G(z) = prod_k (1 - z/gamma_k)`` over a realized sequence, evaluated in
log-polar form. Cardinal functions ``l_n(z) = prod_{k != n} (1 - z/gamma_k) /
(1 - gamma_n/gamma_k)`` equal ``G(z) / (G'(gamma_n) (z - gamma_n))`` exactly,
so derivatives of ``G`` are never formed numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernel import kernel_diag_log
from .numerics import SignedLogComplex, log1m_exp_complex, logpolar_add, logpolar_sum, wrap_angle
from .sequences import PointSeq, lambda_log_modulus, realize, reference_spec
from .weights import MomentTable, as_params, build_moment_table, phi_log, table_size_for

#: log-polar point ``(log-modulus, angle)``
LogPoint = tuple[float, float]


def _log_factors(seq: PointSeq, M: int, z: LogPoint):
    s, th = z
    return log1m_exp_complex(s - seq.u[:M], th - seq.theta[:M])


def _same_point(seq: PointSeq, k: int, z: LogPoint) -> bool:
    return seq.u[k] == z[0] and wrap_angle(seq.theta[k] - z[1]) == 0.0


@dataclass(frozen=True)
class ProductValue:
    value: SignedLogComplex
    zero_index: int | None
    log_tail_bound: float  # log of sum_{k >= M} |z|/|gamma_k| over the realized tail


def product_eval_log(seq: PointSeq, M: int, z: LogPoint) -> ProductValue:
    """``prod_{k < M} (1 - z/gamma_k)`` with factors taken in ascending modulus."""
    if not 0 <= M <= len(seq):
        raise ValueError(f"M = {M} outside [0, {len(seq)}]")
    s, th = float(z[0]), float(z[1])
    tail = seq.u[M:]
    log_tail = (s + math.log(math.fsum(np.exp(-(tail - tail[0])))) - tail[0]
                if len(tail) and s > -math.inf else -math.inf)
    if s == -math.inf:
        return ProductValue(SignedLogComplex(0.0, 0.0), None, log_tail)
    for k in range(M):
        if _same_point(seq, k, (s, th)):
            return ProductValue(SignedLogComplex(-math.inf, 0.0), int(seq.order[k]), log_tail)
    re, im = _log_factors(seq, M, (s, th))
    return ProductValue(SignedLogComplex(math.fsum(re), math.fsum(im)), None, log_tail)


def cardinal_log(seq: PointSeq, M: int, n: int, z: LogPoint) -> tuple[float, float]:
    """``log l_n(z)`` as ``(log-modulus, angle)`` for sorted index ``n < M``."""
    if not 0 <= n < M <= len(seq):
        raise ValueError(f"need 0 <= n < M <= {len(seq)}, got n={n}, M={M}")
    s, th = float(z[0]), float(z[1])
    mask = np.ones(M, dtype=bool)
    mask[n] = False
    u, t = seq.u[:M][mask], seq.theta[:M][mask]
    den_re, den_im = log1m_exp_complex(seq.u[n] - u, seq.theta[n] - t)
    if s == -math.inf:
        num_re = np.zeros_like(u)
        num_im = np.zeros_like(u)
    else:
        num_re, num_im = log1m_exp_complex(s - u, th - t)
    lm = math.fsum(num_re) - math.fsum(den_re)
    if lm == -math.inf or math.isnan(lm):
        return -math.inf, 0.0
    return lm, wrap_angle(math.fsum(num_im) - math.fsum(den_im))


def dist_log(z: LogPoint, seq: PointSeq) -> tuple[float, int]:
    """``(log dist(z, seq), sorted index of the nearest point)``.

    ``|z - gamma| >= ||z| - |gamma||`` grows away from the modulus shell of
    ``z``, so the scan walks outward from the insertion index and stops on
    each side once that bound exceeds the best distance found.
    """
    s, th = float(z[0]), float(z[1])
    u, t = seq.u, seq.theta
    if len(u) == 0:
        return math.inf, -1

    def log_d(k):
        lo, hi = min(s, u[k]), max(s, u[k])
        a = hi - lo
        b = (t[k] - th) if u[k] >= s else (th - t[k])
        if lo == -math.inf:
            return hi, 0
        sh = math.sin(0.5 * b)
        # |1 - e^(a+ib)|^2 = expm1(a)^2 + 4 e^a sin^2(b/2), scaled by e^-a for large a
        if a > 30:
            val = 2 * a + math.log1p(-2 * math.exp(-a) * math.cos(b) + math.exp(-2 * a))
        else:
            inner = math.expm1(a) ** 2 + 4.0 * math.exp(a) * sh * sh
            val = math.log(inner) if inner > 0 else -math.inf
        return lo + 0.5 * val

    def log_radial(k):
        a = abs(u[k] - s)
        if a == 0:
            return -math.inf
        return max(s, u[k]) + math.log(-math.expm1(-a))

    start = int(np.searchsorted(u, s))
    best, arg = math.inf, -1
    for rng in (range(start, len(u)), range(start - 1, -1, -1)):
        for k in rng:
            if log_radial(k) > best:
                break
            v = log_d(k)
            if v < best:
                best, arg = v, k
    return best, arg


def dist_to_seq(z: LogPoint, seq: PointSeq) -> float:
    return math.exp(dist_log(z, seq)[0])


# ---------------------------------------------------------------------------
# polynomial coefficients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncatedProduct:
    """Coefficients ``c_j`` of ``prod_{k in factors} (1 - z/gamma_k)`` in log-polar form."""

    log_mag: np.ndarray = field(repr=False)
    arg: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    theta: np.ndarray = field(repr=False)

    @property
    def degree(self) -> int:
        return len(self.log_mag) - 1

    @classmethod
    def from_points(cls, u, theta) -> "TruncatedProduct":
        u = np.asarray(u, dtype=float)
        theta = np.asarray(theta, dtype=float)
        lm = np.array([0.0])
        ag = np.array([0.0])
        # multiply by (1 - z/gamma): c_j <- c_j - c_(j-1)/gamma, fixed ascending order
        for uk, tk in zip(u, theta):
            shifted_l = np.concatenate(([-math.inf], lm - uk))
            shifted_a = np.concatenate(([0.0], ag - tk + math.pi))
            base_l = np.concatenate((lm, [-math.inf]))
            base_a = np.concatenate((ag, [0.0]))
            lm, ag = logpolar_add(base_l, base_a, shifted_l, shifted_a)
            lm, ag = np.atleast_1d(lm), np.atleast_1d(ag)
        return cls(lm, ag, u, theta)

    @classmethod
    def of_sequence(cls, seq: PointSeq, M: int, exclude: int | None = None) -> "TruncatedProduct":
        keep = np.ones(M, dtype=bool)
        if exclude is not None:
            keep[exclude] = False
        return cls.from_points(seq.u[:M][keep], seq.theta[:M][keep])

    def eval_log(self, z: LogPoint) -> tuple[float, float]:
        s, th = float(z[0]), float(z[1])
        j = np.arange(self.degree + 1, dtype=float)
        if s == -math.inf:
            return float(self.log_mag[0]), float(self.arg[0])
        return logpolar_sum(self.log_mag + j * s, self.arg + j * th)

    def relative_residual_at(self, k: int) -> float:
        """``|P(gamma_k)| / max_j |c_j gamma_k^j|``; zero up to rounding at every factor."""
        j = np.arange(self.degree + 1, dtype=float)
        terms = self.log_mag + j * self.u[k]
        lm, _ = logpolar_sum(terms, self.arg + j * self.theta[k])
        return math.exp(lm - float(np.max(terms)))

    def weighted_norm2_log(self, table: MomentTable) -> float:
        """``log sum_j |c_j|^2 ||z^j||^2``; monomials are orthogonal for a radial weight."""
        table.require(self.degree)
        terms = 2.0 * self.log_mag + table.w[:self.degree + 1]
        top = float(np.max(terms))
        return top + math.log(math.fsum(np.exp(terms - top)))


# ---------------------------------------------------------------------------
# biorthogonal system and interpolation series
# ---------------------------------------------------------------------------


class ProductContext:
    """A sequence with its moment table and cached kernel norms."""

    def __init__(self, seq: PointSeq, M: int | None = None, table: MomentTable | None = None):
        self.seq = seq
        self.p = seq.params
        self.M = len(seq) if M is None else int(M)
        if not 1 <= self.M <= len(seq):
            raise ValueError(f"M = {self.M} outside [1, {len(seq)}]")
        if table is None:
            s_max = float(np.max(seq.u[:self.M]))
            table = build_moment_table(max(table_size_for(s_max, self.p), self.M + 1), self.p)
        self.table = table
        self._norms: dict[int, float] = {}

    def log_kernel_norm2(self, n: int) -> float:
        if n not in self._norms:
            self._norms[n] = kernel_diag_log(float(self.seq.u[n]), self.p, self.table)
        return self._norms[n]

    def point(self, n: int) -> LogPoint:
        return float(self.seq.u[n]), float(self.seq.theta[n])

    def biorthogonal_g(self, n: int, z: LogPoint) -> SignedLogComplex:
        """``g_n(z) = ||k_(gamma_n)|| l_n(z)``."""
        lm, ag = cardinal_log(self.seq, self.M, n, z)
        return SignedLogComplex(lm + 0.5 * self.log_kernel_norm2(n), ag)

    def pairing(self, n: int, m: int) -> complex:
        """``<g_n, kk_(gamma_m)> = g_n(gamma_m) / ||k_(gamma_m)||``."""
        g = self.biorthogonal_g(n, self.point(m))
        return SignedLogComplex(g.log_magnitude - 0.5 * self.log_kernel_norm2(m), g.argument).to_complex()

    def biorthogonal_g_norm_log(self, n: int) -> float:
        """``log ||g_n||^2`` from the coefficient expansion of ``prod_{k != n} (1 - z/gamma_k)``."""
        poly = TruncatedProduct.of_sequence(self.seq, self.M, exclude=n)
        mask = np.ones(self.M, dtype=bool)
        mask[n] = False
        den_re, _ = log1m_exp_complex(self.seq.u[n] - self.seq.u[:self.M][mask],
                                      self.seq.theta[n] - self.seq.theta[:self.M][mask])
        return self.log_kernel_norm2(n) - 2.0 * math.fsum(den_re) + poly.weighted_norm2_log(self.table)

    def lagrange_H(self, a, z: LogPoint) -> SignedLogComplex:
        """``H_a(z) = sum_n a_n g_n(z)`` for finitely many coefficients ``a_0..a_(len-1)``."""
        a = np.asarray(a, dtype=complex)
        if len(a) > self.M:
            raise ValueError("more coefficients than factors")
        lms, ags = [], []
        for n, c in enumerate(a):
            if c == 0:
                continue
            g = self.biorthogonal_g(n, z)
            lms.append(g.log_magnitude + math.log(abs(c)))
            ags.append(g.argument + math.atan2(c.imag, c.real))
        lm, ag = logpolar_sum(lms, ags) if lms else (-math.inf, 0.0)
        return SignedLogComplex(lm, ag)


def star_factor_log(z: LogPoint, gamma_n: LogPoint, star: LogPoint | None) -> tuple[float, float]:
    """``log[(1 - z/g*) / (1 - gamma_n/g*)]``; ``star=None`` means ``g* = 0``, giving ``z/gamma_n``."""
    s, th = z
    un, tn = gamma_n
    if star is None:
        if s == -math.inf:
            return -math.inf, 0.0
        return s - un, wrap_angle(th - tn)
    us, ts = star
    nr, ni = log1m_exp_complex(s - us, th - ts) if s > -math.inf else (0.0, 0.0)
    dr, di = log1m_exp_complex(un - us, tn - ts)
    return float(nr - dr), wrap_angle(float(ni - di))


def uniform_interp_L(ctx: ProductContext, v, z: LogPoint, star: LogPoint | None = (0.0, math.pi),
                     v_star: complex = 0.0) -> SignedLogComplex:
    """``L_v(z) = sum v_n F(z) / (F'(gamma_n) (z - gamma_n))`` with ``F = (1 - z/g*) G``.

    Nodes are ``gamma_0..gamma_(len(v)-1)`` plus ``g*`` (default ``-1``,
    ``None`` for the origin) carrying the value ``v_star``.
    """
    v = np.asarray(v, dtype=complex)
    seq = ctx.seq
    if star is not None:
        for k in range(ctx.M):
            if _same_point(seq, k, star):
                raise ValueError(f"extra node collides with sequence point {k}")
    elif np.any(seq.u[:ctx.M] == -math.inf):
        raise ValueError("extra node at the origin collides with a sequence point")
    lms, ags = [], []
    for n, c in enumerate(v):
        if c == 0:
            continue
        lm, ag = cardinal_log(seq, ctx.M, n, z)
        fr, fi = star_factor_log(z, ctx.point(n), star)
        lms.append(lm + fr + math.log(abs(c)))
        ags.append(ag + fi + math.atan2(c.imag, c.real))
    if v_star != 0:
        # cardinal function of the extra node: G(z) / G(g*)
        zs = star if star is not None else (-math.inf, 0.0)
        num = product_eval_log(seq, ctx.M, z).value
        den = product_eval_log(seq, ctx.M, zs).value
        lms.append(num.log_magnitude - den.log_magnitude + math.log(abs(v_star)))
        ags.append(num.argument - den.argument + math.atan2(v_star.imag, v_star.real))
    lm, ag = logpolar_sum(lms, ags) if lms else (-math.inf, 0.0)
    return SignedLogComplex(lm, ag)


def interp_grid_sup(ctx: ProductContext, v, s_values, angles, star=(0.0, math.pi)) -> float:
    """``max log(|L_v(z)| e^(-phi(z)))`` over the product grid of log-moduli and angles."""
    best = -math.inf
    for s in s_values:
        for a in angles:
            val = uniform_interp_L(ctx, v, (float(s), float(a)), star)
            best = max(best, val.log_magnitude - phi_log(s, ctx.p))
    return best


# ---------------------------------------------------------------------------
# growth envelope and integral test
# ---------------------------------------------------------------------------


def log1p_exp(s: float) -> float:
    """``log(1 + e^s)``."""
    return float(np.logaddexp(0.0, s))


@dataclass(frozen=True)
class EnvelopeSample:
    s: float
    angle: float
    log_G: float
    dist_log: float
    excess: float


@dataclass(frozen=True)
class EnvelopeReport:
    samples: list
    sup_minus_slack: float
    inf_plus_slack: float
    constant: float
    band_width: float
    skipped: int
    M: int


def factors_for_tail(seq: PointSeq, s_max: float, tol: float = 1e-12) -> int:
    """Smallest ``M`` with ``sum_{k >= M} e^(s_max - u_k) < tol`` over the realized points."""
    tail = np.exp(s_max - seq.u[::-1])
    cums = np.cumsum(tail)[::-1]  # cums[k] = sum_{j >= k}
    ok = np.flatnonzero(cums < tol)
    if len(ok) == 0:
        raise ValueError(f"sequence too short: tail at s = {s_max} never drops below {tol}")
    return int(ok[0])


def envelope_grid(s_max: float, count: int = 200, seed: int = 0) -> list[LogPoint]:
    rng = np.random.default_rng(seed)
    s = np.sort(rng.uniform(0.0, s_max, size=count))
    s[s == 0.0] = s_max / count
    angles = rng.uniform(-math.pi, math.pi, size=count)
    return [(float(a), float(b)) for a, b in zip(s, angles)]


def envelope_sweep(seq: PointSeq, delta_value: float, eps: float, grid, M: int | None = None) -> EnvelopeReport:
    """``excess = log|G| - phi - log dist + (3/2) log(1 + |z|)`` against ``+-(delta + eps) log(1 + |z|)``.

    The reported constant ``C`` is the smallest one that places every sample
    inside ``[-slack - C, slack + C]``.
    """
    p = seq.params
    if M is None:
        M = factors_for_tail(seq, max(g[0] for g in grid))
    out, skipped = [], 0
    for z in grid:
        pv = product_eval_log(seq, M, z)
        if pv.zero_index is not None:
            skipped += 1
            continue
        dl, _ = dist_log(z, seq)
        lg = pv.value.log_magnitude
        ex = lg - phi_log(z[0], p) - dl + 1.5 * log1p_exp(z[0])
        out.append(EnvelopeSample(z[0], z[1], lg, dl, ex))
    if not out:
        raise ValueError("every grid point fell on the sequence")
    slack = np.array([(delta_value + eps) * log1p_exp(x.s) for x in out])
    ex = np.array([x.excess for x in out])
    sup_ms = float(np.max(ex - slack))
    inf_ps = float(np.min(ex + slack))
    return EnvelopeReport(out, sup_ms, inf_ps, max(sup_ms, -inf_ps),
                          float(np.max(ex) - np.min(ex)), skipped, M)


@dataclass(frozen=True)
class IntegralTest:
    alpha: float
    log_partial_sums: np.ndarray = field(repr=False)
    converged: bool


LOG_CONVERGENCE = math.log(1e-15)


def integral_test_partial(seq: PointSeq, alpha: float, K: int | None = None) -> IntegralTest:
    """Partial sums of ``sum_n 1/|gamma_n|^(alpha-1)`` in logs.

    Converged once the last term is below ``1e-15`` of the running total and
    the terms are decreasing; constant or growing terms never converge.
    """
    K = len(seq) if K is None else int(K)
    if not 1 <= K <= len(seq):
        raise ValueError(f"K = {K} outside [1, {len(seq)}]")
    logt = -(alpha - 1.0) * seq.u[:K]
    partial = np.logaddexp.accumulate(logt)
    decreasing = K > 1 and logt[-1] < logt[-2]
    conv = bool(decreasing and logt[-1] < partial[-1] + LOG_CONVERGENCE)
    return IntegralTest(float(alpha), partial, conv)


# ---------------------------------------------------------------------------
# matrix diagnostics
# ---------------------------------------------------------------------------


class MatrixLab:
    """Entries ``A``, ``B``, ``C`` linking a perturbed sequence to the reference one."""

    def __init__(self, gamma: PointSeq, M: int | None = None, star: LogPoint | None = (0.0, math.pi)):
        self.p = gamma.params
        self.M = len(gamma) if M is None else int(M)
        lam = realize(reference_spec(self.p.beta, len(gamma)))
        s_max = max(float(np.max(gamma.u[:self.M])), float(np.max(lam.u[:self.M])))
        table = build_moment_table(table_size_for(s_max, self.p), self.p)
        self.gamma = ProductContext(gamma, self.M, table)
        self.lam = ProductContext(lam, self.M, table)
        self.star = star

    def log_A(self, n: int, m: int) -> float:
        """``|l_n^Gamma(lambda_m)| ||k_(gamma_n)|| / ||k_(lambda_m)||``."""
        lm, _ = cardinal_log(self.gamma.seq, self.M, n, self.lam.point(m))
        return lm + 0.5 * (self.gamma.log_kernel_norm2(n) - self.lam.log_kernel_norm2(m))

    def log_C(self, n: int, m: int) -> float:
        """``||k_(lambda_n)|| / ||k_(gamma_m)|| |l_n^Lambda(gamma_m)|``."""
        lm, _ = cardinal_log(self.lam.seq, self.M, n, self.gamma.point(m))
        return lm + 0.5 * (self.lam.log_kernel_norm2(n) - self.gamma.log_kernel_norm2(m))

    def log_B(self, n: int, m: int) -> float:
        """``e^(phi(gamma_n) - phi(lambda_m)) |l_n(lambda_m)|`` for the nodes ``Gamma + {g*}``."""
        z = self.lam.point(m)
        lm, _ = cardinal_log(self.gamma.seq, self.M, n, z)
        fr, _ = star_factor_log(z, self.gamma.point(n), self.star)
        return phi_log(self.gamma.seq.u[n], self.p) - phi_log(z[0], self.p) + lm + fr

    def block(self, which: str, rows, cols) -> np.ndarray:
        f = {"A": self.log_A, "B": self.log_B, "C": self.log_C}[which]
        return np.array([[f(n, m) for m in cols] for n in rows])


def p_index(u: float, p) -> int:
    """``p_m = floor((1+beta) u^beta) - 1`` for a point of log-modulus ``u``."""
    beta = as_params(p).beta
    return int(math.floor((1.0 + beta) * u ** beta + 1e-9)) - 1


def c_distance(n: int, u_m: float, p) -> float:
    """``|(1 + p_m)^(1/beta) - (1 + n)^(1/beta)|``, the scale of the ``C`` decay."""
    inv = 1.0 / as_params(p).beta
    return abs((1.0 + p_index(u_m, p)) ** inv - (1.0 + n) ** inv)


def predicted_log_A(n: int, m: int, deltas, p) -> float:
    """Leading-order overlay ``-|u_n - u_m|/2 -+ sum delta`` (sign by the side of ``m``), index shift 0."""
    beta = as_params(p).beta
    un, um = lambda_log_modulus(n, beta), lambda_log_modulus(m, beta)
    d = np.asarray(deltas, dtype=float)
    if n <= m:
        return -0.5 * (um - un) - math.fsum(d[n + 1:m])
    return -0.5 * (un - um) + math.fsum(d[m:n])


def schur_bound(log_entries: np.ndarray) -> float:
    """``sqrt(max row sum * max column sum)`` of the entry magnitudes (unit weights)."""
    a = np.exp(np.asarray(log_entries, dtype=float))
    return math.sqrt(float(np.max(a.sum(axis=1))) * float(np.max(a.sum(axis=0))))


def fit_decay_rates(log_entries, distances, min_distance: float = 10.0) -> tuple[float, float, float]:
    """Least-squares slope of ``-log C`` on distance plus the smallest and largest
    ratios ``-log C / distance`` (the two-sided rate constants).

    Samples closer than ``min_distance`` are dropped: there the bounded
    prefactors dominate and the ratio says nothing about the rate.
    """
    y = -np.asarray(log_entries, dtype=float)
    x = np.asarray(distances, dtype=float)
    sel = (x >= min_distance) & np.isfinite(y)
    x, y = x[sel], y[sel]
    slope = float(np.polyfit(x, y, 1)[0])
    r = y / x
    return slope, float(np.min(r)), float(np.max(r))
