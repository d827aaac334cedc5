"""Log-domain arithmetic, Laplace-type quadrature and a Jacobi eigensolver.

Every magnitude in this package (weights ``exp(2 phi)``, monomial norms,
kernel norms, infinite products) overflows a double long before the
interesting regime, so values are carried as natural logarithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

TWO_PI = 2.0 * math.pi


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not converge within its panel budget."""


# ---------------------------------------------------------------------------
# signed-log scalars
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SignedLogReal:
    """A real number ``sign * exp(log_magnitude)``."""

    log_magnitude: float
    sign: int

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign!r}")
        if (self.sign == 0) != (self.log_magnitude == -math.inf):
            raise ValueError("sign 0 must pair with log_magnitude -inf")
        if math.isnan(self.log_magnitude) or self.log_magnitude == math.inf:
            raise ValueError("log_magnitude must be finite or -inf")

    @classmethod
    def from_float(cls, x: float) -> "SignedLogReal":
        if x == 0.0:
            return ZERO
        return cls(math.log(abs(x)), 1 if x > 0 else -1)

    def to_float(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)

    def __add__(self, other: "SignedLogReal") -> "SignedLogReal":
        return slog_add(self, other)

    def __neg__(self) -> "SignedLogReal":
        return SignedLogReal(self.log_magnitude, -self.sign)

    def __mul__(self, other: "SignedLogReal") -> "SignedLogReal":
        if self.sign == 0 or other.sign == 0:
            return ZERO
        return SignedLogReal(self.log_magnitude + other.log_magnitude, self.sign * other.sign)


ZERO = SignedLogReal(-math.inf, 0)


def slog_add(a: SignedLogReal, b: SignedLogReal) -> SignedLogReal:
    """Exact-sign addition in the log domain."""
    if a.sign == 0:
        return b
    if b.sign == 0:
        return a
    hi, lo = (a, b) if a.log_magnitude >= b.log_magnitude else (b, a)
    diff = lo.log_magnitude - hi.log_magnitude
    if hi.sign == lo.sign:
        return SignedLogReal(hi.log_magnitude + math.log1p(math.exp(diff)), hi.sign)
    if diff == 0.0:
        return ZERO
    return SignedLogReal(hi.log_magnitude + math.log1p(-math.exp(diff)), hi.sign)


def log_sum_exp(terms: Iterable[float]) -> float:
    """``log(sum(exp(t)))`` summed in descending order with exact accumulation.

    The maximum is factored out and the rest is added through ``log1p`` so a
    single dominant term keeps full relative precision in the correction.
    """
    vals = sorted((float(t) for t in terms), reverse=True)
    if not vals or vals[0] == -math.inf:
        return -math.inf
    top = vals[0]
    if top == math.inf:
        return math.inf
    rest = math.fsum(math.exp(t - top) for t in vals[1:])
    return top + math.log1p(rest)


@dataclass(frozen=True)
class SignedLogComplex:
    """A complex number ``exp(log_magnitude + i*argument)``.

    Zero is ``log_magnitude = -inf`` with ``argument = 0``.
    """

    log_magnitude: float
    argument: float

    def __post_init__(self):
        if self.log_magnitude == -math.inf:
            object.__setattr__(self, "argument", 0.0)
        else:
            object.__setattr__(self, "argument", wrap_angle(self.argument))

    @classmethod
    def from_complex(cls, z: complex) -> "SignedLogComplex":
        if z == 0:
            return cls(-math.inf, 0.0)
        return cls(math.log(abs(z)), math.atan2(z.imag, z.real))

    def to_complex(self) -> complex:
        if self.log_magnitude == -math.inf:
            return 0j
        r = math.exp(self.log_magnitude)
        return complex(r * math.cos(self.argument), r * math.sin(self.argument))

    @property
    def is_zero(self) -> bool:
        return self.log_magnitude == -math.inf

    def __mul__(self, other: "SignedLogComplex") -> "SignedLogComplex":
        return SignedLogComplex(self.log_magnitude + other.log_magnitude,
                                self.argument + other.argument)

    def __truediv__(self, other: "SignedLogComplex") -> "SignedLogComplex":
        if other.is_zero:
            raise ZeroDivisionError("division by a zero SignedLogComplex")
        return SignedLogComplex(self.log_magnitude - other.log_magnitude,
                                self.argument - other.argument)

    def __add__(self, other: "SignedLogComplex") -> "SignedLogComplex":
        lm, arg = logpolar_add(self.log_magnitude, self.argument,
                               other.log_magnitude, other.argument)
        return SignedLogComplex(float(lm), float(arg))


def wrap_angle(x):
    """Map angles into ``(-pi, pi]``."""
    y = np.remainder(np.asarray(x, dtype=float) + math.pi, TWO_PI) - math.pi
    y = np.where(y <= -math.pi, y + TWO_PI, y)
    return float(y) if np.ndim(y) == 0 else y


def log1m_exp_complex(a, b):
    """Principal ``log(1 - exp(a + i b))`` for real arrays ``a``, ``b``.

    Returns ``(log|1 - w|, arg(1 - w))``. Three regimes keep full precision:
    small ``|w|`` goes through ``log1p``, ``|w|`` near one through ``expm1``,
    large ``|w|`` factors out ``-w``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a, b = np.broadcast_arrays(a, b)
    re = np.empty(a.shape)
    im = np.empty(a.shape)

    small = a < -1.0
    big = a > 1.0
    mid = ~(small | big)

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if small.any():
            re[small], im[small] = _log1m_small(a[small], b[small])
        if mid.any():
            am, bm = a[mid], b[mid]
            half = np.sin(0.5 * bm)
            x = -(np.expm1(am) * np.cos(bm) - 2.0 * half * half)
            y = -np.exp(am) * np.sin(bm)
            re[mid] = np.log(np.hypot(x, y))
            im[mid] = np.arctan2(y, x)
        if big.any():
            ab, bb = a[big], b[big]
            r2, i2 = _log1m_small(-ab, -bb)
            re[big] = ab + r2
            im[big] = bb + math.pi + i2
    im = wrap_angle(im)
    if re.ndim == 0:
        return float(re), float(im)
    return re, im


def _log1m_small(a, b):
    ea = np.exp(a)
    c = np.cos(b)
    re = 0.5 * np.log1p(ea * (ea - 2.0 * c))
    im = np.arctan2(-ea * np.sin(b), 1.0 - ea * c)
    return re, im


def logpolar_add(l1, a1, l2, a2):
    """Add two complex numbers given in log-polar form (vectorized)."""
    l1, a1, l2, a2 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (l1, a1, l2, a2)))
    swap = l2 > l1
    lhi = np.where(swap, l2, l1)
    ahi = np.where(swap, a2, a1)
    llo = np.where(swap, l1, l2)
    alo = np.where(swap, a1, a2)
    out_l = lhi.copy()
    out_a = ahi.copy()
    live = np.isfinite(llo)
    if live.any():
        # hi + lo = hi * (1 - (-lo/hi))
        r, t = log1m_exp_complex(llo[live] - lhi[live], alo[live] - ahi[live] + math.pi)
        out_l[live] = lhi[live] + r
        out_a[live] = ahi[live] + t
    out_a = np.where(np.isfinite(out_l), wrap_angle(out_a), 0.0)
    if out_l.ndim == 0:
        return float(out_l), float(out_a)
    return out_l, out_a


def logpolar_sum(logmag, arg) -> tuple[float, float]:
    """Sum of complex terms ``exp(logmag + i arg)`` with exact accumulation.

    Terms are scaled by the largest magnitude and the real and imaginary
    parts are accumulated with ``math.fsum``.
    """
    logmag = np.asarray(logmag, dtype=float).ravel()
    arg = np.asarray(arg, dtype=float).ravel()
    if logmag.size == 0:
        return -math.inf, 0.0
    top = float(np.max(logmag))
    if top == -math.inf:
        return -math.inf, 0.0
    order = np.argsort(-logmag, kind="stable")
    scale = np.exp(logmag[order] - top)
    re = math.fsum(scale * np.cos(arg[order]))
    im = math.fsum(scale * np.sin(arg[order]))
    mag = math.hypot(re, im)
    if mag == 0.0:
        return -math.inf, 0.0
    return top + math.log(mag), math.atan2(im, re)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

_GL_LOW = np.polynomial.legendre.leggauss(10)
_GL_HIGH = np.polynomial.legendre.leggauss(20)


def _gl(log_f, a, b, rule, ref):
    x, w = rule
    half = 0.5 * (b - a)
    t = a + half * (x + 1.0)
    logs = np.asarray(log_f(t), dtype=float)
    return half * math.fsum(w * np.exp(logs - ref)), float(np.max(logs))


def _panel(log_f, a, b, ref, abs_tol, depth, budget):
    """Adaptive Gauss-Legendre 10/20 comparison with bisection."""
    budget[0] -= 1
    if budget[0] < 0:
        raise QuadratureError("panel budget exhausted")
    lo, _ = _gl(log_f, a, b, _GL_LOW, ref)
    hi, peak = _gl(log_f, a, b, _GL_HIGH, ref)
    if peak - ref > 600.0:
        raise QuadratureError("integrand exceeds the reference peak by more than 600 nats")
    # second clause: the two rules agree to rounding, nothing left to refine
    if abs(hi - lo) <= abs_tol or abs(hi - lo) <= 1e-15 * abs(hi) or depth >= 40:
        return hi
    mid = 0.5 * (a + b)
    return (_panel(log_f, a, mid, ref, 0.5 * abs_tol, depth + 1, budget)
            + _panel(log_f, mid, b, ref, 0.5 * abs_tol, depth + 1, budget))


def _curvature_scale(log_f, p):
    """Gaussian width ``1/sqrt(-f'')`` at ``p`` from central differences."""
    for h in (1e-2, 1e-1, 1.0):
        h = h * max(1.0, abs(p))
        if p - h < 0:
            continue
        f = np.asarray(log_f(np.array([p - h, p, p + h])), dtype=float)
        d2 = (f[0] - 2 * f[1] + f[2]) / (h * h)
        if np.isfinite(d2) and d2 < 0:
            return 1.0 / math.sqrt(-d2)
    return 1.0


def adaptive_quad_log(log_f: Callable, peak_hint: float, rel_tol: float = 1e-12,
                      scale: float | None = None, max_panels: int = 4000) -> float:
    """``log`` of ``int_0^inf exp(log_f(t)) dt`` for a peaked, fast-decaying integrand.

    Panels of width about ``2*scale`` march outward from ``peak_hint`` in both
    directions (left until 0), widening geometrically, and stop once a panel
    contributes less than ``rel_tol/100`` of the running total. ``log_f``
    must accept numpy arrays. ``scale`` defaults to the curvature width at
    the hint.
    """
    name = getattr(log_f, "__name__", repr(log_f))
    p = max(float(peak_hint), 0.0)
    if scale is None:
        scale = _curvature_scale(log_f, p)
    h0 = 2.0 * scale
    probe = np.linspace(max(p - h0, 0.0), p + h0, 9)
    ref = float(np.max(np.asarray(log_f(probe), dtype=float)))
    if not np.isfinite(ref):
        raise QuadratureError(f"integrand {name} is not finite near the peak hint {p}")

    budget = [max_panels]
    pieces: list[float] = []
    stop = 1e-2 * rel_tol

    def running():
        return math.fsum(pieces)

    try:
        # rightward
        a, width, k = p, h0, 0
        while True:
            b = a + width
            guess = max(running(), scale)
            v = _panel(log_f, a, b, ref, 0.1 * rel_tol * guess, 0, budget)
            pieces.append(v)
            if k >= 1 and v <= stop * running():
                break
            a, k = b, k + 1
            if k >= 2:
                width *= 2.0
        # leftward
        b, width, k = p, h0, 0
        while b > 0.0:
            a = max(b - width, 0.0)
            guess = max(running(), scale)
            v = _panel(log_f, a, b, ref, 0.1 * rel_tol * guess, 0, budget)
            pieces.append(v)
            if k >= 1 and v <= stop * running():
                break
            b, k = a, k + 1
            if k >= 2:
                width *= 2.0
    except QuadratureError as exc:
        raise QuadratureError(f"quadrature of {name} failed: {exc}") from None
    total = running()
    if not total > 0.0 or not math.isfinite(total):
        raise QuadratureError(f"quadrature of {name} produced a non-positive total {total}")
    return ref + math.log(total)


# ---------------------------------------------------------------------------
# eigenvalues
# ---------------------------------------------------------------------------


def check_hermitian(m, tol: float = 1e-12) -> np.ndarray:
    """Return ``m`` as a square ndarray, rejecting non-Hermitian input."""
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    scale = max(float(np.max(np.abs(a))), 1e-300)
    if np.max(np.abs(a - a.conj().T)) > tol * scale:
        raise ValueError("matrix is not Hermitian")
    return a


def jacobi_eigh(a, tol: float = 1e-15, max_sweeps: int = 60):
    """Cyclic Jacobi eigen-decomposition of a real symmetric matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvectors in columns,
    unsorted.
    """
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), v
    fro = math.sqrt(float(np.sum(a * a)))
    if fro == 0.0:
        return np.zeros(n), v
    iu = np.triu_indices(n, 1)
    for _ in range(max_sweeps):
        off = math.sqrt(2.0 * float(np.sum(a[iu] ** 2)))
        if off <= tol * fro:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300 or abs(apq) < 1e-18 * fro:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                cp = a[:, p].copy()
                cq = a[:, q]
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                rp = a[p, :].copy()
                rq = a[q, :]
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    return a.diagonal().copy(), v


def hermitian_eigh(m):
    """Eigenvalues and eigenvectors of a Hermitian matrix via Jacobi.

    Real input is diagonalized directly; complex input goes through the real
    symmetric embedding ``[[A, -B], [B, A]]`` whose spectrum is that of
    ``A + iB`` with every eigenvalue doubled.
    """
    h = check_hermitian(m)
    n = h.shape[0]
    if not np.iscomplexobj(h) or not np.any(h.imag):
        vals, vecs = jacobi_eigh(h.real)
        order = np.argsort(vals, kind="stable")
        return vals[order], vecs[:, order].astype(complex)
    re, im = h.real, h.imag
    emb = np.block([[re, -im], [im, re]])
    vals, vecs = jacobi_eigh(emb)
    order = np.argsort(vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    # each eigenvalue appears twice; keep every other one
    out_vals = vals[::2].copy()
    out_vecs = vecs[:n, ::2] + 1j * vecs[n:, ::2]
    out_vecs /= np.linalg.norm(out_vecs, axis=0)
    return out_vals, out_vecs


def hermitian_extreme_eigs(m) -> tuple[float, float]:
    """``(lambda_min, lambda_max)`` of a Hermitian matrix."""
    h = check_hermitian(m)
    if h.shape[0] == 1:
        x = float(h[0, 0].real)
        return x, x
    vals, _ = hermitian_eigh(h)
    return float(vals[0]), float(vals[-1])
