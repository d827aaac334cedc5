"""The radial weight ``phi(r) = (log+ r)^(1+beta)`` and monomial moments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .numerics import adaptive_quad_log, log_sum_exp

LOG_TWO_PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class WeightParams:
    """Exponent of the weight; ``beta = 1`` is accepted but experimental."""

    beta: float

    def __post_init__(self):
        b = float(self.beta)
        if not (0.0 < b <= 1.0) or math.isnan(b):
            raise ValueError(f"beta must lie in (0, 1], got {self.beta!r}")
        object.__setattr__(self, "beta", b)

    @property
    def experimental(self) -> bool:
        return self.beta == 1.0

    @property
    def inv(self) -> float:
        return 1.0 / self.beta


def as_params(p) -> WeightParams:
    return p if isinstance(p, WeightParams) else WeightParams(p)


def phi_log(s, p) -> float | np.ndarray:
    """``phi`` as a function of ``s = log r`` (vectorized)."""
    beta = as_params(p).beta
    s = np.asarray(s, dtype=float)
    out = np.power(np.maximum(s, 0.0), 1.0 + beta)
    return float(out) if out.ndim == 0 else out


def phi(r: float, p) -> float:
    if r < 0:
        raise ValueError("phi takes a modulus r >= 0")
    if r <= 1.0:
        return 0.0
    return phi_log(math.log(r), p)


def log_rho(s, p):
    """``log rho`` at log-modulus ``s > 0``; ``rho = |z| (log|z|)^((1-beta)/2)``."""
    beta = as_params(p).beta
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ValueError("rho is defined for |z| > 1 only")
    out = s + 0.5 * (1.0 - beta) * np.log(s)
    return float(out) if out.ndim == 0 else out


def rho(z_modulus: float, p) -> float:
    if z_modulus <= 1.0:
        raise ValueError(f"rho needs |z| > 1, got {z_modulus}")
    return math.exp(log_rho(math.log(z_modulus), p))


def _bracket_excess(x, beta):
    """``(1+x)^(1+beta) - 1 - (1+beta) x`` without cancellation near ``x = 0``."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 0.1
    xs = x[small]
    # binomial series, terms from x^2 upwards; |x| < 0.1 needs ~16 terms
    acc = np.zeros_like(xs)
    coef = (1.0 + beta) * beta / 2.0
    power = xs * xs
    for k in range(2, 24):
        acc = acc + coef * power
        coef *= (1.0 + beta - k) / (k + 1)
        power = power * xs
    out[small] = acc
    xl = x[~small]
    with np.errstate(divide="ignore"):  # x = -1 gives log1p = -inf, expm1 -> -1
        out[~small] = np.expm1((1.0 + beta) * np.log1p(xl)) - (1.0 + beta) * xl
    return out


def moment_peak(n: int, p) -> tuple[float, float, float]:
    """Stationary point, peak exponent and Laplace width of the radial integrand.

    The integrand is ``exp((2n+2) t - 2 t^(1+beta))``; its maximizer is
    ``t* = ((n+1)/(1+beta))^(1/beta)`` with value ``2 beta t*^(1+beta)``.
    """
    beta = as_params(p).beta
    t_star = ((n + 1.0) / (1.0 + beta)) ** (1.0 / beta)
    peak = 2.0 * beta * t_star ** (1.0 + beta)
    width = t_star ** (0.5 * (1.0 - beta)) / math.sqrt(2.0 * beta * (1.0 + beta))
    return t_star, peak, width


def moment_log_exact(n: int, p, rel_tol: float = 1e-12) -> float:
    """``log ||z^n||^2`` by quadrature.

    The disc ``|z| < 1`` contributes ``2 pi / (2n + 2)`` in closed form; the
    outer part is ``2 pi int_0^inf exp((2n+2) t - 2 t^(1+beta)) dt`` after
    ``r = e^t``. The integrand is evaluated relative to its peak so that the
    huge exponents never enter a subtraction.
    """
    if n < 0 or int(n) != n:
        raise ValueError(f"n must be a nonnegative integer, got {n!r}")
    beta = as_params(p).beta
    t_star, peak, width = moment_peak(n, beta)
    scale_exp = 2.0 * t_star ** (1.0 + beta)

    def centered(t):
        x = (np.asarray(t, dtype=float) - t_star) / t_star
        return -scale_exp * _bracket_excess(x, beta)

    centered.__name__ = f"radial_moment_integrand(n={n}, beta={beta})"
    outer = adaptive_quad_log(centered, t_star, rel_tol=rel_tol, scale=width)
    return LOG_TWO_PI + log_sum_exp([-math.log(2.0 * n + 2.0), peak + outer])


def moment_log_asymptotic(n: int, p) -> float:
    """Log of the two-sided moment estimate with its implicit constant set to 1."""
    beta = as_params(p).beta
    q = (1.0 + n) / (1.0 + beta)
    return (1.0 - beta) / (2.0 * beta) * math.log(q) + 2.0 * beta * q ** ((1.0 + beta) / beta)


def laplace_moment_offset(p) -> float:
    """Limit of ``moment_log_exact(n) - moment_log_asymptotic(n)`` as ``n`` grows.

    Laplace's method on the radial integral gives the constant
    ``2 pi sqrt(pi / (beta (1 + beta)))``.
    """
    beta = as_params(p).beta
    return LOG_TWO_PI + 0.5 * math.log(math.pi / (beta * (1.0 + beta)))


class TableTooShort(ValueError):
    """A moment table does not reach the index a computation needs."""

    def __init__(self, needed: int, available: int):
        super().__init__(f"moment table too short: need n_max >= {needed}, have {available}")
        self.needed = needed
        self.available = available


@dataclass(frozen=True)
class MomentTable:
    """``w[n] = log ||z^n||^2`` for ``n = 0..n_max``."""

    params: WeightParams
    w: np.ndarray = field(repr=False)
    source: str = "exact"
    rel_tol: float = 1e-12

    def __post_init__(self):
        self.w.setflags(write=False)

    @property
    def beta(self) -> float:
        return self.params.beta

    @property
    def n_max(self) -> int:
        return len(self.w) - 1

    def require(self, n: int) -> None:
        if n > self.n_max:
            raise TableTooShort(n, self.n_max)


@lru_cache(maxsize=64)
def _cached_table(n_max: int, beta: float, rel_tol: float) -> MomentTable:
    w = np.array([moment_log_exact(n, beta, rel_tol) for n in range(n_max + 1)])
    return MomentTable(WeightParams(beta), w, "exact", rel_tol)


def build_moment_table(n_max: int, p, rel_tol: float = 1e-12) -> MomentTable:
    """Exact moment table; identical arguments return the same cached object."""
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    return _cached_table(int(n_max), as_params(p).beta, float(rel_tol))


def asymptotic_moment_table(n_max: int, p) -> MomentTable:
    params = as_params(p)
    w = np.array([moment_log_asymptotic(n, params) for n in range(n_max + 1)])
    return MomentTable(params, w, "asymptotic", 0.0)


def table_size_for(s_max: float, p, margin: int = 40) -> int:
    """A table length that covers the kernel series at log-moduli up to ``s_max``."""
    beta = as_params(p).beta
    peak = (1.0 + beta) * max(s_max, 1.0) ** beta
    return int(math.ceil(peak)) + margin
