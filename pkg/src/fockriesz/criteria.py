"""Decision engine for the three Riesz-basis conditions on a perturbed sequence.

Conditions on ``gamma_n = lambda_n e^(delta_n) e^(i theta_n)``:

1. d-separation;
2. ``delta_n / (1+n)^(1/beta - 1)`` bounded;
3. for some ``N``, ``limsup_n |sum_{k=n+1}^{n+N} delta_k| / ((1+n+N)^(1/beta) - (1+n)^(1/beta))``
   stays below ``1 / (2 (1+beta)^(1/beta))`` (equivalently, with the gap
   ``u_(n+N) - u_n`` in the denominator, below ``1/2``).

A limsup cannot be read off finite data, so it is bracketed between the sup
after a burn-in and the sup over the last half of the horizon; a verdict is
issued only when both sit on the same side of the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .sequences import SequenceSpec, is_d_separated, realize
from .weights import as_params

RESOLUTION = 1e-9


def delta_threshold(p) -> float:
    """``1 / (2 (1+beta)^(1/beta))``."""
    beta = as_params(p).beta
    return 0.5 / (1.0 + beta) ** (1.0 / beta)


def u_threshold(p=None) -> float:
    return 0.5


def kadets_threshold(p) -> float:
    """``1 / (2 beta (1+beta)^(1/beta))``."""
    beta = as_params(p).beta
    return 0.5 / (beta * (1.0 + beta) ** (1.0 / beta))


def compare(value: float, threshold: float, resolution: float = RESOLUTION) -> str:
    """``'below'``, ``'above'`` or ``'boundary'`` (within the resolution band)."""
    if value < threshold - resolution:
        return "below"
    if value > threshold + resolution:
        return "above"
    return "boundary"


# ---------------------------------------------------------------------------
# condition (2)
# ---------------------------------------------------------------------------


def cond2_ratios(deltas, p, horizon: int) -> np.ndarray:
    beta = as_params(p).beta
    deltas = np.asarray(deltas, dtype=float)
    if not 0 <= horizon < len(deltas):
        raise ValueError(f"horizon {horizon} outside the data (length {len(deltas)})")
    n = np.arange(horizon + 1, dtype=float)
    return np.abs(deltas[:horizon + 1]) / np.power(1.0 + n, 1.0 / beta - 1.0)


def cond2_sup(deltas, p, horizon: int) -> float:
    """``max_{n <= horizon} |delta_n| / (1+n)^(1/beta - 1)``."""
    return float(np.max(cond2_ratios(deltas, p, horizon)))


def cond2_trend(deltas, p, horizon: int) -> str:
    """``'bounded'`` when the last half-horizon never exceeds the first half, else ``'unbounded-trend'``.

    Boundedness is not decidable from finitely many terms; this is the
    certificate the verdict accepts.
    """
    r = cond2_ratios(deltas, p, horizon)
    half = len(r) // 2
    if half == 0:
        return "bounded"
    first, last = float(np.max(r[:half])), float(np.max(r[half:]))
    return "bounded" if last <= first * (1.0 + 1e-12) else "unbounded-trend"


# ---------------------------------------------------------------------------
# condition (3)
# ---------------------------------------------------------------------------


def _check_window(deltas, N, n_min, n_max):
    if N < 1:
        raise ValueError(f"window length N must be >= 1, got {N}")
    if n_min < 0:
        raise ValueError(f"n_min must be >= 0, got {n_min}")
    if n_min + N > n_max:
        raise ValueError(f"empty window range: n_min + N = {n_min + N} > n_max = {n_max}")
    if n_max >= len(deltas):
        raise ValueError(f"n_max = {n_max} needs delta_{n_max}, data has {len(deltas)} entries")


def _window_sums(deltas, N, n_min, n_max) -> np.ndarray:
    # each window summed on its own: the result depends only on its entries
    return np.array([math.fsum(deltas[n + 1:n + N + 1]) for n in range(n_min, n_max - N + 1)])


def delta_N_detail(deltas, p, N: int, n_min: int, n_max: int) -> tuple[float, int]:
    """``(value, maximizing n)`` with the ``(1+n)^(1/beta)`` normalization."""
    deltas = np.asarray(deltas, dtype=float)
    _check_window(deltas, N, n_min, n_max)
    inv = 1.0 / as_params(p).beta
    n = np.arange(n_min, n_max - N + 1, dtype=float)
    den = np.power(1.0 + n + N, inv) - np.power(1.0 + n, inv)
    ratio = np.abs(_window_sums(deltas, N, n_min, n_max)) / den
    k = int(np.argmax(ratio))
    return float(ratio[k]), n_min + k


def delta_N(deltas, p, N: int, n_min: int, n_max: int) -> float:
    return delta_N_detail(deltas, p, N, n_min, n_max)[0]


def delta_N_u_form_detail(deltas, p, N: int, n_min: int, n_max: int) -> tuple[float, int]:
    """Same maximand over the log-modulus gap ``u_(n+N) - u_n``; threshold ``1/2``."""
    deltas = np.asarray(deltas, dtype=float)
    _check_window(deltas, N, n_min, n_max)
    beta = as_params(p).beta
    n = np.arange(n_min, n_max - N + 1, dtype=float)
    u = lambda k: np.power((1.0 + k) / (1.0 + beta), 1.0 / beta)  # noqa: E731
    ratio = np.abs(_window_sums(deltas, N, n_min, n_max)) / (u(n + N) - u(n))
    k = int(np.argmax(ratio))
    return float(ratio[k]), n_min + k


def delta_N_u_form(deltas, p, N: int, n_min: int, n_max: int) -> float:
    return delta_N_u_form_detail(deltas, p, N, n_min, n_max)[0]


@dataclass(frozen=True)
class KadetsResult:
    sup_value: float
    threshold: float
    verdict: str  # satisfies | violates | boundary
    argmax: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def kadets_check(deltas, p, horizon: int) -> KadetsResult:
    """``sup_{1 <= n <= horizon} |delta_n| / n^(1/beta - 1)`` against ``1/(2 beta (1+beta)^(1/beta))``."""
    beta = as_params(p).beta
    deltas = np.asarray(deltas, dtype=float)
    if not 1 <= horizon < len(deltas):
        raise ValueError(f"horizon {horizon} outside [1, {len(deltas) - 1}]")
    n = np.arange(1, horizon + 1, dtype=float)
    ratio = np.abs(deltas[1:horizon + 1]) / np.power(n, 1.0 / beta - 1.0)
    k = int(np.argmax(ratio))
    thr = kadets_threshold(beta)
    side = compare(float(ratio[k]), thr)
    verdict = {"below": "satisfies", "above": "violates", "boundary": "boundary"}[side]
    return KadetsResult(float(ratio[k]), thr, verdict, k + 1)


def kadets_denominator_band(p, n_lo: int, n_hi: int) -> float:
    """Largest relative gap between ``beta ((n+2)^(1/beta) - (n+1)^(1/beta))`` and ``(n+1)^(1/beta - 1)``.

    This is how far the single-step condition and the sup condition can
    disagree at finite ``n``; the gap vanishes as ``n`` grows.
    """
    beta = as_params(p).beta
    n = np.arange(n_lo, n_hi + 1, dtype=float)
    step = beta * (np.power(n + 2.0, 1.0 / beta) - np.power(n + 1.0, 1.0 / beta))
    return float(np.max(np.abs(step / np.power(n + 1.0, 1.0 / beta - 1.0) - 1.0)))


def limsup_stability(deltas, p, N: int, k_modified: int, n_min: int, n_max: int,
                     trials: int = 100, seed: int = 0, scale: float = 1e6) -> bool:
    """True when ``delta_N`` is bit-identical after rewriting ``delta_0..delta_k`` at random.

    The windows start at ``n_min``, so entries with index ``<= n_min`` never
    enter the maximand; rewriting is restricted to ``k_modified < n_min``.
    """
    if k_modified >= n_min:
        raise ValueError(f"modified prefix must stay below the burn-in: k={k_modified} >= n_min={n_min}")
    base = np.asarray(deltas, dtype=float)
    ref = delta_N(base, p, N, n_min, n_max)
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        mod = base.copy()
        mod[:k_modified + 1] = rng.normal(scale=scale, size=k_modified + 1)
        if delta_N(mod, p, N, n_min, n_max) != ref:
            return False
    return True


# ---------------------------------------------------------------------------
# combined verdict
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WindowResult:
    N: int
    value: float
    argmax: int
    tail_value: float
    tail_argmax: int
    u_form_value: float
    threshold: float
    margin: float  # threshold - value, nats-free ratio units
    tail_margin: float
    status: str  # satisfied | violated | ambiguous | boundary

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class CriterionReport:
    cond1_separated: bool
    cond1_inf_d: float
    cond1_witness: tuple | None
    cond2_sup: float
    cond2_trend: str
    cond3: dict = field(default_factory=dict)
    verdict: str = "inconclusive"
    violated_condition: int | None = None
    witness: dict | None = None
    reason: str | None = None
    n_min: int = 0
    n_max: int = 0
    tail_start: int = 0
    d_min: float = 0.0
    resolution: float = RESOLUTION
    beta: float = 0.5
    experimental: bool = False

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        out["cond1_witness"] = list(self.cond1_witness) if self.cond1_witness else None
        out["cond3"] = {str(k): v.to_dict() for k, v in self.cond3.items()}
        return out


def _window_status(full: float, tail: float, thr: float, res: float) -> str:
    a, b = compare(full, thr, res), compare(tail, thr, res)
    if a == "below" and b == "below":
        return "satisfied"
    if a == "above" and b == "above":
        return "violated"
    if "boundary" in (a, b):
        return "boundary"
    return "ambiguous"


def theorem_verdict(spec: SequenceSpec, d_min: float = 1e-3, N_max: int = 4,
                    horizon: tuple[int, int] | None = None,
                    resolution: float = RESOLUTION) -> CriterionReport:
    """Combine the three conditions over a finite horizon ``(n_min, n_max)``.

    ``n_max`` defaults to the last index and the burn-in ``n_min`` to a quarter
    of it. Condition (3) is evaluated for ``N = 1..N_max``; each ``N`` gets the
    sup over ``[n_min, n_max - N]`` and the sup over the last half of the
    horizon, which bracket the limsup from the data available.
    """
    beta = spec.beta
    if horizon is None:
        n_max = spec.count - 1
        n_min = n_max // 4
    else:
        n_min, n_max = horizon
    if not 0 <= n_min < n_max < spec.count:
        raise ValueError(f"horizon ({n_min}, {n_max}) invalid for {spec.count} points")
    tail_start = (n_min + n_max) // 2
    deltas = spec.deltas

    sep = is_d_separated(realize(spec), d_min)
    c2 = cond2_sup(deltas, beta, n_max)
    trend = cond2_trend(deltas, beta, n_max)

    thr = delta_threshold(beta)
    windows: dict[int, WindowResult] = {}
    for N in range(1, N_max + 1):
        if tail_start + N > n_max:
            break
        v, k = delta_N_detail(deltas, beta, N, n_min, n_max)
        tv, tk = delta_N_detail(deltas, beta, N, tail_start, n_max)
        uv = delta_N_u_form(deltas, beta, N, n_min, n_max)
        windows[N] = WindowResult(N, v, k, tv, tk, uv, thr, thr - v, thr - tv,
                                  _window_status(v, tv, thr, resolution))
    if not windows:
        raise ValueError("horizon too short for any window length")

    common = dict(cond1_separated=sep.separated, cond1_inf_d=sep.achieved_inf,
                  cond1_witness=sep.witness, cond2_sup=c2, cond2_trend=trend, cond3=windows,
                  n_min=n_min, n_max=n_max, tail_start=tail_start, d_min=d_min,
                  resolution=resolution, beta=beta, experimental=spec.params.experimental)
    statuses = {w.status for w in windows.values()}

    if not sep.separated:
        return CriterionReport(**common, verdict="violates", violated_condition=1,
                               witness={"pair": list(sep.witness), "d": sep.achieved_inf})
    if statuses == {"violated"}:
        best = min(windows.values(), key=lambda w: w.tail_value)
        return CriterionReport(**common, verdict="violates", violated_condition=3,
                               witness={"N": best.N, "tail_value": best.tail_value,
                                        "tail_argmax": best.tail_argmax, "threshold": thr})
    if trend != "bounded":
        return CriterionReport(**common, verdict="inconclusive",
                               reason="condition (2) not certified bounded on this horizon")
    if "satisfied" in statuses:
        best = max((w for w in windows.values() if w.status == "satisfied"), key=lambda w: w.margin)
        return CriterionReport(**common, verdict="satisfies",
                               witness={"N": best.N, "value": best.value, "margin": best.margin})
    reason = "boundary" if "boundary" in statuses else "limsup not certified on this horizon"
    return CriterionReport(**common, verdict="inconclusive", reason=reason)
