"""Reference sequence, perturbed sequences, the d-metric and separation checks.

Points are stored in log-polar form ``(u, theta)`` with ``u = log|gamma|``;
moduli like ``exp(n^(1/beta))`` overflow long before the interesting range.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .weights import WeightParams, as_params


def lambda_log_modulus(n, p):
    """``u_n = ((1+n)/(1+beta))^(1/beta)`` (vectorized)."""
    beta = as_params(p).beta
    n = np.asarray(n, dtype=float)
    if np.any(n < 0):
        raise ValueError("index must be nonnegative")
    out = np.power((1.0 + n) / (1.0 + beta), 1.0 / beta)
    return float(out) if out.ndim == 0 else out


def sigma_log_modulus(n: int, p) -> float:
    """``((n + 1/2)/(1+beta))^(1/beta)``, between ``u_(n-1)`` and ``u_n``; needs ``n >= 2``."""
    if n < 2:
        raise ValueError(f"sigma points are defined for n >= 2, got {n}")
    beta = as_params(p).beta
    return ((n + 0.5) / (1.0 + beta)) ** (1.0 / beta)


# ---------------------------------------------------------------------------
# specs
# ---------------------------------------------------------------------------


def load_schema() -> dict:
    text = resources.files("fockriesz").joinpath("schemas/sequence_spec.json").read_text()
    return json.loads(text)


class SpecError(ValueError):
    """A sequence spec failed validation; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


def _expand(field_name: str, value, count: int) -> np.ndarray:
    if isinstance(value, list):
        arr = np.asarray(value, dtype=float)
        if len(arr) != count:
            raise SpecError(field_name, f"expected {count} entries, got {len(arr)}")
    else:
        # overflow is reported below as a non-finite entry
        with np.errstate(over="ignore", invalid="ignore"):
            kind = value["kind"]
            prm = value.get("params", {})
            n = np.arange(count, dtype=float)
            if kind == "constant":
                arr = np.full(count, float(prm.get("c", 0.0)))
            elif kind == "linear":
                # c (1 + n) + d
                arr = float(prm.get("c", 0.0)) * (1.0 + n) + float(prm.get("d", 0.0))
            elif kind == "power":
                # c (1 + n)^e
                arr = float(prm.get("c", 0.0)) * np.power(1.0 + n, float(prm.get("e", 1.0)))
            elif kind == "alternating":
                # (-1)^n c (1 + n)^e
                sign = np.where(np.arange(count) % 2 == 0, 1.0, -1.0)
                arr = sign * float(prm.get("c", 0.0)) * np.power(1.0 + n, float(prm.get("e", 1.0)))
            else:  # the schema rejects anything else first
                raise SpecError(f"{field_name}/kind", f"unknown kind {kind!r}")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise SpecError(f"{field_name}/{bad}", "non-finite value")
    return arr


@dataclass(frozen=True)
class SequenceSpec:
    """``gamma_n = lambda_n e^(delta_n) e^(i theta_n)`` for ``n < count``."""

    params: WeightParams
    deltas: np.ndarray = field(repr=False)
    thetas: np.ndarray = field(repr=False)
    source: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        d = np.asarray(self.deltas, dtype=float)
        t = np.asarray(self.thetas, dtype=float)
        if d.shape != t.shape or d.ndim != 1 or len(d) == 0:
            raise SpecError("deltas", "deltas and thetas must be equal-length non-empty arrays")
        if not np.all(np.isfinite(d)):
            raise SpecError("deltas", "non-finite perturbation")
        if not np.all(np.isfinite(t)):
            raise SpecError("thetas", "non-finite angle")
        d.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "deltas", d)
        object.__setattr__(self, "thetas", t)

    @property
    def count(self) -> int:
        return len(self.deltas)

    @property
    def beta(self) -> float:
        return self.params.beta

    @classmethod
    def from_dict(cls, doc: dict) -> "SequenceSpec":
        import jsonschema

        validator = jsonschema.Draft202012Validator(load_schema())
        err = jsonschema.exceptions.best_match(validator.iter_errors(doc))
        if err is not None:
            path = "/".join(str(x) for x in err.absolute_path) or "<root>"
            raise SpecError(path, err.message)
        count = int(doc["count"])
        try:
            params = WeightParams(doc["beta"])
        except ValueError as exc:
            raise SpecError("beta", str(exc)) from None
        deltas = _expand("deltas", doc.get("deltas", {"kind": "constant", "params": {"c": 0.0}}), count)
        thetas = _expand("thetas", doc.get("thetas", {"kind": "constant", "params": {"c": 0.0}}), count)
        return cls(params, deltas, thetas, source=doc)

    @classmethod
    def from_json(cls, text: str) -> "SequenceSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError("<root>", f"invalid JSON: {exc}") from None
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        """Explicit-array form; ``repr`` of a float round-trips bit-exactly through JSON."""
        return {"beta": self.beta, "count": self.count,
                "deltas": [float(x) for x in self.deltas],
                "thetas": [float(x) for x in self.thetas]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def reference_spec(beta: float, count: int) -> SequenceSpec:
    return SequenceSpec(WeightParams(beta), np.zeros(count), np.zeros(count))


def linear_spec(beta: float, count: int, c: float, theta: float = 0.0) -> SequenceSpec:
    n = np.arange(count, dtype=float)
    return SequenceSpec(WeightParams(beta), c * (1.0 + n), np.full(count, theta))


# ---------------------------------------------------------------------------
# realized point sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PointSeq:
    """Realized points sorted by log-modulus.

    ``order[i]`` is the input index of the ``i``-th sorted point, so per-index
    quantities (``delta_n`` and so on) can always be traced back.
    """

    params: WeightParams
    u: np.ndarray
    theta: np.ndarray
    order: np.ndarray
    spec: SequenceSpec | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        for a in (self.u, self.theta, self.order):
            a.setflags(write=False)
        if len(self.u) and np.any(np.diff(self.u) < 0):
            raise ValueError("PointSeq log-moduli must be non-decreasing")

    def __len__(self) -> int:
        return len(self.u)

    def head(self, m: int) -> "PointSeq":
        return PointSeq(self.params, self.u[:m].copy(), self.theta[:m].copy(),
                        self.order[:m].copy(), self.spec)

    @classmethod
    def from_points(cls, p, u, theta) -> "PointSeq":
        """Sort arbitrary log-polar points; ``order`` indexes the input arrays."""
        u = np.asarray(u, dtype=float)
        theta = np.broadcast_to(np.asarray(theta, dtype=float), u.shape)
        idx = np.argsort(u, kind="stable")
        return cls(as_params(p), u[idx], theta[idx].copy(), idx)

    def as_complex(self) -> np.ndarray:
        """Points as complex numbers; overflows to inf for large moduli."""
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(self.u) * np.exp(1j * self.theta)


def realize(spec: SequenceSpec) -> PointSeq:
    u = lambda_log_modulus(np.arange(spec.count), spec.params) + spec.deltas
    order = np.argsort(u, kind="stable")
    return PointSeq(spec.params, u[order], spec.thetas[order].copy(), order, spec)


# ---------------------------------------------------------------------------
# d-metric
# ---------------------------------------------------------------------------


def d_metric(z: complex, w: complex) -> float:
    """``|z - w| / (1 + min(|z|, |w|))``."""
    return abs(z - w) / (1.0 + min(abs(z), abs(w)))


def d_metric_log(u1, t1, u2, t2):
    """The d-metric for points in log-polar form, safe for huge moduli.

    With ``u1 <= u2`` (swapped if needed), ``|z - w| = e^u1 |1 - e^(du + i dt)|``
    and ``|1 - e^(a+ib)|^2 = expm1(a)^2 + 4 e^a sin^2(b/2)``; dividing by
    ``1 + e^u1`` leaves ``|1 - e^(a+ib)| / (1 + e^-u1)``.
    """
    scalar = all(np.ndim(v) == 0 for v in (u1, t1, u2, t2))
    u1, t1, u2, t2 = np.broadcast_arrays(*(np.atleast_1d(np.asarray(v, dtype=float))
                                           for v in (u1, t1, u2, t2)))
    lo = np.minimum(u1, u2)
    a = np.abs(u2 - u1)
    b = np.where(u1 <= u2, t2 - t1, t1 - t2)
    with np.errstate(over="ignore", invalid="ignore"):
        sh = np.sin(0.5 * b)
        num = np.sqrt(np.expm1(a) ** 2 + 4.0 * np.exp(a) * sh * sh)
        out = num / (1.0 + np.exp(-lo))
        # below the unit circle the factored form is not needed; it can also overflow
        inner = lo < 0
        if np.any(inner):
            z = np.exp(u1[inner] + 1j * t1[inner])
            w = np.exp(u2[inner] + 1j * t2[inner])
            out[inner] = np.abs(z - w) / (1.0 + np.exp(lo[inner]))
    out = np.where(np.isnan(out), np.inf, out)
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class SeparationResult:
    separated: bool
    achieved_inf: float
    witness: tuple[int, int] | None

    def to_dict(self) -> dict:
        return {"separated": self.separated, "achieved_inf": self.achieved_inf,
                "witness": list(self.witness) if self.witness else None}


def is_d_separated(seq: PointSeq, d_min: float) -> SeparationResult:
    """Check ``d(gamma_i, gamma_j) >= d_min`` for all pairs; report the infimum.

    For ``u_i <= u_j``, ``d >= (e^(u_j) - e^(u_i)) / (1 + e^(u_i))``, and that
    bound grows with ``j``, so each row's scan stops once it exceeds the best
    value found so far. The returned infimum is exact over the realized points.
    """
    if d_min <= 0:
        raise ValueError("d_min must be positive")
    u, th = seq.u, seq.theta
    n = len(u)
    best, pair = math.inf, None
    for i in range(n - 1):
        for j in range(i + 1, n):
            a = u[j] - u[i]
            bound = math.expm1(a) / (1.0 + math.exp(-u[i])) if a < 700 else math.inf
            if bound >= best:
                break
            d = d_metric_log(u[i], th[i], u[j], th[j])
            if d < best:
                best, pair = d, (int(seq.order[i]), int(seq.order[j]))
    ok = best >= d_min
    return SeparationResult(ok, best, None if ok else pair)


def log_gaps(seq: PointSeq) -> np.ndarray:
    return np.diff(seq.u)


def union_count(seq: PointSeq, gap: float) -> int:
    """Fewest subsequences with log-modulus spacing ``>= gap`` each.

    Equals the largest number of points in a half-open window ``[u, u + gap)``:
    that many points can never share a subsequence, and dealing sorted points
    round-robin into that many classes achieves it.
    """
    u = seq.u
    if len(u) == 0:
        return 0
    if gap <= 0:
        return 1
    right = np.searchsorted(u, u + gap, side="left")
    return int(np.max(right - np.arange(len(u))))


def round_robin_classes(seq: PointSeq, gap: float) -> list[np.ndarray]:
    k = union_count(seq, gap)
    idx = np.arange(len(seq))
    return [idx[r::k] for r in range(k)]


def log_separation(seq: PointSeq, gap: float | None = None) -> tuple[float, int]:
    """``(inf of consecutive log-gaps, union count at gap)``; gap defaults to that infimum."""
    if len(seq) == 0:
        return math.inf, 0
    gaps = log_gaps(seq)
    inf_gap = float(np.min(gaps)) if len(gaps) else math.inf
    if gap is None:
        gap = inf_gap if math.isfinite(inf_gap) and inf_gap > 0 else 1.0
    return inf_gap, union_count(seq, gap)
