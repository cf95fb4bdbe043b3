"""Weight sequences and the summability means built on partial sums.

Two mean shapes share one engine.  A T mean weights ``S_k f`` by ``q_k``
(forward) and a Norlund mean by ``q_{n-k}`` (backward); both are diagonal in
the Vilenkin basis, so each is a spectral multiplier:

    T_n f = sum_{j<n} (Q_n - Q_{j+1}) / Q_n * fhat(j) psi_j
    t_n f = sum_{j<n} Q_{n-j} / Q_n       * fhat(j) psi_j

with ``Q_n = q_0 + ... + q_{n-1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .group import GroupSpec
from .transform import inverse_transform, transform_fast, vilenkin_fn

T_MEAN = "T"
NORLUND = "norlund"

# finite-range proxy for "= O(1/n)"
CONDITION_BOUND = 64.0
TREND_RTOL = 1e-3


class ParameterError(ValueError):
    pass


class DegenerateWeightsError(ValueError):
    """``Q_n = 0``: the mean is undefined."""


def A_binom(alpha: float, n: int) -> float:
    """``A_n^alpha = (alpha+1)...(alpha+n)/n!`` with ``A_0^alpha = 1``."""
    a = 1.0
    for k in range(1, n + 1):
        a *= (k + alpha) / k
    return a


def binom_table(alpha: float, size: int) -> np.ndarray:
    """``A_k^alpha`` for k < size, by the recurrence ``A_k = A_{k-1}(k+alpha)/k``."""
    k = np.arange(1, size)
    return np.concatenate([[1.0], np.cumprod((k + alpha) / k)])[:size]


def iterated_log(x: np.ndarray, beta: int) -> np.ndarray:
    """``log^{(beta)} x``, with NaN where some inner value leaves the domain."""
    y = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(beta):
            y = np.where(y > 0, np.log(np.where(y > 0, y, 1.0)), np.nan)
    return y


@dataclass(frozen=True)
class WeightSeq:
    name: str
    q: np.ndarray = field(repr=False)
    params: tuple = ()

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        if q.ndim != 1 or len(q) < 1:
            raise ParameterError("weights must be a non-empty 1-d sequence")
        if np.any(q < 0) or not np.all(np.isfinite(q)):
            raise ParameterError(f"{self.name}: weights must be finite and non-negative")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)
        Q = np.concatenate([[0.0], np.cumsum(q)])
        Q.setflags(write=False)
        object.__setattr__(self, "Q", Q)

    @property
    def size(self) -> int:
        return len(self.q)

    @property
    def monotonicity(self) -> str:
        return classify_monotonicity(self.q)

    def check_index(self, n: int) -> None:
        if not 1 <= n <= self.size:
            raise IndexError(f"{self.name}: mean index {n} outside [1, {self.size}]")
        if self.Q[n] <= 0:
            raise DegenerateWeightsError(f"{self.name}: Q_{n} = 0")

    def first_index(self) -> int:
        """Smallest n with ``Q_n > 0``."""
        pos = np.flatnonzero(self.Q[1:] > 0)
        if not len(pos):
            raise DegenerateWeightsError(f"{self.name}: all weights vanish")
        return int(pos[0]) + 1


def classify_monotonicity(q: np.ndarray, tol: float = 1e-15) -> str:
    # a vanishing q_0 in front of a positive tail is ignored (Riesz, V, B)
    q = np.asarray(q, dtype=float)
    if len(q) > 1 and q[0] == 0:
        q = q[1:]
    d = np.diff(q)
    scale = tol * max(1.0, float(np.max(np.abs(q)))) if len(q) else tol
    up = bool(np.all(d >= -scale))
    down = bool(np.all(d <= scale))
    if up and down:
        return "constant"
    if down:
        return "non-increasing"
    if up:
        return "non-decreasing"
    return "neither"


def is_non_increasing(w: WeightSeq) -> bool:
    return w.monotonicity in ("constant", "non-increasing")


def is_non_decreasing(w: WeightSeq) -> bool:
    return w.monotonicity in ("constant", "non-decreasing")


def _check_alpha(alpha, strict: bool, kind: str) -> float:
    if alpha is None:
        raise ParameterError(f"{kind} weights need alpha")
    alpha = float(alpha)
    if strict and not 0 < alpha < 1:
        raise ParameterError(f"{kind} weights need 0 < alpha < 1, got {alpha}")
    return alpha


def make_weights(kind: str, size: int, alpha: float | None = None, beta: int | None = None,
                 strict: bool = True) -> WeightSeq:
    """Weights ``q_0..q_{size-1}`` for a named family.

    ``strict=False`` lifts the ``0 < alpha < 1`` restriction for exploration.
    """
    if size < 1:
        raise ParameterError("size must be >= 1")
    k = np.arange(size, dtype=float)
    if kind == "fejer":
        return WeightSeq("fejer", np.ones(size))
    if kind in ("riesz", "norlund_log"):
        q = np.zeros(size)
        q[1:] = 1.0 / k[1:]
        return WeightSeq(kind, q)
    if kind in ("cesaro", "u"):
        alpha = _check_alpha(alpha, strict, kind)
        return WeightSeq(kind, binom_table(alpha - 1.0, size), (alpha,))
    if kind == "v":
        alpha = _check_alpha(alpha, strict, kind)
        q = np.zeros(size)
        q[1:] = k[1:] ** (alpha - 1.0)
        return WeightSeq("v", q, (alpha,))
    if kind == "b":
        if alpha is None or float(alpha) <= 0:
            raise ParameterError("b weights need alpha > 0")
        if beta is None or int(beta) != beta or beta < 1:
            raise ParameterError("b weights need an integer beta >= 1")
        alpha, beta = float(alpha), int(beta)
        q = np.zeros(size)
        # below the domain of the iterated log, and where it is negative: 0
        q[1:] = np.maximum(np.nan_to_num(iterated_log(k[1:] ** alpha, beta), nan=0.0), 0.0)
        return WeightSeq("b", q, (alpha, beta))
    raise ParameterError(f"unknown weight family {kind!r}")


FAMILY_KINDS = {
    "fejer": T_MEAN,
    "riesz": T_MEAN,
    "u": T_MEAN,
    "v": T_MEAN,
    "b": T_MEAN,
    "cesaro": NORLUND,
    "norlund_log": NORLUND,
    # sigma_n itself: the Norlund mean with q = 1
    "sigma": NORLUND,
}


@dataclass(frozen=True)
class MeanFamily:
    kind: str
    weights: WeightSeq

    @property
    def name(self) -> str:
        return self.weights.name if self.kind == T_MEAN or self.weights.name != "fejer" else "sigma"

    @property
    def label(self) -> str:
        p = ",".join(f"{v:g}" for v in self.weights.params)
        return f"{self.name}({p})" if p else self.name


def make_family(name: str, size: int, alpha: float | None = None, beta: int | None = None,
                strict: bool = True) -> MeanFamily:
    if name not in FAMILY_KINDS:
        raise ParameterError(f"unknown family {name!r}; choose from {sorted(FAMILY_KINDS)}")
    wkind = "fejer" if name == "sigma" else name
    return MeanFamily(FAMILY_KINDS[name], make_weights(wkind, size, alpha, beta, strict))


def family_from_config(cfg: dict, size: int) -> MeanFamily:
    return make_family(cfg["family"], size, cfg.get("alpha"), cfg.get("beta"),
                       strict=not cfg.get("allow_any_alpha", False))


# -- conditions -------------------------------------------------------------

@dataclass
class ConditionReport:
    name: str
    range_end: int
    monotonicity: str
    sup_last_weight: float  # sup n q_{n-1} / Q_n
    sup_n_over_Q: float  # sup n / Q_n
    last_weight: bool  # n q_{n-1} / Q_n = O(1)
    linear_growth: bool  # n / Q_n = O(1)
    Q_end: float
    Q_growth: float  # Q_end / Q_{range_end // 10}

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _bounded_verdict(seq: np.ndarray, ns: np.ndarray, range_end: int) -> tuple[float, bool]:
    if not len(seq):
        return math.inf, False
    run = np.maximum.accumulate(seq)
    sup = float(run[-1])
    cut = np.searchsorted(ns, max(range_end // 10, int(ns[0])), side="right") - 1
    before = float(run[max(cut, 0)])
    flat = sup <= before * (1 + TREND_RTOL)
    return sup, bool(np.isfinite(sup) and sup <= CONDITION_BOUND and flat)


def check_conditions(w: WeightSeq, range_end: int | None = None) -> ConditionReport:
    """Finite-range diagnostics for ``q_{n-1}/Q_n = O(1/n)`` and ``1/Q_n = O(1/n)``.

    A condition counts as satisfied when its sup over ``n <= range_end`` is at
    most ``CONDITION_BOUND`` and the running sup no longer grows over the last
    decade ``[range_end/10, range_end]``.
    """
    range_end = w.size if range_end is None else range_end
    if range_end < 2 or range_end > w.size:
        raise ParameterError(f"range_end must lie in [2, {w.size}]")
    ns = np.arange(1, range_end + 1)
    Q = w.Q[ns]
    ok = Q > 0
    ns, Q = ns[ok], Q[ok]
    last = ns * w.q[ns - 1] / Q
    growth = ns / Q
    s1, v1 = _bounded_verdict(last, ns, range_end)
    s2, v2 = _bounded_verdict(growth, ns, range_end)
    tenth = max(range_end // 10, 1)
    q_growth = float(w.Q[range_end] / w.Q[tenth]) if w.Q[tenth] > 0 else math.inf
    return ConditionReport(w.name, range_end, w.monotonicity, s1, s2, v1, v2,
                           float(w.Q[range_end]), q_growth)


# -- means ------------------------------------------------------------------

def multipliers(family: MeanFamily, ns, size: int) -> np.ndarray:
    """Spectral multipliers, shape ``(len(ns), size)``."""
    w = family.weights
    ns = np.atleast_1d(np.asarray(ns, dtype=int))
    for n in ns:
        w.check_index(int(n))
    j = np.arange(size)
    live = j[None, :] < ns[:, None]
    Qn = w.Q[ns][:, None]
    if family.kind == T_MEAN:
        num = Qn - w.Q[np.minimum(j + 1, w.size)][None, :]
    else:
        num = w.Q[np.clip(ns[:, None] - j[None, :], 0, w.size)]
    return np.where(live, num / Qn, 0.0)


def apply_mean(spec: GroupSpec, f, family: MeanFamily, n: int) -> np.ndarray:
    fhat = transform_fast(spec, f)
    return inverse_transform(spec, fhat * multipliers(family, [n], spec.size)[0])


def apply_means(spec: GroupSpec, f, family: MeanFamily, ns) -> np.ndarray:
    """Means for every n in ``ns``; output shape ``f.shape[:-1] + (len(ns), M_N)``."""
    fhat = transform_fast(spec, f)
    mult = multipliers(family, ns, spec.size)
    return inverse_transform(spec, fhat[..., None, :] * mult)


def t_mean(spec: GroupSpec, f, w: WeightSeq, n: int) -> np.ndarray:
    return apply_mean(spec, f, MeanFamily(T_MEAN, w), n)


def norlund_mean(spec: GroupSpec, f, w: WeightSeq, n: int) -> np.ndarray:
    return apply_mean(spec, f, MeanFamily(NORLUND, w), n)


def fejer_mean(spec: GroupSpec, f, n: int) -> np.ndarray:
    return norlund_mean(spec, f, make_weights("fejer", n), n)


def riesz_mean(spec: GroupSpec, f, n: int) -> np.ndarray:
    return t_mean(spec, f, make_weights("riesz", n), n)


def u_mean(spec: GroupSpec, f, alpha: float, n: int) -> np.ndarray:
    return t_mean(spec, f, make_weights("u", n, alpha), n)


def v_mean(spec: GroupSpec, f, alpha: float, n: int) -> np.ndarray:
    return t_mean(spec, f, make_weights("v", n, alpha), n)


def b_mean(spec: GroupSpec, f, alpha: float, beta: int, n: int) -> np.ndarray:
    return t_mean(spec, f, make_weights("b", n, alpha, beta), n)


def cesaro_mean(spec: GroupSpec, f, alpha: float, n: int) -> np.ndarray:
    return norlund_mean(spec, f, make_weights("cesaro", n, alpha), n)


def norlund_log_mean(spec: GroupSpec, f, n: int) -> np.ndarray:
    return norlund_mean(spec, f, make_weights("norlund_log", n), n)


# -- sweeps over n -----------------------------------------------------------

def _uses_running_sums(family: MeanFamily) -> bool:
    return family.kind == T_MEAN or family.weights.name == "fejer"


def tail_form(spec: GroupSpec, f, family: MeanFamily) -> tuple[np.ndarray, np.ndarray]:
    """``(G, D)`` with ``mean_n f = f + G / D[n]`` for every n >= M_N.

    Valid for T means (``D = Q``) and for sigma_n (``D[n] = n``).
    """
    if not _uses_running_sums(family):
        raise ValueError(f"no closed tail form for Norlund family {family.weights.name!r}")
    fhat = transform_fast(spec, f)
    j = np.arange(spec.size)
    if family.kind == T_MEAN:
        coef = family.weights.Q[j + 1]
        D = family.weights.Q
    else:
        coef = j.astype(float)
        D = np.arange(family.weights.size + 1, dtype=float)
    return -inverse_transform(spec, fhat * coef), D


def sweep_means(spec: GroupSpec, f, family: MeanFamily, n_max: int,
                head_only: bool = False) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(n, mean_n f)`` for n = 1..n_max, skipping n with ``Q_n = 0``.

    T means and sigma_n use running sums over the partial sums (O(M_N) per
    step) up to n = M_N and the closed form of :func:`tail_form` beyond.
    Other Norlund means take one multiplier transform per n.
    ``head_only`` stops at ``min(n_max, M_N)``.
    """
    f = np.asarray(spec.check_signal(f), dtype=complex)
    w = family.weights
    if n_max > w.size:
        raise IndexError(f"{w.name}: weights cover n <= {w.size}, asked for {n_max}")
    M = spec.size
    if not _uses_running_sums(family):
        for n in range(1, (min(n_max, M) if head_only else n_max) + 1):
            if w.Q[n] > 0:
                yield n, apply_mean(spec, f, family, n)
        return
    sigma = family.kind == NORLUND
    fhat = transform_fast(spec, f)
    S = np.zeros_like(f)
    P = np.zeros_like(f)
    for n in range(1, min(n_max, M) + 1):
        if sigma:
            S = S + fhat[..., n - 1, None] * vilenkin_fn(spec, n - 1)
            P = P + S
            yield n, P / n
        else:
            P = P + w.q[n - 1] * S
            S = S + fhat[..., n - 1, None] * vilenkin_fn(spec, n - 1)
            if w.Q[n] > 0:
                yield n, P / w.Q[n]
    if head_only or n_max <= M:
        return
    G, D = tail_form(spec, f, family)
    for n in range(M + 1, n_max + 1):
        if D[n] > 0:
            yield n, f + G / D[n]
