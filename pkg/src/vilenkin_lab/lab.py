"""Weighted maximal operators, strong-convergence sums and the numerical checks
of the kernel-integral estimates.

Every mean of an input supported on ``I_N`` is evaluated exactly on a finite
model; the sup over ``n`` is truncated at a configurable cap (default
``4 M``, ``M`` the size of the model).  Beyond ``n = M`` the closed form
``mean_n f = f + G / Q_n`` of :func:`summability.tail_form` makes the tail
cheap: where ``f = 0`` the mean is ``G / Q_n`` and its weighted sup over the
tail is ``|G| * max_n 1 / (Q_n w_n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .group import GroupSpec, cell_labels
from .hardy import PAtom, atom_corpus, hardy_quasinorm, lp_quasinorm
from .kernels import tail_kernel_table
from .summability import (
    NORLUND, T_MEAN, MeanFamily, ParameterError, _uses_running_sums, apply_means,
    check_conditions, is_non_decreasing, is_non_increasing, make_family, sweep_means,
    tail_form,
)

CAP_FACTOR = 4
DOMINATION_SLACK = 1e-10
_TAIL_CHUNK = 256
# relative size below which a mean value is treated as roundoff; matters for
# ||.||_p^p with small p, where (1e-16)^(1/4) would already read as 1e-4
ROUNDOFF_FLOOR = 1e-12


class NotApplicable(ValueError):
    """The family is outside the hypothesis class of the requested check."""


# -- weights ------------------------------------------------------------------

def parse_mode(mode) -> tuple[str, float]:
    """``"weighted"``, ``"unweighted"`` or ``"weakened:<eps>"`` -> (kind, eps)."""
    if isinstance(mode, tuple):
        return mode[0], float(mode[1])
    if mode in ("weighted", "unweighted"):
        return mode, 0.0
    if isinstance(mode, str) and mode.startswith("weakened:"):
        return "weakened", float(mode.split(":", 1)[1])
    raise ParameterError(f"unknown weight mode {mode!r}")


def _check_weight_p(p: float) -> None:
    if not 0 < p <= 0.5:
        raise ParameterError(f"weighted maximal operators need 0 < p <= 1/2, got {p}")


def weight(n, p: float, mode="weighted"):
    """``w(n, p) = (n+1)^(1/p - 2) * log2(n+1)^(2 [1/2 + p])``.

    ``weakened:eps`` lowers the power exponent by eps when p < 1/2 and the
    log exponent by eps when p = 1/2.
    """
    kind, eps = parse_mode(mode)
    n = np.asarray(n, dtype=float)
    if np.any(n < 1):
        raise ValueError("weights are defined for n >= 1")
    if kind == "unweighted":
        return np.ones_like(n) if n.ndim else 1.0
    _check_weight_p(p)
    power = 1.0 / p - 2.0
    log_exp = 2.0 * math.floor(0.5 + p)
    if kind == "weakened":
        if p < 0.5:
            if not 0 <= eps < power:
                raise ParameterError(f"need 0 <= eps < 1/p - 2 = {power:g}")
            power -= eps
        else:
            if not 0 <= eps <= log_exp:
                raise ParameterError(f"need 0 <= eps <= {log_exp:g} for p = 1/2")
            log_exp -= eps
    out = (n + 1) ** power * np.log2(n + 1) ** log_exp
    return out if out.ndim else float(out)


def weight_row(p: float, mode, n_end: int, n_range=None) -> np.ndarray:
    """``w(n)`` at index n for n = 0..n_end; ``inf`` outside ``n_range`` (and at 0)."""
    n = np.arange(1, n_end + 1)
    row = np.full(n_end + 1, np.inf)
    row[1:] = weight(n, p, mode)
    if n_range is not None:
        keep = np.zeros(n_end + 1, dtype=bool)
        keep[_range_indices(n_range, n_end)] = True
        row[~keep] = np.inf
    return row


def _range_indices(n_range, n_end: int) -> np.ndarray:
    if isinstance(n_range, tuple) and len(n_range) == 2:
        idx = np.arange(n_range[0], n_range[1] + 1)
    else:
        idx = np.asarray(sorted(set(int(v) for v in n_range)), dtype=int)
    if not len(idx):
        raise ValueError("empty n range")
    if idx[0] < 1 or idx[-1] > n_end:
        raise ValueError(f"n range must lie in [1, {n_end}]")
    return idx


# -- the sweep engine ----------------------------------------------------------

@dataclass
class SweepResult:
    n_end: int
    sups: list  # one (batch..., M) array per weight row
    norms: dict  # p -> (batch..., n_end + 1) array of ||mean_n||_p^p (nan where undefined)


def sweep_statistics(spec: GroupSpec, f, family: MeanFamily, n_end: int,
                     weight_rows=(), ps=()) -> SweepResult:
    """One pass over n = 1..n_end accumulating, for each weight row ``w``,
    ``sup_n |mean_n f| / w[n]`` pointwise and, for each p, ``||mean_n f||_p^p``."""
    f = np.asarray(spec.check_signal(f), dtype=complex)
    batch = f.shape[:-1]
    M = spec.size
    rows = [np.asarray(r, dtype=float) for r in weight_rows]
    for r in rows:
        if len(r) < n_end + 1:
            raise ValueError("weight row shorter than the n range")
    inv = [1.0 / r[: n_end + 1] for r in rows]
    sups = [np.zeros(f.shape) for _ in rows]
    norms = {p: np.full(batch + (n_end + 1,), np.nan) for p in ps}
    floor = ROUNDOFF_FLOOR * np.abs(f).max(axis=-1, keepdims=True)

    def visit(n, A):
        for acc, iw in zip(sups, inv):
            if iw[n] > 0:
                np.maximum(acc, A * iw[n], out=acc)
        if norms:
            A = np.where(A > floor, A, 0.0)
        for p, out in norms.items():
            out[..., n] = np.mean(A ** p, axis=-1)

    if not _uses_running_sums(family):
        ns = [n for n in range(1, n_end + 1) if family.weights.Q[n] > 0]
        for start in range(0, len(ns), 64):
            chunk = ns[start:start + 64]
            means = apply_means(spec, f, family, chunk)
            for i, n in enumerate(chunk):
                visit(n, np.abs(means[..., i, :]))
        return SweepResult(n_end, sups, norms)

    for n, mean in sweep_means(spec, f, family, min(n_end, M), head_only=True):
        visit(n, np.abs(mean))
    if n_end <= M:
        return SweepResult(n_end, sups, norms)

    G, D = tail_form(spec, f, family)
    tail = np.arange(M + 1, n_end + 1)
    tail = tail[D[tail] > 0]
    Dt = D[tail]
    on = np.flatnonzero(np.any(f.reshape(-1, M) != 0, axis=0))
    off = np.setdiff1d(np.arange(M), on)
    absG = np.abs(G)
    # points where f vanishes: |mean_n| = |G| / D_n exactly
    for acc, iw in zip(sups, inv):
        c = float(np.max(iw[tail] / Dt)) if len(tail) else 0.0
        if c > 0 and len(off):
            acc[..., off] = np.maximum(acc[..., off], absG[..., off] * c)
    G_off = absG[..., off]
    G_off = np.where(G_off > ROUNDOFF_FLOOR * absG.max(axis=-1, keepdims=True), G_off, 0.0)
    off_pow = {p: np.sum(G_off ** p, axis=-1) for p in ps}
    f_on, G_on = f[..., on], G[..., on]
    floor_on = floor[None]
    for start in range(0, len(tail), _TAIL_CHUNK):
        ns = tail[start:start + _TAIL_CHUNK]
        d = D[ns]
        # (chunk, batch..., |on|)
        A = np.abs(f_on[None] + G_on[None] / d.reshape((-1,) + (1,) * f_on.ndim))
        for acc, iw in zip(sups, inv):
            scale = iw[ns].reshape((-1,) + (1,) * f_on.ndim)
            if np.any(scale > 0):
                acc[..., on] = np.maximum(acc[..., on], (A * scale).max(axis=0))
        if norms:
            A = np.where(A > floor_on, A, 0.0)
        for p, out in norms.items():
            on_pow = np.moveaxis(np.sum(A ** p, axis=-1), 0, -1)
            out[..., ns] = (on_pow + off_pow[p][..., None] / d ** p) / M
    return SweepResult(n_end, sups, norms)


def _family_for(spec: GroupSpec, family, n_end: int, **params) -> MeanFamily:
    if isinstance(family, MeanFamily):
        if family.weights.size < n_end:
            raise ValueError(f"weights cover n <= {family.weights.size}, need {n_end}")
        return family
    return make_family(family, n_end, **params)


def default_cap(spec: GroupSpec) -> int:
    return CAP_FACTOR * spec.size


# -- maximal operators -----------------------------------------------------------

def maximal_op(spec: GroupSpec, f, family, p: float = 0.5, mode="weighted",
               n_range=None, **params) -> np.ndarray:
    """Pointwise ``max_{n in n_range} |mean_n f| / w(n, p)``.

    ``n_range`` is ``(lo, hi)`` inclusive or an explicit collection of n;
    default ``(1, 4 M)``.  Indices with ``Q_n = 0`` are skipped.
    """
    if n_range is None:
        n_range = (1, default_cap(spec))
    idx = _range_indices(n_range, 10 ** 12)
    n_end = int(idx[-1])
    fam = _family_for(spec, family, n_end, **params)
    row = weight_row(p, mode, n_end, n_range)
    return sweep_statistics(spec, f, fam, n_end, [row]).sups[0]


@dataclass
class MaximalReport:
    family: str
    p: float
    mode: str
    n_range: tuple
    values: np.ndarray  # ||maximal signal||_p per input
    running_sup: np.ndarray = field(init=False)

    def __post_init__(self):
        self.values = np.atleast_1d(np.asarray(self.values, dtype=float))
        self.running_sup = np.maximum.accumulate(self.values)

    @property
    def sup(self) -> float:
        return float(self.running_sup[-1])


def maximal_report(spec: GroupSpec, inputs, family, p: float, mode="weighted",
                   n_range=None, **params) -> MaximalReport:
    F = np.atleast_2d(inputs)
    sig = maximal_op(spec, F, family, p, mode, n_range, **params)
    fam = family if isinstance(family, str) else family.label
    rng = n_range if n_range is not None else (1, default_cap(spec))
    return MaximalReport(fam, p, str(mode), tuple(rng), lp_quasinorm(spec, sig, p))


@dataclass
class DominationReport:
    family: str
    p: float
    monotonicity: str
    max_violation: float  # max of (T-side - factor * sigma-side), <= 0 when it holds
    violations: int
    factor: float


def domination_factor(w, n_end: int) -> float:
    """``max_n (sum_j |q_j - q_{j+1}| j + q_{n-1}(n-1)) / Q_n`` over the range.

    Equals 1 at most for non-increasing weights; for non-decreasing weights it is
    ``(2 q_{n-1}(n-1) - Q_n) / Q_n``.
    """
    q, Q = w.q, w.Q
    j = np.arange(n_end)
    jumps = np.abs(np.diff(q[:n_end])) * j[:-1]
    acc = np.concatenate([[0.0, 0.0], np.cumsum(jumps)])  # acc[n] = sum_{j<=n-2}
    ns = np.arange(1, n_end + 1)
    ok = Q[ns] > 0
    ns = ns[ok]
    vals = (acc[ns] + q[ns - 1] * (ns - 1)) / Q[ns]
    return float(max(1.0, vals.max()))


def domination_check(spec: GroupSpec, f, family, p: float, n_range=None, mode="weighted",
                     **params) -> DominationReport:
    """Compare ``T~*_p f`` against ``factor * sigma~*_p f`` pointwise."""
    if n_range is None:
        n_range = (1, default_cap(spec))
    n_end = int(_range_indices(n_range, 10 ** 12)[-1])
    fam = _family_for(spec, family, n_end, **params)
    if fam.kind != T_MEAN:
        raise NotApplicable("domination compares T means against sigma_n")
    w = fam.weights
    mono = w.monotonicity
    if is_non_increasing(w):
        factor = 1.0
    elif is_non_decreasing(w):
        factor = domination_factor(w, n_end)
    else:
        raise NotApplicable(f"{w.name}: weights are not monotone")
    row = weight_row(p, mode, n_end, n_range)
    T_side = sweep_statistics(spec, f, fam, n_end, [row]).sups[0]
    sigma = make_family("sigma", n_end)
    s_side = sweep_statistics(spec, f, sigma, n_end, [row]).sups[0]
    gap = T_side - factor * s_side
    return DominationReport(fam.label, p, mono, float(gap.max()),
                            int(np.sum(gap > DOMINATION_SLACK)), factor)


# -- strong convergence ------------------------------------------------------------

@dataclass
class StrongConvergenceReport:
    family: str
    p: float
    n_end: int
    partial_sums: np.ndarray  # raw sums over k <= n, index n
    hardy_norm: float  # ||f||_{H_p}
    normalized: np.ndarray | None = None  # p = 1/2 form, index n >= 2

    @property
    def partial_sum(self) -> float:
        if self.normalized is not None:
            return float(np.nanmax(self.normalized))
        return float(self.partial_sums[-1])

    @property
    def ratio(self) -> float:
        return self.partial_sum / self.hardy_norm ** self.p


def _strong_terms(p: float, norms: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
    n_end = norms.shape[-1] - 1
    k = np.arange(1, n_end + 1, dtype=float)
    terms = np.nan_to_num(norms[..., 1:])  # undefined means (Q_k = 0) contribute 0
    if p < 0.5:
        terms = terms / k ** (2 - 2 * p)
    else:
        terms = terms / k
    sums = np.concatenate([np.zeros(norms.shape[:-1] + (1,)), np.cumsum(terms, axis=-1)], axis=-1)
    if p < 0.5:
        return sums, None
    normalized = np.full(sums.shape, np.nan)
    normalized[..., 2:] = sums[..., 2:] / np.log2(np.arange(2, n_end + 1))
    return sums, normalized


def strong_convergence_sum(spec: GroupSpec, f, family, p: float, n_end: int | None = None,
                           **params) -> StrongConvergenceReport:
    """``sum_{k<=n} ||T_k f||_p^p / k^(2-2p)`` (p < 1/2) or
    ``(1/log2 n) sum_{k<=n} ||T_k f||_{1/2}^{1/2} / k`` (p = 1/2)."""
    _check_weight_p(p)
    f = spec.check_signal(f)
    if f.ndim != 1:
        raise ValueError("strong_convergence_sum takes one signal; see strong_convergence_batch")
    return strong_convergence_batch(spec, f[None], family, p, n_end, **params)[0]


def strong_convergence_batch(spec, F, family, p, n_end=None, **params):
    _check_weight_p(p)
    n_end = default_cap(spec) if n_end is None else n_end
    fam = _family_for(spec, family, n_end, **params)
    res = sweep_statistics(spec, F, fam, n_end, ps=[p])
    sums, normalized = _strong_terms(p, res.norms[p])
    hardy = hardy_quasinorm(spec, F, p)
    return [StrongConvergenceReport(fam.label, p, n_end, sums[i], float(hardy[i]),
                                    None if normalized is None else normalized[i])
            for i in range(len(F))]


# -- atoms on a finite model ---------------------------------------------------------

def atom_model(m, N: int, extra: int = 2) -> GroupSpec:
    """Level ``N + extra`` model whose atoms live on ``I_N``; radices beyond the
    given ones repeat the last."""
    m = tuple(m) if not isinstance(m, int) else (m,)
    full = m + (m[-1],) * max(0, N + extra - len(m))
    return GroupSpec(full[: N + extra])


def unit_atoms(spec: GroupSpec, N: int, count: int, seed) -> np.ndarray:
    """Atom shapes on ``I_N`` scaled to sup-norm 1; multiply by ``M_N^(1/p)``
    to get extremal p-atoms (all maps involved are homogeneous)."""
    return np.array([a.values for a in atom_corpus(spec, 1.0, N, count, seed)]) / spec.M[N]


def atoms_for_p(spec: GroupSpec, N: int, p: float, count: int, seed) -> list[PAtom]:
    return atom_corpus(spec, p, N, count, seed)


def atom_nullity(spec: GroupSpec, atoms: np.ndarray, family: MeanFamily, N: int) -> float:
    """``max |T_n a|`` over n <= M_N (zero in exact arithmetic)."""
    worst = 0.0
    for n, mean in sweep_means(spec, atoms, family, spec.M[N], head_only=True):
        worst = max(worst, float(np.abs(mean).max()))
    return worst


# -- kernel-integral estimates ---------------------------------------------------------

# lemma -> (kernel start: "tail" or "full", bound shape, hypothesis class)
LEMMAS = {
    "lemma5aa": ("tail", "square", "non-increasing"),
    "lemma5a": ("tail", "over_n", "non-increasing+linear_growth"),
    "lemma5bT": ("tail", "square", "non-increasing+linear_growth"),
    "lemma5aT": ("full", "over_n", "non-decreasing+last_weight"),
    "lemma5b": ("full", "square", "non-decreasing+last_weight"),
}


def lemma_applies(lemma_id: str, w, range_end: int | None = None) -> bool:
    _, _, cls = LEMMAS[lemma_id]
    mono, _, cond = cls.partition("+")
    ok = is_non_increasing(w) if mono == "non-increasing" else is_non_decreasing(w)
    if ok and cond:
        rep = check_conditions(w, range_end)
        ok = rep.linear_growth if cond == "linear_growth" else rep.last_weight
    return ok


def bound_shape(spec: GroupSpec, N: int, k: int, l: int, n, shape: str):
    M = spec.M
    n = np.asarray(n, dtype=float)
    if shape == "square":
        return M[k] * M[l] / M[N] ** 2 * np.ones_like(n)
    if l < N:
        return M[k] * M[l] / (n * M[N])
    return M[k] / M[N] * np.ones_like(n)


@dataclass
class LemmaReport:
    lemma_id: str
    family: str
    N: int
    rows: list  # (lemma_id, k, l, n, lhs, bound_shape, ratio)
    constant: float


def lemma_integral_check(spec: GroupSpec, family, N: int, lemma_id: str,
                         ns=None, strict: bool = True, **params) -> LemmaReport:
    """Exact ``max_{x in I_N^{k,l}} int_{I_N} |kernel_n(x - t)| dmu(t)`` for every cell
    and n, against the lemma's bound shape.

    The integral depends on ``x`` only through its first N digits, so each
    residue class is evaluated once.  The reported constant is the max ratio.
    """
    if lemma_id not in LEMMAS:
        raise ParameterError(f"unknown lemma {lemma_id!r}; choose from {sorted(LEMMAS)}")
    start_kind, shape, _ = LEMMAS[lemma_id]
    MN, ML = spec.M[N], spec.size
    if not 1 <= N < spec.N:
        raise ParameterError("need a model strictly finer than I_N")
    if ns is None:
        ns = np.arange(MN + 1, min(4 * MN, ML) + 1)
    ns = np.asarray(ns, dtype=int)
    if np.any(ns <= MN) or np.any(ns > ML):
        raise ParameterError(f"n must lie in (M_N, M] = ({MN}, {ML}]")
    fam = _family_for(spec, family, ML + 1, **params)
    w = fam.weights
    if strict and not lemma_applies(lemma_id, w):
        raise NotApplicable(f"{w.name} is outside the hypothesis class of {lemma_id}")
    start = MN if start_kind == "tail" else 0
    G = tail_kernel_table(spec, w, start, ns)
    # sum over t in I_N of |G(x - t)|: x - t runs over the coset of x mod M_N
    integral = np.abs(G).reshape(len(ns), ML // MN, MN).sum(axis=1) / ML
    k_lab, l_lab = cell_labels(spec.truncate(N), N)
    rows, best = [], 0.0
    for k in range(N):
        for l in range(k + 1, N + 1):
            members = np.flatnonzero((k_lab == k) & (l_lab == l))
            if not len(members):
                continue
            lhs = integral[:, members].max(axis=1)
            b = bound_shape(spec, N, k, l, ns, shape)
            ratio = lhs / b
            best = max(best, float(ratio.max()))
            rows.extend((lemma_id, k, l, int(n), float(a), float(bb), float(r))
                        for n, a, bb, r in zip(ns, lhs, b, ratio))
    return LemmaReport(lemma_id, fam.label, N, rows, best)


# -- sharpness ---------------------------------------------------------------------

@dataclass
class SharpnessReport:
    family: str
    p: float
    eps: float
    Ns: list
    bounded: list  # worst-atom ||T~*_p a||_p with the full weight
    weakened: list  # same with the weakened weight

    @property
    def growth(self) -> list:
        return [b / a for a, b in zip(self.weakened, self.weakened[1:])]

    @property
    def drift(self) -> list:
        return [b / a - 1 for a, b in zip(self.bounded, self.bounded[1:])]


def worst_atom_values(spec: GroupSpec, N: int, family, p_modes, count: int, seed,
                      cap: int | None = None, **params) -> dict:
    """Sup over the atom corpus of ``||T~*_p a||_p`` for each ``(p, mode)``."""
    cap = default_cap(spec) if cap is None else cap
    fam = _family_for(spec, family, cap, **params)
    shapes = unit_atoms(spec, N, count, seed)
    rows = [weight_row(p, mode, cap) for p, mode in p_modes]
    res = sweep_statistics(spec, shapes, fam, cap, rows)
    out = {}
    for (p, mode), sig in zip(p_modes, res.sups):
        scale = spec.M[N] ** (1.0 / p)
        out[(p, mode)] = float(np.max(lp_quasinorm(spec, sig * scale, p)))
    return out


def sharpness_probe(p: float, family, eps: float, N_range, m=(2,), count: int = 200,
                    seed: int = 0, extra: int = 2, **params) -> SharpnessReport:
    weakened = f"weakened:{eps}"
    bounded, weak = [], []
    for N in N_range:
        spec = atom_model(m, N, extra)
        vals = worst_atom_values(spec, N, family, [(p, "weighted"), (p, weakened)],
                                 count, seed, **params)
        bounded.append(vals[(p, "weighted")])
        weak.append(vals[(p, weakened)])
    name = family if isinstance(family, str) else family.label
    return SharpnessReport(name, p, eps, list(N_range), bounded, weak)
