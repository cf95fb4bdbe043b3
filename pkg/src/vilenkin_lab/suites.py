"""Verification suites: exact identities, kernel-integral constants, the
maximal-operator and strong-convergence experiments, and sharpness trends.

Each suite returns a :class:`SuiteResult` holding a JSON summary, CSV tables
and the list of hard failures (identity, domination and atom-nullity checks).
Stability verdicts are reported but are not hard failures.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .group import GroupSpec, coset_average, interval_members, Interval
from .hardy import hardy_quasinorm, lp_quasinorm, maximal_function, maximal_function_direct, martingale_levels
from .io import LEMMA_COLUMNS, MAXIMAL_COLUMNS, STRONG_COLUMNS
from .kernels import (
    convolve, dirichlet_factorized, dirichlet_table, fejer_closed_form, fejer_table,
    tail_kernel_table,
)
from .lab import (
    DOMINATION_SLACK, LEMMAS, _strong_terms, atom_model, domination_factor, lemma_applies,
    lemma_integral_check, sweep_statistics, unit_atoms, weight_row,
)
from .summability import (
    MeanFamily, apply_means, check_conditions, is_non_decreasing, is_non_increasing,
    make_family, make_weights, sweep_means,
)
from .transform import partial_sums, transform_fast, transform_naive, vilenkin_matrix

IDENTITY_SPECS = ((2, 2, 2, 2), (3, 2, 3), (2, 3, 4))
T_FAMILIES = (
    ("fejer", {}),
    ("riesz", {}),
    ("u", {"alpha": 0.5}),
    ("v", {"alpha": 0.5}),
    ("b", {"alpha": 1.0, "beta": 1}),
)
PS = (0.25, 0.4, 0.5)
NULLITY_TOL = 1e-12
MAXIMAL_DRIFT = 0.10
LEMMA_DRIFT = 0.15
STRONG_DRIFT = 0.10
SHARP_GROWTH = 1.3


@dataclass
class SuiteResult:
    name: str
    summary: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)  # file name -> (header, rows)
    hard_failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.hard_failures


def family_key(name: str, params: dict) -> str:
    vals = ",".join(f"{params[k]:g}" for k in ("alpha", "beta") if k in params)
    return f"{name}({vals})" if vals else name


def drifts(series) -> list:
    return [b / a - 1 for a, b in zip(series, series[1:])]


def is_stable(series, tol: float) -> bool:
    s = np.asarray(series, dtype=float)
    return bool(np.all(np.isfinite(s)) and all(abs(d) <= tol for d in drifts(series)))


def _pmap(fn, items, threads: int):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


# -- identities ------------------------------------------------------------------

def _abel_kernel(w, n, K):
    # (1/Q_n)(sum_{j<=n-2} (q_j - q_{j+1}) j K_j + q_{n-1} (n-1) K_{n-1})
    j = np.arange(n - 1)
    coef = (w.q[j] - w.q[j + 1]) * j
    return (coef @ K[j] + w.q[n - 1] * (n - 1) * K[n - 1]) / w.Q[n]


def identity_errors(spec: GroupSpec, seed: int = 0, families=T_FAMILIES) -> dict:
    """Max abs error of every exact identity on one spec, over all admissible indices."""
    rng = np.random.default_rng(seed)
    M = spec.size
    f = rng.normal(size=M) + 1j * rng.normal(size=M)
    out = {}
    D = dirichlet_table(spec)
    K = fejer_table(spec)
    out["dirichlet_at_powers"] = max(
        float(np.abs(D[spec.M[n]] - spec.M[n] * Interval(n).indicator(spec)).max())
        for n in range(spec.N + 1))
    out["dirichlet_product"] = max(float(np.abs(dirichlet_factorized(spec, n) - D[n]).max())
                               for n in range(1, M))
    out["fejer_closed_form_at_powers"] = max(float(np.abs(fejer_closed_form(spec, n) - K[spec.M[n]]).max())
                                 for n in range(spec.N + 1))
    Psi = vilenkin_matrix(spec)
    out["orthonormality"] = float(np.abs(Psi @ Psi.conj().T / M - np.eye(M)).max())
    F = rng.normal(size=(8, M)) + 1j * rng.normal(size=(8, M))
    out["transform_oracle"] = float(np.abs(transform_fast(spec, F) - transform_naive(spec, F)).max())
    levels = martingale_levels(spec, f)
    out["martingale_tower"] = max(float(np.abs(levels[n] - coset_average(spec, f, n)).max())
                                  for n in range(spec.N + 1))
    out["maximal_two_routes"] = float(np.abs(maximal_function(spec, f)
                                             - maximal_function_direct(spec, f)).max())

    S = partial_sums(spec, f)  # S_0..S_M
    sigma = np.zeros_like(S)
    sigma[1:] = np.cumsum(S[1:], axis=0) / np.arange(1, M + 1)[:, None]
    conv = c2 = cc2 = 0.0
    for name, params in families:
        w = make_weights(name, M + 1, **params)
        fam = MeanFamily("T", w)
        ns = np.array([n for n in range(1, M + 1) if w.Q[n] > 0])
        means = apply_means(spec, f, fam, ns)
        Fn = tail_kernel_table(spec, w, 0, ns)
        conv = max(conv, float(np.abs(convolve(spec, f, Fn) - means).max()))
        for i, n in enumerate(ns):
            c2 = max(c2, float(np.abs(_abel_kernel(w, n, K) - Fn[i]).max()))
            cc2 = max(cc2, float(np.abs(_abel_kernel(w, n, sigma) - means[i]).max()))
    out["convolution"] = conv
    out["abel_kernel"] = c2
    out["abel_means"] = cc2
    return out


def abel_weight_sum_errors(families=T_FAMILIES, n_max: int = 4096) -> dict:
    """Relative error of the weight-sum Abel identity.

    ``printed``: ``Q_n = sum_{j<=n-2} (q_j - q_{j+1}) j + q_{n-1}(n-1)``, which
    telescopes to ``Q_n - q_0``; it is exact only for ``q_0 = 0``.
    ``shifted``: the same right-hand side against ``Q_n - q_0`` (all weights).
    """
    out = {}
    for name, params in families:
        w = make_weights(name, n_max + 1, **params)
        ns = np.arange(1, n_max + 1)
        jumps = (w.q[:-1] - w.q[1:]) * np.arange(n_max)
        acc = np.concatenate([[0.0, 0.0], np.cumsum(jumps)])[: n_max + 1]
        rhs = acc[ns] + w.q[ns - 1] * (ns - 1)
        Q = w.Q[ns]
        ok = Q > 0
        rel = lambda lhs: float(np.max(np.abs(lhs[ok] - rhs[ok]) / Q[ok]))
        out[family_key(name, params)] = {
            "q0": float(w.q[0]),
            "printed": rel(Q),
            "shifted": rel(Q - w.q[0]),
        }
    return out


def identities_suite(specs=IDENTITY_SPECS, seed: int = 0, tol: float = 1e-10,
                     threads: int = 1) -> SuiteResult:
    res = SuiteResult("identities")
    errs = _pmap(lambda m: identity_errors(GroupSpec(tuple(m)), seed), specs, threads)
    per_spec = {",".join(map(str, m)): e for m, e in zip(specs, errs)}
    abel = abel_weight_sum_errors()
    worst = {}
    for e in errs:
        for k, v in e.items():
            worst[k] = max(worst.get(k, 0.0), v)
    worst["abel_weight_sums"] = max(v["printed"] for v in abel.values() if v["q0"] == 0)
    worst["abel_weight_sums_shifted"] = max(v["shifted"] for v in abel.values())
    for k, v in worst.items():
        if not v <= tol:
            res.hard_failures.append(f"{k}: {v:.3g} > {tol:g}")
    res.summary = {"tolerance": tol, "max_error": worst, "per_spec": per_spec,
                   "abel_weight_sums": abel}
    rows = [(s, k, v) for s, e in per_spec.items() for k, v in sorted(e.items())]
    res.tables["identities.csv"] = (["spec", "identity", "max_error"], rows)
    return res


# -- kernel-integral lemmas ----------------------------------------------------------

def lemma_model(m, N: int) -> GroupSpec:
    """Smallest extension of level N with ``M >= 4 M_N`` (covers n in (M_N, 4 M_N])."""
    extra = 1
    while True:
        spec = atom_model(m, N, extra)
        if spec.size >= 4 * spec.M[N]:
            return spec
        extra += 1


def lemmas_suite(m=(2,), N_range=(4, 5, 6), families=T_FAMILIES, lemma_ids=tuple(LEMMAS),
                 threads: int = 1) -> SuiteResult:
    res = SuiteResult("lemmas")
    cells = [(lid, name, params) for lid in lemma_ids for name, params in families]

    def run(cell):
        lid, name, params = cell
        probe = make_weights(name, 4096, **params)
        if not lemma_applies(lid, probe):
            return cell, None
        reps = []
        for N in N_range:
            spec = lemma_model(m, N)
            reps.append(lemma_integral_check(spec, name, N, lid, **params))
        return cell, reps

    out = {}
    for (lid, name, params), reps in _pmap(run, cells, threads):
        key = family_key(name, params)
        if reps is None:
            out.setdefault(lid, {})[key] = {"applies": False}
            continue
        consts = [r.constant for r in reps]
        stable = is_stable(consts, LEMMA_DRIFT)
        out.setdefault(lid, {})[key] = {"applies": True, "N": list(N_range), "constant": consts,
                                        "drift": drifts(consts), "stable": stable}
        for r in reps:
            res.tables[f"lemma_{lid}_{key}_N{r.N}.csv"] = (LEMMA_COLUMNS, r.rows)
    res.summary = {"m": list(m), "tolerance": LEMMA_DRIFT, "lemmas": out}
    return res


# -- atom experiments ------------------------------------------------------------------

@dataclass
class AtomCell:
    family: str
    N: int
    sup: dict  # (p, mode) -> worst ||T~*_p a||_p over the corpus
    domination: dict  # p -> (max gap, violations, factor)
    nullity: float
    strong: dict  # p -> (worst ratio, its partial sum, its H_p norm, n_end)
    hardy_sup: dict  # p -> max ||a||_{H_p}


def _p_atom_scale(spec, N, p):
    return spec.M[N] ** (1.0 / p)


def atom_cells(m=(2,), N_range=(5, 6, 7, 8), families=T_FAMILIES, ps=PS,
               modes=("weighted",), strong_ps=(), count: int = 200, seed: int = 0,
               extra: int = 2, cap_factor: int = 4, domination: bool = True,
               threads: int = 1, p_modes=None) -> list:
    """Sweep every (family, N) cell over one atom corpus on ``I_N``.

    Weighted sups for ``sigma_n`` are computed once per N and reused for the
    domination check.
    """
    if p_modes is None:
        p_modes = [(p, md) for p in ps for md in modes]
    p_modes = list(p_modes)
    if domination:
        p_modes += [(p, "weighted") for p in ps if (p, "weighted") not in p_modes]

    def per_N(N):
        spec = atom_model(m, N, extra)
        cap = cap_factor * spec.size
        shapes = unit_atoms(spec, N, count, seed)
        rows = [weight_row(p, md, cap) for p, md in p_modes]
        sigma_sups = None
        if domination:
            sigma_sups = sweep_statistics(spec, shapes, make_family("sigma", cap), cap, rows).sups
        hardy = {p: hardy_quasinorm(spec, shapes, p) for p in set(ps) | set(strong_ps)}
        cells = []
        for name, params in families:
            fam = make_family(name, cap, **params)
            st = sweep_statistics(spec, shapes, fam, cap, rows, ps=strong_ps)
            sup = {}
            for (p, md), sig in zip(p_modes, st.sups):
                sup[(p, md)] = float(np.max(lp_quasinorm(spec, sig, p))) * _p_atom_scale(spec, N, p)
            dom = {}
            if domination:
                w = fam.weights
                if is_non_increasing(w):
                    factor = 1.0
                elif is_non_decreasing(w):
                    factor = domination_factor(w, cap)
                else:
                    factor = None
                for i, (p, md) in enumerate(p_modes):
                    if md != "weighted" or factor is None:
                        continue
                    # atoms normalized to sup-norm 1, so the slack is scale-free
                    gap = st.sups[i] - factor * sigma_sups[i]
                    dom[p] = (float(gap.max()), int(np.sum(gap > DOMINATION_SLACK)), factor)
            null = 0.0
            for n, mean in sweep_means(spec, shapes, fam, spec.M[N], head_only=True):
                null = max(null, float(np.abs(mean).max()))
            strong = {}
            for p in strong_ps:
                sums, normalized = _strong_terms(p, st.norms[p])
                val = sums[:, -1] if normalized is None else np.nanmax(normalized, axis=1)
                ratio = val / hardy[p] ** p
                i = int(np.argmax(ratio))
                # worst atom at p-atom scale: ||.||_p^p scales by M_N
                strong[p] = (float(ratio[i]), float(val[i]) * spec.M[N],
                             float(hardy[p][i]) * _p_atom_scale(spec, N, p), cap)
            cells.append(AtomCell(family_key(name, params), N, sup, dom, null, strong,
                                  {p: float(hardy[p].max()) * _p_atom_scale(spec, N, p)
                                   for p in hardy}))
        return cells

    return [c for cs in _pmap(per_N, list(N_range), threads) for c in cs]


def _series(cells, family, getter):
    cs = sorted((c for c in cells if c.family == family), key=lambda c: c.N)
    return [c.N for c in cs], [getter(c) for c in cs]


def maximal_suite(name: str, families, m=(2,), N_range=(5, 6, 7, 8), ps=PS, count=200,
                  seed=0, extra=2, cap_factor=4, threads=1, cells=None) -> SuiteResult:
    """Theorems on weighted maximal operators: worst-atom ``||T~*_p a||_p`` series,
    domination by ``sigma~*_p`` and atom nullity."""
    res = SuiteResult(name)
    if cells is None:
        cells = atom_cells(m, N_range, families, ps, ("weighted",), (), count, seed, extra,
                           cap_factor, True, threads)
    keys = [family_key(n, p) for n, p in families]
    table, summary = [], {}
    for key in keys:
        fam_out = {}
        for p in ps:
            Ns, vals = _series(cells, key, lambda c: c.sup[(p, "weighted")])
            fam_out[str(p)] = {"N": Ns, "value": vals, "drift": drifts(vals),
                               "stable": is_stable(vals, MAXIMAL_DRIFT)}
            table += [(key, p, N, seed, v) for N, v in zip(Ns, vals)]
        for c in (c for c in cells if c.family == key):
            for p, (gap, nviol, factor) in c.domination.items():
                fam_out.setdefault("domination", []).append(
                    {"N": c.N, "p": p, "max_gap": gap, "violations": nviol, "factor": factor})
                if nviol:
                    res.hard_failures.append(f"domination {key} N={c.N} p={p}: {nviol} violations")
            fam_out.setdefault("nullity", []).append({"N": c.N, "max_abs": c.nullity})
            if c.nullity > NULLITY_TOL:
                res.hard_failures.append(f"nullity {key} N={c.N}: {c.nullity:.3g}")
        summary[key] = fam_out
    res.summary = {"m": list(m), "drift_tolerance": MAXIMAL_DRIFT, "atoms": count,
                   "seed": seed, "families": summary}
    res.tables[f"{name}_maximal.csv"] = (MAXIMAL_COLUMNS, table)
    return res


def strong_suite(name: str, families, covered_low, covered_half, m=(2,), N_range=(5, 6, 7, 8),
                 ps=(0.25, 0.4), count=200, seed=0, extra=2, cap_factor=4, threads=1,
                 cells=None) -> SuiteResult:
    """Strong-convergence sums over the atom corpus.

    ``covered_low`` / ``covered_half`` name the families whose p < 1/2 sums and
    p = 1/2 log-normalized sums fall under a theorem hypothesis; the others
    are reported only.
    """
    res = SuiteResult(name)
    all_ps = tuple(ps) + (0.5,)
    if cells is None:
        cells = atom_cells(m, N_range, families, (), (), all_ps, count, seed, extra,
                           cap_factor, False, threads)
    table, summary = [], {}
    for fname, params in families:
        key = family_key(fname, params)
        fam_out = {}
        for p in all_ps:
            Ns, vals = _series(cells, key, lambda c: c.strong[p][0])
            covered = key in (covered_low if p < 0.5 else covered_half)
            fam_out[str(p)] = {"N": Ns, "ratio": vals, "drift": drifts(vals),
                               "stable": is_stable(vals, STRONG_DRIFT), "covered": covered}
            for c in sorted((c for c in cells if c.family == key), key=lambda c: c.N):
                ratio, psum, hnorm, n_end = c.strong[p]
                table.append((key, p, n_end, psum, hnorm, ratio))
        for c in (c for c in cells if c.family == key):
            fam_out.setdefault("nullity", []).append({"N": c.N, "max_abs": c.nullity})
            if c.nullity > NULLITY_TOL:
                res.hard_failures.append(f"nullity {key} N={c.N}: {c.nullity:.3g}")
        summary[key] = fam_out
    res.summary = {"m": list(m), "drift_tolerance": STRONG_DRIFT, "atoms": count, "seed": seed,
                   "families": summary}
    res.tables[f"{name}_strong.csv"] = (STRONG_COLUMNS, table)
    return res


def theorem_families(which: str, families=T_FAMILIES, range_end: int = 4096):
    """Families meeting a theorem's hypothesis, judged from their weights."""
    out = []
    for name, params in families:
        w = make_weights(name, range_end, **params)
        rep = check_conditions(w, range_end)
        if which in ("theorem1", "theorem2") and is_non_increasing(w):
            out.append((name, params))
        elif which in ("theorem3",) and is_non_decreasing(w) and rep.last_weight:
            out.append((name, params))
        elif which == "theorem4" and is_non_decreasing(w):
            out.append((name, params))
    return out


def half_covered(which: str, families=T_FAMILIES, range_end: int = 4096) -> dict:
    """Families whose p = 1/2 sums are covered, per reading of the hypothesis."""
    out = {}
    for name, params in families:
        w = make_weights(name, range_end, **params)
        rep = check_conditions(w, range_end)
        key = family_key(name, params)
        if which == "theorem2":
            if is_non_increasing(w) and rep.linear_growth:
                out.setdefault("linear_growth", []).append(key)
        else:
            if is_non_decreasing(w) and rep.last_weight:
                out.setdefault("non-decreasing+last_weight", []).append(key)
            if is_non_increasing(w) and rep.last_weight:
                out.setdefault("non-increasing+last_weight", []).append(key)
    return out


# -- sharpness ---------------------------------------------------------------------------

SHARP_CASES = ((0.25, 0.5), (0.5, 2.0))


def sharpness_suite(families=(("fejer", {}),), m=(2,), N_range=(5, 6, 7, 8), cases=SHARP_CASES,
                    count=200, seed=0, extra=2, cap_factor=4, threads=1, cells=None) -> SuiteResult:
    res = SuiteResult("sharpness")
    p_modes = []
    for p, eps in cases:
        for md in ("weighted", f"weakened:{eps:g}"):
            if (p, md) not in p_modes:
                p_modes.append((p, md))
    if cells is None:
        cells = atom_cells(m, N_range, families, (), (), (), count, seed, extra, cap_factor,
                           False, threads, p_modes=p_modes)
    summary, table = {}, []
    for name, params in families:
        key = family_key(name, params)
        for p, eps in cases:
            weak = f"weakened:{eps:g}"
            Ns, bounded = _series(cells, key, lambda c: c.sup[(p, "weighted")])
            _, weakened = _series(cells, key, lambda c: c.sup[(p, weak)])
            growth = [b / a for a, b in zip(weakened, weakened[1:])]
            summary[f"{key} p={p:g} eps={eps:g}"] = {
                "N": Ns, "bounded": bounded, "weakened": weakened,
                "weakened_growth": growth, "bounded_drift": drifts(bounded),
                "weakened_grows": all(g >= SHARP_GROWTH for g in growth),
                "bounded_flat": is_stable(bounded, MAXIMAL_DRIFT),
                "separation": [b / a for a, b in zip(bounded, weakened)],
            }
            table += [(key, p, N, seed, v) for N, v in zip(Ns, bounded)]
            table += [(f"{key}:{weak}", p, N, seed, v) for N, v in zip(Ns, weakened)]
    res.summary = {"m": list(m), "growth_threshold": SHARP_GROWTH,
                   "flat_tolerance": MAXIMAL_DRIFT, "series": summary}
    res.tables["sharpness.csv"] = (MAXIMAL_COLUMNS, table)
    return res


# -- uniform L1 bounds for K_n and F_n ------------------------------------------------------

def kernel_norm_sups(N: int, families=T_FAMILIES, n_max: int = 512, m=(2,)) -> dict:
    """``sup_{n <= min(n_max, M_N)} ||K_n||_1`` and ``||F_n||_1`` per family."""
    spec = atom_model(m, N, 0)
    top = min(n_max, spec.size)
    out = {"fejer_kernel": float(np.abs(fejer_table(spec)[1:top + 1]).mean(axis=1).max())}
    for name, params in families:
        w = make_weights(name, spec.size + 1, **params)
        ns = np.array([n for n in range(1, top + 1) if w.Q[n] > 0])
        Fn = tail_kernel_table(spec, w, 0, ns)
        out[family_key(name, params)] = float(np.abs(Fn).mean(axis=1).max())
    return out
