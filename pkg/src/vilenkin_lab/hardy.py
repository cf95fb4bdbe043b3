"""Quasi-norms, the martingale maximal function and p-atoms."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .group import GroupSpec, Interval, coset_average, interval_members
from .transform import inverse_transform, transform_fast, vilenkin_fn


class AtomError(ValueError):
    pass


def _check_p(p: float) -> float:
    p = float(p)
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    return p


def lp_quasinorm(spec: GroupSpec, f, p: float) -> np.ndarray:
    """``(mean |f|^p)^(1/p)`` over the last axis."""
    p = _check_p(p)
    f = spec.check_signal(f)
    return np.mean(np.abs(f) ** p, axis=-1) ** (1.0 / p)


def weak_lp_quasinorm(spec: GroupSpec, f, p: float) -> float:
    """``(sup_lambda lambda^p mu(|f| > lambda))^(1/p)``, exact for a finite signal.

    The sup is approached as ``lambda`` rises to a value ``v`` of ``|f|``, where
    it equals ``v^p mu(|f| >= v)``.
    """
    p = _check_p(p)
    a = np.sort(np.abs(spec.check_signal(f)))[::-1]
    if a.ndim != 1:
        raise ValueError("weak_lp_quasinorm takes a single signal")
    # mu(|f| >= a[i]) counts ties, so use the last position of each value
    counts = np.searchsorted(-a, -a, side="right")
    best = np.max(a ** p * counts / spec.size)
    return float(best ** (1.0 / p))


def martingale_levels(spec: GroupSpec, f) -> np.ndarray:
    """The tower ``S_{M_n} f`` for n = 0..N, stacked before the last axis."""
    f = spec.check_signal(f)
    fhat = transform_fast(spec, f)
    out = []
    for n in range(spec.N + 1):
        g = fhat.copy()
        g[..., spec.M[n]:] = 0
        out.append(inverse_transform(spec, g))
    return np.stack(out, axis=-2)


@dataclass(frozen=True)
class MartingaleView:
    """``f^(n) = S_{M_n} f`` for n = 0..N, in ``levels[..., n, :]``."""

    spec: GroupSpec
    levels: np.ndarray

    @classmethod
    def of(cls, spec: GroupSpec, f) -> "MartingaleView":
        return cls(spec, martingale_levels(spec, f))

    def maximal(self) -> np.ndarray:
        return np.abs(self.levels).max(axis=-2)


def maximal_function(spec: GroupSpec, f) -> np.ndarray:
    """``f* = max_n |S_{M_n} f|`` (partial-sum route)."""
    return np.abs(martingale_levels(spec, f)).max(axis=-2)


def maximal_function_direct(spec: GroupSpec, f) -> np.ndarray:
    """``f*`` from coset averages, without any transform."""
    f = spec.check_signal(f)
    return np.max([np.abs(coset_average(spec, f, n)) for n in range(spec.N + 1)], axis=0)


def hardy_quasinorm(spec: GroupSpec, f, p: float) -> np.ndarray:
    return lp_quasinorm(spec, maximal_function(spec, f), p)


@dataclass(frozen=True)
class PAtom:
    p: float
    support: Interval
    values: np.ndarray

    def to_json(self) -> str:
        return json.dumps({
            "p": self.p,
            "level": self.support.level,
            "anchor": list(self.support.anchor),
            "values": [[float(v.real), float(v.imag)] for v in np.asarray(self.values, complex)],
        })

    @classmethod
    def from_json(cls, text: str) -> "PAtom":
        d = json.loads(text)
        vals = np.array([complex(re, im) for re, im in d["values"]])
        if not np.any(vals.imag):
            vals = vals.real
        return cls(float(d["p"]), Interval(int(d["level"]), tuple(d["anchor"])), vals)


def atom_violations(spec: GroupSpec, atom: PAtom, tol: float = 1e-12) -> list[str]:
    """Which of the three atom conditions fail (empty list: a valid p-atom)."""
    a = np.asarray(spec.check_signal(atom.values))
    p = _check_p(atom.p)
    problems = []
    inside = np.zeros(spec.size, dtype=bool)
    inside[interval_members(spec, atom.support)] = True
    if np.any(a[~inside] != 0):
        problems.append("support")
    bound = atom.support.measure(spec) ** (-1.0 / p)
    if np.abs(a).max() > bound * (1 + tol):
        problems.append("sup-norm")
    # integral over I, normalized by the sup bound times mu(I)
    integral = a[inside].sum() / spec.size
    if abs(integral) > tol * bound * atom.support.measure(spec):
        problems.append("mean")
    return problems


def is_atom(spec: GroupSpec, atom: PAtom, tol: float = 1e-12) -> bool:
    return not atom_violations(spec, atom, tol)


def make_random_atom(spec: GroupSpec, p: float, support_level: int, seed,
                     anchor: tuple[int, ...] = ()) -> PAtom:
    """Uniform values on ``I_level(anchor)``, mean removed, scaled to ``mu(I)^(-1/p)``."""
    p = _check_p(p)
    if not 0 <= support_level <= spec.N:
        raise AtomError(f"support level {support_level} outside [0, {spec.N}]")
    if support_level == spec.N:
        raise AtomError("a single-point support forces a = 0")
    support = Interval(support_level, anchor)
    idx = interval_members(spec, support)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    v = rng.uniform(-1.0, 1.0, size=len(idx))
    v -= v.mean()
    peak = np.abs(v).max()
    if peak == 0:
        raise AtomError("degenerate draw")
    values = np.zeros(spec.size)
    values[idx] = v * (support.measure(spec) ** (-1.0 / p) / peak)
    values[idx] -= values[idx].mean()  # scrub rounding in the mean
    return PAtom(p, support, values)


def character_atom(spec: GroupSpec, p: float, support_level: int, j: int) -> PAtom:
    """``mu(I)^(-1/p) 1_{I_level} psi_j``; an extremal atom when ``j >= M_level``."""
    if not spec.M[support_level] <= j < spec.size:
        raise AtomError(f"need M_level <= j < M_N, got j = {j}")
    support = Interval(support_level)
    values = np.zeros(spec.size, dtype=complex)
    idx = interval_members(spec, support)
    values[idx] = vilenkin_fn(spec, j)[idx] * support.measure(spec) ** (-1.0 / p)
    return PAtom(p, support, values)


def atom_corpus(spec: GroupSpec, p: float, support_level: int, count: int, seed) -> list[PAtom]:
    """Extremal character atoms on ``I_level`` (one per distinct restriction) plus
    ``count`` seeded random atoms.  Random streams are spawned per atom so the
    corpus does not depend on evaluation order."""
    Mn = spec.M[support_level]
    atoms = [character_atom(spec, p, support_level, h * Mn) for h in range(1, spec.size // Mn)]
    ss = np.random.SeedSequence(seed)
    for child in ss.spawn(count):
        atoms.append(make_random_atom(spec, p, support_level, np.random.default_rng(child)))
    return atoms
