"""Vilenkin system and Vilenkin-Fourier transforms.

Signals are numpy arrays whose last axis has length ``M_N`` (leading axes are
batch axes).  Forward transforms use the normalized Haar integral, so
``fhat[n] = mean(f * conj(psi_n))`` and the inverse carries no factor.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .group import GroupSpec, SpecError, digit_table

# Row-chunk used when the full (M_N, M_N) character matrix would be too big.
_NAIVE_CHUNK = 256
_MATRIX_LIMIT = 1024


@lru_cache(maxsize=None)
def roots_of_unity(m: int, sign: int = 1) -> np.ndarray:
    """``exp(sign * 2 pi i j / m)`` for j < m, with exact values at j = 0."""
    j = np.arange(m)
    w = np.exp(sign * 2j * np.pi * j / m)
    w[0] = 1.0
    w.setflags(write=False)
    return w


@lru_cache(maxsize=None)
def _dft_matrix(m: int, sign: int) -> np.ndarray:
    r = roots_of_unity(m, sign)
    return r[np.outer(np.arange(m), np.arange(m)) % m]


def rademacher(spec: GroupSpec, k: int, x=None):
    """Generalized Rademacher function ``r_k(x) = exp(2 pi i x_k / m_k)``.

    ``x`` may be a digit sequence or a flat index; with ``x=None`` the whole
    signal is returned.
    """
    if not 0 <= k < spec.N:
        raise IndexError(f"Rademacher level {k} outside [0, {spec.N})")
    r = roots_of_unity(spec.m[k])
    if x is None:
        return r[digit_table(spec)[:, k]]
    if np.isscalar(x):
        return complex(r[digit_table(spec)[int(x), k]])
    return complex(r[int(x[k])])


def vilenkin_fn(spec: GroupSpec, n: int) -> np.ndarray:
    """``psi_n = prod_k r_k^{n_k}`` as a signal."""
    if not 0 <= n < spec.size:
        raise IndexError(f"index {n} outside [0, {spec.size})")
    return _character_rows(spec, np.array([n]))[0]


def _character_rows(spec: GroupSpec, ns: np.ndarray, sign: int = 1) -> np.ndarray:
    D = digit_table(spec)
    nd = D[ns]
    out = np.ones((len(ns), spec.size), dtype=complex)
    for k, mk in enumerate(spec.m):
        r = roots_of_unity(mk, sign)
        out *= r[np.outer(nd[:, k], D[:, k]) % mk]
    return out


@lru_cache(maxsize=8)
def vilenkin_matrix(spec: GroupSpec) -> np.ndarray:
    """``Psi[n, x] = psi_n(x)``; only for ``M_N <= 1024``."""
    if spec.size > _MATRIX_LIMIT:
        raise SpecError(f"character matrix of size {spec.size}^2 is too large")
    Psi = _character_rows(spec, np.arange(spec.size))
    Psi.setflags(write=False)
    return Psi


def transform_naive(spec: GroupSpec, f) -> np.ndarray:
    """Direct O(M_N^2) evaluation of ``fhat[n] = mean(f * conj(psi_n))``."""
    f = np.asarray(spec.check_signal(f), dtype=complex)
    out = np.empty(f.shape, dtype=complex)
    for start in range(0, spec.size, _NAIVE_CHUNK):
        ns = np.arange(start, min(start + _NAIVE_CHUNK, spec.size))
        conj_rows = _character_rows(spec, ns, sign=-1)
        out[..., ns] = f @ conj_rows.T
    return out / spec.size


def inverse_naive(spec: GroupSpec, s) -> np.ndarray:
    s = np.asarray(spec.check_signal(s), dtype=complex)
    out = np.zeros(s.shape, dtype=complex)
    for start in range(0, spec.size, _NAIVE_CHUNK):
        ns = np.arange(start, min(start + _NAIVE_CHUNK, spec.size))
        out += s[..., ns] @ _character_rows(spec, ns)
    return out


def _digit_butterflies(spec: GroupSpec, values: np.ndarray, sign: int) -> np.ndarray:
    # One stage per digit: axis of length m_k sits between blocks of M_k
    # (faster digits) and M_N / M_{k+1} (slower digits).
    batch = values.shape[:-1]
    x = np.array(values, dtype=complex)
    for k, mk in enumerate(spec.m):
        Mk = spec.M[k]
        x = x.reshape(batch + (spec.size // (Mk * mk), mk, Mk))
        x = _dft_matrix(mk, sign) @ x
    return x.reshape(batch + (spec.size,))


def transform_fast(spec: GroupSpec, f) -> np.ndarray:
    """Mixed-radix transform: N stages of m_k-point DFTs along each digit.

    Same output as :func:`transform_naive` in O(M_N sum_k m_k) operations.
    """
    f = spec.check_signal(f)
    return _digit_butterflies(spec, f, -1) / spec.size


def inverse_transform(spec: GroupSpec, s) -> np.ndarray:
    """``f(x) = sum_n s[n] psi_n(x)``."""
    s = spec.check_signal(s)
    return _digit_butterflies(spec, s, 1)


transform = transform_fast


def partial_sum(spec: GroupSpec, f, n: int) -> np.ndarray:
    """``S_n f = sum_{k<n} fhat(k) psi_k``; ``S_0 f = 0``."""
    if not 0 <= n <= spec.size:
        raise IndexError(f"partial-sum index {n} outside [0, {spec.size}]")
    fhat = transform_fast(spec, f)
    fhat[..., n:] = 0
    return inverse_transform(spec, fhat)


def partial_sums(spec: GroupSpec, f) -> np.ndarray:
    """All ``S_k f`` for k = 0..M_N stacked along a new axis before the last."""
    f = spec.check_signal(f)
    fhat = transform_fast(spec, f)
    Psi = vilenkin_matrix(spec)
    terms = fhat[..., :, None] * Psi
    out = np.zeros(f.shape[:-1] + (spec.size + 1, spec.size), dtype=complex)
    np.cumsum(terms, axis=-2, out=out[..., 1:, :])
    return out


def parseval_gap(spec: GroupSpec, f) -> float:
    fhat = transform_fast(spec, f)
    return float(abs(np.sum(abs(fhat) ** 2) - np.mean(abs(np.asarray(f)) ** 2)))
