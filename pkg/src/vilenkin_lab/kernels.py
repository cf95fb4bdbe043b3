"""Dirichlet, Fejer and T kernels, group convolution and L1 norms.

Kernels are built as literal sums of Vilenkin functions (not through the
spectral multipliers used for means), so the identity ``T_n f = f * F_n``
compares two independent routes.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .group import GroupSpec, SpecError, digit_table, interval_members, Interval, sub_index
from .summability import DegenerateWeightsError, WeightSeq
from .transform import _character_rows, rademacher, vilenkin_fn

_CONV_CHUNK = 128


def _check_kernel_index(spec: GroupSpec, n: int, lo: int = 0) -> None:
    if not lo <= n <= spec.size:
        raise IndexError(f"kernel index {n} outside [{lo}, {spec.size}]")


def dirichlet(spec: GroupSpec, n: int) -> np.ndarray:
    """``D_n = psi_0 + ... + psi_{n-1}``."""
    _check_kernel_index(spec, n)
    out = np.zeros(spec.size, dtype=complex)
    for start in range(0, n, 256):
        out += _character_rows(spec, np.arange(start, min(start + 256, n))).sum(axis=0)
    return out


@lru_cache(maxsize=8)
def dirichlet_table(spec: GroupSpec) -> np.ndarray:
    """Rows ``D_0 .. D_{M_N}``; shape ``(M_N + 1, M_N)``."""
    out = np.zeros((spec.size + 1, spec.size), dtype=complex)
    for start in range(0, spec.size, 256):
        ns = np.arange(start, min(start + 256, spec.size))
        rows = np.cumsum(_character_rows(spec, ns), axis=0)
        out[ns + 1] = rows + out[start]
    out.setflags(write=False)
    return out


@lru_cache(maxsize=8)
def fejer_table(spec: GroupSpec) -> np.ndarray:
    """Rows ``K_0 .. K_{M_N}`` (row 0 is zero by convention)."""
    D = dirichlet_table(spec)
    cum = np.cumsum(D[1:], axis=0)
    out = np.zeros_like(D)
    out[1:] = cum / np.arange(1, spec.size + 1)[:, None]
    out.setflags(write=False)
    return out


def fejer_kernel(spec: GroupSpec, n: int) -> np.ndarray:
    """``K_n = (D_1 + ... + D_n) / n``."""
    _check_kernel_index(spec, n, lo=1)
    return fejer_table(spec)[n].copy() if spec.size <= 1024 else _fejer_direct(spec, n)


def _fejer_direct(spec: GroupSpec, n: int) -> np.ndarray:
    # n K_n = sum_{k<n} (n - k) psi_k
    out = np.zeros(spec.size, dtype=complex)
    for start in range(0, n, 256):
        ks = np.arange(start, min(start + 256, n))
        out += (n - ks) @ _character_rows(spec, ks)
    return out / n


def t_kernel(spec: GroupSpec, w: WeightSeq, n: int) -> np.ndarray:
    """``F_n = (1/Q_n) sum_{k=0}^{n-1} q_k D_k``.

    ``D_0 = 0`` so the k = 0 term is void; with this range ``T_n f = f * F_n``.
    """
    return dirichlet_tail_kernel(spec, w, n, 0)


def dirichlet_tail_kernel(spec: GroupSpec, w: WeightSeq, n: int, start: int) -> np.ndarray:
    """``(1/Q_n) sum_{j=start}^{n-1} q_j D_j``."""
    if n < 1:
        raise IndexError("T kernel needs n >= 1")
    _check_kernel_index(spec, n - 1)
    if not 0 <= start < n:
        raise IndexError(f"tail start {start} must lie in [0, {n})")
    if n > w.size:
        raise IndexError(f"{w.name}: weights cover n <= {w.size}")
    if w.Q[n] <= 0:
        raise DegenerateWeightsError(f"{w.name}: Q_{n} = 0")
    D = dirichlet_table(spec) if spec.size <= 1024 else None
    if D is not None:
        total = w.q[start:n] @ D[start:n]
    else:
        total = sum(w.q[j] * dirichlet(spec, j) for j in range(start, n))
    return total / w.Q[n]


def tail_kernel_table(spec: GroupSpec, w: WeightSeq, start: int, ns) -> np.ndarray:
    """Rows ``(1/Q_n) sum_{j=start}^{n-1} q_j D_j`` for each n in ``ns``."""
    D = dirichlet_table(spec)
    C = np.zeros((spec.size + 2, spec.size), dtype=complex)
    upto = min(w.size, spec.size + 1)
    np.cumsum(w.q[:upto, None] * D[:upto], axis=0, out=C[1:upto + 1])
    ns = np.asarray(ns, dtype=int)
    if np.any(ns - 1 > spec.size) or np.any(ns <= start):
        raise IndexError("tail kernel indices out of range")
    return (C[ns] - C[start]) / w.Q[ns][:, None]


def dirichlet_factorized(spec: GroupSpec, n: int) -> np.ndarray:
    """Right-hand side of the product formula for ``D_n``::

        psi_n * sum_j D_{M_j} * sum_{k = m_j - n_j}^{m_j - 1} r_j^k
    """
    if not 0 <= n < spec.size:
        raise IndexError(f"index {n} outside [0, {spec.size})")
    digits = digit_table(spec)[n]
    acc = np.zeros(spec.size, dtype=complex)
    for j, mj in enumerate(spec.m):
        nj = int(digits[j])
        if nj == 0:
            continue
        r = rademacher(spec, j)
        inner = sum(r ** k for k in range(mj - nj, mj))
        acc += dirichlet(spec, spec.M[j]) * inner
    return vilenkin_fn(spec, n) * acc


def fejer_closed_form(spec: GroupSpec, n: int) -> np.ndarray:
    """Closed form of ``K_{M_n}`` at every point.

    * ``M_t / (1 - r_t(x))`` when ``x in I_t minus I_{t+1}`` and ``x - x_t e_t in I_n`` (t < n)
    * ``(M_n + 1) / 2`` on ``I_n``
    * 0 otherwise
    """
    if not 0 <= n <= spec.N:
        raise IndexError(f"level {n} outside [0, {spec.N}]")
    D = digit_table(spec)
    out = np.zeros(spec.size, dtype=complex)
    out[interval_members(spec, Interval(n))] = (spec.M[n] + 1) / 2
    if n == 0:
        return out
    nz = D[:, :n] != 0
    count = nz.sum(axis=1)
    t = np.argmax(nz, axis=1)
    hit = np.flatnonzero(count == 1)
    for x in hit:
        tx = int(t[x])
        r = complex(rademacher(spec, tx, int(x)))
        out[x] = spec.M[tx] / (1 - r)
    return out


def convolve(spec: GroupSpec, f, g) -> np.ndarray:
    """``(f * g)(x) = mean_t f(t) g(x - t)``, by direct summation."""
    f = np.asarray(spec.check_signal(f))
    g = np.asarray(spec.check_signal(g))
    if f.shape != g.shape and f.ndim > 1 and g.ndim > 1:
        raise SpecError("batch shapes differ")
    out = np.empty(np.broadcast_shapes(f.shape, g.shape), dtype=complex)
    for start in range(0, spec.size, _CONV_CHUNK):
        rows = np.arange(start, min(start + _CONV_CHUNK, spec.size))
        T = sub_index(spec, rows)  # (rows, t) -> x - t
        out[..., rows] = np.einsum("...t,...rt->...r", f, g[..., T]) / spec.size
    return out


def l1_norm(spec: GroupSpec, f) -> float:
    f = spec.check_signal(f)
    return np.abs(f).mean(axis=-1)


def dyadic_majorant(spec: GroupSpec, s: int) -> np.ndarray:
    """``sum_{l=0}^{s} M_l |K_{M_l}|`` pointwise."""
    out = np.zeros(spec.size)
    for l in range(s + 1):
        out += spec.M[l] * np.abs(fejer_kernel(spec, spec.M[l]))
    return out
