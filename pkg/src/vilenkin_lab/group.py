"""Finite model of a bounded Vilenkin group.

A :class:`GroupSpec` fixes the radix sequence ``m = (m_0, ..., m_{N-1})`` and
models the group by its level-``N`` truncation ``Z_{m_0} x ... x Z_{m_{N-1}}``.
Points are stored as flat indices ``x = sum_j x_j M_j`` (little endian: the
digit ``x_0`` varies fastest), which is the same layout the fast transform
works on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

DEFAULT_RADIX_CAP = 16


class SpecError(ValueError):
    """Invalid group specification, or objects built on different specs."""


@dataclass(frozen=True)
class GroupSpec:
    m: tuple[int, ...]
    cap: int = field(default=DEFAULT_RADIX_CAP, compare=False)

    def __post_init__(self):
        m = tuple(int(v) for v in self.m)
        object.__setattr__(self, "m", m)
        if len(m) < 1:
            raise SpecError("need at least one level (N >= 1)")
        if any(v < 2 for v in m):
            raise SpecError(f"every m_k must be >= 2, got {m}")
        if max(m) > self.cap:
            raise SpecError(f"max m_k = {max(m)} exceeds the bounded-group cap {self.cap}")

    @classmethod
    def walsh(cls, n: int) -> "GroupSpec":
        return cls((2,) * n)

    @property
    def N(self) -> int:
        return len(self.m)

    @cached_property
    def M(self) -> tuple[int, ...]:
        """Cumulative products ``M_0 = 1, M_{k+1} = m_k M_k`` for k = 0..N."""
        out = [1]
        for v in self.m:
            out.append(out[-1] * v)
        return tuple(out)

    @property
    def size(self) -> int:
        return self.M[-1]

    def truncate(self, level: int) -> "GroupSpec":
        return GroupSpec(self.m[:level], cap=self.cap)

    def extend(self, extra: Sequence[int]) -> "GroupSpec":
        return GroupSpec(self.m + tuple(extra), cap=self.cap)

    def order(self, n: int) -> int:
        """``|n|``: the unique ``s`` with ``M_s <= n < M_{s+1}`` (n >= 1).

        Beyond the truncation the last radix is repeated.
        """
        if n < 1:
            raise ValueError("|n| is defined for n >= 1")
        s, Ms = 0, 1
        while True:
            nxt = Ms * self.m[min(s, self.N - 1)]
            if n < nxt:
                return s
            s, Ms = s + 1, nxt

    def check_signal(self, f) -> np.ndarray:
        f = np.asarray(f)
        if f.shape[-1] != self.size:
            raise SpecError(f"signal length {f.shape[-1]} != M_N = {self.size}")
        return f


@lru_cache(maxsize=64)
def digit_table(spec: GroupSpec) -> np.ndarray:
    """``(M_N, N)`` array whose row ``x`` holds the digits of ``x``."""
    idx = np.arange(spec.size)
    M = np.asarray(spec.M[:-1])
    m = np.asarray(spec.m)
    table = (idx[:, None] // M[None, :]) % m[None, :]
    table.setflags(write=False)
    return table


def index_to_digits(spec: GroupSpec, n: int) -> tuple[int, ...]:
    if not 0 <= n < spec.size:
        raise IndexError(f"index {n} outside [0, {spec.size})")
    out = []
    for mk in spec.m:
        n, d = divmod(n, mk)
        out.append(d)
    return tuple(out)


def digits_to_index(spec: GroupSpec, digits: Sequence[int]) -> int:
    _check_point(spec, digits)
    return int(sum(int(d) * Mk for d, Mk in zip(digits, spec.M)))


def _check_point(spec: GroupSpec, x: Sequence[int]) -> None:
    if len(x) != spec.N:
        raise SpecError(f"point has {len(x)} digits, spec has N = {spec.N}")
    for j, (d, mk) in enumerate(zip(x, spec.m)):
        if not 0 <= d < mk:
            raise SpecError(f"digit x_{j} = {d} not in Z_{mk}")


def group_add(spec: GroupSpec, x: Sequence[int], y: Sequence[int]) -> tuple[int, ...]:
    _check_point(spec, x)
    _check_point(spec, y)
    return tuple((a + b) % mk for a, b, mk in zip(x, y, spec.m))


def group_sub(spec: GroupSpec, x: Sequence[int], y: Sequence[int]) -> tuple[int, ...]:
    _check_point(spec, x)
    _check_point(spec, y)
    return tuple((a - b) % mk for a, b, mk in zip(x, y, spec.m))


def neg_index(spec: GroupSpec) -> np.ndarray:
    """Flat index of ``-x`` for every ``x``."""
    d = (-digit_table(spec)) % np.asarray(spec.m)
    return d @ np.asarray(spec.M[:-1])


def sub_index(spec: GroupSpec, rows: np.ndarray | slice | None = None) -> np.ndarray:
    """Table ``T[x, t]`` = flat index of ``x - t``, for x in ``rows``."""
    D = digit_table(spec)
    Dx = D if rows is None else D[rows]
    diff = (Dx[:, None, :] - D[None, :, :]) % np.asarray(spec.m)
    return diff @ np.asarray(spec.M[:-1])


@dataclass(frozen=True)
class Interval:
    """The cylinder ``I_n(x)``: points agreeing with ``anchor`` on digits 0..n-1."""

    level: int
    anchor: tuple[int, ...] = ()

    def __post_init__(self):
        anchor = tuple(self.anchor) if self.anchor else (0,) * self.level
        object.__setattr__(self, "anchor", anchor)
        if len(anchor) != self.level:
            raise SpecError(f"anchor needs {self.level} digits, got {len(anchor)}")

    def measure(self, spec: GroupSpec) -> float:
        return 1.0 / spec.M[self.level]

    def indicator(self, spec: GroupSpec) -> np.ndarray:
        out = np.zeros(spec.size)
        out[interval_members(spec, self)] = 1.0
        return out


def interval_members(spec: GroupSpec, interval: Interval) -> np.ndarray:
    n = interval.level
    if not 0 <= n <= spec.N:
        raise SpecError(f"interval level {n} outside [0, {spec.N}]")
    for j, d in enumerate(interval.anchor):
        if not 0 <= d < spec.m[j]:
            raise SpecError(f"anchor digit {d} not in Z_{spec.m[j]}")
    base = sum(d * Mk for d, Mk in zip(interval.anchor, spec.M))
    # digits 0..n-1 fixed means x = base (mod M_n)
    return base + spec.M[n] * np.arange(spec.size // spec.M[n])


@dataclass(frozen=True)
class ComplementCell:
    """Cell ``I_N^{k,l}`` of the partition of ``G \\ I_N``.

    For ``l < N``: digits before ``k`` vanish, ``x_k != 0``, digits strictly
    between ``k`` and ``l`` vanish and ``x_l != 0``.  For ``l = N``: ``x_k`` is
    the only nonzero digit among ``x_0..x_{N-1}``.
    """

    k: int
    l: int
    level: int

    def contains(self, digits: Sequence[int]) -> bool:
        first = _nonzero_positions(digits, self.level)
        k = first[0] if first else None
        l = first[1] if len(first) > 1 else self.level
        return k == self.k and l == self.l

    def members(self, spec: GroupSpec) -> np.ndarray:
        k, l = cell_labels(spec, self.level)
        return np.flatnonzero((k == self.k) & (l == self.l))

    def measure(self, spec: GroupSpec) -> float:
        return len(self.members(spec)) / spec.size


def _nonzero_positions(digits: Sequence[int], level: int) -> list[int]:
    out = []
    for j in range(level):
        if digits[j] != 0:
            out.append(j)
            if len(out) == 2:
                break
    return out


def cell_labels(spec: GroupSpec, level: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Per-point ``(k, l)`` labels of the complement cells at ``level``.

    Points of ``I_level`` get ``k = l = -1``.
    """
    level = spec.N if level is None else level
    D = digit_table(spec)[:, :level] != 0
    pos = np.arange(level)
    big = np.where(D, pos, level)
    k = big.min(axis=1) if level else np.full(spec.size, 0)
    after = np.where(D & (pos[None, :] > k[:, None]), pos, level)
    l = after.min(axis=1) if level else np.full(spec.size, 0)
    inside = k == level
    k = np.where(inside, -1, k)
    l = np.where(inside, -1, l)
    return k, l


def complement_partition(spec: GroupSpec, level: int | None = None) -> list[ComplementCell]:
    """All cells ``I_N^{k,l}``, ``0 <= k < l <= N``, with ``N = level``."""
    level = spec.N if level is None else level
    if not 1 <= level <= spec.N:
        raise SpecError(f"partition level {level} outside [1, {spec.N}]")
    return [ComplementCell(k, l, level) for k in range(level) for l in range(k + 1, level + 1)]


def haar_integral(spec: GroupSpec, f) -> complex:
    f = spec.check_signal(f)
    return f.mean(axis=-1)


def parse_spec(obj) -> GroupSpec:
    """Build a spec from config data: ``{"m": [2, 3, 2]}``, ``{"m": [2], "N": 8}``
    or ``{"m": 2, "N": 8}``."""
    if isinstance(obj, GroupSpec):
        return obj
    if isinstance(obj, (list, tuple)):
        return GroupSpec(tuple(obj))
    m = obj["m"]
    cap = obj.get("cap", DEFAULT_RADIX_CAP)
    if isinstance(m, int):
        if "N" not in obj:
            raise SpecError("scalar m needs N")
        return GroupSpec((m,) * int(obj["N"]), cap=cap)
    m = tuple(int(v) for v in m)
    if not m:
        raise SpecError("empty radix list")
    if "N" in obj:
        # a short radix list repeats its last entry
        n = int(obj["N"])
        m = (m + (m[-1],) * max(0, n - len(m)))[:n]
    return GroupSpec(m, cap=cap)


def points(spec: GroupSpec) -> Iterable[tuple[int, ...]]:
    for row in digit_table(spec):
        yield tuple(int(v) for v in row)


def coset_average(spec: GroupSpec, f, level: int) -> np.ndarray:
    """Conditional expectation of ``f`` on the level-``level`` cosets ``I_level(x)``.

    Computed by direct averaging; independent of any transform.
    """
    f = spec.check_signal(f)
    Mn = spec.M[level]
    blocks = f.reshape(f.shape[:-1] + (spec.size // Mn, Mn))
    avg = blocks.mean(axis=-2, keepdims=True)
    return np.broadcast_to(avg, blocks.shape).reshape(f.shape).copy()
