import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_signal
from vilenkin_lab.group import GroupSpec, coset_average, digit_table
from vilenkin_lab.transform import (
    inverse_naive, inverse_transform, parseval_gap, partial_sum, partial_sums, rademacher,
    transform_fast, transform_naive, vilenkin_fn, vilenkin_matrix,
)


def test_rademacher_values():
    s = GroupSpec((2, 2, 2))
    assert np.allclose(rademacher(s, 1), [1, 1, -1, -1, 1, 1, -1, -1])
    t = GroupSpec((4, 2))
    assert np.isclose(rademacher(t, 0, 1), 1j)
    assert rademacher(t, 1, (3, 0)) == 1
    r = rademacher(GroupSpec((3, 5)), 1)
    assert np.allclose(np.abs(r), 1) and np.allclose(r ** 5, 1)
    with pytest.raises(IndexError):
        rademacher(s, 3)


def test_walsh_paley_functions():
    s = GroupSpec((2, 2, 2))
    H = vilenkin_matrix(s).real
    # Paley order: psi_n = prod r_k^{n_k}
    r = [rademacher(s, k).real for k in range(3)]
    assert np.allclose(H[5], r[0] * r[2])
    assert np.allclose(H @ H.T, 8 * np.eye(8))
    assert np.allclose(vilenkin_fn(s, 0), 1)


def test_orthonormality_exhaustive():
    for m in [(2, 2, 2, 2), (3, 2, 3), (2, 3, 4), (12, 12)]:
        s = GroupSpec(m)
        Psi = vilenkin_matrix(s)
        assert np.abs(Psi @ Psi.conj().T / s.size - np.eye(s.size)).max() < 1e-12


def test_character_property(spec, rng):
    T = digit_table(spec)
    for _ in range(5):
        n, x, y = rng.integers(spec.size, size=3)
        s = (T[x] + T[y]) % np.array(spec.m)
        xy = int(s @ np.array(spec.M[:-1]))
        psi = vilenkin_fn(spec, int(n))
        assert np.isclose(psi[xy], psi[x] * psi[y])


def test_transform_examples(spec):
    for k in (0, spec.size // 2, spec.size - 1):
        e = np.zeros(spec.size)
        e[k] = 1
        assert np.allclose(transform_naive(spec, vilenkin_fn(spec, k)), e)
    delta = np.zeros(spec.size)
    delta[0] = spec.size
    assert np.allclose(transform_fast(spec, delta), 1)


def test_walsh_hadamard_size8(rng):
    s = GroupSpec((2, 2, 2))
    f = rng.normal(size=8)
    H = np.array([[1]])
    for _ in range(3):
        H = np.block([[H, H], [H, -H]])
    # Sylvester order on little-endian digits is the Paley order
    assert np.allclose(transform_fast(s, f), H @ f / 8)


def test_fast_matches_naive(spec, rng):
    F = random_signal(rng, spec, (6,))
    assert np.abs(transform_fast(spec, F) - transform_naive(spec, F)).max() < 1e-12
    assert np.abs(inverse_transform(spec, F) - inverse_naive(spec, F)).max() < 1e-10


def test_fast_matches_naive_mixed_large(rng):
    s = GroupSpec((2, 3, 4, 5, 3))
    f = random_signal(rng, s)
    assert np.abs(transform_fast(s, f) - transform_naive(s, f)).max() < 1e-12


@given(st.lists(st.integers(2, 6), min_size=1, max_size=4), st.integers(0, 2 ** 32 - 1),
       st.complex_numbers(max_magnitude=10), st.complex_numbers(max_magnitude=10))
def test_linearity_and_round_trip(m, seed, a, b):
    s = GroupSpec(tuple(m))
    rng = np.random.default_rng(seed)
    f, g = random_signal(rng, s), random_signal(rng, s)
    lhs = transform_fast(s, a * f + b * g)
    assert np.abs(lhs - a * transform_fast(s, f) - b * transform_fast(s, g)).max() < 1e-11
    assert np.abs(inverse_transform(s, transform_fast(s, f)) - f).max() < 1e-10
    assert parseval_gap(s, f) < 1e-10


def test_inverse_of_unit():
    s = GroupSpec((3, 2))
    e = np.zeros(6)
    e[0] = 1
    assert np.allclose(inverse_transform(s, e), 1)


def test_partial_sums(spec, rng):
    f = random_signal(rng, spec)
    assert np.allclose(partial_sum(spec, f, 0), 0)
    assert np.allclose(partial_sum(spec, f, 1), f.mean())
    assert np.allclose(partial_sum(spec, f, spec.size), f)
    S = partial_sums(spec, f)
    for n in range(spec.N + 1):
        Mn = spec.M[n]
        assert np.abs(S[Mn] - coset_average(spec, f, n)).max() < 1e-12
    n = spec.size // 3
    assert np.allclose(partial_sum(spec, S[n], n), S[n])
    with pytest.raises(IndexError):
        partial_sum(spec, f, spec.size + 1)
