import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_signal
from vilenkin_lab.group import GroupSpec, Interval
from vilenkin_lab.kernels import (
    convolve, dirichlet, dirichlet_factorized, dirichlet_table, dirichlet_tail_kernel,
    dyadic_majorant, fejer_closed_form, fejer_kernel, fejer_table, l1_norm, t_kernel,
    tail_kernel_table,
)
from vilenkin_lab.summability import DegenerateWeightsError, apply_means, MeanFamily, make_weights
from vilenkin_lab.transform import partial_sum, transform_fast, vilenkin_fn


def test_dirichlet_basics(spec):
    assert np.allclose(dirichlet(spec, 0), 0)
    assert np.allclose(dirichlet(spec, 1), 1)
    D = dirichlet_table(spec)
    assert np.allclose(D[:, 0], np.arange(spec.size + 1))
    assert np.allclose(D[spec.size // 2 + 1], dirichlet(spec, spec.size // 2 + 1))


def test_dirichlet_at_powers(spec):
    for n in range(spec.N + 1):
        Mn = spec.M[n]
        assert np.abs(dirichlet(spec, Mn) - Mn * Interval(n).indicator(spec)).max() < 1e-12
        assert np.isclose(l1_norm(spec, dirichlet(spec, Mn)), 1)


def test_dirichlet_product_formula(spec):
    D = dirichlet_table(spec)
    err = max(np.abs(dirichlet_factorized(spec, n) - D[n]).max() for n in range(1, spec.size))
    assert err < 1e-10


def test_fejer_kernel_basics(spec):
    assert np.allclose(fejer_kernel(spec, 1), 1)
    for n in range(1, spec.size + 1):
        K = fejer_kernel(spec, n)
        assert np.isclose(K[0], (n + 1) / 2)
        assert np.isclose(K.mean(), 1)


def test_fejer_closed_form_at_powers(spec):
    K = fejer_table(spec)
    for n in range(spec.N + 1):
        assert np.abs(fejer_closed_form(spec, n) - K[spec.M[n]]).max() < 1e-10
    # the value on I_n is (M_n + 1) / 2, as K_n(0) = (n + 1) / 2 forces
    assert np.isclose(fejer_closed_form(spec, spec.N)[0], (spec.size + 1) / 2)


def test_fejer_l1_small_walsh():
    s = GroupSpec((2, 2, 2))
    K = fejer_kernel(s, 4)
    assert np.allclose(K, [2.5, 0.5, 1, 0, 2.5, 0.5, 1, 0])
    assert l1_norm(s, K) == pytest.approx(1.0)
    assert l1_norm(s, fejer_closed_form(s, 2)) == pytest.approx(1.0)


def test_fejer_l1_bound_walsh():
    s = GroupSpec.walsh(9)
    norms = np.abs(fejer_table(s)[1:513]).mean(axis=1)
    assert norms.max() <= 2.0 + 1e-9
    assert norms.max() == pytest.approx(1.1292269978005867, rel=1e-12)


def test_fejer_majorant_ratio_stable():
    # max n |K_n| / sum_{l <= |n|} M_l |K_{M_l}|, frozen for Walsh N = 6..9
    frozen = {6: 2.823529411764706, 7: 2.909090909090909, 8: 2.953846153846154,
              9: 2.9767441860465116}
    out = {}
    for N in frozen:
        s = GroupSpec.walsh(N)
        K = fejer_table(s)
        maj = [dyadic_majorant(s, j) for j in range(N + 1)]
        worst = 0.0
        for n in range(1, s.size):
            d = maj[s.order(n)]
            num = n * np.abs(K[n])
            z = d < 1e-12
            assert np.all(num[z] < 1e-9)
            worst = max(worst, float((num[~z] / d[~z]).max()))
        out[N] = worst
    for N, v in frozen.items():
        assert out[N] == pytest.approx(v, rel=1e-9)
    vals = list(out.values())
    assert all(abs(b / a - 1) <= 0.10 for a, b in zip(vals, vals[1:]))


def test_t_kernel_fejer_weights(spec):
    w = make_weights("fejer", spec.size + 1)
    for n in range(2, spec.size + 1):
        assert np.allclose(t_kernel(spec, w, n), (n - 1) / n * fejer_kernel(spec, n - 1))


def test_t_kernel_degenerate():
    s = GroupSpec((2, 2))
    with pytest.raises(DegenerateWeightsError):
        t_kernel(s, make_weights("riesz", 5), 1)


def test_tail_kernel(spec):
    w = make_weights("riesz", spec.size + 1)
    n = spec.size
    start = spec.size // 2
    head = sum(w.q[j] * dirichlet(spec, j) for j in range(start)) / w.Q[n]
    tail = dirichlet_tail_kernel(spec, w, n, start)
    assert np.abs(tail - (t_kernel(spec, w, n) - head)).max() < 1e-12
    assert np.allclose(dirichlet_tail_kernel(spec, w, n, 0), t_kernel(spec, w, n))
    one = make_weights("fejer", spec.size + 1)
    assert np.allclose(dirichlet_tail_kernel(spec, one, n, n - 1), dirichlet(spec, n - 1) / n)
    ns = np.arange(start + 1, n + 1)
    T = tail_kernel_table(spec, w, start, ns)
    assert np.allclose(T[-1], tail)


def test_tail_majorant_constant():
    # |tail_n| <= (C / M_start) sum_{l <= |n|} M_l |K_{M_l}|, Riesz weights, Walsh N = 8
    s = GroupSpec.walsh(8)
    w = make_weights("riesz", s.size + 2)
    start = s.M[6]
    maj = [dyadic_majorant(s, j) for j in range(9)]
    ns = np.arange(start + 1, s.size + 1)
    T = tail_kernel_table(s, w, start, ns)
    C = 0.0
    for i, n in enumerate(ns):
        d = maj[s.order(int(n))]
        z = d < 1e-12
        assert np.all(np.abs(T[i])[z] < 1e-9)
        C = max(C, float((np.abs(T[i])[~z] * start / d[~z]).max()))
    assert C == pytest.approx(0.2663780050193898, rel=1e-9)


def test_convolution_identities(spec, rng):
    f, g = random_signal(rng, spec), random_signal(rng, spec)
    fg = convolve(spec, f, g)
    assert np.allclose(fg, convolve(spec, g, f))
    assert np.abs(transform_fast(spec, fg) - transform_fast(spec, f) * transform_fast(spec, g)).max() < 1e-10
    for n in range(spec.N + 1):
        assert np.allclose(convolve(spec, f, dirichlet(spec, spec.M[n])), partial_sum(spec, f, spec.M[n]))


def test_convolution_gives_t_means(rng):
    s = GroupSpec((2,) * 7)
    f = random_signal(rng, s)
    w = make_weights("riesz", 101)
    ns = np.arange(2, 101)
    means = apply_means(s, f, MeanFamily("T", w), ns)
    conv = convolve(s, f, tail_kernel_table(s, w, 0, ns))
    assert np.abs(conv - means).max() < 1e-10


@given(st.integers(0, 2 ** 32 - 1))
def test_l1_norm_properties(seed):
    s = GroupSpec((3, 2, 2))
    rng = np.random.default_rng(seed)
    f = random_signal(rng, s)
    assert l1_norm(s, f) > 0
    assert l1_norm(s, np.zeros(s.size)) == 0
    assert np.isclose(l1_norm(s, vilenkin_fn(s, int(rng.integers(s.size)))), 1)
