import numpy as np
import pytest
from hypothesis import given, strategies as st

from vilenkin_lab.group import (
    ComplementCell, GroupSpec, Interval, SpecError, cell_labels, complement_partition,
    coset_average, digit_table, digits_to_index, group_add, group_sub, haar_integral,
    index_to_digits, interval_members, parse_spec,
)
from vilenkin_lab.transform import vilenkin_fn

radices = st.lists(st.integers(2, 5), min_size=1, max_size=4)


def test_cumulative_products():
    s = GroupSpec((2, 3, 2))
    assert s.M == (1, 2, 6, 12)
    assert s.size == 12 and s.N == 3


def test_invalid_specs():
    with pytest.raises(SpecError):
        GroupSpec(())
    with pytest.raises(SpecError):
        GroupSpec((2, 1))
    with pytest.raises(SpecError):
        GroupSpec((2, 17))
    assert GroupSpec((17,), cap=32).size == 17


@pytest.mark.parametrize("m,n,digits", [((2, 3, 2), 7, (1, 0, 1)), ((3, 3), 8, (2, 2)),
                                        ((2, 3, 4), 0, (0, 0, 0))])
def test_index_to_digits(m, n, digits):
    s = GroupSpec(m)
    assert index_to_digits(s, n) == digits
    assert digits_to_index(s, digits) == n


def test_index_out_of_range():
    with pytest.raises(IndexError):
        index_to_digits(GroupSpec((2, 2)), 4)


@given(radices, st.data())
def test_digit_round_trip(m, data):
    s = GroupSpec(tuple(m))
    n = data.draw(st.integers(0, s.size - 1))
    d = index_to_digits(s, n)
    assert all(0 <= dj < mj for dj, mj in zip(d, m))
    assert digits_to_index(s, d) == n
    assert tuple(digit_table(s)[n]) == d


def test_group_add_examples():
    assert group_add(GroupSpec((2, 2)), (1, 0), (1, 1)) == (0, 1)
    assert group_add(GroupSpec((3, 2)), (2, 1), (2, 1)) == (1, 0)
    assert group_sub(GroupSpec((2, 2)), (0, 1), (1, 1)) == (1, 0)
    with pytest.raises(SpecError):
        group_add(GroupSpec((2, 2)), (2, 0), (0, 0))


@given(radices, st.data())
def test_group_axioms(m, data):
    s = GroupSpec(tuple(m))
    pt = st.tuples(*[st.integers(0, v - 1) for v in m])
    x, y, z = data.draw(pt), data.draw(pt), data.draw(pt)
    zero = (0,) * s.N
    assert group_add(s, x, zero) == x
    assert group_add(s, x, y) == group_add(s, y, x)
    assert group_add(s, group_add(s, x, y), z) == group_add(s, x, group_add(s, y, z))
    assert group_add(s, group_sub(s, x, y), y) == x
    assert group_sub(s, x, x) == zero


def test_intervals():
    s = GroupSpec((2, 2))
    assert set(interval_members(s, Interval(0))) == set(range(4))
    pts = {index_to_digits(s, int(i)) for i in interval_members(s, Interval(1, (0,)))}
    assert pts == {(0, 0), (0, 1)}
    assert haar_integral(s, Interval(1).indicator(s)) == 0.5


def test_interval_members_agree_with_anchor(spec):
    D = digit_table(spec)
    for n in range(spec.N + 1):
        anchor = tuple(int(v) for v in D[spec.size - 1, :n])
        idx = interval_members(spec, Interval(n, anchor))
        assert len(idx) == spec.size // spec.M[n]
        assert np.all(D[idx, :n] == anchor)
        assert Interval(n).measure(spec) == 1 / spec.M[n]


def test_partition_small_walsh():
    s = GroupSpec((2, 2))
    cells = complement_partition(s)
    assert [(c.k, c.l) for c in cells] == [(0, 1), (0, 2), (1, 2)]
    assert sum(len(c.members(s)) for c in cells) == 3


def test_partition_covers_complement(spec):
    cells = complement_partition(spec)
    seen = np.zeros(spec.size, dtype=int)
    for c in cells:
        seen[c.members(spec)] += 1
    assert seen[0] == 0  # I_N is the single point 0
    assert np.all(seen[1:] == 1)


def test_partition_last_column_and_membership(spec):
    D = digit_table(spec)
    N = spec.N
    for c in complement_partition(spec):
        for x in c.members(spec):
            assert c.contains(D[x])
        if c.l == N:
            rows = D[c.members(spec)]
            assert np.all(rows[:, c.k] != 0)
            assert np.all(np.delete(rows, c.k, axis=1) == 0)


def test_partition_at_lower_level():
    s = GroupSpec((2,) * 6)
    k, l = cell_labels(s, 4)
    inside = interval_members(s, Interval(4))
    assert np.all(k[inside] == -1)
    assert len(complement_partition(s, 4)) == 4 * 5 // 2
    assert ComplementCell(0, 4, 4).measure(s) == pytest.approx(1 / 16)


def test_haar_integral(spec):
    assert haar_integral(spec, np.ones(spec.size)) == 1
    for n in range(1, spec.size):
        assert abs(haar_integral(spec, vilenkin_fn(spec, n))) < 1e-12


def test_coset_average_is_projection(spec, rng):
    f = rng.normal(size=spec.size)
    for n in range(spec.N + 1):
        a = coset_average(spec, f, n)
        assert np.allclose(coset_average(spec, a, n), a)
        assert np.isclose(a.mean(), f.mean())


def test_parse_spec_forms():
    assert parse_spec({"m": [2, 3, 2]}).m == (2, 3, 2)
    assert parse_spec({"m": 2, "N": 3}).m == (2, 2, 2)
    assert parse_spec({"m": [2, 3], "N": 4}).m == (2, 3, 3, 3)
    assert parse_spec({"m": [2, 3, 4], "N": 2}).m == (2, 3)
    with pytest.raises(SpecError):
        parse_spec({"m": 2})
    with pytest.raises(SpecError):
        parse_spec({"m": []})


def test_order():
    s = GroupSpec((2, 3, 2))
    assert [s.order(n) for n in (1, 2, 5, 6, 11, 12, 24)] == [0, 1, 1, 2, 2, 3, 4]
