from fractions import Fraction as F
from itertools import product

from hypothesis import given, settings
from hypothesis import strategies as st

from freefield.series import BiGradedTable, QSeries, eta_inverse_square, weber_f2


def two_colored_partitions(n):
    """Brute force: pairs of ordinary partitions with total size n."""
    p = [0] * (n + 1)
    p[0] = 1
    for part in range(1, n + 1):
        for m in range(part, n + 1):
            p[m] += p[m - part]
    return sum(p[a] * p[n - a] for a in range(n + 1))


def distinct_partitions(n):
    count = 0
    for bits in product((0, 1), repeat=n):
        if sum((i + 1) * b for i, b in enumerate(bits)) == n:
            count += 1
    return count


def test_eta_inverse_square_oracle():
    series = eta_inverse_square(12)
    assert [series[m] for m in range(13)] == [two_colored_partitions(m) for m in range(13)]
    assert [series[m] for m in range(6)] == [1, 2, 5, 10, 20, 36]
    assert series.offset == F(-1, 12)


def test_weber_oracle():
    series = weber_f2(12)
    assert [series[m] for m in range(13)] == [distinct_partitions(m) for m in range(13)]
    assert series.offset == F(1, 24)


coeffs = st.lists(st.integers(-9, 9).map(F), min_size=21, max_size=21)


@settings(max_examples=200, derandomize=True, deadline=None)
@given(coeffs, coeffs)
def test_multiplication_is_convolution(a, b):
    got = QSeries(tuple(a), F(1, 3)) * QSeries(tuple(b), F(-1, 2))
    assert got.offset == F(-1, 6)
    for n in range(21):
        assert got[n] == sum(a[i] * b[n - i] for i in range(n + 1))


def test_table_roundtrip():
    t = BiGradedTable(weight_offset=F(-1, 3), charge_offset=F(2, 5), charge_stride=F(1))
    t.add(0, 0)
    t.add(1, -1, 3)
    t.add(1, 2, 5)
    back = BiGradedTable.parse(t.serialize())
    assert back.dims == t.dims
    assert back.weight_offset == F(-1, 3)
    assert back.charge_stride == 1
    assert t.charges(1) == [-1, 2]
