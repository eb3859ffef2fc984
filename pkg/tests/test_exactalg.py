import pytest
from hypothesis import given, settings, strategies as st

from picdescent.errors import DimensionMismatch, NotAComplex, NotPrime
from picdescent.exactalg import (CochainComplex, FgAbGroup, IntMatrix, cohomology_at,
                                 invariant_factors, modp_rank, snf)
from picdescent.verify import determinantal_divisors, snf_agrees


def diag(m):
    return [m.data[i][i] for i in range(min(m.rows, m.cols))]


def test_snf_identity():
    d, u, v = snf(IntMatrix.identity(3))
    assert d == IntMatrix.identity(3)
    assert u == IntMatrix.identity(3)
    assert v == IntMatrix.identity(3)


def test_snf_coprime_diagonal():
    m = IntMatrix([[2, 0], [0, 3]])
    d, u, v = snf(m)
    assert diag(d) == [1, 6]
    assert u @ m @ v == d


def test_snf_small():
    m = IntMatrix([[2, 4], [6, 8]])
    d, u, v = snf(m)
    assert diag(d) == [2, 4]
    assert u @ m @ v == d
    assert determinantal_divisors(m.data) == [2, 8]


def test_snf_inverses():
    m = IntMatrix([[4, 6, 2], [2, 0, 8]])
    d, u, v, ui, vi = snf(m, inverses=True)
    assert u @ ui == IntMatrix.identity(2)
    assert v @ vi == IntMatrix.identity(3)


def test_invariant_factors_rectangular():
    assert invariant_factors(IntMatrix([[0, 0, 0], [0, 0, 0]])) == []
    assert snf_agrees([[0, 5, 10], [15, 20, 0]])


def test_cohomology_at_examples():
    assert cohomology_at(IntMatrix([[2]]), IntMatrix.zeros(0, 1)) == FgAbGroup([2])
    assert cohomology_at(IntMatrix.identity(2), IntMatrix.zeros(0, 2)).is_trivial()


def test_cohomology_at_errors():
    with pytest.raises(DimensionMismatch):
        cohomology_at(IntMatrix([[1, 0]]), IntMatrix([[1, 1]]))
    with pytest.raises(NotAComplex):
        cohomology_at(IntMatrix([[1]]), IntMatrix([[1]]))


def test_moore_complex_of_constant_z():
    # alternating sum of the two cofaces Z -> Z is zero, the next one is 1
    cx = CochainComplex([1, 1, 1], [IntMatrix([[0]]), IntMatrix([[1]])])
    assert cx.cohomology(0) == FgAbGroup([0])
    assert cx.cohomology(1).is_trivial()


def test_modp_rank_examples():
    assert modp_rank(IntMatrix.zeros(3, 4), 5) == 0
    assert modp_rank(IntMatrix.identity(4), 7) == 4
    assert modp_rank(IntMatrix([[2, 1], [0, 2]]), 2) == 1
    with pytest.raises(NotPrime):
        modp_rank(IntMatrix.identity(2), 4)


def test_fg_ab_group():
    g = FgAbGroup.from_orders([4, 6, 0])
    assert g.invariant_factors == (2, 12, 0)
    assert str(FgAbGroup([2, 12])) == "Z/2 + Z/12"
    assert g.free_rank == 1 and not g.is_finite()
    assert FgAbGroup([2, 12]).order() == 24
    assert FgAbGroup([2, 12]).primary_part(3) == FgAbGroup([3])
    assert FgAbGroup.trivial().is_trivial()
    with pytest.raises(ValueError):
        FgAbGroup([6, 2])


matrices = st.integers(1, 5).flatmap(lambda r: st.integers(1, 5).flatmap(
    lambda c: st.lists(st.lists(st.integers(-50, 50), min_size=c, max_size=c),
                       min_size=r, max_size=r)))


@settings(max_examples=150, deadline=None)
@given(matrices)
def test_snf_matches_determinantal_divisors(rows):
    assert snf_agrees(rows)
