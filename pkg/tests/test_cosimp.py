import pytest

from picdescent.cosimp import (assembly_65, constant_cosimplicial, cycle_rank,
                               cycles_cosimplicial, moore_cohomology, priddy_dims, square_class,
                               sym2, unnormalized_cohomology, zero_cosimplicial)
from picdescent.errors import TruncationTooSmall, WindowExceedsTruncation
from picdescent.exactalg import FgAbGroup, IntMatrix, matrix_rank


def boundary_kernel_rank(n, d):
    """Oracle: rank of the kernel of the boundary on reduced d-chains of Delta^n."""
    from itertools import combinations
    src = list(combinations(range(n + 1), d + 1))
    tgt = {f: i for i, f in enumerate(combinations(range(n + 1), d))}
    rows = [[0] * len(src) for _ in tgt]
    for j, face in enumerate(src):
        for k in range(len(face)):
            rows[tgt[face[:k] + face[k + 1:]]][j] += (-1) ** k
    if not src:
        return 0
    return len(src) - matrix_rank(IntMatrix(rows, len(tgt), len(src)))


def test_level_ranks():
    a = cycles_cosimplicial(2, 2)
    assert [a.rank(n) for n in range(6)] == [0, 0, 0, 1, 4, 10]
    for n in range(7):
        assert cycle_rank(n, 2) == boundary_kernel_rank(n, 2)


def test_cosimplicial_identities():
    cycles_cosimplicial(2, 2).check_identities(5)
    cycles_cosimplicial(2, 5, 8).check_identities(6)


def test_moore_cohomology_of_models():
    groups = moore_cohomology(cycles_cosimplicial(2, 2), 7)
    assert [s for s, g in enumerate(groups) if not g.is_trivial()] == [3]
    assert groups[3] == FgAbGroup([0])
    groups = moore_cohomology(cycles_cosimplicial(2, 5, 9), 8)
    assert [s for s, g in enumerate(groups) if not g.is_trivial()] == [6]


def test_moore_equals_unnormalized():
    a = cycles_cosimplicial(2, 2, 6)
    assert moore_cohomology(a, 4) == unnormalized_cohomology(a, 4)


def test_constant_and_zero():
    assert moore_cohomology(constant_cosimplicial(1, 5), 4) == \
        [FgAbGroup([0])] + [FgAbGroup()] * 4
    assert all(g.is_trivial() for g in moore_cohomology(zero_cosimplicial(5), 4))


def test_sym2_of_constant_is_constant():
    s = sym2(constant_cosimplicial(1, 5))
    assert [s.rank(n) for n in range(5)] == [1] * 5
    assert moore_cohomology(s, 3) == moore_cohomology(constant_cosimplicial(1, 5), 3)


def test_square_class_and_assembly():
    h, coords = square_class(2)
    assert h == FgAbGroup([2]) and coords[0] % 2 == 1
    assert assembly_65(2) == FgAbGroup([2, 0])


def test_priddy_dims():
    assert priddy_dims(cycles_cosimplicial(2, 2), 2, 7) == [0, 0, 0, 1, 1, 1, 1, 0]
    assert priddy_dims(zero_cosimplicial(9), 2, 8) == [0] * 9


def test_errors():
    with pytest.raises(TruncationTooSmall):
        cycles_cosimplicial(2, 5, 6)
    with pytest.raises(WindowExceedsTruncation):
        moore_cohomology(constant_cosimplicial(1, 4), 4)
