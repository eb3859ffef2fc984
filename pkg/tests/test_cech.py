import pytest

from picdescent.cech import (GradedCechProblem, cech_graded, degree_cokernel_oracle,
                             expected_ranks, middle_vanishing)
from picdescent.errors import WindowUnbounded
from picdescent.exactalg import FgAbGroup


def test_plane_minus_origin():
    res = cech_graded(GradedCechProblem((1, 1), (-2, 0)))
    assert res[-2].groups[1] == FgAbGroup([0])
    assert res[-2].groups[0].is_trivial()
    assert res[0].groups == [FgAbGroup([0]), FgAbGroup()]
    assert res[-1].groups == [FgAbGroup(), FgAbGroup()]


def test_oracle_agreement():
    for d in range(-6, 3):
        res = cech_graded(GradedCechProblem((1, 1), (d, d)))
        assert res[d].groups[1] == degree_cokernel_oracle(d)


def test_three_variables():
    res = cech_graded(GradedCechProblem((1, 1, 1), (-6, 2)))
    assert middle_vanishing(res, 3)
    for d, r in res.items():
        assert (r.groups[0].free_rank, r.groups[2].free_rank) == expected_ranks((1, 1, 1), d)
        if d >= 0:
            assert r.groups[2].is_trivial()
    assert res[-3].groups[2] == FgAbGroup([0])
    assert res[-4].groups[2] == FgAbGroup([0, 0, 0])


def test_weighted():
    res = cech_graded(GradedCechProblem((1, 2), (-5, 2)))
    assert res[-3].groups[1] == FgAbGroup([0])
    assert res[-4].groups[1] == FgAbGroup([0])
    assert res[-2].groups[1].is_trivial()


def test_unbounded_window():
    with pytest.raises(WindowUnbounded):
        cech_graded(GradedCechProblem((1, 0), (-2, 0)))
