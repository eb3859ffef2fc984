import pytest

from picdescent.errors import BoundMismatch, MissingRow, ZeroShift
from picdescent.exactalg import FgAbGroup
from picdescent.picard import (PicVerdict, algebraic_pic, build_pic_e2, check_shift,
                               clutching_order, conclude_pic, load_picard, omega_weight,
                               relative_pic, run_case, run_picard, theorem_e_check)


def verdict(column, free_filtrations=()):
    cols = {s: FgAbGroup.from_orders(o) for s, o in column.items()}
    free = sum(g.free_rank for g in cols.values())
    torsion = 1
    for s, g in cols.items():
        if g.is_finite():
            torsion *= g.order()
    return PicVerdict("test", cols, None if free else torsion, torsion, free,
                      free_filtrations=free_filtrations)


def test_clutching_order():
    assert clutching_order(576, -24) == 24
    assert clutching_order(576, -576) == 1
    assert clutching_order(576, -288) == 2
    with pytest.raises(ZeroShift):
        clutching_order(576, 0)


def test_algebraic_pic():
    assert algebraic_pic(FgAbGroup(), 4).group == FgAbGroup([4])
    assert algebraic_pic(FgAbGroup(), 2).group == FgAbGroup([2])
    assert algebraic_pic(FgAbGroup([5]), 2).order == 10


def test_omega_weight():
    assert [omega_weight(t) for t in (3, 5, 7)] == [1, 2, 3]
    with pytest.raises(ValueError):
        omega_weight(4)


def test_conclude_pic():
    v = verdict({0: [2], 1: [2], 3: [2]})
    assert conclude_pic(v, 8).status == "cyclic-certified"
    assert conclude_pic(v, 4).status == "bound-only"
    with pytest.raises(BoundMismatch):
        conclude_pic(v, 16)
    t = verdict({0: [2], 1: [0], 3: [12]}, free_filtrations=(1,))
    t.torsion_bound = 24
    c = conclude_pic(t, 24, 24)
    assert c.group == FgAbGroup([24, 0])
    assert conclude_pic(t, 24, 12).status == "extension-ambiguous"


def test_ko_run():
    run, v, c = run_case("ko")
    assert v.bound == 8
    assert v.survivors() == {0: 2, 1: 2, 3: 2}
    assert c.group == FgAbGroup([8])
    rel = relative_pic(v, c)
    assert rel.group == FgAbGroup([4])
    assert theorem_e_check(rel, 2)


def test_ko_rows():
    run = run_picard(load_picard("ko"))
    for s in range(5):
        assert run.e2.group(s, 1) == FgAbGroup([2])
    assert run.e2.group(0, 0) == FgAbGroup([2])
    assert check_shift(run.e2, run.ring_page)


def test_tmf2_relative():
    _, v, c = run_case("tmf2")
    assert v.survivors() == {0: 4, 1: 6, 5: 3}
    rel = relative_pic(v, c)
    assert rel.order == 18
    assert theorem_e_check(rel, 6)


def test_tmf3_bound():
    _, v, c = run_case("tmf3")
    assert v.bound == 192
    assert c.group == FgAbGroup([192])


def test_relative_trivial():
    rel = relative_pic(verdict({0: [2]}))
    assert rel.order == 1 and rel.group is None


def test_missing_row():
    inp = load_picard("ko")
    inp.row0 = None
    with pytest.raises(MissingRow):
        build_pic_e2(inp)
