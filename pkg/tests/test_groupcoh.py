import pytest

from picdescent.datasets import load_group, load_module
from picdescent.errors import BudgetExceeded, NotNormal, NotPrime
from picdescent.exactalg import FgAbGroup, IntMatrix
from picdescent.groupcoh import (bar_h, cyclic_h, cyclic_h_module, h1_crossed, invariants,
                                 lhs_assemble, modp_bar_dims, trivial_module)


def grp(*orders):
    return FgAbGroup.from_orders(orders)


def test_invariants():
    assert invariants(load_module("units2")) == grp(2, 0)
    assert invariants(load_module("sign_c2")).is_trivial()
    g = load_group("gl2z2")
    assert invariants(trivial_module(g, [4, 0])) == grp(4, 0)


def test_h1_crossed():
    assert h1_crossed(load_module("units3")) == grp(12)
    assert h1_crossed(load_module("units2")) == grp(6)
    assert h1_crossed(load_module("sign_c2")) == grp(2)


def test_h1_killed_by_group_order():
    for name in ("units2", "units3", "z4_gl2z2", "sign_c2", "z_c2"):
        mod = load_module(name)
        h = h1_crossed(mod)
        assert h.is_finite() and mod.group.order % h.exponent() == 0


def test_cyclic_h():
    assert cyclic_h(IntMatrix([[1]]), 2, 2, [0]) == grp(2)
    assert cyclic_h(IntMatrix([[-1]]), 2, 1, [0]) == grp(2)
    assert cyclic_h(IntMatrix([[-1]]), 2, 0, [0]).is_trivial()
    mod = load_module("units2")
    g = mod.group
    sigma = g.gens[g.gen_index("sigma")]
    assert cyclic_h_module(mod, sigma, 1) == grp(3)


def test_bar_h_matches_cyclic():
    mod = load_module("z_c2")
    assert bar_h(mod.group, mod, 2) == [grp(0), grp(), grp(2)]
    for s in range(3):
        assert bar_h(mod.group, mod, 2)[s] == cyclic_h_module(mod, mod.group.gens[0], s)


def test_bar_h_lemma_pattern():
    mod = load_module("z4_gl2z2")
    assert bar_h(mod.group, mod, 3) == [grp(4), grp(2), grp(2), grp(2)]


def test_bar_h_gl2z3_degree_one():
    mod = load_module("z2_gl2z3")
    assert bar_h(mod.group, mod, 1)[1] == grp(2)


def test_bar_h_budget():
    mod = load_module("z2_gl2z3")
    with pytest.raises(BudgetExceeded):
        bar_h(mod.group, mod, 3, budget=1000)


def test_modp_dims():
    assert modp_bar_dims(load_group("gl2z2"), 3, 2) == [1, 0, 0]
    assert modp_bar_dims(load_group("gl2z3"), 5, 0) == [1]
    assert modp_bar_dims(load_group("gl2z2"), 2, 3, method="resolution") == \
        modp_bar_dims(load_group("gl2z2"), 2, 3, method="bar")
    with pytest.raises(NotPrime):
        modp_bar_dims(load_group("gl2z2"), 6, 1)


def test_lhs_units_table():
    res = lhs_assemble(load_module("units2"), "sigma", 8)
    assert res.collapse
    assert [res.assembled[s] for s in range(5)] == \
        [grp(2, 0), grp(2, 3), grp(2, 2), grp(2), grp(2, 2, 3)]
    assert res.decorations[1] == "trivial" and res.decorations[2] == "sgn"


def test_lhs_agrees_with_bar():
    mod = load_module("z4_gl2z2")
    res = lhs_assemble(mod, "sigma", 3)
    assert [res.assembled[s] for s in range(4)] == bar_h(mod.group, mod, 3)


def test_lhs_trivial_normal_subgroup():
    mod = load_module("z4_gl2z2")
    res = lhs_assemble(mod, [0], 2)
    assert res.normal_order == 1
    assert [res.e2[(p, 0)] for p in range(3)] == bar_h(mod.group, mod, 2)


def test_lhs_not_normal():
    with pytest.raises(NotNormal):
        lhs_assemble(load_module("z4_gl2z2"), "tau", 2)
