import math
from fractions import Fraction

from conftest import EXAMPLE_PATTERN, two_robots
from symplan.analysis import (BooleanAssignment, Interval, LinearIncrement, Pattern, SelfInterfering,
                              SimpleAssignment, arpg_layers, arpg_partition, arpg_pattern, classify_effect,
                              eligible_for_rolling, expr_interval, mutex_pairs)
from symplan.model import (Action, BoolCond, BoolEffect, LinearExpr, NumCond, NumEffect, Problem, State, increase)

x, q = LinearExpr.var("x"), LinearExpr.var("q")


def _cls(p, name, var):
    a = p.action(name)
    return classify_effect(a, a.effect_on(var))


def test_effect_taxonomy(tr11):
    assert _cls(tr11, "conn", "p") == BooleanAssignment(True)
    assert _cls(tr11, "disc", "p") == BooleanAssignment(False)
    assert _cls(tr11, "exch", "q_l") == LinearIncrement(-q)
    assert _cls(tr11, "lre", "q") == SimpleAssignment(LinearExpr.const(1))
    double = Action("dbl", (), (NumEffect("x", x * 2),))
    assert classify_effect(double, double.eff[0]) == SelfInterfering(x * 2)


def test_increment_reading_other_assigned_var():
    # x += y while y is also assigned: not a linear increment
    y = LinearExpr.var("y")
    a = Action("a", (), (NumEffect("x", x + y), NumEffect("y", LinearExpr.const(0))))
    assert classify_effect(a, a.eff[0]) == SelfInterfering(x + y)
    assert classify_effect(a, a.eff[1]) == SimpleAssignment(LinearExpr.const(0))


def test_eligibility(tr11):
    eligible = {a.name for a in tr11.actions if eligible_for_rolling(a)}
    # the non-eligible ones are exactly those given amo axioms in the worked example
    assert set(a.name for a in tr11.actions) - eligible == {"lre", "rle", "conn", "disc"}
    flip = Action("flip", (BoolCond("p", False),), (BoolEffect("p", True), increase("x", 1)))
    assert not eligible_for_rolling(flip)
    keep = Action("keep", (BoolCond("p", True),), (BoolEffect("p", True), increase("x", 1)))
    assert eligible_for_rolling(keep)


def test_mutex_pairs(tr11):
    m = mutex_pairs(tr11)
    assert frozenset({"rgt_r", "conn"}) in m
    assert frozenset({"lre", "exch"}) in m
    assert frozenset({"lft_r", "rgt_l"}) not in m
    # worked out by hand from the two interference conditions
    expected = {("conn", "lft_l"), ("conn", "lft_r"), ("conn", "rgt_l"), ("conn", "rgt_r"), ("disc", "exch"),
                ("exch", "lre"), ("exch", "rle"), ("lft_l", "rgt_l"), ("lft_r", "rgt_r"), ("lre", "rle")}
    assert m == {frozenset(e) for e in expected}
    one = Problem((), ("x",), (Action("a", (), (increase("x", 1),)),), State({"x": Fraction(0)}))
    assert mutex_pairs(one) == set()


def test_interval_arith():
    iv = expr_interval(x * -2 + 1, {"x": Interval(Fraction(0), math.inf)})
    assert iv == Interval(-math.inf, Fraction(1))
    assert Interval.point(3).hull(Interval.point(-1)) == Interval(Fraction(-1), Fraction(3))


def test_arpg_two_robots():
    blocks, rest = arpg_partition(two_robots(1, 1))
    assert [set(b) for b in blocks] == [{"lft_r", "rgt_r", "lft_l", "rgt_l", "lre", "rle"}, {"conn"},
                                        {"exch", "disc"}]
    assert rest == []
    layers = arpg_layers(two_robots(2, 3))
    acts = [a for _, a in layers]
    assert all(a <= b for a, b in zip(acts, acts[1:]))
    assert acts[-1] == frozenset(a.name for a in two_robots().actions)


def test_arpg_single_layer_and_unreachable():
    inc = Action("inc", (NumCond(x + 1, ">="),), (increase("x", 1),))
    p = Problem((), ("x",), (inc,), State({"x": Fraction(0)}))
    blocks, rest = arpg_partition(p)
    assert blocks == [["inc"]] and rest == []
    stuck = Action("stuck", (NumCond(x, ">"),), (increase("y", 1),))
    p = Problem((), ("x", "y"), (stuck,), State({"x": Fraction(0), "y": Fraction(0)}))
    blocks, rest = arpg_partition(p)
    assert blocks == [] and rest == ["stuck"]
    assert arpg_pattern(p, 0).occurrences == ("stuck",)


def test_arpg_general_assignment_terminates():
    # x := x * 2 keeps growing; widening must stop it
    dbl = Action("dbl", (), (NumEffect("x", x * 2),))
    p = Problem((), ("x",), (dbl,), State({"x": Fraction(1)}))
    layers = arpg_layers(p)
    assert layers[-1][0].num_map["x"].hi == math.inf
    assert len(layers) < 6


def test_arpg_pattern_is_layered_and_seeded():
    p = two_robots(1, 1)
    seen = set()
    for seed in range(20):
        pat = arpg_pattern(p, seed)
        assert pat.is_simple() and pat.is_complete(p)
        assert set(pat.occurrences[:6]) == {"lft_r", "rgt_r", "lft_l", "rgt_l", "lre", "rle"}
        assert pat.occurrences[6] == "conn"
        seen.add(pat.occurrences[7:])
        assert arpg_pattern(p, seed) == pat
    assert seen == {("exch", "disc"), ("disc", "exch")}


def test_pattern_text():
    pat = Pattern(EXAMPLE_PATTERN)
    assert Pattern.from_text(pat.to_text()) == pat
    assert Pattern.from_text("(move r1 r2)\n; c\nconn\n") == Pattern(("move r1 r2", "conn"))
    assert not (pat + "lre").is_simple()
