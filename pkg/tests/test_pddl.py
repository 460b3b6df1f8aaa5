import logging
from fractions import Fraction

import pytest

from symplan import generators, pddl
from symplan.model import BoolCond, LinearExpr, NumCond, NumEffect, Or
from symplan.sexpr import SExprError, parse_all, parse_one

x_l, x_r, q_l, q = (LinearExpr.var(v) for v in ("x_l", "x_r", "q_l", "q"))

MINI = """(define (domain mini)
  (:requirements :typing :fluents)
  (:types robot place - object)
  (:predicates (at ?r - robot ?p - place) (road ?a ?b - place))
  (:functions (fuel ?r - robot) (cost ?a ?b - place))
  (:action drive
    :parameters (?r - robot ?a ?b - place)
    :precondition (and (at ?r ?a) (road ?a ?b) (>= (fuel ?r) (cost ?a ?b)))
    :effect (and (not (at ?r ?a)) (at ?r ?b) (decrease (fuel ?r) (cost ?a ?b)))))
"""

MINI_PROBLEM = """(define (problem mini-1) (:domain mini)
  (:objects r1 - robot a b c - place)
  (:init (at r1 a) (road a b) (road b c) (= (fuel r1) 5) (= (cost a b) 2) (= (cost b c) 4))
  (:goal (at r1 c))
  (:metric minimize (total-time)))
"""


def test_sexpr_positions_and_quoting():
    e = parse_one('(a |b c| "d ""e""" ; note\n (f))')
    assert e == ["a", "b c", 'd "e"', ["f"]]
    assert (e[3].line, e[3].col) == (2, 2)
    with pytest.raises(SExprError) as ei:
        parse_all("(a\n (b)")
    assert ei.value.line == 1
    with pytest.raises(SExprError):
        parse_all("a)")


def test_two_robots_grounding():
    p = pddl.load(*generators.two_robots(1, 1))
    assert [a.name for a in p.actions] == ["lft_r", "rgt_r", "lft_l", "rgt_l", "conn", "disc", "exch", "lre", "rle"]
    assert p.bool_vars == ("p",)
    assert dict(p.init) == {"p": False, "x_l": -1, "x_r": 1, "q_l": 1, "q_r": 0, "q": 1}
    exch = p.action("exch")
    assert set(exch.pre) == {BoolCond("p", True), NumCond(q_l - q, ">="), NumCond(LinearExpr.var("q_r") + q, ">=")}
    assert set(exch.eff) == {NumEffect("q_l", q_l - q), NumEffect("q_r", LinearExpr.var("q_r") + q)}
    assert p.action("rgt_l").pre == (NumCond(-x_l, ">"),)
    assert p.action("conn").pre == (NumCond(x_l - x_r, "="),)
    assert len(p.goals) == 4


def test_static_folding_and_pruning(caplog):
    with caplog.at_level(logging.WARNING):
        p = pddl.load(MINI, MINI_PROBLEM)
    assert "metric" in caplog.text
    names = [a.name for a in p.actions]
    # only instances along existing roads survive; costs become constants
    assert names == ["drive r1 a b", "drive r1 b c"]
    d = p.action("drive r1 b c")
    assert NumCond(LinearExpr.var("fuel(r1)") - 4, ">=") in d.pre
    assert "road(a,b)" not in p.variables
    assert p.num_vars == ("fuel(r1)",)


def test_print_parse_roundtrip():
    for text in (generators.TWO_ROBOTS_DOMAIN, generators.LINE_EXCHANGE_DOMAIN, MINI):
        d = pddl.parse_domain(text)
        assert pddl.parse_domain(pddl.print_domain(d)) == d


def test_syntax_error_position():
    bad = "(define (domain d)\n  (:predicates (p)\n"
    with pytest.raises(pddl.PddlSyntaxError) as ei:
        pddl.parse_domain(bad)
    assert ei.value.line == 2


@pytest.mark.parametrize("snippet, exc", [
    ("(:requirements :durative-actions)", pddl.UnsupportedFeature),
    ("(:action a :parameters () :precondition (or (p) (p)) :effect (p))", pddl.UnsupportedFeature),
    ("(:action a :parameters () :effect (increase (f) (* (f) (f))))", pddl.NonLinearExpression),
])
def test_rejections(snippet, exc):
    text = f"(define (domain d) (:requirements :fluents) (:predicates (p)) (:functions (f)) {snippet})"
    with pytest.raises(exc):
        pddl.load(text, "(define (problem q) (:domain d) (:init (= (f) 1)) (:goal (p)))")


def test_grounding_errors():
    d = "(define (domain d) (:requirements :fluents) (:functions (f) (g)) " \
        "(:action a :parameters () :effect (increase (f) 1)))"
    with pytest.raises(pddl.GroundingError):
        pddl.load(d, "(define (problem q) (:domain d) (:init) (:goal (> (f) 1)))")
    with pytest.raises(pddl.UntypedObject):
        pddl.load(MINI, MINI_PROBLEM.replace("r1 - robot", "r1 - truck"))


def test_disjunctive_goal():
    d = "(define (domain d) (:requirements :fluents :disjunctive-preconditions) (:predicates (p) (r)) " \
        "(:action a :parameters () :effect (p)))"
    goal = "(define (problem q) (:domain d) (:init) (:goal (or (p) (r))))"
    # r is never true and never added, so the disjunct folds away
    assert pddl.load(d, goal).goals == (BoolCond("p", True),)
    d2 = d[:-1] + " (:action b :parameters () :effect (r)))"
    assert pddl.load(d2, goal).goals == (Or((BoolCond("p", True), BoolCond("r", True))),)


def test_native_json_roundtrip():
    p = pddl.load(*generators.line_exchange(2, 1, 3))
    again = pddl.loads_native(pddl.dumps_native(p))
    assert again == p
    p2 = pddl.load(MINI, MINI_PROBLEM)
    assert pddl.loads_native(pddl.dumps_native(p2)) == p2


def test_fractional_init():
    d = "(define (domain d) (:requirements :fluents) (:functions (f)) " \
        "(:action a :parameters () :effect (increase (f) 0.5)))"
    p = pddl.load(d, "(define (problem q) (:domain d) (:init (= (f) 1/3)) (:goal (> (f) 1)))")
    assert p.init["f"] == Fraction(1, 3)
    assert p.actions[0].eff == (NumEffect("f", LinearExpr.var("f") + Fraction(1, 2)),)
