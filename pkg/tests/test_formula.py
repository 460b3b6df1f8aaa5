from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from symplan import formula as F
from symplan.formula import FormulaError, Model, SolverProtocolError, Sort, Unknown, Unsat, Var, VarDecl, VarOrigin

x, y = Var("x", Sort.REAL), Var("y", Sort.REAL)
a = Var("a", Sort.INT)
p = Var("p", Sort.BOOL)
DECLS = [VarDecl("x", Sort.REAL), VarDecl("a", Sort.INT), VarDecl("p", Sort.BOOL)]


def test_builders_simplify():
    assert F.add(x, F.num(1), F.scale(-1, x)) == F.num(1)
    assert F.implies(F.TRUE, p) == p
    assert F.implies(F.FALSE, p) == F.TRUE
    assert F.and_(p, F.TRUE) == p
    assert F.or_(p, F.TRUE) == F.TRUE
    assert F.not_(F.not_(p)) == p
    assert F.and_() == F.TRUE and F.or_() == F.FALSE
    assert F.mul(F.num(3), F.num(2)) == F.num(6)
    assert F.mul(F.num(0), x) == F.num(0)


def test_evaluate_matches_hand_values():
    t = F.add(x, F.mul(F.add(a, F.num(-1)), y))  # x + (a-1)*y
    assert F.evaluate(t, {"x": Fraction(1), "a": 3, "y": Fraction(1, 2)}) == 2
    g = F.implies(F.cmp(">", a, 0), F.cmp(">=", x, 0))
    assert F.evaluate(g, {"a": 0, "x": Fraction(-1)}) is True
    assert F.evaluate(g, {"a": 1, "x": Fraction(-1)}) is False
    assert F.evaluate(F.ite(p, x, F.num(0)), {"p": False, "x": Fraction(5)}) == 0


def test_nonlinearity():
    assert not F.is_nonlinear(F.add(F.scale(2, x), a))
    assert F.is_nonlinear(F.mul(a, x))
    assert not F.is_nonlinear(F.mul(F.num(3), x))


def test_print_literals_and_coercion():
    assert F.term_to_smtlib(F.cmp(">=", x, F.num(Fraction(-1, 2)))) == "(>= x (- (/ 1.0 2.0)))"
    assert F.term_to_smtlib(F.cmp(">", a, 1)) == "(> a 1)"
    assert F.term_to_smtlib(F.cmp(">", a, -1)) == "(> a (- 1))"
    assert F.term_to_smtlib(F.mul(a, x)) == "(* (to_real a) x)"


def test_choose_logic():
    assert F.choose_logic([VarDecl("p", Sort.BOOL)], [p]) == "QF_UF"
    assert F.choose_logic(DECLS, [F.cmp(">", a, 0)]) == "QF_LIRA"
    assert F.choose_logic(DECLS, [F.cmp(">", F.mul(a, x), 0)]) == "QF_NIRA"
    assert F.choose_logic(DECLS[:1], [F.cmp(">", x, 0)]) == "QF_LRA"


def test_print_smtlib_layout():
    text = F.print_smtlib([VarDecl("x", Sort.REAL, label="x @0")], [("init", F.cmp("=", x, 1)),
                                                                    ("init", F.cmp(">", x, 0)), ("goal", p)],
                          logic="ALL", header=["demo"])
    lines = text.splitlines()
    assert lines[:4] == ["; demo", "(set-option :produce-models true)", "(set-logic ALL)",
                         "(declare-fun x () Real) ; x @0"]
    assert lines.count("; init") == 1 and "; goal" in lines
    assert lines[-2:] == ["(check-sat)", "(get-model)"]
    with pytest.raises(FormulaError):
        F.print_smtlib([VarDecl("x", Sort.REAL)] * 2, [])


def test_parse_model_variants():
    both = "sat\n(model\n  (define-fun x () Real (/ 1.0 2.0))\n  (define-fun a () Int (- 3)))\n"
    m = F.parse_model(both, DECLS)
    assert isinstance(m, Model)
    assert m["x"] == Fraction(1, 2) and m["a"] == -3 and type(m["a"]) is int
    assert m["p"] is False and m.defaulted == ["p"]
    m = F.parse_model("sat\n((define-fun p () Bool true) (define-fun x () Real (- 2.0)))", DECLS)
    assert m["p"] is True and m["x"] == -2
    assert F.parse_model("sat\n(\n)\n", DECLS).defaulted == ["x", "a", "p"]
    assert isinstance(F.parse_model('unsat\n(error "model is not available")\n', DECLS), Unsat)
    assert isinstance(F.parse_model("unknown\n", DECLS), Unknown)


def test_parse_model_errors():
    with pytest.raises(SolverProtocolError):
        F.parse_model("", DECLS)
    with pytest.raises(SolverProtocolError):
        F.parse_model('sat\n(error "line 3: unknown constant")', DECLS)
    with pytest.raises(SolverProtocolError):
        F.parse_model("sat\n((define-fun a () Int 1.5))", DECLS)
    with pytest.raises(SolverProtocolError):
        F.parse_model("sat\n((define-fun x () Real (root-obj (+ (^ x 2) (- 2)) 1)))", DECLS)
    with pytest.raises(SolverProtocolError):
        F.parse_model("sat\n", DECLS)


origins = st.one_of(
    st.builds(lambda s, v: VarOrigin("state", s, var=v), st.integers(0, 999), st.integers(0, 999)),
    st.builds(lambda s, i: VarOrigin("action", s, index=i), st.integers(0, 999), st.integers(0, 999)),
    st.builds(lambda k, s, v, i: VarOrigin(k, s, var=v, index=i), st.sampled_from(["aux", "chain"]),
              st.integers(0, 999), st.integers(0, 999), st.integers(0, 999)))


@given(origins)
def test_mangle_roundtrip(o):
    name = F.mangle(o)
    assert F.demangle(name) == o
    assert name.replace("_", "").isalnum()


@given(st.lists(origins, min_size=2, max_size=2, unique=True))
def test_mangle_injective(pair):
    assert F.mangle(pair[0]) != F.mangle(pair[1])


def test_demangle_rejects():
    for bad in ("x1", "q0_1", "a0_1_2", "g0_1", "x0_1_2"):
        with pytest.raises(FormulaError):
            F.demangle(bad)
