"""PDDL 2.1 (level 2 subset) parser and grounder, plus the native JSON format.

Supported: typed STRIPS with negative preconditions, object equality, numeric
fluents with ``assign``/``increase``/``decrease``/``scale-up``/``scale-down``
effects and ``< <= > >= =`` comparisons over linear arithmetic.
"""
from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from . import model as m
from .sexpr import SExprError, parse_all, position

log = logging.getLogger(__name__)


class PddlError(Exception):
    pass


class PddlSyntaxError(PddlError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{msg} (line {line}, column {col})" if line else msg)
        self.line = line
        self.col = col


class UnsupportedFeature(PddlError):
    pass


class NonLinearExpression(PddlError):
    pass


class UntypedObject(PddlError):
    pass


class GroundingError(PddlError):
    pass


SUPPORTED_REQUIREMENTS = frozenset({
    ":strips", ":typing", ":fluents", ":numeric-fluents", ":negative-preconditions",
    ":equality", ":disjunctive-preconditions",
})

# --------------------------------------------------------------------------- #
# Lifted AST


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Fluent:
    name: str
    args: tuple[str, ...] = ()


@dataclass(frozen=True)
class Op:
    op: str  # + - * /
    args: tuple = ()


NumExpr = Union[Num, Fluent, Op]


@dataclass(frozen=True)
class Pred:
    name: str
    args: tuple[str, ...] = ()


@dataclass(frozen=True)
class Eq:
    """Object equality ``(= ?a ?b)``."""
    left: str
    right: str


@dataclass(frozen=True)
class Cmp:
    op: str  # < <= > >= =
    left: NumExpr
    right: NumExpr


@dataclass(frozen=True)
class NotF:
    arg: object


@dataclass(frozen=True)
class AndF:
    items: tuple = ()


@dataclass(frozen=True)
class OrF:
    items: tuple = ()


@dataclass(frozen=True)
class AddEff:
    atom: Pred


@dataclass(frozen=True)
class DelEff:
    atom: Pred


@dataclass(frozen=True)
class NumEff:
    kind: str  # assign increase decrease scale-up scale-down
    target: Fluent
    expr: NumExpr


@dataclass(frozen=True)
class ActionSchema:
    name: str
    parameters: tuple[tuple[str, str], ...]
    precondition: object | None
    effects: tuple = ()


@dataclass(frozen=True)
class LiftedDomain:
    name: str
    requirements: tuple[str, ...] = ()
    types: tuple[tuple[str, str], ...] = ()  # (type, parent)
    constants: tuple[tuple[str, str], ...] = ()
    predicates: tuple[tuple[str, tuple[tuple[str, str], ...]], ...] = ()
    functions: tuple[tuple[str, tuple[tuple[str, str], ...]], ...] = ()
    actions: tuple[ActionSchema, ...] = ()

    def type_parent(self) -> dict[str, str]:
        return dict(self.types)


@dataclass(frozen=True)
class LiftedProblem:
    name: str
    domain: str
    objects: tuple[tuple[str, str], ...]
    init_atoms: tuple[Pred, ...]
    init_values: tuple[tuple[Fluent, Fraction], ...]
    goal: object


# --------------------------------------------------------------------------- #
# Parsing


def _err(msg, at) -> PddlSyntaxError:
    line, col = position(at)
    return PddlSyntaxError(msg, line, col)


def _sym(x, what="symbol") -> str:
    if not isinstance(x, str):
        raise _err(f"expected {what}", x)
    return str(x)


def _parse_number(x) -> Fraction | None:
    if not isinstance(x, str) or getattr(x, "quoted", False):
        return None
    try:
        return Fraction(str(x))
    except ValueError:
        return None


def _typed_list(items, default="object") -> list[tuple[str, str]]:
    """``a b - t c - u d`` -> [(a,t),(b,t),(c,u),(d,object)]."""
    out: list[tuple[str, str]] = []
    pending: list[str] = []
    i = 0
    while i < len(items):
        x = items[i]
        if x == "-":
            if i + 1 >= len(items):
                raise _err("missing type after '-'", x)
            t = items[i + 1]
            if isinstance(t, list):
                raise UnsupportedFeature("'either' types are not supported")
            out.extend((p, str(t)) for p in pending)
            pending = []
            i += 2
            continue
        pending.append(_sym(x))
        i += 1
    out.extend((p, default) for p in pending)
    return out


def _read(text: str) -> list:
    try:
        exprs = parse_all(text, lower=True)
    except SExprError as e:
        raise PddlSyntaxError(str(e).split(" (line")[0], e.line, e.col) from None
    if len(exprs) != 1 or not isinstance(exprs[0], list) or not exprs[0] or exprs[0][0] != "define":
        raise PddlSyntaxError("expected a single (define ...) form", 1, 1)
    return exprs[0]


def parse_domain(text: str) -> LiftedDomain:
    d = _read(text)
    if len(d) < 2 or not isinstance(d[1], list) or len(d[1]) != 2 or d[1][0] != "domain":
        raise _err("expected (domain <name>)", d)
    name = _sym(d[1][1])
    reqs: list[str] = []
    types: list[tuple[str, str]] = []
    constants: list[tuple[str, str]] = []
    preds: list = []
    funcs: list = []
    actions: list[ActionSchema] = []
    for sec in d[2:]:
        if not isinstance(sec, list) or not sec:
            raise _err("expected a domain section", sec)
        head = sec[0]
        if head == ":requirements":
            for r in sec[1:]:
                r = _sym(r)
                if r not in SUPPORTED_REQUIREMENTS:
                    raise UnsupportedFeature(f"requirement {r} is not supported")
                reqs.append(r)
        elif head == ":types":
            types.extend(_typed_list(sec[1:]))
        elif head == ":constants":
            constants.extend(_typed_list(sec[1:]))
        elif head == ":predicates":
            for p in sec[1:]:
                if not isinstance(p, list) or not p:
                    raise _err("bad predicate declaration", p)
                preds.append((_sym(p[0]), tuple(_typed_list(p[1:]))))
        elif head == ":functions":
            items = sec[1:]
            i = 0
            while i < len(items):
                f = items[i]
                if not isinstance(f, list) or not f:
                    raise _err("bad function declaration", f)
                funcs.append((_sym(f[0]), tuple(_typed_list(f[1:]))))
                i += 1
                if i < len(items) and items[i] == "-":
                    if i + 1 >= len(items) or items[i + 1] != "number":
                        raise UnsupportedFeature("only numeric functions are supported")
                    i += 2
        elif head == ":action":
            actions.append(_parse_action(sec))
        elif head in (":durative-action", ":derived", ":process", ":event"):
            raise UnsupportedFeature(f"{head} is not supported")
        else:
            raise _err(f"unknown domain section {head}", sec)
    dom = LiftedDomain(name, tuple(reqs), tuple(types), tuple(constants), tuple(preds), tuple(funcs),
                       tuple(actions))
    _check_domain(dom)
    return dom


def _parse_action(sec) -> ActionSchema:
    if len(sec) < 2:
        raise _err("action without a name", sec)
    name = _sym(sec[1])
    params: list[tuple[str, str]] = []
    pre = None
    effs: tuple = ()
    i = 2
    while i < len(sec):
        key = sec[i]
        if i + 1 >= len(sec):
            raise _err(f"missing value for {key}", key)
        val = sec[i + 1]
        if key == ":parameters":
            params = _typed_list(val)
        elif key == ":precondition":
            pre = None if val == [] else _parse_goal(val, allow_or=False)
        elif key == ":effect":
            effs = tuple(_parse_effects(val))
        else:
            raise _err(f"unknown action key {key}", key)
        i += 2
    return ActionSchema(name, tuple(params), pre, effs)


_CMP = ("<", "<=", ">", ">=", "=")


def _parse_goal(x, allow_or: bool):
    if not isinstance(x, list) or not x:
        raise _err("expected a condition", x)
    head = x[0]
    if head == "and":
        return AndF(tuple(_parse_goal(y, allow_or) for y in x[1:]))
    if head == "or":
        if not allow_or:
            raise UnsupportedFeature("disjunctive action preconditions are not supported")
        return OrF(tuple(_parse_goal(y, allow_or) for y in x[1:]))
    if head == "not":
        if len(x) != 2:
            raise _err("'not' takes one argument", x)
        return NotF(_parse_goal(x[1], allow_or))
    if head in ("forall", "exists", "imply", "when"):
        raise UnsupportedFeature(f"'{head}' is not supported")
    if head == "=" and len(x) == 3 and all(isinstance(y, str) and _parse_number(y) is None for y in x[1:]):
        return Eq(str(x[1]), str(x[2]))
    if head in _CMP:
        if len(x) != 3:
            raise _err(f"'{head}' takes two arguments", x)
        return Cmp(str(head), _parse_num(x[1]), _parse_num(x[2]))
    return Pred(_sym(head), tuple(_sym(a) for a in x[1:]))


def _parse_num(x) -> NumExpr:
    k = _parse_number(x)
    if k is not None:
        return Num(k)
    if isinstance(x, str):
        raise _err(f"expected a numeric expression, got {x!r}", x)
    if not x:
        raise _err("empty numeric expression", x)
    head = x[0]
    if head in ("+", "-", "*", "/"):
        if len(x) < 2 or (head == "/" and len(x) != 3):
            raise _err(f"bad arity for '{head}'", x)
        return Op(str(head), tuple(_parse_num(y) for y in x[1:]))
    return Fluent(_sym(head), tuple(_sym(a) for a in x[1:]))


_NUM_EFFECTS = ("assign", "increase", "decrease", "scale-up", "scale-down")


def _parse_effects(x) -> list:
    if not isinstance(x, list):
        raise _err("expected an effect", x)
    if not x:
        return []
    head = x[0]
    if head == "and":
        out = []
        for y in x[1:]:
            out.extend(_parse_effects(y))
        return out
    if head == "not":
        if len(x) != 2 or not isinstance(x[1], list):
            raise _err("bad delete effect", x)
        p = _parse_goal(x[1], allow_or=False)
        if not isinstance(p, Pred):
            raise _err("delete effect must be an atom", x)
        return [DelEff(p)]
    if head in ("forall", "when"):
        raise UnsupportedFeature(f"'{head}' effects are not supported")
    if head in _NUM_EFFECTS:
        if len(x) != 3:
            raise _err(f"'{head}' takes two arguments", x)
        target = _parse_num(x[1])
        if not isinstance(target, Fluent):
            raise _err("numeric effect target must be a function term", x)
        return [NumEff(str(head), target, _parse_num(x[2]))]
    return [AddEff(Pred(_sym(head), tuple(_sym(a) for a in x[1:])))]


def _check_domain(d: LiftedDomain) -> None:
    known_types = {"object"} | {t for t, _ in d.types} | {p for _, p in d.types}
    for t, p in d.types:
        if p not in known_types:
            raise PddlError(f"unknown parent type {p!r}")
    preds = {n: len(ps) for n, ps in d.predicates}
    funcs = {n: len(ps) for n, ps in d.functions}
    for n, ps in d.predicates + d.functions:
        for _, t in ps:
            if t not in known_types:
                raise PddlError(f"{n}: undeclared type {t!r}")
    consts = {c for c, _ in d.constants}
    for a in d.actions:
        params = {p for p, _ in a.parameters}
        for _, t in a.parameters:
            if t not in known_types:
                raise PddlError(f"action {a.name}: undeclared type {t!r}")

        def term(s):
            if s.startswith("?") and s not in params:
                raise PddlError(f"action {a.name}: unknown parameter {s}")
            if not s.startswith("?") and s not in consts:
                raise PddlError(f"action {a.name}: unknown constant {s}")

        def num(e):
            if isinstance(e, Fluent):
                if funcs.get(e.name) != len(e.args):
                    raise PddlError(f"action {a.name}: undeclared function {e.name}/{len(e.args)}")
                for s in e.args:
                    term(s)
            elif isinstance(e, Op):
                for y in e.args:
                    num(y)

        def cond(c):
            if isinstance(c, Pred):
                if preds.get(c.name) != len(c.args):
                    raise PddlError(f"action {a.name}: undeclared predicate {c.name}/{len(c.args)}")
                for s in c.args:
                    term(s)
            elif isinstance(c, Eq):
                term(c.left)
                term(c.right)
            elif isinstance(c, Cmp):
                num(c.left)
                num(c.right)
            elif isinstance(c, NotF):
                cond(c.arg)
            elif isinstance(c, (AndF, OrF)):
                for y in c.items:
                    cond(y)

        if a.precondition is not None:
            cond(a.precondition)
        for e in a.effects:
            if isinstance(e, (AddEff, DelEff)):
                cond(e.atom)
            else:
                num(e.target)
                num(e.expr)


def parse_problem(text: str) -> LiftedProblem:
    d = _read(text)
    if len(d) < 2 or not isinstance(d[1], list) or len(d[1]) != 2 or d[1][0] != "problem":
        raise _err("expected (problem <name>)", d)
    name = _sym(d[1][1])
    domain = ""
    objects: list[tuple[str, str]] = []
    atoms: list[Pred] = []
    values: list[tuple[Fluent, Fraction]] = []
    goal = AndF()
    for sec in d[2:]:
        if not isinstance(sec, list) or not sec:
            raise _err("expected a problem section", sec)
        head = sec[0]
        if head == ":domain":
            domain = _sym(sec[1])
        elif head == ":objects":
            objects.extend(_typed_list(sec[1:]))
        elif head == ":init":
            for f in sec[1:]:
                if not isinstance(f, list) or not f:
                    raise _err("bad initial fact", f)
                if f[0] == "=":
                    if len(f) != 3:
                        raise _err("bad numeric initial fact", f)
                    tgt = _parse_num(f[1])
                    k = _parse_number(f[2])
                    if not isinstance(tgt, Fluent) or k is None:
                        raise _err("expected (= (f args) number)", f)
                    values.append((tgt, k))
                elif f[0] == "not":
                    continue
                else:
                    atoms.append(Pred(_sym(f[0]), tuple(_sym(a) for a in f[1:])))
        elif head == ":goal":
            goal = _parse_goal(sec[1], allow_or=True)
        elif head == ":metric":
            log.warning("ignoring :metric clause")
        elif head == ":requirements":
            for r in sec[1:]:
                if _sym(r) not in SUPPORTED_REQUIREMENTS:
                    raise UnsupportedFeature(f"requirement {r} is not supported")
        else:
            raise _err(f"unknown problem section {head}", sec)
    return LiftedProblem(name, domain, tuple(objects), tuple(atoms), tuple(values), goal)


# --------------------------------------------------------------------------- #
# Printing (parse -> print -> parse is the identity on LiftedDomain)


def _fmt_num(k: Fraction) -> str:
    if k.denominator == 1:
        return str(k.numerator)
    return f"(/ {k.numerator} {k.denominator})"


def _pr_num(e) -> str:
    if isinstance(e, Num):
        return str(e.value.numerator) if e.value.denominator == 1 else _fmt_decimal(e.value)
    if isinstance(e, Fluent):
        return "(" + " ".join((e.name,) + e.args) + ")"
    return "(" + e.op + " " + " ".join(_pr_num(a) for a in e.args) + ")"


def _fmt_decimal(k: Fraction) -> str:
    # a literal must reparse to the same Fraction; fall back to a division otherwise
    s = f"{float(k)!r}"
    return s if Fraction(s) == k else f"(/ {k.numerator} {k.denominator})"


def _pr_cond(c) -> str:
    if isinstance(c, Pred):
        return "(" + " ".join((c.name,) + c.args) + ")"
    if isinstance(c, Eq):
        return f"(= {c.left} {c.right})"
    if isinstance(c, Cmp):
        return f"({c.op} {_pr_num(c.left)} {_pr_num(c.right)})"
    if isinstance(c, NotF):
        return f"(not {_pr_cond(c.arg)})"
    if isinstance(c, AndF):
        return "(and " + " ".join(_pr_cond(x) for x in c.items) + ")"
    if isinstance(c, OrF):
        return "(or " + " ".join(_pr_cond(x) for x in c.items) + ")"
    raise TypeError(c)


def _pr_eff(e) -> str:
    if isinstance(e, AddEff):
        return _pr_cond(e.atom)
    if isinstance(e, DelEff):
        return f"(not {_pr_cond(e.atom)})"
    return f"({e.kind} {_pr_num(e.target)} {_pr_num(e.expr)})"


def _pr_typed(items) -> str:
    return " ".join(f"{n} - {t}" for n, t in items)


def print_domain(d: LiftedDomain) -> str:
    lines = [f"(define (domain {d.name})"]
    if d.requirements:
        lines.append("  (:requirements " + " ".join(d.requirements) + ")")
    if d.types:
        lines.append("  (:types " + _pr_typed(d.types) + ")")
    if d.constants:
        lines.append("  (:constants " + _pr_typed(d.constants) + ")")
    if d.predicates:
        lines.append("  (:predicates")
        lines.extend(f"    ({' '.join([n, _pr_typed(ps)]).strip()})" for n, ps in d.predicates)
        lines.append("  )")
    if d.functions:
        lines.append("  (:functions")
        lines.extend(f"    ({' '.join([n, _pr_typed(ps)]).strip()}) - number" for n, ps in d.functions)
        lines.append("  )")
    for a in d.actions:
        lines.append(f"  (:action {a.name}")
        lines.append(f"    :parameters ({_pr_typed(a.parameters)})")
        if a.precondition is not None:
            lines.append(f"    :precondition {_pr_cond(a.precondition)}")
        lines.append("    :effect (and " + " ".join(_pr_eff(e) for e in a.effects) + "))")
    lines.append(")")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------- #
# Grounding


def atom_name(name: str, args: tuple[str, ...]) -> str:
    return f"{name}({','.join(args)})" if args else name


class _Undefined(Exception):
    """A static numeric fluent without an initial value was referenced."""


class _Grounder:
    def __init__(self, d: LiftedDomain, p: LiftedProblem):
        self.d = d
        self.p = p
        parent = d.type_parent()
        known = {"object"} | set(parent) | set(parent.values())
        self.objects: list[tuple[str, str]] = []
        seen = set()
        for o, t in list(d.constants) + list(p.objects):
            if t not in known:
                raise UntypedObject(f"object {o!r} has undeclared type {t!r}")
            if o in seen:
                continue
            seen.add(o)
            self.objects.append((o, t))
        self.parent = parent
        self.fluent_preds = {e.atom.name for a in d.actions for e in a.effects if isinstance(e, (AddEff, DelEff))}
        self.fluent_funcs = {e.target.name for a in d.actions for e in a.effects if isinstance(e, NumEff)}
        self.true_atoms = {(a.name, a.args) for a in p.init_atoms}
        self.values: dict[tuple[str, tuple], Fraction] = {}
        for f, k in p.init_values:
            self.values[(f.name, f.args)] = k

    def is_subtype(self, t: str, target: str) -> bool:
        while True:
            if t == target:
                return True
            if t not in self.parent or t == "object":
                return target == "object"
            t = self.parent[t]

    def objects_of(self, t: str) -> list[str]:
        return [o for o, ot in self.objects if self.is_subtype(ot, t)]

    # numeric -------------------------------------------------------------- #
    def num(self, e, b: dict) -> m.LinearExpr:
        if isinstance(e, Num):
            return m.LinearExpr.const(e.value)
        if isinstance(e, Fluent):
            args = tuple(b.get(a, a) for a in e.args)
            if e.name in self.fluent_funcs:
                return m.LinearExpr.var(atom_name(e.name, args))
            k = self.values.get((e.name, args))
            if k is None:
                raise _Undefined(atom_name(e.name, args))
            return m.LinearExpr.const(k)
        vals = [self.num(a, b) for a in e.args]
        if e.op == "+":
            out = m.LinearExpr()
            for v in vals:
                out = out + v
            return out
        if e.op == "-":
            if len(vals) == 1:
                return -vals[0]
            out = vals[0]
            for v in vals[1:]:
                out = out - v
            return out
        if e.op == "*":
            out = vals[0]
            for v in vals[1:]:
                if not out.is_constant() and not v.is_constant():
                    raise NonLinearExpression(f"non-linear product {_pr_num(e)} (binding {b})")
                out = out * v
            return out
        if e.op == "/":
            num_, den = vals
            if not den.is_constant():
                raise NonLinearExpression(f"division by a non-constant in {_pr_num(e)}")
            if den.constant == 0:
                raise GroundingError(f"division by zero in {_pr_num(e)}")
            return num_.scale(1 / den.constant)
        raise GroundingError(f"unknown operator {e.op}")

    # conditions: return a Formula, or True/False when statically decided -- #
    def cond(self, c, b: dict, static_false: set):
        if isinstance(c, Pred):
            args = tuple(b.get(a, a) for a in c.args)
            if c.name in self.fluent_preds:
                name = atom_name(c.name, args)
                if name in static_false:
                    return False
                return m.BoolCond(name, True)
            return (c.name, args) in self.true_atoms
        if isinstance(c, Eq):
            return b.get(c.left, c.left) == b.get(c.right, c.right)
        if isinstance(c, Cmp):
            lhs, rhs = self.num(c.left, b), self.num(c.right, b)
            nc = m.compare(lhs, c.op, rhs)
            if nc.expr.is_constant():
                return m.holds({}, nc)
            return nc
        if isinstance(c, NotF):
            inner = self.cond(c.arg, b, static_false)
            if isinstance(inner, bool):
                return not inner
            if isinstance(inner, m.BoolCond):
                return m.BoolCond(inner.var, not inner.value)
            if isinstance(inner, m.NumCond) and inner.op != "=":
                return m.NumCond(-inner.expr, ">" if inner.op == ">=" else ">=")
            return m.Not(inner)
        if isinstance(c, (AndF, OrF)):
            is_and = isinstance(c, AndF)
            items = []
            for y in c.items:
                r = self.cond(y, b, static_false)
                if isinstance(r, bool):
                    if r != is_and:
                        return r
                    continue
                items.append(r)
            if not items:
                return is_and
            if len(items) == 1:
                return items[0]
            return m.And(tuple(items)) if is_and else m.Or(tuple(items))
        raise GroundingError(f"unsupported condition {c!r}")

    def ground_action(self, a: ActionSchema, b: dict, static_false: set) -> m.Action | None:
        name = " ".join([a.name] + [b[p] for p, _ in a.parameters])
        pre: list = []
        try:
            if a.precondition is not None:
                r = self.cond(a.precondition, b, static_false)
                if r is False:
                    return None
                if r is not True:
                    for c in (r.items if isinstance(r, m.And) else (r,)):
                        if not isinstance(c, (m.BoolCond, m.NumCond)):
                            raise UnsupportedFeature(f"action {name}: precondition {c} is not a conjunction of "
                                                     "literals and comparisons")
                        pre.append(c)
            effs: dict[str, m.Effect] = {}
            adds, dels = {}, {}
            for e in a.effects:
                if isinstance(e, (AddEff, DelEff)):
                    v = atom_name(e.atom.name, tuple(b.get(x, x) for x in e.atom.args))
                    (adds if isinstance(e, AddEff) else dels)[v] = True
                    continue
                v = atom_name(e.target.name, tuple(b.get(x, x) for x in e.target.args))
                if v in effs:
                    raise GroundingError(f"action {name} assigns {v} twice")
                cur = m.LinearExpr.var(v)
                rhs = self.num(e.expr, b)
                if e.kind == "assign":
                    new = rhs
                elif e.kind == "increase":
                    new = cur + rhs
                elif e.kind == "decrease":
                    new = cur - rhs
                else:
                    if not rhs.is_constant():
                        raise NonLinearExpression(f"action {name}: {e.kind} by a non-constant factor")
                    k = rhs.constant
                    if e.kind == "scale-down":
                        if k == 0:
                            raise GroundingError(f"action {name}: scale-down by zero")
                        k = 1 / k
                    new = cur.scale(k)
                effs[v] = m.NumEffect(v, new)
        except _Undefined:
            # undefined static fluent: the action can never be applied
            return None
        # PDDL: delete effects are applied before add effects
        for v in dels:
            if v not in adds:
                effs[v] = m.BoolEffect(v, False)
        for v in adds:
            effs[v] = m.BoolEffect(v, True)
        return m.Action(name, tuple(dict.fromkeys(pre)), tuple(effs.values()))

    def run(self) -> m.Problem:
        static_false: set[str] = set()
        while True:
            actions = []
            conflicts: list[GroundingError] = []
            for a in self.d.actions:
                doms = [self.objects_of(t) for _, t in a.parameters]
                for combo in itertools.product(*doms):
                    b = {p: o for (p, _), o in zip(a.parameters, combo)}
                    try:
                        ga = self.ground_action(a, b, static_false)
                    except GroundingError as err:
                        # only an error if the action survives static pruning
                        conflicts.append(err)
                        continue
                    if ga is not None:
                        actions.append(ga)
            # fluent atoms never initially true and never added stay false forever
            reachable = {atom_name(n, args) for n, args in self.true_atoms if n in self.fluent_preds}
            for ga in actions:
                for e in ga.eff:
                    if isinstance(e, m.BoolEffect) and e.value:
                        reachable.add(e.var)
            mentioned = set()
            for ga in actions:
                mentioned |= {c.var for c in ga.pre if isinstance(c, m.BoolCond)}
                mentioned |= {e.var for e in ga.eff if isinstance(e, m.BoolEffect)}
            newly = {v for v in mentioned if v not in reachable} - static_false
            if not newly:
                break
            static_false |= newly
        if conflicts:
            raise conflicts[0]
        # drop effects on atoms that can never become true (deletes only)
        actions = [m.Action(a.name, a.pre, tuple(e for e in a.eff if not (isinstance(e, m.BoolEffect)
                                                                          and e.var in static_false)))
                   for a in actions]
        try:
            goal = self.cond(self.p.goal, {}, static_false)
        except _Undefined as e:
            raise GroundingError(f"goal references undefined fluent {e}") from None
        if goal is True:
            goals: tuple = ()
        elif goal is False:
            goals = (m.Or(()),)
        elif isinstance(goal, m.And):
            goals = goal.items
        else:
            goals = (goal,)

        bools: list[str] = []
        nums: list[str] = []

        def note(v: str, is_bool: bool):
            lst = bools if is_bool else nums
            if v not in lst:
                lst.append(v)

        def walk(f):
            if isinstance(f, m.BoolCond):
                note(f.var, True)
            elif isinstance(f, m.NumCond):
                for v in f.expr.variables():
                    note(v, False)
            elif isinstance(f, m.Not):
                walk(f.item)
            elif isinstance(f, (m.And, m.Or)):
                for y in f.items:
                    walk(y)

        for a in actions:
            for c in a.pre:
                walk(c)
            for e in a.eff:
                note(e.var, isinstance(e, m.BoolEffect))
                if isinstance(e, m.NumEffect):
                    for v in e.expr.variables():
                        note(v, False)
        for g in goals:
            walk(g)

        init: dict[str, m.Value] = {}
        true_names = {atom_name(n, args) for n, args in self.true_atoms}
        for v in bools:
            init[v] = v in true_names
        numeric_init = {atom_name(n, args): k for (n, args), k in self.values.items()}
        for v in nums:
            if v not in numeric_init:
                raise GroundingError(f"numeric fluent {v} has no initial value")
            init[v] = numeric_init[v]
        return m.Problem(tuple(bools), tuple(nums), tuple(actions), m.State(init), goals, name=self.p.name)


def ground(d: LiftedDomain, problem_text: str | LiftedProblem) -> m.Problem:
    p = parse_problem(problem_text) if isinstance(problem_text, str) else problem_text
    if p.domain and p.domain != d.name:
        log.warning("problem declares domain %r but domain is %r", p.domain, d.name)
    return _Grounder(d, p).run()


def load(domain_text: str, problem_text: str) -> m.Problem:
    return ground(parse_domain(domain_text), problem_text)


# --------------------------------------------------------------------------- #
# Native JSON format (*.nplan.json)


def _cond_json(c) -> dict:
    if isinstance(c, m.BoolCond):
        return {"bool": c.var, "value": c.value}
    if isinstance(c, m.NumCond):
        return {"expr": c.expr.to_json(), "op": c.op}
    if isinstance(c, m.And):
        return {"and": [_cond_json(x) for x in c.items]}
    if isinstance(c, m.Or):
        return {"or": [_cond_json(x) for x in c.items]}
    if isinstance(c, m.Not):
        return {"not": _cond_json(c.item)}
    raise TypeError(c)


def _cond_from(d) -> m.Formula:
    if "bool" in d:
        return m.BoolCond(d["bool"], bool(d.get("value", True)))
    if "expr" in d:
        return m.compare(m.LinearExpr.from_json(d["expr"]), d.get("op", ">="), 0)
    if "and" in d:
        return m.And(tuple(_cond_from(x) for x in d["and"]))
    if "or" in d:
        return m.Or(tuple(_cond_from(x) for x in d["or"]))
    if "not" in d:
        return m.Not(_cond_from(d["not"]))
    raise m.ModelError(f"bad condition {d!r}")


def problem_to_json(p: m.Problem) -> dict:
    return {
        "name": p.name,
        "bool_vars": list(p.bool_vars),
        "num_vars": list(p.num_vars),
        "init": p.init.to_json(),
        "actions": [
            {
                "name": a.name,
                "pre": [_cond_json(c) for c in a.pre],
                "eff": [{"var": e.var, "value": e.value} if isinstance(e, m.BoolEffect)
                        else {"var": e.var, "expr": e.expr.to_json()} for e in a.eff],
            }
            for a in p.actions
        ],
        "goals": [_cond_json(g) for g in p.goals],
    }


def problem_from_json(d: dict) -> m.Problem:
    bools = tuple(d.get("bool_vars", ()))
    nums = tuple(d.get("num_vars", ()))
    init = {}
    for k, v in d.get("init", {}).items():
        init[k] = bool(v) if k in bools else m.LinearExpr.from_json(v).constant
    actions = []
    for a in d.get("actions", ()):
        pre = []
        for c in a.get("pre", ()):
            f = _cond_from(c)
            if not isinstance(f, (m.BoolCond, m.NumCond)):
                raise m.ModelError(f"action {a['name']}: preconditions must be literals or comparisons")
            pre.append(f)
        eff = [m.BoolEffect(e["var"], bool(e["value"])) if "value" in e
               else m.NumEffect(e["var"], m.LinearExpr.from_json(e["expr"])) for e in a.get("eff", ())]
        actions.append(m.Action(a["name"], tuple(pre), tuple(eff)))
    return m.Problem(bools, nums, tuple(actions), m.State(init), tuple(_cond_from(g) for g in d.get("goals", ())),
                     name=d.get("name", "problem"))


def dumps_native(p: m.Problem) -> str:
    return json.dumps(problem_to_json(p), indent=1) + "\n"


def loads_native(text: str) -> m.Problem:
    return problem_from_json(json.loads(text))
