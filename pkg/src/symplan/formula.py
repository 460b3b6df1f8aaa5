"""Solver-agnostic term IR, SMT-LIB v2 printing and model parsing."""
from __future__ import annotations

import enum
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .sexpr import Atom, SExprError, parse_all


class Sort(enum.Enum):
    BOOL = "Bool"
    REAL = "Real"
    INT = "Int"  # action multiplicities; always declared together with a >= 0 side assertion


class FormulaError(Exception):
    pass


class SolverProtocolError(Exception):
    def __init__(self, msg: str, raw: str = ""):
        super().__init__(msg)
        self.raw = raw


# --------------------------------------------------------------------------- #
# Terms


@dataclass(frozen=True)
class Var:
    name: str
    sort: Sort


@dataclass(frozen=True)
class Const:
    value: Union[bool, Fraction]
    sort: Sort


@dataclass(frozen=True)
class App:
    op: str
    args: tuple
    sort: Sort


Term = Union[Var, Const, App]

TRUE = Const(True, Sort.BOOL)
FALSE = Const(False, Sort.BOOL)
ARITH = (Sort.INT, Sort.REAL)


def num(k) -> Const:
    k = Fraction(k)
    return Const(k, Sort.INT if k.denominator == 1 else Sort.REAL)


def boolean(b: bool) -> Const:
    return TRUE if b else FALSE


def _join(sorts) -> Sort:
    return Sort.REAL if any(s is Sort.REAL for s in sorts) else Sort.INT


def _is_const(t, value=None) -> bool:
    return isinstance(t, Const) and (value is None or t.value == value)


def _split_scaled(t) -> tuple[Fraction, Term]:
    if isinstance(t, App) and t.op == "*" and len(t.args) == 2 and isinstance(t.args[0], Const):
        return t.args[0].value, t.args[1]
    return Fraction(1), t


def add(*terms) -> Term:
    """Sum with constants folded and like terms merged (first-seen order)."""
    const = Fraction(0)
    coeffs: dict[Term, Fraction] = {}
    sorts = []
    stack = list(terms)
    flat = []
    while stack:
        t = stack.pop(0)
        if isinstance(t, App) and t.op == "+":
            stack[0:0] = list(t.args)
            continue
        flat.append(t)
    for t in flat:
        if t.sort not in ARITH:
            raise FormulaError(f"cannot add a {t.sort.value} term")
        sorts.append(t.sort)
        if isinstance(t, Const):
            const += t.value
            continue
        k, base = _split_scaled(t)
        coeffs[base] = coeffs.get(base, Fraction(0)) + k
    args = [scale(k, base) for base, k in coeffs.items() if k != 0]
    if const != 0 or not args:
        args.append(num(const))
    if len(args) == 1:
        return args[0]
    return App("+", tuple(args), _join(sorts + [a.sort for a in args]))


def scale(k, t: Term) -> Term:
    k = Fraction(k)
    if k == 0:
        return num(0)
    if k == 1:
        return t
    if isinstance(t, Const):
        return num(k * t.value)
    if isinstance(t, App) and t.op == "+":
        return add(*(scale(k, a) for a in t.args))
    k0, base = _split_scaled(t)
    k = k * k0
    if k == 1:
        return base
    c = num(k)
    return App("*", (c, base), _join([c.sort, base.sort]))


def neg(t: Term) -> Term:
    return scale(-1, t)


def sub(a: Term, b: Term) -> Term:
    return add(a, neg(b))


def mul(a: Term, b: Term) -> Term:
    if isinstance(a, Const):
        return scale(a.value, b)
    if isinstance(b, Const):
        return scale(b.value, a)
    if isinstance(b, App) and b.op == "*" and isinstance(b.args[0], Const):
        return scale(b.args[0].value, mul(a, b.args[1]))
    if isinstance(a, App) and a.op == "*" and isinstance(a.args[0], Const):
        return scale(a.args[0].value, mul(a.args[1], b))
    return App("*", (a, b), _join([a.sort, b.sort]))


def cmp(op: str, a: Term, b: Term | int = 0) -> Term:
    if not isinstance(b, (Var, Const, App)):
        b = num(b)
    if op not in (">=", ">", "=", "<=", "<"):
        raise FormulaError(f"unknown comparison {op}")
    if isinstance(a, Const) and isinstance(b, Const):
        x, y = a.value, b.value
        return boolean({">=": x >= y, ">": x > y, "=": x == y, "<=": x <= y, "<": x < y}[op])
    return App(op, (a, b), Sort.BOOL)


def _bool_args(items, unit, zero):
    out = []
    op = "and" if unit is TRUE else "or"
    for t in items:
        if t.sort is not Sort.BOOL:
            raise FormulaError("logical connective over a non-Boolean term")
        if isinstance(t, App) and t.op == op:
            out.extend(t.args)
        elif t == unit:
            continue
        elif t == zero:
            return None
        else:
            out.append(t)
    return out


def and_(*items) -> Term:
    out = _bool_args(items, TRUE, FALSE)
    if out is None:
        return FALSE
    if not out:
        return TRUE
    return out[0] if len(out) == 1 else App("and", tuple(out), Sort.BOOL)


def or_(*items) -> Term:
    out = _bool_args(items, FALSE, TRUE)
    if out is None:
        return TRUE
    if not out:
        return FALSE
    return out[0] if len(out) == 1 else App("or", tuple(out), Sort.BOOL)


def not_(t: Term) -> Term:
    if isinstance(t, Const):
        return boolean(not t.value)
    if isinstance(t, App) and t.op == "not":
        return t.args[0]
    return App("not", (t,), Sort.BOOL)


def implies(a: Term, b: Term) -> Term:
    if a == TRUE:
        return b
    if a == FALSE or b == TRUE:
        return TRUE
    return App("=>", (a, b), Sort.BOOL)


def iff(a: Term, b: Term) -> Term:
    if a == b:
        return TRUE
    return App("=", (a, b), Sort.BOOL)


def eq(a: Term, b: Term) -> Term:
    if a.sort is Sort.BOOL:
        return iff(a, b)
    return cmp("=", a, b)


def ite(c: Term, a: Term, b: Term) -> Term:
    if c == TRUE:
        return a
    if c == FALSE:
        return b
    if a == b:
        return a
    sort = a.sort if a.sort is Sort.BOOL else _join([a.sort, b.sort])
    return App("ite", (c, a, b), sort)


def variables(t: Term) -> set[str]:
    out: set[str] = set()
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Var):
            out.add(x.name)
        elif isinstance(x, App):
            stack.extend(x.args)
    return out


def is_nonlinear(t: Term) -> bool:
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, App):
            if x.op == "*" and sum(not isinstance(a, Const) for a in x.args) > 1:
                return True
            stack.extend(x.args)
    return False


def evaluate(t: Term, env: Mapping[str, object]):
    """Evaluate a term under an assignment (bool / rational values)."""
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Var):
        v = env[t.name]
        return v if isinstance(v, bool) else Fraction(v)
    op, args = t.op, t.args
    if op == "and":
        return all(evaluate(a, env) for a in args)
    if op == "or":
        return any(evaluate(a, env) for a in args)
    if op == "not":
        return not evaluate(args[0], env)
    if op == "=>":
        return (not evaluate(args[0], env)) or evaluate(args[1], env)
    if op == "ite":
        return evaluate(args[1], env) if evaluate(args[0], env) else evaluate(args[2], env)
    vals = [evaluate(a, env) for a in args]
    if op == "+":
        return sum(vals, Fraction(0))
    if op == "*":
        out = Fraction(1)
        for v in vals:
            out *= v
        return out
    x, y = vals
    if op == "=":
        return x == y
    if op == ">=":
        return x >= y
    if op == ">":
        return x > y
    if op == "<=":
        return x <= y
    if op == "<":
        return x < y
    raise FormulaError(f"unknown operator {op}")


# --------------------------------------------------------------------------- #
# Declarations and name mangling


@dataclass(frozen=True)
class VarOrigin:
    """Where a solver variable comes from.

    kind is one of ``state`` (copy of problem variable ``var`` at ``step``),
    ``action`` (multiplicity of action or pattern occurrence ``index``),
    ``aux`` (pattern auxiliary for variable ``var`` after occurrence ``index``)
    and ``chain`` (R2E chain copy of ``var`` after action ``index``).
    """

    kind: str
    step: int
    var: int | None = None
    index: int | None = None


_PREFIX = {"state": "x", "action": "a", "aux": "g", "chain": "c"}
_KIND = {v: k for k, v in _PREFIX.items()}
_MANGLED = re.compile(r"^([xagc])(\d+)_(\d+)(?:_(\d+))?$")


def mangle(o: VarOrigin) -> str:
    p = _PREFIX[o.kind]
    if o.kind == "state":
        return f"{p}{o.step}_{o.var}"
    if o.kind == "action":
        return f"{p}{o.step}_{o.index}"
    return f"{p}{o.step}_{o.index}_{o.var}"


def demangle(name: str) -> VarOrigin:
    mt = _MANGLED.match(name)
    if not mt:
        raise FormulaError(f"not a mangled name: {name!r}")
    kind = _KIND[mt.group(1)]
    step, a, b = int(mt.group(2)), int(mt.group(3)), mt.group(4)
    if kind == "state":
        if b is not None:
            raise FormulaError(f"not a mangled name: {name!r}")
        return VarOrigin(kind, step, var=a)
    if kind == "action":
        if b is not None:
            raise FormulaError(f"not a mangled name: {name!r}")
        return VarOrigin(kind, step, index=a)
    if b is None:
        raise FormulaError(f"not a mangled name: {name!r}")
    return VarOrigin(kind, step, var=int(b), index=a)


@dataclass(frozen=True)
class VarDecl:
    name: str
    sort: Sort
    origin: VarOrigin | None = None
    label: str = ""

    @property
    def term(self) -> Var:
        return Var(self.name, self.sort)


# --------------------------------------------------------------------------- #
# SMT-LIB printing


def _fmt_const(k: Fraction, sort: Sort) -> str:
    if sort is Sort.INT:
        if k.denominator != 1:
            raise FormulaError(f"non-integral Int literal {k}")
        n = k.numerator
        return str(n) if n >= 0 else f"(- {-n})"
    a = abs(k)
    body = f"{a.numerator}.0" if a.denominator == 1 else f"(/ {a.numerator}.0 {a.denominator}.0)"
    return body if k >= 0 else f"(- {body})"


def _pr(t: Term, want: Sort | None = None) -> str:
    if isinstance(t, Const):
        if t.sort is Sort.BOOL:
            return "true" if t.value else "false"
        return _fmt_const(t.value, Sort.REAL if (want is Sort.REAL or t.sort is Sort.REAL) else Sort.INT)
    if isinstance(t, Var):
        if want is Sort.REAL and t.sort is Sort.INT:
            return f"(to_real {t.name})"
        return t.name
    op, args = t.op, t.args
    if op in ("+", "*"):
        s = Sort.REAL if (t.sort is Sort.REAL or want is Sort.REAL) else Sort.INT
        return f"({op} " + " ".join(_pr(a, s) for a in args) + ")"
    if op in (">=", ">", "=", "<=", "<") and args[0].sort is not Sort.BOOL:
        s = _join([a.sort for a in args])
        return f"({op} {_pr(args[0], s)} {_pr(args[1], s)})"
    if op == "ite" and t.sort is not Sort.BOOL:
        s = Sort.REAL if (t.sort is Sort.REAL or want is Sort.REAL) else Sort.INT
        return f"(ite {_pr(args[0])} {_pr(args[1], s)} {_pr(args[2], s)})"
    return f"({op} " + " ".join(_pr(a) for a in args) + ")"


def term_to_smtlib(t: Term) -> str:
    return _pr(t)


def choose_logic(decls: Iterable[VarDecl], assertions: Iterable[Term]) -> str:
    sorts = {d.sort for d in decls}
    nonlinear = any(is_nonlinear(a) for a in assertions)
    has_int = Sort.INT in sorts
    has_real = Sort.REAL in sorts
    if not has_int and not has_real:
        return "QF_UF"
    return "QF_" + ("N" if nonlinear else "L") + ("I" if has_int else "") + ("R" if has_real else "") + "A"


def decl_to_smtlib(d: VarDecl) -> str:
    line = f"(declare-fun {d.name} () {d.sort.value})"
    return f"{line} ; {d.label}" if d.label else line


def print_smtlib(decls: list[VarDecl], assertions: list, logic: str | None = None,
                 header: Iterable[str] = (), directives: bool = True) -> str:
    """Render a query.

    ``assertions`` holds terms or ``(role, term)`` pairs; a comment line is
    emitted whenever the role changes.
    """
    pairs = [a if isinstance(a, tuple) else ("", a) for a in assertions]
    names = set()
    for d in decls:
        if d.name in names:
            raise FormulaError(f"duplicate declaration {d.name!r}")
        names.add(d.name)
    if logic is None:
        logic = choose_logic(decls, [t for _, t in pairs])
    out = [f"; {h}" for h in header]
    out.append("(set-option :produce-models true)")
    out.append(f"(set-logic {logic})")
    out.extend(decl_to_smtlib(d) for d in decls)
    role = None
    for r, t in pairs:
        if r and r != role:
            out.append(f"; {r}")
            role = r
        out.append(f"(assert {_pr(t)})")
    if directives:
        out.append("(check-sat)")
        out.append("(get-model)")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------- #
# Model parsing


@dataclass
class Model:
    values: dict[str, object]
    defaulted: list[str] = field(default_factory=list)

    def __getitem__(self, name: str):
        return self.values[name]

    def get(self, name: str, default=None):
        return self.values.get(name, default)


@dataclass(frozen=True)
class Unsat:
    pass


@dataclass(frozen=True)
class Unknown:
    reason: str = ""


def _value(x, raw: str):
    if isinstance(x, Atom) or isinstance(x, str):
        if x == "true":
            return True
        if x == "false":
            return False
        try:
            return Fraction(str(x))
        except ValueError:
            raise SolverProtocolError(f"cannot interpret model value {x!r}", raw) from None
    if not x:
        raise SolverProtocolError("empty model value", raw)
    head = x[0]
    vals = [_value(y, raw) for y in x[1:]]
    if head == "-":
        return -vals[0] if len(vals) == 1 else vals[0] - sum(vals[1:], Fraction(0))
    if head == "/":
        return vals[0] / vals[1]
    if head == "+":
        return sum(vals, Fraction(0))
    if head == "*":
        out = Fraction(1)
        for v in vals:
            out *= v
        return out
    if head == "to_real":
        return vals[0]
    raise SolverProtocolError(f"unsupported model value {x!r}", raw)


def parse_model(text: str, decls: Iterable[VarDecl]) -> Union[Model, Unsat, Unknown]:
    try:
        exprs = parse_all(text)
    except SExprError as e:
        raise SolverProtocolError(f"malformed solver output: {e}", text) from None
    if not exprs or not isinstance(exprs[0], str):
        raise SolverProtocolError("solver output does not start with a verdict", text)
    verdict = str(exprs[0])
    if verdict == "unsat":
        return Unsat()
    if verdict == "unknown":
        return Unknown()
    if verdict != "sat":
        raise SolverProtocolError(f"unexpected verdict {verdict!r}", text)
    defs = None
    for e in exprs[1:]:
        if isinstance(e, list):
            if e and e[0] == "error":
                raise SolverProtocolError(f"solver error: {e[1] if len(e) > 1 else ''}", text)
            body = e[1:] if e and e[0] == "model" else e
            if all(isinstance(d, list) and d and d[0] == "define-fun" for d in body):
                defs = body
                break
    if defs is None:
        raise SolverProtocolError("sat verdict without a model", text)
    decls = list(decls)
    sorts = {d.name: d.sort for d in decls}
    values: dict[str, object] = {}
    for d in defs:
        if len(d) != 5 or d[2] != []:
            continue  # functions with arguments are not ours
        name = str(d[1])
        v = _value(d[4], text)
        sort = sorts.get(name)
        if sort is Sort.BOOL:
            if not isinstance(v, bool):
                raise SolverProtocolError(f"Boolean variable {name} got {v}", text)
        elif sort is Sort.INT:
            if isinstance(v, bool) or v.denominator != 1:
                raise SolverProtocolError(f"Int variable {name} got {v}", text)
            v = int(v)
        elif sort is Sort.REAL and isinstance(v, bool):
            raise SolverProtocolError(f"Real variable {name} got {v}", text)
        values[name] = v
    defaulted = []
    for d in decls:
        if d.name not in values:
            values[d.name] = False if d.sort is Sort.BOOL else (0 if d.sort is Sort.INT else Fraction(0))
            defaulted.append(d.name)
    return Model(values, defaulted)
