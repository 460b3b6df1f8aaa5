"""Ground numeric planning problems and their execution semantics.

Variables are referred to by name. Numeric values are exact rationals
(:class:`fractions.Fraction`); Boolean values are Python ``bool``.
"""
from __future__ import annotations

import json
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

Value = Union[bool, Fraction]


class ModelError(Exception):
    """Raised for ill-formed problems or references to unknown variables."""


class NotExecutable(ModelError):
    def __init__(self, action: "Action", condition: "Condition"):
        super().__init__(f"{action.name}: precondition {condition} does not hold")
        self.action = action
        self.condition = condition


def as_fraction(x) -> Fraction:
    if isinstance(x, bool):
        raise ModelError(f"expected a number, got {x!r}")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        # floats only ever come from JSON/user input; go through str so 0.1 -> 1/10
        return Fraction(repr(x))
    return Fraction(x)


# --------------------------------------------------------------------------- #
# Linear expressions


@dataclass(frozen=True)
class LinearExpr:
    """``sum(k_w * w) + k`` with rational coefficients, kept canonical.

    ``coeffs`` is a sorted tuple of ``(name, coefficient)`` pairs with no zero
    coefficients, so structurally equal expressions compare equal.
    """

    coeffs: tuple[tuple[str, Fraction], ...] = ()
    constant: Fraction = Fraction(0)

    @classmethod
    def make(cls, coeffs: Mapping[str, object] | Iterable[tuple[str, object]] = (), constant=0) -> "LinearExpr":
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        acc: dict[str, Fraction] = {}
        for name, k in items:
            acc[name] = acc.get(name, Fraction(0)) + as_fraction(k)
        return cls(tuple(sorted((n, k) for n, k in acc.items() if k != 0)), as_fraction(constant))

    @classmethod
    def var(cls, name: str) -> "LinearExpr":
        return cls(((name, Fraction(1)),), Fraction(0))

    @classmethod
    def const(cls, k) -> "LinearExpr":
        return cls((), as_fraction(k))

    def coeff(self, name: str) -> Fraction:
        for n, k in self.coeffs:
            if n == name:
                return k
        return Fraction(0)

    def variables(self) -> frozenset[str]:
        return frozenset(n for n, _ in self.coeffs)

    def is_constant(self) -> bool:
        return not self.coeffs

    def __add__(self, other) -> "LinearExpr":
        if not isinstance(other, LinearExpr):
            other = LinearExpr.const(other)
        return LinearExpr.make(self.coeffs + other.coeffs, self.constant + other.constant)

    __radd__ = __add__

    def __neg__(self) -> "LinearExpr":
        return LinearExpr(tuple((n, -k) for n, k in self.coeffs), -self.constant)

    def __sub__(self, other) -> "LinearExpr":
        if not isinstance(other, LinearExpr):
            other = LinearExpr.const(other)
        return self + (-other)

    def __rsub__(self, other) -> "LinearExpr":
        return (-self) + other

    def scale(self, k) -> "LinearExpr":
        k = as_fraction(k)
        if k == 0:
            return LinearExpr()
        return LinearExpr(tuple((n, c * k) for n, c in self.coeffs), self.constant * k)

    def __mul__(self, k) -> "LinearExpr":
        if isinstance(k, LinearExpr):
            if k.is_constant():
                return self.scale(k.constant)
            if self.is_constant():
                return k.scale(self.constant)
            raise ModelError("product of two non-constant linear expressions")
        return self.scale(k)

    __rmul__ = __mul__

    def substitute(self, mapping: Mapping[str, "LinearExpr"]) -> "LinearExpr":
        out = LinearExpr.const(self.constant)
        for n, k in self.coeffs:
            out = out + (mapping[n] if n in mapping else LinearExpr.var(n)).scale(k)
        return out

    def evaluate(self, values: Mapping[str, Value]) -> Fraction:
        total = self.constant
        for n, k in self.coeffs:
            try:
                v = values[n]
            except KeyError:
                raise ModelError(f"unknown variable {n!r}") from None
            if isinstance(v, bool):
                raise ModelError(f"variable {n!r} is Boolean, not numeric")
            total += k * v
        return total

    def __str__(self) -> str:
        parts = []
        for n, k in self.coeffs:
            if k == 1:
                term = n
            elif k == -1:
                term = f"-{n}"
            else:
                term = f"{k}*{n}"
            parts.append(term)
        if self.constant != 0 or not parts:
            parts.append(str(self.constant))
        return " + ".join(parts).replace("+ -", "- ")

    def to_json(self) -> dict:
        return {"coeffs": {n: _num_json(k) for n, k in self.coeffs}, "const": _num_json(self.constant)}

    @classmethod
    def from_json(cls, data) -> "LinearExpr":
        if isinstance(data, (int, str, float)) and not isinstance(data, bool):
            return cls.const(_num_from_json(data))
        return cls.make({n: _num_from_json(k) for n, k in data.get("coeffs", {}).items()},
                        _num_from_json(data.get("const", 0)))


def _num_json(k: Fraction):
    return int(k) if k.denominator == 1 else str(k)


def _num_from_json(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x)
    return as_fraction(x)


# --------------------------------------------------------------------------- #
# Conditions, effects, goal formulas

NUM_OPS = (">=", ">", "=")


@dataclass(frozen=True)
class BoolCond:
    var: str
    value: bool

    def variables(self) -> frozenset[str]:
        return frozenset((self.var,))

    def __str__(self) -> str:
        return f"{self.var} = {'T' if self.value else 'F'}"


@dataclass(frozen=True)
class NumCond:
    """``expr op 0`` with op one of ``>=``, ``>``, ``=``."""

    expr: LinearExpr
    op: str

    def __post_init__(self):
        if self.op not in NUM_OPS:
            raise ModelError(f"bad comparison operator {self.op!r}; normalise with compare()")

    def variables(self) -> frozenset[str]:
        return self.expr.variables()

    def __str__(self) -> str:
        return f"{self.expr} {self.op} 0"


Condition = Union[BoolCond, NumCond]


def compare(lhs, op: str, rhs=0) -> NumCond:
    """Build ``lhs op rhs`` normalised to ``psi {>=,>,=} 0``."""
    if not isinstance(lhs, LinearExpr):
        lhs = LinearExpr.const(lhs)
    if not isinstance(rhs, LinearExpr):
        rhs = LinearExpr.const(rhs)
    diff = lhs - rhs
    if op in (">=", ">", "="):
        return NumCond(diff, op)
    if op == "<=":
        return NumCond(-diff, ">=")
    if op == "<":
        return NumCond(-diff, ">")
    raise ModelError(f"unknown comparison {op!r}")


@dataclass(frozen=True)
class And:
    items: tuple = ()

    def __str__(self) -> str:
        return "(" + " and ".join(map(str, self.items)) + ")" if self.items else "true"


@dataclass(frozen=True)
class Or:
    items: tuple = ()

    def __str__(self) -> str:
        return "(" + " or ".join(map(str, self.items)) + ")" if self.items else "false"


@dataclass(frozen=True)
class Not:
    item: object

    def __str__(self) -> str:
        return f"not {self.item}"


Formula = Union[BoolCond, NumCond, And, Or, Not]


def formula_variables(f: Formula) -> frozenset[str]:
    if isinstance(f, (BoolCond, NumCond)):
        return f.variables()
    if isinstance(f, Not):
        return formula_variables(f.item)
    out: frozenset[str] = frozenset()
    for it in f.items:
        out |= formula_variables(it)
    return out


@dataclass(frozen=True)
class BoolEffect:
    var: str
    value: bool

    def __str__(self) -> str:
        return f"{self.var} := {'T' if self.value else 'F'}"


@dataclass(frozen=True)
class NumEffect:
    var: str
    expr: LinearExpr

    def __str__(self) -> str:
        return f"{self.var} := {self.expr}"


Effect = Union[BoolEffect, NumEffect]


def increase(var: str, delta) -> NumEffect:
    if not isinstance(delta, LinearExpr):
        delta = LinearExpr.const(delta)
    return NumEffect(var, LinearExpr.var(var) + delta)


def decrease(var: str, delta) -> NumEffect:
    if not isinstance(delta, LinearExpr):
        delta = LinearExpr.const(delta)
    return NumEffect(var, LinearExpr.var(var) - delta)


@dataclass(frozen=True)
class Action:
    name: str
    pre: tuple[Condition, ...] = ()
    eff: tuple[Effect, ...] = ()

    def __post_init__(self):
        seen = set()
        for e in self.eff:
            if e.var in seen:
                raise ModelError(f"action {self.name!r} assigns {e.var!r} more than once")
            seen.add(e.var)

    @property
    def assigned(self) -> frozenset[str]:
        return frozenset(e.var for e in self.eff)

    def effect_on(self, var: str) -> Effect | None:
        for e in self.eff:
            if e.var == var:
                return e
        return None

    def read_variables(self) -> frozenset[str]:
        """Variables occurring in preconditions or effect right-hand sides."""
        out: set[str] = set()
        for c in self.pre:
            out |= c.variables()
        for e in self.eff:
            if isinstance(e, NumEffect):
                out |= e.expr.variables()
        return frozenset(out)


# --------------------------------------------------------------------------- #
# States


class State(Mapping[str, Value]):
    """Immutable total assignment of variables to values."""

    __slots__ = ("_data", "_hash")

    def __init__(self, data: Mapping[str, Value] | Iterable[tuple[str, Value]] = ()):
        d = {}
        for k, v in dict(data).items():
            d[k] = v if isinstance(v, bool) else as_fraction(v)
        self._data = d
        self._hash = None

    def __getitem__(self, key: str) -> Value:
        return self._data[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset((k, (type(v) is bool, v)) for k, v in self._data.items()))
        return self._hash

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mapping):
            return NotImplemented
        if len(self) != len(other):
            return False
        for k, v in self._data.items():
            if k not in other:
                return False
            w = other[k]
            if isinstance(v, bool) != isinstance(w, bool) or v != w:
                return False
        return True

    def replace(self, updates: Mapping[str, Value]) -> "State":
        d = dict(self._data)
        d.update(updates)
        return State(d)

    def __repr__(self) -> str:
        return f"State({self._data!r})"

    def to_json(self) -> dict:
        return {k: (v if isinstance(v, bool) else _num_json(v)) for k, v in sorted(self._data.items())}


def eval_expr(s: Mapping[str, Value], e: LinearExpr) -> Fraction:
    return e.evaluate(s)


def holds(s: Mapping[str, Value], c: Formula) -> bool:
    """Truth of a condition, or a propositional combination of conditions, in ``s``."""
    if isinstance(c, BoolCond):
        try:
            v = s[c.var]
        except KeyError:
            raise ModelError(f"unknown variable {c.var!r}") from None
        if not isinstance(v, bool):
            raise ModelError(f"variable {c.var!r} is numeric, not Boolean")
        return v == c.value
    if isinstance(c, NumCond):
        x = eval_expr(s, c.expr)
        if c.op == ">=":
            return x >= 0
        if c.op == ">":
            return x > 0
        return x == 0
    if isinstance(c, And):
        return all(holds(s, it) for it in c.items)
    if isinstance(c, Or):
        return any(holds(s, it) for it in c.items)
    if isinstance(c, Not):
        return not holds(s, c.item)
    raise TypeError(f"not a condition: {c!r}")


def executable(s: Mapping[str, Value], a: Action) -> bool:
    return all(holds(s, c) for c in a.pre)


def apply(s: State, a: Action) -> State:
    """Execute ``a`` in ``s``; every right-hand side is read from ``s``."""
    for c in a.pre:
        if not holds(s, c):
            raise NotExecutable(a, c)
    updates: dict[str, Value] = {}
    for e in a.eff:
        if e.var not in s:
            raise ModelError(f"unknown variable {e.var!r}")
        updates[e.var] = e.value if isinstance(e, BoolEffect) else eval_expr(s, e.expr)
    return s.replace(updates) if updates else s


# --------------------------------------------------------------------------- #
# Problems and plans


@dataclass(frozen=True)
class Problem:
    bool_vars: tuple[str, ...]
    num_vars: tuple[str, ...]
    actions: tuple[Action, ...]
    init: State
    goals: tuple[Formula, ...] = ()
    name: str = "problem"

    def __post_init__(self):
        declared = set(self.bool_vars) | set(self.num_vars)
        if len(declared) != len(self.bool_vars) + len(self.num_vars):
            raise ModelError("duplicate variable declaration")
        if set(self.init) != declared:
            missing = declared - set(self.init)
            extra = set(self.init) - declared
            raise ModelError(f"initial state must assign every variable once (missing={sorted(missing)}, "
                             f"undeclared={sorted(extra)})")
        bools = set(self.bool_vars)
        for v in self.bool_vars:
            if not isinstance(self.init[v], bool):
                raise ModelError(f"Boolean variable {v!r} has numeric initial value")
        for v in self.num_vars:
            if isinstance(self.init[v], bool):
                raise ModelError(f"numeric variable {v!r} has Boolean initial value")
        names = set()
        for a in self.actions:
            if a.name in names:
                raise ModelError(f"duplicate action name {a.name!r}")
            names.add(a.name)
            for c in a.pre:
                _check_cond(c, bools, declared, a.name)
            for e in a.eff:
                if isinstance(e, BoolEffect) != (e.var in bools) or e.var not in declared:
                    raise ModelError(f"action {a.name!r}: bad effect target {e.var!r}")
                if isinstance(e, NumEffect) and not e.expr.variables() <= set(self.num_vars):
                    raise ModelError(f"action {a.name!r}: effect on {e.var!r} reads a non-numeric variable")
        for g in self.goals:
            _check_formula(g, bools, declared)

    @property
    def variables(self) -> tuple[str, ...]:
        return self.bool_vars + self.num_vars

    def is_bool(self, var: str) -> bool:
        return var in self._bool_set

    @property
    def _bool_set(self) -> frozenset[str]:
        cached = self.__dict__.get("_bools")
        if cached is None:
            cached = frozenset(self.bool_vars)
            object.__setattr__(self, "_bools", cached)
        return cached

    def action(self, name: str) -> Action:
        for a in self.actions:
            if a.name == name:
                return a
        raise ModelError(f"unknown action {name!r}")

    def action_index(self, name: str) -> int:
        for i, a in enumerate(self.actions):
            if a.name == name:
                return i
        raise ModelError(f"unknown action {name!r}")

    def goal_holds(self, s: Mapping[str, Value]) -> bool:
        return all(holds(s, g) for g in self.goals)


def _check_cond(c, bools, declared, where):
    if isinstance(c, BoolCond):
        if c.var not in bools:
            raise ModelError(f"{where}: {c.var!r} is not a declared Boolean variable")
    elif isinstance(c, NumCond):
        bad = c.variables() - (declared - bools)
        if bad:
            raise ModelError(f"{where}: undeclared numeric variables {sorted(bad)}")
    else:
        raise ModelError(f"{where}: not a condition: {c!r}")


def _check_formula(f, bools, declared):
    if isinstance(f, (BoolCond, NumCond)):
        _check_cond(f, bools, declared, "goal")
    elif isinstance(f, Not):
        _check_formula(f.item, bools, declared)
    elif isinstance(f, (And, Or)):
        for it in f.items:
            _check_formula(it, bools, declared)
    else:
        raise ModelError(f"goal: not a formula: {f!r}")


@dataclass(frozen=True)
class Plan:
    steps: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        for name, k in self.steps:
            if not isinstance(k, int) or isinstance(k, bool) or k < 1:
                raise ModelError(f"repetition count for {name!r} must be a positive integer, got {k!r}")

    @classmethod
    def from_sequence(cls, names: Iterable[str]) -> "Plan":
        steps: list[tuple[str, int]] = []
        for n in names:
            if steps and steps[-1][0] == n:
                steps[-1] = (n, steps[-1][1] + 1)
            else:
                steps.append((n, 1))
        return cls(tuple(steps))

    def flatten(self) -> list[str]:
        return [name for name, k in self.steps for _ in range(k)]

    def __len__(self) -> int:
        return sum(k for _, k in self.steps)

    def to_text(self) -> str:
        return "".join(f"{k} {name}\n" for name, k in self.steps)

    @classmethod
    def from_text(cls, text: str) -> "Plan":
        steps = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split(";", 1)[0].strip()
            if not line:
                continue
            head, _, rest = line.partition(" ")
            try:
                k = int(head)
            except ValueError:
                raise ModelError(f"plan line {lineno}: expected '<count> <action-name>', got {line!r}") from None
            name = rest.strip()
            if name.startswith("(") and name.endswith(")"):
                name = name[1:-1].strip()
            if not name:
                raise ModelError(f"plan line {lineno}: missing action name")
            steps.append((" ".join(name.split()), k))
        return cls(tuple(steps))


@dataclass
class ValidationReport:
    valid: bool
    final_state: State
    failing_step: int | None = None
    failing_condition: str | None = None
    unmet_goals: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "failing_step": self.failing_step,
            "failing_condition": self.failing_condition,
            "unmet_goals": self.unmet_goals,
            "final_state": self.final_state.to_json(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def validate_plan(p: Problem, plan: Plan) -> ValidationReport:
    s = p.init
    for i, name in enumerate(plan.flatten()):
        try:
            a = p.action(name)
        except ModelError:
            return ValidationReport(False, s, i, f"unknown action {name!r}")
        for c in a.pre:
            if not holds(s, c):
                return ValidationReport(False, s, i, f"{a.name}: {c}")
        s = apply(s, a)
    unmet = [str(g) for g in p.goals if not holds(s, g)]
    if unmet:
        return ValidationReport(False, s, len(plan), "goal not satisfied", unmet)
    return ValidationReport(True, s)
