"""Bounded encodings of numeric planning problems.

Four transition relations are supported:

``standard``
    one Boolean-like occurrence per action and step, mutex axioms
``rolled``
    rolled-up actions (multiplicity in N) for rolling-eligible actions
``r2e``
    relaxed-relaxed-exists: actions chained along a fixed total order
``pattern``
    pattern encoding: an arbitrary action sequence executed symbolically,
    each occurrence repeated zero or more times

:func:`assemble_bound` builds ``I(X0) & T(X0,A0,X1) & ... & G(Xn)`` and
:func:`decode` turns a solver model back into a plan.
"""
from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

from . import formula as F
from .analysis import (BooleanAssignment, LinearIncrement, Pattern, SimpleAssignment, effect_classes,
                       eligible_for_rolling, mutex_index_pairs)
from .formula import Sort, Term, Var, VarDecl, VarOrigin
from .model import (Action, And, BoolCond, BoolEffect, LinearExpr, Not, NumCond, Or, Plan, Problem, State,
                    apply, validate_plan)

log = logging.getLogger(__name__)

ENCODINGS = ("standard", "rolled", "r2e", "pattern")


class EncodingError(Exception):
    pass


class DecodeSoundnessError(Exception):
    """A decoded plan is not executable or disagrees with the model: an encoder bug."""


@dataclass(frozen=True)
class EncodingSpec:
    """Encoding kind plus its parameters.

    ``order`` is the total order for ``r2e`` and ``pattern`` the pattern for
    ``pattern``; when omitted both default to the problem's action order.
    ``second_execution_check`` adds, for rolled actions whose precondition
    mentions a variable they assign by a simple assignment, a check in the
    state of the second execution (the first/last checks alone do not cover
    the executions in between in that case).
    """

    kind: str
    order: tuple[str, ...] | None = None
    pattern: Pattern | None = None
    second_execution_check: bool = True

    def __post_init__(self):
        if self.kind not in ENCODINGS:
            raise EncodingError(f"unknown encoding {self.kind!r}; expected one of {', '.join(ENCODINGS)}")


@dataclass
class StepPart:
    decls: list[VarDecl] = field(default_factory=list)
    assertions: list[tuple[str, Term]] = field(default_factory=list)

    def add(self, role: str, t: Term) -> None:
        if t == F.TRUE:
            return
        self.assertions.append((role, t))


@dataclass
class EncodedBound:
    bound: int
    spec: EncodingSpec
    decls: list[VarDecl]
    assertions: list[tuple[str, Term]]  # role is "init", "goal", "domain" or "<step>:<role>"
    decode_order: list[list[tuple[str, str]]]  # per step: (action name, action var name)

    def role_counts(self) -> dict[str, int]:
        c = Counter(r.split(":", 1)[-1] for r, _ in self.assertions)
        return {k: c.get(k, 0) for k in ("init", "pre", "eff", "frame", "mutex", "amo", "domain", "goal")}

    def stats(self) -> dict:
        kinds = Counter(d.origin.kind for d in self.decls if d.origin is not None)
        return {
            "encoding": self.spec.kind,
            "bound": self.bound,
            "num_vars": len(self.decls),
            "num_assertions": len(self.assertions),
            "num_aux_vars": kinds.get("aux", 0) + kinds.get("chain", 0),
            "num_action_vars": kinds.get("action", 0),
            "per_role_counts": self.role_counts(),
        }

    def to_smtlib(self, header: Sequence[str] = ()) -> str:
        return F.print_smtlib(self.decls, self.assertions, header=header)


def _gt(a: Var, k: int) -> Term:
    if a.sort is Sort.BOOL:
        return a if k == 0 else F.FALSE
    return F.cmp(">", a, k)


def _is0(a: Var) -> Term:
    return F.not_(a) if a.sort is Sort.BOOL else F.cmp("=", a, 0)


def _is1(a: Var) -> Term:
    return a if a.sort is Sort.BOOL else F.cmp("=", a, 1)


def lin(e: LinearExpr, env: Mapping[str, Term]) -> Term:
    """Lift a linear expression over problem variables to a term via ``env``."""
    return F.add(F.num(e.constant), *(F.scale(k, env[v]) for v, k in e.coeffs))


def psi_sub_a(psi: LinearExpr, a: Action, a_var: Term, env: Mapping[str, Term] | None = None,
              executions_before: Term | None = None) -> Term:
    """``psi`` evaluated in the state of a later execution of rolled action ``a``.

    Each variable ``x`` incremented by ``a`` (``x += d``) becomes
    ``x + (a_var - 1) * d`` and each simply-assigned ``x := e`` becomes ``e``.
    ``executions_before`` overrides the ``a_var - 1`` factor. ``env`` maps
    problem variables to terms (by default, Real variables of the same name).
    """
    if env is None:
        env = {v: Var(v, Sort.REAL) for v in psi.variables() | _rhs_vars(a)}
    factor = executions_before if executions_before is not None else F.add(a_var, F.num(-1))
    classes = effect_classes(a)
    parts = [F.num(psi.constant)]
    for x, k in psi.coeffs:
        cls = classes.get(x)
        if cls is None:
            parts.append(F.scale(k, env[x]))
        elif isinstance(cls, LinearIncrement):
            parts.append(F.scale(k, F.add(env[x], F.mul(factor, lin(cls.delta, env)))))
        elif isinstance(cls, SimpleAssignment):
            parts.append(F.scale(k, lin(cls.rhs, env)))
        else:
            raise EncodingError(f"{a.name}: precondition mentions self-interfering assignment of {x}")
    return F.add(*parts)


def _rhs_vars(a: Action) -> set[str]:
    out: set[str] = set()
    for e in a.eff:
        if hasattr(e, "expr"):
            out |= e.expr.variables()
    return out


class Encoder:
    """Builds the per-part formulas of one encoding for one problem."""

    def __init__(self, problem: Problem, spec: EncodingSpec):
        self.p = problem
        self.spec = spec
        self.var_index = {v: i for i, v in enumerate(problem.variables)}
        self.actions = list(problem.actions)
        self.act_index = {a.name: i for i, a in enumerate(self.actions)}
        self.classes = {a.name: effect_classes(a) for a in self.actions}
        self.eligible = {a.name: eligible_for_rolling(a) for a in self.actions}
        self.assigners: dict[str, list[int]] = {v: [] for v in problem.variables}
        for j, a in enumerate(self.actions):
            for e in a.eff:
                self.assigners[e.var].append(j)
        if spec.kind == "r2e":
            order = spec.order if spec.order is not None else tuple(a.name for a in self.actions)
            if sorted(order) != sorted(self.act_index) or len(set(order)) != len(order):
                raise EncodingError("r2e order must contain each action exactly once")
            self.order = list(order)
        else:
            self.order = None
        if spec.kind == "pattern":
            pat = spec.pattern if spec.pattern is not None else Pattern(tuple(a.name for a in self.actions))
            unknown = [n for n in pat if n not in self.act_index]
            if unknown:
                raise EncodingError(f"pattern mentions unknown actions {unknown}")
            self.pattern = pat
        else:
            self.pattern = None
        self.mutexes = mutex_index_pairs(problem) if spec.kind in ("standard", "rolled") else []

    # vocabulary ------------------------------------------------------------ #
    def state_decl(self, v: str, step: int) -> VarDecl:
        o = VarOrigin("state", step, var=self.var_index[v])
        return VarDecl(F.mangle(o), Sort.BOOL if self.p.is_bool(v) else Sort.REAL, o, f"{v} @{step}")

    def state_vars(self, step: int) -> dict[str, Var]:
        return {v: self.state_decl(v, step).term for v in self.p.variables}

    def action_decls(self, step: int) -> list[VarDecl]:
        sort = Sort.BOOL if self.spec.kind == "r2e" else Sort.INT
        names = list(self.pattern) if self.pattern is not None else [a.name for a in self.actions]
        out = []
        for k, n in enumerate(names):
            o = VarOrigin("action", step, index=k)
            out.append(VarDecl(F.mangle(o), sort, o, f"{n} @{step}" + (f" #{k}" if self.pattern is not None else "")))
        return out

    def decode_entries(self, step: int) -> list[tuple[str, str]]:
        decls = self.action_decls(step)
        if self.pattern is not None:
            return [(n, decls[k].name) for k, n in enumerate(self.pattern)]
        if self.order is not None:
            return [(n, decls[self.act_index[n]].name) for n in self.order]
        return [(a.name, decls[j].name) for j, a in enumerate(self.actions)]

    # init / goal ----------------------------------------------------------- #
    def init_part(self) -> StepPart:
        part = StepPart(decls=[self.state_decl(v, 0) for v in self.p.variables])
        X = self.state_vars(0)
        for v in self.p.variables:
            val = self.p.init[v]
            if isinstance(val, bool):
                part.add("init", X[v] if val else F.not_(X[v]))
            else:
                part.add("init", F.cmp("=", X[v], F.num(val)))
        return part

    def goal_terms(self, step: int) -> list[Term]:
        X = self.state_vars(step)
        return [t for t in (self._formula(g, X) for g in self.p.goals) if t != F.TRUE]

    def _formula(self, f, env) -> Term:
        if isinstance(f, BoolCond):
            return env[f.var] if f.value else F.not_(env[f.var])
        if isinstance(f, NumCond):
            return F.cmp(f.op, lin(f.expr, env), 0)
        if isinstance(f, And):
            return F.and_(*(self._formula(x, env) for x in f.items))
        if isinstance(f, Or):
            return F.or_(*(self._formula(x, env) for x in f.items))
        if isinstance(f, Not):
            return F.not_(self._formula(f.item, env))
        raise EncodingError(f"not a formula: {f!r}")

    # transitions ----------------------------------------------------------- #
    def step_part(self, i: int) -> StepPart:
        part = StepPart()
        for v in self.p.variables:
            part.decls.append(self.state_decl(v, i + 1))
        adecls = self.action_decls(i)
        part.decls.extend(adecls)
        A = [d.term for d in adecls]
        X, Xn = self.state_vars(i), self.state_vars(i + 1)
        kind = self.spec.kind
        if kind in ("standard", "rolled"):
            self._rolled(part, i, A, X, Xn)
            if kind == "standard":
                for j in range(len(self.actions)):
                    part.add(f"{i}:amo", F.or_(_is0(A[j]), _is1(A[j])))
        elif kind == "r2e":
            self._r2e(part, i, A, X, Xn)
        else:
            self._pattern(part, i, A, X, Xn)
        if kind != "r2e":
            for a in A:
                part.add("domain", F.cmp(">=", a, 0))
        return part

    def _numeric_pre(self, part, role, a: Action, c: Var, env, rolled: bool) -> None:
        for cond in a.pre:
            if not isinstance(cond, NumCond):
                continue
            part.add(role, F.implies(_gt(c, 0), F.cmp(cond.op, lin(cond.expr, env), 0)))
            if not rolled:
                continue
            part.add(role, F.implies(_gt(c, 1), F.cmp(cond.op, psi_sub_a(cond.expr, a, c, env), 0)))
            if self.spec.second_execution_check and self._reads_simple_assignment(a, cond.expr):
                # state of the second execution: one increment applied, simple assignments done
                part.add(role, F.implies(_gt(c, 1), F.cmp(
                    cond.op, psi_sub_a(cond.expr, a, c, env, executions_before=F.num(1)), 0)))

    def _reads_simple_assignment(self, a: Action, psi: LinearExpr) -> bool:
        cls = self.classes[a.name]
        return any(isinstance(cls.get(x), SimpleAssignment) for x in psi.variables())

    @staticmethod
    def _bool_pre(a: Action, env) -> Term:
        return F.and_(*(env[c.var] if c.value else F.not_(env[c.var]) for c in a.pre if isinstance(c, BoolCond)))

    def _rolled(self, part: StepPart, i: int, A, X, Xn) -> None:
        role = f"{i}:"
        for j, a in enumerate(self.actions):
            c = A[j]
            rolls = self.eligible[a.name]
            part.add(role + "pre", F.implies(_gt(c, 0), self._bool_pre(a, X)))
            self._numeric_pre(part, role + "pre", a, c, X, rolled=rolls)
            effs = []
            for v, cls in self.classes[a.name].items():
                if isinstance(cls, BooleanAssignment):
                    effs.append(Xn[v] if cls.value else F.not_(Xn[v]))
                elif isinstance(cls, LinearIncrement):
                    delta = lin(cls.delta, X)
                    # a non-rolling action has multiplicity 1 whenever the guard holds
                    inc = F.mul(c, delta) if rolls else delta
                    effs.append(F.cmp("=", Xn[v], F.add(X[v], inc)))
                else:
                    effs.append(F.cmp("=", Xn[v], lin(cls.rhs, X)))
            if effs:
                part.add(role + "eff", F.implies(_gt(c, 0), F.and_(*effs)))
        for v in self.p.variables:
            idle = F.and_(*(_is0(A[j]) for j in self.assigners[v]))
            part.add(role + "frame", F.implies(idle, F.eq(Xn[v], X[v])))
        for j1, j2 in self.mutexes:
            part.add(role + "mutex", F.or_(_is0(A[j1]), _is0(A[j2])))
        for j, a in enumerate(self.actions):
            if not self.eligible[a.name]:
                part.add(role + "amo", F.or_(_is0(A[j]), _is1(A[j])))

    def _r2e(self, part: StepPart, i: int, A, X, Xn) -> None:
        role = f"{i}:"
        cur: dict[str, Term] = dict(X)
        for name in self.order:
            j = self.act_index[name]
            a = self.actions[j]
            c = A[j]
            pre = [self._bool_pre(a, cur)]
            pre += [F.cmp(cond.op, lin(cond.expr, cur), 0) for cond in a.pre if isinstance(cond, NumCond)]
            part.add(role + "pre", F.implies(c, F.and_(*pre)))
            if not a.eff:
                continue
            on, off, nxt = [], [], {}
            for e in a.eff:
                o = VarOrigin("chain", i, var=self.var_index[e.var], index=j)
                d = VarDecl(F.mangle(o), Sort.BOOL if self.p.is_bool(e.var) else Sort.REAL, o,
                            f"{e.var}^{name} @{i}")
                part.decls.append(d)
                ch = d.term
                if isinstance(e, BoolEffect):
                    on.append(ch if e.value else F.not_(ch))
                else:
                    on.append(F.cmp("=", ch, lin(e.expr, cur)))
                off.append(F.eq(ch, cur[e.var]))
                nxt[e.var] = ch
            part.add(role + "eff", F.implies(c, F.and_(*on)))
            part.add(role + "eff", F.implies(F.not_(c), F.and_(*off)))
            cur.update(nxt)
        for v in self.p.variables:
            part.add(role + "frame", F.eq(Xn[v], cur[v]))

    def _pattern(self, part: StepPart, i: int, A, X, Xn) -> None:
        role = f"{i}:"
        sigma: dict[str, Term] = dict(X)
        for k, name in enumerate(self.pattern):
            sigma = self._pattern_occurrence(part, role, i, k, name, A[k], sigma)
        for v in self.p.variables:
            part.add(role + "frame", F.eq(Xn[v], sigma[v]))

    def _pattern_occurrence(self, part: StepPart, role: str, i: int, k: int, name: str, c: Var,
                            sigma: dict[str, Term]) -> dict[str, Term]:
        a = self.actions[self.act_index[name]]
        rolls = self.eligible[name]
        part.add(role + "pre", F.implies(_gt(c, 0), self._bool_pre(a, sigma)))
        self._numeric_pre(part, role + "pre", a, c, sigma, rolled=rolls)
        if not rolls:
            part.add(role + "amo", F.or_(_is0(c), _is1(c)))
        nxt = dict(sigma)
        for v, cls in self.classes[name].items():
            if isinstance(cls, BooleanAssignment):
                nxt[v] = F.or_(sigma[v], _gt(c, 0)) if cls.value else F.and_(sigma[v], _is0(c))
            elif isinstance(cls, LinearIncrement):
                delta = lin(cls.delta, sigma)
                if rolls or isinstance(delta, F.Const):
                    nxt[v] = F.add(sigma[v], F.mul(c, delta))
                else:
                    nxt[v] = F.add(sigma[v], F.ite(_gt(c, 0), delta, F.num(0)))
            else:
                o = VarOrigin("aux", i, var=self.var_index[v], index=k)
                d = VarDecl(F.mangle(o), Sort.REAL, o, f"{v}^{name}#{k} @{i}")
                part.decls.append(d)
                aux = d.term
                part.add(role + "eff", F.implies(_is0(c), F.cmp("=", aux, sigma[v])))
                part.add(role + "eff", F.implies(_gt(c, 0), F.cmp("=", aux, lin(cls.rhs, sigma))))
                nxt[v] = aux
        return nxt

    def sigma(self, prefix: Sequence[str], v: str, step: int = 0) -> Term:
        """Symbolic value of ``v`` after executing ``prefix`` of the pattern at ``step``.

        Occurrence ``k`` of the prefix uses the action variable of pattern
        position ``k``, so ``prefix`` must be an initial segment of the
        encoder's pattern (or any sequence when used on its own).
        """
        scratch = StepPart()
        sigma: dict[str, Term] = dict(self.state_vars(step))
        for k, name in enumerate(prefix):
            c = VarDecl(F.mangle(VarOrigin("action", step, index=k)), Sort.INT).term
            sigma = self._pattern_occurrence(scratch, "", step, k, name, c, sigma)
        return sigma[v]


def encode_init(p: Problem) -> list[Term]:
    enc = Encoder(p, EncodingSpec("standard"))
    return [t for _, t in enc.init_part().assertions]


def encode_goal(p: Problem, step: int) -> list[Term]:
    return Encoder(p, EncodingSpec("standard")).goal_terms(step)


def encode_step(p: Problem, spec: EncodingSpec, i: int = 0) -> StepPart:
    return Encoder(p, spec).step_part(i)


def assemble_bound(p: Problem, spec: EncodingSpec, n: int, encoder: Encoder | None = None) -> EncodedBound:
    if n < 0:
        raise EncodingError("bound must be non-negative")
    enc = encoder or Encoder(p, spec)
    init = enc.init_part()
    decls = list(init.decls)
    assertions = list(init.assertions)
    order = []
    for i in range(n):
        part = enc.step_part(i)
        decls.extend(part.decls)
        assertions.extend(part.assertions)
        order.append(enc.decode_entries(i))
    assertions.extend(("goal", t) for t in enc.goal_terms(n))
    return EncodedBound(n, spec, decls, assertions, order)


def decode(model: F.Model, decode_order: list[list[tuple[str, str]]]) -> tuple[Plan, list[list[tuple[str, int]]]]:
    """Plan from a model: per step, the occurrences in decode order with their multiplicities."""
    steps: list[tuple[str, int]] = []
    per_step = []
    for entries in decode_order:
        chosen = []
        for name, var in entries:
            v = model.get(var, 0)
            k = (1 if v else 0) if isinstance(v, bool) else int(v)
            if k < 0:
                raise DecodeSoundnessError(f"negative multiplicity {k} for {var}")
            if k > 0:
                chosen.append((name, k))
        per_step.append(chosen)
        steps.extend(chosen)
    return Plan(tuple(steps)), per_step


def check_decoded(p: Problem, encoded: EncodedBound, model: F.Model, plan: Plan,
                  per_step: list[list[tuple[str, int]]]) -> None:
    """Raise DecodeSoundnessError unless the plan is valid and replays the model's states."""
    report = validate_plan(p, plan)
    if not report.valid:
        raise DecodeSoundnessError(f"decoded plan is invalid at step {report.failing_step}: "
                                   f"{report.failing_condition} {report.unmet_goals}")
    idx = {v: i for i, v in enumerate(p.variables)}
    s: State = p.init
    for i, chosen in enumerate(per_step):
        for name, k in chosen:
            a = p.action(name)
            for _ in range(k):
                s = apply(s, a)
        for v in p.variables:
            mangled = F.mangle(VarOrigin("state", i + 1, var=idx[v]))
            if mangled in model.defaulted or mangled not in model.values:
                continue
            got = model.values[mangled]
            if got != s[v] or isinstance(got, bool) != isinstance(s[v], bool):
                raise DecodeSoundnessError(f"step {i}: model says {v}={got}, replay gives {s[v]}")
