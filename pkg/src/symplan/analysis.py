"""Static analysis of ground problems.

Effect taxonomy and rolling eligibility, mutex pairs for the rolled-up and
standard encodings, and the asymptotic relaxed planning graph (ARPG) used to
order actions into a pattern.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .model import (Action, BoolCond, BoolEffect, Effect, LinearExpr, NumCond, NumEffect, Problem)

# --------------------------------------------------------------------------- #
# Effect taxonomy


@dataclass(frozen=True)
class BooleanAssignment:
    value: bool


@dataclass(frozen=True)
class LinearIncrement:
    delta: LinearExpr


@dataclass(frozen=True)
class SimpleAssignment:
    rhs: LinearExpr


@dataclass(frozen=True)
class SelfInterfering:
    rhs: LinearExpr


EffectClass = Union[BooleanAssignment, LinearIncrement, SimpleAssignment, SelfInterfering]


def classify_effect(a: Action, e: Effect) -> EffectClass:
    if isinstance(e, BoolEffect):
        return BooleanAssignment(e.value)
    assigned = a.assigned
    rhs = e.expr
    if rhs.coeff(e.var) == 1:
        delta = rhs - LinearExpr.var(e.var)
        if not (delta.variables() & assigned):
            return LinearIncrement(delta)
    if rhs.variables() & assigned:
        return SelfInterfering(rhs)
    return SimpleAssignment(rhs)


def is_general(cls: EffectClass) -> bool:
    return isinstance(cls, (SimpleAssignment, SelfInterfering))


def effect_classes(a: Action) -> dict[str, EffectClass]:
    return {e.var: classify_effect(a, e) for e in a.eff}


def eligible_for_rolling(a: Action) -> bool:
    classes = effect_classes(a)
    for c in a.pre:
        if isinstance(c, BoolCond):
            cls = classes.get(c.var)
            if isinstance(cls, BooleanAssignment) and cls.value != c.value:
                return False
    if any(isinstance(c, SelfInterfering) for c in classes.values()):
        return False
    return any(isinstance(c, LinearIncrement) for c in classes.values())


# --------------------------------------------------------------------------- #
# Mutexes


def _interferes(p: Problem, a1: Action, a2: Action) -> bool:
    """One-directional test: does ``a1`` threaten ``a2``."""
    for c in a1.pre:
        if isinstance(c, BoolCond):
            e = a2.effect_on(c.var)
            if isinstance(e, BoolEffect) and e.value != c.value:
                return True
    touched2 = a2.read_variables() | a2.assigned
    for e in a1.eff:
        if isinstance(e, NumEffect) and e.var in touched2:
            return True
    return False


def mutex_pairs(p: Problem) -> set[frozenset[str]]:
    out: set[frozenset[str]] = set()
    acts = p.actions
    for i, a1 in enumerate(acts):
        for a2 in acts[i + 1:]:
            if _interferes(p, a1, a2) or _interferes(p, a2, a1):
                out.add(frozenset((a1.name, a2.name)))
    return out


def mutex_index_pairs(p: Problem) -> list[tuple[int, int]]:
    """Mutex pairs as sorted ``(i, j)`` action-index pairs, ``i < j``."""
    pairs = mutex_pairs(p)
    idx = {a.name: i for i, a in enumerate(p.actions)}
    return sorted(tuple(sorted(idx[n] for n in pr)) for pr in pairs)


# --------------------------------------------------------------------------- #
# Patterns


@dataclass(frozen=True)
class Pattern:
    occurrences: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.occurrences)

    def __iter__(self):
        return iter(self.occurrences)

    def is_simple(self) -> bool:
        return len(set(self.occurrences)) == len(self.occurrences)

    def is_complete(self, p: Problem) -> bool:
        return {a.name for a in p.actions} <= set(self.occurrences)

    def to_text(self) -> str:
        return "".join(f"{n}\n" for n in self.occurrences)

    @classmethod
    def from_text(cls, text: str) -> "Pattern":
        names = []
        for line in text.splitlines():
            line = line.split(";", 1)[0].strip()
            if line:
                if line.startswith("(") and line.endswith(")"):
                    line = line[1:-1].strip()
                names.append(" ".join(line.split()))
        return cls(tuple(names))

    def __add__(self, other) -> "Pattern":
        if isinstance(other, str):
            return Pattern(self.occurrences + (other,))
        return Pattern(self.occurrences + tuple(other))


# --------------------------------------------------------------------------- #
# ARPG

INF = math.inf
Bound = Union[Fraction, float]  # float only for +-inf


@dataclass(frozen=True)
class Interval:
    lo: Bound
    hi: Bound

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, k) -> "Interval":
        return cls(Fraction(k), Fraction(k))

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def contains(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(_add(self.lo, other.lo, -1), _add(self.hi, other.hi, 1))

    def scale(self, k: Fraction) -> "Interval":
        if k == 0:
            return Interval.point(0)
        a, b = _mul(self.lo, k), _mul(self.hi, k)
        return Interval(min(a, b), max(a, b))

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


def _add(x, y, side):
    if x in (INF, -INF) or y in (INF, -INF):
        return side * INF
    return x + y


def _mul(x, k):
    if x in (INF, -INF):
        return x if k > 0 else -x
    return x * k


def expr_interval(e: LinearExpr, nums: dict[str, Interval]) -> Interval:
    out = Interval.point(e.constant)
    for name, k in e.coeffs:
        out = out + nums[name].scale(k)
    return out


@dataclass(frozen=True)
class IntervalState:
    """Boolean variables map to the set of reachable truth values."""

    bools: tuple[tuple[str, frozenset], ...]
    nums: tuple[tuple[str, Interval], ...]

    @property
    def bool_map(self) -> dict[str, frozenset]:
        return dict(self.bools)

    @property
    def num_map(self) -> dict[str, Interval]:
        return dict(self.nums)

    def contains(self, other: "IntervalState") -> bool:
        ob, on = other.bool_map, other.num_map
        return (all(ob[v] <= s for v, s in self.bools)
                and all(iv.contains(on[v]) for v, iv in self.nums))


def _cond_possible(c, bools: dict, nums: dict) -> bool:
    if isinstance(c, BoolCond):
        return c.value in bools[c.var]
    assert isinstance(c, NumCond)
    iv = expr_interval(c.expr, nums)
    if c.op == ">=":
        return iv.hi >= 0
    if c.op == ">":
        return iv.hi > 0
    return iv.lo <= 0 <= iv.hi


def arpg_layers(p: Problem) -> list[tuple[IntervalState, frozenset[str]]]:
    """State/action layers up to and including the fixpoint layer.

    Linear increments widen the incremented bound to infinity as soon as the
    action is applicable. Other numeric assignments take the hull of the
    right-hand side; a bound that keeps growing through them is widened to
    infinity the second time it grows, so the construction always terminates.
    """
    bools = {v: frozenset((p.init[v],)) for v in p.bool_vars}
    nums = {v: Interval.point(p.init[v]) for v in p.num_vars}
    growth: dict[tuple[str, int], int] = {}
    classes = {a.name: effect_classes(a) for a in p.actions}
    layers: list[tuple[IntervalState, frozenset[str]]] = []
    applicable: frozenset[str] = frozenset()
    while True:
        state = IntervalState(tuple(sorted(bools.items())), tuple(sorted(nums.items())))
        applicable = applicable | frozenset(
            a.name for a in p.actions if all(_cond_possible(c, bools, nums) for c in a.pre))
        layers.append((state, applicable))
        new_bools = dict(bools)
        new_nums = dict(nums)
        assigned_hull: dict[str, Interval] = {}
        for a in p.actions:
            if a.name not in applicable:
                continue
            for var, cls in classes[a.name].items():
                if isinstance(cls, BooleanAssignment):
                    new_bools[var] = new_bools[var] | {cls.value}
                elif isinstance(cls, LinearIncrement):
                    d = expr_interval(cls.delta, nums)
                    cur = new_nums[var]
                    new_nums[var] = Interval(-INF if d.lo < 0 else cur.lo, INF if d.hi > 0 else cur.hi)
                else:
                    rhs = expr_interval(cls.rhs, nums)
                    assigned_hull[var] = assigned_hull[var].hull(rhs) if var in assigned_hull else rhs
        for var, rhs in assigned_hull.items():
            old = nums[var]
            lo, hi = min(old.lo, rhs.lo), max(old.hi, rhs.hi)
            for side, grew in ((-1, lo < old.lo), (1, hi > old.hi)):
                if grew:
                    growth[(var, side)] = growth.get((var, side), 0) + 1
                    if growth[(var, side)] > 1:
                        lo, hi = (-INF, hi) if side < 0 else (lo, INF)
            cur = new_nums[var]
            new_nums[var] = Interval(min(lo, cur.lo), max(hi, cur.hi))
        if new_bools == bools and new_nums == nums:
            next_applicable = applicable | frozenset(
                a.name for a in p.actions if all(_cond_possible(c, bools, nums) for c in a.pre))
            if next_applicable == applicable:
                return layers
        bools, nums = new_bools, new_nums


def arpg_partition(p: Problem) -> tuple[list[list[str]], list[str]]:
    """Actions grouped by the layer where they first appear, plus never-applicable ones."""
    layers = arpg_layers(p)
    seen: set[str] = set()
    blocks: list[list[str]] = []
    for _, acts in layers:
        new = [a.name for a in p.actions if a.name in acts and a.name not in seen]
        if new:
            blocks.append(new)
            seen.update(new)
    rest = [a.name for a in p.actions if a.name not in seen]
    return blocks, rest


def arpg_pattern(p: Problem, seed: int = 0) -> Pattern:
    """Simple, complete pattern ordered by ARPG layer, shuffled within a layer."""
    rng = random.Random(seed)
    blocks, rest = arpg_partition(p)
    out: list[str] = []
    for block in blocks:
        block = list(block)
        rng.shuffle(block)
        out.extend(block)
    out.extend(rest)
    return Pattern(tuple(out))
