"""Independent oracles for the test suite.

Nothing here goes through the encoders: plans are found by explicit-state
breadth-first search using only the executable semantics in ``symplan.model``.
"""
from __future__ import annotations

import itertools
import random
from collections import deque
from fractions import Fraction

from symplan.model import (Action, And, BoolCond, BoolEffect, LinearExpr, NumCond, NumEffect, Or, Problem,
                           State, apply, executable)


def bfs_shortest(p: Problem, max_len: int) -> list[str] | None:
    """Shortest sequential plan with at most ``max_len`` actions, or None."""
    if p.goal_holds(p.init):
        return []
    seen = {p.init}
    frontier = deque([(p.init, [])])
    while frontier:
        s, path = frontier.popleft()
        if len(path) >= max_len:
            continue
        for a in p.actions:
            if not executable(s, a):
                continue
            t = apply(s, a)
            if t in seen:
                continue
            if p.goal_holds(t):
                return path + [a.name]
            seen.add(t)
            frontier.append((t, path + [a.name]))
    return None


def _touches(a: Action) -> set[str]:
    return set(a.read_variables()) | set(a.assigned)


def _interfere(a1: Action, a2: Action) -> bool:
    """Written from the definition, separately from analysis.mutex_pairs."""
    for x, y in ((a1, a2), (a2, a1)):
        for c in x.pre:
            if isinstance(c, BoolCond):
                for e in y.eff:
                    if isinstance(e, BoolEffect) and e.var == c.var and e.value != c.value:
                        return True
        for e in x.eff:
            if isinstance(e, NumEffect) and e.var in _touches(y):
                return True
    return False


def parallel_successors(p: Problem, s: State):
    """States reachable by one step of pairwise non-interfering actions executable in ``s``."""
    acts = [a for a in p.actions if executable(s, a)]
    for r in range(1, len(acts) + 1):
        for combo in itertools.combinations(acts, r):
            if any(_interfere(x, y) for x, y in itertools.combinations(combo, 2)):
                continue
            bool_writes: dict[str, bool] = {}
            clash = False
            for a in combo:
                for e in a.eff:
                    if isinstance(e, BoolEffect):
                        if bool_writes.setdefault(e.var, e.value) != e.value:
                            clash = True
            if clash:
                continue
            t = s
            for a in combo:
                t = apply(t, a)
            yield t


def parallel_shortest(p: Problem, max_len: int) -> int | None:
    """Fewest parallel steps (sets of non-interfering actions) reaching the goal."""
    if p.goal_holds(p.init):
        return 0
    seen = {p.init}
    frontier = deque([(p.init, 0)])
    while frontier:
        s, d = frontier.popleft()
        if d >= max_len:
            continue
        for t in parallel_successors(p, s):
            if t in seen:
                continue
            if p.goal_holds(t):
                return d + 1
            seen.add(t)
            frontier.append((t, d + 1))
    return None


# --------------------------------------------------------------------------- #
# random problems: <= 4 variables, <= 4 actions, integer constants in [-3, 3]

K = range(-3, 4)


def _rand_expr(rng: random.Random, nums: list[str], max_vars: int = 2) -> LinearExpr:
    chosen = rng.sample(nums, rng.randint(0, min(max_vars, len(nums)))) if nums else []
    return LinearExpr.make({v: rng.choice([k for k in K if k != 0]) for v in chosen}, rng.choice(K))


def _rand_cond(rng: random.Random, bools: list[str], nums: list[str]):
    if bools and (not nums or rng.random() < 0.4):
        return BoolCond(rng.choice(bools), rng.random() < 0.5)
    e = _rand_expr(rng, nums)
    if e.is_constant():
        e = e + LinearExpr.var(rng.choice(nums))
    return NumCond(e, rng.choice([">=", ">=", ">", "="]))


def _rand_effect(rng: random.Random, v: str, is_bool: bool, nums: list[str]):
    if is_bool:
        return BoolEffect(v, rng.random() < 0.5)
    kind = rng.random()
    if kind < 0.45:  # increment by a constant
        return NumEffect(v, LinearExpr.var(v) + rng.choice([k for k in K if k != 0]))
    if kind < 0.65:  # increment by an expression
        return NumEffect(v, LinearExpr.var(v) + _rand_expr(rng, [w for w in nums if w != v], 1))
    if kind < 0.85:  # assignment
        return NumEffect(v, _rand_expr(rng, nums, 1))
    return NumEffect(v, LinearExpr.var(v).scale(rng.choice([-1, 2])) + rng.choice(K))


def random_problem(rng: random.Random, name: str = "rand") -> Problem:
    n_vars = rng.randint(1, 4)
    n_bool = rng.randint(0, n_vars)
    bools = [f"b{i}" for i in range(n_bool)]
    nums = [f"n{i}" for i in range(n_vars - n_bool)]
    allv = bools + nums
    actions = []
    for j in range(rng.randint(1, 4)):
        pre = []
        for _ in range(rng.randint(0, 2)):
            c = _rand_cond(rng, bools, nums)
            if c not in pre:
                pre.append(c)
        targets = rng.sample(allv, rng.randint(1, min(2, len(allv))))
        eff = tuple(_rand_effect(rng, v, v in bools, nums) for v in targets)
        actions.append(Action(f"a{j}", tuple(pre), eff))
    init = {v: rng.random() < 0.5 for v in bools}
    init.update({v: Fraction(rng.choice(K)) for v in nums})
    goals = []
    for _ in range(rng.randint(1, 2)):
        g = _rand_cond(rng, bools, nums)
        if rng.random() < 0.15:
            g = Or((g, _rand_cond(rng, bools, nums)))
        goals.append(g)
    return Problem(tuple(bools), tuple(nums), tuple(actions), State(init), tuple(goals), name=name)


def random_corpus(seed: int, count: int) -> list[Problem]:
    rng = random.Random(seed)
    return [random_problem(rng, f"rand{seed}_{i}") for i in range(count)]


__all__ = ["bfs_shortest", "parallel_shortest", "parallel_successors", "random_problem", "random_corpus", "And"]
