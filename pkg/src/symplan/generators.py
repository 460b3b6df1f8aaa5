"""Benchmark instance generators (PDDL text).

TwoRobots(X, Q)
    Two robots on a line, the left one at -X and the right one at X. The
    left robot holds Q items that must end up with the right robot. They
    meet, connect, exchange items at a rate ``q`` (which may be set to 1 or
    -1), disconnect and go back to where they started.

LineExchange(N, D, Q)
    N robots r1..rN on a line. Robot ri moves in steps of 1 inside its own
    segment [(i-1)D, iD] and starts at the left end of it, so neighbours can
    only meet at the shared endpoint. Adjacent robots connect when they are
    at the same position; a robot taking part in a connection cannot move or
    connect to its other neighbour. A connected pair exchanges items at its
    own rate (1 or -1, initially 1). r1 starts with all Q items; the goal is
    to transfer them all to rN.
"""
from __future__ import annotations

from dataclasses import dataclass


class GeneratorError(ValueError):
    pass


@dataclass(frozen=True)
class BenchmarkSpec:
    family: str
    params: tuple[int, ...]

    def __post_init__(self):
        arity = {"two-robots": 2, "line-exchange": 3}
        if self.family not in arity:
            raise GeneratorError(f"unknown family {self.family!r}")
        if len(self.params) != arity[self.family]:
            raise GeneratorError(f"{self.family} takes {arity[self.family]} parameters")
        if any(not isinstance(k, int) or k < 1 for k in self.params):
            raise GeneratorError("parameters must be positive integers")
        if self.family == "line-exchange" and self.params[0] < 2:
            raise GeneratorError("line-exchange needs at least 2 robots")

    @property
    def name(self) -> str:
        return f"{self.family}-" + "-".join(map(str, self.params))

    def generate(self) -> tuple[str, str]:
        if self.family == "two-robots":
            return two_robots(*self.params)
        return line_exchange(*self.params)


TWO_ROBOTS_DOMAIN = """\
(define (domain two-robots)
  (:requirements :fluents :negative-preconditions)
  (:predicates (p))
  (:functions (x_l) (x_r) (q_l) (q_r) (q))
  (:action lft_r
    :parameters ()
    :precondition (> (x_r) 0)
    :effect (decrease (x_r) 1))
  (:action rgt_r
    :parameters ()
    :precondition (not (p))
    :effect (increase (x_r) 1))
  (:action lft_l
    :parameters ()
    :precondition (not (p))
    :effect (decrease (x_l) 1))
  (:action rgt_l
    :parameters ()
    :precondition (< (x_l) 0)
    :effect (increase (x_l) 1))
  (:action conn
    :parameters ()
    :precondition (= (x_l) (x_r))
    :effect (p))
  (:action disc
    :parameters ()
    :precondition (p)
    :effect (not (p)))
  (:action exch
    :parameters ()
    :precondition (and (p) (>= (q_l) (q)) (>= (q_r) (- (q))))
    :effect (and (decrease (q_l) (q)) (increase (q_r) (q))))
  (:action lre
    :parameters ()
    :effect (assign (q) 1))
  (:action rle
    :parameters ()
    :effect (assign (q) -1)))
"""


def two_robots(x_i: int, q: int) -> tuple[str, str]:
    problem = f"""\
(define (problem two-robots-{x_i}-{q})
  (:domain two-robots)
  (:init (= (x_l) {-x_i}) (= (x_r) {x_i}) (= (q_l) {q}) (= (q_r) 0) (= (q) 1))
  (:goal (and (= (q_l) 0) (= (q_r) {q}) (= (x_l) {-x_i}) (= (x_r) {x_i}))))
"""
    return TWO_ROBOTS_DOMAIN, problem


LINE_EXCHANGE_DOMAIN = """\
(define (domain line-exchange)
  (:requirements :typing :fluents :negative-preconditions)
  (:types robot)
  (:predicates (adj ?a ?b - robot) (connected ?a ?b - robot) (busy ?r - robot))
  (:functions (x ?r - robot) (lo ?r - robot) (hi ?r - robot) (items ?r - robot) (rate ?a ?b - robot))
  (:action left
    :parameters (?r - robot)
    :precondition (and (not (busy ?r)) (> (x ?r) (lo ?r)))
    :effect (decrease (x ?r) 1))
  (:action right
    :parameters (?r - robot)
    :precondition (and (not (busy ?r)) (< (x ?r) (hi ?r)))
    :effect (increase (x ?r) 1))
  (:action conn
    :parameters (?a ?b - robot)
    :precondition (and (adj ?a ?b) (not (busy ?a)) (not (busy ?b)) (= (x ?a) (x ?b)))
    :effect (and (connected ?a ?b) (busy ?a) (busy ?b)))
  (:action disc
    :parameters (?a ?b - robot)
    :precondition (connected ?a ?b)
    :effect (and (not (connected ?a ?b)) (not (busy ?a)) (not (busy ?b))))
  (:action forward
    :parameters (?a ?b - robot)
    :precondition (adj ?a ?b)
    :effect (assign (rate ?a ?b) 1))
  (:action backward
    :parameters (?a ?b - robot)
    :precondition (adj ?a ?b)
    :effect (assign (rate ?a ?b) -1))
  (:action exch
    :parameters (?a ?b - robot)
    :precondition (and (connected ?a ?b) (>= (items ?a) (rate ?a ?b)) (>= (items ?b) (- (rate ?a ?b))))
    :effect (and (decrease (items ?a) (rate ?a ?b)) (increase (items ?b) (rate ?a ?b)))))
"""


def line_exchange(n: int, d: int, q: int) -> tuple[str, str]:
    robots = [f"r{i}" for i in range(1, n + 1)]
    init = []
    for i, r in enumerate(robots):
        init.append(f"(= (x {r}) {i * d}) (= (lo {r}) {i * d}) (= (hi {r}) {(i + 1) * d})")
        init.append(f"(= (items {r}) {q if i == 0 else 0})")
    for a, b in zip(robots, robots[1:]):
        init.append(f"(adj {a} {b}) (= (rate {a} {b}) 1)")
    body = "\n    ".join(init)
    problem = f"""\
(define (problem line-exchange-{n}-{d}-{q})
  (:domain line-exchange)
  (:objects {' '.join(robots)} - robot)
  (:init
    {body})
  (:goal (= (items {robots[-1]}) {q})))
"""
    return LINE_EXCHANGE_DOMAIN, problem
