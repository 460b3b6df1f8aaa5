"""Bound-deepening planning loop over an external SMT solver.

The solver is any program that reads SMT-LIB v2 on stdin and answers on
stdout (``z3 -in -smt2`` by default). Each bound is either a fresh
process (one self-contained query, the same text ``--dump-smt`` writes) or,
with ``incremental``, one long-lived process fed the transition steps once
and the goal inside ``push``/``pop``.
"""
from __future__ import annotations

import logging
import queue
import shlex
import subprocess
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from . import formula as F
from .encoders import DecodeSoundnessError, EncodedBound, Encoder, EncodingSpec, assemble_bound, check_decoded, decode
from .formula import Model, SolverProtocolError, Unknown, Unsat
from .model import Plan, Problem

log = logging.getLogger(__name__)

DEFAULT_SOLVER_CMD = "z3 -in -smt2"
_END = "symplan-end-of-answer"


class SolverSpawnError(SolverProtocolError):
    pass


@dataclass
class SolverConfig:
    command: str = DEFAULT_SOLVER_CMD
    timeout: float | None = None  # seconds per query
    incremental: bool = False
    on_unknown: str = "continue"  # or "abort"
    on_timeout: str = "abort"  # or "continue"
    schedule: str = "linear"  # or "geometric"
    start_bound: int = 1
    dump_dir: Path | None = None
    validate: bool = True

    def argv(self) -> list[str]:
        return shlex.split(self.command)


@dataclass
class RawAnswer:
    verdict: str  # sat, unsat, unknown, timeout
    output: str
    seconds: float


def _verdict(output: str) -> str:
    for line in output.splitlines():
        line = line.strip()
        if line:
            return line if line in ("sat", "unsat", "unknown") else "error"
    return "error"


def run_query(cfg: SolverConfig, text: str) -> RawAnswer:
    """Run one self-contained query in a fresh solver process."""
    t0 = time.monotonic()
    try:
        proc = subprocess.run(cfg.argv(), input=text, capture_output=True, text=True, timeout=cfg.timeout)
    except subprocess.TimeoutExpired as e:
        out = e.stdout.decode() if isinstance(e.stdout, bytes) else (e.stdout or "")
        return RawAnswer("timeout", out, time.monotonic() - t0)
    except OSError as e:
        raise SolverSpawnError(f"cannot start solver {cfg.command!r}: {e}") from None
    dt = time.monotonic() - t0
    verdict = _verdict(proc.stdout)
    if verdict == "error":
        raise SolverProtocolError(f"solver exited with {proc.returncode}: {(proc.stderr or proc.stdout).strip()[:500]}",
                                  proc.stdout)
    return RawAnswer(verdict, proc.stdout, dt)


class SolverSession:
    """A long-lived solver process driven line by line."""

    def __init__(self, cfg: SolverConfig):
        self.cfg = cfg
        try:
            self.proc = subprocess.Popen(cfg.argv(), stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                         stderr=subprocess.DEVNULL, text=True, bufsize=1)
        except OSError as e:
            raise SolverSpawnError(f"cannot start solver {cfg.command!r}: {e}") from None
        self.lines: queue.Queue = queue.Queue()
        threading.Thread(target=self._pump, daemon=True).start()

    def _pump(self) -> None:
        for line in self.proc.stdout:
            self.lines.put(line)
        self.lines.put(None)

    def send(self, text: str) -> None:
        try:
            self.proc.stdin.write(text)
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as e:
            raise SolverProtocolError(f"solver closed its input: {e}") from None

    def _read_until_end(self, deadline: float | None) -> str | None:
        out = []
        while True:
            wait = None if deadline is None else max(0.0, deadline - time.monotonic())
            try:
                line = self.lines.get(timeout=wait)
            except queue.Empty:
                return None
            if line is None:
                raise SolverProtocolError("solver terminated unexpectedly", "".join(out))
            if line.strip() == _END:
                return "".join(out)
            out.append(line)

    def check(self, want_model: bool = True) -> RawAnswer:
        t0 = time.monotonic()
        deadline = None if self.cfg.timeout is None else t0 + self.cfg.timeout
        self.send(f'(check-sat)\n(echo "{_END}")\n')
        out = self._read_until_end(deadline)
        if out is None:
            self.close()
            return RawAnswer("timeout", "", time.monotonic() - t0)
        verdict = _verdict(out)
        if verdict == "error":
            raise SolverProtocolError(f"unexpected solver answer {out.strip()[:500]!r}", out)
        if verdict == "sat" and want_model:
            self.send(f'(get-model)\n(echo "{_END}")\n')
            more = self._read_until_end(deadline)
            if more is None:
                self.close()
                return RawAnswer("timeout", out, time.monotonic() - t0)
            out += more
        return RawAnswer(verdict, out, time.monotonic() - t0)

    def close(self) -> None:
        if self.proc.poll() is None:
            self.proc.kill()
        self.proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


@dataclass
class FoundPlan:
    plan: Plan
    bound: int


@dataclass
class ExhaustedBound:
    max_bound: int


@dataclass
class Timeout:
    bound: int


@dataclass
class UnknownVerdict:
    bound: int


Outcome = Union[FoundPlan, ExhaustedBound, Timeout, UnknownVerdict]


@dataclass
class PlanResult:
    outcome: Outcome
    stats: list[dict] = field(default_factory=list)

    @property
    def plan(self) -> Plan | None:
        return self.outcome.plan if isinstance(self.outcome, FoundPlan) else None

    @property
    def exit_code(self) -> int:
        if isinstance(self.outcome, FoundPlan):
            return 0
        if isinstance(self.outcome, ExhaustedBound):
            return 1
        return 3

    def to_json(self) -> dict:
        o = self.outcome
        d: dict = {"outcome": {FoundPlan: "plan", ExhaustedBound: "exhausted", Timeout: "timeout",
                               UnknownVerdict: "unknown"}[type(o)]}
        if isinstance(o, FoundPlan):
            d["bound"] = o.bound
            d["plan_length"] = len(o.plan)
        elif isinstance(o, ExhaustedBound):
            d["max_bound"] = o.max_bound
        else:
            d["bound"] = o.bound
        d["bounds"] = self.stats
        return d


def bound_schedule(start: int, max_bound: int, schedule: str = "linear"):
    n = start
    while n <= max_bound:
        yield n
        if schedule == "geometric":
            n = max(n + 1, 2 * n)
        elif schedule == "linear":
            n += 1
        else:
            raise ValueError(f"unknown schedule {schedule!r}")


def solve(p: Problem, spec: EncodingSpec, max_bound: int, cfg: SolverConfig | None = None) -> PlanResult:
    """Try bounds ``start_bound..max_bound`` until one is satisfiable."""
    cfg = cfg or SolverConfig()
    if max_bound < 0:
        raise ValueError("max_bound must be non-negative")
    enc = Encoder(p, spec)
    if cfg.dump_dir is not None:
        Path(cfg.dump_dir).mkdir(parents=True, exist_ok=True)
    if cfg.incremental:
        return _solve_incremental(p, enc, max_bound, cfg)
    result = PlanResult(ExhaustedBound(max_bound))
    for n in bound_schedule(cfg.start_bound, max_bound, cfg.schedule):
        eb = assemble_bound(p, spec, n, encoder=enc)
        text = eb.to_smtlib(header=[f"{p.name} encoding={spec.kind} bound={n}"])
        if cfg.dump_dir is not None:
            (Path(cfg.dump_dir) / f"bound_{n}.smt2").write_text(text)
        ans = run_query(cfg, text)
        stop = _record(p, eb, ans, cfg, result)
        if stop is not None:
            result.outcome = stop
            return result
    return result


def _record(p: Problem, eb: EncodedBound, ans: RawAnswer, cfg: SolverConfig, result: PlanResult) -> Outcome | None:
    n = eb.bound
    entry = dict(eb.stats())
    entry["verdict"] = ans.verdict
    entry["seconds"] = round(ans.seconds, 4)
    result.stats.append(entry)
    log.info("bound %d: %s (%.3fs, %d vars, %d assertions)", n, ans.verdict, ans.seconds,
             entry["num_vars"], entry["num_assertions"])
    if ans.verdict == "timeout":
        return Timeout(n) if cfg.on_timeout == "abort" else None
    if ans.verdict == "unknown":
        return UnknownVerdict(n) if cfg.on_unknown == "abort" else None
    if ans.verdict == "unsat":
        return None
    model = F.parse_model(ans.output, eb.decls)
    if not isinstance(model, Model):
        raise SolverProtocolError("sat verdict but no model", ans.output)
    plan, per_step = decode(model, eb.decode_order)
    if cfg.validate:
        check_decoded(p, eb, model, plan, per_step)
    return FoundPlan(plan, n)


def _solve_incremental(p: Problem, enc: Encoder, max_bound: int, cfg: SolverConfig) -> PlanResult:
    result = PlanResult(ExhaustedBound(max_bound))
    probe = assemble_bound(p, enc.spec, 1, encoder=enc)
    logic = F.choose_logic(probe.decls, [t for _, t in probe.assertions])
    session = SolverSession(cfg)
    try:
        init = enc.init_part()
        decls = list(init.decls)
        base = list(init.assertions)
        order: list = []
        session.send(_chunk(init.decls, init.assertions, prelude=["(set-option :produce-models true)",
                                                                   f"(set-logic {logic})"]))
        sent_steps = 0
        for n in bound_schedule(cfg.start_bound, max_bound, cfg.schedule):
            while sent_steps < n:
                part = enc.step_part(sent_steps)
                session.send(_chunk(part.decls, part.assertions))
                decls.extend(part.decls)
                base.extend(part.assertions)
                order.append(enc.decode_entries(sent_steps))
                sent_steps += 1
            goal = [("goal", t) for t in enc.goal_terms(n)]
            eb = EncodedBound(n, enc.spec, list(decls), base + goal, list(order))
            if cfg.dump_dir is not None:
                text = eb.to_smtlib(header=[f"{p.name} encoding={enc.spec.kind} bound={n}"])
                (Path(cfg.dump_dir) / f"bound_{n}.smt2").write_text(text)
            session.send("(push 1)\n" + _chunk([], goal))
            ans = session.check()
            if ans.verdict == "timeout":
                _record(p, eb, ans, cfg, result)
                result.outcome = Timeout(n)  # the session is gone; cannot continue incrementally
                return result
            session.send("(pop 1)\n")
            stop = _record(p, eb, ans, cfg, result)
            if stop is not None:
                result.outcome = stop
                return result
        return result
    finally:
        session.close()


@dataclass
class BoundVerdict:
    bound: int
    verdict: str
    plan: Plan | None = None


def probe_bounds(p: Problem, spec: EncodingSpec, bounds, cfg: SolverConfig | None = None) -> list[BoundVerdict]:
    """Verdict of every bound in ``bounds`` (ascending) using incremental sessions.

    Unlike :func:`solve` this does not stop at the first satisfiable bound.
    Every model is decoded and checked (DecodeSoundnessError on failure). A
    timed-out query kills its session; the next bound starts a fresh one.
    """
    cfg = cfg or SolverConfig()
    enc = Encoder(p, spec)
    probe = assemble_bound(p, spec, 1, encoder=enc)
    prelude = ["(set-option :produce-models true)",
               f"(set-logic {F.choose_logic(probe.decls, [t for _, t in probe.assertions])})"]
    init = enc.init_part()
    decls, base, order, chunks = list(init.decls), list(init.assertions), [], [_chunk(init.decls, init.assertions)]
    out: list[BoundVerdict] = []
    session: SolverSession | None = None
    sent = 0
    try:
        for n in bounds:
            while len(chunks) <= n:
                i = len(chunks) - 1
                part = enc.step_part(i)
                chunks.append(_chunk(part.decls, part.assertions))
                decls.extend(part.decls)
                base.extend(part.assertions)
                order.append(enc.decode_entries(i))
            if session is None:
                session = SolverSession(cfg)
                session.send("\n".join(prelude) + "\n")
                sent = 0
            while sent <= n:
                session.send(chunks[sent])
                sent += 1
            goal = [("goal", t) for t in enc.goal_terms(n)]
            session.send("(push 1)\n" + _chunk([], goal))
            ans = session.check()
            if ans.verdict == "timeout":
                out.append(BoundVerdict(n, "timeout"))
                session = None
                continue
            session.send("(pop 1)\n")
            plan = None
            if ans.verdict == "sat":
                # bounds ascend, so the steps built so far are exactly 0..n-1
                eb = EncodedBound(n, spec, decls[:], base + goal, order[:])
                model = F.parse_model(ans.output, eb.decls)
                plan, per_step = decode(model, eb.decode_order)
                check_decoded(p, eb, model, plan, per_step)
            out.append(BoundVerdict(n, ans.verdict, plan))
    finally:
        if session is not None:
            session.close()
    return out


def _chunk(decls, assertions, prelude=()) -> str:
    lines = list(prelude)
    lines.extend(F.decl_to_smtlib(d) for d in decls)
    lines.extend(f"(assert {F.term_to_smtlib(t)})" for _, t in assertions)
    return "\n".join(lines) + "\n"


__all__ = ["DEFAULT_SOLVER_CMD", "SolverConfig", "RawAnswer", "run_query", "SolverSession", "FoundPlan",
           "ExhaustedBound", "Timeout", "UnknownVerdict", "PlanResult", "solve", "bound_schedule",
           "SolverSpawnError", "DecodeSoundnessError", "BoundVerdict", "probe_bounds", "Unsat", "Unknown"]
