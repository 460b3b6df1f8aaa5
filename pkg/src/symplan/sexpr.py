"""Minimal s-expression reader with source positions.

Used for PDDL files and for SMT-LIB solver output. Atoms are returned as
:class:`Atom` (a ``str`` subclass carrying line/column), lists as Python lists.
"""
from __future__ import annotations


class SExprError(Exception):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{msg} (line {line}, column {col})")
        self.line = line
        self.col = col


class Atom(str):
    line: int
    col: int
    quoted: bool

    def __new__(cls, text: str, line: int = 0, col: int = 0, quoted: bool = False):
        obj = super().__new__(cls, text)
        obj.line = line
        obj.col = col
        obj.quoted = quoted
        return obj


class Lst(list):
    line: int = 0
    col: int = 0


def _tokens(text: str, lower: bool):
    i, n = 0, len(text)
    line, col = 1, 1

    def advance(upto: int):
        nonlocal i, line, col
        chunk = text[i:upto]
        nl = chunk.count("\n")
        if nl:
            line += nl
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        i = upto

    while i < n:
        c = text[i]
        if c.isspace():
            advance(i + 1)
        elif c == ";":
            j = text.find("\n", i)
            advance(n if j < 0 else j)
        elif c in "()":
            yield c, line, col
            advance(i + 1)
        elif c == '"':
            j = i + 1
            buf = []
            while True:
                if j >= n:
                    raise SExprError("unterminated string", line, col)
                if text[j] == '"':
                    if j + 1 < n and text[j + 1] == '"':
                        buf.append('"')
                        j += 2
                        continue
                    break
                buf.append(text[j])
                j += 1
            yield Atom("".join(buf), line, col, quoted=True), line, col
            advance(j + 1)
        elif c == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise SExprError("unterminated quoted symbol", line, col)
            yield Atom(text[i + 1:j], line, col, quoted=True), line, col
            advance(j + 1)
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in '();"|':
                j += 1
            word = text[i:j]
            yield Atom(word.lower() if lower else word, line, col), line, col
            advance(j)


def parse_all(text: str, lower: bool = False) -> list:
    """Parse every top-level expression in ``text``."""
    stack: list[Lst] = []
    out: list = []
    for tok, line, col in _tokens(text, lower):
        if tok == "(" and not isinstance(tok, Atom):
            lst = Lst()
            lst.line, lst.col = line, col
            stack.append(lst)
        elif tok == ")" and not isinstance(tok, Atom):
            if not stack:
                raise SExprError("unexpected ')'", line, col)
            done = stack.pop()
            (stack[-1] if stack else out).append(done)
        else:
            (stack[-1] if stack else out).append(tok)
    if stack:
        raise SExprError("unbalanced '('", stack[-1].line, stack[-1].col)
    return out


def parse_one(text: str, lower: bool = False):
    exprs = parse_all(text, lower)
    if len(exprs) != 1:
        raise SExprError(f"expected one expression, found {len(exprs)}", 1, 1)
    return exprs[0]


def position(x) -> tuple[int, int]:
    return getattr(x, "line", 0), getattr(x, "col", 0)
