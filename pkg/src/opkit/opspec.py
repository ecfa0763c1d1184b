"""Parser and builder for the small operator-expression language used by the CLI.

Grammar::

    spec  := leaf | adjoint(spec) | chain(spec, spec) | sum(spec, spec)
           | scale(real, spec) | vstack(spec, ...)
    leaf  := identity | diagonal | restriction | deriv1 | deriv2 | dft | broken-demo

Leaves carry no sizes. Building walks the tree with a single size
constraint: the root must have ``ncols == n``; in ``chain(A, B)`` the left
operator is sized to consume ``B``'s output; ``adjoint(S)`` turns a column
constraint into a row constraint on ``S`` and vice versa.
"""

import re
from dataclasses import dataclass, field
from typing import List, Union

import numpy as np

from opkit.core import make_adjoint, make_compose, make_scale, make_sum, make_vstack
from opkit.ops import DFT, Diagonal, FirstDerivative, Identity, Restriction, SecondDerivative
from opkit.testing import BrokenFirstDerivative

__all__ = ["OpSpecError", "BuildContext", "parse_opspec", "build_opspec", "LEAVES"]

LEAVES = ("identity", "diagonal", "restriction", "deriv1", "deriv2", "dft", "broken-demo")
COMBINATORS = {"adjoint": 1, "chain": 2, "sum": 2, "scale": 2, "vstack": None}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_-]*)|(?P<punct>[(),]))"
)


class OpSpecError(ValueError):
    """Malformed or unknown operator expression."""


@dataclass
class Node:
    name: str
    args: List[Union["Node", float]] = field(default_factory=list)


def _tokenize(text):
    pos, tokens = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise OpSpecError(f"unexpected character {text[pos]!r} at position {pos} in {text!r}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            want = value or "a token"
            raise OpSpecError(f"expected {want!r} in {self.text!r}, got {tok[1]!r}")
        self.i += 1
        return tok

    def spec(self):
        kind, name = self.take()
        if kind != "name":
            raise OpSpecError(f"expected an operator name in {self.text!r}, got {name!r}")
        name = name.lower()
        if name in LEAVES:
            return Node(name)
        if name not in COMBINATORS:
            raise OpSpecError(
                f"unknown operator {name!r}; known: {', '.join(LEAVES + tuple(COMBINATORS))}"
            )
        self.take("(")
        args = []
        if name == "scale":
            kind, value = self.take()
            if kind != "num":
                raise OpSpecError(f"scale expects a real number first, got {value!r}")
            args.append(float(value))
            self.take(",")
        args.append(self.spec())
        while self.peek()[1] == ",":
            self.take(",")
            args.append(self.spec())
        self.take(")")
        arity = COMBINATORS[name]
        if arity is not None and len(args) != arity:
            raise OpSpecError(f"{name} takes {arity} argument(s), got {len(args)}")
        return Node(name, args)

    def parse(self):
        node = self.spec()
        if self.peek()[0] is not None:
            raise OpSpecError(f"trailing input {self.peek()[1]!r} in {self.text!r}")
        return node


def parse_opspec(text):
    """Parse an expression string into a tree of :class:`Node`."""
    if not text or not text.strip():
        raise OpSpecError("empty operator expression")
    return _Parser(text).parse()


@dataclass
class BuildContext:
    n: int = 64
    fraction: float = 0.25
    indices_seed: int = 0
    seed: int = 0
    dx: float = 1.0


def _leaf(name, ctx, cols=None, rows=None):
    size = cols if cols is not None else rows
    if name in ("identity", "diagonal", "dft"):
        if name == "identity":
            return Identity(size)
        if name == "dft":
            return DFT(size)
        rng = np.random.default_rng(ctx.seed)
        return Diagonal(rng.standard_normal(size) + 1j * rng.standard_normal(size))
    if name == "restriction":
        if cols is not None:
            m, k = cols, max(int(np.floor(ctx.fraction * cols)), 1)
        else:
            k, m = rows, max(rows, int(np.ceil(rows / ctx.fraction)))
        rng = np.random.default_rng(ctx.indices_seed)
        return Restriction(m, np.sort(rng.choice(m, k, replace=False)))
    offset = 2 if name == "deriv2" else 1
    n = cols if cols is not None else rows + offset
    if name == "deriv1":
        return FirstDerivative(n, ctx.dx)
    if name == "deriv2":
        return SecondDerivative(n, ctx.dx)
    return BrokenFirstDerivative(n, ctx.dx)


def _build(node, ctx, cols=None, rows=None):
    name = node.name
    if name in LEAVES:
        return _leaf(name, ctx, cols, rows)
    if name == "adjoint":
        return make_adjoint(_build(node.args[0], ctx, cols=rows, rows=cols))
    if name == "scale":
        return make_scale(node.args[0], _build(node.args[1], ctx, cols, rows))
    if name == "sum":
        return make_sum(_build(node.args[0], ctx, cols, rows), _build(node.args[1], ctx, cols, rows))
    if name == "chain":
        left, right = node.args
        if cols is not None:
            r = _build(right, ctx, cols=cols)
            return make_compose(_build(left, ctx, cols=r.nrows), r)
        lop = _build(left, ctx, rows=rows)
        return make_compose(lop, _build(right, ctx, rows=lop.ncols))
    if name == "vstack":
        if cols is None:
            raise OpSpecError("vstack cannot be sized from its output length; avoid adjoint(vstack(...))")
        return make_vstack([_build(a, ctx, cols=cols) for a in node.args])
    raise OpSpecError(f"unknown operator {name!r}")


def build_opspec(spec, ctx=None):
    """Parse ``spec`` (if a string) and build the operator with ``ncols == ctx.n``.

    Shape incompatibilities surface as :class:`opkit.exceptions.DimensionError`.
    """
    ctx = ctx or BuildContext()
    node = parse_opspec(spec) if isinstance(spec, str) else spec
    return _build(node, ctx, cols=ctx.n)
