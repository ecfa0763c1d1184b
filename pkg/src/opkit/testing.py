"""Helpers for exercising operators: random expression trees and a broken leaf."""

import numpy as np

from opkit.core import (
    DTYPE,
    LinearOperator,
    make_adjoint,
    make_compose,
    make_hstack,
    make_scale,
    make_sum,
    make_vstack,
)
from opkit.ops import (
    DFT,
    Diagonal,
    FirstDerivative,
    Identity,
    MatrixOperator,
    Restriction,
    SecondDerivative,
)

__all__ = [
    "BrokenFirstDerivative",
    "random_composite",
    "random_leaf",
    "random_operator",
    "random_vector",
    "tree_depth",
]


class BrokenFirstDerivative(LinearOperator):
    """Negative control: first-derivative forward with a wrong adjoint.

    The adjoint zero-pads ``y`` to the model length instead of applying the
    transposed stencil, so the dot test must fail.
    """

    def __init__(self, n, dx=1.0):
        super().__init__((n - 1, n))
        self.dx = float(dx)
        self._freeze()

    def _matvec(self, x):
        return (x[1:] - x[:-1]) / self.dx

    def _rmatvec(self, y):
        return np.concatenate([y, [0.0]]).astype(DTYPE) / self.dx


def random_vector(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def _is_pow2(n):
    return n >= 1 and n & (n - 1) == 0


def random_leaf(rng, nrows, ncols, wrapped=False):
    """A random leaf operator of exactly the requested shape.

    With ``wrapped=True`` an adjoint restriction (depth 1) may be returned.
    """
    choices = ["dense"]
    if nrows == ncols:
        choices += ["identity", "diagonal"]
        if _is_pow2(nrows):
            choices.append("dft")
    if nrows <= ncols:
        choices.append("restriction")
    if wrapped and nrows >= ncols:
        choices.append("adjoint_restriction")
    if nrows == ncols - 1:
        choices.append("deriv1")
    if nrows == ncols - 2:
        choices.append("deriv2")
    kind = choices[rng.integers(len(choices))]
    if kind == "identity":
        return Identity(nrows)
    if kind == "diagonal":
        return Diagonal(random_vector(rng, nrows))
    if kind == "dft":
        return DFT(nrows)
    if kind == "restriction":
        return Restriction(ncols, np.sort(rng.choice(ncols, nrows, replace=False)))
    if kind == "adjoint_restriction":
        return make_adjoint(Restriction(nrows, np.sort(rng.choice(nrows, ncols, replace=False))))
    if kind == "deriv1":
        return FirstDerivative(ncols, dx=rng.uniform(0.5, 2.0))
    if kind == "deriv2":
        return SecondDerivative(ncols, dx=rng.uniform(0.5, 2.0))
    return MatrixOperator(random_vector(rng, nrows * ncols).reshape(nrows, ncols))


def _split(rng, total, max_parts=3):
    parts = int(rng.integers(1, min(max_parts, total) + 1))
    if parts == 1:
        return [total]
    cuts = np.sort(rng.choice(np.arange(1, total), parts - 1, replace=False))
    return list(np.diff(np.concatenate([[0], cuts, [total]])).astype(int))


def random_operator(rng, nrows=None, ncols=None, depth=4, max_dim=32):
    """Random composite expression tree of depth at most ``depth``.

    Every combinator (sum, scale, chain, adjoint, vstack, hstack) can appear;
    all dimensions stay within ``[1, max_dim]``.
    """
    if nrows is None:
        nrows = int(rng.integers(1, max_dim + 1))
    if ncols is None:
        ncols = int(rng.integers(1, max_dim + 1))
    if depth <= 0 or rng.random() < 0.2:
        return random_leaf(rng, nrows, ncols, wrapped=depth > 0)
    kind = ["sum", "scale", "chain", "adjoint", "vstack", "hstack"][rng.integers(6)]
    sub = depth - 1
    if kind == "sum":
        return make_sum(
            random_operator(rng, nrows, ncols, sub, max_dim),
            random_operator(rng, nrows, ncols, sub, max_dim),
        )
    if kind == "scale":
        alpha = complex(rng.standard_normal(), rng.standard_normal())
        return make_scale(alpha, random_operator(rng, nrows, ncols, sub, max_dim))
    if kind == "chain":
        inner = int(rng.integers(1, max_dim + 1))
        return make_compose(
            random_operator(rng, nrows, inner, sub, max_dim),
            random_operator(rng, inner, ncols, sub, max_dim),
        )
    if kind == "adjoint":
        return make_adjoint(random_operator(rng, ncols, nrows, sub, max_dim))
    if kind == "vstack":
        return make_vstack(
            [random_operator(rng, r, ncols, sub, max_dim) for r in _split(rng, nrows)]
        )
    return make_hstack([random_operator(rng, nrows, c, sub, max_dim) for c in _split(rng, ncols)])


def tree_depth(op):
    """Depth of an expression tree; leaves have depth 0."""
    children = []
    for name in ("left", "right", "inner"):
        child = getattr(op, name, None)
        if isinstance(child, LinearOperator):
            children.append(child)
    children.extend(getattr(op, "children", ()))
    return 1 + max(map(tree_depth, children)) if children else 0


def random_composite(rng, depth=4, max_dim=32):
    """Like :func:`random_operator` but never a bare leaf."""
    while True:
        op = random_operator(rng, depth=depth, max_dim=max_dim)
        if tree_depth(op) >= 1:
            return op
