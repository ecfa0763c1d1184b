"""Operator contract, composition algebra and dense materialization.

Every operator is an immutable node of an expression tree. Leaves implement
``_matvec``/``_rmatvec`` by exploiting their structure; combinators route
vectors through their children and never build intermediate matrices.

The scalar field is complex double precision throughout.
"""

import numbers

import numpy as np

from opkit.exceptions import DimensionError, MaterializationError, ValidationError

__all__ = [
    "LinearOperator",
    "SumOperator",
    "ScaledOperator",
    "ChainOperator",
    "AdjointOperator",
    "VStack",
    "HStack",
    "as_vector",
    "forward",
    "adjoint_apply",
    "make_sum",
    "make_scale",
    "make_compose",
    "make_adjoint",
    "make_vstack",
    "make_hstack",
    "materialize",
    "DEFAULT_MATERIALIZE_CAP",
]

DTYPE = np.complex128

#: Largest number of matrix entries :func:`materialize` builds by default.
DEFAULT_MATERIALIZE_CAP = 2**20


def as_vector(x, length=None, name="x"):
    """Convert ``x`` to a finite 1-D complex128 array.

    Parameters
    ----------
    x : array_like
        Input values.
    length : int, optional
        Required length; a mismatch raises :class:`DimensionError`.
    name : str
        Name used in error messages.
    """
    arr = np.asarray(x, dtype=DTYPE)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got array of shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise DimensionError(f"{name} has length {arr.shape[0]}, expected {length}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


def _check_shape(shape):
    try:
        nrows, ncols = (int(s) for s in shape)
    except (TypeError, ValueError):
        raise DimensionError(f"shape must be a pair of integers, got {shape!r}") from None
    if nrows < 1 or ncols < 1:
        raise DimensionError(f"operator dimensions must be positive, got {(nrows, ncols)}")
    return nrows, ncols


class LinearOperator:
    """Base class for matrix-free linear operators.

    Subclasses implement ``_matvec`` (forward, ``y = A x``) and ``_rmatvec``
    (adjoint, ``x = A^H y``) on 1-D complex arrays whose lengths were already
    checked, then call ``_freeze()`` at the end of ``__init__``.

    Python operators map onto the composition algebra: ``A + B``, ``A - B``,
    ``alpha * A``, ``A @ B`` (chain), ``A.H`` (adjoint). ``A @ x`` and
    ``A * x`` with an array apply the forward, ``A / y`` solves ``y = A x``.

    Attributes
    ----------
    shape : tuple of int
        ``(nrows, ncols)``: data-space and model-space dimensions.
    explicit : bool
        True only for leaves wrapping a dense matrix.
    """

    explicit = False

    def __init__(self, shape):
        object.__setattr__(self, "shape", _check_shape(shape))

    def _freeze(self):
        object.__setattr__(self, "_frozen", True)

    def __setattr__(self, name, value):
        if getattr(self, "_frozen", False):
            raise AttributeError(f"{type(self).__name__} is immutable")
        object.__setattr__(self, name, value)

    @property
    def nrows(self):
        return self.shape[0]

    @property
    def ncols(self):
        return self.shape[1]

    def _matvec(self, x):
        raise NotImplementedError

    def _rmatvec(self, y):
        raise NotImplementedError

    def forward(self, x):
        """Apply the operator to a model vector of length ``ncols``."""
        x = as_vector(x, self.ncols)
        return self._matvec(x)

    def adjoint(self, y):
        """Apply the conjugate transpose to a data vector of length ``nrows``."""
        y = as_vector(y, self.nrows, name="y")
        return self._rmatvec(y)

    matvec = forward
    rmatvec = adjoint

    @property
    def H(self):
        return make_adjoint(self)

    def __add__(self, other):
        if isinstance(other, LinearOperator):
            return make_sum(self, other)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, LinearOperator):
            return make_sum(self, make_scale(-1.0, other))
        return NotImplemented

    def __neg__(self):
        return make_scale(-1.0, self)

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            return make_scale(other, self)
        if isinstance(other, LinearOperator):
            return make_compose(self, other)
        if isinstance(other, (np.ndarray, list, tuple)):
            return self.forward(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, numbers.Number):
            return make_scale(other, self)
        return NotImplemented

    def __matmul__(self, other):
        if isinstance(other, LinearOperator):
            return make_compose(self, other)
        if isinstance(other, (np.ndarray, list, tuple)):
            return self.forward(other)
        return NotImplemented

    def __truediv__(self, y):
        from opkit.solve import solve_auto

        x, _ = solve_auto(self, y)
        return x

    def todense(self, cap=DEFAULT_MATERIALIZE_CAP):
        return materialize(self, cap=cap)

    def __repr__(self):
        return f"<{type(self).__name__} {self.nrows}x{self.ncols}>"


class SumOperator(LinearOperator):
    """``A + B`` for two operators of equal shape."""

    def __init__(self, left, right):
        if left.shape != right.shape:
            raise DimensionError(f"cannot sum operators of shapes {left.shape} and {right.shape}")
        super().__init__(left.shape)
        self.left = left
        self.right = right
        self._freeze()

    def _matvec(self, x):
        return self.left._matvec(x) + self.right._matvec(x)

    def _rmatvec(self, y):
        return self.left._rmatvec(y) + self.right._rmatvec(y)


class ScaledOperator(LinearOperator):
    """``alpha * A`` for a complex scalar ``alpha``."""

    def __init__(self, alpha, inner):
        alpha = complex(alpha)
        if not np.isfinite(alpha):
            raise ValidationError(f"scale factor must be finite, got {alpha}")
        super().__init__(inner.shape)
        self.alpha = alpha
        self.inner = inner
        self._freeze()

    def _matvec(self, x):
        return self.alpha * self.inner._matvec(x)

    def _rmatvec(self, y):
        return self.alpha.conjugate() * self.inner._rmatvec(y)


class ChainOperator(LinearOperator):
    """``A B``: apply ``right`` first, then ``left``."""

    def __init__(self, left, right):
        if left.ncols != right.nrows:
            raise DimensionError(
                f"cannot chain operators of shapes {left.shape} and {right.shape}: "
                f"{left.ncols} != {right.nrows}"
            )
        super().__init__((left.nrows, right.ncols))
        self.left = left
        self.right = right
        self._freeze()

    def _matvec(self, x):
        return self.left._matvec(self.right._matvec(x))

    def _rmatvec(self, y):
        return self.right._rmatvec(self.left._rmatvec(y))


class AdjointOperator(LinearOperator):
    """``A^H``; swaps the forward and adjoint actions of ``inner``."""

    def __init__(self, inner):
        super().__init__((inner.ncols, inner.nrows))
        self.inner = inner
        self._freeze()

    def _matvec(self, x):
        return self.inner._rmatvec(x)

    def _rmatvec(self, y):
        return self.inner._matvec(y)


def _offsets(sizes):
    return np.concatenate([[0], np.cumsum(sizes)]).astype(int)


class VStack(LinearOperator):
    """Vertical block ``[A; B; ...]``; outputs are concatenated in child order."""

    def __init__(self, children):
        children = tuple(children)
        if not children:
            raise DimensionError("vstack needs at least one operator")
        ncols = children[0].ncols
        bad = [c.shape for c in children if c.ncols != ncols]
        if bad:
            raise DimensionError(f"vstack operators must share ncols={ncols}, got shapes {bad}")
        super().__init__((sum(c.nrows for c in children), ncols))
        self.children = children
        self._bounds = _offsets([c.nrows for c in children])
        self._freeze()

    def _matvec(self, x):
        return np.concatenate([c._matvec(x) for c in self.children])

    def _rmatvec(self, y):
        b = self._bounds
        out = self.children[0]._rmatvec(y[b[0]:b[1]])
        for i, c in enumerate(self.children[1:], start=1):
            out = out + c._rmatvec(y[b[i]:b[i + 1]])
        return out


class HStack(LinearOperator):
    """Horizontal block ``[A, B, ...]``; the input is sliced contiguously in child order."""

    def __init__(self, children):
        children = tuple(children)
        if not children:
            raise DimensionError("hstack needs at least one operator")
        nrows = children[0].nrows
        bad = [c.shape for c in children if c.nrows != nrows]
        if bad:
            raise DimensionError(f"hstack operators must share nrows={nrows}, got shapes {bad}")
        super().__init__((nrows, sum(c.ncols for c in children)))
        self.children = children
        self._bounds = _offsets([c.ncols for c in children])
        self._freeze()

    def _matvec(self, x):
        b = self._bounds
        out = self.children[0]._matvec(x[b[0]:b[1]])
        for i, c in enumerate(self.children[1:], start=1):
            out = out + c._matvec(x[b[i]:b[i + 1]])
        return out

    def _rmatvec(self, y):
        return np.concatenate([c._rmatvec(y) for c in self.children])


def _require_operator(*ops):
    for op in ops:
        if not isinstance(op, LinearOperator):
            raise TypeError(f"expected a LinearOperator, got {type(op).__name__}")


def make_sum(left, right):
    _require_operator(left, right)
    return SumOperator(left, right)


def make_scale(alpha, inner):
    _require_operator(inner)
    return ScaledOperator(alpha, inner)


def make_compose(left, right):
    _require_operator(left, right)
    return ChainOperator(left, right)


def make_adjoint(inner):
    _require_operator(inner)
    return AdjointOperator(inner)


def make_vstack(children):
    children = list(children)
    _require_operator(*children)
    return VStack(children)


def make_hstack(children):
    children = list(children)
    _require_operator(*children)
    return HStack(children)


def forward(expr, x):
    """Functional form of ``expr.forward(x)``."""
    return expr.forward(x)


def adjoint_apply(expr, y):
    """Functional form of ``expr.adjoint(y)``."""
    return expr.adjoint(y)


def materialize(expr, cap=DEFAULT_MATERIALIZE_CAP):
    """Build the dense matrix of ``expr`` column by column.

    Column ``j`` is ``expr.forward(e_j)``. Intended as a test oracle and as
    the dense baseline of the benchmark.

    Parameters
    ----------
    expr : LinearOperator
    cap : int
        Maximum number of entries; larger operators are refused.

    Returns
    -------
    numpy.ndarray
        Complex array of shape ``expr.shape`` (Fortran ordered).

    Raises
    ------
    MaterializationError
        If ``nrows * ncols`` exceeds ``cap``.
    """
    nrows, ncols = expr.shape
    if nrows * ncols > cap:
        raise MaterializationError(
            f"refusing to materialize {nrows}x{ncols} operator "
            f"({nrows * ncols} entries > cap {cap})"
        )
    out = np.empty((nrows, ncols), dtype=DTYPE, order="F")
    e = np.zeros(ncols, dtype=DTYPE)
    for j in range(ncols):
        e[j] = 1.0
        out[:, j] = expr._matvec(e)
        e[j] = 0.0
    return out
