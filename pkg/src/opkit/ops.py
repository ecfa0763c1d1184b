"""Leaf operators with structure-exploiting forward and adjoint kernels.

Only :class:`MatrixOperator` stores a matrix. Every other leaf keeps the
minimum state needed to apply itself (indices, a step size, a length), which
is exposed through :attr:`payload` for inspection.
"""

import numpy as np

from opkit.core import DTYPE, LinearOperator, as_vector
from opkit.exceptions import DimensionError, ValidationError

__all__ = [
    "Identity",
    "Diagonal",
    "MatrixOperator",
    "Restriction",
    "FirstDerivative",
    "SecondDerivative",
    "DFT",
    "fft_radix2",
]


def _readonly(arr):
    arr.setflags(write=False)
    return arr


def _positive_step(dx):
    dx = float(dx)
    if not np.isfinite(dx) or dx <= 0:
        raise ValidationError(f"dx must be a positive finite number, got {dx}")
    return dx


class Identity(LinearOperator):
    """Square identity operator of size ``n``."""

    def __init__(self, n):
        super().__init__((n, n))
        self._freeze()

    @property
    def payload(self):
        return {}

    def _matvec(self, x):
        return x.copy()

    def _rmatvec(self, y):
        return y.copy()


class Diagonal(LinearOperator):
    """Elementwise multiplication by a fixed vector ``d``."""

    def __init__(self, d):
        d = _readonly(as_vector(d, name="d").copy())
        super().__init__((d.size, d.size))
        self.d = d
        self._freeze()

    @property
    def payload(self):
        return {"d": self.d}

    def _matvec(self, x):
        return self.d * x

    def _rmatvec(self, y):
        return np.conj(self.d) * y


class MatrixOperator(LinearOperator):
    """Wrapper around an explicit dense matrix.

    The only leaf with ``explicit = True``; solvers may factorize it directly.
    """

    explicit = True

    def __init__(self, A):
        A = np.asarray(A, dtype=DTYPE)
        if A.ndim != 2:
            raise DimensionError(f"matrix must be 2-D, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ValidationError("matrix contains non-finite values")
        super().__init__(A.shape)
        self.A = _readonly(A)
        self._freeze()

    @property
    def payload(self):
        return {"A": self.A}

    def _matvec(self, x):
        return self.A @ x

    def _rmatvec(self, y):
        return self.A.conj().T @ y


class Restriction(LinearOperator):
    """Select the entries of a length-``m`` model at sorted indices.

    Forward gathers ``y[i] = x[indices[i]]``; the adjoint scatters data back
    into a zero model vector.

    Parameters
    ----------
    m : int
        Model length.
    indices : array_like of int
        Strictly increasing indices in ``[0, m)``; at least one.
    """

    def __init__(self, m, indices):
        raw = np.asarray(indices)
        if raw.ndim != 1 or raw.size == 0:
            raise ValidationError("indices must be a non-empty 1-D sequence")
        if not np.issubdtype(raw.dtype, np.integer):
            if not np.all(np.equal(np.mod(raw, 1), 0)):
                raise ValidationError("indices must be integers")
        idx = raw.astype(np.intp)
        if np.any(np.diff(idx) <= 0):
            raise ValidationError("indices must be strictly increasing")
        m = int(m)
        if idx[0] < 0 or idx[-1] >= m:
            raise ValidationError(f"indices must lie in [0, {m})")
        super().__init__((idx.size, m))
        self.indices = _readonly(idx)
        self._freeze()

    @property
    def payload(self):
        return {"indices": self.indices}

    def _matvec(self, x):
        return x[self.indices]

    def _rmatvec(self, y):
        x = np.zeros(self.ncols, dtype=DTYPE)
        x[self.indices] = y
        return x


class FirstDerivative(LinearOperator):
    """Two-point forward difference ``y[i] = (x[i+1] - x[i]) / dx``.

    Maps length ``n`` to ``n - 1``, no boundary padding.
    """

    def __init__(self, n, dx=1.0):
        n = int(n)
        if n < 2:
            raise ValidationError(f"FirstDerivative needs n >= 2, got {n}")
        super().__init__((n - 1, n))
        self.dx = _positive_step(dx)
        self._freeze()

    @property
    def payload(self):
        return {"dx": self.dx}

    def _matvec(self, x):
        return (x[1:] - x[:-1]) / self.dx

    def _rmatvec(self, y):
        x = np.zeros(self.ncols, dtype=DTYPE)
        x[1:] += y
        x[:-1] -= y
        return x / self.dx


class SecondDerivative(LinearOperator):
    """Three-point stencil ``y[i] = (x[i] - 2 x[i+1] + x[i+2]) / dx**2``.

    Maps length ``n`` to ``n - 2``.
    """

    def __init__(self, n, dx=1.0):
        n = int(n)
        if n < 3:
            raise ValidationError(f"SecondDerivative needs n >= 3, got {n}")
        super().__init__((n - 2, n))
        self.dx = _positive_step(dx)
        self._freeze()

    @property
    def payload(self):
        return {"dx": self.dx}

    def _matvec(self, x):
        return (x[:-2] - 2.0 * x[1:-1] + x[2:]) / self.dx**2

    def _rmatvec(self, y):
        x = np.zeros(self.ncols, dtype=DTYPE)
        x[:-2] += y
        x[1:-1] -= 2.0 * y
        x[2:] += y
        return x / self.dx**2


def _bit_reversal(n):
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


def fft_radix2(x, twiddles, perm, inverse=False):
    """Unnormalized iterative radix-2 decimation-in-time FFT.

    Parameters
    ----------
    x : numpy.ndarray
        Complex input whose length ``n`` is a power of two.
    twiddles : numpy.ndarray
        ``exp(-2j*pi*k/n)`` for ``k < n/2``.
    perm : numpy.ndarray
        Bit-reversal permutation of ``range(n)``.
    inverse : bool
        Use conjugate twiddles (``exp(+2j*pi*k*t/n)`` kernel).
    """
    n = x.size
    a = x[perm]
    m = 1
    while m < n:
        w = twiddles[:: n // (2 * m)]
        if inverse:
            w = w.conj()
        blocks = a.reshape(-1, 2 * m)
        even = blocks[:, :m]
        odd = blocks[:, m:] * w
        a = np.concatenate((even + odd, even - odd), axis=1)
        m *= 2
    return a.reshape(n)


class DFT(LinearOperator):
    """Orthonormal discrete Fourier transform of power-of-two length.

    Forward is ``X[k] = n**-0.5 * sum_t x[t] exp(-2j*pi*k*t/n)``; the adjoint
    uses the conjugate kernel with the same scaling, so it is also the
    inverse.
    """

    def __init__(self, n):
        n = int(n)
        if n < 1 or n & (n - 1):
            raise ValidationError(f"DFT length must be a power of two, got {n}")
        super().__init__((n, n))
        self.n = n
        self._twiddles = _readonly(np.exp(-2j * np.pi * np.arange(n // 2) / n))
        self._perm = _readonly(_bit_reversal(n))
        self._scale = 1.0 / np.sqrt(n)
        self._freeze()

    @property
    def payload(self):
        return {"n": self.n, "twiddles": self._twiddles, "perm": self._perm}

    def _matvec(self, x):
        return self._scale * fft_radix2(x, self._twiddles, self._perm)

    def _rmatvec(self, y):
        return self._scale * fft_radix2(y, self._twiddles, self._perm, inverse=True)
