"""Operator validation and spectral estimates.

``dottest`` checks that an operator's adjoint is consistent with its forward
on random vectors. The singular-value estimates use power iteration and only
need forward/adjoint applications.
"""

from dataclasses import dataclass

import numpy as np

from opkit.exceptions import ConvergenceError, IllConditionedError

__all__ = [
    "DotTestResult",
    "dottest",
    "max_singular_value",
    "min_singular_value",
    "cond",
]

#: Spectral shift factor used to turn the smallest eigenvalue of A^H A into the largest.
SHIFT_FACTOR = 1.01


@dataclass(frozen=True)
class DotTestResult:
    passed: bool
    trials: int
    worst_relative_error: float
    lhs_sample: complex
    rhs_sample: complex
    tol: float

    def to_dict(self):
        return {
            "passed": self.passed,
            "trials": self.trials,
            "worst_relative_error": self.worst_relative_error,
            "lhs_sample": [self.lhs_sample.real, self.lhs_sample.imag],
            "rhs_sample": [self.rhs_sample.real, self.rhs_sample.imag],
            "tol": self.tol,
        }


def _complex_normal(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def dottest(A, trials=100, tol=1e-10, seed=0):
    """Dot-product test ``<A u, v> == <u, A^H v>`` on random complex vectors.

    Parameters
    ----------
    A : LinearOperator
    trials : int
        Number of independent ``(u, v)`` draws.
    tol : float
        Relative tolerance on ``|lhs - rhs| / max(|lhs|, |rhs|)``.
    seed : int
        Seed of the random generator; results are deterministic given it.

    Returns
    -------
    DotTestResult
        ``lhs_sample``/``rhs_sample`` come from the worst trial.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    nrows, ncols = A.shape
    worst, worst_pair = -1.0, (0j, 0j)
    for _ in range(trials):
        u = _complex_normal(rng, ncols)
        v = _complex_normal(rng, nrows)
        # np.vdot conjugates its first argument
        lhs = np.vdot(v, A.forward(u))
        rhs = np.vdot(A.adjoint(v), u)
        err = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
        if err > worst:
            worst, worst_pair = err, (complex(lhs), complex(rhs))
    return DotTestResult(
        passed=bool(worst <= tol),
        trials=trials,
        worst_relative_error=float(worst),
        lhs_sample=worst_pair[0],
        rhs_sample=worst_pair[1],
        tol=tol,
    )


def _power_iteration(apply, n, tol, max_iters, seed, what):
    rng = np.random.default_rng(seed)
    w = _complex_normal(rng, n)
    w /= np.linalg.norm(w)
    prev = None
    for _ in range(max_iters):
        z = apply(w)
        lam = float(np.vdot(w, z).real)
        norm = np.linalg.norm(z)
        if norm == 0.0:
            return 0.0
        w = z / norm
        if prev is not None and abs(lam - prev) <= tol * max(abs(lam), 1e-300):
            return lam
        prev = lam
    raise ConvergenceError(
        f"power iteration for {what} did not converge in {max_iters} iterations",
        last_estimate=prev,
    )


def max_singular_value(A, tol=1e-12, max_iters=20000, seed=0):
    """Largest singular value of ``A`` by power iteration on ``A^H A``."""
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    try:
        lam = _power_iteration(
            lambda w: A._rmatvec(A._matvec(w)), A.ncols, tol, max_iters, seed, "sigma_max"
        )
    except ConvergenceError as exc:
        last = exc.last_estimate
        raise ConvergenceError(
            str(exc), last_estimate=None if last is None else float(np.sqrt(max(last, 0.0)))
        ) from None
    return float(np.sqrt(max(lam, 0.0)))


def _min_eigenvalue(A, smax, tol, max_iters, seed):
    shift = SHIFT_FACTOR * smax**2
    try:
        top = _power_iteration(
            lambda w: shift * w - A._rmatvec(A._matvec(w)),
            A.ncols,
            tol,
            max_iters,
            seed,
            "sigma_min",
        )
    except ConvergenceError as exc:
        last = exc.last_estimate
        est = None if last is None else float(np.sqrt(max(shift - last, 0.0)))
        raise ConvergenceError(
            f"{exc}; convergence is slow when the low end of the spectrum is clustered",
            last_estimate=est,
        ) from None
    return max(shift - top, 0.0), shift


def min_singular_value(A, tol=1e-12, max_iters=20000, seed=0, smax=None):
    """Smallest singular value of ``A`` (over its model space).

    Runs power iteration on ``c I - A^H A`` with ``c = 1.01 * smax**2``, whose
    dominant eigenvalue is ``c - lambda_min(A^H A)``. The result is clamped
    at zero.

    Parameters
    ----------
    smax : float, optional
        Prior estimate of the largest singular value; computed if omitted.
    """
    if smax is None:
        smax = max_singular_value(A, tol=tol, max_iters=max_iters, seed=seed)
    if smax == 0.0:
        return 0.0
    lam, _ = _min_eigenvalue(A, smax, tol, max_iters, seed + 1)
    return float(np.sqrt(lam))


def cond(A, tol=1e-12, max_iters=20000, seed=0):
    """Condition number ``sigma_max / sigma_min``.

    Raises
    ------
    IllConditionedError
        When ``sigma_min`` is zero to within the resolution of the power
        iteration, i.e. the operator is rank deficient.
    """
    smax = max_singular_value(A, tol=tol, max_iters=max_iters, seed=seed)
    if smax == 0.0:
        raise IllConditionedError("operator is identically zero", smax=0.0, smin=0.0)
    lam, shift = _min_eigenvalue(A, smax, tol, max_iters, seed + 1)
    # eigenvalues below what the shifted iteration can resolve count as zero
    if lam <= 100.0 * max(tol, np.finfo(float).eps) * shift:
        raise IllConditionedError(
            f"operator is rank deficient (sigma_min ~ {np.sqrt(lam):.3g}, "
            f"sigma_max = {smax:.6g}); condition number is infinite",
            smax=smax,
            smin=float(np.sqrt(lam)),
        )
    return smax / float(np.sqrt(lam))
