"""Least-squares and sparsity-promoting solvers built on forward/adjoint products.

All iterative solvers start from ``x0 = 0`` and return ``(x, SolveReport)``.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.linalg

from opkit.core import (
    DEFAULT_MATERIALIZE_CAP,
    LinearOperator,
    as_vector,
    make_compose,
    make_scale,
    make_vstack,
    materialize,
)
from opkit.exceptions import ConvergenceError, DimensionError, SingularSystemError
from opkit.validate import max_singular_value

__all__ = [
    "SolverConfig",
    "SolveReport",
    "cgls",
    "direct_lstsq",
    "solve_auto",
    "regularized_inversion",
    "preconditioned_inversion",
    "soft_threshold",
    "fista",
    "ista",
]

TOLERANCE = "tolerance"
MAX_ITERS = "max_iters"

#: Safety factor applied to sigma_max**2 when it is used as the Lipschitz constant.
LIPSCHITZ_PAD = 1.05


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings.

    ``max_iters=None`` selects the solver default: ``10 * max(N, M)`` for
    CGLS and 500 for FISTA/ISTA.
    """

    max_iters: Optional[int] = None
    tol: float = 1e-8
    tau: float = 0.0
    eps_list: List[float] = field(default_factory=list)
    seed: int = 0

    def __post_init__(self):
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.tau < 0:
            raise ValueError(f"tau must be non-negative, got {self.tau}")
        if any(not e > 0 for e in self.eps_list):
            raise ValueError(f"eps_list entries must be positive, got {self.eps_list}")


@dataclass
class SolveReport:
    iterations: int
    stop_reason: str
    residual_history: List[float]
    objective_history: List[float] = field(default_factory=list)

    def to_dict(self):
        return {
            "iterations": self.iterations,
            "stop_reason": self.stop_reason,
            "residual_history": list(self.residual_history),
            "objective_history": list(self.objective_history),
        }


def _data(A, y):
    if not isinstance(A, LinearOperator):
        raise TypeError(f"expected a LinearOperator, got {type(A).__name__}")
    return as_vector(y, A.nrows, name="y")


def cgls(A, y, cfg=None):
    """Conjugate gradients on the normal equations ``A^H A x = A^H y``.

    Stops when ``||A^H (y - A x_k)|| <= tol * ||A^H y||`` or after
    ``max_iters`` iterations. From ``x0 = 0`` the iterates stay in the Krylov
    space of ``A^H``, so the limit is the minimum-norm least-squares solution.
    """
    cfg = cfg or SolverConfig()
    y = _data(A, y)
    max_iters = cfg.max_iters or 10 * max(A.shape)

    x = np.zeros(A.ncols, dtype=complex)
    r = y.copy()
    s = A._rmatvec(r)
    gamma = np.vdot(s, s).real
    stop = cfg.tol * np.sqrt(gamma)
    p = s.copy()
    history = [float(np.linalg.norm(r))]
    if np.sqrt(gamma) <= stop:
        return x, SolveReport(0, TOLERANCE, history)

    for k in range(1, max_iters + 1):
        q = A._matvec(p)
        delta = np.vdot(q, q).real
        if delta == 0.0:
            # zero curvature along p: no further progress is possible
            return x, SolveReport(k - 1, TOLERANCE, history)
        alpha = gamma / delta
        x += alpha * p
        r -= alpha * q
        s = A._rmatvec(r)
        gamma_new = np.vdot(s, s).real
        history.append(float(np.linalg.norm(r)))
        if np.sqrt(gamma_new) <= stop:
            return x, SolveReport(k, TOLERANCE, history)
        p = s + (gamma_new / gamma) * p
        gamma = gamma_new
    return x, SolveReport(max_iters, MAX_ITERS, history)


def direct_lstsq(A, y, cap=DEFAULT_MATERIALIZE_CAP):
    """Explicit least squares ``x = (A^H A)^{-1} A^H y`` via Cholesky.

    Raises
    ------
    SingularSystemError
        If the Gram matrix is singular or numerically indefinite; use
        :func:`regularized_inversion` for such problems.
    """
    y = _data(A, y)
    M = A.A if A.explicit else materialize(A, cap=cap)
    gram = M.conj().T @ M
    try:
        factor = scipy.linalg.cho_factor(gram, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        raise SingularSystemError(
            "Gram matrix A^H A is singular; the problem is ill-posed, "
            "use regularized_inversion or a sparsity-promoting solver"
        ) from None
    diag = np.abs(np.diag(factor[0])) ** 2
    if diag.min() <= np.finfo(float).eps * A.ncols * diag.max():
        raise SingularSystemError(
            "Gram matrix A^H A is numerically singular; the problem is ill-posed, "
            "use regularized_inversion or a sparsity-promoting solver"
        )
    return scipy.linalg.cho_solve(factor, M.conj().T @ y, check_finite=False)


def solve_auto(A, y, cfg=None):
    """Solve ``y = A x``: direct for explicit operators, CGLS otherwise."""
    if A.explicit:
        y = _data(A, y)
        x = direct_lstsq(A, y)
        res = float(np.linalg.norm(y - A._matvec(x)))
        return x, SolveReport(0, TOLERANCE, [res])
    return cgls(A, y, cfg)


def regularized_inversion(A, regs, y, cfg=None):
    """Tikhonov-regularized least squares.

    Minimizes ``||y - A x||^2 + sum_i eps_i**2 ||R_i x||^2`` by running CGLS
    on the stacked operator ``[A; eps_1 R_1; ...]`` with data ``[y; 0; ...]``.
    Weights are taken from ``cfg.eps_list``.
    """
    cfg = cfg or SolverConfig()
    regs = list(regs)
    if len(cfg.eps_list) != len(regs):
        raise ValueError(
            f"got {len(regs)} regularization operators but {len(cfg.eps_list)} weights"
        )
    y = _data(A, y)
    if not regs:
        return cgls(A, y, cfg)
    for i, R in enumerate(regs):
        if R.ncols != A.ncols:
            raise DimensionError(
                f"regularization operator {i} has shape {R.shape}, "
                f"needs ncols={A.ncols} to match A {A.shape}"
            )
    stacked = make_vstack([A] + [make_scale(e, R) for e, R in zip(cfg.eps_list, regs)])
    data = np.concatenate([y] + [np.zeros(R.nrows, dtype=complex) for R in regs])
    return cgls(stacked, data, cfg)


def preconditioned_inversion(A, P, y, cfg=None):
    """Solve for ``p`` in ``y = A P p`` with CGLS and return ``x = P p``."""
    if A.ncols != P.nrows:
        raise DimensionError(
            f"preconditioner shape {P.shape} incompatible with operator shape {A.shape}"
        )
    p, report = cgls(make_compose(A, P), y, cfg)
    return P._matvec(p), report


def soft_threshold(z, thresh):
    """Complex soft thresholding ``z / |z| * max(|z| - thresh, 0)``.

    Works elementwise on arrays; returns 0 where ``z == 0``.
    """
    if np.any(np.asarray(thresh) < 0):
        raise ValueError("thresh must be non-negative")
    z = np.asarray(z)
    mag = np.abs(z)
    shrink = np.maximum(mag - thresh, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(mag > 0, z * (shrink / np.where(mag > 0, mag, 1.0)), 0.0)
    return out[()] if out.ndim == 0 else out


def _lipschitz(A, cfg):
    try:
        smax = max_singular_value(A, seed=cfg.seed)
    except ConvergenceError as exc:
        raise ConvergenceError(
            "could not estimate the Lipschitz constant by power iteration; "
            "pass lipschitz=<L> explicitly",
            last_estimate=exc.last_estimate,
        ) from None
    return LIPSCHITZ_PAD * smax**2


def _proximal_gradient(A, y, cfg, lipschitz, accelerate):
    cfg = cfg or SolverConfig()
    if not cfg.tau > 0:
        raise ValueError("tau must be positive for l1-regularized solvers")
    y = _data(A, y)
    max_iters = cfg.max_iters or 500
    L = _lipschitz(A, cfg) if lipschitz is None else float(lipschitz)
    if L == 0.0:
        # A is the zero operator: the minimizer is x = 0
        L = 1.0
    thresh = cfg.tau / L

    def objective(res, x):
        return float(0.5 * np.vdot(res, res).real + cfg.tau * np.abs(x).sum())

    x = np.zeros(A.ncols, dtype=complex)
    z = x.copy()
    t = 1.0
    res = y.copy()
    residuals = [float(np.linalg.norm(res))]
    objectives = [objective(res, x)]
    for k in range(1, max_iters + 1):
        grad = A._rmatvec(A._matvec(z) - y)
        x_new = soft_threshold(z - grad / L, thresh)
        if accelerate:
            t_new = (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2.0
            z = x_new + ((t - 1.0) / t_new) * (x_new - x)
            t = t_new
        else:
            z = x_new
        change = np.linalg.norm(x_new - x)
        x = x_new
        res = y - A._matvec(x)
        residuals.append(float(np.linalg.norm(res)))
        objectives.append(objective(res, x))
        if change <= cfg.tol * np.linalg.norm(x):
            return x, SolveReport(k, TOLERANCE, residuals, objectives)
    return x, SolveReport(max_iters, MAX_ITERS, residuals, objectives)


def fista(A, y, cfg=None, lipschitz=None):
    """FISTA for ``min_x 0.5 ||y - A x||^2 + tau ||x||_1``.

    Step size ``1/L`` with ``L = 1.05 * sigma_max(A)**2`` from power
    iteration unless ``lipschitz`` is given. Stops when the relative change
    of the iterate drops to ``cfg.tol`` or after ``cfg.max_iters`` (default
    500) iterations.
    """
    return _proximal_gradient(A, y, cfg, lipschitz, accelerate=True)


def ista(A, y, cfg=None, lipschitz=None):
    """Unaccelerated proximal gradient; same contract as :func:`fista`.

    Its objective history is monotonically non-increasing.
    """
    return _proximal_gradient(A, y, cfg, lipschitz, accelerate=False)


