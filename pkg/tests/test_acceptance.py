"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line (shown with ``-s`` and in the terminal
summary) before asserting.
"""

import time

import numpy as np
import pytest

from opkit import (
    DFT,
    Diagonal,
    FirstDerivative,
    IllConditionedError,
    Identity,
    MatrixOperator,
    Restriction,
    SecondDerivative,
    SolverConfig,
    cgls,
    cond,
    direct_lstsq,
    dottest,
    ista,
    make_adjoint,
    materialize,
    max_singular_value,
    min_singular_value,
    regularized_inversion,
)
from opkit.bench import loglog_slope, run_bench
from opkit.interp import InterpConfig, run_interp
from opkit.testing import random_composite, tree_depth
from tests.conftest import crandn, rel_err


def shipped_leaves():
    rng = np.random.default_rng(2024)
    return [
        Identity(1),
        Identity(17),
        Diagonal(crandn(rng, 9)),
        MatrixOperator(crandn(rng, 7, 4)),
        MatrixOperator(crandn(rng, 3, 11)),
        Restriction(20, np.sort(rng.choice(20, 6, replace=False))),
        Restriction(5, [4]),
        FirstDerivative(2),
        FirstDerivative(25, dx=0.4),
        SecondDerivative(3),
        SecondDerivative(30, dx=1.7),
        DFT(1),
        DFT(32),
    ]


def composite_trees(count=50, seed=99):
    rng = np.random.default_rng(seed)
    return [random_composite(rng, depth=4, max_dim=32) for _ in range(count)]


def test_1_dot_test_suite(criterion):
    start = time.perf_counter()
    trees = composite_trees()
    ops = shipped_leaves() + trees
    results = [dottest(op, trials=100, tol=1e-10, seed=i) for i, op in enumerate(ops)]
    elapsed = time.perf_counter() - start
    worst = max(r.worst_relative_error for r in results)
    ok = all(r.passed for r in results) and elapsed < 10
    ok = ok and max(map(tree_depth, trees)) <= 4 and min(map(tree_depth, trees)) >= 1
    criterion(1, "dot test, leaves + 50 composites, tol 1e-10 x 100 trials", ok,
              f"worst rel err {worst:.2e}, {elapsed:.2f}s")
    assert ok


def test_2_oracle_equivalence(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = 0.0
    for op in shipped_leaves() + composite_trees():
        M = materialize(op)
        x, y = crandn(rng, op.ncols), crandn(rng, op.nrows)
        worst = max(worst, rel_err(op.forward(x), M @ x), rel_err(op.adjoint(y), M.conj().T @ y))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 10
    criterion(2, "forward/adjoint vs dense oracle within 1e-12", ok,
              f"worst rel L2 {worst:.2e}, {elapsed:.2f}s")
    assert ok


def test_3_solver_cross_checks(criterion):
    rng = np.random.default_rng(3)
    worst, monotone_cg, monotone_ista = 0.0, True, True
    for _ in range(20):
        m = int(rng.integers(1, 25))
        n = int(rng.integers(m, 33))
        U, _ = np.linalg.qr(crandn(rng, n, m))
        V, _ = np.linalg.qr(crandn(rng, m, m))
        A = MatrixOperator((U * np.linspace(1.0, 10.0, m)) @ V.conj().T)
        y = crandn(rng, n)
        x_cg, rep = cgls(A, y)
        worst = max(worst, rel_err(direct_lstsq(A, y), x_cg))
        h = np.asarray(rep.residual_history)
        monotone_cg &= bool(np.all(h[1:] <= h[:-1]))
        _, rep = ista(A, y, SolverConfig(tau=0.5, max_iters=200))
        o = np.asarray(rep.objective_history)
        monotone_ista &= bool(np.all(o[1:] <= o[:-1] + 1e-12 * (1 + o[:-1])))
    ok = worst <= 1e-8 and monotone_cg and monotone_ista
    criterion(3, "direct vs CGLS on 20 systems; monotone CGLS residual and ISTA objective", ok,
              f"worst rel diff {worst:.2e}, cgls monotone={monotone_cg}, ista monotone={monotone_ista}")
    assert ok


def test_4_regularized_inversion_oracle(criterion):
    m = 16
    rng = np.random.default_rng(16)
    R = Restriction(m, np.sort(rng.choice(m, 8, replace=False)))
    D = SecondDerivative(m, dx=1.0)
    y = R.forward(np.sin(np.arange(m) / 2.0)) + 0.1 * crandn(rng, 8)
    Rm, Dm = materialize(R), materialize(D)
    errors = {}
    for eps in (0.1, 1.0, 10.0):
        oracle = np.linalg.solve(
            Rm.conj().T @ Rm + eps**2 * Dm.conj().T @ Dm, Rm.conj().T @ y
        )
        x, _ = regularized_inversion(R, [D], y, SolverConfig(tol=1e-12, eps_list=[eps]))
        errors[eps] = rel_err(x, oracle)
    ok = max(errors.values()) <= 1e-6
    criterion(4, "augmented-stack Tikhonov vs normal equations within 1e-6", ok,
              ", ".join(f"eps={e}: {v:.1e}" for e, v in errors.items()))
    assert ok


def test_5_interpolation_experiment(criterion):
    start = time.perf_counter()
    res = run_interp(InterpConfig())
    elapsed = time.perf_counter() - start
    e_naive, e_reg, e_fista = (res.rel_error(v) for v in (res.x_naive, res.x_reg, res.x_fista))
    support_ok = res.recovered_support == res.true_support and len(res.true_support) == 6
    ok = e_naive >= 0.5 and e_reg < e_naive and support_ok and e_fista <= 0.05 and elapsed < 30
    criterion(5, "interpolation: naive >= 0.5, regularized < naive, FISTA support + error <= 0.05",
              ok, f"naive {e_naive:.3f}, regularized {e_reg:.3f}, fista {e_fista:.4f}, "
                  f"support {res.recovered_support}, {elapsed:.2f}s")
    assert ok


def test_6_benchmark_scaling(criterion):
    sizes = [2**k for k in range(10, 15)]
    start = time.perf_counter()
    records = run_bench(("restriction", "deriv1", "dft"), ("operator", "dense"), sizes, repeats=200)
    elapsed = time.perf_counter() - start
    timed = {}
    for r in records:
        if r.status == "ok":
            timed.setdefault((r.op_name, r.impl), {})[r.size] = r.mean_seconds
    limits = {"restriction": 1.3, "deriv1": 1.3, "dft": 1.5}
    details, ok = [], elapsed < 300
    for name, limit in limits.items():
        op_t, dense_t = timed[(name, "operator")], timed[(name, "dense")]
        s_op = loglog_slope(list(op_t), list(op_t.values()))
        s_dense = loglog_slope(list(dense_t), list(dense_t.values()))
        common = max(set(op_t) & set(dense_t))
        faster = op_t[common] < dense_t[common]
        ok &= s_op <= limit and s_dense >= 1.7 and faster and len(dense_t) >= 2
        details.append(f"{name}: op {s_op:.2f} dense {s_dense:.2f} "
                       f"(n={common} {op_t[common]:.1e}s vs {dense_t[common]:.1e}s)")
    criterion(6, "benchmark log-log slopes and operator faster than dense", ok,
              "; ".join(details) + f"; {elapsed:.0f}s")
    assert ok


def test_7_spectral_utilities(criterion):
    c_id = cond(Identity(12))
    c_diag = cond(Diagonal(np.arange(1, 17)))
    F = DFT(64)
    smax, smin = max_singular_value(F), min_singular_value(F)
    with pytest.raises(IllConditionedError):
        cond(Restriction(8, [0, 2, 5]))
    ok = (
        abs(c_id - 1) <= 1e-6
        and abs(c_diag - 16) <= 1e-4
        and abs(smax - 1) <= 1e-6
        and abs(smin - 1) <= 1e-6
    )
    criterion(7, "cond(I)=1, cond(diag 1..16)=16, DFT sigma=1, rank-deficient -> infinite", ok,
              f"cond(I)={c_id:.8f}, cond(diag)={c_diag:.8f}, dft sigma=({smax:.8f}, {smin:.8f})")
    assert ok


def _stored_elements(op):
    """Count numeric elements held on the instance, arrays by size, scalars as one."""
    arrays, scalars = 0, 0
    for name, value in vars(op).items():
        if name in ("shape", "_frozen"):
            continue
        if isinstance(value, np.ndarray):
            arrays += value.size
        elif isinstance(value, (int, float, complex, np.number)):
            scalars += 1
    return arrays, scalars


def test_8_memory_structure(criterion):
    m = 100_000
    idx = np.arange(0, m, 10)
    R = Restriction(m, idx)
    r_arrays, r_scalars = _stored_elements(R)
    derivs = [FirstDerivative(m, 0.5), SecondDerivative(m, 0.5)]
    d_counts = [_stored_elements(D) for D in derivs]
    n = 2**14
    f_arrays, _ = _stored_elements(DFT(n))
    ok = (
        r_arrays == idx.size and r_scalars == 0
        and list(R.payload) == ["indices"]
        and all(c == (0, 1) for c in d_counts)
        and all(D.payload == {"dx": 0.5} for D in derivs)
        and f_arrays <= 2 * n
    )
    criterion(8, "Restriction stores len(l) indices, derivatives one scalar, DFT O(N)", ok,
              f"restriction {r_arrays} of {idx.size}, derivatives {d_counts}, "
              f"dft aux {f_arrays} for N={n}")
    assert ok
