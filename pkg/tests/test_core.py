import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from opkit import (
    DFT,
    AdjointOperator,
    DimensionError,
    FirstDerivative,
    HStack,
    Identity,
    MaterializationError,
    MatrixOperator,
    Restriction,
    ValidationError,
    VStack,
    adjoint_apply,
    forward,
    make_adjoint,
    make_compose,
    make_hstack,
    make_scale,
    make_sum,
    make_vstack,
    materialize,
)
from opkit.testing import random_composite, random_operator
from tests.conftest import crandn, rel_err

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def dense(rng, m, n):
    return MatrixOperator(crandn(rng, m, n))


class TestForward:
    def test_identity(self):
        np.testing.assert_array_equal(forward(Identity(3), [1, 2, 3]), [1, 2, 3])

    def test_scale(self):
        np.testing.assert_array_equal(forward(make_scale(2 + 0j, Identity(2)), [1, -1]), [2, -2])

    def test_vstack(self):
        op = make_vstack([Identity(2), make_scale(3, Identity(2))])
        np.testing.assert_array_equal(forward(op, [1, 2]), [1, 2, 3, 6])

    def test_chain_with_derivative(self):
        op = make_compose(FirstDerivative(3, dx=1), Identity(3))
        np.testing.assert_array_equal(forward(op, [0, 1, 3]), [1, 2])

    def test_hstack_slices_input_in_order(self):
        op = make_hstack([Identity(2), make_scale(10, Identity(2))])
        np.testing.assert_array_equal(op.forward([1, 2, 3, 4]), [31, 42])
        np.testing.assert_array_equal(op.adjoint([1, 2]), [1, 2, 10, 20])

    def test_sum(self):
        op = make_sum(Identity(2), make_scale(2, Identity(2)))
        np.testing.assert_array_equal(op.forward([1, 2]), [3, 6])

    def test_output_is_complex(self):
        assert Identity(2).forward([1, 2]).dtype == np.complex128

    def test_length_mismatch(self):
        with pytest.raises(DimensionError, match="length 2, expected 3"):
            Identity(3).forward([1, 2])

    def test_non_finite_input(self):
        with pytest.raises(ValidationError):
            Identity(2).forward([1, np.nan])
        with pytest.raises(ValidationError):
            Identity(2).adjoint([np.inf, 0])

    def test_two_dimensional_input_rejected(self):
        with pytest.raises(DimensionError):
            Identity(2).forward(np.ones((2, 1)))


class TestAdjointApply:
    def test_identity(self):
        np.testing.assert_array_equal(adjoint_apply(Identity(3), [1, 2, 3]), [1, 2, 3])

    def test_scale_conjugates(self):
        np.testing.assert_array_equal(adjoint_apply(make_scale(2j, Identity(1)), [1]), [-2j])

    def test_restriction_scatter(self):
        np.testing.assert_array_equal(
            adjoint_apply(Restriction(4, [0, 2]), [1, 3]), [1, 0, 3, 0]
        )

    def test_chain_reverses_order(self, rng):
        A, B = dense(rng, 3, 4), dense(rng, 4, 5)
        y = crandn(rng, 3)
        expected = B.A.conj().T @ (A.A.conj().T @ y)
        np.testing.assert_allclose(make_compose(A, B).adjoint(y), expected, rtol=1e-13)


class TestConstruction:
    def test_sum_shape(self):
        assert make_sum(Identity(2), Identity(2)).shape == (2, 2)

    def test_compose_shape(self, rng):
        assert make_compose(dense(rng, 3, 5), dense(rng, 5, 7)).shape == (3, 7)

    def test_vstack_shape(self, rng):
        assert make_vstack([dense(rng, 2, 4), dense(rng, 3, 4)]).shape == (5, 4)

    def test_hstack_shape(self, rng):
        assert make_hstack([dense(rng, 2, 4), dense(rng, 2, 3)]).shape == (2, 7)

    def test_adjoint_shape(self, rng):
        assert make_adjoint(dense(rng, 2, 5)).shape == (5, 2)

    @pytest.mark.parametrize(
        "build",
        [
            lambda r: make_sum(Identity(2), Identity(3)),
            lambda r: make_compose(dense(r, 3, 4), dense(r, 3, 4)),
            lambda r: make_vstack([dense(r, 2, 4), dense(r, 2, 3)]),
            lambda r: make_hstack([dense(r, 2, 4), dense(r, 3, 4)]),
            lambda r: make_vstack([]),
        ],
    )
    def test_mismatch_fails_at_construction(self, rng, build):
        with pytest.raises(DimensionError):
            build(rng)

    def test_error_names_both_shapes(self, rng):
        with pytest.raises(DimensionError, match=r"\(3, 4\).*\(3, 4\)"):
            make_compose(dense(rng, 3, 4), dense(rng, 3, 4))

    def test_non_operator_rejected(self):
        with pytest.raises(TypeError):
            make_sum(Identity(2), np.eye(2))

    def test_explicit_flag(self, rng):
        A = dense(rng, 2, 2)
        assert A.explicit
        for op in (
            make_sum(A, A),
            make_scale(2, A),
            make_compose(A, A),
            make_adjoint(A),
            make_vstack([A]),
            make_hstack([A]),
        ):
            assert not op.explicit
        assert not Identity(2).explicit

    def test_immutable(self, rng):
        op = make_sum(Identity(2), Identity(2))
        with pytest.raises(AttributeError):
            op.left = Identity(2)
        with pytest.raises(AttributeError):
            Identity(2).shape = (3, 3)
        A = dense(rng, 2, 2)
        with pytest.raises(ValueError):
            A.A[0, 0] = 5


class TestOverloads:
    def test_algebra_syntax(self, rng):
        A, B = dense(rng, 3, 3), dense(rng, 3, 3)
        x = crandn(rng, 3)
        np.testing.assert_allclose((A + B) @ x, A.A @ x + B.A @ x)
        np.testing.assert_allclose((A - B) @ x, A.A @ x - B.A @ x)
        np.testing.assert_allclose((2j * A) * x, 2j * (A.A @ x))
        np.testing.assert_allclose((A @ B) @ x, A.A @ (B.A @ x))
        np.testing.assert_allclose(A.H @ x, A.A.conj().T @ x)
        assert isinstance(A.H, AdjointOperator)
        assert isinstance(A * B, type(A @ B))

    def test_truediv_solves(self, rng):
        A = dense(rng, 6, 4)
        x = crandn(rng, 4)
        np.testing.assert_allclose(A / (A @ x), x, rtol=1e-10)


class TestMaterialize:
    def test_identity(self):
        np.testing.assert_array_equal(materialize(Identity(2)), np.eye(2))

    def test_first_derivative(self):
        np.testing.assert_array_equal(
            materialize(FirstDerivative(3, dx=1)), [[-1, 1, 0], [0, -1, 1]]
        )

    def test_adjoint_is_conjugate_transpose(self, rng):
        A = dense(rng, 4, 3)
        M = materialize(A)
        MH = materialize(make_adjoint(A))
        # entry-by-entry brute-force comparison
        for i in range(3):
            for j in range(4):
                assert abs(MH[i, j] - np.conj(M[j, i])) <= 1e-12 * (1 + abs(M[j, i]))

    def test_cap(self):
        with pytest.raises(MaterializationError):
            materialize(Identity(2048))
        assert materialize(Identity(8), cap=64).shape == (8, 8)
        with pytest.raises(MaterializationError):
            materialize(Identity(8), cap=63)


class TestProperties:
    @given(seeds)
    def test_linearity(self, seed):
        rng = np.random.default_rng(seed)
        A = random_operator(rng, depth=4, max_dim=16)
        x1, x2 = crandn(rng, A.ncols), crandn(rng, A.ncols)
        a, b = complex(*rng.standard_normal(2)), complex(*rng.standard_normal(2))
        lhs = A.forward(a * x1 + b * x2)
        rhs = a * A.forward(x1) + b * A.forward(x2)
        scale = np.linalg.norm(A.forward(x1)) * abs(a) + np.linalg.norm(A.forward(x2)) * abs(b)
        assert np.linalg.norm(lhs - rhs) <= 1e-12 * max(scale, 1e-300)

    @given(seeds)
    def test_adjoint_consistency(self, seed):
        rng = np.random.default_rng(seed)
        A = random_operator(rng, depth=4, max_dim=16)
        M = materialize(A)
        MH = materialize(make_adjoint(A))
        assert np.all(np.abs(MH - M.conj().T) <= 1e-12 * (1 + np.abs(M.conj().T)))

    @given(seeds)
    def test_oracle_equivalence(self, seed):
        rng = np.random.default_rng(seed)
        A = random_operator(rng, depth=4, max_dim=16)
        x = crandn(rng, A.ncols)
        assert rel_err(A.forward(x), materialize(A) @ x) <= 1e-12

    @given(seeds)
    def test_double_adjoint(self, seed):
        rng = np.random.default_rng(seed)
        A = random_operator(rng, depth=3, max_dim=16)
        x = crandn(rng, A.ncols)
        assert rel_err(make_adjoint(make_adjoint(A)).forward(x), A.forward(x)) <= 1e-13

    @given(seeds)
    def test_random_trees_are_well_shaped(self, seed):
        rng = np.random.default_rng(seed)
        A = random_composite(rng, depth=4, max_dim=16)
        assert A.forward(np.ones(A.ncols)).shape == (A.nrows,)
        assert A.adjoint(np.ones(A.nrows)).shape == (A.ncols,)


def test_stacks_expose_children():
    v = VStack([Identity(2), DFT(2)])
    h = HStack([Identity(2), DFT(2)])
    assert len(v.children) == len(h.children) == 2
