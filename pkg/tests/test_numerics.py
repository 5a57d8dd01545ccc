import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splitcert import ContractViolation, as_point, inner, norm_sq
from splitcert.numerics import row_norm_sq


def test_inner_examples():
    assert inner([1, 2], [3, 4]) == 11.0
    assert inner([0, 0], [5, 7]) == 0.0
    assert inner([1, 1, 1], [1, 1, 1]) == 3.0


def test_norm_sq_examples():
    assert norm_sq([3, 4]) == 25.0
    assert norm_sq([0.0]) == 0.0
    assert norm_sq([1, 1, 1, 1]) == 4.0


def test_dimension_mismatch():
    with pytest.raises(ContractViolation):
        inner([1, 2], [1, 2, 3])


def test_as_point_validation():
    p = as_point([1.0, 2.0])
    assert p.dtype == np.float64 and not p.flags.writeable
    assert as_point(3.0).shape == (1,)
    with pytest.raises(ContractViolation):
        as_point([])
    with pytest.raises(ContractViolation):
        as_point([1.0, np.nan])
    with pytest.raises(ContractViolation):
        as_point([np.inf])


finite_vecs = st.integers(min_value=1, max_value=40).flatmap(
    lambda n: st.lists(
        st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
        min_size=n, max_size=n,
    )
)


@given(finite_vecs, st.randoms(use_true_random=False))
@settings(max_examples=200, deadline=None)
def test_inner_symmetry_bit_exact(a, rnd):
    b = [rnd.uniform(-1e6, 1e6) for _ in a]
    assert inner(a, b) == inner(b, a)


@given(finite_vecs, st.randoms(use_true_random=False))
@settings(max_examples=200, deadline=None)
def test_cauchy_schwarz(a, rnd):
    b = [rnd.uniform(-1e6, 1e6) for _ in a]
    lhs = inner(a, b) ** 2
    rhs = norm_sq(a) * norm_sq(b)
    assert lhs <= rhs * (1 + 1e-12)


# entries whose square does not underflow to zero
representable = st.one_of(
    st.just(0.0),
    st.floats(min_value=1e-150, max_value=1e6),
    st.floats(min_value=-1e6, max_value=-1e-150),
)


@given(st.lists(representable, min_size=1, max_size=40))
@settings(max_examples=200, deadline=None)
def test_norm_sq_zero_iff_zero_vector(a):
    assert (norm_sq(a) == 0.0) == all(v == 0.0 for v in a)


def test_row_norm_sq_matches_norm_sq():
    rng = np.random.default_rng(5)
    M = rng.standard_normal((17, 9))
    rows = row_norm_sq(M)
    for i in range(M.shape[0]):
        assert rows[i] == norm_sq(M[i])
