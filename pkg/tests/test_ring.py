import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tristab import ring

from conftest import enumerate_span


def small_matrices(moduli=(4, 8, 9), max_dim=4):
    @st.composite
    def build(draw):
        d = draw(st.sampled_from(moduli))
        rows = draw(st.integers(1, max_dim))
        cols = draw(st.integers(1, max_dim))
        entries = draw(st.lists(st.integers(0, d - 1), min_size=rows * cols, max_size=rows * cols))
        return d, np.array(entries, dtype=np.int64).reshape(rows, cols)

    return build()


def all_vectors(d, n):
    return [np.array(v, dtype=np.int64) for v in itertools.product(range(d), repeat=n)]


class TestRingParams:
    def test_from_dimension(self):
        r = ring.RingParams.from_dimension(27)
        assert (r.p, r.n, r.D) == (3, 3, 27)

    def test_rejects_composite_prime(self):
        with pytest.raises(ValueError):
            ring.RingParams(4, 1)

    def test_rejects_non_prime_power(self):
        with pytest.raises(ValueError):
            ring.RingParams.from_dimension(6)

    def test_valuation(self):
        r = ring.RingParams(3, 3)
        assert [r.valuation(a) for a in (1, 3, 9, 18, 27)] == [0, 1, 2, 2, 3]

    def test_factorize(self):
        assert ring.factorize(12) == [(2, 2), (3, 1)]
        assert ring.factorize(9) == [(3, 2)]


class TestHowellForm:
    def test_diagonal_two_over_z4(self):
        hf = ring.howell_form([[2, 0], [0, 2]], 4)
        assert hf.divisors == (2, 2)
        assert hf.basis.tolist() == [[2, 0], [0, 2]]
        assert hf.span_size() == len(enumerate_span([[2, 0], [0, 2]], 4)) == 4

    def test_identity_over_z9(self):
        hf = ring.howell_form(np.eye(2, dtype=int), 9)
        assert hf.basis.tolist() == [[1, 0], [0, 1]]
        assert hf.divisors == (1, 1)

    def test_z9_example_span_size(self):
        # Enumeration of all 81 combinations gives 3 distinct vectors: (6,3) = 2*(3,6).
        span = enumerate_span([[3, 6], [6, 3]], 9)
        hf = ring.howell_form([[3, 6], [6, 3]], 9)
        assert hf.span_size() == len(span) == 3
        assert hf.divisors == (3,)

    def test_empty(self):
        hf = ring.howell_form(np.zeros((0, 3), dtype=int), 9)
        assert hf.rank == 0 and hf.span_size() == 1

    def test_deterministic(self):
        M = [[3, 1, 4], [1, 5, 0], [2, 6, 5]]
        a, b = ring.howell_form(M, 8), ring.howell_form(M, 8)
        assert np.array_equal(a.basis, b.basis) and np.array_equal(a.transform, b.transform)

    @settings(max_examples=80, deadline=None)
    @given(small_matrices(max_dim=3))
    def test_span_matches_enumeration(self, data):
        d, M = data
        hf = ring.howell_form(M, d)
        assert enumerate_span(hf.basis, d, M.shape[1]) == enumerate_span(M, d)
        assert np.array_equal((hf.transform @ M) % d, hf.basis)
        assert hf.span_size() == len(enumerate_span(M, d))

    @settings(max_examples=60, deadline=None)
    @given(small_matrices(max_dim=3))
    def test_canonical_for_equal_spans(self, data):
        d, M = data
        shuffled = np.concatenate([M[::-1], (2 * M) % d])
        assert np.array_equal(ring.howell_form(M, d).basis, ring.howell_form(shuffled, d).basis)


class TestSolve:
    def test_canonical_pick(self):
        assert ring.solve([[2]], [2], 4).tolist() == [1]

    def test_unsolvable(self):
        assert ring.solve([[2]], [1], 4) is None

    def test_identity(self):
        assert ring.solve(np.eye(3, dtype=int), [4, 5, 6], 9).tolist() == [4, 5, 6]

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            ring.solve([[1, 0]], [1, 2], 4)

    @settings(max_examples=60, deadline=None)
    @given(small_matrices(moduli=(4, 8, 9), max_dim=3), st.integers(0, 10**6))
    def test_against_exhaustive_search(self, data, salt):
        d, M = data
        rng = np.random.default_rng(salt)
        b = rng.integers(0, d, size=M.shape[0])
        x = ring.solve(M, b, d)
        if x is not None:
            assert np.array_equal((M @ x) % d, b % d)
        else:
            assert not any(np.array_equal((M @ v) % d, b % d) for v in all_vectors(d, M.shape[1]))


class TestKernel:
    def test_scalar_two(self):
        ker = ring.kernel([[2]], 4)
        assert enumerate_span(ker, 4) == {(0,), (2,)}

    def test_zero_matrix(self):
        ker = ring.kernel(np.zeros((2, 3), dtype=int), 9)
        assert ker.tolist() == np.eye(3, dtype=int).tolist()

    def test_invertible_over_z3(self):
        assert ring.kernel([[0, 1], [-1, 0]], 3).shape[0] == 0

    @settings(max_examples=60, deadline=None)
    @given(small_matrices(max_dim=3))
    def test_against_enumeration(self, data):
        d, M = data
        ker = ring.kernel(M, d)
        for row in ker:
            assert not ((M @ row) % d).any()
        expected = {tuple(v) for v in all_vectors(d, M.shape[1]) if not ((M @ v) % d).any()}
        assert enumerate_span(ker, d, M.shape[1]) == expected


class TestSpanIntersection:
    def test_coordinate_planes(self):
        I = np.eye(3, dtype=int)
        inter = ring.span_intersection(I[[0, 1]], I[[0, 2]], 3)
        assert enumerate_span(inter, 3) == {(0, 0, 0), (1, 0, 0), (2, 0, 0)}

    def test_same_span(self):
        A = np.array([[1, 2], [0, 3]])
        assert enumerate_span(ring.span_intersection(A, A, 9), 9) == enumerate_span(A, 9)

    def test_subgroup(self):
        inter = ring.span_intersection([[3, 0]], [[1, 0]], 9)
        assert enumerate_span(inter, 9) == enumerate_span([[3, 0]], 9)

    @settings(max_examples=50, deadline=None)
    @given(small_matrices(moduli=(4, 8, 9), max_dim=2), st.integers(0, 10**6))
    def test_against_enumeration(self, data, salt):
        d, A = data
        B = np.random.default_rng(salt).integers(0, d, size=(2, A.shape[1]))
        inter = ring.span_intersection(A, B, d)
        assert enumerate_span(inter, d, A.shape[1]) == enumerate_span(A, d) & enumerate_span(B, d)


class TestOrderAndMembership:
    def test_orders(self):
        assert ring.element_order([3, 6], 9) == 3
        assert ring.element_order([1, 0], 9) == 9
        assert ring.element_order([0, 0], 9) == 1

    @settings(max_examples=100, deadline=None)
    @given(st.sampled_from([4, 8, 9, 27]), st.lists(st.integers(0, 26), min_size=1, max_size=4))
    def test_order_is_minimal(self, d, v):
        v = np.array(v) % d
        k = ring.element_order(v, d)
        assert not ((k * v) % d).any()
        if k > 1:
            p = ring.RingParams.from_dimension(d).p
            assert ((k // p) * v % d).any()

    def test_membership(self):
        assert ring.span_membership([2], [[2]], 4)
        assert not ring.span_membership([1], [[2]], 4)
        assert ring.span_membership([0, 0], [[1, 2], [3, 3]], 9)

    def test_inverse_roundtrip(self):
        L = np.array([[1, 3], [2, 7]])
        inv = ring.matrix_inverse(L, 9)
        assert ((inv @ L) % 9).tolist() == [[1, 0], [0, 1]]
        assert not ring.is_invertible([[3, 0], [0, 1]], 9)
