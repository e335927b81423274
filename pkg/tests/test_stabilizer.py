import itertools

import numpy as np
import pytest

from tristab.oracle import crt_combine, fidelity, pauli_matrix, random_stabilizer_group, state_from_group
from tristab.pauli import PauliOp, order
from tristab.spm import compute_spm, transform_basis
from tristab.stabilizer import (
    Partition,
    StabilizerGroup,
    change_generators,
    coefficients_of,
    commutant_phase_lookup,
    crt_split,
    cut_entropy,
    group_element,
    group_order,
    minimized,
    validate,
)

from conftest import epr_group, ghz_group, pauli


def projector(S):
    dim = S.d**S.n_qudits
    P = np.eye(dim, dtype=complex)
    for g in S.gens:
        G = pauli_matrix(g)
        acc = np.zeros_like(P)
        cur = np.eye(dim, dtype=complex)
        m = order(g)
        for _ in range(m):
            acc += cur
            cur = G @ cur
        P = (acc / m) @ P
    return P


def element_set(S):
    out = set()
    for c in itertools.product(range(S.d), repeat=S.n_gens):
        g = group_element(S, c)
        out.add((g.x, g.z, g.gamma2))
    return out


class TestPartition:
    def test_overlap_rejected(self):
        with pytest.raises(ValueError):
            Partition.from_dict({"a": [0, 1], "b": [1]})

    def test_coverage_checked(self):
        with pytest.raises(ValueError):
            StabilizerGroup(3, 2, (pauli(3, [1, 1], [0, 0]),), Partition.from_dict({"a": [0]}))

    def test_lookup(self):
        P = Partition.from_dict({"a": [0, 2], "b": [1]})
        assert P.party_of(2) == "a" and P.qudits("b") == (1,)
        assert P.padded(["a", "b", "c"]).labels == ("a", "b", "c")


class TestValidate:
    def test_single_qudit_d4(self):
        S = StabilizerGroup(4, 1, (pauli(4, [2], [0]), pauli(4, [0], [2])), Partition.from_dict({"a": [0]}))
        rep = validate(S)
        assert rep.pure and rep.order == 4

    def test_ghz9(self, ghz9):
        rep = validate(ghz9)
        assert rep.pure and rep.order == 729

    def test_anticommuting(self):
        S = StabilizerGroup(3, 1, (pauli(3, [1], [0]), pauli(3, [0], [1])), Partition.from_dict({"a": [0]}))
        rep = validate(S)
        assert not rep.valid
        assert rep.commutation_failures == [(0, 1, 2)]

    def test_identity_phase_relation(self):
        # X^2 and w^1 X^2 together put w * I into the group.
        S = StabilizerGroup(4, 1, (pauli(4, [2], [0]), pauli(4, [2], [0], 2)), Partition.from_dict({"a": [0]}))
        assert not validate(S).valid

    def test_bad_power(self):
        S = StabilizerGroup(2, 1, (pauli(2, [1], [0], 1),), Partition.from_dict({"a": [0]}))
        assert validate(S).phase_failures

    def test_not_pure(self):
        S = StabilizerGroup(3, 2, (pauli(3, [0, 0], [1, 0]),), Partition.from_dict({"a": [0, 1]}))
        rep = validate(S)
        assert rep.valid and not rep.pure

    @pytest.mark.parametrize("d,n,seed", [(4, 2, 1), (9, 2, 2), (8, 2, 3), (3, 3, 4), (2, 4, 5)])
    def test_pure_means_rank_one_projector(self, d, n, seed):
        S = random_stabilizer_group(d, n, seed)
        assert validate(S).pure
        P = projector(S)
        assert np.linalg.matrix_rank(P, tol=1e-8) == 1
        assert abs(np.trace(P) - 1) < 1e-9
        assert np.allclose(P @ P, P, atol=1e-9)


class TestCoefficientMaps:
    def test_zero(self, ghz9):
        assert group_element(ghz9, [0, 0, 0]) == PauliOp.identity(9, 3)

    def test_first_generator(self, ghz9):
        assert group_element(ghz9, [1, 0, 0]) == pauli(9, [1, 1, 1], [0, 0, 0])

    def test_sum(self, ghz9):
        g = group_element(ghz9, [0, 1, 1])
        assert g == pauli(9, [0, 0, 0], [2, 8, 8], 0)
        G = pauli_matrix(ghz9.gens[1]) @ pauli_matrix(ghz9.gens[2])
        assert np.allclose(pauli_matrix(g), G)

    def test_f_roundtrip(self, ghz9):
        for i, g in enumerate(ghz9.gens):
            assert coefficients_of(ghz9, g).tolist() == [int(i == j) for j in range(3)]
        assert coefficients_of(ghz9, pauli(9, [0, 0, 0], [2, 8, 8])).tolist() == [0, 1, 1]
        assert coefficients_of(ghz9, pauli(9, [1, 0, 0], [0, 0, 0])) is None

    def test_homomorphism_up_to_phase(self):
        S = random_stabilizer_group(9, 2, 7)
        rng = np.random.default_rng(0)
        for _ in range(20):
            c, c2 = rng.integers(0, 9, size=(2, S.n_gens))
            a = group_element(S, c) * group_element(S, c2)
            b = group_element(S, (c + c2) % 9)
            assert (a.x, a.z) == (b.x, b.z)


class TestCommutantLookup:
    def test_generator(self, ghz9):
        assert commutant_phase_lookup(ghz9, ghz9.gens[0]) == 0

    def test_offset(self):
        S = StabilizerGroup(4, 1, (pauli(4, [2], [0]), pauli(4, [0], [2])), Partition.from_dict({"a": [0]}))
        # w^2 X^2: multiplying by w^-2 lands in S; doubled phase -4 = 4 mod 8.
        assert commutant_phase_lookup(S, pauli(4, [2], [0], 4)) == 4

    def test_power_of_generator(self, ghz9):
        g = ghz9.gens[1] ** 3
        assert g == pauli(9, [0, 0, 0], [3, 6, 0])
        assert commutant_phase_lookup(ghz9, g) == 0

    def test_noncommuting(self, ghz9):
        with pytest.raises(ValueError):
            commutant_phase_lookup(ghz9, pauli(9, [0, 0, 0], [1, 0, 0]))


class TestChangeGenerators:
    def test_identity(self, ghz9):
        assert change_generators(ghz9, np.eye(3, dtype=int)).gens == ghz9.gens

    def test_swap(self, ghz9):
        L = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]])
        assert change_generators(ghz9, L).gens == (ghz9.gens[1], ghz9.gens[0], ghz9.gens[2])

    def test_add_row(self, ghz9):
        L = np.array([[1, 0, 0], [0, 1, 1], [0, 0, 1]])
        T = change_generators(ghz9, L)
        assert T.gens[1] == pauli(9, [0, 0, 0], [2, 8, 8])
        assert compute_spm(T).equals(transform_basis(compute_spm(ghz9), L))

    def test_non_invertible(self, ghz9):
        with pytest.raises(ValueError):
            change_generators(ghz9, np.diag([3, 1, 1]))

    def test_same_elements(self):
        S = random_stabilizer_group(4, 2, 3, gens_max=3)
        L = np.array([[1, 2, 0], [0, 1, 0], [3, 1, 1]])
        assert element_set(change_generators(S, L)) == element_set(S)
        assert element_set(minimized(S)) == element_set(S)


class TestCrt:
    def test_epr6(self):
        S = epr_group(6)
        S2, S3 = crt_split(S)
        assert (S2.d, S3.d) == (2, 3)
        assert validate(S2).pure and validate(S3).pure
        target = crt_combine([state_from_group(S2), state_from_group(S3)], [2, 3])
        assert fidelity(target, state_from_group(S)) > 1 - 1e-8

    def test_plus_state(self):
        S = StabilizerGroup(6, 1, (pauli(6, [1], [0]),), Partition.from_dict({"a": [0]}))
        S2, S3 = crt_split(S)
        assert S2.gens == (pauli(2, [1], [0]),) and S3.gens == (pauli(3, [1], [0]),)

    def test_prime_power_rejected(self, ghz9):
        with pytest.raises(ValueError):
            crt_split(ghz9)


def test_cut_entropy_ghz(ghz9):
    assert cut_entropy(ghz9, [0]) == 2
    assert cut_entropy(ghz9, [0, 1]) == 2
    assert group_order(ghz9) == 729
    assert cut_entropy(ghz_group(3), [1]) == 1
