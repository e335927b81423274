import numpy as np
import pytest

from tristab import ring
from tristab.oracle import random_stabilizer_group
from tristab.spm import (
    Condition1,
    Condition2,
    Condition3,
    check_witness,
    classify_condition,
    compute_spm,
    project_mod_p,
    spm_json,
    spm_text,
    transform_basis,
)
from tristab.stabilizer import Partition, StabilizerGroup, change_generators

from conftest import epr_group, ghz_group, pauli, product_group


def tripartite(S):
    return StabilizerGroup(S.d, S.n_qudits, S.gens, S.partition.padded(["a", "b", "c"]))


def test_ghz3_matrices():
    S = StabilizerGroup(
        3,
        3,
        (pauli(3, [1, 1, 1], [0, 0, 0]), pauli(3, [0, 0, 0], [1, 2, 0]), pauli(3, [0, 0, 0], [0, 1, 2])),
        Partition.singletons(3),
    )
    spm = compute_spm(S)
    assert (spm["a"] % 3).tolist() == (np.array([[0, 1, 0], [-1, 0, 0], [0, 0, 0]]) % 3).tolist()
    assert (spm["b"] % 3).tolist() == (np.array([[0, -1, 1], [1, 0, 0], [-1, 0, 0]]) % 3).tolist()
    assert (spm["c"] % 3).tolist() == (np.array([[0, 0, -1], [0, 0, 0], [1, 0, 0]]) % 3).tolist()
    assert spm.check_invariants() == []


def test_product_state_is_zero():
    spm = compute_spm(product_group(9, 3))
    assert not any(M.any() for M in spm.matrices)


def test_ghz9_matrices(ghz9):
    spm = compute_spm(ghz9)
    assert spm["a"].tolist() == [[0, 1, 1], [8, 0, 0], [8, 0, 0]]
    assert spm["b"].tolist() == [[0, 8, 0], [1, 0, 0], [0, 0, 0]]
    assert spm["c"].tolist() == [[0, 0, 8], [0, 0, 0], [1, 0, 0]]


def test_projection():
    S = StabilizerGroup(4, 1, (pauli(4, [2], [0]), pauli(4, [0], [2])), Partition.from_dict({"a": [0]}))
    spm = compute_spm(S)
    assert spm["a"].tolist() == [[0, 0], [0, 0]]
    assert project_mod_p(spm).all_zero()
    M = compute_spm(ghz_group(9))
    scaled = type(M)(9, M.labels, tuple((3 * m) % 9 for m in M.matrices))
    assert project_mod_p(scaled).all_zero()


class TestTransformBasis:
    def test_identity(self, ghz9):
        spm = compute_spm(ghz9)
        assert transform_basis(spm, np.eye(3, dtype=int)).equals(spm)

    def test_permutation(self, ghz9):
        spm = compute_spm(ghz9)
        P = np.eye(3, dtype=int)[[2, 0, 1]]
        out = transform_basis(spm, P)
        assert out["a"].tolist() == spm["a"][np.ix_([2, 0, 1], [2, 0, 1])].tolist()

    def test_matches_change_generators(self, ghz9):
        rng = np.random.default_rng(5)
        for _ in range(10):
            L = rng.integers(0, 9, size=(3, 3))
            if not ring.is_invertible(L, 9):
                continue
            assert transform_basis(compute_spm(ghz9), L).equals(compute_spm(change_generators(ghz9, L)))

    def test_non_invertible(self, ghz9):
        with pytest.raises(ValueError):
            transform_basis(compute_spm(ghz9), np.zeros((3, 3), dtype=int))


class TestClassify:
    def test_condition1(self):
        S = StabilizerGroup(4, 1, (pauli(4, [2], [0]), pauli(4, [0], [2])), Partition.from_dict({"a": [0]}))
        assert isinstance(classify_condition(compute_spm(tripartite(S)), ring.RingParams(2, 2)), Condition1)

    def test_condition2_ghz9(self, ghz9):
        res = classify_condition(compute_spm(ghz9), ring.RingParams(3, 2))
        assert isinstance(res, Condition2)
        assert res.n_prime == 2
        assert res.v.tolist() == [1, 0, 0]

    @pytest.mark.parametrize("p", [2, 3, 5])
    def test_condition3_epr(self, p):
        S = tripartite(epr_group(p))
        res = classify_condition(compute_spm(S), ring.RingParams(p, 1))
        assert isinstance(res, Condition3)
        assert set(res.parties) == {"a", "b"}
        assert res.v.tolist() == [1, 0]

    def test_requires_three_parties(self):
        with pytest.raises(ValueError):
            classify_condition(compute_spm(epr_group(3)), ring.RingParams(3, 1))

    @pytest.mark.parametrize("d", [2, 3, 4, 8, 9])
    def test_exhaustive_with_sound_witnesses(self, d):
        params = ring.RingParams.from_dimension(d)
        seen = set()
        for seed in range(100):
            S = random_stabilizer_group(d, 1 + seed % 4, seed)
            spm = compute_spm(S)
            assert spm.check_invariants() == []
            res = classify_condition(spm, params)
            seen.add(type(res).__name__)
            assert check_witness(spm, params, res) == []
            if isinstance(res, Condition1):
                assert project_mod_p(spm).all_zero()
            elif isinstance(res, Condition3):
                assert ring.element_order(res.v, d) == d
        assert len(seen) >= 2


def test_text_and_json(ghz9):
    spm = compute_spm(ghz9)
    text = spm_text(spm)
    assert text.splitlines()[0] == "M[a] (mod 9)"
    assert "0 1 1" in text.splitlines()[1]
    data = spm_json(spm)
    assert data["parties"]["b"]["M"][0] == [0, 8, 0]
    assert data["parties"]["b"]["M_mod_p"][0] == [0, 2, 0]
