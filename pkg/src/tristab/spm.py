"""Subsystem phase matrices and the tripartite condition classifier.

For generators ``g_i`` and a party ``A`` the matrix entry is
``M_A[i, j] = r_i^T Omega_A r_j`` where ``r_i`` is the (x|z) vector of
``g_i`` and ``Omega_A`` the symplectic form restricted to A's qudits.  Each
``M_A`` is antisymmetric and the matrices sum to zero over a partition
because the generators commute.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import ring
from .pauli import restricted_form
from .stabilizer import StabilizerGroup


@dataclass(frozen=True, eq=False)
class SpmSet:
    d: int
    labels: tuple[str, ...]
    matrices: tuple[np.ndarray, ...]

    def __getitem__(self, label: str) -> np.ndarray:
        return self.matrices[self.labels.index(label)]

    @property
    def size(self) -> int:
        return self.matrices[0].shape[0] if self.matrices else 0

    def as_dict(self) -> dict[str, np.ndarray]:
        return dict(zip(self.labels, self.matrices))

    def equals(self, other: "SpmSet") -> bool:
        return (
            self.d == other.d
            and self.labels == other.labels
            and all(np.array_equal(a, b) for a, b in zip(self.matrices, other.matrices))
        )

    def check_invariants(self) -> list[str]:
        problems = []
        total = np.zeros((self.size, self.size), dtype=np.int64)
        for label, M in zip(self.labels, self.matrices):
            if np.any(np.diag(M) % self.d):
                problems.append(f"M_{label} has a nonzero diagonal")
            if np.any((M + M.T) % self.d):
                problems.append(f"M_{label} is not antisymmetric")
            total = total + M
        if np.any(total % self.d):
            problems.append("matrices do not sum to zero")
        return problems


@dataclass(frozen=True, eq=False)
class ProjectedSpmSet:
    p: int
    labels: tuple[str, ...]
    matrices: tuple[np.ndarray, ...]

    def __getitem__(self, label: str) -> np.ndarray:
        return self.matrices[self.labels.index(label)]

    def all_zero(self) -> bool:
        return not any(M.any() for M in self.matrices)


@dataclass(frozen=True, eq=False)
class Condition1:
    pass


@dataclass(frozen=True, eq=False)
class Condition2:
    v: np.ndarray
    n_prime: int


@dataclass(frozen=True, eq=False)
class Condition3:
    parties: tuple[str, str]
    v: np.ndarray


ConditionResult = Union[Condition1, Condition2, Condition3]


def compute_spm(S: StabilizerGroup) -> SpmSet:
    G = S.matrix()
    mats = []
    for label in S.partition.labels:
        om = restricted_form(S.n_qudits, S.partition.qudits(label))
        mats.append((G @ om @ G.T) % S.d)
    return SpmSet(S.d, S.partition.labels, tuple(mats))


def project_mod_p(spm: SpmSet, p: int | None = None) -> ProjectedSpmSet:
    if p is None:
        p = ring.RingParams.from_dimension(spm.d).p
    if spm.d % p:
        raise ValueError(f"{p} does not divide d={spm.d}")
    return ProjectedSpmSet(p, spm.labels, tuple(M % p for M in spm.matrices))


def transform_basis(spm: SpmSet, L) -> SpmSet:
    L = np.asarray(L, dtype=np.int64) % spm.d
    if L.shape != (spm.size, spm.size) or not ring.is_invertible(L, spm.d):
        raise ValueError("basis transform needs an invertible square matrix")
    return SpmSet(spm.d, spm.labels, tuple((L @ M @ L.T) % spm.d for M in spm.matrices))


def _in_span(v, M, D) -> bool:
    # Column span of an antisymmetric matrix equals its row span.
    return ring.row_span_contains(v, M, D)


def triple_intersection(spm: SpmSet) -> np.ndarray:
    acc = spm.matrices[0]
    for M in spm.matrices[1:]:
        acc = ring.span_intersection(acc, M, spm.d)
        if acc.shape[0] == 0:
            break
    return acc


def check_witness(spm: SpmSet, params: ring.RingParams, result: ConditionResult) -> list[str]:
    """Problems with a Condition2/3 witness (empty list when it is sound)."""
    D, p, n = params.D, params.p, params.n
    problems = []
    if isinstance(result, Condition2):
        if ring.element_order(result.v, D) != D:
            problems.append("witness does not have full order")
        scaled = (p ** (n - result.n_prime) * result.v) % D
        for label, M in zip(spm.labels, spm.matrices):
            if not _in_span(scaled, M, D):
                problems.append(f"scaled witness is outside span(M_{label})")
    elif isinstance(result, Condition3):
        others = [lab for lab in spm.labels if lab not in result.parties]
        for label in result.parties:
            if not _in_span(result.v, spm[label], D):
                problems.append(f"witness is outside span(M_{label})")
        top = (p ** (n - 1) * result.v) % D
        for label in others:
            if _in_span(top, spm[label], D):
                problems.append(f"p^(n-1) v lies in span(M_{label})")
    return problems


def classify_condition(spm: SpmSet, params: ring.RingParams) -> ConditionResult:
    if len(spm.labels) != 3:
        raise ValueError(f"classification needs exactly 3 parties, got {len(spm.labels)}")
    if spm.d != params.D:
        raise ValueError("ring does not match the matrices")
    D, p, n = params.D, params.p, params.n
    if project_mod_p(spm, p).all_zero():
        return Condition1()

    inter = triple_intersection(spm)
    if inter.shape[0]:
        orders = [ring.element_order(row, D) for row in inter]
        best = int(np.argmax(orders))
        vbar = inter[best]
        n_prime = params.valuation(orders[best])
        shift = p ** (n - n_prime)
        v = ring.solve(shift * np.eye(spm.size, dtype=np.int64), vbar, D)
        assert v is not None
        return Condition2(v % D, n_prime)

    try:
        result = _condition3(spm, params)
    except (StopIteration, AssertionError):
        result = None
    if result is None or check_witness(spm, params, result):
        result = _condition3_search(spm, params)
        if result is None:
            raise AssertionError("no condition holds; the matrices are not a valid set")
    return result


def _condition3(spm: SpmSet, params: ring.RingParams) -> Condition3:
    """Build the Condition3 witness by the basis change L of the existence proof."""
    D, p, n = params.D, params.p, params.n
    K = spm.size
    labels = spm.labels
    top = p ** (n - 1)

    a = next(lab for lab in labels if (spm[lab] % p).any())
    Ma = spm[a]
    col = next(j for j in range(K) if (Ma[:, j] % p).any())
    v = Ma[:, col] % D
    rest = [lab for lab in labels if lab != a]
    c = next((lab for lab in rest if not _in_span((top * v) % D, spm[lab], D)), None)
    if c is None:
        raise AssertionError("p^(n-1) v lies in every span")
    b = next(lab for lab in rest if lab != c)
    Mc = spm[c]

    # (1) L1 with L1 v = e1: complete v (which has a unit entry) to a basis.
    piv = next(i for i in range(K) if ring.is_unit(int(v[i]), D))
    cols = [v] + [np.eye(K, dtype=np.int64)[i] for i in range(K) if i != piv]
    B = np.array(cols, dtype=np.int64).T % D  # B e1 = v
    L = ring.matrix_inverse(B, D)

    # (2) Clear the first row/column of M_c with L2 = I + e1 t^T, which keeps
    # L v = e1.  Need t with (L M_c L^T)[0, 1:] + t^T (L M_c L^T)[1:, 1:] = 0,
    # i.e. a kernel vector k of M_c with k . v = 1 (k = L^T (1, t)).
    ker = ring.kernel(Mc % D, D)
    kvec = None
    for row in ker:
        dot = int(row @ v) % D
        if ring.is_unit(dot, D):
            kvec = (row * ring.inverse(dot, D)) % D
            break
    if kvec is None:
        # Combine kernel rows: some combination has unit dot product because
        # the kernel pairs nondegenerately with v modulo p.
        dots = (ker @ v) % D
        coeffs = ring.solve(dots.reshape(1, -1), np.array([1]), D)
        if coeffs is None:
            raise AssertionError("no kernel vector of M_c pairs to a unit with v")
        kvec = (coeffs @ ker) % D
    # k = L^T (1, t)  =>  (1, t) = (L^T)^-1 k = B^T k
    tt = (B.T @ kvec) % D
    assert tt[0] % D == 1
    L2 = np.eye(K, dtype=np.int64)
    L2[0, 1:] = tt[1:]
    L = (L2 @ L) % D

    # (3) Make the first row of L M_a L^T equal to e2 using ops on indices >= 1.
    # With R a basis completion whose first row is that row, row @ R^-1 = e1.
    Ma_t = (L @ Ma @ L.T) % D
    row = Ma_t[0, 1:] % D
    piv = next(i for i in range(K - 1) if ring.is_unit(int(row[i]), D))
    rows = [row] + [np.eye(K - 1, dtype=np.int64)[i] for i in range(K - 1) if i != piv]
    CT = ring.matrix_inverse(np.array(rows, dtype=np.int64) % D, D)
    L3 = np.eye(K, dtype=np.int64)
    L3[1:, 1:] = CT.T
    L = (L3 @ L) % D

    e2 = np.zeros(K, dtype=np.int64)
    e2[1] = 1
    v_prime = (ring.matrix_inverse(L, D) @ e2) % D
    return Condition3((a, b), v_prime)


def _condition3_search(spm: SpmSet, params: ring.RingParams) -> Condition3 | None:
    D, p, n = params.D, params.p, params.n
    labels = spm.labels
    for i in range(3):
        for j in range(i + 1, 3):
            pair = (labels[i], labels[j])
            other = next(lab for lab in labels if lab not in pair)
            inter = ring.span_intersection(spm[pair[0]], spm[pair[1]], D)
            for v in inter:
                if not _in_span((p ** (n - 1) * v) % D, spm[other], D):
                    return Condition3(pair, v % D)
    return None


def spm_text(spm: SpmSet, p: int | None = None) -> str:
    """Row-major text block of each M and its mod-p projection."""
    proj = project_mod_p(spm, p)
    lines = []
    for label, M, Mp in zip(spm.labels, spm.matrices, proj.matrices):
        lines.append(f"M[{label}] (mod {spm.d})")
        lines.extend(" ".join(str(int(e)) for e in row) for row in M)
        lines.append(f"M'[{label}] (mod {proj.p})")
        lines.extend(" ".join(str(int(e)) for e in row) for row in Mp)
    return "\n".join(lines)


def spm_json(spm: SpmSet, p: int | None = None) -> dict:
    proj = project_mod_p(spm, p)
    return {
        "d": spm.d,
        "p": proj.p,
        "parties": {
            label: {
                "M": [[int(e) for e in row] for row in M],
                "M_mod_p": [[int(e) for e in row] for row in Mp],
            }
            for label, M, Mp in zip(spm.labels, spm.matrices, proj.matrices)
        },
    }
