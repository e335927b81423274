"""Stabilizer groups given by (possibly redundant) generating sets.

A group is described by an ordered generator list and a partition of its
qudits into parties.  The coefficient map ``F`` (``group_element``) sends a
vector ``c`` over Z_d to the ordered product ``g_0**c_0 * ... * g_k**c_k``;
``f`` (``coefficients_of``) goes the other way on exponent vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import ring
from .pauli import PauliOp, commutation_phase, multiply, power


@dataclass(frozen=True)
class Partition:
    """Ordered mapping of party label -> qudit indices."""

    parties: tuple[tuple[str, tuple[int, ...]], ...]

    def __post_init__(self):
        seen: set[int] = set()
        labels: set[str] = set()
        norm = []
        for label, qudits in self.parties:
            if label in labels:
                raise ValueError(f"duplicate party label {label!r}")
            labels.add(label)
            qs = tuple(int(q) for q in qudits)
            for q in qs:
                if q < 0:
                    raise ValueError(f"negative qudit index {q}")
                if q in seen:
                    raise ValueError(f"qudit {q} assigned to more than one party")
                seen.add(q)
            norm.append((str(label), qs))
        if not norm:
            raise ValueError("a partition needs at least one party")
        object.__setattr__(self, "parties", tuple(norm))

    @classmethod
    def from_dict(cls, mapping: Mapping[str, Iterable[int]]) -> "Partition":
        return cls(tuple((k, tuple(v)) for k, v in mapping.items()))

    @classmethod
    def singletons(cls, n: int, labels: Sequence[str] = ("a", "b", "c")) -> "Partition":
        """One qudit per party, labelled a, b, c, ... (extra labels ignored)."""
        if n > len(labels):
            labels = [f"p{i}" for i in range(n)]
        return cls(tuple((labels[i], (i,)) for i in range(n)))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.parties)

    def qudits(self, label: str) -> tuple[int, ...]:
        for lab, qs in self.parties:
            if lab == label:
                return qs
        raise KeyError(f"unknown party {label!r}")

    def party_of(self, qudit: int) -> str:
        for lab, qs in self.parties:
            if qudit in qs:
                return lab
        raise KeyError(f"qudit {qudit} belongs to no party")

    def all_qudits(self) -> list[int]:
        return sorted(q for _, qs in self.parties for q in qs)

    def as_dict(self) -> dict[str, list[int]]:
        return {label: list(qs) for label, qs in self.parties}

    def relabel(self, mapping: Mapping[str, str]) -> "Partition":
        return Partition(tuple((mapping.get(lab, lab), qs) for lab, qs in self.parties))

    def padded(self, labels: Sequence[str]) -> "Partition":
        """Add empty parties for any of ``labels`` not present."""
        extra = tuple((lab, ()) for lab in labels if lab not in self.labels)
        return Partition(self.parties + extra)


@dataclass(frozen=True)
class StabilizerGroup:
    d: int
    n_qudits: int
    gens: tuple[PauliOp, ...]
    partition: Partition

    def __post_init__(self):
        object.__setattr__(self, "gens", tuple(self.gens))
        for g in self.gens:
            if g.d != self.d:
                raise ValueError(f"generator dimension {g.d} differs from group dimension {self.d}")
            if g.n_qudits != self.n_qudits:
                raise ValueError(f"generator on {g.n_qudits} qudits, group has {self.n_qudits}")
        covered = self.partition.all_qudits()
        if covered != list(range(self.n_qudits)):
            raise ValueError(f"partition covers qudits {covered}, expected 0..{self.n_qudits - 1}")

    @property
    def ring(self) -> ring.RingParams:
        return ring.RingParams.from_dimension(self.d)

    @property
    def n_gens(self) -> int:
        return len(self.gens)

    def matrix(self) -> np.ndarray:
        """Stacked (x|z) generator rows, shape (n_gens, 2N)."""
        if not self.gens:
            return np.zeros((0, 2 * self.n_qudits), dtype=np.int64)
        return np.array([g.vector for g in self.gens], dtype=np.int64)

    def with_gens(self, gens: Iterable[PauliOp]) -> "StabilizerGroup":
        return StabilizerGroup(self.d, self.n_qudits, tuple(gens), self.partition)

    def identity(self) -> PauliOp:
        return PauliOp.identity(self.d, self.n_qudits)


@dataclass
class ValidationReport:
    commutation_failures: list[tuple[int, int, int]] = field(default_factory=list)
    phase_failures: list[str] = field(default_factory=list)
    order: int = 0
    expected_order: int = 0

    @property
    def valid(self) -> bool:
        return not self.commutation_failures and not self.phase_failures

    @property
    def pure(self) -> bool:
        return self.valid and self.order == self.expected_order

    def messages(self) -> list[str]:
        out = [f"generators {i} and {j} do not commute (phase w^{c})" for i, j, c in self.commutation_failures]
        out.extend(self.phase_failures)
        if self.valid and not self.pure:
            out.append(f"group order {self.order} != {self.expected_order}; state is not pure")
        return out


def group_order(S: StabilizerGroup) -> int:
    if not S.gens:
        return 1
    return ring.howell_form(S.matrix(), S.d).span_size()


def validate(S: StabilizerGroup) -> ValidationReport:
    report = ValidationReport(expected_order=S.d**S.n_qudits)
    for i in range(S.n_gens):
        for j in range(i + 1, S.n_gens):
            c = commutation_phase(S.gens[i], S.gens[j])
            if c:
                report.commutation_failures.append((i, j, c))
    ident = S.identity()
    for i, g in enumerate(S.gens):
        gd = power(g, S.d)
        if gd != ident:
            report.phase_failures.append(f"generator {i} to the power d is w^{gd.gamma2}/2 I, not I")
    if report.commutation_failures:
        report.order = 0
        return report
    if S.gens and not report.phase_failures:
        # With commuting generators of order d, F is a homomorphism, so the
        # relation module's Howell basis is enough to certify that no nontrivial
        # multiple of the identity is in the group.
        for k in ring.left_kernel(S.matrix(), S.d):
            el = group_element(S, k)
            if el != ident:
                report.phase_failures.append(
                    f"relation {list(map(int, k))} yields w^{el.gamma2}/2 times the identity"
                )
    report.order = group_order(S)
    return report


def group_element(S: StabilizerGroup, c) -> PauliOp:
    """The map F: ordered product of generator powers."""
    c = [int(e) for e in np.asarray(c, dtype=np.int64).reshape(-1)]
    if len(c) != S.n_gens:
        raise ValueError(f"coefficient vector has length {len(c)}, expected {S.n_gens}")
    out = S.identity()
    for g, e in zip(S.gens, c):
        e %= S.d
        if e:
            out = multiply(out, power(g, e))
    return out


def coefficients_of(S: StabilizerGroup, g: PauliOp) -> np.ndarray | None:
    """The map f: coefficients reproducing ``g``'s exponent vector, if any."""
    if S.n_gens == 0:
        return np.zeros(0, dtype=np.int64) if g.is_identity() else None
    return ring.solve(S.matrix().T, g.vector, S.d)


def commutant_phase_lookup(S: StabilizerGroup, g: PauliOp) -> int:
    """Doubled phase ``phi2`` such that ``w**(phi2/2) * g`` lies in S."""
    for i, s in enumerate(S.gens):
        if commutation_phase(g, s):
            raise ValueError(f"operator does not commute with generator {i}")
    c = coefficients_of(S, g)
    if c is None:
        raise ValueError("commuting operator is not in the group up to phase; the group is not pure")
    return (group_element(S, c).gamma2 - g.gamma2) % (2 * S.d)


def change_generators(S: StabilizerGroup, L) -> StabilizerGroup:
    L = np.asarray(L, dtype=np.int64) % S.d
    if L.shape != (S.n_gens, S.n_gens) or not ring.is_invertible(L, S.d):
        raise ValueError("change of generators needs an invertible square matrix")
    return S.with_gens(group_element(S, row) for row in L)


def minimized(S: StabilizerGroup) -> StabilizerGroup:
    """Same group, generated by F of the Howell-basis transform rows."""
    if not S.gens:
        return S
    hf = ring.howell_form(S.matrix(), S.d)
    return S.with_gens(group_element(S, row) for row in hf.transform)


def local_subgroup_size(S: StabilizerGroup, qudits: Sequence[int]) -> int:
    """Number of group elements acting trivially outside ``qudits``."""
    if not S.gens:
        return 1
    N = S.n_qudits
    inside = set(qudits)
    outside = [q for q in range(N) if q not in inside]
    cols = outside + [N + q for q in outside]
    G = S.matrix()
    if not cols:
        return ring.howell_form(G, S.d).span_size()
    K = ring.left_kernel(G[:, cols], S.d)
    if K.shape[0] == 0:
        return 1
    return ring.howell_form((K @ G) % S.d, S.d).span_size()


def cut_entropy(S: StabilizerGroup, qudits: Sequence[int]) -> int:
    """Entanglement entropy of ``qudits`` versus the rest, in units of log p."""
    params = S.ring
    size = local_subgroup_size(S, qudits)
    k = round(math.log(size, params.p))
    if params.p**k != size:
        raise AssertionError("local subgroup size is not a power of p")
    return params.n * len(qudits) - k


def crt_split(S: StabilizerGroup) -> list[StabilizerGroup]:
    """Split a group over composite non-prime-power d into prime-power factors.

    Uses Z_d = prod Z_q via ``j -> (j mod q)``, under which ``X_d`` becomes
    ``(x) X_q`` and ``Z_d`` becomes ``(x) Z_q**u_q`` with ``u_q = (d/q)^-1 mod q``.
    The factor-q part of each generator is ``g**e_q`` for the CRT idempotent
    ``e_q``; its phase w_d^(g2/2) equals w_q^(g2 q/d / 2).
    """
    d = S.d
    fac = ring.factorize(d)
    if len(fac) < 2:
        raise ValueError(f"d={d} is a prime power; nothing to split")
    out = []
    for p, e in fac:
        q = p**e
        rest = d // q
        u = pow(rest, -1, q)
        idem = (rest * u) % d
        gens = []
        for g in S.gens:
            h = power(g, idem)
            if (h.gamma2 * q) % d:
                raise ValueError("generator phase does not survive the CRT split")
            gens.append(
                PauliOp(
                    q,
                    tuple(x % q for x in h.x),
                    tuple((u * z) % q for z in h.z),
                    (h.gamma2 * q // d) % (2 * q),
                )
            )
        out.append(StabilizerGroup(q, S.n_qudits, tuple(gens), S.partition))
    return out
