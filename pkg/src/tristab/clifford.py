"""Local Clifford operations, the V gate, and the operation log.

Everything here is symbolic: a gate acts on Pauli operators by conjugation
``sigma -> U sigma U^dagger`` with the phase tracked exactly in doubled units.
Dense matrices for the same gates live in :mod:`tristab.oracle`.

Gate semantics (d the current qudit dimension, w = exp(2 pi i / d))::

    Fourier   H  = d^-1/2 sum_jk w^(jk) |j><k|          X -> Z,      Z -> X^-1
    Phase     P  = sum_j w^(j^2/2) |j><j|               X -> w^1/2 XZ (odd d: w^(1/2) = w^((d+1)/2))
    CZ           = sum_jk w^(jk) |j,k><j,k|             X1 -> X1 Z2,  X2 -> Z1 X2
    Mult(a)      = sum_j |aj><j|                        X -> X^a,    Z -> Z^(1/a)

``Phase`` and ``CZ`` carry a ``power`` so that long runs stay compact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from . import ring
from .pauli import PauliOp, multiply, power, symplectic_form
from .stabilizer import StabilizerGroup, coefficients_of, group_element


# ---------------------------------------------------------------------------
# Elementary gates


def _phase_h(d: int) -> int:
    """Doubled exponent of the phase picked up by X under P."""
    return 1 if d % 2 == 0 else d + 1


def _edit(op: PauliOp, updates: dict[int, tuple[int, int]], dg2: int) -> PauliOp:
    x = list(op.x)
    z = list(op.z)
    for q, (a, b) in updates.items():
        x[q], z[q] = a, b
    return PauliOp(op.d, tuple(x), tuple(z), op.gamma2 + dg2)


@dataclass(frozen=True)
class Fourier:
    q: int
    name = "fourier"

    @property
    def qudits(self) -> tuple[int, ...]:
        return (self.q,)

    def conjugate(self, op: PauliOp) -> PauliOp:
        x, z = op.x[self.q], op.z[self.q]
        # H X^x Z^z H^dag = Z^x X^-z = w^(-xz) X^-z Z^x
        return _edit(op, {self.q: (-z, x)}, -2 * x * z)

    def params(self) -> dict:
        return {}

    def relabel(self, m: Sequence[int]) -> "Fourier":
        return Fourier(m[self.q])


@dataclass(frozen=True)
class Phase:
    q: int
    power: int = 1
    name = "phase"

    @property
    def qudits(self) -> tuple[int, ...]:
        return (self.q,)

    def conjugate(self, op: PauliOp) -> PauliOp:
        d = op.d
        x, z = op.x[self.q], op.z[self.q]
        m = self.power
        return _edit(op, {self.q: (x, z + m * x)}, m * (_phase_h(d) * x + x * (x - 1)))

    def params(self) -> dict:
        return {"power": self.power}

    def relabel(self, m: Sequence[int]) -> "Phase":
        return Phase(m[self.q], self.power)


@dataclass(frozen=True)
class CZ:
    q1: int
    q2: int
    power: int = 1
    name = "cz"

    def __post_init__(self):
        if self.q1 == self.q2:
            raise ValueError("CZ needs two distinct qudits")

    @property
    def qudits(self) -> tuple[int, ...]:
        return (self.q1, self.q2)

    def conjugate(self, op: PauliOp) -> PauliOp:
        m = self.power
        x1, z1 = op.x[self.q1], op.z[self.q1]
        x2, z2 = op.x[self.q2], op.z[self.q2]
        return _edit(op, {self.q1: (x1, z1 + m * x2), self.q2: (x2, z2 + m * x1)}, 2 * m * x1 * x2)

    def params(self) -> dict:
        return {"power": self.power}

    def relabel(self, m: Sequence[int]) -> "CZ":
        return CZ(m[self.q1], m[self.q2], self.power)


@dataclass(frozen=True)
class Mult:
    q: int
    a: int
    name = "mult"

    @property
    def qudits(self) -> tuple[int, ...]:
        return (self.q,)

    def conjugate(self, op: PauliOp) -> PauliOp:
        d = op.d
        if not ring.is_unit(self.a, d):
            raise ValueError(f"Mult factor {self.a} is not a unit mod {d}")
        x, z = op.x[self.q], op.z[self.q]
        return _edit(op, {self.q: (self.a * x, ring.inverse(self.a, d) * z)}, 0)

    def params(self) -> dict:
        return {"a": self.a}

    def relabel(self, m: Sequence[int]) -> "Mult":
        return Mult(m[self.q], self.a)


@dataclass(frozen=True)
class PauliX:
    q: int
    e: int
    name = "pauli_x"

    @property
    def qudits(self) -> tuple[int, ...]:
        return (self.q,)

    def conjugate(self, op: PauliOp) -> PauliOp:
        return op.with_phase(op.gamma2 - 2 * self.e * op.z[self.q])

    def params(self) -> dict:
        return {"e": self.e}

    def relabel(self, m: Sequence[int]) -> "PauliX":
        return PauliX(m[self.q], self.e)


@dataclass(frozen=True)
class PauliZ:
    q: int
    e: int
    name = "pauli_z"

    @property
    def qudits(self) -> tuple[int, ...]:
        return (self.q,)

    def conjugate(self, op: PauliOp) -> PauliOp:
        return op.with_phase(op.gamma2 + 2 * self.e * op.x[self.q])

    def params(self) -> dict:
        return {"e": self.e}

    def relabel(self, m: Sequence[int]) -> "PauliZ":
        return PauliZ(m[self.q], self.e)


@dataclass(frozen=True)
class GlobalPhase:
    gamma2: int
    name = "global_phase"

    @property
    def qudits(self) -> tuple[int, ...]:
        return ()

    def conjugate(self, op: PauliOp) -> PauliOp:
        return op

    def params(self) -> dict:
        return {"gamma2": self.gamma2}

    def relabel(self, m: Sequence[int]) -> "GlobalPhase":
        return self


ElementaryGate = Union[Fourier, Phase, CZ, Mult, PauliX, PauliZ, GlobalPhase]


def conjugate_all(gates: Iterable[ElementaryGate], op: PauliOp) -> PauliOp:
    """Image of ``op`` under the gates applied in time order."""
    for g in gates:
        op = g.conjugate(op)
    return op


def apply_gates_to_group(S: StabilizerGroup, gates: Sequence[ElementaryGate]) -> StabilizerGroup:
    return S.with_gens(conjugate_all(gates, g) for g in S.gens)


# ---------------------------------------------------------------------------
# Local Cliffords


@dataclass(frozen=True, eq=False)
class LocalClifford:
    """A Clifford on one party's qudits, given by its action on X_i and Z_i.

    Column ``i`` of ``symplectic`` is the local (x|z) image of ``X_i`` and
    column ``k + i`` that of ``Z_i``; ``phases`` holds the doubled phases of
    those images.  ``gates``, when present, is a known elementary realization
    in global qudit indices.
    """

    party: str
    qudits: tuple[int, ...]
    d: int
    symplectic: np.ndarray
    phases: tuple[int, ...]
    gates: tuple[ElementaryGate, ...] | None = None

    def __post_init__(self):
        k = len(self.qudits)
        M = np.asarray(self.symplectic, dtype=np.int64) % self.d
        if M.shape != (2 * k, 2 * k):
            raise ValueError(f"symplectic matrix must be {2 * k}x{2 * k}")
        object.__setattr__(self, "symplectic", M)
        object.__setattr__(self, "phases", tuple(int(g) % (2 * self.d) for g in self.phases))
        if len(self.phases) != 2 * k:
            raise ValueError("need one phase per basis operator")
        if not is_symplectic(M, self.d):
            raise ValueError("matrix is not symplectic")
        ident = PauliOp.identity(self.d, k)
        for i, img in enumerate(self.images()):
            if power(img, self.d) != ident:
                raise ValueError(f"phase of image {i} violates the parity rule")

    @property
    def k(self) -> int:
        return len(self.qudits)

    def images(self) -> list[PauliOp]:
        return [PauliOp.from_vector(self.d, self.symplectic[:, c], self.phases[c]) for c in range(2 * self.k)]

    @classmethod
    def identity(cls, party: str, qudits: Sequence[int], d: int) -> "LocalClifford":
        k = len(qudits)
        return cls(party, tuple(qudits), d, np.eye(2 * k, dtype=np.int64), (0,) * (2 * k), ())

    @classmethod
    def from_gates(
        cls, party: str, qudits: Sequence[int], d: int, gates: Sequence[ElementaryGate]
    ) -> "LocalClifford":
        """Clifford realized by ``gates`` (global qudit indices, time order)."""
        qudits = tuple(qudits)
        k = len(qudits)
        local = {q: i for i, q in enumerate(qudits)}
        try:
            local_gates = [g.relabel(local) for g in gates]
        except KeyError as exc:
            raise ValueError(f"gate acts outside party {party!r}: qudit {exc.args[0]}") from None
        cols, phases = [], []
        for c in range(2 * k):
            basis = PauliOp.from_vector(d, np.eye(2 * k, dtype=np.int64)[c])
            img = conjugate_all(local_gates, basis)
            cols.append(img.vector)
            phases.append(img.gamma2)
        M = np.array(cols, dtype=np.int64).T.reshape(2 * k, 2 * k)
        return cls(party, qudits, d, M, tuple(phases), tuple(gates))

    def apply(self, op: PauliOp) -> PauliOp:
        if op.d != self.d:
            raise ValueError("dimension mismatch")
        k = self.k
        imgs = self.images()
        out = PauliOp(self.d, (0,) * k, (0,) * k, op.gamma2)
        for i, q in enumerate(self.qudits):
            if op.x[q]:
                out = multiply(out, power(imgs[i], op.x[q]))
        for i, q in enumerate(self.qudits):
            if op.z[q]:
                out = multiply(out, power(imgs[k + i], op.z[q]))
        x, z = list(op.x), list(op.z)
        for i, q in enumerate(self.qudits):
            x[q], z[q] = out.x[i], out.z[i]
        return PauliOp(self.d, tuple(x), tuple(z), out.gamma2)


def is_symplectic(M, d: int) -> bool:
    M = np.asarray(M, dtype=np.int64) % d
    k = M.shape[0] // 2
    om = symplectic_form(k)
    return not np.any((M @ om @ M.T - om) % d)


def apply_clifford_to_group(S: StabilizerGroup, C: LocalClifford) -> StabilizerGroup:
    if C.party not in S.partition.labels:
        raise ValueError(f"unknown party {C.party!r}")
    if set(C.qudits) - set(S.partition.qudits(C.party)):
        raise ValueError(f"clifford acts outside party {C.party!r}")
    if C.d != S.d:
        raise ValueError("dimension mismatch")
    return S.with_gens(C.apply(g) for g in S.gens)


# ---------------------------------------------------------------------------
# Synthesis


class _Builder:
    """Accumulates gates while tracking their action on a set of operators."""

    def __init__(self, ops: Sequence[PauliOp]):
        self.ops = list(ops)
        self.gates: list[ElementaryGate] = []

    def push(self, gate: ElementaryGate):
        self.gates.append(gate)
        self.ops = [gate.conjugate(o) for o in self.ops]


def _to_x_at(b: _Builder, idx: int, t: int, active: Sequence[int], fix_z: bool = False):
    """Append gates on ``active`` qudits mapping ``b.ops[idx]`` to ``X_t**x_t``.

    Without ``fix_z`` the result is exactly X_t (the vector must be
    unimodular).  With ``fix_z`` the vector's ``x_t`` must already be a unit;
    only gates fixing Z_t are used and the result is ``X_t**x_t``.
    """
    d = b.ops[idx].d

    def unit(a):
        return ring.is_unit(a, d)

    def cur():
        return b.ops[idx]

    if not fix_z:
        if not (unit(cur().x[t]) or unit(cur().z[t])):
            j = next((j for j in active if unit(cur().x[j]) or unit(cur().z[j])), None)
            if j is None:
                raise ValueError("vector is not unimodular on the active qudits")
            if not unit(cur().x[j]):
                b.push(Fourier(j))
            b.push(CZ(t, j))
        if not unit(cur().x[t]):
            b.push(Fourier(t))
        a = cur().x[t]
        if a != 1:
            b.push(Mult(t, ring.inverse(a, d)))
    elif not unit(cur().x[t]):
        raise ValueError("x_t must be a unit")
    xinv = ring.inverse(cur().x[t], d)
    for j in active:
        if j == t:
            continue
        m = (-cur().z[j] * xinv) % d
        if m:
            b.push(CZ(t, j, m))
        if cur().x[j]:
            b.push(Fourier(j))
            m = (-cur().z[j] * xinv) % d
            b.push(CZ(t, j, m))
    m = (-cur().z[t] * xinv) % d
    if m:
        b.push(Phase(t, m))


def _globalize(gates: Iterable[ElementaryGate], qudits: Sequence[int]) -> list[ElementaryGate]:
    return [g.relabel(qudits) for g in gates]


def synth_map_to_z(party: str, qudits: Sequence[int], u: PauliOp, k: int) -> LocalClifford:
    """Clifford mapping the local vector of ``u`` (order p**k) to Z_0**(p**(n-k)).

    ``u`` is given on the party's qudits in local indexing; the image lands on
    the party's first qudit.
    """
    params = ring.RingParams.from_dimension(u.d)
    p, n = params.p, params.n
    order = ring.element_order(u.vector, u.d)
    if order != p**k:
        raise ValueError(f"element has order {order}, expected {p**k}")
    scale = p ** (n - k)
    w = PauliOp.from_vector(u.d, (u.vector // scale) % u.d)
    b = _Builder([w])
    _to_x_at(b, 0, 0, range(len(qudits)))
    b.push(Fourier(0))
    return LocalClifford.from_gates(party, qudits, u.d, _globalize(b.gates, qudits))


def synth_map_to_x_fixing_z(party: str, qudits: Sequence[int], g: PauliOp, n_prime: int) -> LocalClifford:
    """Clifford fixing Z_0**(p**(n-n')) and mapping ``g``'s local vector to X_0.

    Requires ``Z_0**c g = w**c g Z_0**c`` with ``c = p**(n-n')``, i.e.
    ``x_0 = 1 mod p**n'``.  Scaling by Mult(x_0^-1) then fixes Z_0**c exactly,
    and the clearing steps only use gates that fix Z_0.
    """
    params = ring.RingParams.from_dimension(g.d)
    p, n, d = params.p, params.n, params.D
    if not 1 <= n_prime <= n:
        raise ValueError("n' out of range")
    if (g.x[0] - 1) % (p**n_prime):
        raise ValueError("precondition violated: x_0 must be 1 mod p^n'")
    b = _Builder([PauliOp.from_vector(d, g.vector)])
    if b.ops[0].x[0] != 1:
        b.push(Mult(0, ring.inverse(b.ops[0].x[0], d)))
    _to_x_at(b, 0, 0, range(len(qudits)), fix_z=True)
    return LocalClifford.from_gates(party, qudits, d, _globalize(b.gates, qudits))


def diagonalize_local_group(party: str, qudits: Sequence[int], restrictions: Sequence[PauliOp]) -> LocalClifford:
    """Clifford over Z_p mapping every (isotropic) restriction to a pure-Z operator."""
    k = len(qudits)
    if not restrictions:
        raise ValueError("no restrictions given")
    p = restrictions[0].d
    if not ring.is_prime(p):
        raise ValueError("restrictions must be reduced mod p")
    om = symplectic_form(k)
    R = np.array([r.vector for r in restrictions], dtype=np.int64).reshape(-1, 2 * k) % p
    if np.any((R @ om @ R.T) % p):
        raise ValueError("restrictions do not commute")
    if not R[:, :k].any():
        return LocalClifford.identity(party, qudits, p)
    basis = ring.howell_form(R, p).basis if R.size else np.zeros((0, 2 * k), dtype=np.int64)
    b = _Builder([PauliOp.from_vector(p, row) for row in basis])
    active = list(range(k))
    for idx in range(len(b.ops)):
        op = b.ops[idx]
        j = next((j for j in active if op.x[j] or op.z[j]), None)
        if j is None:
            continue
        _to_x_at(b, idx, j, active)
        b.push(Fourier(j))
        # Every other basis vector now has x_j = 0; strip its Z_j component.
        for other in range(len(b.ops)):
            if other != idx and b.ops[other].z[j]:
                o = b.ops[other]
                z = list(o.z)
                z[j] = 0
                b.ops[other] = PauliOp(p, o.x, tuple(z))
        active.remove(j)
    return LocalClifford.from_gates(party, qudits, p, _simplify(_globalize(b.gates, qudits), p))


def default_phases(M: np.ndarray, d: int) -> tuple[int, ...]:
    k = M.shape[0] // 2
    if d % 2:
        return (0,) * (2 * k)
    return tuple(int(M[:k, c] @ M[k:, c]) % 2 for c in range(2 * k))


def lift_symplectic(C: LocalClifford, n: int) -> LocalClifford:
    """Lift a Clifford over Z_p to Z_(p**n) with a congruent symplectic matrix.

    Hensel step: with ``E = (M Omega M^T - Omega) / p**j mod p`` and ``U`` its
    strict upper triangle, ``M + p**j U Omega M`` is symplectic mod p**(j+1).
    Phases are reset to the canonical choice (0, or x.z mod 2 for even d).
    """
    p = C.d
    if not ring.is_prime(p):
        raise ValueError("input must be a Clifford over Z_p")
    if not is_symplectic(C.symplectic, p):
        raise ValueError("input is not symplectic")
    k2 = C.symplectic.shape[0]
    om = symplectic_form(k2 // 2)
    M = C.symplectic.astype(object) % p
    for j in range(1, n):
        mod = p ** (j + 1)
        defect = (M.dot(om.astype(object)).dot(M.T) - om) % mod
        if any(int(e) % (p**j) for e in defect.flat):
            raise AssertionError("Hensel lift lost precision")
        E = (defect // p**j) % p
        U = np.triu(E, 1)
        M = (M + p**j * U.dot(om.astype(object)).dot(M)) % mod
    d = p**n
    M = np.array(M % d, dtype=np.int64)
    return LocalClifford(C.party, C.qudits, d, M, default_phases(M, d))


# ---------------------------------------------------------------------------
# Compilation


def _simplify(gates: list[ElementaryGate], d: int) -> list[ElementaryGate]:
    out: list[ElementaryGate] = []
    for g in gates:
        if out:
            last = out[-1]
            merged = None
            if isinstance(g, Fourier) and isinstance(last, Fourier) and g.q == last.q:
                # H^4 = I: drop a run once it reaches four.
                run = 1
                while len(out) - run - 1 >= 0 and out[-run - 1] == g:
                    run += 1
                if run == 3:
                    del out[-3:]
                    continue
            elif isinstance(g, Phase) and isinstance(last, Phase) and g.q == last.q:
                merged = Phase(g.q, (g.power + last.power) % d)
            elif isinstance(g, CZ) and isinstance(last, CZ) and {g.q1, g.q2} == {last.q1, last.q2}:
                merged = CZ(last.q1, last.q2, (g.power + last.power) % d)
            elif isinstance(g, Mult) and isinstance(last, Mult) and g.q == last.q:
                merged = Mult(g.q, (g.a * last.a) % d)
            if merged is not None:
                out.pop()
                if not _is_trivial(merged, d):
                    out.append(merged)
                continue
        if not _is_trivial(g, d):
            out.append(g)
    return out


def _is_trivial(g: ElementaryGate, d: int) -> bool:
    if isinstance(g, (Phase, CZ)):
        return g.power % d == 0
    if isinstance(g, Mult):
        return g.a % d == 1
    return False


def compile_to_elementary(C: LocalClifford) -> list[ElementaryGate]:
    """Elementary gates (global indices, time order) realizing C up to global phase.

    The inverse symplectic matrix is reduced column by column to the identity;
    the gates doing that realize C's matrix.  Phases are then matched by
    Pauli gates applied first.
    """
    d, k = C.d, C.k
    om = symplectic_form(k)
    A = (-om @ C.symplectic.T @ om) % d
    b = _Builder([PauliOp.from_vector(d, A[:, c]) for c in range(2 * k)])
    for t in range(k):
        active = list(range(t, k))
        _to_x_at(b, t, t, active)
        b.push(Fourier(t))
        _to_x_at(b, k + t, t, active, fix_z=True)
        for _ in range(3):
            b.push(Fourier(t))
    body = _simplify(_globalize(b.gates, C.qudits), d)
    realized = LocalClifford.from_gates(C.party, C.qudits, d, body)
    if not np.array_equal(realized.symplectic, C.symplectic):
        raise AssertionError("compiled gates do not reproduce the symplectic matrix")
    fixes: list[ElementaryGate] = []
    for i, q in enumerate(C.qudits):
        dx = (C.phases[i] - realized.phases[i]) % (2 * d)
        dz = (C.phases[k + i] - realized.phases[k + i]) % (2 * d)
        if dx % 2 or dz % 2:
            raise AssertionError("phase images differ by a half-integer")
        if dx:
            fixes.append(PauliZ(q, (dx // 2) % d))
        if dz:
            fixes.append(PauliX(q, (-dz // 2) % d))
    return fixes + body


# ---------------------------------------------------------------------------
# Non-Clifford and bookkeeping operations


@dataclass(frozen=True)
class VGate:
    """The digit-rotating unitary on one qudit (needs Z**(p**(n-1)) stabilizer)."""

    q: int
    name = "v"

    @property
    def qudits(self) -> tuple[int, ...]:
        return (self.q,)

    def params(self) -> dict:
        return {}

    def relabel(self, m: Sequence[int]) -> "VGate":
        return VGate(m[self.q])


@dataclass(frozen=True)
class SwapExtract:
    """Swap the lowest ``n_prime`` p-digits of a qudit with a fresh ancilla.

    ``group`` ties together the per-party halves of one extracted GHZ/EPR
    state; the ancilla has dimension p**n_prime.
    """

    q: int
    ancilla: int
    n_prime: int
    group: int
    name = "swap_extract"

    def __post_init__(self):
        if self.n_prime < 1:
            raise ValueError("n' must be at least 1")

    @property
    def qudits(self) -> tuple[int, ...]:
        return (self.q,)

    def params(self) -> dict:
        return {"ancilla": self.ancilla, "n_prime": self.n_prime, "group": self.group}

    def relabel(self, m: Sequence[int]) -> "SwapExtract":
        return SwapExtract(m[self.q], self.ancilla, self.n_prime, self.group)


def apply_v_gate_to_group(S: StabilizerGroup, V: VGate) -> StabilizerGroup:
    params = S.ring
    p, n = params.p, params.n
    q = V.q
    if n < 2:
        raise ValueError("the V gate needs n >= 2")
    top = PauliOp.single(S.d, S.n_qudits, q, z=p ** (n - 1))
    c = coefficients_of(S, top)
    if c is None or group_element(S, c) != top:
        raise ValueError(f"Z^(p^(n-1)) on qudit {q} is not a stabilizer with phase 0")
    gens = []
    for g in S.gens:
        if g.x[q] % p:
            raise AssertionError("generator does not commute with Z^(p^(n-1))")
        x, z = list(g.x), list(g.z)
        x[q], z[q] = g.x[q] // p, p * g.z[q]
        gens.append(PauliOp(S.d, tuple(x), tuple(z), g.gamma2))
    gens.append(PauliOp.single(S.d, S.n_qudits, q, x=p ** (n - 1)))
    return S.with_gens(gens)


def pauli_frame_correction(S: StabilizerGroup, targets: Sequence[tuple[PauliOp, int]]) -> list[ElementaryGate]:
    """Pauli gates after which each target vector carries the required phase.

    Each target is ``(op, gamma2)``; only its exponent vector matters (it must
    be in S up to phase).  Conjugating by X_q**a Z_q**b shifts the doubled
    phase of (x, z) by ``2 (b.x - a.z)``, a linear system over Z_d.
    """
    d, N = S.d, S.n_qudits
    rows, rhs = [], []
    for op, want in targets:
        c = coefficients_of(S, op)
        if c is None:
            raise ValueError(f"target {op} is not in the group up to phase")
        cur = group_element(S, c).gamma2
        delta = (want - cur) % (2 * d)
        if delta % 2:
            raise ValueError("required phase differs from the current one by a half-integer")
        rows.append(np.concatenate([-np.array(op.z), np.array(op.x)]))
        rhs.append(delta // 2)
    if not rows or not any(rhs):
        return []
    support = sorted({q for op, _ in targets for q in op.support()})
    cols = support + [N + q for q in support]
    A = np.array(rows, dtype=np.int64)[:, cols] % d
    sol = ring.solve(A, np.array(rhs, dtype=np.int64), d)
    if sol is None:
        raise ValueError("inconsistent phase targets")
    m = len(support)
    gates: list[ElementaryGate] = []
    for i, q in enumerate(support):
        if sol[m + i]:
            gates.append(PauliZ(q, int(sol[m + i])))
        if sol[i]:
            gates.append(PauliX(q, int(sol[i])))
    return gates


# ---------------------------------------------------------------------------
# Operation log

LoggedOp = Union[Fourier, Phase, CZ, Mult, PauliX, PauliZ, GlobalPhase, VGate, SwapExtract, LocalClifford]

_GATE_TYPES = {
    "fourier": lambda q, p: Fourier(q[0]),
    "phase": lambda q, p: Phase(q[0], p.get("power", 1)),
    "cz": lambda q, p: CZ(q[0], q[1], p.get("power", 1)),
    "mult": lambda q, p: Mult(q[0], p["a"]),
    "pauli_x": lambda q, p: PauliX(q[0], p["e"]),
    "pauli_z": lambda q, p: PauliZ(q[0], p["e"]),
    "global_phase": lambda q, p: GlobalPhase(p["gamma2"]),
    "v": lambda q, p: VGate(q[0]),
    "swap_extract": lambda q, p: SwapExtract(q[0], p["ancilla"], p["n_prime"], p["group"]),
}


@dataclass(frozen=True)
class LogEntry:
    """One logged operation acting at qudit dimension ``dim`` on ``party``."""

    op: LoggedOp
    party: str
    dim: int

    @property
    def qudits(self) -> tuple[int, ...]:
        return self.op.qudits

    def to_dict(self) -> dict:
        if isinstance(self.op, LocalClifford):
            name = "clifford"
            params = {
                "symplectic": [[int(e) for e in row] for row in self.op.symplectic],
                "phases": list(self.op.phases),
            }
        else:
            name = self.op.name
            params = self.op.params()
        return {"op": name, "party": self.party, "qudits": list(self.qudits), "dim": self.dim, "params": params}

    @classmethod
    def from_dict(cls, data: dict) -> "LogEntry":
        name = data["op"]
        qudits = [int(q) for q in data.get("qudits", [])]
        params = data.get("params", {})
        dim = int(data["dim"])
        if name == "clifford":
            op: LoggedOp = LocalClifford(
                data["party"], tuple(qudits), dim, np.array(params["symplectic"]), tuple(params["phases"])
            )
        elif name in _GATE_TYPES:
            op = _GATE_TYPES[name](qudits, params)
        else:
            raise ValueError(f"unknown operation {name!r}")
        return cls(op, data["party"], dim)


@dataclass(frozen=True)
class OperationLog:
    d: int
    n_qudits: int
    entries: tuple[LogEntry, ...] = ()

    def extend(self, entries: Iterable[LogEntry]) -> "OperationLog":
        return OperationLog(self.d, self.n_qudits, self.entries + tuple(entries))

    def __len__(self) -> int:
        return len(self.entries)

    def truncated(self, count: int) -> "OperationLog":
        return OperationLog(self.d, self.n_qudits, self.entries[:count])

    def locality_violations(self, partition) -> list[int]:
        bad = []
        for i, e in enumerate(self.entries):
            allowed = set(partition.qudits(e.party)) if e.party in partition.labels else set()
            if not set(e.qudits) <= allowed:
                bad.append(i)
        return bad

    def to_dict(self) -> dict:
        return {"d": self.d, "n_qudits": self.n_qudits, "entries": [e.to_dict() for e in self.entries]}

    @classmethod
    def from_dict(cls, data: dict) -> "OperationLog":
        return cls(int(data["d"]), int(data["n_qudits"]), tuple(LogEntry.from_dict(e) for e in data["entries"]))


def log_gates(gates: Iterable[ElementaryGate], partition, dim: int) -> list[LogEntry]:
    out = []
    for g in gates:
        qs = g.qudits
        party = partition.party_of(qs[0]) if qs else partition.labels[0]
        out.append(LogEntry(g, party, dim))
    return out
