"""Generalized Pauli operators on qudits of dimension d.

An operator is stored as ``omega**(gamma2/2) * prod_i X_i**x_i Z_i**z_i`` with
``omega = exp(2 pi i / d)``.  The X factor sits to the left of the Z factor on
every qudit, and the phase is kept doubled so that the half-integer phases
needed for even d stay integral.  ``gamma2`` is reduced mod ``2d``; for odd d
it is always even.

Ordering convention used throughout the package::

    sigma_a sigma_b = omega**commutation_phase(a, b) * sigma_b sigma_a
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class PauliOp:
    d: int
    x: tuple[int, ...]
    z: tuple[int, ...]
    gamma2: int = 0

    def __post_init__(self):
        d = self.d
        if len(self.x) != len(self.z):
            raise ValueError("x and z exponent vectors differ in length")
        object.__setattr__(self, "x", tuple(int(e) % d for e in self.x))
        object.__setattr__(self, "z", tuple(int(e) % d for e in self.z))
        g2 = int(self.gamma2) % (2 * d)
        if d % 2 == 1 and g2 % 2:
            raise ValueError(f"half-integer phase w^{g2}/2 is not allowed for odd d={d}")
        object.__setattr__(self, "gamma2", g2)

    @property
    def n_qudits(self) -> int:
        return len(self.x)

    @classmethod
    def identity(cls, d: int, n: int) -> "PauliOp":
        return cls(d, (0,) * n, (0,) * n)

    @classmethod
    def single(cls, d: int, n: int, qudit: int, x: int = 0, z: int = 0, gamma2: int = 0) -> "PauliOp":
        xs = [0] * n
        zs = [0] * n
        xs[qudit] = x
        zs[qudit] = z
        return cls(d, tuple(xs), tuple(zs), gamma2)

    @classmethod
    def from_vector(cls, d: int, vec, gamma2: int = 0) -> "PauliOp":
        vec = [int(e) for e in vec]
        n = len(vec) // 2
        return cls(d, tuple(vec[:n]), tuple(vec[n:]), gamma2)

    @classmethod
    def from_factors(cls, d: int, n: int, factors: dict[int, tuple[int, int]], gamma2: int = 0) -> "PauliOp":
        xs = [0] * n
        zs = [0] * n
        for q, (a, b) in factors.items():
            xs[q], zs[q] = a, b
        return cls(d, tuple(xs), tuple(zs), gamma2)

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.x + self.z, dtype=np.int64)

    def is_identity(self) -> bool:
        return not any(self.x) and not any(self.z)

    def with_phase(self, gamma2: int) -> "PauliOp":
        return PauliOp(self.d, self.x, self.z, gamma2)

    def __mul__(self, other: "PauliOp") -> "PauliOp":
        return multiply(self, other)

    def __pow__(self, k: int) -> "PauliOp":
        return power(self, k)

    def inverse(self) -> "PauliOp":
        return power(self, self.d * 2 - 1)

    def restrict(self, qudits: Sequence[int]) -> "PauliOp":
        """Local part on ``qudits`` (phase dropped), indexed locally."""
        return PauliOp(self.d, tuple(self.x[q] for q in qudits), tuple(self.z[q] for q in qudits))

    def support(self) -> list[int]:
        return [i for i in range(self.n_qudits) if self.x[i] or self.z[i]]

    def __str__(self) -> str:
        return render(self)


def _check(a: PauliOp, b: PauliOp):
    if a.d != b.d:
        raise ValueError(f"dimension mismatch: {a.d} vs {b.d}")
    if a.n_qudits != b.n_qudits:
        raise ValueError(f"qudit count mismatch: {a.n_qudits} vs {b.n_qudits}")


def _dot(u: Iterable[int], v: Iterable[int]) -> int:
    return sum(a * b for a, b in zip(u, v))


def multiply(a: PauliOp, b: PauliOp) -> PauliOp:
    # X^xa Z^za X^xb Z^zb = omega^(za.xb) X^(xa+xb) Z^(za+zb)
    _check(a, b)
    d = a.d
    return PauliOp(
        d,
        tuple(p + q for p, q in zip(a.x, b.x)),
        tuple(p + q for p, q in zip(a.z, b.z)),
        a.gamma2 + b.gamma2 + 2 * _dot(a.z, b.x),
    )


def power(a: PauliOp, k: int) -> PauliOp:
    if k < 0:
        return power(a.inverse(), -k)
    result = PauliOp.identity(a.d, a.n_qudits)
    base = a
    while k:
        if k & 1:
            result = multiply(result, base)
        base = multiply(base, base)
        k >>= 1
    return result


def commutation_phase(a: PauliOp, b: PauliOp) -> int:
    """``c`` with ``sigma_a sigma_b = omega**c sigma_b sigma_a``."""
    _check(a, b)
    return (_dot(b.x, a.z) - _dot(b.z, a.x)) % a.d


def restricted_commutation_phase(a: PauliOp, b: PauliOp, party: Iterable[int]) -> int:
    """Symplectic product ``a^T Omega_party b`` over the qudits in ``party``.

    Summed over all parties this gives ``commutation_phase(b, a)``.
    """
    _check(a, b)
    return sum(a.x[q] * b.z[q] - a.z[q] * b.x[q] for q in party) % a.d


def symplectic_form(n: int, d: int | None = None) -> np.ndarray:
    eye = np.eye(n, dtype=np.int64)
    zero = np.zeros((n, n), dtype=np.int64)
    om = np.block([[zero, eye], [-eye, zero]])
    return om % d if d else om


def restricted_form(n: int, party: Iterable[int]) -> np.ndarray:
    mask = np.zeros(n, dtype=np.int64)
    mask[list(party)] = 1
    diag = np.diag(mask)
    zero = np.zeros((n, n), dtype=np.int64)
    return np.block([[zero, diag], [-diag, zero]])


def order(a: PauliOp) -> int:
    """Order of ``a`` as an operator (smallest m with a**m == I)."""
    m = 1
    cur = a
    while not (cur.is_identity() and cur.gamma2 == 0):
        cur = multiply(cur, a)
        m += 1
        if m > 2 * a.d:
            raise AssertionError("Pauli order exceeds 2d")
    return m


def render(op: PauliOp) -> str:
    """Text form ``w^<k>[/2] X<i>^<e> Z<i>^<e> ...`` (qudit indices 0-based)."""
    parts = []
    if op.gamma2:
        if op.gamma2 % 2 == 0:
            parts.append(f"w^{op.gamma2 // 2}")
        else:
            parts.append(f"w^{op.gamma2}/2")
    for i in range(op.n_qudits):
        for label, e in (("X", op.x[i]), ("Z", op.z[i])):
            if e == 1:
                parts.append(f"{label}{i}")
            elif e:
                parts.append(f"{label}{i}^{e}")
    if len(parts) == (1 if op.gamma2 else 0):
        parts.append("I")
    return " ".join(parts)
