"""Exact linear algebra over Z_N.

Matrices and vectors are plain ``numpy`` int64 arrays whose entries are kept
reduced to ``[0, N)``.  The Howell form is the canonical object: two matrices
generate the same row module iff their Howell forms are equal, which is what
span membership, kernels and intersections are built on.

Row conventions: ``howell_form`` and ``span_intersection`` work with *row*
spans.  ``solve``, ``kernel`` and ``span_membership`` follow the usual
column convention ``M x = b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_MODULUS = 2**20


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    f = 2
    while f * f <= p:
        if p % f == 0:
            return False
        f += 1
    return True


def factorize(d: int) -> list[tuple[int, int]]:
    """Trial-division factorization of ``d`` as ``[(p, e), ...]``."""
    out = []
    f = 2
    while f * f <= d:
        if d % f == 0:
            e = 0
            while d % f == 0:
                d //= f
                e += 1
            out.append((f, e))
        f += 1
    if d > 1:
        out.append((d, 1))
    return out


@dataclass(frozen=True)
class RingParams:
    """The ring Z_D with D = p**n."""

    p: int
    n: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if self.p**self.n > MAX_MODULUS:
            raise ValueError(f"D={self.p}^{self.n} exceeds the modulus cap {MAX_MODULUS}")

    @property
    def D(self) -> int:
        return self.p**self.n

    @classmethod
    def from_dimension(cls, d: int) -> "RingParams":
        fac = factorize(d)
        if len(fac) != 1:
            raise ValueError(f"D={d} is not a prime power")
        return cls(*fac[0])

    def valuation(self, a: int) -> int:
        """p-adic valuation of ``a`` in Z_D; ``n`` for zero."""
        a %= self.D
        if a == 0:
            return self.n
        k = 0
        while a % self.p == 0:
            a //= self.p
            k += 1
        return k

    def lower(self) -> "RingParams":
        return RingParams(self.p, self.n - 1)


def mod(a, modulus: int) -> np.ndarray:
    return np.asarray(a, dtype=np.int64) % modulus


def inverse(a: int, modulus: int) -> int:
    return pow(int(a) % modulus, -1, modulus)


def is_unit(a: int, modulus: int) -> bool:
    return math.gcd(int(a), modulus) == 1


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a - (a // b) * b
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    return a, s0, t0


def unit_normalizer(a: int, modulus: int) -> int:
    """A unit ``u`` with ``u * a == gcd(a, modulus)`` mod ``modulus``."""
    a %= modulus
    if a == 0:
        return 1
    g = math.gcd(a, modulus)
    m = modulus // g
    if m == 1:
        return 1
    u = pow(a // g, -1, m)
    while math.gcd(u, modulus) != 1:
        u += m
    return u % modulus


@dataclass(frozen=True, eq=False)
class HowellForm:
    """Howell basis of a row module.

    ``transform @ original == basis`` (mod N).  ``pivots[i]`` is the pivot
    column of row ``i`` and ``divisors[i]`` its entry, a divisor of N.
    """

    basis: np.ndarray
    pivots: tuple[int, ...]
    divisors: tuple[int, ...]
    transform: np.ndarray
    modulus: int

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def span_size(self) -> int:
        size = 1
        for dv in self.divisors:
            size *= self.modulus // dv
        return size

    def reduce(self, v) -> tuple[np.ndarray, np.ndarray]:
        """Reduce ``v`` to its canonical coset representative.

        Returns ``(remainder, coeffs)`` with ``v == remainder + coeffs @ basis``.
        The remainder is zero iff ``v`` lies in the span.
        """
        N = self.modulus
        r = [int(e) % N for e in v]
        coeffs = np.zeros(self.rank, dtype=np.int64)
        for i, (c, dv) in enumerate(zip(self.pivots, self.divisors)):
            q = r[c] // dv
            if q:
                coeffs[i] = q
                row = self.basis[i]
                r = [(r[j] - q * int(row[j])) % N for j in range(len(r))]
        return np.array(r, dtype=np.int64), coeffs


def howell_form(M, modulus: int) -> HowellForm:
    N = modulus
    M = _as_matrix(M)
    m, cols = M.shape
    A = [[int(e) % N for e in row] for row in M]
    T = [[int(i == j) for j in range(m)] for i in range(m)]

    def combine(dst, src, k):
        A[dst] = [(x + k * y) % N for x, y in zip(A[dst], A[src])]
        T[dst] = [(x + k * y) % N for x, y in zip(T[dst], T[src])]

    r = 0
    pivots, divisors = [], []
    for c in range(cols):
        i = r + 1
        while i < len(A):
            b = A[i][c]
            if b:
                a = A[r][c]
                if a == 0:
                    A[r], A[i] = A[i], A[r]
                    T[r], T[i] = T[i], T[r]
                else:
                    g, s, t = _xgcd(a, b)
                    u, v = -b // g, a // g
                    A[r], A[i] = (
                        [(s * x + t * y) % N for x, y in zip(A[r], A[i])],
                        [(u * x + v * y) % N for x, y in zip(A[r], A[i])],
                    )
                    T[r], T[i] = (
                        [(s * x + t * y) % N for x, y in zip(T[r], T[i])],
                        [(u * x + v * y) % N for x, y in zip(T[r], T[i])],
                    )
            i += 1
        if r >= len(A) or A[r][c] == 0:
            continue
        u = unit_normalizer(A[r][c], N)
        A[r] = [(u * x) % N for x in A[r]]
        T[r] = [(u * x) % N for x in T[r]]
        dv = A[r][c]
        for i in range(r):
            q = A[i][c] // dv
            if q:
                combine(i, r, -q)
        ann = N // dv
        if ann < N:
            extra = [(ann * x) % N for x in A[r]]
            if any(extra):
                A.append(extra)
                T.append([(ann * x) % N for x in T[r]])
        pivots.append(c)
        divisors.append(dv)
        r += 1

    basis = np.array(A[:r], dtype=np.int64).reshape(r, cols)
    transform = np.array(T[:r], dtype=np.int64).reshape(r, m)
    return HowellForm(basis, tuple(pivots), tuple(divisors), transform, N)


def _check_cols(M: np.ndarray, n: int, what: str):
    if M.shape[1] != n:
        raise ValueError(f"dimension mismatch: {what} has {M.shape[1]} columns, expected {n}")


def _as_matrix(M) -> np.ndarray:
    M = np.asarray(M, dtype=np.int64)
    if M.ndim == 1:
        M = M.reshape(1, -1)
    return M


def left_kernel(A, modulus: int) -> np.ndarray:
    """Rows generating ``{y : y @ A == 0}``, in Howell form."""
    A = _as_matrix(A)
    m, cols = A.shape
    aug = np.concatenate([A % modulus, np.eye(m, dtype=np.int64)], axis=1)
    hf = howell_form(aug, modulus)
    rows = [hf.basis[i, cols:] for i, c in enumerate(hf.pivots) if c >= cols]
    if not rows:
        return np.zeros((0, m), dtype=np.int64)
    return np.array(rows, dtype=np.int64)


def kernel(M, modulus: int) -> np.ndarray:
    """Rows generating ``{x : M @ x == 0}``."""
    M = _as_matrix(M)
    return left_kernel(M.T, modulus)


def solve(M, b, modulus: int) -> np.ndarray | None:
    """Canonical solution of ``M @ x == b`` or ``None``.

    The particular solution is reduced modulo the Howell basis of the
    kernel, so equal inputs always give the same ``x``.
    """
    M = _as_matrix(M)
    b = np.asarray(b, dtype=np.int64).reshape(-1)
    rows, cols = M.shape
    if b.shape[0] != rows:
        raise ValueError(f"dimension mismatch: M has {rows} rows, b has length {b.shape[0]}")
    hf = howell_form(M.T, modulus)
    rem, coeffs = hf.reduce(b)
    if rem.any():
        return None
    x = (coeffs @ hf.transform) % modulus if hf.rank else np.zeros(cols, dtype=np.int64)
    ker = kernel(M, modulus)
    if ker.shape[0]:
        x, _ = howell_form(ker, modulus).reduce(x)
    return x.astype(np.int64)


def span_membership(v, M, modulus: int) -> bool:
    """Whether ``v`` lies in the column span of ``M``."""
    v = np.asarray(v, dtype=np.int64).reshape(-1)
    M = _as_matrix(M)
    if M.shape[0] != v.shape[0]:
        raise ValueError("dimension mismatch")
    if not (v % modulus).any():
        return True
    return solve(M, v, modulus) is not None


def row_span_contains(v, R, modulus: int) -> bool:
    R = _as_matrix(R)
    v = np.asarray(v, dtype=np.int64).reshape(-1)
    if R.shape[0] == 0:
        return not (v % modulus).any()
    _check_cols(R, v.shape[0], "span")
    rem, _ = howell_form(R, modulus).reduce(v)
    return not rem.any()


def span_intersection(A, B, modulus: int) -> np.ndarray:
    """Howell basis (rows) of ``rowspan(A) ∩ rowspan(B)``."""
    A, B = _as_matrix(A), _as_matrix(B)
    if A.shape[0] == 0 or B.shape[0] == 0:
        n = A.shape[1] if A.shape[0] else B.shape[1]
        return np.zeros((0, n), dtype=np.int64)
    if A.shape[1] != B.shape[1]:
        raise ValueError("dimension mismatch between the two spans")
    K = left_kernel(np.concatenate([A, B]), modulus)
    if K.shape[0] == 0:
        return np.zeros((0, A.shape[1]), dtype=np.int64)
    common = (K[:, : A.shape[0]] @ A) % modulus
    return howell_form(common, modulus).basis


def element_order(v, modulus: int) -> int:
    g = modulus
    for e in np.asarray(v, dtype=np.int64).reshape(-1):
        g = math.gcd(g, int(e) % modulus)
    return modulus // g


def is_invertible(L, modulus: int) -> bool:
    L = _as_matrix(L)
    if L.shape[0] != L.shape[1]:
        return False
    hf = howell_form(L, modulus)
    return hf.rank == L.shape[0] and all(d == 1 for d in hf.divisors)


def matrix_inverse(L, modulus: int) -> np.ndarray:
    L = _as_matrix(L)
    n = L.shape[0]
    hf = howell_form(L, modulus)
    if hf.rank != n or any(d != 1 for d in hf.divisors):
        raise ValueError("matrix is not invertible")
    # Howell form of an invertible matrix is the identity, so T @ L == I.
    return hf.transform % modulus
