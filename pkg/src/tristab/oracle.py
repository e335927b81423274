"""Dense state-vector ground truth for small systems.

States are complex numpy arrays shaped by their site dimensions.  Operations
from an :class:`~tristab.clifford.OperationLog` are realized as explicit
matrices; an operation logged at dimension ``p**L`` on a site of physical
dimension ``p**n0`` acts on the top ``L`` base-p digits of that site, i.e. on
``j_high`` in ``j = j_high * p**(n0 - L) + j_low``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import ring
from .clifford import (
    CZ,
    Fourier,
    GlobalPhase,
    LocalClifford,
    LogEntry,
    Mult,
    OperationLog,
    Phase,
    PauliX,
    PauliZ,
    SwapExtract,
    VGate,
    compile_to_elementary,
)
from .pauli import PauliOp, order
from .stabilizer import Partition, StabilizerGroup

DEFAULT_CAP = 2**14
DEFAULT_SEED = 20240917


class CapExceeded(ValueError):
    """The requested Hilbert-space dimension is above the oracle cap."""


@dataclass(frozen=True, eq=False)
class DenseState:
    amps: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=np.complex128).reshape(self.dims)
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "dims", tuple(int(x) for x in self.dims))

    @property
    def vector(self) -> np.ndarray:
        return self.amps.reshape(-1)

    @property
    def size(self) -> int:
        return int(np.prod(self.dims)) if self.dims else 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    @classmethod
    def basis(cls, dims: Sequence[int], index: Sequence[int] | None = None) -> "DenseState":
        amps = np.zeros(tuple(dims), dtype=np.complex128)
        amps[tuple(index) if index is not None else (0,) * len(dims)] = 1
        return cls(amps, tuple(dims))


def omega(d: int) -> complex:
    return cmath.exp(2j * math.pi / d)


def _check_cap(size: int, cap: int):
    if size > cap:
        raise CapExceeded(f"Hilbert-space dimension {size} exceeds the oracle cap {cap}")


# ---------------------------------------------------------------------------
# Pauli operators


def pauli_matrix(op: PauliOp) -> np.ndarray:
    """Dense matrix of ``op`` (only for small systems)."""
    d = op.d
    X = np.roll(np.eye(d), 1, axis=0)
    Z = np.diag([omega(d) ** j for j in range(d)])
    out = np.eye(1, dtype=np.complex128)
    for x, z in zip(op.x, op.z):
        out = np.kron(out, np.linalg.matrix_power(X, x) @ np.linalg.matrix_power(Z, z))
    return out * cmath.exp(1j * math.pi * op.gamma2 / d)


def apply_pauli(state: DenseState, op: PauliOp) -> DenseState:
    d = op.d
    if any(s != d for s in state.dims) or len(state.dims) != op.n_qudits:
        raise ValueError("state does not match the operator")
    psi = state.amps
    for q, (x, z) in enumerate(zip(op.x, op.z)):
        if z:
            shape = [1] * psi.ndim
            shape[q] = d
            psi = psi * (np.exp(2j * math.pi * z * np.arange(d) / d).reshape(shape))
        if x:
            psi = np.roll(psi, x, axis=q)
    return DenseState(psi * cmath.exp(1j * math.pi * op.gamma2 / d), state.dims)


def _random_vector(size: int, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.normal(size=size) + 1j * rng.normal(size=size)


def project_onto_group(state: DenseState, gens: Sequence[PauliOp]) -> DenseState:
    """Apply the averaging projector (1/m) sum_k g^k for every generator."""
    for g in gens:
        m = order(g)
        acc = state.amps.copy()
        cur = state
        for _ in range(m - 1):
            cur = apply_pauli(cur, g)
            acc = acc + cur.amps
        state = DenseState(acc / m, state.dims)
    return state


def state_from_group(S: StabilizerGroup, seed: int = DEFAULT_SEED, cap: int = DEFAULT_CAP) -> DenseState:
    dims = (S.d,) * S.n_qudits
    size = S.d**S.n_qudits
    _check_cap(size, cap)
    start = DenseState(_random_vector(size, seed), dims)
    out = project_onto_group(start, S.gens)
    nrm = out.norm()
    if nrm < 1e-9:
        raise ValueError("projection vanished: the generators do not stabilize a common state")
    return DenseState(out.amps / nrm, dims)


def stabilizer_residuals(state: DenseState, gens: Sequence[PauliOp]) -> list[float]:
    return [float(np.linalg.norm(apply_pauli(state, g).vector - state.vector)) for g in gens]


def stabilizers_of_state(state: DenseState, d: int, tol: float = 1e-9) -> list[PauliOp]:
    """Every Pauli operator (with phase) that fixes ``state``.

    For each shift ``x`` the expectations of all ``X^x Z^z`` follow from one
    FFT of ``conj(psi(j + x)) psi(j)`` over ``j``.
    """
    psi = state.amps
    found = []
    for xs in np.ndindex(*state.dims):
        shifted = psi
        for q, x in enumerate(xs):
            if x:
                shifted = np.roll(shifted, -x, axis=q)
        f = np.conj(shifted) * psi
        E = np.fft.ifftn(f) * f.size
        for zs in zip(*np.nonzero(np.abs(np.abs(E) - 1) < tol)):
            val = E[zs]
            g2 = round(-cmath.phase(val) * d / math.pi) % (2 * d)
            found.append(PauliOp(d, tuple(int(x) for x in xs), tuple(int(z) for z in zs), g2))
    return found


# ---------------------------------------------------------------------------
# Gate matrices


def phase_gate(d: int, power: int = 1) -> np.ndarray:
    j = np.arange(d)
    if d % 2 == 0:
        expo = np.pi * j * j / d
    else:
        half = pow(2, -1, d)
        expo = 2 * np.pi * ((j * j * half) % d) / d
    return np.diag(np.exp(1j * power * expo))


def fourier_gate(d: int) -> np.ndarray:
    j = np.arange(d)
    return np.exp(2j * np.pi * np.outer(j, j) / d) / math.sqrt(d)


def cz_gate(d: int, power: int = 1) -> np.ndarray:
    j = np.arange(d)
    return np.diag(np.exp(2j * np.pi * power * np.outer(j, j).reshape(-1) / d))


def mult_gate(d: int, a: int) -> np.ndarray:
    if not ring.is_unit(a, d):
        raise ValueError(f"{a} is not a unit mod {d}")
    U = np.zeros((d, d), dtype=np.complex128)
    for j in range(d):
        U[(a * j) % d, j] = 1
    return U


def v_gate(d: int) -> np.ndarray:
    params = ring.RingParams.from_dimension(d)
    p, n = params.p, params.n
    if n < 2:
        raise ValueError("the V gate needs n >= 2")
    top = p ** (n - 1)
    U = np.zeros((d, d), dtype=np.complex128)
    w = omega(d)
    for j in range(top):
        for k in range(p):
            for l in range(p):
                U[top * k + j, p * j + l] += w ** (top * k * l) / math.sqrt(p)
    return U


def swap_extract_matrix(level_dim: int, n_prime: int, p: int) -> np.ndarray:
    """Permutation on (qudit of dim p**L) x (ancilla of dim p**n') swapping the low n' digits."""
    a = p**n_prime
    size = level_dim * a
    U = np.zeros((size, size))
    for j in range(level_dim):
        hi, lo = divmod(j, a)
        for anc in range(a):
            U[(hi * a + anc) * a + lo, j * a + anc] = 1
    return U


def gate_matrix(op, d: int) -> np.ndarray:
    """Dense matrix of a logged operation at qudit dimension ``d``."""
    if isinstance(op, Fourier):
        return fourier_gate(d)
    if isinstance(op, Phase):
        return phase_gate(d, op.power)
    if isinstance(op, CZ):
        return cz_gate(d, op.power)
    if isinstance(op, Mult):
        return mult_gate(d, op.a)
    if isinstance(op, PauliX):
        return np.linalg.matrix_power(np.roll(np.eye(d), 1, axis=0), op.e % d).astype(np.complex128)
    if isinstance(op, PauliZ):
        return np.diag(np.exp(2j * np.pi * (op.e % d) * np.arange(d) / d))
    if isinstance(op, GlobalPhase):
        return np.array([[cmath.exp(1j * math.pi * op.gamma2 / d)]])
    if isinstance(op, VGate):
        return v_gate(d)
    if isinstance(op, SwapExtract):
        return swap_extract_matrix(d, op.n_prime, ring.RingParams.from_dimension(d).p)
    if isinstance(op, LocalClifford):
        return clifford_matrix(op)
    raise TypeError(f"no matrix for {op!r}")


def clifford_matrix(C: LocalClifford) -> np.ndarray:
    """Dense matrix of a local Clifford on its own k qudits (local order)."""
    k = C.k
    local = {q: i for i, q in enumerate(C.qudits)}
    psi_dims = (C.d,) * k
    U = np.eye(C.d**k, dtype=np.complex128).reshape(psi_dims + (C.d**k,))
    for g in compile_to_elementary(C):
        g = g.relabel(local)
        if isinstance(g, GlobalPhase):
            U = U * gate_matrix(g, C.d)[0, 0]
            continue
        U = _apply_block(U, list(g.qudits), gate_matrix(g, C.d), C.d, 1)
    return U.reshape(C.d**k, C.d**k)


def _apply_block(psi: np.ndarray, sites: Sequence[int], U: np.ndarray, sub: int, low: int) -> np.ndarray:
    """Apply ``U`` to the high factor (size ``sub``) of each listed axis.

    Each listed axis has size ``sub * low`` with index ``hi * low + lo``.
    """
    k = len(sites)
    nd = psi.ndim
    psi = np.moveaxis(psi, sites, list(range(k)))
    rest = psi.shape[k:]
    psi = psi.reshape(sum(((sub, low) for _ in range(k)), ()) + rest)
    Ut = U.reshape((sub,) * (2 * k))
    out = np.tensordot(Ut, psi, axes=(list(range(k, 2 * k)), list(range(0, 2 * k, 2))))
    # out axes: (hi_1..hi_k, lo_1..lo_k, rest...)
    order_ = []
    for i in range(k):
        order_ += [i, k + i]
    order_ += list(range(2 * k, out.ndim))
    out = out.transpose(order_).reshape((sub * low,) * k + rest)
    out = np.moveaxis(out, list(range(k)), sites)
    assert out.ndim == nd
    return out


# ---------------------------------------------------------------------------
# Replay


@dataclass(frozen=True)
class CanonicalForm:
    """Main sites in |0>, each swap group's ancillas in a GHZ state."""

    n_main: int
    main_dim: int
    groups: tuple[tuple[tuple[int, ...], int], ...] = ()

    @classmethod
    def from_log(cls, log: OperationLog) -> "CanonicalForm":
        groups: dict[int, tuple[list[int], int]] = {}
        p = ring.RingParams.from_dimension(log.d).p
        for e in log.entries:
            if isinstance(e.op, SwapExtract):
                ids, dim = groups.setdefault(e.op.group, ([], p**e.op.n_prime))
                ids.append(e.op.ancilla)
        return cls(log.n_qudits, log.d, tuple((tuple(ids), dim) for ids, dim in groups.values()))

    def ancilla_dims(self) -> list[int]:
        dims: dict[int, int] = {}
        for ids, dim in self.groups:
            for a in ids:
                dims[a] = dim
        return [dims[a] for a in sorted(dims)]

    def full_size(self) -> int:
        return self.main_dim**self.n_main * int(np.prod(self.ancilla_dims() or [1]))

    def state(self) -> DenseState:
        dims = [self.main_dim] * self.n_main + self.ancilla_dims()
        anc_ids = sorted(a for ids, _ in self.groups for a in ids)
        pos = {a: self.n_main + i for i, a in enumerate(anc_ids)}
        amps = np.zeros(dims, dtype=np.complex128)
        ranges = [range(dim) for _, dim in self.groups]
        for values in _product(ranges):
            idx = [0] * len(dims)
            for (ids, _), v in zip(self.groups, values):
                for a in ids:
                    idx[pos[a]] = v
            amps[tuple(idx)] = 1
        amps /= np.linalg.norm(amps)
        return DenseState(amps, tuple(dims))


def _product(ranges):
    if not ranges:
        yield ()
        return
    for v in ranges[0]:
        for rest in _product(ranges[1:]):
            yield (v,) + rest


def _level(dim: int, p: int) -> int:
    L = round(math.log(dim, p))
    if p**L != dim:
        raise ValueError(f"dimension {dim} is not a power of {p}")
    return L


def apply_log(
    state: DenseState, log: OperationLog, mode: str = "full", cap: int = DEFAULT_CAP
) -> DenseState:
    """Replay ``log`` on ``state``.

    ``mode="full"`` appends each ancilla as a |0> site and swaps into it.
    ``mode="factored"`` instead projects every swap group's ancillas onto the
    GHZ state they should hold as soon as the group is complete, so only the
    main sites are ever stored; the overlap with the canonical form is the
    same in both modes.
    """
    if mode not in ("full", "factored"):
        raise ValueError(f"unknown replay mode {mode!r}")
    p = ring.RingParams.from_dimension(log.d).p
    n0 = _level(log.d, p)
    N = log.n_qudits
    if tuple(state.dims[:N]) != (log.d,) * N:
        raise ValueError("state does not match the log's register")
    psi = state.amps
    anc_pos: dict[int, int] = {}
    entries = log.entries
    i = 0
    while i < len(entries):
        e = entries[i]
        op = e.op
        L = _level(e.dim, p)
        if L > n0 or L < 1:
            raise ValueError(f"operation dimension {e.dim} does not fit the register")
        low = p ** (n0 - L)
        if isinstance(op, SwapExtract):
            group = [e]
            while i + len(group) < len(entries):
                nxt = entries[i + len(group)]
                if isinstance(nxt.op, SwapExtract) and nxt.op.group == op.group:
                    group.append(nxt)
                else:
                    break
            if mode == "full":
                for g in group:
                    psi = _swap_full(psi, g, p, n0, anc_pos, cap)
            else:
                psi = _swap_factored(psi, group, p, n0)
            i += len(group)
            continue
        if isinstance(op, GlobalPhase):
            psi = psi * cmath.exp(1j * math.pi * op.gamma2 / e.dim)
        elif isinstance(op, LocalClifford):
            psi = _apply_block(psi, list(op.qudits), clifford_matrix(op), e.dim, low)
        else:
            psi = _apply_block(psi, list(op.qudits), gate_matrix(op, e.dim), e.dim, low)
        i += 1
    if anc_pos:
        # Put ancillas in id order after the main sites.
        ordered = [anc_pos[a] for a in sorted(anc_pos)]
        psi = np.transpose(psi, list(range(N)) + ordered)
    return DenseState(psi, psi.shape)


def _swap_full(psi, e: LogEntry, p: int, n0: int, anc_pos: dict[int, int], cap: int):
    op: SwapExtract = e.op
    a = p**op.n_prime
    if psi.size * a > cap:
        raise CapExceeded(f"Hilbert-space dimension {psi.size * a} exceeds the oracle cap {cap}")
    psi = psi[..., np.newaxis] * np.eye(1, a)[0]  # ancilla in |0>
    anc_pos[op.ancilla] = psi.ndim - 1
    L = _level(e.dim, p)
    # Site index j = top * p^(n0-L+n') + mid * p^(n0-L) + low, swap mid <-> ancilla.
    lowdim = p ** (n0 - L)
    topdim = p ** (L - op.n_prime)
    q = op.q
    psi = np.moveaxis(psi, [q, anc_pos[op.ancilla]], [0, 1])
    rest = psi.shape[2:]
    psi = psi.reshape((topdim, a, lowdim, a) + rest)
    psi = psi.swapaxes(1, 3).reshape((topdim * a * lowdim, a) + rest)
    return np.moveaxis(psi, [0, 1], [q, anc_pos[op.ancilla]])


def _swap_factored(psi, group: Sequence[LogEntry], p: int, n0: int):
    n_prime = group[0].op.n_prime
    a = p**n_prime
    L = _level(group[0].dim, p)
    lowdim = p ** (n0 - L)
    topdim = p ** (L - n_prime)
    sites = [g.op.q for g in group]
    k = len(sites)
    work = np.moveaxis(psi, sites, list(range(k)))
    rest = work.shape[k:]
    work = work.reshape(sum(((topdim, a, lowdim) for _ in range(k)), ()) + rest)
    out = np.zeros_like(work)
    # Keep the component whose middle digits are all equal to l, weight p^(-n'/2).
    for l in range(a):
        idx_src = tuple(x for _ in range(k) for x in (slice(None), l, slice(None)))
        idx_dst = tuple(x for _ in range(k) for x in (slice(None), 0, slice(None)))
        out[idx_dst] += work[idx_src]
    out /= math.sqrt(a)
    out = out.reshape((topdim * a * lowdim,) * k + rest)
    return np.moveaxis(out, list(range(k)), sites)


def fidelity(state: DenseState, target: DenseState) -> float:
    if state.dims != target.dims:
        raise ValueError(f"dimension mismatch: {state.dims} vs {target.dims}")
    return float(abs(np.vdot(target.vector, state.vector)))


def reduced_rank(state: DenseState, sites: Sequence[int], tol: float = 1e-8) -> int:
    sites = list(sites)
    if not sites:
        return 1
    others = [i for i in range(len(state.dims)) if i not in sites]
    mat = np.transpose(state.amps, sites + others).reshape(
        int(np.prod([state.dims[i] for i in sites])), -1
    )
    sv = np.linalg.svd(mat, compute_uv=False)
    return int(np.sum(sv > tol))


# ---------------------------------------------------------------------------
# Verification


@dataclass
class VerificationReport:
    fidelity: float
    mode: str
    seed: int
    dimension: int
    residuals: list[float] = field(default_factory=list)
    reduced_ranks: dict[str, int] = field(default_factory=dict)
    log_entries: int = 0
    locality_violations: list[int] = field(default_factory=list)
    tolerance: float = 1e-8

    @property
    def passed(self) -> bool:
        return self.fidelity >= 1 - self.tolerance and not self.locality_violations

    def to_dict(self) -> dict:
        return {
            "fidelity": self.fidelity,
            "passed": self.passed,
            "mode": self.mode,
            "seed": self.seed,
            "dimension": self.dimension,
            "residuals": self.residuals,
            "reduced_ranks": self.reduced_ranks,
            "log_entries": self.log_entries,
            "locality_violations": self.locality_violations,
            "tolerance": self.tolerance,
        }


def verify_log(
    S: StabilizerGroup,
    log: OperationLog,
    seed: int = DEFAULT_SEED,
    cap: int = DEFAULT_CAP,
    mode: str | None = None,
) -> VerificationReport:
    """Replay ``log`` on the state of ``S`` and compare with its canonical form."""
    if log.d != S.d or log.n_qudits != S.n_qudits:
        raise ValueError("log and group describe different registers")
    psi = state_from_group(S, seed, cap)
    canon = CanonicalForm.from_log(log)
    if mode is None:
        mode = "full" if canon.full_size() <= cap else "factored"
    out = apply_log(psi, log, mode=mode, cap=cap)
    if mode == "full":
        fid = fidelity(out, canon.state())
    else:
        fid = fidelity(out, DenseState.basis(out.dims))
    ranks = {label: reduced_rank(psi, qs) for label, qs in S.partition.parties}
    return VerificationReport(
        fidelity=fid,
        mode=mode,
        seed=seed,
        dimension=psi.size,
        residuals=stabilizer_residuals(psi, S.gens),
        reduced_ranks=ranks,
        log_entries=len(log),
        locality_violations=log.locality_violations(S.partition),
    )


# ---------------------------------------------------------------------------
# Random instances and CRT recombination


def _divisors(d: int) -> list[int]:
    return [k for k in range(1, d + 1) if d % k == 0]


def random_stabilizer_group(
    d: int,
    n_qudits: int,
    seed: int,
    gens_max: int | None = None,
    n_gates: int | None = None,
    labels: Sequence[str] = ("a", "b", "c"),
) -> StabilizerGroup:
    """Random pure stabilizer group on ``n_qudits`` qudits of dimension ``d``.

    Each qudit starts in the group <X^e, Z^(d/e)> for a random divisor e of
    d (one generator when e is 1 or d), then random Fourier, phase, CZ,
    multiplier and Pauli gates are applied, a few generators are replaced by
    products with others, and qudits are assigned to random parties.
    """
    from .clifford import apply_gates_to_group

    rng = np.random.Generator(np.random.Philox(seed))
    N = n_qudits
    if gens_max is None:
        gens_max = 2 * N
    if not N <= gens_max <= 2 * N:
        raise ValueError("gens_max must lie between N and 2N")
    divs = _divisors(d)
    spare = gens_max - N
    gens = []
    for q in range(N):
        choices = divs if spare > 0 else [1, d]
        e = int(rng.choice(choices))
        if 1 < e < d:
            spare -= 1
            gens.append(PauliOp.single(d, N, q, x=e))
            gens.append(PauliOp.single(d, N, q, z=d // e))
        elif e == 1:
            gens.append(PauliOp.single(d, N, q, x=1))
        else:
            gens.append(PauliOp.single(d, N, q, z=1))
    assign = [labels[int(rng.integers(len(labels)))] for _ in range(N)]
    partition = Partition(tuple((lab, tuple(q for q in range(N) if assign[q] == lab)) for lab in labels))
    S = StabilizerGroup(d, N, tuple(gens), partition)
    units = [a for a in range(1, d) if math.gcd(a, d) == 1]
    gates = []
    count = n_gates if n_gates is not None else 4 * N + 2
    for _ in range(count):
        kind = int(rng.integers(6 if N > 1 else 5))
        q = int(rng.integers(N))
        if kind == 0:
            gates.append(Fourier(q))
        elif kind == 1:
            gates.append(Phase(q, int(rng.integers(1, d))))
        elif kind == 2:
            gates.append(Mult(q, int(rng.choice(units))) if units else Fourier(q))
        elif kind == 3:
            gates.append(PauliX(q, int(rng.integers(d))))
        elif kind == 4:
            gates.append(PauliZ(q, int(rng.integers(d))))
        else:
            q2 = int(rng.integers(N - 1))
            q2 = q2 + 1 if q2 >= q else q2
            gates.append(CZ(q, q2, int(rng.integers(1, d))))
    S = apply_gates_to_group(S, gates)
    gens = list(S.gens)
    for _ in range(int(rng.integers(len(gens) + 1))):
        i, j = (int(v) for v in rng.integers(len(gens), size=2))
        if i != j:
            gens[i] = gens[i] * gens[j] ** int(rng.integers(1, d))
    order_ = rng.permutation(len(gens))
    return S.with_gens(gens[int(i)] for i in order_)


def crt_combine(states: Sequence[DenseState], moduli: Sequence[int]) -> DenseState:
    """Recombine prime-power factor states along ``j -> (j mod q)``."""
    d = int(np.prod(moduli))
    n = len(states[0].dims)
    out = np.zeros((d,) * n, dtype=np.complex128)
    for idx in np.ndindex(*out.shape):
        amp = 1
        for st, q in zip(states, moduli):
            amp *= st.amps[tuple(j % q for j in idx)]
        out[idx] = amp
    return DenseState(out, (d,) * n)
