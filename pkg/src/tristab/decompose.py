"""The extraction loop: reduce the level or pull out GHZ/EPR states until done.

Each iteration classifies the current subsystem phase matrices.  When all of
them vanish mod p the qudit dimension is lowered by one p-level (or, at
dimension p, every qudit is rotated to |0>).  Otherwise a witness vector is
turned into local operations that move a GHZ or EPR state on p**n' levels
into fresh ancillas.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import ring
from .clifford import (
    LogEntry,
    OperationLog,
    SwapExtract,
    VGate,
    apply_gates_to_group,
    apply_v_gate_to_group,
    compile_to_elementary,
    conjugate_all,
    diagonalize_local_group,
    lift_symplectic,
    log_gates,
    pauli_frame_correction,
    synth_map_to_x_fixing_z,
    synth_map_to_z,
)
from .oracle import DEFAULT_CAP, DEFAULT_SEED, VerificationReport, verify_log
from .pauli import PauliOp
from .spm import Condition1, Condition2, Condition3, ConditionResult, SpmSet, classify_condition, compute_spm
from .stabilizer import (
    Partition,
    StabilizerGroup,
    crt_split,
    cut_entropy,
    group_element,
    minimized,
    validate,
)


class EngineDiagnostic(RuntimeError):
    """The engine hit a state it cannot handle (carries the trace so far)."""

    def __init__(self, message: str, trace: list | None = None):
        super().__init__(message)
        self.trace = trace or []


@dataclass
class EngineConfig:
    max_iterations: int | None = None
    verify: bool = False
    cap: int = DEFAULT_CAP
    seed: int = DEFAULT_SEED
    trace_spm: bool = False

    def iteration_bound(self, n: int, n_qudits: int) -> int:
        default = n * (2 * n_qudits + 1)
        return self.max_iterations if self.max_iterations is not None else default


@dataclass
class TraceStep:
    iteration: int
    level: int
    condition: str
    entropies: dict[str, int]
    witness: list[int] | None = None
    n_prime: int | None = None
    parties: list[str] | None = None
    spm: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "iteration": self.iteration,
            "level": self.level,
            "condition": self.condition,
            "entropies": self.entropies,
        }
        if self.witness is not None:
            out["witness"] = self.witness
            out["n_prime"] = self.n_prime
            out["parties"] = self.parties
        if self.spm is not None:
            out["spm"] = self.spm
        return out


@dataclass(frozen=True)
class Ancilla:
    id: int
    party: str
    dim: int
    group: int


@dataclass(frozen=True)
class Extraction:
    parties: tuple[str, ...]
    n_prime: int
    level: int


COUNT_KEYS = ("n_ghz", "n_ab", "n_ac", "n_bc", "n_a", "n_b", "n_c")


@dataclass
class DecompositionReport:
    d: int
    p: int
    n: int
    n_qudits: int
    partition: Partition
    counts: dict[str, int]
    log: OperationLog | None
    trace: list[TraceStep] = field(default_factory=list)
    ancillas: list[Ancilla] = field(default_factory=list)
    extractions: list[Extraction] = field(default_factory=list)
    verification: VerificationReport | None = None
    factors: list["DecompositionReport"] = field(default_factory=list)
    runtime_s: float = 0.0
    seed: int = DEFAULT_SEED

    def __getattr__(self, name):
        counts = self.__dict__.get("counts")
        if counts is not None and name in counts:
            return counts[name]
        raise AttributeError(name)

    @property
    def labels(self) -> tuple[str, ...]:
        return self.partition.labels

    def pair_count(self, x: str, y: str) -> int:
        a, b, c = self.labels
        key = {frozenset((a, b)): "n_ab", frozenset((a, c)): "n_ac", frozenset((b, c)): "n_bc"}[frozenset((x, y))]
        return self.counts[key]

    def entangled_levels(self, label: str) -> int:
        """GHZ plus EPR p-levels held by one party (its expected cut entropy)."""
        return self.counts["n_ghz"] + sum(self.pair_count(label, o) for o in self.labels if o != label)

    def to_dict(self) -> dict:
        out = {
            "d": self.d,
            "p": self.p,
            "n": self.n,
            "n_qudits": self.n_qudits,
            "parties": self.partition.as_dict(),
            "party_order": list(self.labels),
            **self.counts,
            "ancillas": [{"id": a.id, "party": a.party, "dim": a.dim, "group": a.group} for a in self.ancillas],
            "extractions": [
                {"parties": list(e.parties), "n_prime": e.n_prime, "level": e.level} for e in self.extractions
            ],
            "trace": [t.to_dict() for t in self.trace],
            "log": self.log.to_dict() if self.log is not None else None,
            "verification": self.verification.to_dict() if self.verification is not None else None,
            "seed": self.seed,
            "runtime_s": self.runtime_s,
        }
        if self.factors:
            out["factors"] = [f.to_dict() for f in self.factors]
        return out


# ---------------------------------------------------------------------------
# Helpers


def _pad_partition(partition: Partition) -> Partition:
    labels = list(partition.labels)
    if len(labels) > 3:
        raise ValueError(f"at most three parties are supported, got {len(labels)}")
    spare = [x for x in ("a", "b", "c") if x not in labels]
    spare += [f"party{i}" for i in range(3) if f"party{i}" not in labels]
    return partition.padded(labels + spare[: 3 - len(labels)])


def _restriction_mod_p(g: PauliOp, qudits: Sequence[int], p: int) -> PauliOp:
    r = g.restrict(qudits)
    return PauliOp(p, tuple(x % p for x in r.x), tuple(z % p for z in r.z))


def _dual_vector(Msum: np.ndarray, v: np.ndarray, D: int) -> np.ndarray:
    """A kernel vector k of ``Msum`` with ``k . v = 1``."""
    ker = ring.kernel(Msum % D, D)
    if ker.shape[0] == 0:
        raise EngineDiagnostic("kernel of the summed phase matrices is trivial")
    dots = (ker @ v) % D
    coeffs = ring.solve(dots.reshape(1, -1), np.array([1]), D)
    if coeffs is None:
        raise EngineDiagnostic("no kernel vector pairs to 1 with the witness")
    return (coeffs @ ker) % D


class _State:
    """Mutable engine state: the group plus tracked elements and the log."""

    def __init__(self, S: StabilizerGroup, level: int, p: int):
        self.S = S
        self.level = level
        self.p = p
        self.entries: list[LogEntry] = []
        self.tracked: list[PauliOp] = []

    @property
    def dim(self) -> int:
        return self.p**self.level

    def gates(self, gates):
        if not gates:
            return
        self.S = apply_gates_to_group(self.S, gates)
        self.tracked = [conjugate_all(gates, t) for t in self.tracked]
        self.entries.extend(log_gates(gates, self.S.partition, self.dim))

    def v_gate(self, q: int):
        V = VGate(q)
        self.S = apply_v_gate_to_group(self.S, V)
        p = self.p
        out = []
        for t in self.tracked:
            x, z = list(t.x), list(t.z)
            if x[q] % p:
                raise EngineDiagnostic("tracked element does not commute with Z^(p^(n-1))")
            x[q], z[q] = x[q] // p, p * z[q]
            out.append(PauliOp(t.d, tuple(x), tuple(z), t.gamma2))
        self.tracked = out
        self.entries.append(LogEntry(V, self.S.partition.party_of(q), self.dim))

    def frame(self, targets: Sequence[tuple[PauliOp, int]]):
        try:
            gates = pauli_frame_correction(self.S, targets)
        except ValueError as exc:
            raise EngineDiagnostic(f"Pauli frame correction failed: {exc}") from None
        self.gates(gates)


def _diagonalize_parties(st: _State):
    """Per party, a Clifford sending every generator's mod-p restriction to Z-type."""
    p, S = st.p, st.S
    for label, qudits in S.partition.parties:
        if not qudits or not S.gens:
            continue
        rs = [_restriction_mod_p(g, qudits, p) for g in S.gens]
        Cp = diagonalize_local_group(label, qudits, rs)
        if st.level == 1:
            gates = list(Cp.gates)
        else:
            gates = compile_to_elementary(lift_symplectic(Cp, st.level))
        st.gates(gates)
        S = st.S
    for g in st.S.gens:
        if any(x % p for x in g.x):
            raise EngineDiagnostic("local diagonalization left an X component")


def reduce_level(S: StabilizerGroup) -> tuple[StabilizerGroup, list[LogEntry]]:
    """Lower the qudit dimension p**n -> p**(n-1) when all M' vanish.

    Returns the group on the top n-1 digits and the log fragment (at
    dimension p**n).  Each qudit's lowest digit ends in |0>.
    """
    params = S.ring
    p, n = params.p, params.n
    if n < 2:
        raise ValueError("level reduction needs n >= 2")
    spm = compute_spm(S)
    if any((M % p).any() for M in spm.matrices):
        raise ValueError("precondition violated: some phase matrix is nonzero mod p")
    st = _State(S, n, p)
    _diagonalize_parties(st)
    top = p ** (n - 1)
    st.frame([(PauliOp.single(S.d, S.n_qudits, q, z=top), 0) for q in range(S.n_qudits)])
    D1 = p ** (n - 1)
    gens = []
    for g in st.S.gens:
        if g.gamma2 % p:
            raise EngineDiagnostic(
                f"residual phase w^{g.gamma2}/2 on {g} does not descend to dimension {D1}"
            )
        new = PauliOp(D1, tuple(x // p for x in g.x), tuple(z % D1 for z in g.z), g.gamma2 // p)
        if new.is_identity():
            if new.gamma2:
                raise EngineDiagnostic("level reduction produced a nontrivial multiple of the identity")
            continue
        gens.append(new)
    out = minimized(StabilizerGroup(D1, S.n_qudits, tuple(gens), S.partition))
    return out, st.entries


def finalize_product(S: StabilizerGroup) -> tuple[StabilizerGroup, list[LogEntry]]:
    """At dimension p with all phase matrices zero, rotate every qudit to |0>."""
    params = S.ring
    if params.n != 1:
        raise ValueError("final rotation needs dimension p")
    st = _State(S, 1, params.p)
    _diagonalize_parties(st)
    st.frame([(PauliOp.single(S.d, S.n_qudits, q, z=1), 0) for q in range(S.n_qudits)])
    return st.S, st.entries


@dataclass
class ExtractionResult:
    group: StabilizerGroup
    entries: list[LogEntry]
    extraction: Extraction
    ancillas: list[Ancilla]


def extract_entanglement(
    S: StabilizerGroup,
    witness: ConditionResult,
    spm: SpmSet | None = None,
    next_ancilla: int = 0,
    group_id: int = 0,
) -> ExtractionResult:
    """Move n' p-level GHZ (three parties) or EPR (two parties) copies into ancillas."""
    params = S.ring
    p, n, D = params.p, params.n, params.D
    if spm is None:
        spm = compute_spm(S)
    if isinstance(witness, Condition2):
        parties = tuple(spm.labels)
        v, n_prime = witness.v % D, witness.n_prime
    elif isinstance(witness, Condition3):
        parties = tuple(witness.parties)
        v, n_prime = witness.v % D, n
    else:
        raise ValueError("extraction needs a condition 2 or condition 3 witness")
    c = p ** (n - n_prime)
    if ring.element_order(v, D) != D:
        raise ValueError("witness must have full order")
    for label in parties:
        if not ring.span_membership((c * v) % D, spm[label], D):
            raise ValueError(f"scaled witness is outside span(M_{label})")
    for label in parties:
        if not S.partition.qudits(label):
            raise ValueError(f"party {label!r} has no qudits")

    Msum = sum(spm[label] for label in parties) % D
    v_dual = _dual_vector(Msum, v, D)
    us = []
    for label in parties:
        u = ring.solve(spm[label], (c * v) % D, D)
        if u is None:
            raise ValueError(f"scaled witness is outside span(M_{label})")
        us.append(u)

    st = _State(S, n, p)
    st.tracked = [group_element(S, v_dual)] + [group_element(S, u) for u in us]
    firsts = []
    for idx, label in enumerate(parties):
        qudits = S.partition.qudits(label)
        r = qudits[0]
        firsts.append(r)
        h_loc = st.tracked[1 + idx].restrict(qudits)
        order = ring.element_order(h_loc.vector, D)
        k = params.valuation(order) if order < D else n
        if k < n_prime:
            raise EngineDiagnostic("local part of h has order below p^n'")
        st.gates(list(synth_map_to_z(label, qudits, h_loc, k).gates))
        if k > n_prime:
            z_stab = PauliOp.single(D, S.n_qudits, r, z=p ** (n - k + n_prime))
            st.frame([(z_stab, 0)])
            for _ in range(k - n_prime):
                st.v_gate(r)
        g_loc = st.tracked[0].restrict(qudits)
        try:
            C = synth_map_to_x_fixing_z(label, qudits, g_loc, n_prime)
        except ValueError as exc:
            raise EngineDiagnostic(f"could not rotate g on party {label!r}: {exc}") from None
        st.gates(list(C.gates))

    N = S.n_qudits
    xs = [0] * N
    for r in firsts:
        xs[r] = 1
    targets = [(PauliOp(D, tuple(xs), (0,) * N), 0)]
    for r in firsts[1:]:
        zs = [0] * N
        zs[firsts[0]] = c
        zs[r] = -c
        targets.append((PauliOp(D, (0,) * N, tuple(zs)), 0))
    st.frame(targets)

    ancillas = []
    for i, (label, r) in enumerate(zip(parties, firsts)):
        swap = SwapExtract(r, next_ancilla + i, n_prime, group_id)
        st.entries.append(LogEntry(swap, label, D))
        ancillas.append(Ancilla(next_ancilla + i, label, p**n_prime, group_id))

    # Residual: elements commuting with every Z_r^c, plus Z_r0^c itself.
    G = st.S.matrix()
    A = (c * G[:, firsts]) % D
    K = ring.left_kernel(A, D)
    gens = [group_element(st.S, k) for k in K]
    gens.append(PauliOp.single(D, N, firsts[0], z=c))
    residual = minimized(st.S.with_gens(g for g in gens if not (g.is_identity() and g.gamma2 == 0)))
    rep = validate(residual)
    if not rep.pure:
        raise EngineDiagnostic("residual group after extraction is not pure: " + "; ".join(rep.messages()))
    return ExtractionResult(residual, st.entries, Extraction(parties, n_prime, n), ancillas)


# ---------------------------------------------------------------------------
# Driver


def _entropies(S: StabilizerGroup) -> dict[str, int]:
    return {label: cut_entropy(S, qs) for label, qs in S.partition.parties}


def _counts(labels: Sequence[str], n0: int, partition: Partition, extractions: list[Extraction]) -> dict[str, int]:
    a, b, c = labels
    counts = dict.fromkeys(COUNT_KEYS, 0)
    pair_key = {frozenset((a, b)): "n_ab", frozenset((a, c)): "n_ac", frozenset((b, c)): "n_bc"}
    for e in extractions:
        if len(e.parties) == 3:
            counts["n_ghz"] += e.n_prime
        else:
            counts[pair_key[frozenset(e.parties)]] += e.n_prime
    for label, key in zip(labels, ("n_a", "n_b", "n_c")):
        held = counts["n_ghz"] + sum(
            counts[pair_key[frozenset((label, o))]] for o in labels if o != label
        )
        counts[key] = n0 * len(partition.qudits(label)) - held
    return counts


def run(S: StabilizerGroup, config: EngineConfig | None = None) -> DecompositionReport:
    config = config or EngineConfig()
    start = time.perf_counter()
    factors = ring.factorize(S.d)
    if len(factors) > 1:
        return _run_composite(S, config, start)
    S = StabilizerGroup(S.d, S.n_qudits, S.gens, _pad_partition(S.partition))
    rep = validate(S)
    if not rep.pure:
        raise ValueError("input group is not a pure stabilizer state: " + "; ".join(rep.messages()))
    params = S.ring
    p, n0 = params.p, params.n
    labels = S.partition.labels
    bound = config.iteration_bound(n0, S.n_qudits)

    cur = minimized(S)
    level = n0
    entries: list[LogEntry] = []
    trace: list[TraceStep] = []
    ancillas: list[Ancilla] = []
    extractions: list[Extraction] = []
    group_id = 0
    iteration = 0
    while True:
        if iteration >= bound:
            raise EngineDiagnostic(f"iteration bound {bound} exceeded", trace)
        iteration += 1
        spm = compute_spm(cur)
        cond = classify_condition(spm, ring.RingParams(p, level))
        step = TraceStep(iteration, level, "", _entropies(cur))
        if config.trace_spm:
            step.spm = {lab: [[int(e) for e in row] for row in M] for lab, M in spm.as_dict().items()}
        trace.append(step)
        if isinstance(cond, Condition1):
            if level == 1:
                step.condition = "final"
                cur, frag = finalize_product(cur)
                entries.extend(frag)
                break
            step.condition = "condition1"
            cur, frag = reduce_level(cur)
            level -= 1
            entries.extend(frag)
            continue
        step.condition = "condition2" if isinstance(cond, Condition2) else "condition3"
        step.witness = [int(e) for e in cond.v]
        step.n_prime = cond.n_prime if isinstance(cond, Condition2) else level
        step.parties = list(labels) if isinstance(cond, Condition2) else list(cond.parties)
        result = extract_entanglement(cur, cond, spm, len(ancillas), group_id)
        group_id += 1
        cur = result.group
        entries.extend(result.entries)
        ancillas.extend(result.ancillas)
        extractions.append(result.extraction)

    log = OperationLog(S.d, S.n_qudits, tuple(entries))
    report = DecompositionReport(
        d=S.d,
        p=p,
        n=n0,
        n_qudits=S.n_qudits,
        partition=S.partition,
        counts=_counts(labels, n0, S.partition, extractions),
        log=log,
        trace=trace,
        ancillas=ancillas,
        extractions=extractions,
        seed=config.seed,
    )
    if config.verify and S.d**S.n_qudits <= config.cap:
        report.verification = verify_log(S, log, seed=config.seed, cap=config.cap)
        if not report.verification.passed:
            raise EngineDiagnostic(
                f"oracle replay fidelity {report.verification.fidelity:.3e} below tolerance", trace
            )
    report.runtime_s = time.perf_counter() - start
    return report


def _run_composite(S: StabilizerGroup, config: EngineConfig, start: float) -> DecompositionReport:
    rep = validate(S)
    if not rep.pure:
        raise ValueError("input group is not a pure stabilizer state: " + "; ".join(rep.messages()))
    subs = [run(F, config) for F in crt_split(S)]
    counts = {key: sum(r.counts[key] for r in subs) for key in COUNT_KEYS}
    return DecompositionReport(
        d=S.d,
        p=0,
        n=0,
        n_qudits=S.n_qudits,
        partition=subs[0].partition,
        counts=counts,
        log=None,
        factors=subs,
        seed=config.seed,
        runtime_s=time.perf_counter() - start,
    )
