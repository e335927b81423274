import itertools

import numpy as np
import pytest

from tristab import ring
from tristab.clifford import CZ, Fourier, LocalClifford, Mult, PauliX, PauliZ, Phase, apply_clifford_to_group
from tristab.oracle import DenseState, stabilizers_of_state
from tristab.pauli import PauliOp
from tristab.stabilizer import Partition, StabilizerGroup, minimized


def pauli(d, x, z, gamma2=0):
    return PauliOp(d, tuple(x), tuple(z), gamma2)


def ghz_group(d, n_parties=3, labels=("a", "b", "c")):
    """<X..X, Z_0 Z_i^-1> with one qudit per party."""
    N = n_parties
    gens = [pauli(d, [1] * N, [0] * N)]
    for i in range(1, N):
        z = [0] * N
        z[0], z[i] = 1, d - 1
        gens.append(pauli(d, [0] * N, z))
    return StabilizerGroup(d, N, tuple(gens), Partition.singletons(N, labels))


def epr_group(d, labels=("a", "b")):
    gens = (pauli(d, [1, 1], [0, 0]), pauli(d, [0, 0], [1, d - 1]))
    return StabilizerGroup(d, 2, gens, Partition.from_dict({labels[0]: [0], labels[1]: [1]}))


def product_group(d, N, labels=("a", "b", "c")):
    gens = tuple(PauliOp.single(d, N, q, z=1) for q in range(N))
    return StabilizerGroup(d, N, gens, Partition.singletons(N, labels))


def rotated_ghz9_state():
    """The D=9 state written as a product of two D=3 three-qutrit states.

    Each D=9 digit is j = 3a + b with a from the first factor (high digit)
    and b from the GHZ factor (low digit).
    """
    first = [(0, 0, 0), (0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 1, 1), (1, 2, 0), (2, 0, 1), (2, 1, 0), (2, 2, 2)]
    ghz = [(0, 0, 0), (1, 1, 1), (2, 2, 2)]
    amps = np.zeros((9, 9, 9), dtype=complex)
    for a in first:
        for b in ghz:
            amps[tuple(3 * ai + bi for ai, bi in zip(a, b))] = 1 / (3 * np.sqrt(3))
    return DenseState(amps, (9, 9, 9))


def group_from_state(state, d, partition):
    """Minimal generating set of every Pauli stabilizer of ``state``."""
    ops = [g for g in stabilizers_of_state(state, d) if not g.is_identity()]
    S = StabilizerGroup(d, len(state.dims), tuple(ops), partition)
    return minimized(S)


def enumerate_span(rows, d, width=None):
    """Every Z_d combination of ``rows`` as a set of tuples."""
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        return {(0,) * (width or 0)}
    out = set()
    for c in itertools.product(range(d), repeat=rows.shape[0]):
        out.add(tuple(int(e) for e in (np.array(c) @ rows) % d))
    return out


@pytest.fixture
def ghz9():
    return ghz_group(9)


@pytest.fixture
def ghz3():
    return ghz_group(3)


def embed(U, sites, d, N):
    """Dense operator acting as ``U`` on ``sites`` of N qudits of dimension d."""
    k = len(sites)
    full = np.eye(d**N, dtype=complex).reshape((d,) * N + (d**N,))
    Ut = U.reshape((d,) * (2 * k))
    out = np.tensordot(Ut, full, axes=(list(range(k, 2 * k)), list(sites)))
    out = np.moveaxis(out, list(range(k)), list(sites))
    return out.reshape(d**N, d**N)


def circuit_unitary(gates, d, N):
    """Product of the gate matrices in time order (first gate rightmost)."""
    from tristab.oracle import gate_matrix

    U = np.eye(d**N, dtype=complex)
    for g in gates:
        U = embed(gate_matrix(g, d), list(g.qudits), d, N) @ U
    return U


def conjugates_to(gates, d, N, op, image, atol=1e-9):
    """Whether U op U^dagger equals ``image`` exactly (phase included)."""
    from tristab.oracle import pauli_matrix

    U = circuit_unitary(gates, d, N)
    return np.allclose(U @ pauli_matrix(op) @ U.conj().T, pauli_matrix(image), atol=atol)


ALL_GATES = ("fourier", "phase", "mult", "px", "pz", "cz")


def random_gates(rng, d, qudits, count):
    units = [a for a in range(1, d) if ring.is_unit(a, d)]
    gates = []
    for _ in range(count):
        kind = ALL_GATES[int(rng.integers(len(ALL_GATES) if len(qudits) > 1 else 5))]
        q = int(rng.choice(qudits))
        if kind == "fourier":
            gates.append(Fourier(q))
        elif kind == "phase":
            gates.append(Phase(q, int(rng.integers(1, d))))
        elif kind == "mult":
            gates.append(Mult(q, int(rng.choice(units))))
        elif kind == "px":
            gates.append(PauliX(q, int(rng.integers(d))))
        elif kind == "pz":
            gates.append(PauliZ(q, int(rng.integers(d))))
        else:
            q2 = int(rng.choice([r for r in qudits if r != q]))
            gates.append(CZ(q, q2, int(rng.integers(1, d))))
    return gates


def random_local_clifford(rng, d, party, qudits, count=8):
    return LocalClifford.from_gates(party, qudits, d, random_gates(rng, d, list(qudits), count))


def scramble_locally(S, rng, count=8):
    """Apply an independent random local Clifford to every nonempty party."""
    for label, qudits in S.partition.parties:
        if qudits:
            S = apply_clifford_to_group(S, random_local_clifford(rng, S.d, label, qudits, count))
    return S


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per tagged acceptance criterion."""
    rows = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call":
                continue
            props = dict(rep.user_properties)
            if "criterion" in props:
                rows.append((props["criterion"], outcome == "passed", props.get("title", "")))
    if not rows:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, ok, title in sorted(rows):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}")
