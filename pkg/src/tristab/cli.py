"""Command-line front end.

Group files are line oriented::

    # D=9 GHZ state
    d = 9
    party a = 0
    party b = 1
    party c = 2
    gen = X0 X1 X2
    gen = Z0 Z1^8
    gen = w^1/2 Z0 Z2^8

Indices are 0-based.  A generator is the ordered product of its factors,
optionally prefixed by a phase ``w^k`` (omega^k) or ``w^k/2`` (omega^(k/2)).
``I`` may stand for the identity factor.

Exit codes: 0 success, 1 verification below tolerance, 2 parse or
validation failure, 3 engine diagnostic, 4 oracle dimension cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from importlib import resources
from typing import Sequence

from . import ring
from .clifford import OperationLog
from .decompose import EngineConfig, EngineDiagnostic, run
from .oracle import DEFAULT_CAP, DEFAULT_SEED, CapExceeded, random_stabilizer_group, verify_log
from .pauli import PauliOp, render
from .spm import compute_spm, spm_json, spm_text
from .stabilizer import Partition, StabilizerGroup, crt_split, validate

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INVALID = 2
EXIT_DIAGNOSTIC = 3
EXIT_CAP = 4


class GroupParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


_ASSIGN = re.compile(r"^\s*(d|party|gen)\b\s*([A-Za-z0-9_\-]*)\s*=\s*(.*?)\s*$")
_PHASE = re.compile(r"^w\^(-?\d+)(/2)?$")
_FACTOR = re.compile(r"^([XZ])(\d+)(?:\^(-?\d+))?$")


def parse_group(text: str) -> StabilizerGroup:
    """Parse the group-file grammar into a StabilizerGroup (not validated)."""
    d = None
    parties: list[tuple[str, tuple[int, ...]]] = []
    raw_gens: list[tuple[int, int, str]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        m = _ASSIGN.match(body)
        if not m:
            col = len(body) - len(body.lstrip()) + 1
            raise GroupParseError("expected 'd = ...', 'party <label> = ...' or 'gen = ...'", lineno, col)
        key, label, value = m.groups()
        col = m.start(3) + 1
        if key == "d":
            if label:
                raise GroupParseError("'d' takes no label", lineno, m.start(2) + 1)
            if d is not None:
                raise GroupParseError("dimension given twice", lineno, 1)
            if not re.fullmatch(r"\d+", value) or int(value) < 2:
                raise GroupParseError(f"invalid dimension {value!r}", lineno, col)
            d = int(value)
            if d > ring.MAX_MODULUS:
                raise GroupParseError(f"dimension {d} exceeds the supported maximum", lineno, col)
        elif key == "party":
            if not label:
                raise GroupParseError("party line needs a label", lineno, m.end(1) + 1)
            items = [s.strip() for s in value.split(",")] if value else []
            if any(not re.fullmatch(r"\d+", s) for s in items):
                raise GroupParseError(f"invalid qudit list {value!r}", lineno, col)
            parties.append((label, tuple(int(s) for s in items)))
        else:
            if label:
                raise GroupParseError("'gen' takes no label", lineno, m.start(2) + 1)
            raw_gens.append((lineno, col, value))
    if d is None:
        raise GroupParseError("missing 'd = <int>' line", 1, 1)
    if not parties:
        raise GroupParseError("at least one 'party' line is required", 1, 1)
    try:
        partition = Partition(tuple(parties))
    except ValueError as exc:
        raise GroupParseError(str(exc), 1, 1) from None
    qudits = partition.all_qudits()
    N = len(qudits)
    if qudits != list(range(N)):
        raise GroupParseError(f"parties must cover qudits 0..{N - 1} exactly, got {qudits}", 1, 1)
    gens = [_parse_gen(value, d, N, lineno, col) for lineno, col, value in raw_gens]
    return StabilizerGroup(d, N, tuple(gens), partition)


def _parse_gen(value: str, d: int, N: int, lineno: int, col0: int) -> PauliOp:
    out = PauliOp.identity(d, N)
    gamma2 = 0
    pos = 0
    first = True
    for tok in value.split():
        pos = value.index(tok, pos)
        col = col0 + pos
        pos += len(tok)
        m = _PHASE.match(tok)
        if m:
            if not first:
                raise GroupParseError("phase must come first", lineno, col)
            k = int(m.group(1))
            gamma2 = k if m.group(2) else 2 * k
            if d % 2 and gamma2 % 2:
                raise GroupParseError(f"half-integer phase is not allowed for odd d={d}", lineno, col)
            first = False
            continue
        first = False
        if tok == "I":
            continue
        m = _FACTOR.match(tok)
        if not m:
            raise GroupParseError(f"unrecognized factor {tok!r}", lineno, col)
        kind, q, e = m.group(1), int(m.group(2)), int(m.group(3) or 1)
        if q >= N:
            raise GroupParseError(f"qudit index {q} out of range for {N} qudits", lineno, col)
        factor = PauliOp.single(d, N, q, x=e) if kind == "X" else PauliOp.single(d, N, q, z=e)
        out = out * factor
    return out.with_phase(out.gamma2 + gamma2)


def print_group(S: StabilizerGroup) -> str:
    lines = [f"d = {S.d}"]
    for label, qs in S.partition.parties:
        lines.append(f"party {label} = {','.join(map(str, qs))}")
    lines.extend(f"gen = {render(g)}" for g in S.gens)
    return "\n".join(lines) + "\n"


def load_schema(name: str) -> dict:
    """JSON schema shipped with the package: ``"report"`` or ``"verification"``."""
    path = resources.files("tristab") / "schemas" / f"{name}.schema.json"
    return json.loads(path.read_text(encoding="utf-8"))


def _load_group(path: str) -> StabilizerGroup:
    with open(path, encoding="utf-8") as fh:
        return parse_group(fh.read())


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _err(msg: str):
    print(f"tristab: {msg}", file=sys.stderr)


def _load_valid(path: str, require_pure: bool = True) -> StabilizerGroup | None:
    try:
        S = _load_group(path)
    except OSError as exc:
        _err(str(exc))
        return None
    except ValueError as exc:
        _err(f"{path}: {exc}")
        return None
    rep = validate(S)
    if not (rep.pure if require_pure else rep.valid):
        for m in rep.messages():
            _err(f"{path}: {m}")
        return None
    return S


def cmd_decompose(args) -> int:
    S = _load_valid(args.file)
    if S is None:
        return EXIT_INVALID
    config = EngineConfig(
        max_iterations=args.max_iter, verify=args.verify, cap=args.cap, seed=args.seed, trace_spm=args.trace
    )
    try:
        report = run(S, config)
    except EngineDiagnostic as exc:
        _err(f"engine diagnostic: {exc}")
        return EXIT_DIAGNOSTIC
    except ValueError as exc:
        _err(str(exc))
        return EXIT_INVALID
    _emit(json.dumps(report.to_dict(), indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_spm(args) -> int:
    S = _load_valid(args.file, require_pure=False)
    if S is None:
        return EXIT_INVALID
    spm = compute_spm(S)
    if args.json:
        _emit(json.dumps(spm_json(spm), indent=2) + "\n", args.out)
    else:
        _emit(spm_text(spm) + "\n", args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    S = _load_valid(args.group)
    if S is None:
        return EXIT_INVALID
    try:
        with open(args.log, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        _err(f"{args.log}: {exc}")
        return EXIT_INVALID
    # Accept a bare log or a full decomposition report.
    if "factors" in data:
        groups = crt_split(S) if len(ring.factorize(S.d)) > 1 else [S]
        logs = [f["log"] for f in data["factors"]]
    else:
        groups = [S]
        logs = [data["log"] if "log" in data else data]
    if len(groups) != len(logs):
        _err("log does not match the group's prime-power factors")
        return EXIT_INVALID
    reports = []
    try:
        for G, raw in zip(groups, logs):
            log = OperationLog.from_dict(raw)
            reports.append(verify_log(G, log, seed=args.seed, cap=args.cap, mode=args.mode))
    except CapExceeded as exc:
        _err(str(exc))
        return EXIT_CAP
    except (KeyError, TypeError, ValueError) as exc:
        _err(f"{args.log}: {exc}")
        return EXIT_INVALID
    if len(reports) == 1:
        payload = reports[0].to_dict()
    else:
        payload = {"passed": all(r.passed for r in reports), "factors": [r.to_dict() for r in reports]}
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY_FAILED


def cmd_random(args) -> int:
    labels = tuple(args.labels.split(","))
    try:
        S = random_stabilizer_group(args.d, args.n, args.seed, gens_max=args.gens_max, n_gates=args.gates, labels=labels)
    except ValueError as exc:
        _err(str(exc))
        return EXIT_INVALID
    _emit(f"# random group: d={args.d} n={args.n} seed={args.seed}\n" + print_group(S), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tristab", description="Tripartite qudit stabilizer state decomposition")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="extract GHZ states and EPR pairs, print a JSON report")
    p.add_argument("file")
    p.add_argument("--verify", action="store_true", help="replay the log on the dense oracle")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="oracle dimension cap")
    p.add_argument("--trace", action="store_true", help="include phase matrices in the trace")
    p.add_argument("--out")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("spm", help="print the subsystem phase matrices")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_spm)

    p = sub.add_parser("verify", help="replay an operation log against the oracle")
    p.add_argument("group")
    p.add_argument("log", help="operation log JSON or a decompose report")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--mode", choices=("full", "factored"), default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("random", help="emit a random pure stabilizer group file")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--gens-max", type=int, default=None)
    p.add_argument("--gates", type=int, default=None)
    p.add_argument("--labels", default="a,b,c")
    p.add_argument("--out")
    p.set_defaults(func=cmd_random)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
