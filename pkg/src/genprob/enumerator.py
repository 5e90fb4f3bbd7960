"""Exhaustive enumeration of valid programs and algorithmic probability bounds.

Valid programs are generated structurally (a run of non-HALT instructions
followed by HALT) rather than by filtering all bit strings, one length at a
time, as numpy batches. Within a length, programs are ordered by their bit
string read as a binary integer, which is lexicographic bit order.

All masses are exact: a program of length ``L`` contributes ``2**-L``.
"""

from __future__ import annotations

import functools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .kernels import HALTED, run_batch, target_symbols
from .mlang import (
    OPCODE_BITS,
    OPERAND_BITS,
    OPS_BY_CODE,
    EvalLimit,
    Instr,
    Op,
    Program,
)

__all__ = [
    "MAX_DEPTH",
    "ProgramBatch",
    "MassEstimate",
    "CompressionResult",
    "KraftReport",
    "count_valid",
    "program_batches",
    "enumerate_valid",
    "partition_prefixes",
    "estimate_probability",
    "optimal_compression",
    "kraft_report",
]

# codes are held in uint64
MAX_DEPTH = 63
JZ_BITS = OPCODE_BITS + OPERAND_BITS
_SIMPLE_OPS = (Op.INC, Op.DEC, Op.SWAP, Op.OUT0, Op.OUT1, Op.SEP)
_JZ_OFFSETS = tuple(range(-8, 8))


def _check_depth(max_bits: int) -> None:
    if not OPCODE_BITS <= max_bits <= MAX_DEPTH:
        raise ValueError(f"max_bits must be in {OPCODE_BITS}..{MAX_DEPTH}, got {max_bits}")


@dataclass(frozen=True)
class ProgramBatch:
    """All valid programs of one bit length (optionally one prefix class)."""

    length: int
    ops: np.ndarray  # (P, W) int8, HALT-padded
    args: np.ndarray  # (P, W) int8
    n_instr: np.ndarray  # (P,) int64
    codes: np.ndarray  # (P,) uint64, program bits as an integer

    def __len__(self) -> int:
        return self.codes.shape[0]

    def program(self, k: int) -> Program:
        n = int(self.n_instr[k])
        ops = self.ops[k, :n].tolist()
        args = self.args[k, :n].tolist()
        return Program(tuple(Instr(OPS_BY_CODE[o], a) for o, a in zip(ops, args)))

    def bits(self, k: int) -> str:
        return format(int(self.codes[k]), f"0{self.length}b")


@functools.lru_cache(maxsize=None)
def _prefix_runs(nbits: int, width: int):
    """Every HALT-free instruction run of exactly ``nbits`` bits, unsorted."""
    if nbits < 0:
        return None
    if nbits == 0:
        return (
            np.zeros((1, width), dtype=np.int8),
            np.zeros((1, width), dtype=np.int8),
            np.zeros(1, dtype=np.int64),
            np.zeros(1, dtype=np.uint64),
        )
    parts = []
    for step, variants in ((OPCODE_BITS, [(int(o), 0) for o in _SIMPLE_OPS]),
                           (JZ_BITS, [(int(Op.JZ), off) for off in _JZ_OFFSETS])):
        base = _prefix_runs(nbits - step, width)
        if base is None or base[0].shape[0] == 0:
            continue
        bops, bargs, bn, bcode = base
        k = bn.shape[0]
        rows = np.arange(k)
        for op, off in variants:
            ops = bops.copy()
            args = bargs.copy()
            ops[rows, bn] = op
            args[rows, bn] = off
            word = (op << OPERAND_BITS) | (off & 0xF) if op == Op.JZ else op
            code = (bcode << np.uint64(step)) | np.uint64(word)
            parts.append((ops, args, bn + 1, code))
    if not parts:
        empty = np.zeros((0, width), dtype=np.int8)
        return (empty, empty.copy(), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.uint64))
    out = tuple(np.concatenate([p[i] for p in parts]) for i in range(4))
    for arr in out:
        arr.setflags(write=False)
    return out


def _batch_of_length(length: int) -> ProgramBatch:
    width = length // OPCODE_BITS
    run = _prefix_runs(length - OPCODE_BITS, width)
    ops, args, n, code = run
    code = code << np.uint64(OPCODE_BITS)  # append HALT = 000
    order = np.argsort(code, kind="stable")
    ops = ops[order]
    ops[np.arange(ops.shape[0]), n[order]] = int(Op.HALT)
    return ProgramBatch(length, ops, args[order], n[order] + 1, code[order])


def count_valid(length: int) -> int:
    """Number of valid programs of exactly ``length`` bits (a recurrence)."""
    runs = [0] * (max(length, 0) + 1)
    if length < OPCODE_BITS:
        return 0
    runs[0] = 1
    for k in range(1, length - OPCODE_BITS + 1):
        runs[k] = len(_SIMPLE_OPS) * (runs[k - 3] if k >= 3 else 0) + len(_JZ_OFFSETS) * (
            runs[k - JZ_BITS] if k >= JZ_BITS else 0
        )
    return runs[length - OPCODE_BITS]


def _select_prefix(batch: ProgramBatch, prefix: str) -> ProgramBatch:
    """Keep programs whose bits, zero-padded to ``len(prefix)``, start with ``prefix``."""
    k = len(prefix)
    want = np.uint64(int(prefix, 2))
    if batch.length >= k:
        key = batch.codes >> np.uint64(batch.length - k)
    else:
        key = batch.codes << np.uint64(k - batch.length)
    sel = key == want
    return ProgramBatch(batch.length, batch.ops[sel], batch.args[sel], batch.n_instr[sel], batch.codes[sel])


def program_batches(max_bits: int, prefix: str = "") -> Iterator[ProgramBatch]:
    """Yield one batch per length ``3..max_bits``, in increasing length order."""
    _check_depth(max_bits)
    for length in range(OPCODE_BITS, max_bits + 1):
        if count_valid(length) == 0:
            continue
        batch = _batch_of_length(length)
        if prefix:
            batch = _select_prefix(batch, prefix)
        if len(batch):
            yield batch


def enumerate_valid(max_bits: int) -> Iterator[Program]:
    """Every valid program of at most ``max_bits`` bits, shortest first."""
    for batch in program_batches(max_bits):
        for k in range(len(batch)):
            yield batch.program(k)


def partition_prefixes(prefix_bits: int) -> list[str]:
    """The ``2**prefix_bits`` prefix classes that split the enumeration space."""
    if prefix_bits < 0:
        raise ValueError("prefix_bits must be >= 0")
    if prefix_bits == 0:
        return [""]
    return [format(v, f"0{prefix_bits}b") for v in range(2**prefix_bits)]


@dataclass(frozen=True)
class MassEstimate:
    """Depth-``depth_bits`` lower bound on the algorithmic probability of ``target``."""

    target: str
    depth_bits: int
    mass: Fraction
    generator_count: int
    shortest: Program | None


@dataclass(frozen=True)
class CompressionResult:
    target: str
    program: Program
    entropy_bits: int


@dataclass(frozen=True)
class KraftReport:
    depth_bits: int
    total_mass: Fraction
    halting_count: int
    program_count: int


@dataclass(frozen=True)
class _Partial:
    mass: Fraction
    count: int
    best: tuple[int, int] | None  # (length, code) of the first generator
    best_program: Program | None


def _scan_target(target: str, max_bits: int, limit: EvalLimit, prefix: str, backend: str | None) -> _Partial:
    symbols = target_symbols(target)
    mass = Fraction(0)
    count = 0
    best = None
    best_program = None
    for batch in program_batches(max_bits, prefix):
        _, matched, _ = run_batch(batch.ops, batch.args, batch.n_instr, limit.max_steps, symbols, backend)
        hits = int(np.count_nonzero(matched))
        if not hits:
            continue
        count += hits
        mass += Fraction(hits, 2**batch.length)
        if best is None:
            # batches arrive sorted by length then code
            k = int(np.flatnonzero(matched)[0])
            best = (batch.length, int(batch.codes[k]))
            best_program = batch.program(k)
    return _Partial(mass, count, best, best_program)


def _map_partitions(fn, prefixes: list[str], workers: int):
    if workers <= 1 or len(prefixes) == 1:
        return [fn(p) for p in prefixes]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, prefixes))


def estimate_probability(
    target: str,
    max_bits: int,
    limit: EvalLimit = EvalLimit(),
    *,
    workers: int = 1,
    prefix_bits: int = 0,
    backend: str | None = None,
) -> MassEstimate:
    """Sum ``2**-|g|`` over valid programs ``g`` of at most ``max_bits`` bits
    that halt with raw output exactly ``target``.

    The space may be split into ``2**prefix_bits`` prefix classes scanned by
    ``workers`` threads; the merged result does not depend on either.
    """
    _check_depth(max_bits)
    target_symbols(target)  # validate early
    parts = _map_partitions(
        lambda p: _scan_target(target, max_bits, limit, p, backend),
        partition_prefixes(prefix_bits),
        workers,
    )
    mass = sum((p.mass for p in parts), Fraction(0))
    count = sum(p.count for p in parts)
    found = [p for p in parts if p.best is not None]
    shortest = min(found, key=lambda p: p.best).best_program if found else None
    return MassEstimate(target, max_bits, mass, count, shortest)


def optimal_compression(
    target: str, max_bits: int, limit: EvalLimit = EvalLimit(), *, backend: str | None = None
) -> CompressionResult | None:
    """Shortest (then lexicographically least) program printing ``target``,
    or ``None`` if there is none within ``max_bits``."""
    _check_depth(max_bits)
    symbols = target_symbols(target)
    for batch in program_batches(max_bits):
        _, matched, _ = run_batch(batch.ops, batch.args, batch.n_instr, limit.max_steps, symbols, backend)
        hits = np.flatnonzero(matched)
        if hits.size:
            return CompressionResult(target, batch.program(int(hits[0])), batch.length)
    return None


def kraft_report(
    max_bits: int,
    limit: EvalLimit = EvalLimit(),
    *,
    workers: int = 1,
    prefix_bits: int = 0,
    backend: str | None = None,
) -> KraftReport:
    """Total ``2**-|g|`` over all halting valid programs up to ``max_bits``."""
    _check_depth(max_bits)

    def scan(prefix):
        total, halting, seen = Fraction(0), 0, 0
        for batch in program_batches(max_bits, prefix):
            status, _, _ = run_batch(batch.ops, batch.args, batch.n_instr, limit.max_steps, None, backend)
            h = int(np.count_nonzero(status == HALTED))
            total += Fraction(h, 2**batch.length)
            halting += h
            seen += len(batch)
        return total, halting, seen

    parts = _map_partitions(scan, partition_prefixes(prefix_bits), workers)
    return KraftReport(
        max_bits,
        sum((p[0] for p in parts), Fraction(0)),
        sum(p[1] for p in parts),
        sum(p[2] for p in parts),
    )
