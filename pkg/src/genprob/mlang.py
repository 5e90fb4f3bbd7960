"""Reference model language: a two-counter machine with bit output.

Programs are prefix-free bit strings. Each instruction is a 3-bit opcode;
``JZ`` carries a 4-bit two's complement offset. A program is valid when it
decodes cleanly and its only ``HALT`` is the last instruction.

Machine: counters ``A`` and ``B`` start at 0. ``DEC`` saturates at 0,
``SWAP`` exchanges the counters, ``JZ k`` jumps to ``next + k`` when
``A == 0``. Output symbols are ``0``, ``1`` and the record separator, which
is written ``|`` in raw output strings.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import NamedTuple, Union

__all__ = [
    "Op",
    "Instr",
    "Program",
    "Trace",
    "EvalLimit",
    "Status",
    "Invalid",
    "InvalidReason",
    "SEP",
    "DEFAULT_FUEL",
    "decode",
    "encode",
    "parse_program",
    "evaluate",
]

SEP = "|"
DEFAULT_FUEL = 10_000
OPCODE_BITS = 3
OPERAND_BITS = 4
JZ_MIN, JZ_MAX = -8, 7


class Op(enum.IntEnum):
    HALT = 0
    INC = 1
    DEC = 2
    SWAP = 3
    OUT0 = 4
    OUT1 = 5
    SEP = 6
    JZ = 7


OPS_BY_CODE = tuple(Op)

# output symbol emitted by each printing opcode
_EMIT = {Op.OUT0: "0", Op.OUT1: "1", Op.SEP: SEP}


class Instr(NamedTuple):
    op: Op
    offset: int = 0

    @property
    def bits(self) -> str:
        code = format(int(self.op), "03b")
        if self.op is Op.JZ:
            code += format(self.offset & 0xF, "04b")
        return code

    def __str__(self) -> str:
        if self.op is Op.JZ:
            return f"JZ {self.offset}"
        return self.op.name


class InvalidReason(enum.Enum):
    TRAILING_BITS = "TRAILING_BITS"
    NO_HALT = "NO_HALT"
    EARLY_HALT = "EARLY_HALT"
    TRUNCATED_OPERAND = "TRUNCATED_OPERAND"


@dataclass(frozen=True)
class Invalid:
    """Decode failure. ``position`` is the bit index where decoding stopped."""

    reason: InvalidReason
    position: int

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class Program:
    instructions: tuple[Instr, ...]

    def __post_init__(self):
        ins = self.instructions
        if not ins or ins[-1].op is not Op.HALT:
            raise ValueError("program must end with HALT")
        if any(i.op is Op.HALT for i in ins[:-1]):
            raise ValueError("HALT may only appear as the final instruction")
        for i in ins:
            if i.op is Op.JZ and not JZ_MIN <= i.offset <= JZ_MAX:
                raise ValueError(f"JZ offset {i.offset} outside {JZ_MIN}..{JZ_MAX}")

    @property
    def bits(self) -> str:
        return "".join(i.bits for i in self.instructions)

    @property
    def length_bits(self) -> int:
        return sum(OPCODE_BITS + (OPERAND_BITS if i.op is Op.JZ else 0) for i in self.instructions)

    def __len__(self) -> int:
        return self.length_bits

    def __str__(self) -> str:
        return " ".join(str(i) for i in self.instructions)

    @classmethod
    def from_bits(cls, bits: str) -> Program:
        p = decode(bits)
        if isinstance(p, Invalid):
            raise ValueError(f"invalid program bits {bits!r}: {p.reason.value} at bit {p.position}")
        return p


def encode(program: Program) -> str:
    return program.bits


def decode(bits: str) -> Program | Invalid:
    """Decode an ASCII ``0``/``1`` string. Never raises on bad input bits."""
    bits = "".join(bits.split())
    if set(bits) - {"0", "1"}:
        raise ValueError(f"bit string may only contain 0 and 1: {bits!r}")
    out: list[Instr] = []
    pos, n = 0, len(bits)
    while pos < n:
        if n - pos < OPCODE_BITS:
            return Invalid(InvalidReason.TRAILING_BITS, pos)
        op = OPS_BY_CODE[int(bits[pos : pos + OPCODE_BITS], 2)]
        pos += OPCODE_BITS
        if op is Op.JZ:
            if n - pos < OPERAND_BITS:
                return Invalid(InvalidReason.TRUNCATED_OPERAND, pos)
            raw = int(bits[pos : pos + OPERAND_BITS], 2)
            pos += OPERAND_BITS
            out.append(Instr(op, raw - 16 if raw >= 8 else raw))
            continue
        out.append(Instr(op))
        if op is Op.HALT:
            if pos != n:
                return Invalid(InvalidReason.EARLY_HALT, pos)
            return Program(tuple(out))
    return Invalid(InvalidReason.NO_HALT, pos)


_JZ_PAREN = re.compile(r"^JZ\(([+-]?\d+)\)$", re.IGNORECASE)


def parse_program(text: str) -> Program:
    """Read a program in mnemonic form (``OUT1 SEP OUT0 HALT``) or bit form.

    ``JZ`` takes a decimal offset either as the next token (``JZ -2``) or
    in parentheses (``JZ(+1)``).
    """
    stripped = "".join(text.split())
    if stripped and set(stripped) <= {"0", "1"}:
        return Program.from_bits(stripped)
    tokens = text.split()
    out: list[Instr] = []
    k = 0
    while k < len(tokens):
        tok = tokens[k]
        m = _JZ_PAREN.match(tok)
        if m:
            out.append(Instr(Op.JZ, int(m.group(1))))
            k += 1
            continue
        try:
            op = Op[tok.upper()]
        except KeyError:
            raise ValueError(f"unknown mnemonic {tok!r}") from None
        if op is Op.JZ:
            if k + 1 >= len(tokens):
                raise ValueError("JZ requires an offset")
            try:
                offset = int(tokens[k + 1])
            except ValueError:
                raise ValueError(f"bad JZ offset {tokens[k + 1]!r}") from None
            out.append(Instr(op, offset))
            k += 2
        else:
            out.append(Instr(op))
            k += 1
    return Program(tuple(out))


@dataclass(frozen=True)
class EvalLimit:
    max_steps: int = DEFAULT_FUEL

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


class Status(enum.Enum):
    HALTED = 0
    DIVERGED = 1
    RUNTIME_ERROR = 2


@dataclass(frozen=True)
class Trace:
    """Halted execution. ``steps`` counts executed instructions, HALT included."""

    raw_output: str
    steps: int
    records: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        recs = tuple(self.raw_output.split(SEP)) if self.raw_output else ()
        object.__setattr__(self, "records", recs)

    @property
    def prestate(self) -> str | None:
        return self.records[0] if self.records else None

    @property
    def results(self) -> tuple[str, ...]:
        return self.records[1:]


EvalResult = Union[Trace, Status]


def evaluate(program: Program, limit: EvalLimit = EvalLimit()) -> EvalResult:
    """Run ``program``; returns a :class:`Trace`, ``Status.DIVERGED`` or
    ``Status.RUNTIME_ERROR``.

    The program halts only if HALT is reached within ``limit.max_steps``
    executed instructions. A taken jump to an index outside
    ``0..len(instructions)-1`` is a runtime error.
    """
    ins = program.instructions
    n = len(ins)
    a = b = 0
    pc = 0
    out: list[str] = []
    for step in range(1, limit.max_steps + 1):
        op, offset = ins[pc]
        if op is Op.HALT:
            return Trace("".join(out), step)
        if op is Op.INC:
            a += 1
        elif op is Op.DEC:
            if a:
                a -= 1
        elif op is Op.SWAP:
            a, b = b, a
        elif op is Op.JZ:
            if a == 0:
                target = pc + 1 + offset
                if not 0 <= target < n:
                    return Status.RUNTIME_ERROR
                pc = target
                continue
        else:
            out.append(_EMIT[op])
        pc += 1
    return Status.DIVERGED
