"""Batch evaluation of many programs at once.

A batch is three arrays: ``ops`` and ``args`` of shape ``(P, W)`` (int8,
one row per program, padded past the final HALT) and ``n_instr`` of shape
``(P,)``. Output matching against a target symbol sequence is done while
running, so no output buffers are kept. Symbols: 0, 1, and 2 for the
record separator.

Two implementations with identical results: a numba scalar loop and a
numpy lockstep interpreter that advances every live program one step per
iteration.
"""

from __future__ import annotations

import numpy as np

from ._accel import default_backend, njit
from .mlang import SEP

HALTED, DIVERGED, RUNTIME_ERROR = 0, 1, 2

OP_HALT, OP_INC, OP_DEC, OP_SWAP, OP_OUT0, OP_OUT1, OP_SEP, OP_JZ = range(8)

_SYMBOL_CODE = {"0": 0, "1": 1, SEP: 2}


def target_symbols(raw_output: str) -> np.ndarray:
    """Encode a raw output string (``0``, ``1``, ``|``) as a symbol array."""
    try:
        return np.array([_SYMBOL_CODE[c] for c in raw_output], dtype=np.int8)
    except KeyError as exc:
        raise ValueError(f"output symbol {exc.args[0]!r} not in {{0, 1, {SEP}}}") from None


@njit
def _run_batch_numba(ops, args, n_instr, max_steps, target, status, matched, steps):
    tlen = target.shape[0]
    for p in range(ops.shape[0]):
        n = n_instr[p]
        a = 0
        b = 0
        pc = 0
        opos = 0
        ok = True
        st = DIVERGED
        used = max_steps
        for step in range(1, max_steps + 1):
            op = ops[p, pc]
            if op == OP_HALT:
                st = HALTED
                used = step
                break
            elif op == OP_INC:
                a += 1
            elif op == OP_DEC:
                if a > 0:
                    a -= 1
            elif op == OP_SWAP:
                t = a
                a = b
                b = t
            elif op == OP_JZ:
                if a == 0:
                    dest = pc + 1 + args[p, pc]
                    if dest < 0 or dest >= n:
                        st = RUNTIME_ERROR
                        used = step
                        break
                    pc = dest
                    continue
            else:
                if ok:
                    if opos >= tlen or target[opos] != op - OP_OUT0:
                        ok = False
                opos += 1
            pc += 1
        status[p] = st
        steps[p] = used
        matched[p] = st == HALTED and ok and opos == tlen


def _run_batch_numpy(ops, args, n_instr, max_steps, target, status, matched, steps):
    tlen = target.shape[0]
    # sentinel -1 never equals an emitted symbol
    tpad = np.concatenate([target.astype(np.int64), np.array([-1], dtype=np.int64)])
    status[:] = DIVERGED
    steps[:] = max_steps
    matched[:] = False

    rows = np.arange(ops.shape[0])
    pc = np.zeros(rows.size, dtype=np.int64)
    a = np.zeros(rows.size, dtype=np.int64)
    b = np.zeros(rows.size, dtype=np.int64)
    opos = np.zeros(rows.size, dtype=np.int64)
    ok = np.ones(rows.size, dtype=bool)
    nmax = n_instr.astype(np.int64)
    # Brent-style snapshots: a repeated (pc, a, b) state can never halt
    snap_pc, snap_a, snap_b = pc - 1, a.copy(), b.copy()
    next_snap = 1

    for step in range(1, max_steps + 1):
        if rows.size == 0:
            break
        op = ops[rows, pc]
        arg = args[rows, pc].astype(np.int64)

        a = a + (op == OP_INC)
        a = np.where((op == OP_DEC) & (a > 0), a - 1, a)
        sw = op == OP_SWAP
        a, b = np.where(sw, b, a), np.where(sw, a, b)

        emit = (op >= OP_OUT0) & (op <= OP_SEP)
        expected = tpad[np.minimum(opos, tlen)]
        ok &= ~emit | (expected == op.astype(np.int64) - OP_OUT0)
        opos = opos + emit

        jump = (op == OP_JZ) & (a == 0)
        dest = np.where(jump, pc + 1 + arg, pc + 1)
        err = jump & ((dest < 0) | (dest >= nmax[rows]))
        halt = op == OP_HALT
        looping = (dest == snap_pc) & (a == snap_a) & (b == snap_b) & ~halt & ~err
        done = halt | err

        if done.any():
            fin = rows[done]
            status[fin] = np.where(halt[done], HALTED, RUNTIME_ERROR)
            steps[fin] = step
            matched[fin] = halt[done] & ok[done] & (opos[done] == tlen)
        # looping rows keep the DIVERGED defaults
        gone = done | looping
        if gone.any():
            keep = ~gone
            rows, dest, a, b, opos, ok = rows[keep], dest[keep], a[keep], b[keep], opos[keep], ok[keep]
            snap_pc, snap_a, snap_b = snap_pc[keep], snap_a[keep], snap_b[keep]
        pc = dest
        if step == next_snap:
            snap_pc, snap_a, snap_b = pc.copy(), a.copy(), b.copy()
            next_snap *= 2


def run_batch(ops, args, n_instr, max_steps: int, target=None, backend: str | None = None):
    """Evaluate every program in the batch.

    Returns ``(status, matched, steps)``; ``matched[p]`` is true when program
    ``p`` halted with raw output equal to ``target``.
    """
    backend = backend or default_backend()
    if target is None:
        target = np.zeros(0, dtype=np.int8)
    ops = np.ascontiguousarray(ops, dtype=np.int8)
    args = np.ascontiguousarray(args, dtype=np.int8)
    n_instr = np.ascontiguousarray(n_instr, dtype=np.int64)
    target = np.ascontiguousarray(target, dtype=np.int8)
    count = ops.shape[0]
    status = np.empty(count, dtype=np.int8)
    matched = np.empty(count, dtype=np.bool_)
    steps = np.empty(count, dtype=np.int64)
    if backend == "numba":
        _run_batch_numba(ops, args, n_instr, int(max_steps), target, status, matched, steps)
    elif backend == "numpy":
        _run_batch_numpy(ops, args, n_instr, int(max_steps), target, status, matched, steps)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return status, matched, steps
