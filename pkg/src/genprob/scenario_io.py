"""Scenario file parsing and report rendering.

Scenario files are line oriented; ``#`` starts a comment and tokens are
separated by whitespace::

    format 1                      # optional; only version 1 exists
    scenario <id>
    prestates <label> [<label> ...]
    situation <id> [bits <int>] [program "<mnemonics>"]
      result <id> prestate <label>
    outcome <id> = <result-id> [<result-id> ...]

Situations with ``bits`` (or with neither keyword) are declared. Situations
with ``program`` are enumerated: the program is run, record 0 of its output
names the prestate, every later record is one result, and the entropy is the
length of the shortest program printing the same output. ``result`` lines
under a program situation are optional and rename the results in order;
unnamed results get ids ``<situation>.<k>``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .calculus import (
    DEFAULT_ENTROPY,
    OutcomeTable,
    ResultRef,
    Scenario,
    Situation,
    scenario_warnings,
    validate_scenario,
)
from .enumerator import optimal_compression
from .mlang import EvalLimit, Status, evaluate, parse_program

__all__ = [
    "FORMAT_VERSION",
    "Diagnostic",
    "ScenarioDocument",
    "parse_scenario",
    "render_scenario",
    "render_report",
    "fraction_text",
]

FORMAT_VERSION = 1
KEYWORDS = ("format", "scenario", "prestates", "situation", "result", "outcome")


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


@dataclass
class ScenarioDocument:
    source: str
    scenario: Scenario | None
    mode: str | None  # "declared" | "enumerated"
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]

    @property
    def ok(self) -> bool:
        return self.scenario is not None and not self.errors


@dataclass
class _Tok:
    text: str
    col: int
    quoted: bool = False


_TOKEN = re.compile(r'"([^"]*)"|("[^"]*$)|(#.*$)|([^\s"#]+)')


def _tokenize(line: str, lineno: int, diags: list[Diagnostic]) -> list[_Tok]:
    toks = []
    for m in _TOKEN.finditer(line):
        col = m.start() + 1
        if m.group(3) is not None:
            break
        if m.group(2) is not None:
            diags.append(Diagnostic(lineno, col, "unterminated string"))
            break
        if m.group(1) is not None:
            toks.append(_Tok(m.group(1), col, True))
        else:
            toks.append(_Tok(m.group(4), col))
    return toks


@dataclass
class _SitDraft:
    tok: _Tok
    line: int
    bits: tuple[int, _Tok] | None = None
    program: _Tok | None = None
    results: list[tuple[_Tok, _Tok | None, int]] = field(default_factory=list)


class _Parser:
    def __init__(self, text: str, limit: EvalLimit):
        self.text = text
        self.limit = limit
        self.diags: list[Diagnostic] = []
        self.header: tuple[_Tok, int] | None = None
        self.prestates: list[tuple[_Tok, int]] = []
        self.situations: list[_SitDraft] = []
        self.outcomes: list[tuple[_Tok, int, list[_Tok]]] = []
        self.where: dict[str, tuple[int, int]] = {}

    def error(self, line: int, col: int, msg: str, severity: str = "error"):
        self.diags.append(Diagnostic(line, col, msg, severity))

    def _int(self, tok: _Tok, line: int, what: str) -> int | None:
        try:
            return int(tok.text)
        except ValueError:
            self.error(line, tok.col, f"{what} must be an integer, got {tok.text!r}")
            return None

    def statements(self):
        seen_statement = False
        for lineno, line in enumerate(self.text.splitlines(), start=1):
            toks = _tokenize(line, lineno, self.diags)
            if not toks:
                continue
            head = toks[0]
            kw = head.text
            if kw not in KEYWORDS or head.quoted:
                self.error(lineno, head.col, f"unknown keyword {kw!r}")
                continue
            if kw == "format":
                if seen_statement:
                    self.error(lineno, head.col, "format line must come first")
                elif len(toks) != 2:
                    self.error(lineno, head.col, "expected: format <version>")
                else:
                    v = self._int(toks[1], lineno, "format version")
                    if v is not None and v != FORMAT_VERSION:
                        self.error(lineno, toks[1].col, f"unsupported format version {v}; expected {FORMAT_VERSION}")
                seen_statement = True
                continue
            seen_statement = True
            if kw == "scenario":
                if self.header is not None:
                    self.error(lineno, head.col, "duplicate scenario header")
                elif len(toks) != 2:
                    self.error(lineno, head.col, "expected: scenario <id>")
                else:
                    self.header = (toks[1], lineno)
                continue
            if self.header is None:
                self.error(lineno, head.col, "missing scenario header")
                # keep going so later lines are still checked
                self.header = (_Tok("", head.col), lineno)
            getattr(self, "_" + kw)(toks, lineno)
        if self.header is None:
            self.error(1, 1, "missing scenario header")

    def _prestates(self, toks, line):
        if len(toks) < 2:
            self.error(line, toks[0].col, "prestates needs at least one label")
        for t in toks[1:]:
            self.prestates.append((t, line))

    def _situation(self, toks, line):
        if len(toks) < 2:
            self.error(line, toks[0].col, "expected: situation <id> [bits <int>] [program \"...\"]")
            return
        draft = _SitDraft(toks[1], line)
        k = 2
        while k < len(toks):
            t = toks[k]
            if t.text == "bits" and not t.quoted:
                if k + 1 >= len(toks):
                    self.error(line, t.col, "bits needs an integer")
                    break
                v = self._int(toks[k + 1], line, "bits")
                if v is not None:
                    if v < 1:
                        self.error(line, toks[k + 1].col, "bits must be a positive integer")
                    draft.bits = (v, toks[k + 1])
                k += 2
            elif t.text == "program" and not t.quoted:
                if k + 1 >= len(toks) or not toks[k + 1].quoted:
                    self.error(line, t.col, 'program needs a quoted program text')
                    break
                draft.program = toks[k + 1]
                k += 2
            else:
                self.error(line, t.col, f"unexpected {t.text!r} in situation line")
                k += 1
        if draft.bits is not None and draft.program is not None:
            self.error(line, draft.program.col, "a situation cannot have both bits and program")
        self.situations.append(draft)

    def _result(self, toks, line):
        if not self.situations:
            self.error(line, toks[0].col, "result outside a situation")
            return
        if len(toks) == 2:
            self.situations[-1].results.append((toks[1], None, line))
        elif len(toks) == 4 and toks[2].text == "prestate":
            self.situations[-1].results.append((toks[1], toks[3], line))
        else:
            self.error(line, toks[0].col, "expected: result <id> prestate <label>")

    def _outcome(self, toks, line):
        if len(toks) < 4 or toks[2].text != "=":
            self.error(line, toks[0].col, "expected: outcome <id> = <result-id> [...]")
            return
        self.outcomes.append((toks[1], line, toks[3:]))

    def _mode(self) -> str:
        enumerated = [s for s in self.situations if s.program is not None]
        declared = [s for s in self.situations if s.program is None]
        if enumerated and declared:
            first = enumerated[0] if self.situations[0].program is None else declared[0]
            self.error(first.line, first.tok.col, "cannot mix declared and program situations in one file")
        return "enumerated" if enumerated and not declared else "declared"

    def _declared(self, draft: _SitDraft, uniform: bool) -> Situation:
        if draft.bits is None:
            if not uniform:
                self.error(draft.line, draft.tok.col, f"situation {draft.tok.text!r} needs bits (other situations declare them)")
            entropy = DEFAULT_ENTROPY
        else:
            entropy = draft.bits[0]
        results = []
        for rid, pre, line in draft.results:
            if pre is None:
                self.error(line, rid.col, "expected: result <id> prestate <label>")
                continue
            results.append(ResultRef(rid.text, pre.text))
            self.where.setdefault(rid.text, (line, rid.col))
        return Situation(draft.tok.text, entropy, tuple(results))

    def _enumerated(self, draft: _SitDraft) -> Situation | None:
        ptok = draft.program
        try:
            program = parse_program(ptok.text)
        except ValueError as exc:
            self.error(draft.line, ptok.col, f"bad program: {exc}")
            return None
        run = evaluate(program, self.limit)
        if run is Status.DIVERGED:
            self.error(draft.line, ptok.col, f"program did not halt within {self.limit.max_steps} steps")
            return None
        if run is Status.RUNTIME_ERROR:
            self.error(draft.line, ptok.col, "program jumped out of range")
            return None
        if not run.records:
            self.error(draft.line, ptok.col, "program output has no prestate record")
            return None
        prestate, labels = run.records[0], run.results
        if not labels:
            self.error(draft.line, ptok.col, "program output has no result records")
            return None
        names = [f"{draft.tok.text}.{k}" for k in range(1, len(labels) + 1)]
        positions = [(draft.line, ptok.col)] * len(labels)
        if draft.results:
            if len(draft.results) != len(labels):
                self.error(draft.results[0][2], draft.results[0][0].col,
                           f"{len(draft.results)} result lines but the program produces {len(labels)} results")
            for k, (rid, pre, line) in enumerate(draft.results[: len(labels)]):
                names[k] = rid.text
                positions[k] = (line, rid.col)
                if pre is not None and pre.text != prestate:
                    self.error(line, pre.col, f"prestate {pre.text!r} does not match program record {prestate!r}")
        for name, pos in zip(names, positions):
            self.where.setdefault(name, pos)
        comp = optimal_compression(run.raw_output, program.length_bits, self.limit)
        return Situation(draft.tok.text, comp.entropy_bits, tuple(ResultRef(n, prestate) for n in names), program)

    def build(self) -> tuple[Scenario | None, str | None]:
        if self.header is None:
            return None, None
        mode = self._mode()
        uniform = all(s.bits is None for s in self.situations)
        sits = []
        # a failed program situation would make validation report its
        # missing results as well
        complete = True
        for draft in self.situations:
            self.where.setdefault(draft.tok.text, (draft.line, draft.tok.col))
            sit = self._enumerated(draft) if draft.program is not None else self._declared(draft, uniform)
            if sit is None:
                complete = False
            else:
                sits.append(sit)
        for tok, line in self.prestates:
            self.where.setdefault(tok.text, (line, tok.col))
        outcomes = []
        for tok, line, members in self.outcomes:
            self.where.setdefault(tok.text, (line, tok.col))
            outcomes.append((tok.text, tuple(t.text for t in members)))
        scenario = Scenario(
            self.header[0].text,
            tuple(t.text for t, _ in self.prestates),
            tuple(sits),
            tuple(outcomes),
        )
        head_pos = (self.header[1], self.header[0].col)
        if complete:
            for v in validate_scenario(scenario):
                line, col = self.where.get(v.subject, head_pos)
                self.error(line, col, f"{v.code}: {v.message}")
            if not self.errors_so_far():
                for msg in scenario_warnings(scenario):
                    self.error(head_pos[0], head_pos[1], msg, "warning")
        return scenario, mode

    def errors_so_far(self) -> bool:
        return any(d.severity == "error" for d in self.diags)


def parse_scenario(text: str, limit: EvalLimit = EvalLimit()) -> ScenarioDocument:
    """Parse scenario source. Problems are returned as diagnostics, never raised."""
    p = _Parser(text, limit)
    p.statements()
    scenario, mode = p.build()
    diags = sorted(p.diags, key=lambda d: (d.line, d.column))
    if any(d.severity == "error" for d in diags):
        scenario = None
    return ScenarioDocument(text, scenario, mode, diags)


def render_scenario(s: Scenario) -> str:
    """Canonical source text for ``s``; parsing it gives back an equal scenario."""
    lines = [f"format {FORMAT_VERSION}", f"scenario {s.id}", "prestates " + " ".join(s.prestates)]
    for sit in s.situations:
        if sit.program is not None:
            lines.append(f'situation {sit.id} program "{sit.program}"')
        else:
            if sit.entropy_bits.denominator != 1:
                raise ValueError(f"situation {sit.id!r}: file format only holds integer bits")
            lines.append(f"situation {sit.id} bits {sit.entropy_bits.numerator}")
        for r in sit.results:
            lines.append(f"  result {r.id} prestate {r.prestate}")
    for oid, rids in s.outcomes:
        lines.append(f"outcome {oid} = " + " ".join(rids))
    return "\n".join(lines) + "\n"


def fraction_text(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _frac_obj(q: Fraction | None):
    return None if q is None else {"num": q.numerator, "den": q.denominator}


def _aligned(rows: list[list[str]], indent: str = "  ") -> list[str]:
    widths = [max(len(r[k]) for r in rows) for k in range(len(rows[0]))]
    return [indent + "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]


def _result_rows(table: OutcomeTable):
    for (rid, sid), p_sit in table.result_given_situation.items():
        yield rid, table.result_outcome[rid], table.result_given_outcome.get(rid), sid, p_sit


def render_report(table: OutcomeTable, format: str = "table", decimals: bool = False) -> str:
    """Render an outcome table.

    ``table`` gives aligned columns with exact fractions (optionally a
    decimal column), ``machine`` a JSON document described in
    docs/machine-format.md.
    """
    if format == "machine":
        doc = {
            "format": FORMAT_VERSION,
            "scenario": table.scenario_id,
            "Z": _frac_obj(table.Z),
            "outcomes": [
                {
                    "id": oid,
                    "probability": _frac_obj(p),
                    "branch_factor": _frac_obj(table.branch_factors[oid]),
                    "n_compression": table.n_compression[oid],
                    "n_generators": table.n_generators[oid],
                    "compression_situation": table.compression_situation[oid],
                }
                for oid, p in table.outcome_probs.items()
            ],
            "results": [
                {
                    "id": rid,
                    "outcome": oid,
                    "situation": sid,
                    "given_outcome": _frac_obj(p_o),
                    "given_situation": _frac_obj(p_s),
                }
                for rid, oid, p_o, sid, p_s in _result_rows(table)
            ],
        }
        return json.dumps(doc, indent=2) + "\n"
    if format != "table":
        raise ValueError(f"unknown report format {format!r}")

    def cells(q: Fraction | None) -> list[str]:
        if q is None:
            return ["-", "-"] if decimals else ["-"]
        return [fraction_text(q), f"{float(q):.6f}"] if decimals else [fraction_text(q)]

    p_head = ["probability", "~probability"] if decimals else ["probability"]
    out = [f"scenario {table.scenario_id}", "outcomes"]
    rows = [["outcome", *p_head, "branch", "compression", "generators", "situation"]]
    for oid, p in table.outcome_probs.items():
        rows.append([
            oid, *cells(p), fraction_text(table.branch_factors[oid]),
            str(table.n_compression[oid]), str(table.n_generators[oid]),
            table.compression_situation[oid],
        ])
    out += _aligned(rows)
    out.append("results")
    po_head = ["given_outcome", "~given_outcome"] if decimals else ["given_outcome"]
    rows = [["result", "outcome", *po_head, "situation", "given_situation"]]
    for rid, oid, p_o, sid, p_s in _result_rows(table):
        rows.append([rid, oid, *cells(p_o), sid, fraction_text(p_s)])
    out += _aligned(rows)
    out.append(f"Z {fraction_text(table.Z)}")
    return "\n".join(out) + "\n"
