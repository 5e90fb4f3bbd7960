"""Exact scenario calculus over situations, results and outcomes.

A scenario lists situations (model-programs), each with an entropy in bits
and the results it generates; every result continues one of the
indistinguishable pre-observation states. Results are grouped into declared
outcome classes. Outcome weight is ``B(o) * 2**-H(o)``, normalized over all
outcomes; an outcome's probability is then split evenly among the results
its compression situation generates.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .mlang import Program

__all__ = [
    "DEFAULT_ENTROPY",
    "ResultRef",
    "Situation",
    "Scenario",
    "Violation",
    "Outcome",
    "OutcomeTable",
    "ScenarioError",
    "MixedOutcomeWarning",
    "validate_scenario",
    "scenario_warnings",
    "resolve_outcomes",
    "situation_result_probability",
    "outcome_probabilities",
    "monte_carlo_check",
]

# used when a scenario declares no entropies at all; any common value gives
# the same table
DEFAULT_ENTROPY = 3


class ScenarioError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


class MixedOutcomeWarning(UserWarning):
    """An outcome has results in more than one situation."""


@dataclass(frozen=True)
class ResultRef:
    id: str
    prestate: str


@dataclass(frozen=True)
class Situation:
    id: str
    entropy_bits: Fraction
    results: tuple[ResultRef, ...]
    # set for situations read from a machine program
    program: Program | None = None

    def __post_init__(self):
        object.__setattr__(self, "entropy_bits", Fraction(self.entropy_bits))
        object.__setattr__(self, "results", tuple(self.results))

    @property
    def result_ids(self) -> tuple[str, ...]:
        return tuple(r.id for r in self.results)


@dataclass(frozen=True)
class Scenario:
    id: str
    prestates: tuple[str, ...]
    situations: tuple[Situation, ...]
    # declared outcome classes, in declaration order
    outcomes: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self):
        object.__setattr__(self, "prestates", tuple(self.prestates))
        object.__setattr__(self, "situations", tuple(self.situations))
        object.__setattr__(self, "outcomes", tuple((o, tuple(rs)) for o, rs in self.outcomes))

    def situation(self, sid: str) -> Situation:
        for s in self.situations:
            if s.id == sid:
                return s
        raise KeyError(sid)

    def all_results(self) -> list[tuple[Situation, ResultRef]]:
        return [(s, r) for s in self.situations for r in s.results]

    def with_offset(self, c: int) -> Scenario:
        """Same scenario with ``c`` added to every situation's entropy."""
        sits = tuple(
            Situation(s.id, s.entropy_bits + c, s.results, s.program) for s in self.situations
        )
        return Scenario(self.id, self.prestates, sits, self.outcomes)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    subject: str = ""


def validate_scenario(s: Scenario) -> list[Violation]:
    """All structural problems in ``s``; an empty list means it is valid."""
    out: list[Violation] = []

    def dupes(kind: str, ids):
        for name, n in Counter(ids).items():
            if n > 1:
                out.append(Violation("DUPLICATE_ID", f"{kind} id {name!r} used {n} times", name))

    if not s.prestates:
        out.append(Violation("EMPTY_PRESTATES", "scenario declares no prestates"))
    if not s.situations:
        out.append(Violation("NO_SITUATIONS", "scenario has no situations"))
    dupes("prestate", s.prestates)
    dupes("situation", [x.id for x in s.situations])
    dupes("outcome", [o for o, _ in s.outcomes])
    dupes("result", [r.id for _, r in s.all_results()])

    known = set(s.prestates)
    for sit in s.situations:
        if not sit.results:
            out.append(Violation("EMPTY_RESULTS", f"situation {sit.id!r} generates no results", sit.id))
        if sit.entropy_bits <= 0:
            out.append(Violation("NON_POSITIVE_ENTROPY", f"situation {sit.id!r} has entropy {sit.entropy_bits}", sit.id))
        for r in sit.results:
            if r.prestate not in known:
                out.append(Violation("UNKNOWN_PRESTATE", f"result {r.id!r} continues unknown prestate {r.prestate!r}", r.id))

    all_ids = {r.id for _, r in s.all_results()}
    membership: Counter[str] = Counter()
    for oid, rids in s.outcomes:
        if not rids:
            out.append(Violation("EMPTY_OUTCOME", f"outcome {oid!r} has no results", oid))
        for rid in rids:
            if rid not in all_ids:
                out.append(Violation("UNKNOWN_RESULT", f"outcome {oid!r} names unknown result {rid!r}", oid))
            membership[rid] += 1
    for rid in sorted(all_ids):
        if membership[rid] == 0:
            out.append(Violation("NON_TOTAL_PARTITION", f"result {rid!r} belongs to no outcome", rid))
        elif membership[rid] > 1:
            out.append(Violation("OVERLAPPING_PARTITION", f"result {rid!r} belongs to {membership[rid]} outcomes", rid))
    return out


def _require_valid(s: Scenario) -> None:
    problems = validate_scenario(s)
    if problems:
        raise ScenarioError(problems[0].code, "; ".join(v.message for v in problems))


def scenario_warnings(s: Scenario) -> list[str]:
    where = {r.id: sit.id for sit, r in s.all_results()}
    msgs = []
    for oid, rids in s.outcomes:
        sits = sorted({where[r] for r in rids if r in where})
        if len(sits) > 1:
            msgs.append(
                f"outcome {oid!r} spans situations {', '.join(sits)}; "
                "only its minimal-entropy situation contributes to the outcome"
            )
    return msgs


@dataclass(frozen=True)
class Outcome:
    id: str
    results: tuple[ResultRef, ...]
    compression_situation: str
    entropy_bits: Fraction
    n_compression: int
    n_generators: int

    @property
    def branch_factor(self) -> Fraction:
        return Fraction(self.n_compression, self.n_generators)

    @property
    def compression_results(self) -> tuple[ResultRef, ...]:
        return self.results[: self.n_compression]


def resolve_outcomes(s: Scenario) -> list[Outcome]:
    """Pick each outcome's compression situation and count its results.

    The compression situation is the lowest-entropy situation generating a
    result of the class (ties go to the lowest situation id). The outcome's
    ``results`` list the compression results first.
    """
    _require_valid(s)
    for msg in scenario_warnings(s):
        warnings.warn(msg, MixedOutcomeWarning, stacklevel=2)
    owner = {r.id: (sit, r) for sit, r in s.all_results()}
    out = []
    for oid, rids in s.outcomes:
        members = [owner[r] for r in rids]
        comp = min({sit.id: sit for sit, _ in members}.values(), key=lambda x: (x.entropy_bits, x.id))
        inside = [r for sit, r in members if sit.id == comp.id]
        outside = [r for sit, r in members if sit.id != comp.id]
        out.append(
            Outcome(
                id=oid,
                results=tuple(inside + outside),
                compression_situation=comp.id,
                entropy_bits=comp.entropy_bits,
                n_compression=len(inside),
                n_generators=len({r.prestate for r in inside}),
            )
        )
    return out


def situation_result_probability(r: ResultRef | str, sit: Situation) -> Fraction:
    """Indifference within one situation: ``1 / |R(sit)|``."""
    rid = r if isinstance(r, str) else r.id
    if rid not in sit.result_ids:
        raise ScenarioError("RESULT_NOT_IN_SITUATION", f"{rid!r} is not generated by situation {sit.id!r}")
    return Fraction(1, len(sit.results))


def _dyadic(h: Fraction) -> Fraction:
    if h.denominator != 1:
        raise ScenarioError("NON_INTEGRAL_ENTROPY", f"entropy {h} bits is not an integer; 2**-H would be irrational")
    return Fraction(1, 2 ** int(h))


@dataclass(frozen=True)
class OutcomeTable:
    """Exact probabilities for one scenario.

    ``Z`` is the normalizer of the weights ``B(o) * 2**(h_min - H(o))``,
    where ``h_min`` is the smallest outcome entropy. Measuring entropies from
    ``h_min`` keeps the whole table unchanged when every entropy shifts by
    the same amount; the unshifted normalizer is ``Z * 2**-h_min``.
    """

    scenario_id: str
    Z: Fraction
    outcome_probs: Mapping[str, Fraction]
    result_given_outcome: Mapping[str, Fraction]
    result_given_situation: Mapping[tuple[str, str], Fraction]
    branch_factors: Mapping[str, Fraction]
    n_compression: Mapping[str, int]
    n_generators: Mapping[str, int]
    compression_situation: Mapping[str, str]
    result_outcome: Mapping[str, str]


def outcome_probabilities(s: Scenario) -> OutcomeTable:
    return _table(s, resolve_outcomes(s))


def _table(s: Scenario, outcomes: list[Outcome]) -> OutcomeTable:
    h_min = min(o.entropy_bits for o in outcomes)
    weights = {o.id: o.branch_factor * _dyadic(o.entropy_bits - h_min) for o in outcomes}
    for sit in s.situations:
        _dyadic(sit.entropy_bits)
    z = sum(weights.values(), Fraction(0))

    probs = {o.id: weights[o.id] / z for o in outcomes}
    given_outcome = {}
    result_outcome = {}
    for o in outcomes:
        for r in o.compression_results:
            given_outcome[r.id] = probs[o.id] / o.n_compression
        for r in o.results:
            result_outcome[r.id] = o.id
    given_situation = {
        (r.id, sit.id): situation_result_probability(r, sit) for sit, r in s.all_results()
    }
    return OutcomeTable(
        scenario_id=s.id,
        Z=z,
        outcome_probs=probs,
        result_given_outcome=given_outcome,
        result_given_situation=given_situation,
        branch_factors={o.id: o.branch_factor for o in outcomes},
        n_compression={o.id: o.n_compression for o in outcomes},
        n_generators={o.id: o.n_generators for o in outcomes},
        compression_situation={o.id: o.compression_situation for o in outcomes},
        result_outcome=result_outcome,
    )


def monte_carlo_check(s: Scenario, samples: int, seed: int) -> dict[str, float]:
    """Empirical result frequencies from sampling the generative process.

    Draw an outcome with probability ``B(o) 2**-H(o) / Z``, then one of its
    compression results uniformly. Results never drawn report 0.0.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    outcomes = resolve_outcomes(s)
    table = _table(s, outcomes)
    rng = np.random.default_rng(seed)
    p = np.array([float(table.outcome_probs[o.id]) for o in outcomes])
    picks = rng.choice(len(outcomes), size=samples, p=p / p.sum())
    sizes = np.array([o.n_compression for o in outcomes])
    within = np.floor(rng.random(samples) * sizes[picks]).astype(np.int64)

    freq = {r.id: 0.0 for _, r in s.all_results()}
    for k, o in enumerate(outcomes):
        counts = np.bincount(within[picks == k], minlength=o.n_compression)
        for r, c in zip(o.compression_results, counts):
            freq[r.id] = c / samples
    return freq
