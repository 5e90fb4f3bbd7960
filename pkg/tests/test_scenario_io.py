import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genprob.builtin import REPLICATOR, SLEEPING_BEAUTY, builtin_scenario
from genprob.calculus import ResultRef, Scenario, Situation, outcome_probabilities
from genprob.scenario_io import parse_scenario, render_report, render_scenario

ENUMERATED = '''\
scenario replicator-program
prestates 1
# prestate "1", then three copies: 0, 0, 1
situation s program "OUT1 SEP OUT0 SEP OUT0 SEP OUT1 HALT"
  result dead-1
  result dead-2 prestate 1
  result alive
outcome dead = dead-1 dead-2
outcome alive = alive
'''


def rows(text):
    return [" ".join(line.split()) for line in text.splitlines()]


def diag_set(text):
    return {(d.line, d.column, d.message.split(":")[0]) for d in parse_scenario(text).diagnostics}


def test_parse_replicator():
    doc = parse_scenario(REPLICATOR)
    assert doc.ok and doc.mode == "declared"
    s = doc.scenario
    assert s.prestates == ("m",)
    assert [(x.id, x.entropy_bits, len(x.results)) for x in s.situations] == [("s", 3, 3)]
    assert s.outcomes == (("cat-dead", ("cat-dead-1", "cat-dead-2")), ("cat-alive", ("cat-alive",)))
    t = outcome_probabilities(s)
    assert t.outcome_probs == {"cat-dead": F(2, 3), "cat-alive": F(1, 3)}


def test_parse_sleeping_beauty():
    doc = parse_scenario(SLEEPING_BEAUTY)
    assert doc.ok
    assert outcome_probabilities(doc.scenario).outcome_probs["H"] == F(1, 2)


def test_default_entropy_when_undeclared():
    doc = parse_scenario(REPLICATOR.replace(" bits 3", ""))
    assert doc.ok
    assert doc.scenario == builtin_scenario("replicator")


def test_enumerated_mode():
    doc = parse_scenario(ENUMERATED)
    assert doc.ok, doc.diagnostics
    assert doc.mode == "enumerated"
    (sit,) = doc.scenario.situations
    assert sit.entropy_bits == 24  # no shorter program prints 1|0|0|1
    assert {r.prestate for r in sit.results} == {"1"}
    t = outcome_probabilities(doc.scenario)
    assert t.outcome_probs == {"dead": F(2, 3), "alive": F(1, 3)}


def test_enumerated_default_result_ids():
    text = 'scenario x\nprestates 1\nsituation s program "OUT1 SEP OUT0 SEP OUT0 HALT"\noutcome o = s.1 s.2\n'
    doc = parse_scenario(text)
    assert doc.ok, doc.diagnostics
    assert doc.scenario.situations[0].result_ids == ("s.1", "s.2")
    assert doc.scenario.situations[0].entropy_bits == 18


@pytest.mark.parametrize(
    "program, message",
    [
        ("JZ -1 HALT", "program did not halt"),
        ("JZ 1 HALT", "program jumped out of range"),
        ("HALT", "program output has no prestate record"),
        ("OUT1 HALT", "program output has no result records"),
        ("OUT1 FOO HALT", "bad program"),
    ],
)
def test_enumerated_program_problems(program, message):
    text = f'scenario x\nprestates 1\nsituation s program "{program}"\noutcome o = s.1\n'
    doc = parse_scenario(text)
    assert not doc.ok
    assert any(d.message.startswith(message) and (d.line, d.column) == (3, 21) for d in doc.diagnostics)


def test_enumerated_prestate_mismatch():
    doc = parse_scenario(ENUMERATED.replace("prestates 1", "prestates 0"))
    assert (4, 1, "UNKNOWN_PRESTATE") not in diag_set(ENUMERATED)
    assert any("UNKNOWN_PRESTATE" in d.message for d in doc.diagnostics)
    doc = parse_scenario(ENUMERATED.replace("dead-2 prestate 1", "dead-2 prestate 0"))
    assert [(d.line, d.column) for d in doc.errors] == [(6, 26)]


def test_enumerated_result_count_mismatch():
    doc = parse_scenario(ENUMERATED.replace("  result alive\n", ""))
    assert any("2 result lines but the program produces 3" in d.message for d in doc.errors)


def test_empty_input():
    doc = parse_scenario("")
    assert not doc.ok and doc.scenario is None
    assert [(d.line, d.column, d.message) for d in doc.diagnostics] == [(1, 1, "missing scenario header")]


def test_positioned_diagnostics():
    text = (
        "# comment\n"
        "scenario x\n"
        "prestates m\n"
        "situaton s\n"
        "situation s bits three\n"
        "  result r prestate q\n"
        "outcome o = r zz\n"
    )
    got = diag_set(text)
    assert (4, 1, "unknown keyword 'situaton'") in got
    assert (5, 18, "bits must be an integer, got 'three'") in got
    assert (6, 10, "UNKNOWN_PRESTATE") in got
    assert (7, 9, "UNKNOWN_RESULT") in got


def test_duplicate_ids_positioned():
    text = REPLICATOR.replace("result cat-alive prestate m", "result cat-dead-1 prestate m")
    doc = parse_scenario(text)
    assert any("DUPLICATE_ID" in d.message and d.line == 6 for d in doc.errors)


def test_mode_mixing_and_partial_bits():
    text = 'scenario x\nprestates m 1\nsituation a bits 3\n  result r prestate m\nsituation b program "OUT1 SEP OUT0 HALT"\noutcome o = r b.1\n'
    assert (5, 11, "cannot mix declared and program situations in one file") in diag_set(text)
    text = "scenario x\nprestates m\nsituation a bits 3\n result r prestate m\nsituation b\n result q prestate m\noutcome o = r q\n"
    assert any(d[:2] == (5, 11) for d in diag_set(text))


def test_format_header():
    assert parse_scenario("format 1\n" + REPLICATOR.split("\n", 1)[1]).ok
    assert (1, 8, "unsupported format version 2; expected 1") in diag_set("format 2\nscenario x\n")
    assert any(d[2] == "format line must come first" for d in diag_set("scenario x\nformat 1\n"))


def test_misc_syntax_errors():
    text = (
        "prestates m\n"
        'scenario x\n'
        "result r prestate m\n"
        "situation\n"
        'situation s bits 3 program "HALT" extra\n'
        "outcome o r\n"
        'situation t program "OUT1\n'
    )
    msgs = [d.message for d in parse_scenario(text).diagnostics]
    for expected in (
        "missing scenario header",
        "duplicate scenario header",
        "result outside a situation",
        'expected: situation <id> [bits <int>] [program "..."]',
        "unexpected 'extra' in situation line",
        "a situation cannot have both bits and program",
        "expected: outcome <id> = <result-id> [...]",
        "unterminated string",
    ):
        assert expected in msgs


def test_diagnostic_positions_are_valid():
    for text in ("", "x\n\n  y z\n", "scenario\nprestates\nsituation s bits -2\n", ENUMERATED.replace("OUT1 HALT", "JZ -1 HALT")):
        doc = parse_scenario(text)
        nlines = max(1, len(text.splitlines()))
        for d in doc.diagnostics:
            assert 1 <= d.line <= nlines and d.column >= 1


@pytest.mark.parametrize("text", [REPLICATOR, SLEEPING_BEAUTY, ENUMERATED])
def test_canonical_roundtrip(text):
    s = parse_scenario(text).scenario
    canonical = render_scenario(s)
    again = parse_scenario(canonical)
    assert again.ok and again.scenario == s
    assert render_scenario(again.scenario) == canonical


ident = st.text(alphabet="abcdefghijklmnopqrstuvwxyz0123456789_-", min_size=1, max_size=6)


@st.composite
def scenarios(draw):
    prestates = draw(st.lists(ident, min_size=1, max_size=3, unique=True))
    n_sit = draw(st.integers(1, 3))
    sit_ids = draw(st.lists(ident, min_size=n_sit, max_size=n_sit, unique=True))
    n_res = draw(st.integers(n_sit, 8))
    res_ids = draw(st.lists(ident.map(lambda x: "r" + x), min_size=n_res, max_size=n_res, unique=True))
    owner = [k % n_sit for k in range(n_res)]
    sits = [
        Situation(sid, draw(st.integers(1, 30)),
                  [ResultRef(r, draw(st.sampled_from(prestates))) for r, o in zip(res_ids, owner) if o == k])
        for k, sid in enumerate(sit_ids)
    ]
    cut = draw(st.integers(1, n_res))
    outcomes = [("A", res_ids[:cut])] + ([("B", res_ids[cut:])] if cut < n_res else [])
    return Scenario(draw(ident), prestates, sits, outcomes)


@settings(max_examples=60, deadline=None)
@given(scenarios())
def test_roundtrip_property(s):
    doc = parse_scenario(render_scenario(s))
    assert doc.errors == []
    assert doc.scenario == s


def test_table_report_rows():
    text = render_report(outcome_probabilities(builtin_scenario("replicator")))
    r = rows(text)
    assert any(line.startswith("cat-dead 2/3") for line in r)
    assert any(line.startswith("cat-alive 1/3") for line in r)
    assert r.index("outcomes") < r.index("results") < r.index("Z 3/1")
    assert sum(line.startswith("cat-dead-") and " 1/3 " in line for line in r) == 2


def test_table_report_single_outcome():
    s = Scenario("one", ["m"], [Situation("s", 3, [ResultRef("r", "m")])], [("o", ["r"])])
    assert "o 1/1 1/1 1 1 s" in rows(render_report(outcome_probabilities(s)))


def test_table_report_decimals_only_on_request():
    t = outcome_probabilities(builtin_scenario("replicator"))
    assert "0.666667" not in render_report(t)
    assert "cat-dead 2/3 0.666667 2/1 2 1 s" in rows(render_report(t, decimals=True))


def test_machine_report():
    t = outcome_probabilities(builtin_scenario("sleeping-beauty"))
    text = render_report(t, "machine")
    doc = json.loads(text)
    assert doc["format"] == 1 and doc["scenario"] == "sleeping-beauty"
    assert [r["given_outcome"] for r in doc["results"]] == [
        {"num": 1, "den": 2}, {"num": 1, "den": 4}, {"num": 1, "den": 4},
    ]
    assert [o["probability"] for o in doc["outcomes"]] == [{"num": 1, "den": 2}] * 2
    assert "." not in text  # no decimals anywhere
    assert render_report(t, "machine") == text
    with pytest.raises(ValueError):
        render_report(t, "xml")
