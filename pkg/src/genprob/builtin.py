"""Built-in scenarios: the Replicator and Sleeping Beauty."""

from __future__ import annotations

from .calculus import Scenario
from .scenario_io import parse_scenario

REPLICATOR = """\
format 1
# One process makes three copies of the observer: two see a dead cat, one a live cat.
scenario replicator
prestates m
situation s bits 3
  result cat-dead-1 prestate m
  result cat-dead-2 prestate m
  result cat-alive prestate m
outcome cat-dead = cat-dead-1 cat-dead-2
outcome cat-alive = cat-alive
"""

SLEEPING_BEAUTY = """\
format 1
# Heads: woken Monday only. Tails: woken Monday and Tuesday.
scenario sleeping-beauty
prestates H_Mon T_Mon T_Tue
situation H bits 3
  result H_Mon prestate H_Mon
situation T bits 3
  result T_Mon prestate T_Mon
  result T_Tue prestate T_Tue
outcome H = H_Mon
outcome T = T_Mon T_Tue
"""

BUILTINS = {"replicator": REPLICATOR, "sleeping-beauty": SLEEPING_BEAUTY}


def builtin_source(name: str) -> str:
    try:
        return BUILTINS[name]
    except KeyError:
        raise KeyError(f"no built-in scenario {name!r}; choose from {', '.join(BUILTINS)}") from None


def builtin_scenario(name: str) -> Scenario:
    doc = parse_scenario(builtin_source(name))
    assert doc.ok, doc.diagnostics
    return doc.scenario
