"""JSON environment documents.

::

    {"agents": 2,
     "options": 3,                       # or {"interval": ["0", "10"]}
     "domains": [[[1, 0, 0], [-3, -2, 0]], [[0, 0, -2]]],
     "rule": {"family": "se", "tie_break": "lowest"}}   # optional

Rationals are integers or ``"p/q"`` strings.  For an interval option space
each type is an ``[a, b, c]`` triple.
"""
from __future__ import annotations

import json
from typing import Mapping

from .core import Environment, QuadraticLine, Tabular, format_value
from .errors import InputError
from .rules import OptionRule, rule_from_json


def env_from_json(doc: Mapping) -> Environment:
    try:
        agents = doc["agents"]
        options = doc["options"]
        domains = doc["domains"]
    except KeyError as exc:
        raise InputError(f"environment document lacks {exc.args[0]!r}") from None
    if not isinstance(agents, int) or isinstance(agents, bool):
        raise InputError("'agents' must be an integer")
    if isinstance(options, Mapping):
        if "interval" not in options or len(options["interval"]) != 2:
            raise InputError("'options' object must be {\"interval\": [lo, hi]}")
        space = QuadraticLine(*options["interval"])
        if any(len(t) != 3 for dom in domains for t in dom):
            raise InputError("quadratic types must be [a, b, c] triples")
    elif isinstance(options, int) and not isinstance(options, bool):
        space = Tabular(options)
    else:
        raise InputError("'options' must be an integer count or an interval object")
    return Environment(agents, space, domains)


def env_to_json(env: Environment, rule: OptionRule | None = None) -> dict:
    if env.is_tabular:
        options = env.option_count
        domains = [[[format_value(x) for x in t] for t in dom] for dom in env.domains]
    else:
        options = {"interval": [format_value(env.option_space.lo), format_value(env.option_space.hi)]}
        domains = [[[format_value(t.a), format_value(t.b), format_value(t.c)] for t in dom] for dom in env.domains]
    doc = {"agents": env.agent_count, "options": options, "domains": domains}
    if rule is not None:
        doc["rule"] = rule.to_json()
    return doc


def load_document(path: str) -> tuple:
    """``(env, rule or None)`` from a JSON file."""
    try:
        with open(path) as f:
            doc = json.load(f)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from None
    env = env_from_json(doc)
    rule = rule_from_json(env, doc["rule"]) if "rule" in doc else None
    return env, rule


def dumps(env: Environment, rule: OptionRule | None = None) -> str:
    return json.dumps(env_to_json(env, rule), indent=2)
