import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mechkit import (Environment, InputError, QuadraticLine, assemble_outcome, as_value, format_value,
                     social_welfare, validate_environment)
from mechkit.documents import env_from_json, env_to_json
from mechkit.experiments import vickrey_instance

from conftest import environments, example1


def test_welfare_example1(ex1):
    assert social_welfare(ex1, (0, 0), 0) == 1
    assert social_welfare(ex1, (1, 0), 1) == -2


def test_welfare_zero_env():
    env = Environment.tabular([[[0, 0]], [[0, 0], [0, 0]]])
    assert all(social_welfare(env, v, x) == 0 for v in env.profiles() for x in range(2))


@pytest.mark.parametrize("profile, option", [((2, 0), 0), ((0,), 0), ((0, 0), 3), ((0, 0), -1)])
def test_welfare_bad_input(ex1, profile, option):
    with pytest.raises(InputError):
        social_welfare(ex1, profile, option)


def test_assemble_zero():
    env = Environment.tabular([[[0, 5]], [[0, 1]]])
    out = assemble_outcome(env, (0, 0), 0, [0, 0])
    assert out.budget == 0 and out.utilities == (0, 0)


def test_assemble_example1(ex1):
    out = assemble_outcome(ex1, (0, 0), 0, [1, 0])
    assert out.budget == 1
    assert out.utilities == (2, 0)


def test_assemble_vickrey_budget():
    env, profile = vickrey_instance([5, 4, 3, 2, 1], [0, 2, 4])
    assert assemble_outcome(env, profile, 0, [-3, 0, 0]).budget == -3


def test_assemble_length_mismatch(ex1):
    with pytest.raises(InputError):
        assemble_outcome(ex1, (0, 0), 0, [1])


def test_validate_ok(ex1):
    assert validate_environment(ex1) == []


def test_validate_empty_domain():
    env = Environment.tabular([[[1, 2]], []], 2)
    problems = validate_environment(env)
    assert len(problems) == 1 and "non-empty" in problems[0]


def test_validate_quadratic_a_zero():
    env = Environment.quadratic([[(0, 1, 0)]], (0, 10))
    problems = validate_environment(env)
    assert len(problems) == 1 and "strictly positive" in problems[0]


def test_validate_ragged_and_interval():
    assert validate_environment(Environment.tabular([[[1, 2], [1]]], 2))
    assert validate_environment(Environment.quadratic([[(1, 0, 0)]], (5, 1)))


def test_duplicate_types_allowed():
    assert validate_environment(Environment.tabular([[[1, 2], [1, 2]]])) == []


@pytest.mark.parametrize("raw, expected", [(3, 3), ("3", 3), ("6/4", Fraction(3, 2)), (Fraction(4, 2), 2),
                                           ("-1/3", Fraction(-1, 3))])
def test_as_value(raw, expected):
    v = as_value(raw)
    assert v == expected and type(v) is type(expected)


@pytest.mark.parametrize("raw", [0.5, "x", "1/0", True, None])
def test_as_value_rejects(raw):
    with pytest.raises(InputError):
        as_value(raw)


@given(st.fractions())
def test_value_roundtrip(q):
    assert as_value(json.loads(json.dumps(format_value(q)))) == q


@given(environments())
def test_welfare_identity(env):
    # sum of utilities minus budget equals welfare of the chosen option
    for v in env.profiles():
        out = assemble_outcome(env, v, 0, list(range(env.agent_count)))
        assert sum(out.utilities) - out.budget == social_welfare(env, v, 0)


@given(environments())
def test_document_roundtrip(env):
    assert env_from_json(json.loads(json.dumps(env_to_json(env)))) == env


def test_document_roundtrip_rationals():
    env = Environment.tabular([[["1/3", -2], [0, "7/2"]]])
    doc = json.loads(json.dumps(env_to_json(env)))
    assert doc["domains"][0][0] == ["1/3", -2]
    assert env_from_json(doc) == env


def test_document_quadratic():
    doc = {"agents": 1, "options": {"interval": ["0", "10"]}, "domains": [[[1, "5/2", 0]]]}
    env = env_from_json(doc)
    assert isinstance(env.option_space, QuadraticLine)
    assert env.value(0, 0, 3) == Fraction(-1, 4)
    assert env_from_json(env_to_json(env)) == env


def test_fraction_tables_stay_exact():
    env = Environment.tabular([[["1/3", "1/3"]], [["1/6", 0]]])
    assert env.table(0).dtype == object
    assert social_welfare(env, (0, 0), 0) == Fraction(1, 2)
