"""Environment model, exact values, profiles, welfare and outcome records."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence, Union

import numpy as np

from .errors import InputError

Value = Union[int, Fraction]
Profile = tuple  # one type index per agent
Option = Union[int, Fraction]

# int64 is used for tables whose entries stay well clear of overflow after summing.
_INT64_SAFE = 2**40


def as_value(x) -> Value:
    """Parse an exact rational from an int, Fraction or ``"p/q"`` string.

    Integral results come back as plain ``int``. Floats are rejected since
    they would silently break exact comparisons.
    """
    if isinstance(x, bool):
        raise InputError(f"not a rational value: {x!r}")
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else x
    if isinstance(x, str):
        try:
            f = Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational value: {x!r}") from exc
        return int(f) if f.denominator == 1 else f
    raise InputError(f"not a rational value: {x!r} ({type(x).__name__})")


def format_value(v: Value):
    """JSON/CSV encoding of a value: ints stay ints, other rationals become ``"p/q"``."""
    v = as_value(v)
    if isinstance(v, int):
        return v
    return f"{v.numerator}/{v.denominator}"


def value_str(v: Value) -> str:
    return str(format_value(v))


@dataclass(frozen=True)
class Tabular:
    option_count: int


@dataclass(frozen=True)
class QuadraticLine:
    lo: Value
    hi: Value


@dataclass(frozen=True)
class QuadraticType:
    """Valuation ``x -> -a (x - b)^2 - c`` of a venue location ``x``."""

    a: Value
    b: Value
    c: Value

    def __call__(self, x: Option) -> Value:
        return as_value(-self.a * (x - self.b) ** 2 - self.c)


class Environment:
    """Agents, an option space and one finite type domain per agent.

    For a tabular option space a type is a tuple of ``option_count`` values;
    for a quadratic line it is a :class:`QuadraticType`.  Construction only
    normalizes values; use :func:`validate_environment` for the invariants.
    """

    def __init__(self, agent_count: int, option_space, domains: Sequence[Sequence]):
        self.agent_count = agent_count
        self.option_space = option_space
        if isinstance(option_space, Tabular):
            self.domains = tuple(
                tuple(tuple(as_value(x) for x in t) for t in dom) for dom in domains
            )
        elif isinstance(option_space, QuadraticLine):
            self.option_space = QuadraticLine(as_value(option_space.lo), as_value(option_space.hi))
            self.domains = tuple(
                tuple(
                    t if isinstance(t, QuadraticType)
                    else QuadraticType(*(as_value(x) for x in t))
                    for t in dom
                )
                for dom in domains
            )
        else:
            raise InputError(f"unknown option space {option_space!r}")

    @classmethod
    def tabular(cls, domains: Sequence[Sequence[Sequence]], option_count: int | None = None) -> "Environment":
        if option_count is None:
            option_count = len(domains[0][0]) if domains and domains[0] else 0
        return cls(len(domains), Tabular(option_count), domains)

    @classmethod
    def from_array(cls, values: np.ndarray) -> "Environment":
        """Tabular environment from an int array shaped (agents, types, options)."""
        values = np.asarray(values)
        if values.ndim != 3 or values.dtype.kind not in "iu":
            raise InputError("from_array expects an integer array shaped (agents, types, options)")
        env = cls.__new__(cls)
        env.agent_count = values.shape[0]
        env.option_space = Tabular(values.shape[2])
        env.domains = tuple(tuple(tuple(t) for t in dom) for dom in values.tolist())
        if np.abs(values).max(initial=0) < _INT64_SAFE:
            env.__dict__["_dtype"] = np.int64
            env.__dict__["_tables"] = tuple(np.array(a, dtype=np.int64) for a in values)
        return env

    @classmethod
    def quadratic(cls, domains, interval) -> "Environment":
        lo, hi = interval
        return cls(len(domains), QuadraticLine(lo, hi), domains)

    def __repr__(self):
        return (f"Environment(agents={self.agent_count}, options={self.option_space!r}, "
                f"domain_sizes={self.domain_sizes})")

    def __eq__(self, other):
        return (isinstance(other, Environment) and self.agent_count == other.agent_count
                and self.option_space == other.option_space and self.domains == other.domains)

    def __hash__(self):
        return hash((self.agent_count, self.option_space, self.domains))

    @property
    def is_tabular(self) -> bool:
        return isinstance(self.option_space, Tabular)

    @property
    def option_count(self) -> int:
        if not self.is_tabular:
            raise InputError("a quadratic-line environment has no finite option list")
        return self.option_space.option_count

    @property
    def domain_sizes(self) -> tuple:
        return tuple(len(d) for d in self.domains)

    @property
    def profile_count(self) -> int:
        return math.prod(self.domain_sizes)

    def profiles(self) -> Iterator[Profile]:
        return itertools.product(*(range(len(d)) for d in self.domains))

    def value(self, agent: int, type_index: int, option: Option) -> Value:
        t = self.domains[agent][type_index]
        if self.is_tabular:
            return t[option]
        return t(option)

    def is_non_negative(self) -> bool:
        """Whether every valuation of every type is >= 0 (tabular only)."""
        return all(t.size == 0 or t.min() >= 0 for t in self._tables)

    @cached_property
    def _dtype(self):
        flat = [x for dom in self.domains for t in dom for x in t]
        if all(isinstance(x, int) and abs(x) < _INT64_SAFE for x in flat) and self.agent_count < 2**20:
            return np.int64
        return object

    @cached_property
    def _tables(self) -> tuple:
        tables = []
        for dom in self.domains:
            arr = np.empty((len(dom), self.option_count), dtype=self._dtype)
            for k, t in enumerate(dom):
                arr[k, :] = t
            tables.append(arr)
        return tuple(tables)

    def table(self, agent: int) -> np.ndarray:
        """Valuation matrix of ``agent`` (types x options); exact, read-only by convention."""
        return self._tables[agent]

    def profile_matrix(self, profile: Profile) -> np.ndarray:
        """Rows ``v_i`` for the reported types (agents x options)."""
        return np.stack([self._tables[i][k] for i, k in enumerate(profile)])

    def valuation_matrix(self, agent: int, options: Sequence[Option]) -> list:
        """``M[k][j] = v_k(options[j])`` over the agent's whole domain, as Python values."""
        if self.is_tabular:
            return self._tables[agent][:, list(options)].tolist()
        return [[t(x) for x in options] for t in self.domains[agent]]


def check_profile(env: Environment, profile: Sequence[int]) -> Profile:
    profile = tuple(int(k) for k in profile)
    if len(profile) != env.agent_count:
        raise InputError(f"profile has {len(profile)} entries, expected {env.agent_count}")
    for i, k in enumerate(profile):
        if not 0 <= k < len(env.domains[i]):
            raise InputError(f"type index {k} out of range for agent {i} (domain size {len(env.domains[i])})")
    return profile


def check_option(env: Environment, option: Option) -> Option:
    if env.is_tabular:
        if isinstance(option, bool) or not isinstance(option, (int, np.integer)) or not 0 <= option < env.option_count:
            raise InputError(f"option {option!r} out of range (0..{env.option_count - 1})")
        return int(option)
    option = as_value(option)
    if not env.option_space.lo <= option <= env.option_space.hi:
        raise InputError(f"option {option} outside interval [{env.option_space.lo}, {env.option_space.hi}]")
    return option


def replace_type(profile: Profile, agent: int, type_index: int) -> Profile:
    return profile[:agent] + (type_index,) + profile[agent + 1:]


def social_welfare(env: Environment, profile: Profile, option: Option) -> Value:
    profile = check_profile(env, profile)
    option = check_option(env, option)
    return as_value(sum(env.value(i, k, option) for i, k in enumerate(profile)))


@dataclass(frozen=True)
class MechanismOutcome:
    option: Option
    payments: tuple
    utilities: tuple
    budget: Value

    def to_json(self) -> dict:
        return {
            "option": format_value(self.option),
            "payments": [format_value(p) for p in self.payments],
            "utilities": [format_value(u) for u in self.utilities],
            "budget": format_value(self.budget),
        }


def assemble_outcome(env: Environment, profile: Profile, option: Option, payments: Sequence) -> MechanismOutcome:
    profile = check_profile(env, profile)
    option = check_option(env, option)
    if len(payments) != env.agent_count:
        raise InputError(f"{len(payments)} payments given for {env.agent_count} agents")
    payments = tuple(as_value(p) for p in payments)
    utilities = tuple(as_value(env.value(i, k, option) + p) for (i, k), p in zip(enumerate(profile), payments))
    return MechanismOutcome(option, payments, utilities, as_value(sum(payments)))


def validate_environment(env: Environment) -> list:
    """Return human-readable invariant violations; empty means well formed."""
    problems = []
    if not isinstance(env.agent_count, int) or env.agent_count < 1:
        problems.append(f"agent_count must be a positive integer, got {env.agent_count!r}")
    if len(env.domains) != env.agent_count:
        problems.append(f"{len(env.domains)} type domains given for {env.agent_count} agents")
    for i, dom in enumerate(env.domains):
        if not dom:
            problems.append(f"agent {i}: type domain must be a non-empty finite set")
    if env.is_tabular:
        m = env.option_space.option_count
        if m < 1:
            problems.append(f"option_count must be >= 1, got {m}")
        for i, dom in enumerate(env.domains):
            for k, t in enumerate(dom):
                if len(t) != m:
                    problems.append(f"agent {i} type {k}: valuation has {len(t)} entries, expected {m}")
    else:
        lo, hi = env.option_space.lo, env.option_space.hi
        if lo > hi:
            problems.append(f"interval [{lo}, {hi}] is empty (x_min > x_max)")
        for i, dom in enumerate(env.domains):
            for k, t in enumerate(dom):
                if t.a <= 0:
                    problems.append(f"agent {i} type {k}: quadratic coefficient a={t.a} must be strictly positive")
    return problems


def ensure_valid(env: Environment) -> Environment:
    problems = validate_environment(env)
    if problems:
        raise InputError("invalid environment: " + "; ".join(problems))
    return env
