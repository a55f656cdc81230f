"""Option rules: efficient argmax, affine maximizers, quadratic venue, explicit tables."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .core import Environment, Option, Profile, Value, as_value, check_profile, replace_type
from .errors import CapacityError, InputError, UnsupportedError


@dataclass(frozen=True)
class TieBreak:
    """How to pick among welfare-maximizing options.

    ``lowest``/``highest`` pick by option index; ``table`` looks the choice up
    in an explicit profile -> option mapping (audit it with ``check_se``).
    """

    policy: str = "lowest"
    table: Mapping | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.policy not in ("lowest", "highest", "table"):
            raise InputError(f"unknown tie-break policy {self.policy!r}")
        if self.policy == "table" and self.table is None:
            raise InputError("table tie-break needs a table")

    @classmethod
    def explicit(cls, table: Mapping) -> "TieBreak":
        return cls("table", {tuple(k): v for k, v in table.items()})


LOWEST = TieBreak("lowest")
HIGHEST = TieBreak("highest")


@dataclass(frozen=True)
class AffineWeights:
    agent_weights: tuple
    option_weights: tuple

    def __init__(self, agent_weights: Sequence, option_weights: Sequence):
        object.__setattr__(self, "agent_weights", tuple(as_value(w) for w in agent_weights))
        object.__setattr__(self, "option_weights", tuple(as_value(w) for w in option_weights))
        bad = [i for i, w in enumerate(self.agent_weights) if w <= 0]
        if bad:
            raise InputError(f"agent weights must be strictly positive (agents {bad})")

    @classmethod
    def uniform(cls, agent_count: int, option_count: int) -> "AffineWeights":
        return cls([1] * agent_count, [0] * option_count)

    def check(self, env: Environment) -> None:
        if len(self.agent_weights) != env.agent_count:
            raise InputError(f"{len(self.agent_weights)} agent weights for {env.agent_count} agents")
        if len(self.option_weights) != env.option_count:
            raise InputError(f"{len(self.option_weights)} option weights for {env.option_count} options")

    def to_json(self) -> dict:
        from .core import format_value
        return {
            "agent_weights": [format_value(w) for w in self.agent_weights],
            "option_weights": [format_value(w) for w in self.option_weights],
        }


def _as_array(values) -> np.ndarray:
    if all(isinstance(v, int) for v in values):
        return np.asarray(values, dtype=np.int64)
    return np.asarray(values, dtype=object)


def _pick(scores: np.ndarray, policy: str) -> np.ndarray:
    """Row-wise argmax of a (rows x options) score matrix under a by-index policy."""
    if policy == "lowest":
        return np.argmax(scores, axis=1)
    m = scores.shape[1]
    return m - 1 - np.argmax(scores[:, ::-1], axis=1)


def argmax_set(scores: Sequence[Value]) -> list:
    best = max(scores)
    return [j for j, s in enumerate(scores) if s == best]


def welfare_vector(env: Environment, profile: Profile) -> np.ndarray:
    """``S(X; v)`` for every option X of a tabular environment."""
    return env.profile_matrix(profile).sum(axis=0)


def se_select(env: Environment, profile: Profile, tie_break: TieBreak = LOWEST) -> Option:
    profile = check_profile(env, profile)
    if not env.is_tabular:
        return quadratic_select(env, profile)
    if tie_break.policy == "table":
        return int(tie_break.table[profile])
    scores = welfare_vector(env, profile)
    return int(_pick(scores[None, :], tie_break.policy)[0])


def affine_scores(env: Environment, weights: AffineWeights, profile: Profile) -> np.ndarray:
    rows = env.profile_matrix(profile)
    w = _as_array(weights.agent_weights)
    return (rows * w[:, None]).sum(axis=0) + _as_array(weights.option_weights)


def affine_select(env: Environment, weights: AffineWeights, profile: Profile,
                  tie_break: TieBreak = LOWEST) -> Option:
    profile = check_profile(env, profile)
    weights.check(env)
    if tie_break.policy == "table":
        return int(tie_break.table[profile])
    scores = affine_scores(env, weights, profile)
    return int(_pick(scores[None, :], tie_break.policy)[0])


def quadratic_select(env: Environment, profile: Profile) -> Value:
    """Welfare-maximizing venue: the a-weighted mean of the b's, clamped to the interval."""
    if env.is_tabular:
        raise UnsupportedError("quadratic_select needs a quadratic-line environment")
    profile = check_profile(env, profile)
    types = [env.domains[i][k] for i, k in enumerate(profile)]
    centre = Fraction(sum(t.a * t.b for t in types)) / sum(t.a for t in types)
    lo, hi = env.option_space.lo, env.option_space.hi
    return as_value(max(lo, min(hi, centre)))


class OptionRule:
    """A deterministic, memoized option rule ``profile -> option``.

    ``family`` is one of ``"se"``, ``"affine"``, ``"table"`` or ``"quadratic"``.
    Use the module-level constructors rather than calling this directly.
    """

    def __init__(self, env: Environment, family: str, tie_break: TieBreak = LOWEST,
                 weights: AffineWeights | None = None, table: Mapping | None = None):
        if family not in ("se", "affine", "table", "quadratic"):
            raise InputError(f"unknown rule family {family!r}")
        if family in ("se", "affine", "table") and not env.is_tabular:
            raise UnsupportedError(f"{family} rules need a tabular environment; use the quadratic rule")
        if family == "quadratic" and env.is_tabular:
            raise UnsupportedError("the quadratic rule needs a quadratic-line environment")
        if family == "affine":
            if weights is None:
                raise InputError("affine rule needs weights")
            weights.check(env)
        if family == "table":
            if table is None:
                raise InputError("table rule needs a table")
            table = {tuple(k): int(v) for k, v in table.items()}
        self.env = env
        self.family = family
        self.tie_break = tie_break
        self.weights = weights
        self.table = table
        self._memo: dict = {}

    def __repr__(self):
        extra = f", tie_break={self.tie_break.policy}" if self.family in ("se", "affine") else ""
        return f"OptionRule({self.family}{extra})"

    @property
    def is_efficient(self) -> bool:
        """Whether the rule is SE by construction (tables need an audit)."""
        return self.family in ("se", "quadratic") and self.tie_break.policy != "table"

    def __call__(self, profile: Profile) -> Option:
        profile = tuple(profile)
        try:
            return self._memo[profile]
        except KeyError:
            pass
        option = self._select(check_profile(self.env, profile))
        return self._memo.setdefault(profile, option)

    def _select(self, profile: Profile) -> Option:
        if self.family == "table" or self.tie_break.policy == "table":
            source = self.table if self.family == "table" else self.tie_break.table
            try:
                return int(source[profile])
            except KeyError:
                raise InputError(f"explicit table has no entry for profile {profile}") from None
        if self.family == "se":
            return se_select(self.env, profile, self.tie_break)
        if self.family == "affine":
            return affine_select(self.env, self.weights, profile, self.tie_break)
        return quadratic_select(self.env, profile)

    def deviation_options(self, profile: Profile, agent: int) -> list:
        """``[rule(v_i', v_-i) for v_i' in V_i]``, one entry per type of ``agent``.

        SE and affine rules evaluate all deviations in one vectorized pass and
        fill the memo with the results.
        """
        profile = tuple(profile)
        d = len(self.env.domains[agent])
        keys = [replace_type(profile, agent, k) for k in range(d)]
        if all(key in self._memo for key in keys):
            return [self._memo[key] for key in keys]
        if self.family in ("se", "affine") and self.tie_break.policy != "table":
            check_profile(self.env, profile)
            table = self.env.table(agent)
            rows = self.env.profile_matrix(profile)
            if self.family == "se":
                others = rows.sum(axis=0) - rows[agent]
                scores = table + others[None, :]
            else:
                w = _as_array(self.weights.agent_weights)
                weighted = rows * w[:, None]
                others = weighted.sum(axis=0) - weighted[agent] + _as_array(self.weights.option_weights)
                scores = table * w[agent] + others[None, :]
            picks = [int(j) for j in _pick(scores, self.tie_break.policy)]
            return [self._memo.setdefault(key, j) for key, j in zip(keys, picks)]
        return [self(key) for key in keys]

    def cache_clear(self) -> None:
        self._memo.clear()

    def to_json(self) -> dict:
        doc = {"family": self.family}
        if self.family in ("se", "affine"):
            doc["tie_break"] = self.tie_break.policy
            if self.tie_break.policy == "table":
                doc["table"] = _table_json(self.tie_break.table)
        if self.family == "affine":
            doc.update(self.weights.to_json())
        if self.family == "table":
            doc["table"] = _table_json(self.table)
        return doc


def _table_json(table: Mapping) -> list:
    return [[list(k), int(v)] for k, v in sorted(table.items())]


def se_rule(env: Environment, tie_break: TieBreak = LOWEST) -> OptionRule:
    if not env.is_tabular:
        return quadratic_rule(env)
    return OptionRule(env, "se", tie_break=tie_break)


def affine_rule(env: Environment, weights: AffineWeights, tie_break: TieBreak = LOWEST) -> OptionRule:
    return OptionRule(env, "affine", tie_break=tie_break, weights=weights)


def table_rule(env: Environment, table: Mapping) -> OptionRule:
    return OptionRule(env, "table", table=table)


def quadratic_rule(env: Environment) -> OptionRule:
    return OptionRule(env, "quadratic")


def rule_from_json(env: Environment, doc: Mapping) -> OptionRule:
    family = doc.get("family", "se")
    tie = doc.get("tie_break", "lowest")
    if tie == "table":
        tie_break = TieBreak.explicit({tuple(k): v for k, v in doc["table"]})
    else:
        tie_break = TieBreak(tie)
    if family == "se":
        return se_rule(env, tie_break)
    if family == "affine":
        return affine_rule(env, AffineWeights(doc["agent_weights"], doc["option_weights"]), tie_break)
    if family == "table":
        return table_rule(env, {tuple(k): v for k, v in doc["table"]})
    if family == "quadratic":
        return quadratic_rule(env)
    raise InputError(f"unknown rule family {family!r}")


def se_argmax_sets(env: Environment) -> dict:
    return {v: argmax_set(welfare_vector(env, v).tolist()) for v in env.profiles()}


def enumerate_se_rules(env: Environment, cap: int = 10_000) -> list:
    """Every SE option rule on a tabular environment, as explicit tables.

    Rules are listed in lexicographic order of their choices at the tied
    profiles (profiles in product order, options ascending), so the first
    rule is the lowest-index tie-break.
    """
    if not env.is_tabular:
        raise UnsupportedError("rule enumeration needs a tabular environment")
    sets = se_argmax_sets(env)
    count = math.prod(len(s) for s in sets.values())
    if count > cap:
        raise CapacityError(f"{count} SE rules exceed the cap of {cap}")
    profiles = list(sets)
    rules = []
    for choice in itertools.product(*(sets[v] for v in profiles)):
        rules.append(table_rule(env, dict(zip(profiles, choice))))
    return rules


def expected_budget_uniform(budgets: Sequence[Value]) -> Value:
    return as_value(Fraction(sum(budgets)) / len(budgets))


def max_budget(budgets: Sequence[Value]) -> Value:
    return max(budgets)


AGGREGATORS: dict = {
    "expected": expected_budget_uniform,
    "max": max_budget,
}


def optimize_option_rule(env: Environment, aggregator: str | Callable = "expected",
                         cap: int = 10_000) -> tuple:
    """Search the SE rules for one whose shortest-path budgets minimize ``aggregator``.

    ``aggregator`` maps the per-profile budget list (in ``env.profiles()``
    order) to a number and should be non-decreasing.  Returns the first
    minimizer in enumeration order together with its aggregate.
    """
    from .spm import compute_payments

    f = AGGREGATORS[aggregator] if isinstance(aggregator, str) else aggregator
    best = None
    for rule in enumerate_se_rules(env, cap):
        budgets = [as_value(sum(compute_payments(env, rule, v))) for v in env.profiles()]
        score = f(budgets)
        if best is None or score < best[1]:
            best = (rule, score)
    return best
