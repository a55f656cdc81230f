"""Exhaustive SE / DSIC / IR checks, a brute-force payment oracle and dominance reports."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

from .core import Environment, Profile, Value, as_value, check_profile, format_value, replace_type
from .errors import CapacityError, UnsupportedError
from .rules import OptionRule, argmax_set, welfare_vector

ORACLE_MAX_TYPES = 8


@dataclass(frozen=True)
class Violation:
    """A failed inequality ``lhs >= rhs`` (``lhs`` is the side that should be larger)."""

    kind: str
    agent: int | None
    profile: Profile
    deviation: int | None
    lhs: Value
    rhs: Value

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "agent": self.agent,
            "profile": list(self.profile),
            "deviation": self.deviation,
            "lhs": format_value(self.lhs),
            "rhs": format_value(self.rhs),
        }


def check_se(env: Environment, rule: OptionRule) -> list:
    """One violation per profile whose chosen option is not welfare-maximizing.

    ``lhs`` is the welfare of the chosen option, ``rhs`` the maximum welfare.
    """
    if not env.is_tabular:
        raise UnsupportedError("check_se enumerates options; needs a tabular environment")
    out = []
    for v in env.profiles():
        scores = welfare_vector(env, v).tolist()
        option = rule(v)
        if option not in argmax_set(scores):
            out.append(Violation("SE", None, v, None, as_value(scores[option]), as_value(max(scores))))
    return out


def _tabulate(env: Environment, rule: OptionRule, payments: Callable) -> dict:
    return {v: (rule(v), tuple(as_value(p) for p in payments(v))) for v in env.profiles()}


def check_dsic(env: Environment, rule: OptionRule, payments: Callable, _table=None) -> list:
    """All (agent, profile, misreport) triples where misreporting strictly pays off.

    ``lhs`` is the truthful utility and ``rhs`` the utility of reporting
    ``deviation`` instead, both measured with the true type.
    """
    table = _table if _table is not None else _tabulate(env, rule, payments)
    out = []
    for v, (option, tau) in table.items():
        for i, k in enumerate(v):
            truthful = env.value(i, k, option) + tau[i]
            for k2 in range(len(env.domains[i])):
                if k2 == k:
                    continue
                option2, tau2 = table[replace_type(v, i, k2)]
                lie = env.value(i, k, option2) + tau2[i]
                if truthful < lie:
                    out.append(Violation("DSIC", i, v, k2, as_value(truthful), as_value(lie)))
    return out


def check_ir(env: Environment, rule: OptionRule, payments: Callable, _table=None) -> list:
    table = _table if _table is not None else _tabulate(env, rule, payments)
    out = []
    for v, (option, tau) in table.items():
        for i, k in enumerate(v):
            u = env.value(i, k, option) + tau[i]
            if u < 0:
                out.append(Violation("IR", i, v, None, as_value(u), 0))
    return out


def audit_mechanism(env: Environment, rule: OptionRule, payments: Callable, se: bool = True) -> dict:
    """SE, DSIC and IR violations for one mechanism, sharing one tabulation."""
    table = _tabulate(env, rule, payments)
    return {
        "SE": check_se(env, rule) if se and env.is_tabular else [],
        "DSIC": check_dsic(env, rule, payments, _table=table),
        "IR": check_ir(env, rule, payments, _table=table),
    }


def oracle_min_payment(env: Environment, rule: OptionRule, agent: int, profile: Profile) -> Value:
    """Largest ``-tau_i(v)`` compatible with DSIC and IR, by brute force.

    Builds the constraint weights directly from the valuations and takes the
    minimum length over every simple path from the source to the reported
    type.  Shares no code with the Bellman-Ford engine.
    """
    profile = check_profile(env, profile)
    d = len(env.domains[agent])
    if d > ORACLE_MAX_TYPES:
        raise CapacityError(f"oracle enumerates paths over at most {ORACLE_MAX_TYPES} types, agent has {d}")
    chosen = [rule(replace_type(profile, agent, k)) for k in range(d)]

    def val(k, option):
        return env.value(agent, k, option)

    # -tau(k) <= v_k(chosen[k])                              (IR)
    # -tau(k) <= -tau(j) + v_k(chosen[k]) - v_k(chosen[j])   (DSIC: k must not envy j)
    entry = [val(k, chosen[k]) for k in range(d)]
    step = [[val(k, chosen[k]) - val(k, chosen[j]) for k in range(d)] for j in range(d)]
    target = profile[agent]
    best = None
    stack = [(k, entry[k], 1 << k) for k in range(d)]
    while stack:
        node, length, seen = stack.pop()
        if node == target:
            if best is None or length < best:
                best = length
            continue
        for nxt in range(d):
            if not seen >> nxt & 1:
                stack.append((nxt, length + step[node][nxt], seen | 1 << nxt))
    return as_value(best)


@dataclass
class DominanceReport:
    rows: list              # per profile: (profile, B*, B^b, B^c or None)
    violations: list
    strict_improvements: int
    clarke_checked: bool

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "profiles": [
                {"profile": list(v), "budget_proposed": format_value(b), "budget_vcg_budget": format_value(bb),
                 "diff": format_value(b - bb),
                 "budget_clarke": None if bc is None else format_value(bc)}
                for v, b, bb, bc in self.rows
            ],
            "violations": [x.to_json() for x in self.violations],
            "strict_improvements": self.strict_improvements,
            "clarke_checked": self.clarke_checked,
        }


def check_dominance(env: Environment, rule: OptionRule) -> DominanceReport:
    """Pointwise payment ordering proposed <= VCG-budget (<= Clarke on non-negative types)."""
    from .spm import compute_payments
    from .vcg import clarke_payments, vcg_budget_payments

    nonneg = env.is_non_negative()
    rows, violations, strict = [], [], 0
    for v in env.profiles():
        star = compute_payments(env, rule, v)
        budget = vcg_budget_payments(env, rule, v)
        clarke = clarke_payments(env, rule, v) if nonneg else None
        for i in range(env.agent_count):
            if star[i] > budget[i]:
                violations.append(Violation("Dominance", i, v, None, budget[i], star[i]))
            if clarke is not None and budget[i] > clarke[i]:
                violations.append(Violation("Dominance", i, v, None, clarke[i], budget[i]))
        b_star, b_budget = as_value(sum(star)), as_value(sum(budget))
        if b_star > b_budget:
            violations.append(Violation("Dominance", None, v, None, b_budget, b_star))
        strict += b_star < b_budget
        rows.append((v, b_star, b_budget, None if clarke is None else as_value(sum(clarke))))
    return DominanceReport(rows, violations, strict, nonneg)


def report_json(violations: Mapping, dominance: DominanceReport | None = None, oracle=None) -> dict:
    doc = {
        "violations": {kind: [x.to_json() for x in items] for kind, items in violations.items()},
        "violation_count": sum(len(items) for items in violations.values()),
    }
    if dominance is not None:
        doc["dominance"] = dominance.to_json()
    if oracle is not None:
        doc["oracle"] = oracle
    return doc
