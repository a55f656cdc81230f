"""VCG baselines: Clarke pivot, the budget pivot, and weighted VCG for affine rules."""
from __future__ import annotations

from fractions import Fraction

from .core import Environment, Profile, as_value, check_profile
from .errors import InputError, UnsupportedError
from .rules import AffineWeights, OptionRule, _as_array


def _require_tabular(env: Environment, what: str) -> None:
    if not env.is_tabular:
        raise UnsupportedError(f"{what} needs a tabular environment (the pivot maximizes over the option list)")


def _others_welfare(env: Environment, profile: Profile):
    rows = env.profile_matrix(profile)
    total = rows.sum(axis=0)
    return rows, total


def clarke_payments(env: Environment, rule: OptionRule, profile: Profile) -> tuple:
    """tau_i = sum_{j != i} v_j(phi(v)) - max_X sum_{j != i} v_j(X)."""
    _require_tabular(env, "Clarke pivot")
    profile = check_profile(env, profile)
    option = rule(profile)
    rows, total = _others_welfare(env, profile)
    payments = []
    for i in range(env.agent_count):
        others = total - rows[i]
        payments.append(as_value(others[option] - others.max()))
    return tuple(payments)


def budget_pivot(env: Environment, profile: Profile, agent: int):
    """min over the agent's types of the maximum social welfare, others fixed."""
    rows, total = _others_welfare(env, profile)
    others = total - rows[agent]
    return (env.table(agent) + others[None, :]).max(axis=1).min()


def vcg_budget_payments(env: Environment, rule: OptionRule, profile: Profile) -> tuple:
    """tau_i = sum_{j != i} v_j(phi(v)) - min_{v_i'} max_X S(X; v_i', v_-i)."""
    _require_tabular(env, "VCG-budget")
    profile = check_profile(env, profile)
    option = rule(profile)
    rows, total = _others_welfare(env, profile)
    payments = []
    for i in range(env.agent_count):
        others = total - rows[i]
        pivot = (env.table(i) + others[None, :]).max(axis=1).min()
        payments.append(as_value(others[option] - pivot))
    return tuple(payments)


def weighted_vcg_payments(env: Environment, rule: OptionRule, profile: Profile,
                          pivot: str = "ama", weights: AffineWeights | None = None) -> tuple:
    """Weighted VCG payments for an affine-maximizer rule.

    ``pivot="ama"`` is the weighted Clarke pivot.  ``pivot="budget"`` swaps the
    maximum over the others' weighted welfare for the minimum, over the agent's
    own types, of the maximum full weighted objective; it is our extension and
    is only claimed to keep DSIC and IR.
    """
    _require_tabular(env, "weighted VCG")
    if rule.family != "affine":
        raise InputError("weighted VCG payments need an affine-maximizer rule")
    if weights is not None and weights != rule.weights:
        raise InputError("payment weights differ from the rule's weights")
    if pivot not in ("ama", "budget"):
        raise InputError(f"unknown weighted pivot {pivot!r}")
    profile = check_profile(env, profile)
    w = rule.weights.agent_weights
    lam = _as_array(rule.weights.option_weights)
    option = rule(profile)
    rows = env.profile_matrix(profile) * _as_array(w)[:, None]
    total = rows.sum(axis=0)
    payments = []
    for i in range(env.agent_count):
        others = total - rows[i] + lam
        if pivot == "ama":
            h = others.max()
        else:
            h = (env.table(i) * w[i] + others[None, :]).max(axis=1).min()
        payments.append(as_value(Fraction(as_value(others[option] - h)) / w[i]))
    return tuple(payments)
