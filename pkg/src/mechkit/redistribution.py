"""Rebate surplus to agents while keeping a justified mechanism justified.

Agents are processed in ascending index.  Agent ``t`` receives
``h_t(v_-t) = max(0, min over its own types of -B)``, computed on the budgets
left after agents ``0..t-1`` were processed.  Rebates are non-negative and
ignore the agent's own report, so DSIC and IR survive.
"""
from __future__ import annotations

import csv
import io
from typing import Callable, Mapping

from .core import Environment, Profile, Value, as_value, format_value, replace_type
from .errors import CapacityError, InputError
from .rules import OptionRule

DEFAULT_PROFILE_CAP = 10**6


class PaymentTable:
    """Complete map ``profile -> per-agent payments`` over every profile of an environment.

    Instances are callable so they can stand in for a payment rule.
    """

    def __init__(self, env: Environment, payments: Mapping):
        self.env = env
        self.payments = {tuple(v): tuple(as_value(x) for x in tau) for v, tau in payments.items()}
        missing = [v for v in env.profiles() if v not in self.payments]
        if missing:
            raise InputError(f"payment table misses {len(missing)} profiles, e.g. {missing[0]}")
        bad = [v for v, tau in self.payments.items() if len(tau) != env.agent_count]
        if bad:
            raise InputError(f"profile {bad[0]} has the wrong number of payments")

    def __call__(self, profile: Profile) -> tuple:
        return self.payments[tuple(profile)]

    def __eq__(self, other):
        return isinstance(other, PaymentTable) and self.payments == other.payments

    def budget(self, profile: Profile) -> Value:
        return as_value(sum(self.payments[tuple(profile)]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        n = self.env.agent_count
        writer.writerow([f"v{i}" for i in range(n)] + ["agent", "payment"])
        for v in self.env.profiles():
            for i, p in enumerate(self.payments[v]):
                writer.writerow(list(v) + [i, format_value(p)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, env: Environment, text: str) -> "PaymentTable":
        n = env.agent_count
        rows: dict = {}
        reader = csv.reader(io.StringIO(text))
        next(reader)
        for rec in reader:
            v = tuple(int(x) for x in rec[:n])
            rows.setdefault(v, [0] * n)[int(rec[n])] = as_value(rec[n + 1])
        return cls(env, rows)


def tabulate_mechanism(env: Environment, rule: OptionRule, payments: Callable,
                       cap: int = DEFAULT_PROFILE_CAP) -> PaymentTable:
    if env.profile_count > cap:
        raise CapacityError(f"{env.profile_count} profiles exceed the tabulation cap of {cap}")
    return PaymentTable(env, {v: payments(v) for v in env.profiles()})


def redistribute(env: Environment, table: PaymentTable) -> PaymentTable:
    """Apply the per-agent rebate recursion to a justified mechanism's payment table."""
    current = {v: list(tau) for v, tau in table.payments.items()}
    for t in range(env.agent_count):
        d = len(env.domains[t])
        rebates = {}
        for v in current:
            if v[t] != 0:
                continue
            slice_budgets = [sum(current[replace_type(v, t, k)]) for k in range(d)]
            rebates[v] = max(0, min(-b for b in slice_budgets))
        for v, tau in current.items():
            tau[t] = as_value(tau[t] + rebates[replace_type(v, t, 0)])
    return PaymentTable(env, current)
