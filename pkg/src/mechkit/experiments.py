"""Random budget comparisons against VCG-budget, sweeps, and the two demo environments.

Each instance draws from its own PCG64 stream seeded by
``SeedSequence(seed, spawn_key=(index,))`` (``(x, index)`` inside a sweep),
so results do not depend on worker count or evaluation order.  Draw order
within an instance: sizes (agents, options, domain size, each only if given as
a range), then valuations shaped (agent, type, option), then the profile.
"""
from __future__ import annotations

import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .audit import audit_mechanism
from .core import Environment, Profile, Value, as_value, check_profile, format_value
from .errors import AuditError, DominanceError, InputError
from .rules import OptionRule, quadratic_rule, se_rule
from .spm import compute_payments, payment_function, run_mechanism
from .vcg import clarke_payments, vcg_budget_payments

SWEEP_DEFAULTS = {"n": (1, 32), "m": (1, 256), "d": (1, 16)}
CSV_COLUMNS = ("instance", "n", "m", "d", "lo", "hi", "budget_proposed", "budget_vcgb", "diff")


def _check_size(name, size):
    lo, hi = (size, size) if isinstance(size, int) else size
    if lo < 1 or hi < lo:
        raise InputError(f"{name} must be >= 1 (got {size!r})")


@dataclass(frozen=True)
class ExperimentConfig:
    """Instance-generation parameters.

    Sizes are an int (fixed) or an inclusive ``(lo, hi)`` pair drawn
    uniformly per instance.  The defaults (16 agents, 1..256 options, 1..16
    types per agent, values in [-100, 100]) give a strict-improvement
    rate near 0.88; fixing options and types at their maxima gives
    markedly higher rates.  ``sweep`` names the size ("n", "m" or "d") that
    takes each value of ``sweep_values`` in turn, ``instances`` times each.
    """

    seed: int = 0
    instances: int = 1000
    agents: int | tuple = 16
    options: int | tuple = (1, 256)
    domain_size: int | tuple = (1, 16)
    value_range: tuple = (-100, 100)
    sweep: str | None = None
    sweep_values: tuple | None = None
    audit_every: int = 50
    audit_max_profiles: int = 10_000

    def __post_init__(self):
        if self.instances < 1:
            raise InputError("instances must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise InputError("seed must be a 64-bit unsigned integer")
        for name in ("agents", "options", "domain_size"):
            _check_size(name, getattr(self, name))
        lo, hi = self.value_range
        if lo > hi:
            raise InputError(f"value range [{lo}, {hi}] is empty")
        if self.sweep is not None:
            if self.sweep not in SWEEP_DEFAULTS:
                raise InputError(f"sweep must be one of {sorted(SWEEP_DEFAULTS)}")
            if self.sweep_values is None:
                a, b = SWEEP_DEFAULTS[self.sweep]
                object.__setattr__(self, "sweep_values", tuple(range(a, b + 1)))
            if any(x < 1 for x in self.sweep_values):
                raise InputError("sweep values must be >= 1")

    def at(self, x: int) -> "ExperimentConfig":
        """The fixed-size configuration for one sweep point."""
        field_name = {"n": "agents", "m": "options", "d": "domain_size"}[self.sweep]
        return replace(self, sweep=None, sweep_values=None, **{field_name: x})


def _draw_size(rng, size) -> int:
    if isinstance(size, int):
        return size
    return int(rng.integers(size[0], size[1] + 1))


def instance_rng(seed: int, index: int, point: int | None = None) -> np.random.Generator:
    key = (index,) if point is None else (point, index)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def generate_instance(config: ExperimentConfig, instance_index: int, point: int | None = None) -> tuple:
    """Deterministic random ``(env, profile)`` for one instance index."""
    if config.sweep is not None:
        if point is None:
            raise InputError("pass the sweep point when generating from a sweep config")
        config = config.at(point)
    rng = instance_rng(config.seed, instance_index, point)
    n = _draw_size(rng, config.agents)
    m = _draw_size(rng, config.options)
    d = _draw_size(rng, config.domain_size)
    lo, hi = config.value_range
    values = rng.integers(lo, hi + 1, size=(n, d, m), dtype=np.int64)
    profile = tuple(int(k) for k in rng.integers(0, d, size=n))
    return Environment.from_array(values), profile


@dataclass(frozen=True)
class BudgetComparison:
    proposed: Value
    vcg_budget: Value
    diff: Value
    payments_proposed: tuple = field(repr=False)
    payments_vcg_budget: tuple = field(repr=False)


def compare_budgets(env: Environment, profile: Profile, rule: OptionRule, mode: str = "auto") -> BudgetComparison:
    """Budgets of the shortest-path mechanism and VCG-budget under one rule.

    Raises :class:`DominanceError` if any payment ordering guarantee fails.
    """
    profile = check_profile(env, profile)
    star = compute_payments(env, rule, profile, mode)
    budget = vcg_budget_payments(env, rule, profile)
    for i, (a, b) in enumerate(zip(star, budget)):
        if a > b:
            raise DominanceError(f"agent {i} at {profile}: proposed payment {a} > VCG-budget payment {b}")
    if env.is_non_negative():
        clarke = clarke_payments(env, rule, profile)
        for i, (b, c) in enumerate(zip(budget, clarke)):
            if b > c:
                raise DominanceError(f"agent {i} at {profile}: VCG-budget payment {b} > Clarke payment {c}")
    b_star, b_budget = as_value(sum(star)), as_value(sum(budget))
    return BudgetComparison(b_star, b_budget, as_value(b_star - b_budget), star, budget)


def _spot_audit(env: Environment, rule: OptionRule) -> None:
    for payment in ("proposed", "vcg-budget"):
        found = audit_mechanism(env, rule, payment_function(env, rule, payment))
        bad = {k: v for k, v in found.items() if v}
        if bad:
            raise AuditError(f"{payment}: {sum(map(len, bad.values()))} violations, first {next(iter(bad.values()))[0]}")


def run_instance(config: ExperimentConfig, instance_index: int, point: int | None = None) -> dict:
    env, profile = generate_instance(config, instance_index, point)
    rule = se_rule(env)
    cmp = compare_budgets(env, profile, rule)
    if (config.audit_every and instance_index % config.audit_every == 0
            and env.profile_count <= config.audit_max_profiles):
        _spot_audit(env, rule)
    lo, hi = config.value_range
    return {
        "instance": instance_index,
        "n": env.agent_count,
        "m": env.option_count,
        "d": len(env.domains[0]),
        "lo": lo,
        "hi": hi,
        "budget_proposed": cmp.proposed,
        "budget_vcgb": cmp.vcg_budget,
        "diff": cmp.diff,
    }


@dataclass(frozen=True)
class ComparisonStats:
    diffs: tuple
    fraction_strict: Fraction
    mean_diff: Fraction
    stddev_diff: float
    count: int

    @classmethod
    def from_diffs(cls, diffs: Sequence[Value]) -> "ComparisonStats":
        diffs = tuple(diffs)
        count = len(diffs)
        mean = Fraction(sum(diffs)) / count
        var = sum((Fraction(x) - mean) ** 2 for x in diffs) / count
        return cls(diffs, Fraction(sum(1 for x in diffs if x < 0), count), mean, math.sqrt(var), count)

    def to_json(self, x=None) -> dict:
        return {
            "x": x,
            "mean_diff": format_value(self.mean_diff),
            "stddev_diff": self.stddev_diff,
            "fraction_strict": format_value(self.fraction_strict),
            "count": self.count,
        }


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list
    points: list            # [(x or None, ComparisonStats)]

    @property
    def stats(self) -> ComparisonStats:
        return self.points[0][1]

    def summary(self) -> list:
        return [s.to_json(x) for x, s in self.points]


def _run_chunk(args):
    config, point, indices = args
    return [run_instance(config, i, point) for i in indices]


def _chunks(seq, size):
    for start in range(0, len(seq), size):
        yield seq[start:start + size]


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> ExperimentResult:
    points = list(config.sweep_values) if config.sweep else [None]
    tasks = []
    for x in points:
        for chunk in _chunks(range(config.instances), 25):
            tasks.append((config, x, chunk))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_chunk, tasks))
    else:
        results = [_run_chunk(t) for t in tasks]
    rows, by_point = [], {}
    for (cfg, x, _), chunk_rows in zip(tasks, results):
        rows.extend(chunk_rows)
        by_point.setdefault(x, []).extend(r["diff"] for r in chunk_rows)
    return ExperimentResult(config, rows, [(x, ComparisonStats.from_diffs(by_point[x])) for x in points])


def rows_to_csv(rows: Sequence[dict]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for r in rows:
        lines.append(",".join(str(format_value(r[c])) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file in the same directory and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- demos -------------------------------------------------------------------

def vickrey_instance(prices: Sequence, bids: Sequence[int]) -> tuple:
    """Single-item auction: option j gives the item to agent j.

    ``bids[i]`` is the index into ``prices`` of agent i's bid; prices must be
    strictly decreasing and positive.
    """
    prices = [as_value(p) for p in prices]
    if not prices or any(p <= 0 for p in prices):
        raise InputError("prices must be non-empty and positive")
    if any(a <= b for a, b in zip(prices, prices[1:])):
        raise InputError("prices must be strictly decreasing")
    n = len(bids)
    if n < 1:
        raise InputError("need at least one bidder")
    domains = [[[p if j == i else 0 for j in range(n)] for p in prices] for i in range(n)]
    env = Environment.tabular(domains, n)
    return env, check_profile(env, bids)


def venue_instance(params: Sequence[Sequence], interval: Sequence) -> Environment:
    """Venue-location environment; ``params[i]`` lists agent i's (a, b, c) types."""
    from .core import ensure_valid
    return ensure_valid(Environment.quadratic([[tuple(t) for t in dom] for dom in params], tuple(interval)))


VICKREY_DEMO = {"prices": [5, 4, 3, 2, 1], "bids": [0, 2, 4]}
VENUE_DEMO = {"params": [[[1, 0, 0], [1, 4, 0]], [[1, 3, 0], [2, 6, 1]]], "interval": [0, 10], "profile": [1, 0]}


def run_demo(name: str, payment: str = "proposed") -> dict:
    if name == "vickrey":
        env, profile = vickrey_instance(VICKREY_DEMO["prices"], VICKREY_DEMO["bids"])
        rule = se_rule(env)
        doc = dict(VICKREY_DEMO)
    elif name == "venue":
        env = venue_instance(VENUE_DEMO["params"], VENUE_DEMO["interval"])
        profile = tuple(VENUE_DEMO["profile"])
        rule = quadratic_rule(env)
        doc = dict(VENUE_DEMO)
    else:
        raise InputError(f"unknown demo {name!r}; expected vickrey or venue")
    out = run_mechanism(env, rule, profile, payment)
    doc["outcome"] = out.to_json()
    return doc
