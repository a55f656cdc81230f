"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also printed in the terminal summary.
"""
import random
import time
from fractions import Fraction

import pytest

from mechkit import AffineWeights, Environment, NegativeCycleError, affine_rule, compute_payments, se_rule
from mechkit.audit import check_dsic, check_ir, check_se, oracle_min_payment
from mechkit.core import replace_type
from mechkit.experiments import ExperimentConfig, compare_budgets, generate_instance, run_experiment, vickrey_instance
from mechkit.redistribution import redistribute, tabulate_mechanism
from mechkit.rules import expected_budget_uniform, optimize_option_rule, table_rule
from mechkit.spm import payment_function
from mechkit.vcg import vcg_budget_payments

from conftest import example1, rule_a, rule_b, vickrey_closed_form

RESULTS = []


def report(number, ok, detail, elapsed=None):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    if elapsed is not None:
        line += f"  [{elapsed:.3f}s]"
    RESULTS.append(line)
    print(line)
    assert ok, line


def best_time(fn, repeat=20):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


def random_env(rng, n_max, m_max, d_max, lo=-8, hi=8, non_negative=False):
    n, m = rng.randint(1, n_max), rng.randint(1, m_max)
    if non_negative:
        lo = 0
    domains = [[[rng.randint(lo, hi) for _ in range(m)] for _ in range(rng.randint(1, d_max))]
               for _ in range(n)]
    return Environment.tabular(domains, m)


def full_equals_contracted(env, rule, profiles):
    return all(compute_payments(env, rule, v, "full") == compute_payments(env, rule, v, "contracted")
               for v in profiles)


# instances from criteria 2-4 are reused by criterion 5
CONTRACTION_CASES = []


def test_criterion_01_example1_golden():
    def payments():
        env = example1(1)
        return (compute_payments(env, rule_a(env), (0, 0)), compute_payments(env, rule_b(env), (0, 0)),
                vcg_budget_payments(env, rule_a(env), (0, 0)))
    (a, b, vb), elapsed = best_time(payments)
    ok = a == (1, 0) and b == (-1, 0) and vb == (2, 0) and elapsed < 1e-3
    report(1, ok, f"rule(a) {a}, rule(b) {b}, VCG-budget {vb}", elapsed)


def test_criterion_02_vickrey():
    rng = random.Random(2)
    t0 = time.perf_counter()
    bad = []
    for _ in range(500):
        d = rng.randint(2, 8)
        prices = sorted(rng.sample(range(1, 100), d), reverse=True)
        bids = [rng.randrange(d) for _ in range(rng.randint(2, 6))]
        env, v = vickrey_instance(prices, bids)
        rule = se_rule(env)
        if compute_payments(env, rule, v) != vickrey_closed_form(prices, bids):
            bad.append((prices, bids))
        CONTRACTION_CASES.append((env, rule, [v]))
    elapsed = time.perf_counter() - t0
    report(2, not bad and elapsed < 5, f"500 auctions, {len(bad)} mismatches", elapsed)


def test_criterion_03_justification():
    rng = random.Random(3)
    t0 = time.perf_counter()
    violations = 0
    for _ in range(200):
        env = random_env(rng, 4, 6, 4)
        rule = se_rule(env)
        violations += len(check_se(env, rule))
        for payment in ("proposed", "vcg-budget"):
            pay = payment_function(env, rule, payment)
            violations += len(check_dsic(env, rule, pay)) + len(check_ir(env, rule, pay))
        weights = AffineWeights([Fraction(rng.randint(1, 9), rng.randint(1, 4)) for _ in range(env.agent_count)],
                                [rng.randint(-4, 4) for _ in range(env.option_count)])
        arule = affine_rule(env, weights)
        pay = payment_function(env, arule, "proposed")
        violations += len(check_dsic(env, arule, pay)) + len(check_ir(env, arule, pay))
        CONTRACTION_CASES.append((env, rule, list(env.profiles())))
        CONTRACTION_CASES.append((env, arule, list(env.profiles())))
    elapsed = time.perf_counter() - t0
    report(3, violations == 0 and elapsed < 30, f"200 environments, {violations} violations", elapsed)


def test_criterion_04_oracle():
    rng = random.Random(4)
    t0 = time.perf_counter()
    mismatches = checked = 0
    for _ in range(200):
        env = random_env(rng, 3, 5, 6)
        rule = se_rule(env)
        for v in env.profiles():
            tau = compute_payments(env, rule, v)
            for i in range(env.agent_count):
                checked += 1
                mismatches += tau[i] != -oracle_min_payment(env, rule, i, v)
        CONTRACTION_CASES.append((env, rule, list(env.profiles())))
    elapsed = time.perf_counter() - t0
    report(4, mismatches == 0 and elapsed < 60, f"{checked} agent-profiles, {mismatches} mismatches", elapsed)


def test_criterion_05_contraction():
    if not CONTRACTION_CASES:
        test_criterion_02_vickrey()
        test_criterion_03_justification()
        test_criterion_04_oracle()
    t0 = time.perf_counter()
    bad = sum(not full_equals_contracted(env, rule, profiles) for env, rule, profiles in CONTRACTION_CASES)
    report(5, bad == 0, f"{len(CONTRACTION_CASES)} instances, {bad} differ", time.perf_counter() - t0)


def test_criterion_06_dominance():
    rng = random.Random(6)
    t0 = time.perf_counter()
    checked = 0
    for k in range(200):
        env = random_env(rng, 4, 6, 4, non_negative=k % 2 == 0)
        rule = se_rule(env)
        for v in env.profiles():
            compare_budgets(env, v, rule)  # raises on any violated ordering
            checked += 1
    cfg = ExperimentConfig(seed=6, instances=200, agents=(1, 16), options=(1, 64), domain_size=(1, 8))
    run_experiment(cfg)
    checked += cfg.instances
    report(6, True, f"{checked} comparisons, orderings hold", time.perf_counter() - t0)


REPRODUCTION = [
    ("n=16", dict(agents=16), 0.883),
    ("n=8", dict(agents=8), 0.911),
    ("n=32", dict(agents=32), 0.849),
    ("range +-1", dict(agents=16, value_range=(-1, 1)), 0.716),
]


@pytest.mark.slow
@pytest.mark.parametrize("label,kwargs,target", REPRODUCTION, ids=[r[0] for r in REPRODUCTION])
def test_criterion_07_reproduction(label, kwargs, target):
    # options and types per agent drawn per instance from 1..256 and 1..16
    cfg = ExperimentConfig(seed=1, instances=1000, **kwargs)
    t0 = time.perf_counter()
    result = run_experiment(cfg, jobs=1)
    elapsed = time.perf_counter() - t0
    rate = float(result.stats.fraction_strict)
    ok = abs(rate - target) <= 0.05 and elapsed <= 20 * 60
    report(7, ok, f"{label}: fraction_strict {rate:.3f} vs {target} (+-0.05)", elapsed)


@pytest.mark.slow
def test_criterion_07_per_instance_time():
    cfg = ExperimentConfig(seed=1, instances=20, agents=16, options=256, domain_size=16)
    worst = 0.0
    for idx in range(cfg.instances):
        env, v = generate_instance(cfg, idx)
        t0 = time.perf_counter()
        compare_budgets(env, v, se_rule(env))
        worst = max(worst, time.perf_counter() - t0)
    report(7, worst <= 1.0, f"worst per-instance time at n=16 m=256 d=16: {worst:.3f}s")


def test_criterion_08_redistribution():
    rng = random.Random(8)
    t0 = time.perf_counter()
    failures = 0
    for _ in range(100):
        env = random_env(rng, 3, 4, 3)
        rule = se_rule(env)
        table = tabulate_mechanism(env, rule, payment_function(env, rule, "proposed"))
        out = redistribute(env, table)
        for v in env.profiles():
            failures += any(a > b for a, b in zip(table(v), out(v)))
            failures += out.budget(v) > max(0, table.budget(v))
            for i in range(env.agent_count):
                failures += max(out.budget(replace_type(v, i, k)) for k in range(len(env.domains[i]))) < 0
        failures += len(check_dsic(env, rule, out)) + len(check_ir(env, rule, out))
        failures += redistribute(env, out) != out
    elapsed = time.perf_counter() - t0
    report(8, failures == 0 and elapsed < 30, f"100 environments, {failures} failures", elapsed)


def test_criterion_09_negative_cycle_guard():
    rng = random.Random(9)
    raised = 0
    for _ in range(200):
        env = random_env(rng, 3, 5, 5)
        weights = AffineWeights([rng.randint(1, 5) for _ in range(env.agent_count)],
                                [rng.randint(-3, 3) for _ in range(env.option_count)])
        for rule in (se_rule(env), affine_rule(env, weights)):
            for v in env.profiles():
                try:
                    compute_payments(env, rule, v)
                except NegativeCycleError:
                    raised += 1
    env = example1()
    corrupted = table_rule(env, {(0, 0): 2, (1, 0): 0})
    try:
        compute_payments(env, corrupted, (0, 0))
        caught = bool(check_se(env, corrupted))
    except NegativeCycleError:
        caught = True
    report(9, raised == 0 and caught, f"efficient rules raised {raised} times, corrupted rule caught: {caught}")


def test_criterion_10_improper_search():
    env = example1()

    def search():
        return optimize_option_rule(env, "expected")
    (rule, aggregate), elapsed = best_time(search)
    x2 = expected_budget_uniform([sum(compute_payments(env, rule_a(env), v)) for v in env.profiles()])
    ok = rule((1, 0)) == 2 and aggregate < x2 and elapsed < 1e-3
    report(10, ok, f"chosen option at (v_A2, v_B): X_{rule((1, 0)) + 1}, aggregate {aggregate} < {x2}", elapsed)
