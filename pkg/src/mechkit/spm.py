"""Shortest-path payments: the tightest DSIC + IR payments for a fixed option rule.

For agent ``i`` and the others' types ``v_-i`` the type graph has a source
``STAR`` and one vertex per type of ``i``.  With ``o(k) = rule(k, v_-i)``::

    c(STAR, k) = v_k(o(k))
    c(k1, k2)  = v_k2(o(k2)) - v_k2(o(k1))

and the agent is paid minus the shortest distance from ``STAR`` to its
reported type.  Vertices sharing an option are joined by zero-weight edges
both ways, so they can be merged into one vertex per option (the contracted
graph) without changing any distance.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .core import (Environment, MechanismOutcome, Option, Profile, Value, as_value,
                   assemble_outcome, check_profile, value_str)
from .errors import InputError, NegativeCycleError
from .rules import OptionRule
from . import vcg

STAR = "*"


@dataclass(frozen=True)
class TypeGraph:
    """Complete type graph of one agent; vertex ``k`` is the agent's k-th type."""

    agent: int
    options: tuple          # o(k) for every type k
    star_weights: tuple     # c(STAR, k)
    weights: tuple          # weights[k1][k2] = c(k1, k2), diagonal included

    @property
    def vertices(self) -> tuple:
        return tuple(range(len(self.options)))

    @property
    def labels(self) -> list:
        return [f"type{k}" for k in self.vertices]

    def vertex_of(self, type_index: int) -> int:
        return type_index

    def edges(self):
        for k, w in enumerate(self.star_weights):
            yield STAR, k, w
        for k1, row in enumerate(self.weights):
            for k2, w in enumerate(row):
                yield k1, k2, w


@dataclass(frozen=True)
class ContractedGraph:
    """Type graph with the types merged by selected option."""

    agent: int
    options: tuple          # vertex j stands for option options[j]
    type_vertex: tuple      # type index -> vertex index
    star_weights: tuple
    weights: tuple

    @property
    def vertices(self) -> tuple:
        return tuple(range(len(self.options)))

    @property
    def labels(self) -> list:
        return [f"option{value_str(x)}" for x in self.options]

    def vertex_of(self, type_index: int) -> int:
        return self.type_vertex[type_index]

    def edges(self):
        for j, w in enumerate(self.star_weights):
            yield STAR, j, w
        for j1, row in enumerate(self.weights):
            for j2, w in enumerate(row):
                yield j1, j2, w


def build_type_graph(env: Environment, rule: OptionRule, agent: int, profile: Profile) -> TypeGraph:
    profile = check_profile(env, profile)
    options = rule.deviation_options(profile, agent)
    # vals[k][k'] = v_k(o(k'))
    vals = env.valuation_matrix(agent, options)
    d = len(options)
    star = tuple(as_value(vals[k][k]) for k in range(d))
    weights = tuple(tuple(as_value(vals[k2][k2] - vals[k2][k1]) for k2 in range(d)) for k1 in range(d))
    return TypeGraph(agent, tuple(options), star, weights)


def _groups(options: Sequence[Option]):
    distinct = sorted(set(options))
    index = {x: j for j, x in enumerate(distinct)}
    return distinct, tuple(index[x] for x in options)


def contract_graph(graph: TypeGraph) -> ContractedGraph:
    """Merge the vertices of a full type graph that share a selected option.

    Parallel edges collapse to their minimum weight.
    """
    distinct, type_vertex = _groups(graph.options)
    n = len(distinct)
    star = [None] * n
    weights = [[None] * n for _ in range(n)]
    for k2, j2 in enumerate(type_vertex):
        if star[j2] is None or graph.star_weights[k2] < star[j2]:
            star[j2] = graph.star_weights[k2]
        for k1, j1 in enumerate(type_vertex):
            w = graph.weights[k1][k2]
            if weights[j1][j2] is None or w < weights[j1][j2]:
                weights[j1][j2] = w
    return ContractedGraph(graph.agent, tuple(distinct), type_vertex, tuple(star),
                           tuple(tuple(row) for row in weights))


def build_contracted_graph(env: Environment, rule: OptionRule, agent: int,
                           profile: Profile) -> ContractedGraph:
    """Contracted graph built directly, evaluating each type only at the n_i distinct options."""
    profile = check_profile(env, profile)
    options = rule.deviation_options(profile, agent)
    distinct, type_vertex = _groups(options)
    vals = env.valuation_matrix(agent, distinct)
    n = len(distinct)
    star = [None] * n
    weights = [[None] * n for _ in range(n)]
    for k, j2 in enumerate(type_vertex):
        row = vals[k]
        own = row[j2]
        if star[j2] is None or own < star[j2]:
            star[j2] = own
        for j1 in range(n):
            w = own - row[j1]
            if weights[j1][j2] is None or w < weights[j1][j2]:
                weights[j1][j2] = w
    return ContractedGraph(agent, tuple(distinct), type_vertex,
                           tuple(as_value(x) for x in star),
                           tuple(tuple(as_value(x) for x in row) for row in weights))


def shortest_distances(graph, source=STAR) -> list:
    """Bellman-Ford distances from ``source`` to every non-star vertex.

    ``None`` marks an unreachable vertex (only possible from a non-star
    source).  Raises :class:`NegativeCycleError` if a negative cycle exists.
    """
    n = len(graph.star_weights)
    weights = graph.weights
    if source == STAR:
        dist = list(graph.star_weights)
    else:
        if not 0 <= source < n:
            raise InputError(f"unknown source vertex {source!r}")
        dist = [None] * n
        dist[source] = 0
    # The star round is already done; n - 1 more rounds settle every simple path.
    for _ in range(n):
        changed = False
        for u in range(n):
            du = dist[u]
            if du is None:
                continue
            row = weights[u]
            for t in range(n):
                cand = du + row[t]
                if dist[t] is None or cand < dist[t]:
                    dist[t] = cand
                    changed = True
        if not changed:
            return dist
    raise NegativeCycleError(getattr(graph, "agent", None))


def shortest_distance(graph, source, target) -> Value:
    if target == STAR:
        raise InputError("no edge enters the star vertex")
    if not 0 <= target < len(graph.star_weights):
        raise InputError(f"unknown target vertex {target!r}")
    d = shortest_distances(graph, source)[target]
    if d is None:
        raise InputError(f"vertex {target} is unreachable from {source}")
    return as_value(d)


MODES = ("full", "contracted", "auto")


def agent_graph(env: Environment, rule: OptionRule, agent: int, profile: Profile, mode: str = "auto"):
    if mode not in MODES:
        raise InputError(f"unknown mode {mode!r}; expected one of {MODES}")
    if mode == "full":
        return build_type_graph(env, rule, agent, profile)
    graph = build_contracted_graph(env, rule, agent, profile)
    if mode == "auto" and len(graph.options) >= len(env.domains[agent]):
        return build_type_graph(env, rule, agent, profile)
    return graph


def agent_payment(env: Environment, rule: OptionRule, agent: int, profile: Profile,
                  mode: str = "auto") -> Value:
    graph = agent_graph(env, rule, agent, profile, mode)
    try:
        dist = shortest_distances(graph)
    except NegativeCycleError:
        raise NegativeCycleError(agent) from None
    return as_value(-dist[graph.vertex_of(profile[agent])])


def compute_payments(env: Environment, rule: OptionRule, profile: Profile, mode: str = "auto") -> tuple:
    """Shortest-path payments for every agent at ``profile``.

    Graphs are built per agent and discarded; only the rule's memo persists.
    """
    profile = check_profile(env, profile)
    return tuple(agent_payment(env, rule, i, profile, mode) for i in range(env.agent_count))


def graph_to_dot(graph, name: str = "G") -> str:
    """Graphviz DOT text of a type graph, edge labels as exact rationals."""
    labels = graph.labels
    lines = [f"digraph {name} {{", f'  star [label="*"];']
    for v, label in zip(graph.vertices, labels):
        lines.append(f'  v{v} [label="{label}"];')
    for s, t, w in graph.edges():
        src = "star" if s == STAR else f"v{s}"
        lines.append(f'  {src} -> v{t} [label="{value_str(w)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def zero_payments(env: Environment, rule: OptionRule, profile: Profile) -> tuple:
    return (0,) * env.agent_count


def first_price_payments(env: Environment, rule: OptionRule, profile: Profile) -> tuple:
    """Every agent pays its reported value of the chosen option."""
    option = rule(profile)
    return tuple(as_value(-env.value(i, k, option)) for i, k in enumerate(profile))


PAYMENT_RULES = ("proposed", "clarke", "vcg-budget", "ama", "weighted-budget", "zero", "first-price")


def payment_function(env: Environment, rule: OptionRule, payment: str, mode: str = "auto") -> Callable:
    """Return ``profile -> payments`` for a named payment rule."""
    if payment == "proposed":
        return lambda v: compute_payments(env, rule, v, mode)
    if payment == "clarke":
        return lambda v: vcg.clarke_payments(env, rule, v)
    if payment == "vcg-budget":
        return lambda v: vcg.vcg_budget_payments(env, rule, v)
    if payment == "ama":
        return lambda v: vcg.weighted_vcg_payments(env, rule, v, "ama")
    if payment == "weighted-budget":
        return lambda v: vcg.weighted_vcg_payments(env, rule, v, "budget")
    if payment == "zero":
        return lambda v: zero_payments(env, rule, v)
    if payment == "first-price":
        return lambda v: first_price_payments(env, rule, v)
    raise InputError(f"unknown payment rule {payment!r}; expected one of {PAYMENT_RULES}")


def run_mechanism(env: Environment, rule: OptionRule, profile: Profile,
                  payment: str = "proposed", mode: str = "auto") -> MechanismOutcome:
    profile = check_profile(env, profile)
    payments = payment_function(env, rule, payment, mode)(profile)
    return assemble_outcome(env, profile, rule(profile), payments)
