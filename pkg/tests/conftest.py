import numpy as np
import pytest

from budget_builder.detect import BuilderGraph


def gnp_edges(rng, n, p):
    return [
        (u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p
    ]


def gnm_edges(rng, n, m):
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    idx = rng.permutation(len(pairs))[:m]
    return [pairs[i] for i in idx]


def builder_from(n, edges):
    g = BuilderGraph(n)
    for u, v in edges:
        g.insert_edge(u, v)
    return g


@pytest.fixture
def rng():
    return np.random.default_rng(0xBEEF)


class FakeState:
    """Minimal stand-in for ProcessState when driving strategies by hand."""

    def __init__(self, n):
        self.clock = 0
        self.budget_used = 0
        self.purchased = BuilderGraph(n)


def drive(strategy, n, edges, budget):
    """Feed a fixed edge sequence to a strategy; returns (decisions, state)."""
    from budget_builder.process import Edge

    state = FakeState(n)
    decisions = []
    for u, v in edges:
        state.clock += 1
        buy = strategy.decide(state, Edge(u, v))
        decisions.append(buy)
        if buy:
            assert state.budget_used < budget, "budget contract violated"
            state.purchased.insert_edge(u, v)
            state.budget_used += 1
    return decisions, state
