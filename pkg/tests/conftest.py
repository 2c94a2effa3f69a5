"""Shared fixtures: the worked examples used across the suite and a seeded
instance sampler."""

from __future__ import annotations

import random

import pytest

from chorefair import Allocation, Instance


def housemates() -> tuple[Instance, Allocation]:
    """Three housemates split laundry/trash/vacuuming; the diagonal allocation
    is EF1 but not EF, and a single dubious copy of vacuuming fixes it."""
    inst = Instance(
        (
            (-1, -1, -1),
            (-1, -2, -3),
            (-1, -3, -3),
        ),
        agent_labels=("Ali", "Bo", "Chan"),
        chore_labels=("laundry", "trash", "vacuuming"),
    )
    return inst, Allocation((0, 1, 2))


def single_heavy_chore(n: int) -> tuple[Instance, Allocation]:
    """n identical agents, n-1 unit chores and one chore costing n; diagonal
    allocation.  The heavy chore's holder envies everyone by n-1."""
    row = tuple(-1 if c < n - 1 else -n for c in range(n))
    inst = Instance(tuple(row for _ in range(n)))
    return inst, Allocation(tuple(range(n)))


def own_chore_only(n: int) -> tuple[Instance, Allocation]:
    """Agent i dislikes only chore i; the diagonal allocation makes everyone
    envy everyone and needs n(n-1) copies."""
    inst = Instance(
        tuple(tuple(-1 if i == c else 0 for c in range(n)) for i in range(n))
    )
    return inst, Allocation(tuple(range(n)))


def def2_not_ef1() -> tuple[Instance, Allocation]:
    """3 agents, 4 chores; fixable with two copies at agent 2 but not EF1."""
    inst = Instance(
        (
            (-2, -1, 0, -3),
            (-1, -1, -1, -1),
            (-1, -1, -1, -1),
        )
    )
    return inst, Allocation((0, 0, 1, 2))


def random_instance(rng: random.Random, n_max: int, m_max: int, low: int) -> Instance:
    n = rng.randint(1, n_max)
    m = rng.randint(0, m_max)
    return Instance(
        tuple(tuple(rng.randint(low, 0) for _ in range(m)) for _ in range(n))
    )


def random_allocation(rng: random.Random, inst: Instance) -> Allocation:
    return Allocation(tuple(rng.randrange(inst.n) for _ in range(inst.m)))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xC0FFEE)
