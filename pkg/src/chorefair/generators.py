"""Instance generation: seeded synthetic matrices, hardness-style instance
builders with ground-truth oracles, and JSON file I/O.

The PRNG is splitmix64 with a per-(seed, n, m, trial) stream key, so any cell
of an experiment grid can be regenerated bit-exactly in isolation and the
whole pipeline is reproducible across platforms and languages.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .core import (
    Allocation,
    DubiousAllocation,
    Instance,
    InvalidInputError,
    PriceVector,
)

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Deterministic 64-bit generator; `bernoulli` draws use the top 53 bits
    compared against a numerator over 2^53."""

    def __init__(self, state: int):
        self.state = state & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        return _mix(self.state)

    def bernoulli(self, threshold_num: int) -> bool:
        return (self.next_u64() >> 11) < threshold_num


def stream_key(seed: int, n: int, m: int, trial: int) -> int:
    # Role constants keep (n, m, trial) from colliding under xor.
    return (
        seed
        ^ _mix((n + _GOLDEN) & _MASK)
        ^ _mix((m + 2 * _GOLDEN) & _MASK)
        ^ _mix((trial + 3 * _GOLDEN) & _MASK)
    ) & _MASK


def p_to_threshold(p_neg: float) -> int:
    """Probability as an integer numerator over 2^53."""
    threshold = round(p_neg * (1 << 53))
    if not 0 <= threshold <= (1 << 53):
        raise InvalidInputError("p_neg must lie in [0, 1]")
    return threshold


@dataclass(frozen=True)
class SyntheticConfig:
    n: int
    m: int
    trials: int
    p_neg: float
    seed: int
    force_last_common: bool = True
    enforce_m_ge_n: bool = True

    def __post_init__(self):
        if self.n < 1 or self.m < 0 or self.trials < 1:
            raise InvalidInputError("n >= 1, m >= 0 and trials >= 1 required")
        if self.enforce_m_ge_n and self.m < self.n:
            raise InvalidInputError("grid cells require m >= n")
        p_to_threshold(self.p_neg)


def gen_synthetic(cfg: SyntheticConfig, trial: int) -> Instance:
    """Binary instance with each entry -1 independently with probability
    ``p_neg``; optionally the last column is forced to all -1."""
    rng = SplitMix64(stream_key(cfg.seed, cfg.n, cfg.m, trial))
    threshold = p_to_threshold(cfg.p_neg)
    rows = [
        [-1 if rng.bernoulli(threshold) else 0 for _ in range(cfg.m)]
        for _ in range(cfg.n)
    ]
    if cfg.force_last_common and cfg.m > 0:
        for row in rows:
            row[-1] = -1
    return Instance(tuple(tuple(row) for row in rows))


# ---------------------------------------------------------------------------
# Reduction-style generators.  Each returns the instance together with the
# source problem's answer so round-trip tests never re-derive ground truth.
# ---------------------------------------------------------------------------


def _partition_solvable(xs: Sequence[int]) -> bool:
    total = sum(xs)
    if total % 2:
        return False
    half = total // 2
    reachable = 1  # bitset over sums
    for x in xs:
        reachable |= reachable << x
    return bool(reachable >> half & 1)


def gen_from_partition(xs: Sequence[int], k: int) -> tuple[Instance, bool]:
    """Identical-valuation instance whose minimum over allocations is <= k
    exactly when the multiset splits into two equal-sum halves.

    2k+2 agents; one chore per element worth its negated value, plus k dummy
    chores worth minus half the total.  Odd totals (trivially unsolvable) are
    doubled so the half stays integral.
    """
    xs = [int(x) for x in xs]
    if not xs or any(x < 1 for x in xs):
        raise InvalidInputError("partition values must be positive integers")
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    answer = _partition_solvable(xs)
    if sum(xs) % 2:
        xs = [2 * x for x in xs]
    half = sum(xs) // 2
    row = tuple(-x for x in xs) + tuple([-half] * k)
    n_agents = 2 * k + 2
    inst = Instance(tuple(row for _ in range(n_agents)))
    return inst, answer


def _splittable(universe: Sequence, family: Sequence[frozenset]) -> bool:
    items = list(universe)
    for mask in range(1 << len(items)):
        left = {items[i] for i in range(len(items)) if mask >> i & 1}
        if all(
            (s & left) and (s - left) for s in family
        ):
            return True
    return False


def gen_from_setsplitting(
    universe: Sequence, family: Iterable, k: int
) -> tuple[Instance, bool]:
    """Binary instance admitting a DEF-k allocation exactly when the universe
    2-colors so that no family member is monochromatic.

    Layout: one chore per vertex plus r' = max(q, r, k) dummy chores; r' edge
    agents (short families padded with imaginary all-vertex edges), two color
    agents, and k dummy agents.
    """
    universe = list(universe)
    family = [frozenset(s) for s in family]
    if not universe or not family:
        raise InvalidInputError("universe and family must be nonempty")
    for s in family:
        if not s <= set(universe):
            raise InvalidInputError("family members must be subsets of the universe")
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    q, r = len(universe), len(family)
    r_prime = max(q, r, k)
    n_agents = r_prime + k + 2
    m_chores = q + r_prime
    rows = []
    for i in range(n_agents):
        row = []
        for j in range(q):  # vertex chores
            if i < r:
                row.append(-1 if universe[j] in family[i] else 0)
            elif i < r_prime:
                row.append(-1)  # imaginary edge adjacent to every vertex
            else:
                row.append(0)  # color and dummy agents
        row.extend([-1] * r_prime)  # dummy chores cost everyone
        rows.append(tuple(row))
    inst = Instance(tuple(rows))
    assert inst.m == m_chores
    return inst, _splittable(universe, family)


def gen_from_rx3c(
    universe: Sequence, subsets: Sequence[Iterable]
) -> tuple[Instance, Allocation, bool]:
    """Instance plus fixed allocation whose DEF-(|U|/3) verification answers
    exact cover by 3-sets.

    Agents: one chooser (agent 0) holding all subset chores, one agent per
    element holding its 4n dummy chores.  Every element agent envies the
    chooser by exactly 1, so k = |U|/3 copies at the chooser must jointly
    cover all elements.
    """
    universe = list(universe)
    subsets = [frozenset(s) for s in subsets]
    n = len(universe)
    if n == 0 or n % 3:
        raise InvalidInputError("universe size must be a positive multiple of 3")
    if len(subsets) != n:
        raise InvalidInputError("need exactly |universe| subsets")
    for s in subsets:
        if len(s) != 3 or not s <= set(universe):
            raise InvalidInputError("every subset must contain exactly 3 universe elements")
    for u in universe:
        if sum(1 for s in subsets if u in s) != 3:
            raise InvalidInputError("every element must appear in exactly 3 subsets")
    k_hat = n // 3
    m = 4 * n * n + n
    n_agents = n + 1

    def dummy_index(i: int, j: int, rep: int) -> int:
        # d^rep_{i,j}: agents/elements are 1-based in i, j; rep in 1..4
        return ((i - 1) * n + (j - 1)) * 4 + (rep - 1)

    rows = [[0] * m]  # the chooser values everything at 0
    for agent in range(1, n_agents):
        row = [0] * m
        for j in range(1, n + 1):
            for rep in range(1, 5):
                row[dummy_index(agent, j, rep)] = -1
        for s_idx, s in enumerate(subsets):
            if universe[agent - 1] in s:
                row[4 * n * n + s_idx] = -1
        rows.append(row)
    inst = Instance(tuple(tuple(row) for row in rows))

    owner = [0] * m
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            for rep in range(1, 5):
                owner[dummy_index(i, j, rep)] = j
    for s_idx in range(n):
        owner[4 * n * n + s_idx] = 0
    alloc = Allocation(tuple(owner))

    cover_exists = any(
        set().union(*combo) == set(universe)
        for combo in itertools.combinations(subsets, k_hat)
    )
    return inst, alloc, cover_exists


# ---------------------------------------------------------------------------
# File I/O.  JSON, integers only; prices serialize as [numerator, denominator].
# ---------------------------------------------------------------------------


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: malformed JSON at line {exc.lineno}: {exc.msg}")


def read_instance(path: str) -> Instance:
    data = _load_json(path)
    if "valuations" not in data:
        raise InvalidInputError(f"{path}: missing 'valuations' field")
    vals = data["valuations"]
    if not isinstance(vals, list) or not all(isinstance(r, list) for r in vals):
        raise InvalidInputError(f"{path}: 'valuations' must be a list of rows")
    for i, row in enumerate(vals):
        for c, v in enumerate(row):
            if not isinstance(v, int) or isinstance(v, bool):
                raise InvalidInputError(
                    f"{path}: valuations[{i}][{c}] must be an integer, got {v!r}"
                )
    labels_a = data.get("agents")
    labels_c = data.get("chores")
    try:
        return Instance(
            tuple(tuple(row) for row in vals),
            tuple(labels_a) if labels_a is not None else None,
            tuple(labels_c) if labels_c is not None else None,
        )
    except InvalidInputError as exc:
        raise InvalidInputError(f"{path}: {exc}")


def write_instance(inst: Instance, path: str) -> None:
    data: dict = {"valuations": [list(row) for row in inst.values]}
    if inst.agent_labels is not None:
        data["agents"] = list(inst.agent_labels)
    if inst.chore_labels is not None:
        data["chores"] = list(inst.chore_labels)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")


def read_allocation(path: str, inst: Optional[Instance] = None) -> Allocation:
    data = _load_json(path)
    if "assignment" not in data:
        raise InvalidInputError(f"{path}: missing 'assignment' field")
    assignment = data["assignment"]
    if not isinstance(assignment, list):
        raise InvalidInputError(f"{path}: 'assignment' must be a list")
    for c, a in enumerate(assignment):
        if not isinstance(a, int) or isinstance(a, bool) or a < 0:
            raise InvalidInputError(
                f"{path}: assignment[{c}] must be a nonnegative integer, got {a!r}"
            )
    alloc = Allocation(tuple(assignment))
    if inst is not None:
        if alloc.m != inst.m:
            raise InvalidInputError(
                f"{path}: assignment covers {alloc.m} chores, instance has {inst.m}"
            )
        for c, a in enumerate(assignment):
            if a >= inst.n:
                raise InvalidInputError(
                    f"{path}: assignment[{c}] = {a} out of range for {inst.n} agents"
                )
    return alloc


def write_allocation(alloc: Allocation, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"assignment": list(alloc.owner)}, fh)
        fh.write("\n")


def read_witness(path: str, inst: Optional[Instance] = None) -> DubiousAllocation:
    data = _load_json(path)
    if "copies" not in data:
        raise InvalidInputError(f"{path}: missing 'copies' field")
    entries = []
    for idx, item in enumerate(data["copies"]):
        if not isinstance(item, dict):
            raise InvalidInputError(f"{path}: copies[{idx}] must be an object")
        try:
            chore, agent = item["chore"], item["agent"]
        except KeyError as exc:
            raise InvalidInputError(f"{path}: copies[{idx}] missing field {exc}")
        count = item.get("count", 1)
        for name, v in (("chore", chore), ("agent", agent), ("count", count)):
            if not isinstance(v, int) or isinstance(v, bool):
                raise InvalidInputError(
                    f"{path}: copies[{idx}].{name} must be an integer, got {v!r}"
                )
        entries.append((chore, agent, count))
    try:
        witness = DubiousAllocation(tuple(entries))
    except InvalidInputError as exc:
        raise InvalidInputError(f"{path}: {exc}")
    if inst is not None:
        for chore, agent, _ in witness.copies:
            if chore >= inst.m or agent >= inst.n:
                raise InvalidInputError(
                    f"{path}: copy ({chore} -> agent {agent}) out of range"
                )
    return witness


def write_witness(witness: DubiousAllocation, path: str) -> None:
    data = {
        "copies": [
            {"chore": c, "agent": a, "count": count} for c, a, count in witness.copies
        ]
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh)
        fh.write("\n")


def read_prices(path: str, inst: Optional[Instance] = None) -> PriceVector:
    data = _load_json(path)
    if "prices" not in data:
        raise InvalidInputError(f"{path}: missing 'prices' field")
    out = []
    for idx, item in enumerate(data["prices"]):
        if isinstance(item, int) and not isinstance(item, bool):
            out.append(Fraction(item))
        elif (
            isinstance(item, list)
            and len(item) == 2
            and all(isinstance(x, int) and not isinstance(x, bool) for x in item)
        ):
            if item[1] == 0:
                raise InvalidInputError(f"{path}: prices[{idx}] has zero denominator")
            out.append(Fraction(item[0], item[1]))
        else:
            raise InvalidInputError(
                f"{path}: prices[{idx}] must be an integer or [num, den] pair"
            )
    pv = PriceVector(tuple(out))
    if inst is not None and pv.m != inst.m:
        raise InvalidInputError(
            f"{path}: {pv.m} prices for an instance with {inst.m} chores"
        )
    return pv


def write_prices(prices: PriceVector, path: str) -> None:
    data = {"prices": [[f.numerator, f.denominator] for f in prices.p]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh)
        fh.write("\n")
