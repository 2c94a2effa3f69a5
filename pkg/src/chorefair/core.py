"""Domain types and fairness/efficiency/equilibrium predicates for chore allocation.

Valuations are nonpositive integers (chores only) and all arithmetic is exact:
plain ints for values and envy, :class:`fractions.Fraction` for prices.  Every
type is immutable after construction and every operation is a pure function.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Sequence


class InvalidInputError(ValueError):
    """Raised when inputs violate a documented precondition or invariant."""


class BudgetExceededError(RuntimeError):
    """Raised when an exact computation would exceed its configured budget."""


class AlgorithmBugError(RuntimeError):
    """Raised from states that are provably unreachable; indicates a defect."""


class Variant(str, Enum):
    """Dubious-witness flavor: unrestricted, singly (each source copied at most
    once overall), or personalized (copies only of the target's own chores)."""

    DEF = "def"
    SDEF = "sdef"
    PDEF = "pdef"


def _as_int(x, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise InvalidInputError(f"{what} must be an integer, got {x!r}")
    return x


@dataclass(frozen=True)
class Instance:
    """A chore-division instance: n agents, m chores, nonpositive integer values.

    ``values[i][c]`` is agent ``i``'s utility for chore ``c`` (always <= 0).
    """

    values: tuple[tuple[int, ...], ...]
    agent_labels: Optional[tuple[str, ...]] = None
    chore_labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.values)
        object.__setattr__(self, "values", rows)
        if len(rows) < 1:
            raise InvalidInputError("instance needs at least one agent")
        m = len(rows[0])
        for i, row in enumerate(rows):
            if len(row) != m:
                raise InvalidInputError(
                    f"valuation matrix is ragged: row {i} has {len(row)} entries, expected {m}"
                )
            for c, v in enumerate(row):
                _as_int(v, f"valuation [agent {i}][chore {c}]")
                if v > 0:
                    raise InvalidInputError(
                        f"nonpositive valuations required: [agent {i}][chore {c}] = {v}"
                    )
        if self.agent_labels is not None:
            object.__setattr__(self, "agent_labels", tuple(self.agent_labels))
            if len(self.agent_labels) != len(rows):
                raise InvalidInputError("agent_labels length must equal agent count")
        if self.chore_labels is not None:
            object.__setattr__(self, "chore_labels", tuple(self.chore_labels))
            if len(self.chore_labels) != m:
                raise InvalidInputError("chore_labels length must equal chore count")

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def m(self) -> int:
        return len(self.values[0])

    def value(self, agent: int, chore: int) -> int:
        return self.values[agent][chore]

    def bundle_value(self, agent: int, chores: Iterable[int]) -> int:
        row = self.values[agent]
        return sum(row[c] for c in chores)


@dataclass(frozen=True)
class ValuationClass:
    """Flags for the restricted valuation classes an instance belongs to.

    Flags are independent: an all-(-1) matrix is identical, binary and
    (degenerately) bivalued at the same time.  ``bivalued`` reports ``(x, y)``
    with ``x <= y < 0``; ``x == y`` marks the degenerate single-value case.
    ``two_types`` reports a partition of the chores into two groups within
    which every agent's values are constant.
    """

    identical: bool
    binary: bool
    bivalued: Optional[tuple[int, int]] = None
    two_types: Optional[tuple[tuple[int, ...], tuple[int, ...]]] = None

    @property
    def general(self) -> bool:
        return not (self.identical or self.binary or self.bivalued or self.two_types)


@dataclass(frozen=True)
class Allocation:
    """Assignment of every chore to exactly one agent: ``owner[c]`` holds chore ``c``."""

    owner: tuple[int, ...]

    def __post_init__(self):
        owner = tuple(self.owner)
        object.__setattr__(self, "owner", owner)
        for c, a in enumerate(owner):
            _as_int(a, f"owner of chore {c}")
            if a < 0:
                raise InvalidInputError(f"owner of chore {c} is negative")

    @property
    def m(self) -> int:
        return len(self.owner)

    def bundles(self, n: int) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(n)]
        for c, a in enumerate(self.owner):
            out[a].append(c)
        return tuple(tuple(b) for b in out)


@dataclass(frozen=True)
class DubiousAllocation:
    """Multiset of dubious copies: ``(source chore, target agent, multiplicity)``.

    Entries are normalized (sorted, same-pair multiplicities merged).  The
    witness size ``k`` is the sum of multiplicities.
    """

    copies: tuple[tuple[int, int, int], ...] = ()

    def __post_init__(self):
        merged: dict[tuple[int, int], int] = {}
        for entry in self.copies:
            chore, agent, count = entry
            _as_int(chore, "copy source chore")
            _as_int(agent, "copy target agent")
            _as_int(count, "copy multiplicity")
            if chore < 0 or agent < 0:
                raise InvalidInputError(f"copy indices must be nonnegative: {entry}")
            if count < 1:
                raise InvalidInputError(f"copy multiplicity must be >= 1: {entry}")
            merged[(chore, agent)] = merged.get((chore, agent), 0) + count
        normalized = tuple(
            (chore, agent, merged[(chore, agent)]) for chore, agent in sorted(merged)
        )
        object.__setattr__(self, "copies", normalized)

    @property
    def size(self) -> int:
        return sum(count for _, _, count in self.copies)

    def contains(self, other: "DubiousAllocation") -> bool:
        ours = {(c, a): k for c, a, k in self.copies}
        return all(ours.get((c, a), 0) >= k for c, a, k in other.copies)


EMPTY_WITNESS = DubiousAllocation()


def validate_allocation(inst: Instance, alloc: Allocation) -> None:
    if alloc.m != inst.m:
        raise InvalidInputError(
            f"allocation covers {alloc.m} chores, instance has {inst.m}"
        )
    for c, a in enumerate(alloc.owner):
        if a >= inst.n:
            raise InvalidInputError(
                f"owner of chore {c} is {a}, out of range for {inst.n} agents"
            )


def validate_witness(inst: Instance, witness: DubiousAllocation) -> None:
    for chore, agent, _ in witness.copies:
        if chore >= inst.m:
            raise InvalidInputError(f"copy source chore {chore} out of range")
        if agent >= inst.n:
            raise InvalidInputError(f"copy target agent {agent} out of range")


@dataclass(frozen=True)
class AugmentedView:
    """Perceived bundle values after grafting dubious copies onto an allocation.

    ``perceived[i][h]`` is what agent ``i`` believes bundle ``h`` is worth:
    copies at ``h`` cost ``h`` itself nothing but count at face value for
    everyone else.
    """

    allocation: Allocation
    witness: DubiousAllocation
    perceived: tuple[tuple[int, ...], ...] = field(default=())

    @staticmethod
    def build(inst: Instance, alloc: Allocation, witness: DubiousAllocation) -> "AugmentedView":
        validate_allocation(inst, alloc)
        validate_witness(inst, witness)
        base = [[0] * inst.n for _ in range(inst.n)]
        for c, a in enumerate(alloc.owner):
            for i in range(inst.n):
                base[i][a] += inst.values[i][c]
        for chore, agent, count in witness.copies:
            for i in range(inst.n):
                if i != agent:
                    base[i][agent] += count * inst.values[i][chore]
        return AugmentedView(alloc, witness, tuple(tuple(row) for row in base))

    def is_envy_free(self) -> bool:
        n = len(self.perceived)
        for i in range(n):
            own = self.perceived[i][i]
            for h in range(n):
                if h != i and self.perceived[i][h] > own:
                    return False
        return True


@dataclass(frozen=True)
class EnvyReport:
    """Pairwise envy matrix ``e[i][h] = max(v_i(A_h) - v_i(A_i), 0)`` and row totals."""

    e: tuple[tuple[int, ...], ...]
    totals: tuple[int, ...]

    def max_envy(self) -> int:
        return max((x for row in self.e for x in row), default=0)


@dataclass(frozen=True)
class PriceVector:
    """Positive exact-rational price per chore."""

    p: tuple[Fraction, ...]

    def __post_init__(self):
        prices = tuple(Fraction(x) for x in self.p)
        object.__setattr__(self, "p", prices)
        for c, price in enumerate(prices):
            if price <= 0:
                raise InvalidInputError(f"price of chore {c} must be positive, got {price}")

    @property
    def m(self) -> int:
        return len(self.p)

    def total(self, chores: Iterable[int]) -> Fraction:
        return sum((self.p[c] for c in chores), Fraction(0))


def bundle_values(inst: Instance, alloc: Allocation) -> tuple[tuple[int, ...], ...]:
    """``val[i][h]``: agent i's value for agent h's bundle (no dubious copies)."""
    validate_allocation(inst, alloc)
    val = [[0] * inst.n for _ in range(inst.n)]
    for c, a in enumerate(alloc.owner):
        for i in range(inst.n):
            val[i][a] += inst.values[i][c]
    return tuple(tuple(row) for row in val)


def envy_matrix(inst: Instance, alloc: Allocation) -> EnvyReport:
    val = bundle_values(inst, alloc)
    e = []
    for i in range(inst.n):
        own = val[i][i]
        e.append(tuple(max(val[i][h] - own, 0) if h != i else 0 for h in range(inst.n)))
    return EnvyReport(tuple(e), tuple(sum(row) for row in e))


def is_ef(inst: Instance, alloc: Allocation) -> bool:
    return envy_matrix(inst, alloc).max_envy() == 0


def is_ef1(inst: Instance, alloc: Allocation) -> bool:
    # Removing the envious agent's single worst chore is the best one-chore
    # repair under additive chore valuations.
    val = bundle_values(inst, alloc)
    bundles = alloc.bundles(inst.n)
    for i in range(inst.n):
        if not bundles[i]:
            continue
        worst = min(inst.values[i][c] for c in bundles[i])
        reduced = val[i][i] - worst
        for h in range(inst.n):
            if h != i and val[i][h] > reduced:
                return False
    return True


def check_def_witness(
    inst: Instance,
    alloc: Allocation,
    witness: DubiousAllocation,
    variant: Variant = Variant.DEF,
) -> bool:
    """True iff the augmented allocation is envy-free and the witness obeys the
    variant's structural constraints."""
    variant = Variant(variant)
    validate_allocation(inst, alloc)
    validate_witness(inst, witness)
    if variant is Variant.SDEF:
        sources = [c for c, _, _ in witness.copies]
        if len(set(sources)) != len(sources):
            return False
        if any(count != 1 for _, _, count in witness.copies):
            return False
    elif variant is Variant.PDEF:
        for chore, agent, _ in witness.copies:
            if alloc.owner[chore] != agent:
                return False
    return AugmentedView.build(inst, alloc, witness).is_envy_free()


def _dominates(candidate: Sequence[int], incumbent: Sequence[int]) -> bool:
    ge = all(c >= b for c, b in zip(candidate, incumbent))
    return ge and any(c > b for c, b in zip(candidate, incumbent))


def _chore_classes(inst: Instance) -> list[list[int]]:
    """Chores grouped by identical valuation columns (order of first appearance)."""
    groups: dict[tuple[int, ...], list[int]] = {}
    for c in range(inst.m):
        col = tuple(inst.values[i][c] for i in range(inst.n))
        groups.setdefault(col, []).append(c)
    return list(groups.values())


def _count_profiles(class_sizes: Sequence[int], n: int):
    """All ways to split each chore class among n agents, as count matrices."""
    per_class = [
        list(_compositions(size, n)) for size in class_sizes
    ]
    return itertools.product(*per_class)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def pareto_search_space(inst: Instance) -> int:
    """Number of utility-distinct allocations the brute PO check enumerates."""
    sizes = [len(g) for g in _chore_classes(inst)]
    total = 1
    for s in sizes:
        total *= math.comb(s + inst.n - 1, inst.n - 1)
    return total


def is_pareto_optimal(
    inst: Instance,
    alloc: Allocation,
    method: str = "brute",
    budget: int = 2_000_000,
) -> bool:
    """Pareto optimality of an allocation.

    ``brute`` searches every utility-distinct allocation for a dominating one
    (chores with identical columns are interchangeable, so the search runs
    over per-class count profiles).  ``binary_fast`` uses the binary
    characterization: PO iff every chore that somebody values 0 is owned by
    such an agent.
    """
    validate_allocation(inst, alloc)
    if method == "binary_fast":
        cls = classify_valuations(inst)
        if not cls.binary:
            raise InvalidInputError("binary_fast PO check requires binary valuations")
        for c in range(inst.m):
            zeroers = [i for i in range(inst.n) if inst.values[i][c] == 0]
            if zeroers and inst.values[alloc.owner[c]][c] != 0:
                return False
        return True
    if method != "brute":
        raise InvalidInputError(f"unknown PO method {method!r}")
    if pareto_search_space(inst) > budget:
        raise BudgetExceededError(
            f"PO brute force needs {pareto_search_space(inst)} candidates, budget {budget}"
        )
    classes = _chore_classes(inst)
    class_value = [
        [inst.values[i][group[0]] for group in classes] for i in range(inst.n)
    ]
    counts = [[0] * len(classes) for _ in range(inst.n)]
    for k, group in enumerate(classes):
        for c in group:
            counts[alloc.owner[c]][k] += 1
    utilities = [
        sum(counts[i][k] * class_value[i][k] for k in range(len(classes)))
        for i in range(inst.n)
    ]
    for profile in _count_profiles([len(g) for g in classes], inst.n):
        # profile[k][i] = number of class-k chores given to agent i
        candidate = [
            sum(profile[k][i] * class_value[i][k] for k in range(len(classes)))
            for i in range(inst.n)
        ]
        if _dominates(candidate, utilities):
            return False
    return True


def mpb_set(inst: Instance, prices: PriceVector, agent: int) -> frozenset[int]:
    """Chores minimizing |v(c)|/p(c) for the agent, compared exactly."""
    if prices.m != inst.m:
        raise InvalidInputError("price vector length must equal chore count")
    if inst.m == 0:
        return frozenset()
    ratios = [Fraction(-inst.values[agent][c]) / prices.p[c] for c in range(inst.m)]
    best = min(ratios)
    return frozenset(c for c in range(inst.m) if ratios[c] == best)


def is_fisher_equilibrium(inst: Instance, alloc: Allocation, prices: PriceVector) -> bool:
    validate_allocation(inst, alloc)
    if prices.m != inst.m:
        raise InvalidInputError("price vector length must equal chore count")
    mpb = [mpb_set(inst, prices, i) for i in range(inst.n)]
    return all(c in mpb[a] for c, a in enumerate(alloc.owner))


def is_pef1(alloc: Allocation, prices: PriceVector, n: Optional[int] = None) -> bool:
    """Price envy-freeness up to one item: dropping its priciest chore brings
    every bundle's price down to at most any other bundle's price."""
    if prices.m != alloc.m:
        raise InvalidInputError("price vector length must equal chore count")
    if n is None:
        n = max(alloc.owner, default=-1) + 1
    bundles = alloc.bundles(n)
    spend = [prices.total(b) for b in bundles]
    for i in range(n):
        if not bundles[i]:
            continue
        reduced = spend[i] - max(prices.p[c] for c in bundles[i])
        for j in range(n):
            if j != i and reduced > spend[j]:
                return False
    return True


def classify_valuations(inst: Instance) -> ValuationClass:
    flat = [v for row in inst.values for v in row]
    identical = all(
        inst.values[i][c] == inst.values[0][c]
        for i in range(inst.n)
        for c in range(inst.m)
    )
    binary = all(v in (0, -1) for v in flat)
    distinct = sorted(set(flat))
    bivalued: Optional[tuple[int, int]] = None
    if flat and all(v < 0 for v in distinct):
        if len(distinct) == 2:
            bivalued = (distinct[0], distinct[1])
        elif len(distinct) == 1:
            bivalued = (distinct[0], distinct[0])
    classes = _chore_classes(inst)
    two_types: Optional[tuple[tuple[int, ...], tuple[int, ...]]] = None
    if len(classes) <= 2:
        first = tuple(classes[0]) if classes else ()
        second = tuple(classes[1]) if len(classes) == 2 else ()
        two_types = (first, second)
    return ValuationClass(
        identical=identical, binary=binary, bivalued=bivalued, two_types=two_types
    )
