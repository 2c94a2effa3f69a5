"""Allocation algorithms and constructive dubious-chore augmentations.

Everything here is deterministic: all tie-breaks are total orders (lowest
index wins), so identical inputs give identical outputs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import (
    Allocation,
    AlgorithmBugError,
    BudgetExceededError,
    DubiousAllocation,
    EMPTY_WITNESS,
    Instance,
    InvalidInputError,
    PriceVector,
    check_def_witness,
    classify_valuations,
    is_fisher_equilibrium,
    is_pareto_optimal,
    is_pef1,
    mpb_set,
    pareto_search_space,
    validate_allocation,
)

# Observability for the bivalued equilibrium search: the exhaustive fallback
# is expected to never run; tests assert the counter stays at zero.
STATS = {"pef1_fallbacks": 0}


@dataclass(frozen=True)
class RoundRobinTrace:
    """Full record of a round-robin run: the allocation, the pick order, each
    agent's last pick, and the globally last-allocated chore and its owner."""

    allocation: Allocation
    order: tuple[int, ...]
    last_picked: tuple[Optional[int], ...]
    last_chore: Optional[int]
    last_owner: Optional[int]


@dataclass(frozen=True)
class EquilibriumResult:
    """A Fisher-market outcome: allocation, prices, and the distinguished
    max-spending agent / max-priced chore (ties broken by lowest index).

    ``market_chores`` is set when the market covers only a subset of the
    instance's chores (free-for-the-pivot chores are pre-assigned outside the
    market and carry a placeholder price of 1).
    """

    allocation: Allocation
    prices: PriceVector
    i_max: int
    c_max: Optional[int]
    market_chores: Optional[tuple[int, ...]] = None

    @staticmethod
    def build(
        n: int,
        alloc: Allocation,
        prices: PriceVector,
        market_chores: Optional[tuple[int, ...]] = None,
    ) -> "EquilibriumResult":
        if prices.m != alloc.m:
            raise InvalidInputError("price vector length must equal chore count")
        spend = [Fraction(0)] * n
        for c, a in enumerate(alloc.owner):
            if a >= n:
                raise InvalidInputError(f"owner of chore {c} out of range")
            spend[a] += prices.p[c]
        i_max = max(range(n), key=lambda i: (spend[i], -i))
        c_max = None
        if alloc.m:
            c_max = max(range(alloc.m), key=lambda c: (prices.p[c], -c))
        return EquilibriumResult(alloc, prices, i_max, c_max, market_chores)


def round_robin(inst: Instance, order: Optional[tuple[int, ...]] = None) -> RoundRobinTrace:
    """Agents pick in cyclic order; each takes its highest-valued remaining
    chore, ties going to the lowest chore index."""
    if order is None:
        order = tuple(range(inst.n))
    else:
        order = tuple(order)
        if sorted(order) != list(range(inst.n)):
            raise InvalidInputError("order must be a permutation of the agents")
    owner = [0] * inst.m
    remaining = list(range(inst.m))
    last_picked: list[Optional[int]] = [None] * inst.n
    last_chore: Optional[int] = None
    last_owner: Optional[int] = None
    turn = 0
    while remaining:
        agent = order[turn % inst.n]
        row = inst.values[agent]
        pick = max(remaining, key=lambda c: (row[c], -c))
        remaining.remove(pick)
        owner[pick] = agent
        last_picked[agent] = pick
        last_chore, last_owner = pick, agent
        turn += 1
    return RoundRobinTrace(
        Allocation(tuple(owner)), order, tuple(last_picked), last_chore, last_owner
    )


def rr_augmentation(inst: Instance, trace: RoundRobinTrace) -> DubiousAllocation:
    """One copy of the last-allocated chore to every agent except its owner;
    this always makes a round-robin allocation envy-free."""
    if trace.last_chore is None or inst.n == 1:
        return EMPTY_WITNESS
    return DubiousAllocation(
        tuple(
            (trace.last_chore, j, 1) for j in range(inst.n) if j != trace.last_owner
        )
    )


def envy_graph(inst: Instance, chore_order: Optional[tuple[int, ...]] = None) -> Allocation:
    """Envy-graph allocation for chores.

    Chores are handed out one at a time to the lowest-index agent that envies
    nobody.  When every agent is envious, a cycle in the top-trading envy
    graph (edges from each envious agent to its most-envied peers) is rotated
    until some agent is envy-free again.  Rotations strictly raise the total
    utility of the cycle's members, so the inner loop terminates.
    """
    if chore_order is None:
        chore_order = tuple(range(inst.m))
    else:
        chore_order = tuple(chore_order)
        if sorted(chore_order) != list(range(inst.m)):
            raise InvalidInputError("chore_order must be a permutation of the chores")
    n = inst.n
    bundles: list[list[int]] = [[] for _ in range(n)]
    # val[i][j] = v_i(bundle j), maintained incrementally
    val = [[0] * n for _ in range(n)]

    def envies(i: int) -> bool:
        return any(val[i][j] > val[i][i] for j in range(n) if j != i)

    def rotate_once() -> None:
        # Edge i -> h for envious i with h among i's best other bundles;
        # every vertex on the walk has an out-edge, so a cycle must appear.
        succ: dict[int, int] = {}
        for i in range(n):
            if envies(i):
                best = max(val[i][j] for j in range(n) if j != i)
                succ[i] = min(
                    j for j in range(n) if j != i and val[i][j] == best
                )
        start = min(succ)
        seen: dict[int, int] = {}
        walk = []
        u = start
        while u not in seen:
            seen[u] = len(walk)
            walk.append(u)
            u = succ[u]
        cycle = walk[seen[u]:]
        before = sum(val[i][i] for i in cycle)
        old_bundles = {i: bundles[i] for i in cycle}
        old_cols = {i: [val[r][i] for r in range(n)] for i in cycle}
        for i in cycle:
            j = succ[i]
            bundles[i] = old_bundles[j]
            for r in range(n):
                val[r][i] = old_cols[j][r]
        after = sum(val[i][i] for i in cycle)
        if after <= before:
            raise AlgorithmBugError("envy cycle rotation did not improve anyone")

    for c in chore_order:
        while not any(not envies(i) for i in range(n)):
            rotate_once()
        receiver = min(i for i in range(n) if not envies(i))
        bundles[receiver].append(c)
        for r in range(n):
            val[r][receiver] += inst.values[r][c]

    owner = [0] * inst.m
    for a, bundle in enumerate(bundles):
        for c in bundle:
            owner[c] = a
    return Allocation(tuple(owner))


def binary_def_po(inst: Instance) -> tuple[Allocation, DubiousAllocation]:
    """Pareto-optimal allocation plus witness for binary valuations.

    Chores somebody values at 0 go to their lowest-index zero-valuer; chores
    everybody values at -1 ("common") are dealt round-robin, and if the common
    counts split into k and k-1 every light agent gets one dubious copy of the
    first common chore.
    """
    cls = classify_valuations(inst)
    if not cls.binary:
        raise InvalidInputError("binary_def_po requires binary valuations")
    owner = [0] * inst.m
    common = []
    for c in range(inst.m):
        zeroers = [i for i in range(inst.n) if inst.values[i][c] == 0]
        if zeroers:
            owner[c] = zeroers[0]
        else:
            common.append(c)
    common_count = [0] * inst.n
    for idx, c in enumerate(common):
        agent = idx % inst.n
        owner[c] = agent
        common_count[agent] += 1
    alloc = Allocation(tuple(owner))
    if not common or len(common) % inst.n == 0:
        return alloc, EMPTY_WITNESS
    high = max(common_count)
    light = [j for j in range(inst.n) if common_count[j] == high - 1]
    witness = DubiousAllocation(tuple((common[0], j, 1) for j in light))
    return alloc, witness


def _eq1_condition(inst: Instance, alloc: Allocation, prices: PriceVector) -> Optional[str]:
    """Check the near-unit-spending condition needed for the two-copy
    augmentation; returns a description of the first violated clause."""
    one = Fraction(1)
    bundles = alloc.bundles(inst.n)
    for i in range(inst.n):
        spend = prices.total(bundles[i])
        if spend <= one:
            if not any(
                prices.total(set(bundles[i]) | {c}) >= one for c in range(inst.m)
            ):
                return f"agent {i}: spends {spend} <= 1 but no chore tops the bundle up to 1"
        else:
            if not any(spend - prices.p[c] < one for c in bundles[i]):
                return f"agent {i}: spends {spend} > 1 but no owned chore brings it under 1"
    return None


def augment_from_equilibrium(
    inst: Instance, eq: EquilibriumResult, copies_per_agent: int
) -> DubiousAllocation:
    """Copies of the priciest chore to everyone but the top spender.

    One copy per agent needs a price-envy-free-up-to-one-item equilibrium; two
    copies per agent need an equilibrium whose bundle prices straddle 1.  Both
    preconditions are enforced.
    """
    if copies_per_agent not in (1, 2):
        raise InvalidInputError("copies_per_agent must be 1 or 2")
    validate_allocation(inst, eq.allocation)
    if not is_fisher_equilibrium(inst, eq.allocation, eq.prices):
        raise InvalidInputError("(allocation, prices) is not a Fisher market equilibrium")
    if copies_per_agent == 1:
        if not is_pef1(eq.allocation, eq.prices, inst.n):
            raise InvalidInputError("equilibrium is not price envy-free up to one item")
    else:
        violated = _eq1_condition(inst, eq.allocation, eq.prices)
        if violated is not None:
            raise InvalidInputError(f"bundle-price condition violated: {violated}")
    if inst.n == 1 or eq.c_max is None:
        return EMPTY_WITNESS
    return DubiousAllocation(
        tuple((eq.c_max, j, copies_per_agent) for j in range(inst.n) if j != eq.i_max)
    )


# ---------------------------------------------------------------------------
# Bivalued valuations: find a pEF1 Fisher market equilibrium.
# ---------------------------------------------------------------------------


class _Market:
    """Mutable search state: exact prices and an owner per chore, kept in
    equilibrium (every bundle inside its owner's minimum-pain-per-buck set)."""

    def __init__(self, inst: Instance, x: int, y: int):
        self.inst = inst
        self.n = inst.n
        self.m = inst.m
        self.factor = Fraction(-x, -y)
        # Minimum-pain price per chore: every ratio is >= 1 with equality
        # exactly at the minimizers, so the cheapest-agent assignment below
        # starts in equilibrium.
        self.prices: list[Fraction] = [
            Fraction(min(-inst.values[i][c] for i in range(inst.n)))
            for c in range(inst.m)
        ]
        self.owner: list[int] = []
        for c in range(inst.m):
            cheapest = min(range(inst.n), key=lambda i: (-inst.values[i][c], i))
            self.owner.append(cheapest)

    def spend(self) -> list[Fraction]:
        out = [Fraction(0)] * self.n
        for c, a in enumerate(self.owner):
            out[a] += self.prices[c]
        return out

    def ratios(self, i: int) -> list[Fraction]:
        return [
            Fraction(-self.inst.values[i][c]) / self.prices[c] for c in range(self.m)
        ]

    def mpb_sets(self) -> list[set[int]]:
        out = []
        for i in range(self.n):
            r = self.ratios(i)
            best = min(r)
            out.append({c for c in range(self.m) if r[c] == best})
        return out

    def in_equilibrium(self, mpb: list[set[int]]) -> bool:
        return all(c in mpb[a] for c, a in enumerate(self.owner))

    def pef1_ok(self, spend: list[Fraction]) -> bool:
        low = min(spend)
        for i in range(self.n):
            owned = [c for c in range(self.m) if self.owner[c] == i]
            if owned and spend[i] - max(self.prices[c] for c in owned) > low:
                return False
        return True


def _improving_transfer(market: _Market, mpb: list[set[int]], spend: list[Fraction]) -> bool:
    """Move one chore along an MPB edge if it strictly reduces the spending
    imbalance potential sum(spend^2); returns whether a move was made."""
    best = None
    for b in sorted(range(market.n), key=lambda j: (spend[j], j)):
        for c in sorted(mpb[b]):
            a = market.owner[c]
            if a == b:
                continue
            p = market.prices[c]
            delta = 2 * p * (spend[b] - spend[a] + p)
            if delta < 0 and (best is None or delta < best[0]):
                best = (delta, c, b)
    if best is None:
        return False
    _, c, b = best
    market.owner[c] = b
    return True


def _chain_transfer(market: _Market, mpb: list[set[int]], spend: list[Fraction]) -> bool:
    """Shift chores along a shortest path of MPB edges from the least spender
    to some agent, if the whole shift reduces the potential."""
    ell = min(range(market.n), key=lambda j: (spend[j], j))
    parent: dict[int, tuple[int, int]] = {}
    frontier = [ell]
    seen = {ell}
    while frontier:
        nxt = []
        for u in frontier:
            for c in sorted(mpb[u]):
                w = market.owner[c]
                if w not in seen:
                    seen.add(w)
                    parent[w] = (u, c)
                    nxt.append(w)
        frontier = nxt
    for w in sorted(seen - {ell}):
        # Replay the chain w -> ... -> ell and price out its net effect.
        moves = []
        u = w
        while u != ell:
            pu, c = parent[u]
            moves.append((c, u, pu))
            u = pu
        new_spend = list(spend)
        for c, frm, to in moves:
            new_spend[frm] -= market.prices[c]
            new_spend[to] += market.prices[c]
        if sum(s * s for s in new_spend) < sum(s * s for s in spend):
            for c, frm, to in moves:
                market.owner[c] = to
            return True
    return False


def _fixed_price_search(market: _Market, mpb: list[set[int]], node_cap: int = 100_000) -> bool:
    """Exact search for a pEF1 equilibrium assignment at the current prices.

    Runs only when local transfers stall; most constrained chores first,
    lighter agents tried first.  Commits the assignment on success.
    """
    eligible = [sorted(i for i in range(market.n) if c in mpb[i]) for c in range(market.m)]
    order = sorted(range(market.m), key=lambda c: (len(eligible[c]), c))
    owner = [-1] * market.m
    spend = [Fraction(0)] * market.n
    nodes = 0

    def leaf_ok() -> bool:
        low = min(spend)
        for i in range(market.n):
            owned = [c for c in range(market.m) if owner[c] == i]
            if owned and spend[i] - max(market.prices[c] for c in owned) > low:
                return False
        return True

    def dfs(idx: int) -> bool:
        nonlocal nodes
        if idx == len(order):
            return leaf_ok()
        c = order[idx]
        for a in sorted(eligible[c], key=lambda i: (spend[i], i)):
            nodes += 1
            if nodes > node_cap:
                return False
            owner[c] = a
            spend[a] += market.prices[c]
            if dfs(idx + 1):
                return True
            spend[a] -= market.prices[c]
            owner[c] = -1
        return False

    if dfs(0):
        market.owner = owner
        return True
    return False


def _component(market: _Market, mpb: list[set[int]], ell: int) -> tuple[set[int], set[int]]:
    """Closure of agents/chores reachable from the least spender through
    shared minimum-pain-per-buck chores."""
    chores = set(mpb[ell])
    agents = {ell}
    changed = True
    while changed:
        changed = False
        for j in range(market.n):
            if j not in agents and mpb[j] & chores:
                agents.add(j)
                changed = True
        for j in agents:
            if not mpb[j] <= chores:
                chores |= mpb[j]
                changed = True
    return agents, chores


def _raise_outside(market: _Market, mpb: list[set[int]], agents: set[int], chores: set[int]) -> bool:
    """Scale up every price outside the component by the smallest factor that
    puts an outside chore into some component agent's MPB set."""
    outside = [c for c in range(market.m) if c not in chores]
    if not outside:
        return False
    factor = None
    for j in sorted(agents):
        r = market.ratios(j)
        best = min(r)
        for c in outside:
            g = r[c] / best
            if factor is None or g < factor:
                factor = g
    if factor is None or factor <= 1:
        return False
    for c in outside:
        market.prices[c] *= factor
    return True


def _raise_complement(market: _Market, mpb: list[set[int]], spend: list[Fraction]) -> bool:
    """Fully-connected fallback move: raise everything outside some light
    agent's MPB set by x/y, provided all bundles stay within the new MPB sets."""
    factor = market.factor
    if factor == 1:
        return False
    for j in sorted(range(market.n), key=lambda a: (spend[a], a)):
        raise_set = [c for c in range(market.m) if c not in mpb[j]]
        if not raise_set:
            continue
        saved = list(market.prices)
        for c in raise_set:
            market.prices[c] *= factor
        new_mpb = market.mpb_sets()
        if market.in_equilibrium(new_mpb):
            return True
        market.prices = saved
    return False


def _pef1_iterate(inst: Instance, x: int, y: int, budget: int) -> Optional[_Market]:
    market = _Market(inst, x, y)
    for _ in range(budget):
        spend = market.spend()
        if market.pef1_ok(spend):
            return market
        mpb = market.mpb_sets()
        if _improving_transfer(market, mpb, spend):
            continue
        if _chain_transfer(market, mpb, spend):
            continue
        if _fixed_price_search(market, mpb):
            continue
        ell = min(range(market.n), key=lambda j: (spend[j], j))
        agents, chores = _component(market, mpb, ell)
        if len(chores) < market.m:
            if _raise_outside(market, mpb, agents, chores):
                continue
        if _raise_complement(market, mpb, spend):
            continue
        return None
    return None


def _pef1_exhaustive(inst: Instance, node_budget: int = 2_000_000) -> tuple[list[int], list[Fraction]]:
    """Last-resort search over two-level price vectors and equilibrium
    allocations; desk scale only."""
    if inst.m > 16:
        raise BudgetExceededError("exhaustive pEF1 fallback limited to m <= 16")
    x, y = classify_valuations(inst).bivalued
    levels = [Fraction(-y), Fraction(-x)]
    nodes = 0
    for raised in itertools.product((0, 1), repeat=inst.m):
        prices = [levels[r] for r in raised]
        pv = PriceVector(tuple(prices))
        eligible = []
        for c in range(inst.m):
            owners = [i for i in range(inst.n) if c in mpb_set(inst, pv, i)]
            if not owners:
                break
            eligible.append(owners)
        if len(eligible) < inst.m:
            continue
        owner = [0] * inst.m

        def dfs(c: int) -> bool:
            nonlocal nodes
            if c == inst.m:
                spend = [Fraction(0)] * inst.n
                for cc, a in enumerate(owner):
                    spend[a] += prices[cc]
                low = min(spend)
                for i in range(inst.n):
                    owned = [cc for cc in range(inst.m) if owner[cc] == i]
                    if owned and spend[i] - max(prices[cc] for cc in owned) > low:
                        return False
                return True
            for a in eligible[c]:
                nodes += 1
                if nodes > node_budget:
                    raise BudgetExceededError("pEF1 fallback search budget exhausted")
                owner[c] = a
                if dfs(c + 1):
                    return True
            return False

        if dfs(0):
            return owner, prices
    raise BudgetExceededError("no pEF1 equilibrium found by the exhaustive fallback")


def find_pef1_equilibrium(inst: Instance, iteration_budget: Optional[int] = None) -> EquilibriumResult:
    """A Fisher market equilibrium that is price envy-free up to one item, for
    bivalued valuations.

    Starts from minimum-value prices with each chore at a cheapest agent, then
    alternates potential-reducing transfers along MPB edges with exact price
    rises that open new MPB edges.  An exhaustive two-level price search backs
    this up (and is counted in STATS; it is expected never to trigger).
    """
    if inst.m == 0:
        return EquilibriumResult.build(inst.n, Allocation(()), PriceVector(()))
    cls = classify_valuations(inst)
    if cls.bivalued is None:
        raise InvalidInputError("find_pef1_equilibrium requires bivalued valuations")
    x, y = cls.bivalued
    budget = iteration_budget if iteration_budget is not None else 10 * inst.n * inst.m * inst.m
    market = _pef1_iterate(inst, x, y, budget)
    if market is not None:
        owner, prices = market.owner, market.prices
    else:
        STATS["pef1_fallbacks"] += 1
        owner, prices = _pef1_exhaustive(inst)
    alloc = Allocation(tuple(owner))
    pv = PriceVector(tuple(prices))
    if not is_fisher_equilibrium(inst, alloc, pv) or not is_pef1(alloc, pv, inst.n):
        raise AlgorithmBugError("bivalued search returned a non-certified market state")
    return EquilibriumResult.build(inst.n, alloc, pv)


# ---------------------------------------------------------------------------
# Two types of chores.
# ---------------------------------------------------------------------------


def _deal_counts(total: int, members: list[int], heavy: tuple[int, ...]) -> dict[int, int]:
    """Distribute `total` among `members`, counts within one of each other;
    `heavy` lists who gets the extra chore."""
    base = total // len(members)
    counts = {a: base for a in members}
    for a in heavy:
        counts[a] += 1
    return counts


def _identical_ef1(bundles_counts: list[tuple[int, int]], vx: int, vy: int) -> bool:
    """EF1 when every agent shares the pivot's valuation: bundle worth minus
    its worst chore must be at least every other bundle's worth."""
    worths = [a * vx + b * vy for a, b in bundles_counts]
    top = max(worths)
    for (a, b), w in zip(bundles_counts, worths):
        if a == 0 and b == 0:
            continue
        worst = min(([vx] if a else []) + ([vy] if b else []))
        if w - worst < top:
            return False
    return True


def two_types_def_po(inst: Instance) -> tuple[Allocation, DubiousAllocation, EquilibriumResult]:
    """Envy-freeable (with at most n-1 copies) Pareto-optimal allocation when
    the chores fall into two valuation types.

    Searches pivot agents in index order; for each pivot, chores the pivot
    values at 0 are pre-assigned to it and the rest form a market priced at
    the pivot's absolute values.  Agents with a strict comparative advantage
    are pinned to that type, tied agents may join either side, and group
    bundles are balanced.  The first candidate that is envy-free up to one
    chore under the pivot's valuation and Pareto optimal is kept and
    augmented with one copy of the priciest chore per non-top-spender.
    """
    cls = classify_valuations(inst)
    if cls.two_types is None:
        raise InvalidInputError("two_types_def_po requires two types of chores")
    parts = [list(p) for p in cls.two_types if p]
    n = inst.n

    # Pareto optimality pins every chore somebody does for free to such an
    # agent, so parts with a zero-valuer leave the market up front; the
    # leftover market is strictly negative, which the pivot construction
    # needs (its augmented envy-freeness survives the merge because holders
    # value their free chores at 0 and everyone else sees them as costs).
    free_pairs: list[tuple[int, int]] = []  # (chore, assigned zero-valuer)
    priced_parts: list[list[int]] = []
    for part in parts:
        zeroers = [i for i in range(n) if inst.values[i][part[0]] == 0]
        if zeroers:
            free_pairs.extend((c, zeroers[0]) for c in part)
        else:
            priced_parts.append(part)

    po_space_ok = pareto_search_space(inst) <= 2_000_000

    for i_star in range(n):
        part_price = [-inst.values[i_star][part[0]] for part in priced_parts]
        candidate = _two_types_candidate(
            inst, i_star, free_pairs, priced_parts, part_price, po_space_ok
        )
        if candidate is not None:
            return candidate
    raise AlgorithmBugError("no valid pivot/allocation pair found for two-types instance")


def _two_types_candidate(
    inst: Instance,
    i_star: int,
    free_pairs: list[tuple[int, int]],
    market_parts: list[list[int]],
    part_price: list[int],
    po_space_ok: bool,
):
    n = inst.n
    others = [i for i in range(n) if i != i_star]

    if not market_parts:
        owner = [0] * inst.m
        for c, a in free_pairs:
            owner[c] = a
        alloc = Allocation(tuple(owner))
        if po_space_ok and not is_pareto_optimal(inst, alloc, "brute"):
            return None
        prices = PriceVector(tuple(Fraction(1) for _ in range(inst.m)))
        eq = EquilibriumResult.build(n, alloc, prices, market_chores=())
        return alloc, EMPTY_WITNESS, eq

    if len(market_parts) == 1:
        group_assignments = [(tuple(others), ())]
        sizes = (len(market_parts[0]), 0)
    else:
        sizes = (len(market_parts[0]), len(market_parts[1]))
        px, py = part_price
        fixed_x, fixed_y, ties = [], [], []
        for i in others:
            lhs = -inst.values[i][market_parts[0][0]] * py
            rhs = -inst.values[i][market_parts[1][0]] * px
            if lhs < rhs:
                fixed_x.append(i)
            elif lhs > rhs:
                fixed_y.append(i)
            else:
                ties.append(i)
        group_assignments = []
        for mask in range(1 << len(ties)):
            gx = list(fixed_x) + [t for b, t in enumerate(ties) if not mask >> b & 1]
            gy = list(fixed_y) + [t for b, t in enumerate(ties) if mask >> b & 1]
            group_assignments.append((tuple(sorted(gx)), tuple(sorted(gy))))

    for gx, gy in group_assignments:
        for a in range(sizes[0] + 1):
            rest_x = sizes[0] - a
            if rest_x and not gx:
                continue
            for b in range(sizes[1] + 1):
                rest_y = sizes[1] - b
                if rest_y and not gy:
                    continue
                result = _try_two_types_split(
                    inst, i_star, free_pairs, market_parts, part_price,
                    gx, gy, a, b, po_space_ok,
                )
                if result is not None:
                    return result
    return None


def _extras_choices(members: tuple[int, ...], extras: int):
    return itertools.combinations(members, extras)


def _try_two_types_split(
    inst: Instance,
    i_star: int,
    free_pairs: list[tuple[int, int]],
    market_parts: list[list[int]],
    part_price: list[int],
    gx: tuple[int, ...],
    gy: tuple[int, ...],
    a: int,
    b: int,
    po_space_ok: bool,
):
    n = inst.n
    two_parts = len(market_parts) == 2
    val_x = -part_price[0]
    val_y = -part_price[1] if two_parts else -1  # unused when the second side is empty
    rest_x = len(market_parts[0]) - a
    rest_y = (len(market_parts[1]) - b) if two_parts else 0

    x_extra_count = rest_x % len(gx) if gx else 0
    y_extra_count = rest_y % len(gy) if gy else 0
    for hx in _extras_choices(gx, x_extra_count):
        cx = _deal_counts(rest_x, list(gx), hx) if gx else {}
        for hy in _extras_choices(gy, y_extra_count):
            cy = _deal_counts(rest_y, list(gy), hy) if gy else {}
            counts = []
            for i in range(n):
                if i == i_star:
                    counts.append((a, b))
                else:
                    counts.append((cx.get(i, 0), cy.get(i, 0)))
            if not _identical_ef1(counts, val_x, val_y):
                continue
            owner = [i_star] * inst.m
            for c, holder in free_pairs:
                owner[c] = holder
            xs = iter(market_parts[0])
            for _ in range(a):
                next(xs)
            for i in sorted(cx):
                for _ in range(cx[i]):
                    owner[next(xs)] = i
            if two_parts:
                ys = iter(market_parts[1])
                for _ in range(b):
                    next(ys)
                for i in sorted(cy):
                    for _ in range(cy[i]):
                        owner[next(ys)] = i
            alloc = Allocation(tuple(owner))
            if po_space_ok and not is_pareto_optimal(inst, alloc, "brute"):
                continue
            return _finalize_two_types(
                inst, i_star, market_parts, part_price, alloc
            )
    return None


def _finalize_two_types(
    inst: Instance,
    i_star: int,
    market_parts: list[list[int]],
    part_price: list[int],
    alloc: Allocation,
):
    n = inst.n
    market_chores = sorted(c for part in market_parts for c in part)
    red_index = {c: k for k, c in enumerate(market_chores)}
    red_inst = Instance(
        tuple(
            tuple(inst.values[i][c] for c in market_chores) for i in range(n)
        )
    )
    red_alloc = Allocation(tuple(alloc.owner[c] for c in market_chores))
    price_of = {}
    for part, price in zip(market_parts, part_price):
        for c in part:
            price_of[c] = Fraction(price)
    red_prices = PriceVector(tuple(price_of[c] for c in market_chores))
    if not is_fisher_equilibrium(red_inst, red_alloc, red_prices):
        return None
    if not is_pef1(red_alloc, red_prices, n):
        return None
    red_eq = EquilibriumResult.build(n, red_alloc, red_prices)
    red_witness = augment_from_equilibrium(red_inst, red_eq, 1)
    witness = DubiousAllocation(
        tuple(
            (market_chores[chore], agent, count)
            for chore, agent, count in red_witness.copies
        )
    )
    if not check_def_witness(inst, alloc, witness, "def"):
        raise AlgorithmBugError("two-types augmentation failed to certify envy-freeness")
    full_prices = PriceVector(
        tuple(price_of.get(c, Fraction(1)) for c in range(inst.m))
    )
    eq = EquilibriumResult.build(
        n, alloc, full_prices, market_chores=tuple(market_chores)
    )
    return alloc, witness, eq
