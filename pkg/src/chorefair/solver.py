"""Exact minimization of dubious chores.

The decomposition at the heart of the solver: copies placed at agent ``h``
change only the envy *toward* ``h`` (the receiver's own cost stays fixed and
everyone else's perceived cost of ``h``'s bundle only grows), so for the
unrestricted and personalized variants the minimum splits into independent
covering problems, one per envied agent.  The singly variant couples targets
through the pool of distinct chores and is solved globally.  A brute-force
enumerator backs all of this as an oracle in the tests.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Optional, Sequence

from .core import (
    AlgorithmBugError,
    Allocation,
    BudgetExceededError,
    DubiousAllocation,
    EMPTY_WITNESS,
    EnvyReport,
    Instance,
    InvalidInputError,
    Variant,
    check_def_witness,
    classify_valuations,
    envy_matrix,
    is_pareto_optimal,
    pareto_search_space,
    validate_allocation,
)
from .algorithms import binary_def_po, round_robin

DEFAULT_NODE_BUDGET = 10_000_000
BRUTE_BUDGET = 1_000_000


@dataclass(frozen=True)
class SolveResult:
    """Outcome of a minimization: ``min_k`` is None when no witness of any
    size exists (possible only for the singly/personalized variants)."""

    min_k: Optional[int]
    witness: Optional[DubiousAllocation]
    exact: bool
    nodes_explored: int
    runtime_ms: int

    @property
    def feasible(self) -> bool:
        return self.min_k is not None


class _BudgetHit(Exception):
    pass


class _CoverSearch:
    """Branch and bound for one target: find the smallest copy multiset whose
    per-agent coverage meets every deficit."""

    def __init__(
        self,
        deficits: Sequence[int],
        sources: Sequence[tuple[int, tuple[int, ...]]],
        distinct: bool,
        node_budget: int,
    ):
        self.deficits = list(deficits)
        self.sources = list(sources)  # (chore id, coverage per deficit agent)
        self.distinct = distinct
        self.node_budget = node_budget
        self.nodes = 0
        k = len(deficits)
        self.suffix_max = [[0] * k for _ in range(len(self.sources) + 1)]
        for pos in range(len(self.sources) - 1, -1, -1):
            w = self.sources[pos][1]
            for j in range(k):
                self.suffix_max[pos][j] = max(self.suffix_max[pos + 1][j], w[j])
        self.best_count: Optional[int] = None
        self.best_sol: Optional[list[tuple[int, int]]] = None

    def greedy(self) -> None:
        rem = list(self.deficits)
        picks: dict[int, int] = {}
        while any(rem):
            best_pos, best_gain = None, 0
            for pos, (_, w) in enumerate(self.sources):
                if self.distinct and picks.get(pos, 0) >= 1:
                    continue
                gain = sum(min(w[j], rem[j]) for j in range(len(rem)))
                if gain > best_gain:
                    best_pos, best_gain = pos, gain
            if best_pos is None:
                return  # pool exhausted; feasibility was checked upstream
            picks[best_pos] = picks.get(best_pos, 0) + 1
            w = self.sources[best_pos][1]
            rem = [max(0, rem[j] - w[j]) for j in range(len(rem))]
        self.best_count = sum(picks.values())
        self.best_sol = [
            (self.sources[pos][0], count) for pos, count in sorted(picks.items())
        ]

    def run(self) -> tuple[Optional[int], Optional[list[tuple[int, int]]], int, bool]:
        self.greedy()
        exact = True
        try:
            self._dfs(0, list(self.deficits), 0, [])
        except _BudgetHit:
            exact = False
        return self.best_count, self.best_sol, self.nodes, exact

    def _dfs(self, pos: int, rem: list[int], count: int, chosen: list[tuple[int, int]]):
        self.nodes += 1
        if self.nodes > self.node_budget:
            raise _BudgetHit
        if not any(rem):
            if self.best_count is None or count < self.best_count:
                self.best_count = count
                self.best_sol = [e for e in chosen if e[1] > 0]
            return
        if pos == len(self.sources):
            return
        bound = 0
        for j, d in enumerate(rem):
            if d > 0:
                top = self.suffix_max[pos][j]
                if top == 0:
                    return
                bound = max(bound, -(-d // top))
        if self.best_count is not None and count + bound >= self.best_count:
            return
        cid, w = self.sources[pos]
        cap = 0
        for j, d in enumerate(rem):
            if d > 0 and w[j] > 0:
                cap = max(cap, -(-d // w[j]))
        if self.distinct:
            cap = min(cap, 1)
        for mult in range(cap, -1, -1):
            new_rem = [max(0, rem[j] - mult * w[j]) for j in range(len(rem))]
            chosen.append((cid, mult))
            self._dfs(pos + 1, new_rem, count + mult, chosen)
            chosen.pop()


def _target_inputs(
    inst: Instance,
    alloc: Allocation,
    report: EnvyReport,
    h: int,
    variant: Variant,
) -> tuple[list[int], list[int], list[tuple[int, tuple[int, ...]]]]:
    """Deficit agents, their deficits, and the ordered/dominance-pruned source
    list for covering target ``h``."""
    agents = [i for i in range(inst.n) if i != h and report.e[i][h] > 0]
    deficits = [report.e[i][h] for i in agents]
    if variant is Variant.PDEF:
        pool = [c for c in range(inst.m) if alloc.owner[c] == h]
    else:
        pool = list(range(inst.m))
    raw = []
    for c in pool:
        w = tuple(-inst.values[i][c] for i in agents)
        if any(w):
            raw.append((c, w))
    raw.sort(key=lambda s: (-sum(min(x, d) for x, d in zip(s[1], deficits)), s[0]))
    if variant is not Variant.SDEF:
        kept: list[tuple[int, tuple[int, ...]]] = []
        for c, w in raw:
            dominated = False
            for c2, w2 in kept:
                if all(a >= b for a, b in zip(w2, w)):
                    dominated = True
                    break
            if not dominated:
                kept.append((c, w))
        raw = kept
    return agents, deficits, raw


def min_cover_for_target(
    inst: Instance,
    alloc: Allocation,
    h: int,
    variant: Variant = Variant.DEF,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> Optional[tuple[int, DubiousAllocation]]:
    """Minimum copies placed at ``h`` eliminating all envy toward ``h``, or
    None when the variant's source pool cannot cover some deficit."""
    variant = Variant(variant)
    validate_allocation(inst, alloc)
    report = envy_matrix(inst, alloc)
    agents, deficits, sources = _target_inputs(inst, alloc, report, h, variant)
    if not agents:
        return 0, EMPTY_WITNESS
    for j, d in enumerate(deficits):
        limit = (
            sum(s[1][j] for s in sources)
            if variant is Variant.SDEF
            else max((s[1][j] for s in sources), default=0) * d
        )
        if limit < d:
            return None
    count, sol, _, exact = _CoverSearch(deficits, sources, variant is Variant.SDEF, node_budget).run()
    if count is None:
        return None
    if not exact:
        raise BudgetExceededError("cover search budget exhausted")
    return count, DubiousAllocation(tuple((c, h, mult) for c, mult in sol))


def _solve_decomposed(
    inst: Instance,
    alloc: Allocation,
    report: EnvyReport,
    variant: Variant,
    node_budget: int,
) -> tuple[Optional[int], Optional[DubiousAllocation], int, bool]:
    total = 0
    copies: list[tuple[int, int, int]] = []
    nodes = 0
    exact = True
    for h in range(inst.n):
        agents, deficits, sources = _target_inputs(inst, alloc, report, h, variant)
        if not agents:
            continue
        feasible = all(
            max((s[1][j] for s in sources), default=0) > 0 for j in range(len(deficits))
        )
        if not feasible:
            return None, None, nodes, True
        count, sol, used, sub_exact = _CoverSearch(
            deficits, sources, False, node_budget - nodes
        ).run()
        nodes += used
        exact = exact and sub_exact
        total += count
        copies.extend((c, h, mult) for c, mult in sol)
    return total, DubiousAllocation(tuple(copies)), nodes, exact


def _minimal_covers(
    deficits: list[int], useful: list[tuple[int, tuple[int, ...]]], cap: int
) -> list[frozenset[int]]:
    covers: list[frozenset[int]] = []
    ids = [c for c, _ in useful]
    weights = {c: w for c, w in useful}
    for size in range(1, len(ids) + 1):
        if len(covers) > cap:
            break
        for comb in itertools.combinations(ids, size):
            chosen = set(comb)
            if any(f <= chosen for f in covers):
                continue
            totals = [0] * len(deficits)
            for c in comb:
                for j, x in enumerate(weights[c]):
                    totals[j] += x
            if all(t >= d for t, d in zip(totals, deficits)):
                covers.append(frozenset(comb))
    return covers


def _solve_sdef(
    inst: Instance,
    alloc: Allocation,
    report: EnvyReport,
    node_budget: int,
) -> tuple[Optional[int], Optional[DubiousAllocation], int, bool]:
    """Global search: each chore may be copied at most once overall, so pick
    pairwise-disjoint minimal covers, one per envied target."""
    per_target = []
    nodes = 0
    for h in range(inst.n):
        agents, deficits, sources = _target_inputs(inst, alloc, report, h, Variant.SDEF)
        if not agents:
            continue
        for j, d in enumerate(deficits):
            if sum(s[1][j] for s in sources) < d:
                return None, None, nodes, True
        if len(sources) > 18:
            raise BudgetExceededError(
                f"singly-variant cover enumeration over {len(sources)} sources is out of budget"
            )
        covers = _minimal_covers(deficits, sources, cap=200_000)
        nodes += len(covers)
        per_target.append((h, sorted(covers, key=lambda f: (len(f), sorted(f)))))
    per_target.sort(key=lambda t: (len(t[1]), t[0]))
    min_sizes = [min(len(c) for c in covers) for _, covers in per_target]
    best: list[Optional[int]] = [None]
    best_sol: list[Optional[list[tuple[int, frozenset[int]]]]] = [None]
    state = {"nodes": nodes}

    def dfs(idx: int, used: frozenset[int], total: int, chosen: list):
        state["nodes"] += 1
        if state["nodes"] > node_budget:
            raise _BudgetHit
        if idx == len(per_target):
            if best[0] is None or total < best[0]:
                best[0] = total
                best_sol[0] = list(chosen)
            return
        if best[0] is not None and total + sum(min_sizes[idx:]) >= best[0]:
            return
        h, covers = per_target[idx]
        for cover in covers:
            if cover & used:
                continue
            chosen.append((h, cover))
            dfs(idx + 1, used | cover, total + len(cover), chosen)
            chosen.pop()

    exact = True
    try:
        dfs(0, frozenset(), 0, [])
    except _BudgetHit:
        exact = False
    if best[0] is None:
        return None, None, state["nodes"], exact
    copies = tuple(
        (c, h, 1) for h, cover in best_sol[0] for c in sorted(cover)
    )
    return best[0], DubiousAllocation(copies), state["nodes"], exact


def min_dubious(
    inst: Instance,
    alloc: Allocation,
    variant: Variant = Variant.DEF,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> SolveResult:
    """Smallest number of dubious copies making the allocation envy-free."""
    variant = Variant(variant)
    validate_allocation(inst, alloc)
    start = time.perf_counter()
    report = envy_matrix(inst, alloc)
    if variant is Variant.SDEF:
        min_k, witness, nodes, exact = _solve_sdef(inst, alloc, report, node_budget)
    else:
        min_k, witness, nodes, exact = _solve_decomposed(
            inst, alloc, report, variant, node_budget
        )
    runtime = int((time.perf_counter() - start) * 1000)
    return SolveResult(min_k, witness, exact, nodes, runtime)


def _useful_pairs(
    inst: Instance, alloc: Allocation, report: EnvyReport, variant: Variant
) -> list[tuple[int, int]]:
    pairs = []
    for h in range(inst.n):
        enviers = [i for i in range(inst.n) if i != h and report.e[i][h] > 0]
        if not enviers:
            continue
        for c in range(inst.m):
            if variant is Variant.PDEF and alloc.owner[c] != h:
                continue
            if any(inst.values[i][c] < 0 for i in enviers):
                pairs.append((c, h))
    return pairs


def min_dubious_bruteforce(
    inst: Instance,
    alloc: Allocation,
    variant: Variant = Variant.DEF,
    budget: int = BRUTE_BUDGET,
) -> SolveResult:
    """Oracle: enumerate copy multisets by increasing total size and return
    the first that verifies.  Exact by construction; desk scale only."""
    variant = Variant(variant)
    validate_allocation(inst, alloc)
    start = time.perf_counter()
    report = envy_matrix(inst, alloc)
    pairs = _useful_pairs(inst, alloc, report, variant)
    envious = [
        (i, h)
        for i in range(inst.n)
        for h in range(inst.n)
        if report.e[i][h] > 0
    ]
    if variant is Variant.PDEF:
        for i, h in envious:
            if not any(
                inst.values[i][c] < 0 for c in range(inst.m) if alloc.owner[c] == h
            ):
                runtime = int((time.perf_counter() - start) * 1000)
                return SolveResult(None, None, True, 0, runtime)
    if variant is Variant.SDEF:
        k_bound = min(len(pairs), inst.m)
    elif variant is Variant.PDEF:
        k_bound = sum(report.e[i][h] for i, h in envious)
    else:
        k_bound = min(
            inst.m * (inst.n - 1), sum(report.e[i][h] for i, h in envious)
        )
    tried = 0
    for k in range(k_bound + 1):
        for combo in itertools.combinations_with_replacement(pairs, k):
            if variant is Variant.SDEF:
                srcs = [c for c, _ in combo]
                if len(set(srcs)) != len(srcs):
                    continue
            tried += 1
            if tried > budget:
                raise BudgetExceededError("brute-force witness budget exhausted")
            witness = DubiousAllocation(tuple((c, h, 1) for c, h in combo))
            if check_def_witness(inst, alloc, witness, variant):
                runtime = int((time.perf_counter() - start) * 1000)
                return SolveResult(k, witness, True, tried, runtime)
    if variant is Variant.DEF:
        raise AlgorithmBugError("unrestricted witness must exist within the size bound")
    runtime = int((time.perf_counter() - start) * 1000)
    return SolveResult(None, None, True, tried, runtime)


def is_def_k(
    inst: Instance,
    alloc: Allocation,
    k: int,
    variant: Variant = Variant.DEF,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> bool:
    """Whether the allocation becomes envy-free with at most k dubious chores."""
    if k < 0:
        raise InvalidInputError("k must be nonnegative")
    result = min_dubious(inst, alloc, variant, node_budget)
    if result.min_k is not None and result.min_k <= k:
        return True
    if not result.exact:
        raise BudgetExceededError("solver budget too small to certify a negative answer")
    return False


class _AllocationSearch:
    """Branch and bound over chore-to-agent assignments minimizing the
    decomposed cover cost, with symmetry breaking over identical agents and
    identical chores."""

    def __init__(self, inst: Instance, po_only: bool, node_budget: int):
        self.inst = inst
        self.po_only = po_only
        self.node_budget = node_budget
        self.nodes = 0
        n, m = inst.n, inst.m
        cls = classify_valuations(inst)
        self.binary = cls.binary
        self.po_restrict = po_only and self.binary
        self.po_filter = po_only and not self.binary
        if self.po_filter and pareto_search_space(inst) > 2_000_000:
            raise BudgetExceededError(
                "Pareto filtering for non-binary valuations is out of budget here"
            )
        self.candidates = []
        for c in range(m):
            if self.po_restrict:
                zeroers = [i for i in range(n) if inst.values[i][c] == 0]
                self.candidates.append(zeroers or list(range(n)))
            else:
                self.candidates.append(list(range(n)))
        row_ids: dict[tuple[int, ...], int] = {}
        self.agent_class = []
        for i in range(n):
            row = tuple(inst.values[i])
            self.agent_class.append(row_ids.setdefault(row, i))
        self.class_members: dict[int, list[int]] = {}
        for i, rep in enumerate(self.agent_class):
            self.class_members.setdefault(rep, []).append(i)
        col_last: dict[tuple[int, ...], int] = {}
        self.prev_same_chore: list[Optional[int]] = []
        for c in range(m):
            col = tuple(inst.values[i][c] for i in range(n))
            self.prev_same_chore.append(col_last.get(col))
            col_last[col] = c
        self.maxneg = [max((-v for v in inst.values[i]), default=0) for i in range(n)]
        self.suffix = [[0] * (m + 1) for _ in range(n)]
        for i in range(n):
            for pos in range(m - 1, -1, -1):
                self.suffix[i][pos] = self.suffix[i][pos + 1] + inst.values[i][pos]
        self.best_k: Optional[int] = None
        self.best_alloc: Optional[Allocation] = None
        self.best_witness: Optional[DubiousAllocation] = None
        self.owner = [-1] * m
        self.val = [[0] * n for _ in range(n)]
        self.sizes = [0] * n


    def evaluate(self, alloc: Allocation) -> None:
        if self.po_filter and not is_pareto_optimal(self.inst, alloc, "brute"):
            return
        report = envy_matrix(self.inst, alloc)
        min_k, witness, used, exact = _solve_decomposed(
            self.inst, alloc, report, Variant.DEF, max(1, self.node_budget - self.nodes)
        )
        self.nodes += used
        if not exact:
            raise _BudgetHit
        if self.best_k is None or min_k < self.best_k:
            self.best_k = min_k
            self.best_alloc = alloc
            self.best_witness = witness

    def lower_bound(self, pos: int) -> int:
        total = 0
        n = self.inst.n
        for h in range(n):
            need = 0
            for i in range(n):
                if i == h:
                    continue
                e = self.val[i][h] + self.suffix[i][pos] - self.val[i][i]
                if e > 0:
                    need = max(need, -(-e // self.maxneg[i]))
            total += need
        return total

    def run(self, seeds: Sequence[Allocation] = ()) -> bool:
        """Returns True when the search completed within budget."""
        try:
            for alloc in seeds:
                self.evaluate(alloc)
            if self.inst.m == 0:
                self.evaluate(Allocation(()))
            else:
                self._dfs(0)
            return True
        except _BudgetHit:
            return False

    def _dfs(self, pos: int):
        if self.best_k == 0:
            return
        self.nodes += 1
        if self.nodes > self.node_budget:
            raise _BudgetHit
        if pos == self.inst.m:
            self.evaluate(Allocation(tuple(self.owner)))
            return
        if self.best_k is not None and self.lower_bound(pos) >= self.best_k:
            return
        prev = self.prev_same_chore[pos]
        floor = self.owner[prev] if prev is not None else 0
        col = [self.inst.values[i][pos] for i in range(self.inst.n)]
        for a in self.candidates[pos]:
            if a < floor:
                continue
            if self.sizes[a] == 0:
                rep = self.agent_class[a]
                first_empty = next(
                    (x for x in self.class_members[rep] if self.sizes[x] == 0), a
                )
                if a != first_empty:
                    continue
            self.owner[pos] = a
            self.sizes[a] += 1
            for i in range(self.inst.n):
                self.val[i][a] += col[i]
            self._dfs(pos + 1)
            for i in range(self.inst.n):
                self.val[i][a] -= col[i]
            self.sizes[a] -= 1
            self.owner[pos] = -1


def min_over_allocations(
    inst: Instance,
    po_only: bool = False,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> tuple[Allocation, SolveResult]:
    """Allocation minimizing the number of dubious chores needed, over all
    allocations (or, with ``po_only``, over Pareto-optimal ones).

    With binary valuations ``po_only`` restricts each chore to its
    zero-valuers (the binary PO characterization); otherwise candidate optima
    are filtered through the brute PO check.  Exhausting the node budget
    returns the best allocation found with ``exact=False``.
    """
    start = time.perf_counter()
    search = _AllocationSearch(inst, po_only, node_budget)
    seeds = []
    if po_only and search.binary:
        seeds.append(binary_def_po(inst)[0])
    elif not po_only:
        seeds.append(round_robin(inst).allocation)
    completed = search.run(seeds)
    if search.best_alloc is None:
        raise BudgetExceededError("allocation search budget exhausted before any result")
    if po_only and search.binary:
        if not is_pareto_optimal(inst, search.best_alloc, "binary_fast"):
            raise AlgorithmBugError("restricted search returned a non-optimal allocation")
    runtime = int((time.perf_counter() - start) * 1000)
    result = SolveResult(
        search.best_k, search.best_witness, completed, search.nodes, runtime
    )
    return search.best_alloc, result
