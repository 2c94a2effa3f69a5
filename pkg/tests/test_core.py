import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from chorefair import (
    Allocation,
    AugmentedView,
    BudgetExceededError,
    DubiousAllocation,
    Instance,
    InvalidInputError,
    PriceVector,
    Variant,
    check_def_witness,
    classify_valuations,
    envy_matrix,
    is_ef,
    is_ef1,
    is_fisher_equilibrium,
    is_pareto_optimal,
    is_pef1,
    mpb_set,
)
from conftest import (
    def2_not_ef1,
    housemates,
    own_chore_only,
    random_allocation,
    random_instance,
    single_heavy_chore,
)


class TestInstance:
    def test_rejects_positive_entries(self):
        with pytest.raises(InvalidInputError, match="nonpositive"):
            Instance(((0, 1),))

    def test_rejects_ragged_matrix(self):
        with pytest.raises(InvalidInputError, match="ragged"):
            Instance(((0, 0), (0,)))

    def test_rejects_zero_agents(self):
        with pytest.raises(InvalidInputError):
            Instance(())

    def test_zero_chores_ok(self):
        inst = Instance(((),))
        assert inst.n == 1 and inst.m == 0


class TestEnvyMatrix:
    def test_housemates(self):
        inst, alloc = housemates()
        rep = envy_matrix(inst, alloc)
        assert rep.e == ((0, 0, 0), (1, 0, 0), (2, 0, 0))
        assert rep.totals == (0, 1, 2)

    def test_single_agent_zero_matrix(self):
        inst = Instance(((-1, -2),))
        rep = envy_matrix(inst, Allocation((0, 0)))
        assert rep.e == ((0,),)

    def test_all_zero_valuations(self):
        inst = Instance(((0, 0), (0, 0)))
        rep = envy_matrix(inst, Allocation((0, 1)))
        assert rep.max_envy() == 0

    def test_dimension_mismatch(self):
        inst, _ = housemates()
        with pytest.raises(InvalidInputError):
            envy_matrix(inst, Allocation((0, 1)))
        with pytest.raises(InvalidInputError, match="out of range"):
            envy_matrix(inst, Allocation((0, 1, 3)))


class TestEfPredicates:
    def test_housemates_ef1_not_ef(self):
        inst, alloc = housemates()
        assert is_ef1(inst, alloc)
        assert not is_ef(inst, alloc)

    def test_def2_example_not_ef1(self):
        inst, alloc = def2_not_ef1()
        assert not is_ef1(inst, alloc)

    def test_empty_instance_both_true(self):
        inst = Instance(((), ()))
        alloc = Allocation(())
        assert is_ef(inst, alloc) and is_ef1(inst, alloc)


class TestWitnessCheck:
    def test_housemates_single_copy(self):
        inst, alloc = housemates()
        witness = DubiousAllocation(((2, 0, 1),))
        assert check_def_witness(inst, alloc, witness, Variant.DEF)

    def test_def2_two_copies_at_agent_two(self):
        inst, alloc = def2_not_ef1()
        witness = DubiousAllocation(((0, 1, 1), (1, 1, 1)))
        assert check_def_witness(inst, alloc, witness, Variant.DEF)

    def test_empty_witness_equals_ef(self, rng):
        for _ in range(100):
            inst = random_instance(rng, 4, 6, -5)
            alloc = random_allocation(rng, inst)
            assert check_def_witness(inst, alloc, DubiousAllocation()) == is_ef(inst, alloc)

    def test_sdef_rejects_repeated_source(self):
        inst, alloc = housemates()
        repeated = DubiousAllocation(((2, 0, 2),))
        assert not check_def_witness(inst, alloc, repeated, Variant.SDEF)
        spread = DubiousAllocation(((2, 0, 1), (2, 1, 1)))
        assert not check_def_witness(inst, alloc, spread, Variant.SDEF)

    def test_pdef_requires_own_chore(self):
        inst, alloc = housemates()
        foreign = DubiousAllocation(((2, 0, 1),))  # vacuuming belongs to agent 2
        assert not check_def_witness(inst, alloc, foreign, Variant.PDEF)

    def test_monotone_adding_copies(self, rng):
        # a verifying witness stays verifying under any extension
        hits = 0
        for _ in range(500):
            inst = random_instance(rng, 4, 5, -4)
            if inst.m == 0:
                continue
            alloc = random_allocation(rng, inst)
            base = [(c, rng.randrange(inst.n), rng.randint(1, 2)) for c in range(inst.m)]
            witness = DubiousAllocation(tuple(base))
            if not check_def_witness(inst, alloc, witness):
                continue
            hits += 1
            extra = base + [
                (rng.randrange(inst.m), rng.randrange(inst.n), rng.randint(1, 2))
            ]
            assert check_def_witness(inst, alloc, DubiousAllocation(tuple(extra)))
        assert hits > 50

    def test_perceived_values(self):
        inst, alloc = housemates()
        view = AugmentedView.build(inst, alloc, DubiousAllocation(((2, 0, 1),)))
        # receiver cost unchanged, everyone else sees the copy at face value
        assert view.perceived[0][0] == -1
        assert view.perceived[1][0] == -1 + -3
        assert view.perceived[2][0] == -1 + -3


class TestParetoOptimal:
    def test_own_chore_diagonal_not_po(self):
        inst, alloc = own_chore_only(3)
        assert not is_pareto_optimal(inst, alloc, "brute")

    def test_identical_always_po(self, rng):
        for _ in range(50):
            m = rng.randint(0, 5)
            row = tuple(rng.randint(-4, -1) for _ in range(m))
            inst = Instance(tuple(row for _ in range(3)))
            alloc = random_allocation(rng, inst)
            assert is_pareto_optimal(inst, alloc, "brute")

    def test_binary_transfer_improvement(self):
        inst = Instance(((0, -1), (-1, -1)))
        assert not is_pareto_optimal(inst, Allocation((1, 0)), "brute")
        assert not is_pareto_optimal(inst, Allocation((1, 0)), "binary_fast")

    def test_binary_fast_matches_brute(self, rng):
        for _ in range(300):
            n = rng.randint(1, 4)
            m = rng.randint(0, 6)
            inst = Instance(
                tuple(tuple(rng.choice((0, -1)) for _ in range(m)) for _ in range(n))
            )
            alloc = random_allocation(rng, inst)
            assert is_pareto_optimal(inst, alloc, "binary_fast") == is_pareto_optimal(
                inst, alloc, "brute"
            )

    def test_binary_fast_needs_binary(self):
        inst, alloc = housemates()
        with pytest.raises(InvalidInputError):
            is_pareto_optimal(inst, alloc, "binary_fast")

    def test_budget_guard(self):
        inst = Instance(tuple(tuple([-1 - c for c in range(12)]) for _ in range(6)))
        with pytest.raises(BudgetExceededError):
            is_pareto_optimal(inst, Allocation((0,) * 12), "brute", budget=10)


class TestMarkets:
    def test_mpb_and_equilibrium_example(self):
        inst = Instance(((-1, -2), (-2, -1)))
        p = PriceVector((Fraction(1), Fraction(1)))
        assert mpb_set(inst, p, 0) == {0}
        assert mpb_set(inst, p, 1) == {1}
        good = Allocation((0, 1))
        bad = Allocation((1, 0))
        assert is_fisher_equilibrium(inst, good, p)
        assert is_pef1(good, p, 2)
        assert not is_fisher_equilibrium(inst, bad, p)

    def test_zero_valuer_mpb_is_everything(self):
        inst = Instance(((0, 0, 0), (-1, -1, -2)))
        p = PriceVector((Fraction(1), Fraction(2), Fraction(5)))
        assert mpb_set(inst, p, 0) == {0, 1, 2}

    def test_exact_ratio_comparison(self):
        # 1/3 vs 2/6 must tie exactly; no float noise
        inst = Instance(((-1, -2),))
        p = PriceVector((Fraction(3), Fraction(6)))
        assert mpb_set(inst, p, 0) == {0, 1}

    def test_positive_prices_enforced(self):
        with pytest.raises(InvalidInputError):
            PriceVector((Fraction(0),))

    def test_pef1_counts_empty_agents(self):
        # an unlisted trailing agent spends 0, which pEF1 must respect
        alloc = Allocation((0, 0))
        p = PriceVector((Fraction(1), Fraction(1)))
        assert not is_pef1(alloc, p, 3)
        assert is_pef1(alloc, p, 1)


class TestClassify:
    def test_constant_minus_one(self):
        cls = classify_valuations(Instance(((-1, -1), (-1, -1))))
        assert cls.identical and cls.binary
        assert cls.bivalued == (-1, -1)
        assert not cls.general

    def test_housemates_general(self):
        inst, _ = housemates()
        cls = classify_valuations(inst)
        assert not cls.identical and not cls.binary and cls.bivalued is None
        assert cls.two_types is None
        assert cls.general

    def test_bivalued_pair(self):
        cls = classify_valuations(Instance(((-2, -5), (-5, -2))))
        assert cls.bivalued == (-5, -2)

    def test_zero_blocks_bivalued(self):
        cls = classify_valuations(Instance(((0, -2), (-2, -2))))
        assert cls.bivalued is None

    def test_two_types_partition(self):
        inst = Instance(((-1, -1, -2), (-3, -3, -1)))
        cls = classify_valuations(inst)
        assert cls.two_types == ((0, 1), (2,))


# Property suite: predicates are invariant under per-agent positive scaling
# and equivariant under relabeling.

small_instances = st.integers(2, 4).flatmap(
    lambda n: st.integers(1, 5).flatmap(
        lambda m: st.lists(
            st.lists(st.integers(-6, 0), min_size=m, max_size=m),
            min_size=n,
            max_size=n,
        )
    )
)


@settings(max_examples=120, deadline=None)
@given(data=st.data(), rows=small_instances)
def test_scaling_invariance(data, rows):
    inst = Instance(tuple(tuple(r) for r in rows))
    alloc = Allocation(
        tuple(data.draw(st.integers(0, inst.n - 1)) for _ in range(inst.m))
    )
    agent = data.draw(st.integers(0, inst.n - 1))
    factor = data.draw(st.integers(2, 5))
    scaled_rows = [
        tuple(v * factor for v in row) if i == agent else row
        for i, row in enumerate(inst.values)
    ]
    scaled = Instance(tuple(scaled_rows))
    assert is_ef(inst, alloc) == is_ef(scaled, alloc)
    assert is_ef1(inst, alloc) == is_ef1(scaled, alloc)
    witness = DubiousAllocation(
        tuple(
            (data.draw(st.integers(0, inst.m - 1)), data.draw(st.integers(0, inst.n - 1)), 1)
            for _ in range(data.draw(st.integers(0, 3)))
        )
    )
    assert check_def_witness(inst, alloc, witness) == check_def_witness(
        scaled, alloc, witness
    )


@settings(max_examples=120, deadline=None)
@given(data=st.data(), rows=small_instances)
def test_relabeling_equivariance(data, rows):
    inst = Instance(tuple(tuple(r) for r in rows))
    alloc = Allocation(
        tuple(data.draw(st.integers(0, inst.n - 1)) for _ in range(inst.m))
    )
    perm_a = data.draw(st.permutations(range(inst.n)))
    perm_c = data.draw(st.permutations(range(inst.m)))
    relabeled = Instance(
        tuple(
            tuple(inst.values[perm_a[i]][perm_c[c]] for c in range(inst.m))
            for i in range(inst.n)
        )
    )
    inv_a = [0] * inst.n
    for new, old in enumerate(perm_a):
        inv_a[old] = new
    relabeled_alloc = Allocation(
        tuple(inv_a[alloc.owner[perm_c[c]]] for c in range(inst.m))
    )
    assert is_ef(inst, alloc) == is_ef(relabeled, relabeled_alloc)
    assert is_ef1(inst, alloc) == is_ef1(relabeled, relabeled_alloc)
    before = envy_matrix(inst, alloc)
    after = envy_matrix(relabeled, relabeled_alloc)
    for i in range(inst.n):
        for h in range(inst.n):
            assert before.e[perm_a[i]][perm_a[h]] == after.e[i][h]


def test_envy_report_recomputable(rng):
    for _ in range(100):
        inst = random_instance(rng, 4, 6, -5)
        alloc = random_allocation(rng, inst)
        rep = envy_matrix(inst, alloc)
        bundles = alloc.bundles(inst.n)
        for i in range(inst.n):
            own = inst.bundle_value(i, bundles[i])
            for h in range(inst.n):
                expect = 0 if h == i else max(inst.bundle_value(i, bundles[h]) - own, 0)
                assert rep.e[i][h] == expect
