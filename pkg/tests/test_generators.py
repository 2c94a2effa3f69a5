import json

import pytest

from chorefair import (
    Allocation,
    DubiousAllocation,
    Instance,
    InvalidInputError,
    SyntheticConfig,
    classify_valuations,
    envy_matrix,
    gen_from_partition,
    gen_from_rx3c,
    gen_from_setsplitting,
    gen_synthetic,
    is_def_k,
    min_over_allocations,
    read_allocation,
    read_instance,
    read_witness,
    write_allocation,
    write_instance,
    write_witness,
)
from chorefair.generators import SplitMix64, p_to_threshold, stream_key

# Family over 6 elements, every element in exactly 3 triples, no two disjoint
# triples covering everything: a fixed no-instance for the 3-set cover check.
NO_COVER_FAMILY = (
    (0, 1, 2),
    (0, 1, 3),
    (0, 4, 5),
    (1, 4, 5),
    (2, 3, 4),
    (2, 3, 5),
)


class TestSplitMix:
    def test_reference_sequence(self):
        # first outputs of the standard splitmix64 stream from state 0
        rng = SplitMix64(0)
        assert rng.next_u64() == 0xE220A8397B1DCDAF
        assert rng.next_u64() == 0x6E789E6AA1B965F4
        assert rng.next_u64() == 0x06C45D188009454F

    def test_stream_key_role_separation(self):
        assert stream_key(1, 2, 3, 0) != stream_key(1, 3, 2, 0)
        assert stream_key(1, 2, 3, 0) != stream_key(1, 2, 3, 1)

    def test_threshold_bounds(self):
        assert p_to_threshold(0.0) == 0
        assert p_to_threshold(1.0) == 1 << 53
        with pytest.raises(InvalidInputError):
            p_to_threshold(1.5)


class TestGenSynthetic:
    def test_reproducible_and_binary(self):
        cfg = SyntheticConfig(3, 5, trials=10, p_neg=0.7, seed=42)
        a = gen_synthetic(cfg, 4)
        b = gen_synthetic(cfg, 4)
        assert a.values == b.values
        assert classify_valuations(a).binary

    def test_trials_differ(self):
        cfg = SyntheticConfig(3, 5, trials=10, p_neg=0.7, seed=42)
        assert gen_synthetic(cfg, 0).values != gen_synthetic(cfg, 1).values

    def test_forced_last_column(self):
        cfg = SyntheticConfig(3, 5, trials=10, p_neg=0.5, seed=7)
        inst = gen_synthetic(cfg, 0)
        assert all(row[-1] == -1 for row in inst.values)

    def test_degenerate_probability_one(self):
        cfg = SyntheticConfig(2, 4, trials=1, p_neg=1.0, seed=0)
        inst = gen_synthetic(cfg, 0)
        assert all(v == -1 for row in inst.values for v in row)

    def test_law_of_large_numbers(self):
        cfg = SyntheticConfig(
            1, 10_000, trials=1, p_neg=0.7, seed=123,
            force_last_common=False, enforce_m_ge_n=False,
        )
        inst = gen_synthetic(cfg, 0)
        frac = sum(1 for v in inst.values[0] if v == -1) / 10_000
        assert abs(frac - 0.7) < 0.02

    def test_m_ge_n_enforced(self):
        with pytest.raises(InvalidInputError):
            SyntheticConfig(5, 3, trials=1, p_neg=0.7, seed=0)


class TestPartitionReduction:
    def test_structure(self):
        inst, answer = gen_from_partition((1, 1, 2), 1)
        assert inst.n == 4 and inst.m == 4
        assert answer is True
        assert inst.values[0] == (-1, -1, -2, -2)  # dummies worth -half
        assert classify_valuations(inst).identical

    @pytest.mark.parametrize(
        "xs,k,expect",
        [((1, 1, 2), 1, True), ((1, 3), 1, False), ((1, 1), 1, True)],
    )
    def test_round_trip(self, xs, k, expect):
        inst, answer = gen_from_partition(xs, k)
        assert answer == expect
        _, result = min_over_allocations(inst)
        assert result.exact
        assert (result.min_k <= k) == expect

    def test_odd_total_scaled(self):
        inst, answer = gen_from_partition((1, 2), 1)
        assert answer is False
        assert inst.values[0] == (-2, -4, -3)

    def test_rejects_bad_values(self):
        with pytest.raises(InvalidInputError):
            gen_from_partition((0, 1), 1)
        with pytest.raises(InvalidInputError):
            gen_from_partition((1, 2), 0)


class TestSetSplittingReduction:
    def test_structure(self):
        inst, answer = gen_from_setsplitting(("a", "b"), [("a", "b")], 1)
        # r' = max(2, 1, 1) = 2 -> 5 agents, 4 chores
        assert inst.n == 5 and inst.m == 4
        assert answer is True
        assert classify_valuations(inst).binary

    @pytest.mark.parametrize(
        "universe,family,k,expect",
        [
            (("a", "b"), [("a", "b")], 1, True),
            (("a", "b"), [("a",)], 1, False),  # singletons cannot be split
            (("a", "b", "c"), [("a", "b"), ("b", "c")], 1, True),
        ],
    )
    def test_round_trip(self, universe, family, k, expect):
        inst, answer = gen_from_setsplitting(universe, family, k)
        assert answer == expect
        _, result = min_over_allocations(inst)
        assert result.exact
        assert (result.min_k <= k) == expect

    def test_imaginary_edges_fill_short_families(self):
        inst, _ = gen_from_setsplitting(("a", "b", "c"), [("a", "b")], 1)
        # r = 1 < r' = 3: edge agents 1..2 are adjacent to every vertex
        assert inst.values[1][:3] == (-1, -1, -1)
        assert inst.values[2][:3] == (-1, -1, -1)


class TestRx3cReduction:
    def test_forced_yes_instance(self):
        universe = ("u1", "u2", "u3")
        subsets = [("u1", "u2", "u3")] * 3
        inst, alloc, answer = gen_from_rx3c(universe, subsets)
        assert inst.n == 4 and inst.m == 4 * 9 + 3 == 39
        assert answer is True
        rep = envy_matrix(inst, alloc)
        chooser_bundle = [c for c in range(inst.m) if alloc.owner[c] == 0]
        for i in range(1, 4):
            assert inst.bundle_value(i, chooser_bundle) == -3
            assert rep.e[i][0] == 1
        for i in range(1, 4):
            for j in range(1, 4):
                bundle = [c for c in range(inst.m) if alloc.owner[c] == j]
                assert inst.bundle_value(i, bundle) == -4
        assert is_def_k(inst, alloc, 1)

    def test_no_instance(self):
        inst, alloc, answer = gen_from_rx3c(tuple(range(6)), NO_COVER_FAMILY)
        assert answer is False
        assert not is_def_k(inst, alloc, 2)

    def test_rejects_malformed(self):
        with pytest.raises(InvalidInputError):
            gen_from_rx3c(("a", "b"), [("a", "b")])
        with pytest.raises(InvalidInputError):
            gen_from_rx3c(("a", "b", "c"), [("a", "b", "c")] * 2)
        with pytest.raises(InvalidInputError):
            gen_from_rx3c(("a", "b", "c"), [("a", "b")] * 3)


class TestFileIo:
    def test_instance_round_trip(self, tmp_path):
        inst = Instance(((-1, 0), (-2, -3)), agent_labels=("p", "q"))
        path = tmp_path / "inst.json"
        write_instance(inst, str(path))
        again = read_instance(str(path))
        assert again.values == inst.values
        assert again.agent_labels == ("p", "q")

    def test_positive_entry_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"valuations": [[1, 0]]}')
        with pytest.raises(InvalidInputError, match="nonpositive"):
            read_instance(str(path))

    def test_non_integer_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"valuations": [[-1.5, 0]]}')
        with pytest.raises(InvalidInputError, match="integer"):
            read_instance(str(path))

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{nope")
        with pytest.raises(InvalidInputError, match="line 1"):
            read_instance(str(path))

    def test_allocation_round_trip_and_range(self, tmp_path):
        inst = Instance(((-1, -1), (-1, -1)))
        path = tmp_path / "alloc.json"
        write_allocation(Allocation((0, 1)), str(path))
        assert read_allocation(str(path), inst).owner == (0, 1)
        path.write_text('{"assignment": [0, 2]}')
        with pytest.raises(InvalidInputError, match="out of range"):
            read_allocation(str(path), inst)

    def test_witness_round_trip(self, tmp_path):
        inst = Instance(((-1, -1), (-1, -1)))
        path = tmp_path / "wit.json"
        write_witness(DubiousAllocation(((1, 0, 2),)), str(path))
        again = read_witness(str(path), inst)
        assert again.copies == ((1, 0, 2),)
        path.write_text('{"copies": [{"chore": 5, "agent": 0, "count": 1}]}')
        with pytest.raises(InvalidInputError, match="out of range"):
            read_witness(str(path), inst)
