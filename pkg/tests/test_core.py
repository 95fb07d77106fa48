import numpy as np
import pytest
from hypothesis import given, strategies as st

from patlab.core import (
    Configuration,
    GeneratorInstance,
    Topology,
    build_generator_space,
    config_from_json,
    config_to_json,
    four_neighbor,
    from_ge_index,
    ge_index,
    moore8,
    neighbor_site,
    space_from_json,
    space_to_json,
    transformed_bonds,
)
from patlab.errors import (
    BondValueOutOfRange,
    IndexOutOfRange,
    InvalidDirection,
    RowLengthMismatch,
)

STROKE_G0 = [
    [0, 0, 0, 0, 0, 0, 0, 0],
    [2, 3, 4, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 2],
    [0, 0, 0, 0, 0, 0, 0, 0],
]


@pytest.fixture
def stroke_space():
    return build_generator_space(STROKE_G0, moore8())


@pytest.fixture
def demo_space():
    return build_generator_space(
        [[0, 0, 0, 0], [1, 2, 3, 4], [1, 2, 3, 4], [1, 2, 3, 4]], four_neighbor()
    )


class TestTopology:
    def test_moore_offsets_start_top_and_run_clockwise(self):
        assert moore8().offsets == (
            (-1, 0), (-1, 1), (0, 1), (1, 1),
            (1, 0), (1, -1), (0, -1), (-1, -1),
        )

    def test_moore_opposite_directions_cancel(self):
        offs = moore8().offsets
        for d in range(4):
            paired = np.add(offs[d], offs[d + 4])
            assert tuple(paired) == (0, 0)

    def test_duplicate_offsets_rejected(self):
        with pytest.raises(ValueError):
            Topology(offsets=((0, 1), (0, 1)))

    def test_zero_offset_rejected(self):
        with pytest.raises(ValueError):
            Topology(offsets=((0, 0), (0, 1)))


class TestBuildGeneratorSpace:
    def test_stroke_space_has_32_members(self, stroke_space):
        assert stroke_space.size == 32
        assert stroke_space.bsg_order == 8

    def test_single_zero_row_degenerate_space(self):
        space = build_generator_space([[0, 0, 0, 0]], four_neighbor())
        assert space.size == 4

    def test_bond_value_above_row_count_rejected(self):
        with pytest.raises(BondValueOutOfRange):
            build_generator_space(
                [[0, 0, 0, 0], [5, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
                four_neighbor(),
            )

    def test_row_length_mismatch_rejected(self):
        with pytest.raises(RowLengthMismatch):
            build_generator_space([[0, 0, 0]], four_neighbor())


class TestTransformedBonds:
    def test_identity_transform_returns_row(self, stroke_space):
        g = GeneratorInstance(alpha=1, s=1)
        assert transformed_bonds(stroke_space, g).tolist() == [2, 3, 4, 0, 0, 0, 0, 0]

    def test_s2_shifts_one_slot_clockwise(self, demo_space):
        g = GeneratorInstance(alpha=1, s=2)
        assert transformed_bonds(demo_space, g).tolist() == [4, 1, 2, 3]

    def test_s3_twice_is_identity_on_arity_4(self, demo_space):
        # applying the rotation by 2 twice returns every row to itself
        row = transformed_bonds(demo_space, GeneratorInstance(alpha=1, s=1))
        once = np.roll(row, 3 - 1)
        twice = np.roll(once, 3 - 1)
        assert twice.tolist() == row.tolist()

    @given(s=st.integers(min_value=1, max_value=8), alpha=st.integers(0, 3))
    def test_full_cycle_is_identity(self, s, alpha):
        space = build_generator_space(STROKE_G0, moore8())
        row = transformed_bonds(space, GeneratorInstance(alpha, 1))
        rotated = row
        for _ in range(space.bsg_order):
            rotated = np.roll(rotated, 1)
        assert rotated.tolist() == row.tolist()
        # the s-fold rotation equals transformed_bonds directly
        assert transformed_bonds(space, GeneratorInstance(alpha, s)).tolist() == \
            np.roll(row, s - 1).tolist()

    def test_orbit_partition_on_nonzero_rows(self, stroke_space):
        orbits = {}
        for alpha in range(stroke_space.row_count):
            orbits[alpha] = {
                tuple(transformed_bonds(stroke_space, GeneratorInstance(alpha, s)))
                for s in range(1, 9)
            }
        # nonzero rows never share a transformed row across alphas
        assert not orbits[1] & orbits[2]
        # all-zero rows coincide as vectors but are distinguished by alpha
        assert orbits[0] == orbits[3]
        pairs_0 = {(0, bonds) for bonds in orbits[0]}
        pairs_3 = {(3, bonds) for bonds in orbits[3]}
        assert not pairs_0 & pairs_3


class TestGeIndex:
    def test_center_seed_is_5(self, demo_space):
        assert ge_index(demo_space, GeneratorInstance(alpha=1, s=1)) == 5

    def test_worked_example_values(self, demo_space):
        expected = {(0, 1): 1, (1, 2): 6, (2, 3): 11, (3, 4): 16}
        for (alpha, s), ge in expected.items():
            assert ge_index(demo_space, GeneratorInstance(alpha, s)) == ge

    def test_round_trip_over_all_members(self, stroke_space):
        seen = set()
        for alpha in range(stroke_space.row_count):
            for s in range(1, stroke_space.bsg_order + 1):
                g = GeneratorInstance(alpha, s)
                ge = ge_index(stroke_space, g)
                assert from_ge_index(stroke_space, ge) == g
                seen.add(ge)
        assert seen == set(range(1, stroke_space.size + 1))

    def test_inverse_range_checked(self, stroke_space):
        with pytest.raises(IndexOutOfRange):
            from_ge_index(stroke_space, 0)
        with pytest.raises(IndexOutOfRange):
            from_ge_index(stroke_space, 33)


class TestNeighborSite:
    def test_direction_1_is_top(self):
        assert neighbor_site(moore8(), (5, 5), 1, (10, 10)) == (4, 5)

    def test_direction_3_is_right(self):
        assert neighbor_site(moore8(), (5, 5), 3, (10, 10)) == (5, 6)

    def test_out_of_bounds_returns_none(self):
        assert neighbor_site(moore8(), (0, 0), 1, (10, 10)) is None

    def test_invalid_direction_raises(self):
        with pytest.raises(InvalidDirection):
            neighbor_site(moore8(), (5, 5), 9, (10, 10))

    def test_all_eight_displacements(self):
        topo = moore8()
        got = [neighbor_site(topo, (5, 5), d, (12, 12)) for d in range(1, 9)]
        assert got == [
            (4, 5), (4, 6), (5, 6), (6, 6), (6, 5), (6, 4), (5, 4), (4, 4)
        ]


class TestConfiguration:
    def test_empty_sites_forced_canonical(self):
        with pytest.raises(ValueError):
            Configuration(
                alpha=np.zeros((2, 2), dtype=int),
                s=np.full((2, 2), 2, dtype=int),
            )

    def test_with_generator_is_functional(self):
        base = Configuration.empty(3, 3)
        edited = base.with_generator((1, 1), GeneratorInstance(1, 4))
        assert base.alpha[1, 1] == 0
        assert edited.at((1, 1)) == GeneratorInstance(1, 4)

    def test_grids_are_immutable(self):
        cfg = Configuration.empty(3, 3)
        with pytest.raises(ValueError):
            cfg.alpha[0, 0] = 1


class TestJsonRoundTrips:
    def test_space_round_trip(self, stroke_space):
        doc = space_to_json(stroke_space)
        again = space_from_json(doc)
        assert np.array_equal(again.bond_table, stroke_space.bond_table)
        assert again.topology == stroke_space.topology
        assert set(doc) == {"arity", "offsets", "g0"}

    def test_config_round_trip(self):
        cfg = Configuration.empty(4, 3).with_generator((2, 1), GeneratorInstance(2, 5))
        doc = config_to_json(cfg)
        again = config_from_json(doc)
        assert np.array_equal(again.alpha, cfg.alpha)
        assert np.array_equal(again.s, cfg.s)
        assert (doc["w"], doc["h"]) == (4, 3)
