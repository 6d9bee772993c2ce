import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gapcert.errors import SplitError, UnreachablePairError
from gapcert.lattice import (
    EmbeddedGraph,
    RectangleFamily,
    ball,
    chain_graph,
    check_embedding,
    enumerate_windows,
    graph_distance,
    grid_graph,
    make_region,
    projected_coords,
    rectangle_members,
    region_distance,
    side_length,
    split_pairs,
)


class TestSideLength:
    def test_zeroth_power(self):
        assert side_length(0, 3) == 1.0

    def test_k_equals_dimension(self):
        assert side_length(2, 2) == 1.5

    def test_square_in_one_dimension(self):
        assert side_length(2, 1) == 2.25

    def test_monotone_in_k(self):
        vals = [side_length(k, 2) for k in range(20)]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            side_length(-1, 1)


class TestGraphDistance:
    def test_chain_endpoints(self):
        g = chain_graph(4)
        assert graph_distance(g, 0, 3) == 3

    def test_self_distance(self):
        g = grid_graph(3, 3)
        for v in g.ids:
            assert graph_distance(g, v, v) == 0

    def test_grid_corner_to_corner(self):
        g = grid_graph(3, 3)
        assert graph_distance(g, 0, 8) == 4

    def test_unreachable(self):
        g = EmbeddedGraph((0, 1), np.array([[0.0], [1.0]]), {0: (), 1: ()}, 1)
        with pytest.raises(UnreachablePairError):
            graph_distance(g, 0, 1)


class TestBall:
    def test_radius_zero(self):
        g = chain_graph(5)
        assert ball(g, 2, 0) == (2,)

    def test_chain_interior(self):
        g = chain_graph(7)
        assert ball(g, 3, 1) == (2, 3, 4)

    def test_grid_interior_radius_two(self):
        g = grid_graph(5, 5)
        center = 12
        assert len(ball(g, center, 2)) == 13


class TestCheckEmbedding:
    def test_unit_chain_is_tight(self):
        rep = check_embedding(chain_graph(6))
        assert rep.ok and rep.fitted_c == 1.0

    def test_unreachable_pair_reported(self):
        g = EmbeddedGraph(
            (0, 1), np.array([[0.0], [1.0]]), {0: (), 1: ()}, 1
        )
        rep = check_embedding(g)
        assert not rep.ok
        assert rep.violation == (0, 1)
        assert "unreachable" in rep.message

    def test_duplicate_coordinates(self):
        g = EmbeddedGraph(
            (0, 1), np.array([[0.5], [0.5]]), {0: (1,), 1: (0,)}, 1
        )
        rep = check_embedding(g)
        assert not rep.ok
        assert "duplicate coordinates" in rep.message

    def test_honeycomb_patch_constant_below_two(self):
        # two fused unit hexagons
        pts = {}
        edges = set()
        for h, center in enumerate([(0.0, 0.0), (math.sqrt(3.0), 0.0)]):
            ring = []
            for j in range(6):
                ang = math.pi / 6 + j * math.pi / 3
                p = (
                    round(center[0] + math.cos(ang), 9),
                    round(center[1] + math.sin(ang), 9),
                )
                if p not in pts:
                    pts[p] = len(pts)
                ring.append(pts[p])
            for a, b in zip(ring, ring[1:] + ring[:1]):
                edges.add((min(a, b), max(a, b)))
        ids = tuple(range(len(pts)))
        coords = np.zeros((len(pts), 2))
        for p, idx in pts.items():
            coords[idx] = p
        adjacency = {v: tuple(sorted(w for (a, b) in edges for w in (a, b) if (v in (a, b)) and w != v)) for v in ids}
        g = EmbeddedGraph(ids, coords, adjacency, 2, c_gamma=2.0)
        rep = check_embedding(g)
        assert rep.ok
        assert 1.0 <= rep.fitted_c <= 2.0

    def test_grid_fitted_constant_is_sqrt_d(self):
        rep = check_embedding(grid_graph(4, 4))
        assert rep.ok
        assert rep.fitted_c == pytest.approx(math.sqrt(2.0), rel=1e-12)


class TestRectangleMembers:
    def test_chain_first_two_sites(self):
        # k = 0, D = 1: side l_1 = 1.5 covers integer points {0, 1}
        g = chain_graph(6)
        fam = RectangleFamily(0, 1, (0.0,))
        assert rectangle_members(g, fam) == (0, 1)

    def test_translate_off_graph(self):
        g = chain_graph(4)
        fam = RectangleFamily(0, 1, (100.0,))
        assert rectangle_members(g, fam) == ()

    def test_grid_block_count(self):
        g = grid_graph(6, 6)
        fam = RectangleFamily(2, 2, (0.0, 0.0))
        members = rectangle_members(g, fam)
        # independent enumeration of the box
        lo = np.zeros(2)
        hi = np.array(fam.sides)
        expected = [
            v for v in g.ids if np.all(g.coord(v) >= lo - 1e-9) and np.all(g.coord(v) <= hi + 1e-9)
        ]
        assert members == tuple(expected)
        assert len(members) == 6

    def test_monotone_under_enlargement(self):
        g = grid_graph(5, 5)
        small = rectangle_members(g, RectangleFamily(1, 2, (0.5, 0.5)))
        large = rectangle_members(g, RectangleFamily(4, 2, (0.5, 0.5)))
        assert set(small) <= set(large)

    def test_axis_permutation_swaps_sides(self):
        fam = RectangleFamily(2, 2, (0.0, 0.0), (1, 0))
        base = RectangleFamily(2, 2, (0.0, 0.0))
        assert fam.sides == tuple(reversed(base.sides))


class TestSplitPairs:
    def test_s_zero_empty(self):
        g = chain_graph(12)
        assert split_pairs(tuple(range(12)), 6, 0, g) == []

    def test_single_slab_structure(self):
        g = chain_graph(12)
        pairs = split_pairs(tuple(range(12)), 6, 1, g)
        assert len(pairs) == 1
        p = pairs[0]
        assert set(p.A) | set(p.B) == set(range(12))
        assert p.separation >= 1
        a_only = set(p.A) - set(p.B)
        b_only = set(p.B) - set(p.A)
        assert p.separation == region_distance(g, a_only, b_only)

    def test_two_slabs_disjoint_overlaps(self):
        g = chain_graph(12)
        pairs = split_pairs(tuple(range(12)), 7, 2, g)
        assert len(pairs) == 2
        overlaps = [set(p.A) & set(p.B) for p in pairs]
        assert not (overlaps[0] & overlaps[1])

    def test_separation_bound_nontrivial_scale(self):
        k = 8
        n = 40
        g = chain_graph(n)
        for s in (1, 2, 3):
            for p in split_pairs(tuple(range(n)), k, s, g):
                bound = (side_length(k, 1) / (8 * s) - 2.0) / g.c_gamma
                assert p.separation >= bound - 1e-9

    def test_projection_equality_2d(self):
        g = grid_graph(12, 14)
        fam = RectangleFamily(11, 2, (0.0, 0.0))
        Y = rectangle_members(g, fam)
        for p in split_pairs(Y, 11, 1, g):
            assert projected_coords(g, p.A, p.alpha) == projected_coords(g, p.B, p.alpha)
            assert set(p.A) | set(p.B) == set(Y)

    def test_insufficient_width(self):
        g = chain_graph(12)
        with pytest.raises(SplitError, match="insufficient width"):
            split_pairs(tuple(range(12)), 5, 1, g)  # s=1 > l_5/8

    def test_unsupported_region(self):
        # one outlier row breaks the projection-match requirement
        g = grid_graph(20, 3)
        Y = make_region([v for v in range(20 * 3) if v % 3 == 0] + [1])
        with pytest.raises(SplitError):
            split_pairs(Y, 6, 1, g)


class TestEnumerateWindows:
    def test_windows_cover_full_chain(self):
        g = chain_graph(13)
        wins = enumerate_windows(g, 6)
        regions = [Y for _, Y in wins]
        assert tuple(range(13)) in regions

    def test_windows_nonempty_and_unique(self):
        g = grid_graph(4, 4)
        wins = enumerate_windows(g, 2)
        regions = [Y for _, Y in wins]
        assert all(regions)
        assert len(set(regions)) == len(regions)

    def test_axis_permutations_reach_rotated_windows(self):
        # on an anisotropic grid the permuted rectangle captures blocks the
        # axis-aligned placement cannot
        g = grid_graph(6, 3)
        plain = {Y for _, Y in enumerate_windows(g, 2)}
        permuted = {Y for _, Y in enumerate_windows(g, 2, axis_perms=True)}
        assert plain <= permuted
        assert permuted - plain


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=2, max_value=9), st.integers(min_value=2, max_value=9))
def test_embedding_inequalities_hold_with_fitted_constant(nx, ny):
    g = grid_graph(nx, ny)
    rep = check_embedding(g)
    assert rep.ok
    c = rep.fitted_c
    for i in g.ids[:: max(1, len(g.ids) // 6)]:
        for j in g.ids[:: max(1, len(g.ids) // 6)]:
            if i == j:
                continue
            e = g.euclidean(i, j)
            d = graph_distance(g, i, j)
            assert d <= c * e + 1e-9
            assert d >= e / c - 1e-9
