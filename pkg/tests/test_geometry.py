import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quasispline.domains import Ball, LShape, PredicateDomain, Scaled, Staircase, make_domain, unit_cube
from quasispline.geometry import (
    ChainNotFoundError,
    active_cells,
    chain_endpoints_ok,
    check_segment_chain,
    color_classes,
    etype_probe,
    interior_cells,
    interior_chain,
    meeting_cells,
    nearest_interior,
    segment_chain,
)


def test_active_cells_unit_interval_hat_level_one():
    np.testing.assert_array_equal(active_cells(unit_cube(1), 1, 1).ravel(), [-1, 0, 1])


@pytest.mark.parametrize("d,k,m", [(1, 3, 2), (2, 2, 1), (2, 3, 3), (3, 1, 2)])
def test_active_cell_count_on_cube(d, k, m):
    assert active_cells(unit_cube(d), k, m).shape[0] == (2**k + m) ** d


def test_interior_cells_of_cube():
    assert interior_cells(unit_cube(2), 1).shape[0] == 0
    got = {tuple(c) for c in interior_cells(unit_cube(2), 2)}
    assert got == {(1, 1), (1, 2), (2, 1), (2, 2)}


def test_cell_sets_are_nested_and_sorted():
    D = Ball((0.5, 0.5), 0.5)
    inner = {tuple(c) for c in interior_cells(D, 4)}
    meet = meeting_cells(D, 4)
    assert inner <= {tuple(c) for c in meet}
    keys = [tuple(c) for c in meet]
    assert keys == sorted(keys)


def _brute_nearest(cells, nu):
    dist = np.max(np.abs(cells - nu), axis=1)
    best = cells[dist == dist.min()]
    return min(tuple(c) for c in best)


def test_nearest_interior_examples():
    D = unit_cube(2)
    assert tuple(nearest_interior(D, 2, (-1, 0))) == (1, 1)
    assert tuple(nearest_interior(D, 2, (0, 3))) == (1, 2)


@pytest.mark.parametrize("D", [unit_cube(2), Ball((0.5, 0.5), 0.5), LShape(), Staircase()])
def test_nearest_interior_matches_brute_force(D):
    k = 3
    cells = interior_cells(D, k)
    act = active_cells(D, k, 2)
    got = nearest_interior(D, k, act)
    for nu, g in zip(act, got):
        assert tuple(g) == _brute_nearest(cells, nu)


def test_color_classes_partition_and_sizes():
    D = unit_cube(2)
    m = 2
    ratios = []
    for k in range(3, 7):
        cells = active_cells(D, k, m)
        classes = color_classes(cells, m)
        assert sum(len(v) for v in classes.values()) == len(cells)
        seen = set()
        for sigma, part in classes.items():
            keys = {tuple(c) for c in part}
            assert not keys & seen
            seen |= keys
            assert np.all(np.mod(part, m + 1) == sigma)
            ratios.append(len(part) / 2 ** (k * 2))
    assert max(ratios) / min(ratios) <= 4


def test_segment_chain_unit_interval_example():
    chain = segment_chain(0, [0.5], [2.0])
    np.testing.assert_array_equal(chain.cells.ravel(), [0, 1, 2])
    assert chain.length == 2


@given(
    st.integers(1, 3),
    st.integers(0, 5),
    st.lists(st.floats(-1, 1), min_size=3, max_size=3),
    st.lists(st.floats(-1, 1), min_size=3, max_size=3),
)
def test_segment_chain_validity_and_length_bound(d, k, x0, xi):
    x0, xi = np.array(x0[:d]), np.array(xi[:d])
    chain = segment_chain(k, x0, xi)
    assert check_segment_chain(chain, x0, xi) == []
    assert chain.is_unit_walk()
    assert chain.length <= 4 * d * d * (2**k * np.max(np.abs(xi)) + 1)


def test_interior_chain_on_square_is_straight_walk():
    chain = interior_chain(unit_cube(2), 2, (1, 1), (2, 2))
    assert chain.length == 2 and chain.is_unit_walk()
    assert chain_endpoints_ok(chain, 2, (1, 1), (2, 2))


def test_staircase_chains_between_generations():
    D = Staircase()
    k = 4
    cells = interior_cells(D, k)
    small = cells[cells[:, 0] < 4]  # cells in the narrow steps near the origin
    big = cells[cells[:, 0] >= 8]
    for a in small[:5]:
        for b in big[:: max(1, len(big) // 5)]:
            chain = interior_chain(D, k, a, b, 0, 3)
            assert chain.is_unit_walk()
            assert chain.level - k <= 3
            assert chain_endpoints_ok(chain, k, a, b)
            scale = 2.0**chain.level
            lo = chain.cells / scale
            assert D.boxes_inside(lo, lo + 1 / scale).all()


def test_interior_chain_rejects_non_interior_endpoint():
    with pytest.raises(ValueError):
        interior_chain(unit_cube(2), 2, (0, 0), (2, 2))


def test_disconnected_predicate_domain_has_no_chain():
    def two_blobs(x):
        return (np.abs(x[:, 1] - 0.5) < 0.45) & ((np.abs(x[:, 0] - 0.2) < 0.15) | (np.abs(x[:, 0] - 0.8) < 0.15))

    D = PredicateDomain(two_blobs, (0.0, 0.0), (1.0, 1.0))
    cells = interior_cells(D, 4)
    a = cells[cells[:, 0] < 8][0]
    b = cells[cells[:, 0] >= 8][0]
    with pytest.raises(ChainNotFoundError):
        interior_chain(D, 4, a, b, 0, 1)


def test_etype_probe_cube_ball_staircase():
    assert etype_probe(unit_cube(2), range(1, 5), 3, 10).K0 == 2
    assert etype_probe(Ball((0.5, 0.5), 0.5), range(2, 6), 3, 10).ok
    rep = etype_probe(Staircase(), range(2, 6), 3, 10)
    assert rep.ok and rep.kappa0 <= 3
    assert np.isfinite(rep.Gamma0) and np.isfinite(rep.c0)


def test_scaled_domain_maps_membership(rng):
    base = Ball((0.5, 0.5), 0.5)
    D = Scaled(base, 0.5, (1.0, -1.0))
    x = rng.random((200, 2))
    np.testing.assert_array_equal(D.contains(1.0 + 0.5 * x - [0, 2.0]), base.contains(x))


def test_make_domain_catalog():
    assert make_domain({"domain": "unit-cube", "dim": 3}).d == 3
    assert isinstance(make_domain({"domain": "staircase"}), Staircase)
    with pytest.raises(ValueError):
        make_domain({"domain": "torus"})
