import numpy as np
import pytest

from conftest import all_paths, all_words
from turbolp.trellis import encode_path, shortest_path
from turbolp.turbo import assign_edge_costs
from turbolp.wsp import ConstraintsOracle, image_of_paths, minimize_direction


def agreeable_pair(tc, x):
    x = np.asarray(x)
    return encode_path(tc.trellis, x), encode_path(tc.trellis, x[tc.perm])


def test_agreeable_pair_on_axis(small_code):
    tc = small_code
    costs = assign_edge_costs(tc, np.random.default_rng(0).normal(size=tc.n))
    x = np.random.default_rng(1).integers(0, 2, tc.k)
    pt = image_of_paths(tc, costs, *agreeable_pair(tc, x))
    assert not pt.g.any()


def test_single_disagreement(small_code):
    tc = small_code
    costs = assign_edge_costs(tc, np.zeros(tc.n))
    x = np.zeros(tc.k, dtype=int)
    x1 = x.copy()
    x1[5] = 1
    p1 = encode_path(tc.trellis, x1)
    p2 = encode_path(tc.trellis, x[tc.perm])
    pt = image_of_paths(tc, costs, p1, p2)
    expect = np.zeros(tc.k)
    expect[5] = 1
    assert np.array_equal(pt.g, expect)
    assert pt.cost == 0


def test_cost_axis_direction_is_unconstrained_minimum(small_code):
    tc = small_code
    costs = assign_edge_costs(tc, np.random.default_rng(2).normal(size=tc.n))
    gamma = np.zeros(tc.k + 1)
    gamma[-1] = 1
    pt = minimize_direction(tc, costs, gamma)
    best = shortest_path(tc.trellis, costs[0])[1] + shortest_path(tc.trellis, costs[1])[1]
    assert pt.cost == pytest.approx(best, abs=1e-12)


def test_unit_direction_with_zero_costs(tiny_code):
    tc = tiny_code
    costs = assign_edge_costs(tc, np.zeros(tc.n))
    for i in range(tc.k):
        gamma = np.zeros(tc.k + 1)
        gamma[i] = 1
        pt = minimize_direction(tc, costs, gamma)
        assert pt.g[i] == -1 and gamma @ pt.v == -1
        x1, x2 = tc.info_from_paths(*pt.paths)
        assert x1[i] == 0 and x2[i] == 1


def test_oracle_exact_over_all_pairs(tiny_code):
    tc = tiny_code
    rng = np.random.default_rng(3)
    costs = assign_edge_costs(tc, rng.normal(size=tc.n))
    paths = all_paths(tc.trellis)
    V = np.array([[*tc.constraint_values(p1, p2), costs[0].reshape(-1)[p1].sum() + costs[1].reshape(-1)[p2].sum()]
                  for p1 in paths for p2 in paths])
    assert V.shape[0] == 4 ** tc.k
    for _ in range(25):
        gamma = rng.normal(size=tc.k + 1)
        pt = minimize_direction(tc, costs, gamma)
        assert gamma @ pt.v == pytest.approx((V @ gamma).min(), abs=1e-10)
        assert np.allclose(pt.v, image_of_paths(tc, costs, *pt.paths).v)


def test_oracle_beats_random_pairs(lte40):
    tc = lte40
    rng = np.random.default_rng(4)
    costs = assign_edge_costs(tc, rng.normal(size=tc.n))
    gamma = rng.normal(size=tc.k + 1)
    best = gamma @ minimize_direction(tc, costs, gamma).v
    for _ in range(1000):
        p1 = encode_path(tc.trellis, rng.integers(0, 2, tc.k))
        p2 = encode_path(tc.trellis, rng.integers(0, 2, tc.k))
        assert best <= gamma @ image_of_paths(tc, costs, p1, p2).v + 1e-10


def test_returned_points_are_integral(lte40):
    tc = lte40
    rng = np.random.default_rng(5)
    costs = assign_edge_costs(tc, rng.normal(size=tc.n))
    for _ in range(50):
        pt = minimize_direction(tc, costs, rng.normal(size=tc.k + 1))
        assert set(np.unique(pt.g)) <= {-1.0, 0.0, 1.0}


def test_oracle_logging(small_code):
    tc = small_code
    costs = assign_edge_costs(tc, np.zeros(tc.n))
    o = ConstraintsOracle(tc, costs, log=True)
    o(np.ones(tc.k + 1))
    o(-np.ones(tc.k + 1))
    assert o.calls == 2 and len(o.history) == 2
    with pytest.raises(ValueError):
        o(np.ones(tc.k))
