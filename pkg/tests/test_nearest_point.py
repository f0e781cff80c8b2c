import itertools

import numpy as np
import pytest

from turbolp.nearest_point import (
    Corral,
    NumericalFailure,
    SingularFactorError,
    WolfeTolerances,
    affine_minimizer,
    factor_add,
    factor_remove,
    gram_residual,
    nearest_point,
    theta_step,
    warm_start_shift,
)
from turbolp.turbo import assign_edge_costs
from turbolp.wsp import ConstraintsOracle, ImagePoint


class FiniteOracle:
    """Linear minimisation over the convex hull of a fixed point set."""

    def __init__(self, V):
        self.V = np.asarray(V, dtype=float)  # (m, dim)

    def __call__(self, gamma):
        i = int(np.argmin(self.V @ gamma))
        return ImagePoint(self.V[i].copy(), i)


def build(points):
    P = np.asarray(points, dtype=float).T
    R = np.zeros((0, 0))
    for j in range(P.shape[1]):
        R = factor_add(R, P[:, :j], P[:, j])
    return P, R


def brute_projection(V, r):
    """Min-norm point of conv(V) - r by trying the affine minimiser of every small subset."""
    V = np.asarray(V) - r
    dim = V.shape[1]
    best = None
    for size in range(1, dim + 2):
        for idx in itertools.combinations(range(len(V)), size):
            P = V[list(idx)].T
            # minimise |P l|^2 s.t. sum l = 1 via the KKT system
            K = np.block([[2 * P.T @ P, np.ones((size, 1))], [np.ones((1, size)), np.zeros((1, 1))]])
            rhs = np.zeros(size + 1)
            rhs[-1] = 1
            sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
            lam = sol[:size]
            if lam.min() < -1e-12:
                continue
            y = P @ lam
            if best is None or y @ y < best @ best - 1e-14:
                best = y
    return best + r


def test_single_vertex():
    v = np.array([1.0, -2.0, 3.0])
    res = nearest_point(FiniteOracle([v]), np.array([5.0, 5.0, 5.0]))
    assert np.allclose(res.nearest, v)


def test_triangle():
    res = nearest_point(FiniteOracle([[0, 2], [2, 0], [2, 2]]), np.zeros(2))
    assert np.allclose(res.nearest, [1, 1], atol=1e-12)


@pytest.mark.parametrize("dim,seed", [(3, 0), (3, 1), (5, 2), (5, 3)])
def test_random_polytopes_match_brute_force(dim, seed):
    rng = np.random.default_rng(seed)
    V = rng.normal(size=(8, dim)) + 1.5
    r = rng.normal(size=dim)
    res = nearest_point(FiniteOracle(V), r, check=True)
    assert np.allclose(res.nearest, brute_projection(V, r), atol=1e-9)


def test_projection_certificate_on_tiny_code(tiny_code):
    tc = tiny_code
    rng = np.random.default_rng(5)
    costs = assign_edge_costs(tc, rng.normal(size=tc.n))
    oracle = ConstraintsOracle(tc, costs)
    r = np.zeros(tc.k + 1)
    r[-1] = oracle(np.eye(tc.k + 1)[-1]).cost - 1.0
    res = nearest_point(oracle, r, check=True)
    a = r - res.nearest
    # first-order optimality over the whole polytope, via its minimiser in direction -a
    top = oracle(-a).v
    assert a @ top <= a @ res.nearest + 1e-9
    # decomposition reproduces the nearest point
    assert np.allclose(res.vertices @ res.coeffs, res.nearest, atol=1e-8)
    assert res.coeffs.min() > 0 and res.coeffs.sum() == pytest.approx(1)
    assert len(res.corral) <= tc.k + 2


def test_separation_against_sampled_vertices(lte40):
    tc = lte40
    rng = np.random.default_rng(6)
    costs = assign_edge_costs(tc, rng.normal(2, 2, size=tc.n))
    costs = (costs[0] * 0.1, costs[1] * 0.1)
    oracle = ConstraintsOracle(tc, costs)
    r = np.zeros(tc.k + 1)
    r[-1] = oracle(np.eye(tc.k + 1)[-1]).cost
    res = nearest_point(oracle, r, check=True)
    a = r - res.nearest
    b = a @ res.nearest
    scale = max(1.0, np.linalg.norm(a) * np.abs(res.vertices).max())
    for _ in range(1000):
        v = oracle(rng.normal(size=tc.k + 1)).v
        assert a @ v <= b + 1e-7 * scale
    if np.linalg.norm(a) > 1e-6:
        assert a @ r > b
    x = res.nearest - r
    p = oracle(x).v - r
    assert x @ p >= x @ x - 1e-10 * max(1.0, x @ x)


def test_warm_matches_cold(lte40):
    tc = lte40
    rng = np.random.default_rng(7)
    done = 0
    while done < 100:
        costs = assign_edge_costs(tc, rng.normal(1.5, 2, size=tc.n))
        oracle = ConstraintsOracle(tc, (costs[0] * 0.1, costs[1] * 0.1))
        r = np.zeros(tc.k + 1)
        r[-1] = oracle(np.eye(tc.k + 1)[-1]).cost
        first = nearest_point(oracle, r)
        a = r - first.nearest
        if np.linalg.norm(a) < 1e-6 or a[-1] >= 0:
            continue
        r2 = np.zeros_like(r)
        r2[-1] = (a @ first.nearest) / a[-1]
        warm = nearest_point(oracle, r2, warm=warm_start_shift(first.corral, r - r2))
        cold = nearest_point(oracle, r2)
        assert np.allclose(warm.nearest, cold.nearest, atol=1e-6)
        done += 1


def test_major_cycle_cap():
    rng = np.random.default_rng(8)
    V = rng.normal(size=(30, 6))
    with pytest.raises(NumericalFailure):
        nearest_point(FiniteOracle(V), 5 * np.ones(6), tol=WolfeTolerances(max_major=1))


def test_affine_minimizer_symmetric():
    for pts, expect in (([[1, 0], [0, 1]], [0.5, 0.5]), ([[2, 0], [0, 2]], [1, 1])):
        P, R = build(pts)
        y, lam = affine_minimizer(R, P)
        assert np.allclose(y, expect)
        assert lam.sum() == pytest.approx(1)


def test_affine_minimizer_normal_equations():
    rng = np.random.default_rng(9)
    for _ in range(20):
        P, R = build(rng.normal(size=(3, 3)))
        y, lam = affine_minimizer(R, P)
        # l = G^{-1} e / (e' G^{-1} e) with G = P'P
        z = np.linalg.solve(P.T @ P, np.ones(3))
        ref = z / z.sum()
        assert np.allclose(lam, ref, atol=1e-8)
        assert np.allclose(y, P @ ref, atol=1e-8)


def test_affine_minimizer_singular():
    with pytest.raises(SingularFactorError):
        affine_minimizer(np.array([[1.0, 2.0], [0.0, 0.0]]), np.eye(2))


def test_theta_examples():
    assert theta_step([0.5, 0.5], [1.5, -0.5]) == pytest.approx(0.5)
    assert theta_step([0.3, 0.7], [0.4, 0.6]) == 1.0
    lam, mu = np.array([0.2, 0.3, 0.5]), np.array([0.6, 0.6, -0.2])
    th = theta_step(lam, mu)
    assert th == pytest.approx(2 / 7)
    z = th * lam + (1 - th) * mu
    assert z.min() >= -1e-15 and abs(z[2]) < 1e-15


def test_factor_add_to_empty():
    p = np.array([1.0, 2.0, 2.0])
    R = factor_add(np.zeros((0, 0)), np.zeros((3, 0)), p)
    assert R.shape == (1, 1) and R[0, 0] == pytest.approx(np.sqrt(10))


def test_factor_add_remove_round_trip():
    rng = np.random.default_rng(10)
    P, R = build(rng.normal(size=(3, 4)))
    R2 = factor_add(R, P, rng.normal(size=4))
    assert np.allclose(factor_remove(R2, 3), R, atol=1e-10)


def test_factor_duplicate_point():
    P, R = build([[1.0, 2.0], [3.0, -1.0]])
    with pytest.raises(SingularFactorError):
        factor_add(R, P, P[:, 0])


def test_factor_random_updates():
    rng = np.random.default_rng(11)
    P, R = build(rng.normal(size=(2, 5)))
    for step in range(10):
        if step % 3 == 2 and P.shape[1] > 1:
            j = int(rng.integers(P.shape[1]))
            R = factor_remove(R, j)
            P = np.delete(P, j, axis=1)
        else:
            p = rng.normal(size=5)
            R = factor_add(R, P, p)
            P = np.column_stack([P, p])
        assert gram_residual(R, P) <= 1e-8
        assert np.allclose(R, np.triu(R))


def test_warm_start_shift():
    rng = np.random.default_rng(12)
    P, R = build(rng.normal(size=(4, 6)))
    c = Corral(P, np.full(4, 0.25), R, [None] * 4)
    same = warm_start_shift(c, np.zeros(6))
    assert np.allclose(same.R, R, atol=1e-12)
    delta = np.zeros(6)
    delta[-1] = 0.7
    moved = warm_start_shift(c, delta)
    assert np.allclose(moved.points, P + delta[:, None])
    assert np.array_equal(moved.coeffs, c.coeffs)
    assert gram_residual(moved.R, moved.points) <= 1e-8

    p = rng.normal(size=3)
    one = Corral(p[:, None], np.ones(1), np.array([[np.sqrt(1 + p @ p)]]), [None])
    shifted = warm_start_shift(one, -np.eye(3)[-1])
    q = p - np.eye(3)[-1]
    assert shifted.R[0, 0] == pytest.approx(np.sqrt(1 + q @ q))
