"""Constraints-space image of the path polytope and its linear-minimization oracle.

A path pair ``(P1, P2)`` maps to ``v = (g_1, ..., g_k, c)`` in R^(k+1) where
``g_i`` measures disagreement on information bit ``i`` and ``c`` is the summed
edge cost.  The image polytope is never materialised: linear functionals are
minimised over it by one shortest path per trellis with modified costs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .trellis import _sp_forward
from .turbo import TurboCode


@dataclass
class ImagePoint:
    v: np.ndarray
    paths: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def g(self) -> np.ndarray:
        return self.v[:-1]

    @property
    def cost(self) -> float:
        return float(self.v[-1])


def image_of_paths(tc: TurboCode, costs, path1, path2) -> ImagePoint:
    c1, c2 = costs
    cost = c1.reshape(-1)[path1].sum() + c2.reshape(-1)[path2].sum()
    v = np.append(tc.constraint_values(path1, path2), cost)
    return ImagePoint(v, (np.asarray(path1), np.asarray(path2)))


def image_of_flow(tc: TurboCode, costs, f1, f2) -> np.ndarray:
    c1, c2 = costs
    return np.append(tc.constraint_values_flow(f1, f2), np.sum(c1 * f1) + np.sum(c2 * f2))


@njit(cache=True)
def _minimize_kernel(next_state, c1, c2, gamma, perm, dist, pred):
    k = perm.size
    n_seg, n_states, _ = c1.shape
    w = gamma[k]
    m1 = w * c1
    m2 = w * c2
    for i in range(k):
        for s in range(n_states):
            m1[i, s, 1] += gamma[i]
            m2[i, s, 1] -= gamma[perm[i]]
    p1, _ = _sp_forward(next_state, m1, dist, pred)
    p2, _ = _sp_forward(next_state, m2, dist, pred)
    flat1 = c1.ravel()
    flat2 = c2.ravel()
    v = np.zeros(k + 1)
    cost = 0.0
    for i in range(n_seg):
        cost += flat1[p1[i]] + flat2[p2[i]]
    for i in range(k):
        v[i] += p1[i] & 1
        v[perm[i]] -= p2[i] & 1
    v[k] = cost
    return p1, p2, v


def _scratch(tc: TurboCode):
    t = tc.trellis
    return np.empty((t.n_segments + 1, t.n_states)), np.zeros((t.n_segments + 1, t.n_states), dtype=np.int64)


def minimize_direction(tc: TurboCode, costs, gamma, scratch=None) -> ImagePoint:
    """Vertex of the image polytope minimising ``gamma . v``.

    Trellis 1 pays ``+gamma_i`` on input-1 edges of segment ``i``, trellis 2
    pays ``-gamma_perm(j)`` on input-1 edges of segment ``j``, and every edge
    cost is weighted by the last component of ``gamma``.
    """
    gamma = np.asarray(gamma, dtype=np.float64)
    k = tc.k
    if gamma.shape != (k + 1,):
        raise ValueError(f"direction must have length {k + 1}")
    dist, pred = scratch if scratch is not None else _scratch(tc)
    c1, c2 = costs
    p1, p2, v = _minimize_kernel(tc.trellis.next_state, np.ascontiguousarray(c1, dtype=np.float64),
                                 np.ascontiguousarray(c2, dtype=np.float64), gamma, tc.perm, dist, pred)
    return ImagePoint(v, (p1, p2))


class ConstraintsOracle:
    """Linear-minimization oracle bound to one cost assignment.

    With ``log=True`` every returned path pair is appended to ``history``.
    """

    def __init__(self, tc: TurboCode, costs, log: bool = False):
        self.tc = tc
        self.costs = (np.asarray(costs[0], dtype=np.float64), np.asarray(costs[1], dtype=np.float64))
        self.log = log
        self.history: list[tuple[np.ndarray, np.ndarray]] = []
        self.calls = 0
        self._scratch = _scratch(tc)

    @property
    def dim(self) -> int:
        return self.tc.k + 1

    def __call__(self, gamma) -> ImagePoint:
        self.calls += 1
        point = minimize_direction(self.tc, self.costs, gamma, self._scratch)
        if self.log:
            self.history.append(point.paths)
        return point

    def image(self, path1, path2) -> ImagePoint:
        return image_of_paths(self.tc, self.costs, path1, path2)
