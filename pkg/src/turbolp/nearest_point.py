"""Wolfe's minimum-norm-point algorithm over a polytope given by a linear oracle.

The polytope is accessed only through ``oracle(direction) -> ImagePoint``,
which must return a vertex minimising ``direction . v``.  The working set
(corral) keeps its points shifted by the reference point ``r`` so that the
algorithm computes the point of ``Q - r`` closest to the origin.

The affine minimiser of the corral is obtained from an upper-triangular
factor ``R`` with ``R^T R = e e^T + P^T P`` that is updated in place when
points enter or leave.

Set ``TURBOLP_DEBUG=1`` to check the factor and the norm monotonicity after
every major cycle.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .wsp import ImagePoint

DEBUG = os.environ.get("TURBOLP_DEBUG", "") not in ("", "0")


class SingularFactorError(ArithmeticError):
    """The corral became (numerically) affinely dependent."""


class NumericalFailure(ArithmeticError):
    """An iteration cap was hit or non-finite values appeared."""


@dataclass(frozen=True)
class WolfeTolerances:
    eps_w: float = 1e-10  # optimality gap of the termination test, relative to |x|^2
    eps_zero: float = 1e-14  # |x| below this times max(1, |r|) means r lies in the polytope
    eps_rank: float = 1e-9  # a new factor diagonal below this times its column norm counts as zero
    eps_pos: float = 1e-12  # coefficients at or below this leave the corral
    max_major: int | None = None  # default 50 * dim
    # per major cycle; None bounds it by the corral size, since each minor cycle drops a point
    max_minor: int | None = None


@dataclass
class Corral:
    points: np.ndarray  # (dim, m), shifted by the reference point
    coeffs: np.ndarray  # (m,), convex weights
    R: np.ndarray  # (m, m), upper triangular
    payloads: list = field(default_factory=list)

    def __len__(self):
        return self.points.shape[1]

    @property
    def x(self) -> np.ndarray:
        return self.points @ self.coeffs

    def copy(self) -> "Corral":
        return Corral(self.points.copy(), self.coeffs.copy(), self.R.copy(), list(self.payloads))


@dataclass
class NearestPointResult:
    nearest: np.ndarray
    reference: np.ndarray
    corral: Corral
    major_cycles: int
    minor_cycles: int

    @property
    def vertices(self) -> np.ndarray:
        """Generating vertices (unshifted), one per column."""
        return self.corral.points + self.reference[:, None]

    @property
    def coeffs(self) -> np.ndarray:
        return self.corral.coeffs

    @property
    def payloads(self) -> list:
        return self.corral.payloads


def gram_residual(R: np.ndarray, P: np.ndarray) -> float:
    """Relative deviation of ``R^T R`` from ``e e^T + P^T P``."""
    G = 1.0 + P.T @ P
    return float(np.abs(R.T @ R - G).max() / max(1.0, np.abs(G).max()))


@njit(cache=True)
def _solve_rt(R, b):
    # R^T y = b by forward substitution
    m = b.size
    y = np.empty(m)
    for i in range(m):
        s = b[i]
        for j in range(i):
            s -= R[j, i] * y[j]
        y[i] = s / R[i, i]
    return y


@njit(cache=True)
def _solve_r(R, b):
    m = b.size
    y = np.empty(m)
    for i in range(m - 1, -1, -1):
        s = b[i]
        for j in range(i + 1, m):
            s -= R[i, j] * y[j]
        y[i] = s / R[i, i]
    return y


@njit(cache=True)
def _factor_add(R, P, p, eps_rank):
    m = R.shape[0]
    pp = p @ p
    out = np.zeros((m + 1, m + 1))
    if m > 0:
        col = _solve_rt(R, 1.0 + P.T @ p)
        rho2 = 1.0 + pp - col @ col
        out[:m, :m] = R
        out[:m, m] = col
    else:
        rho2 = 1.0 + pp
    # the new diagonal is compared with the norm of the lifted column
    if not rho2 > eps_rank * eps_rank * (1.0 + pp):
        return out, False
    out[m, m] = np.sqrt(rho2)
    return out, True


@njit(cache=True)
def _factor_remove(R, j):
    m = R.shape[0]
    H = np.empty((m, m - 1))
    for c in range(m - 1):
        src = c if c < j else c + 1
        for i in range(m):
            H[i, c] = R[i, src]
    for c in range(j, m - 1):
        a = H[c, c]
        b = H[c + 1, c]
        h = np.sqrt(a * a + b * b)
        if h == 0.0:
            continue
        cs = a / h
        sn = b / h
        for col in range(c, m - 1):
            t = H[c, col]
            u = H[c + 1, col]
            H[c, col] = cs * t + sn * u
            H[c + 1, col] = -sn * t + cs * u
        H[c + 1, c] = 0.0
    return H[: m - 1, :].copy()


@njit(cache=True)
def _affine_coeffs(R, eps_rank):
    m = R.shape[0]
    dmin = np.inf
    dmax = 0.0
    for i in range(m):
        d = abs(R[i, i])
        dmin = min(dmin, d)
        dmax = max(dmax, d)
    if m == 0 or dmin <= eps_rank * max(1.0, dmax):
        return np.zeros(m), False
    mu = _solve_r(R, _solve_rt(R, np.ones(m)))
    total = mu.sum()
    if not np.isfinite(total) or total == 0.0:
        return mu, False
    return mu / total, True


@njit(cache=True)
def _theta(lam, mu):
    theta = -1.0
    for i in range(mu.size):
        if mu[i] < 0:
            theta = max(theta, mu[i] / (mu[i] - lam[i]))
    return 1.0 if theta < 0 else min(1.0, theta)


# minor-cycle outcome codes
_OK, _SINGULAR, _CAP, _EMPTY = 0, 1, 2, 3


@njit(cache=True)
def _minor_kernel(R, lam, eps_pos, eps_rank, cap):
    """Minor cycles on the factor alone; returns (R, kept columns, coeffs, count, code)."""
    idx = np.arange(lam.size)
    count = 0
    while True:
        mu, ok = _affine_coeffs(R, eps_rank)
        if not ok:
            return R, idx, lam, count, _SINGULAR
        if np.all(mu > eps_pos):
            return R, idx, mu, count, _OK
        count += 1
        if count > cap:
            return R, idx, lam, count, _CAP
        theta = _theta(lam, mu)
        has_neg = np.any(mu < 0)
        if not has_neg:
            new = mu.copy()
        else:
            new = theta * lam + (1.0 - theta) * mu
        drop = new <= eps_pos
        if has_neg:
            best = -1.0
            blocking = -1
            for i in range(mu.size):
                if mu[i] < 0:
                    ratio = mu[i] / (mu[i] - lam[i])
                    if ratio > best:
                        best = ratio
                        blocking = i
            drop[blocking] = True
        if np.all(drop):
            return R, idx, lam, count, _EMPTY
        for j in range(drop.size - 1, -1, -1):
            if drop[j]:
                R = _factor_remove(R, j)
        keep = ~drop
        idx = idx[keep]
        lam = new[keep]
        lam = lam / lam.sum()


def factor_add(R: np.ndarray, P: np.ndarray, p: np.ndarray, eps_rank: float = 1e-9) -> np.ndarray:
    """Factor of the corral ``P`` extended by the column ``p``."""
    R = np.ascontiguousarray(R, dtype=np.float64).reshape(len(R), len(R))
    P = np.asarray(P, dtype=np.float64).reshape(len(p), -1)
    out, ok = _factor_add(R, P, np.asarray(p, dtype=np.float64), eps_rank)
    if not ok:
        raise SingularFactorError("new point is affinely dependent on the corral")
    return out


def factor_remove(R: np.ndarray, j: int) -> np.ndarray:
    """Factor after deleting corral column ``j`` (Givens re-triangularisation)."""
    return _factor_remove(np.asarray(R, dtype=np.float64), int(j))


def affine_minimizer(R: np.ndarray, P: np.ndarray, eps_rank: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Minimum-norm point of the affine hull of ``P`` and its affine coefficients."""
    lam, ok = _affine_coeffs(np.asarray(R, dtype=np.float64), eps_rank)
    if not ok:
        raise SingularFactorError("factor has a vanishing diagonal")
    return np.asarray(P) @ lam, lam


def theta_step(lam, mu) -> float:
    """Smallest ``theta`` in [0, 1] with ``theta lam + (1 - theta) mu >= 0``."""
    return float(_theta(np.asarray(lam, dtype=np.float64), np.asarray(mu, dtype=np.float64)))


def warm_start_shift(corral: Corral, delta) -> Corral:
    """Translate every corral point by ``delta`` and refactor by Cholesky.

    Raises ``numpy.linalg.LinAlgError`` if the shifted Gram matrix is not
    numerically positive definite.
    """
    points = corral.points + np.asarray(delta, dtype=np.float64)[:, None]
    G = 1.0 + points.T @ points
    R = np.ascontiguousarray(np.linalg.cholesky(G).T)
    return Corral(points, corral.coeffs.copy(), R, list(corral.payloads))


def _minor_cycles(corral: Corral, tol: WolfeTolerances) -> int:
    """Move to the affine minimiser, dropping points until it is interior."""
    cap = tol.max_minor if tol.max_minor is not None else len(corral)
    R, idx, lam, count, code = _minor_kernel(corral.R, corral.coeffs, tol.eps_pos, tol.eps_rank, cap)
    if code == _SINGULAR:
        raise SingularFactorError("factor has a vanishing diagonal")
    if code == _CAP:
        raise NumericalFailure("minor cycle cap exceeded")
    if code == _EMPTY:
        raise NumericalFailure("minor cycle emptied the corral")
    if len(idx) != len(corral):
        corral.points = corral.points[:, idx]
        corral.payloads = [corral.payloads[i] for i in idx]
    corral.R = R
    corral.coeffs = lam
    return count


def nearest_point(
    oracle,
    r,
    warm: Corral | None = None,
    start: ImagePoint | None = None,
    tol: WolfeTolerances | None = None,
    check: bool = DEBUG,
) -> NearestPointResult:
    """Point of the oracle's polytope nearest to ``r``, with a convex decomposition.

    ``warm`` is a corral already shifted by ``r`` (see :func:`warm_start_shift`);
    it is consumed.  Without it the search starts from the vertex ``start``,
    or from ``oracle(ones)`` when that is not given either.
    """
    tol = tol or WolfeTolerances()
    r = np.asarray(r, dtype=np.float64)
    dim = r.size
    max_major = tol.max_major or 50 * dim
    zero2 = (tol.eps_zero * max(1.0, float(np.linalg.norm(r)))) ** 2

    if warm is not None and len(warm):
        corral = warm
    else:
        if start is None:
            start = oracle(np.ones(dim))
        p = start.v - r
        corral = Corral(p[:, None].copy(), np.ones(1), np.array([[math.sqrt(1.0 + p @ p)]]), [start.paths])

    minor = _minor_cycles(corral, tol)
    x = corral.x
    major = 0
    while True:
        xx = float(x @ x)
        if xx <= zero2:
            break
        vertex = oracle(x)
        p = vertex.v - r
        if not np.all(np.isfinite(p)):
            raise NumericalFailure("oracle returned a non-finite vertex")
        # The gap must be relative: near the optimum |x| is tiny, and an absolute
        # gap g only pins x down to about sqrt(g).
        if x @ p >= xx - tol.eps_w * xx:
            break
        if np.any(np.all(corral.points == p[:, None], axis=0)):
            break  # a repeated vertex means the gap is rounding noise
        R, ok = _factor_add(corral.R, corral.points, p, tol.eps_rank)
        if not ok:
            break  # p is in the affine hull, so x.p = |x|^2 up to rounding
        corral.R = R
        corral.points = np.hstack([corral.points, p[:, None]])
        corral.coeffs = np.append(corral.coeffs, 0.0)
        corral.payloads.append(vertex.paths)
        major += 1
        if major > max_major:
            raise NumericalFailure("major cycle cap exceeded")
        minor += _minor_cycles(corral, tol)
        x_new = corral.x
        if not np.all(np.isfinite(x_new)):
            raise NumericalFailure("non-finite iterate")
        if check:
            assert gram_residual(corral.R, corral.points) <= 1e-6, "factor drifted"
            assert x_new @ x_new <= xx + 1e-10 * max(1.0, xx), "norm increased"
        x = x_new
        if not x @ x < xx:
            break  # every exact major cycle shortens x; a stall is rounding noise

    return NearestPointResult(x + r, r, corral, major, minor)
