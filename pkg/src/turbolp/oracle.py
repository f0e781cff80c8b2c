"""Reference solvers for small instances.

Nothing here is used by the decoder.  ``brute_force_ml`` enumerates all
information words, and ``simplex_lp`` solves the explicit edge-flow LP with a
dense bounded-variable primal simplex (Bland's rule).  Both serve as ground
truth in tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .turbo import TurboCode, assign_edge_costs

MAX_BRUTE_FORCE_K = 20


class ProblemTooLarge(ValueError):
    pass


class SimplexError(RuntimeError):
    """The LP was found infeasible or unbounded (a construction bug for turbo LPs)."""


def brute_force_ml(tc: TurboCode, llr, chunk: int = 1 << 14) -> tuple[np.ndarray, float]:
    """ML information word ``argmin_x llr . encode(x)`` by exhaustive search.

    Ties go to the lexicographically smallest ``x`` (bit 0 most significant).
    """
    k = tc.k
    if k > MAX_BRUTE_FORCE_K:
        raise ProblemTooLarge(f"brute force needs k <= {MAX_BRUTE_FORCE_K}, got {k}")
    llr = np.asarray(llr, dtype=np.float64)
    shifts = np.arange(k - 1, -1, -1, dtype=np.int64)
    best_obj, best_x = np.inf, None
    for start in range(0, 1 << k, chunk):
        ints = np.arange(start, min(start + chunk, 1 << k), dtype=np.int64)
        X = (ints[:, None] >> shifts) & 1
        obj = tc.encode_batch(X) @ llr
        i = int(np.argmin(obj))
        if obj[i] < best_obj:  # strict: earlier chunks are lexicographically smaller
            best_obj, best_x = float(obj[i]), X[i]
    return best_x.copy(), best_obj


@dataclass
class ExplicitLp:
    """``min c.f`` s.t. ``A f = b``, ``0 <= f <= 1`` over the edges of both trellises.

    Columns ``[0, n_edges)`` belong to trellis 1 and the rest to trellis 2,
    each ordered like ``trellis.edge_ids``.
    """

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    edge_ids: np.ndarray
    n_conservation: int  # rows per trellis, source row included
    k: int
    shape: tuple

    @property
    def n_edges(self) -> int:
        return self.edge_ids.size

    @property
    def n_vars(self) -> int:
        return self.c.size

    @property
    def upper(self) -> np.ndarray:
        return np.ones(self.n_vars)

    def flow_vector(self, f1, f2) -> np.ndarray:
        return np.concatenate([np.asarray(f1).reshape(-1)[self.edge_ids], np.asarray(f2).reshape(-1)[self.edge_ids]])

    def split(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Inverse of :meth:`flow_vector`: trellis-shaped flows."""
        f1 = np.zeros(int(np.prod(self.shape)))
        f2 = np.zeros_like(f1)
        f1[self.edge_ids] = x[: self.n_edges]
        f2[self.edge_ids] = x[self.n_edges:]
        return f1.reshape(self.shape), f2.reshape(self.shape)

    def residual(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        eq = np.abs(self.A @ x - self.b).max(initial=0.0)
        box = max(0.0, -x.min(), x.max() - 1.0)
        return float(max(eq, box))


def build_explicit_lp(tc: TurboCode, llr) -> ExplicitLp:
    t = tc.trellis
    ids = t.edge_ids
    E = ids.size
    col = np.full(t.next_state.size, -1, dtype=np.int64)
    col[ids] = np.arange(E)
    n_seg, S, _ = t.shape

    # one conservation row per vertex with outgoing edges: out - in = [source]
    verts = [(i, s) for i in range(n_seg) for s in range(S) if t.vertices[i, s]]
    row_of = {v: r for r, v in enumerate(verts)}
    block = np.zeros((len(verts), E))
    for e in ids:
        i, s, bit = t.edge(e)
        block[row_of[(i, s)], col[e]] += 1.0
        nxt = t.next_state[i, s, bit]
        if i + 1 < n_seg:
            block[row_of[(i + 1, nxt)], col[e]] -= 1.0
    src = np.zeros(len(verts))
    src[row_of[(0, 0)]] = 1.0

    consist = np.zeros((tc.k, 2 * E))
    for i in range(tc.k):
        consist[i, col[t.input_one_edges(i)]] = 1.0
        consist[i, E + col[t.input_one_edges(int(tc.inv_perm[i]))]] = -1.0

    nv = len(verts)
    A = np.zeros((2 * nv + tc.k, 2 * E))
    A[:nv, :E] = block
    A[nv:2 * nv, E:] = block
    A[2 * nv:] = consist
    b = np.concatenate([src, src, np.zeros(tc.k)])
    c1, c2 = assign_edge_costs(tc, llr)
    c = np.concatenate([c1.reshape(-1)[ids], c2.reshape(-1)[ids]])
    return ExplicitLp(c, A, b, ids.copy(), nv, tc.k, t.shape)


# -- simplex ------------------------------------------------------------------


class _Tableau:
    """Dense tableau ``B^-1 [A]`` with basic values for bounded variables."""

    def __init__(self, T, beta, basis, upper, at_upper):
        self.T = T
        self.beta = beta
        self.basis = basis
        self.upper = upper
        self.at_upper = at_upper

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        self.basis[r] = j

    def optimize(self, cost, tol, max_iter):
        T, upper = self.T, self.upper
        m = T.shape[0]
        for _ in range(max_iter):
            basic = np.zeros(T.shape[1], dtype=bool)
            basic[self.basis] = True
            d = cost - cost[self.basis] @ T
            improving = ((d < -tol) & ~self.at_upper) | ((d > tol) & self.at_upper)
            improving &= ~basic
            cand = np.flatnonzero(improving)
            if cand.size == 0:
                return
            j = int(cand[0])  # Bland: lowest index enters
            s = -1.0 if self.at_upper[j] else 1.0
            step = s * T[:, j]
            ub_b = upper[self.basis]
            ratio = np.full(m, np.inf)
            down = step > tol
            up = (step < -tol) & np.isfinite(ub_b)
            ratio[down] = self.beta[down] / step[down]
            ratio[up] = (ub_b[up] - self.beta[up]) / -step[up]
            np.maximum(ratio, 0.0, out=ratio)
            best = ratio.min(initial=np.inf)
            leave = -1
            if best <= upper[j] + tol:
                # Bland: among tied rows the lowest variable index leaves
                tied = np.flatnonzero(ratio <= best + tol)
                leave = int(tied[np.argmin(self.basis[tied])])
                leave_upper = bool(up[leave])
            else:
                best = upper[j]
            if not np.isfinite(best):
                raise SimplexError("LP is unbounded")
            self.beta -= best * step
            if leave < 0:
                self.at_upper[j] = not self.at_upper[j]
                continue
            entering_value = (upper[j] if self.at_upper[j] else 0.0) + s * best
            old = self.basis[leave]
            self.at_upper[old] = leave_upper
            self.at_upper[j] = False
            self.pivot(leave, j)
            self.beta[leave] = entering_value
        raise SimplexError("simplex iteration limit reached")


def simplex_lp(lp: ExplicitLp, tol: float = 1e-9, max_iter: int = 100000) -> tuple[float, np.ndarray]:
    """Optimal value and primal solution of ``lp``.

    Two-phase bounded-variable primal simplex on a dense tableau.  Redundant
    equality rows are dropped after phase 1.  The final basic solution is
    recomputed from the original data, so the feasibility residual is at
    rounding level.
    """
    A = np.array(lp.A, dtype=np.float64)
    b = np.array(lp.b, dtype=np.float64)
    m, n = A.shape
    upper = lp.upper
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    # phase 1: artificial basis
    T = np.hstack([A, np.eye(m)])
    tab = _Tableau(T, b.copy(), np.arange(n, n + m), np.concatenate([upper, np.full(m, np.inf)]),
                   np.zeros(n + m, dtype=bool))
    tab.optimize(np.concatenate([np.zeros(n), np.ones(m)]), tol, max_iter)
    if tab.beta[tab.basis >= n].sum() > 1e-7:
        raise SimplexError("LP is infeasible")

    # drive zero-valued artificials out of the basis, dropping redundant rows
    keep = np.ones(m, dtype=bool)
    for r in range(m):
        if tab.basis[r] < n:
            continue
        basic = np.zeros(n, dtype=bool)
        basic[tab.basis[tab.basis < n]] = True
        cand = np.flatnonzero((np.abs(tab.T[r, :n]) > 1e-7) & ~basic)
        if cand.size:
            j = int(cand[0])
            value = upper[j] if tab.at_upper[j] else 0.0
            tab.pivot(r, j)
            tab.at_upper[j] = False
            tab.beta[r] = value
        else:
            keep[r] = False
    rows = np.flatnonzero(keep)
    tab = _Tableau(tab.T[rows][:, :n].copy(), tab.beta[rows].copy(), tab.basis[rows].copy(), upper,
                   tab.at_upper[:n].copy())

    tab.optimize(np.asarray(lp.c, dtype=np.float64), tol, max_iter)

    # recompute basic values from the kept original rows (dropped rows are combinations of them)
    x = np.where(tab.at_upper, upper, 0.0)
    x[tab.basis] = 0.0
    Ar = A[rows]
    x[tab.basis] = np.linalg.solve(Ar[:, tab.basis], b[rows] - Ar @ x)
    return float(lp.c @ x), x


def write_lp_file(lp: ExplicitLp, path, name: str = "turbo_lp") -> None:
    """Write ``lp`` in CPLEX LP format (variables ``f1``, ``f2``, ...; rows ``r1``, ...)."""

    def terms(coeffs):
        out = []
        for j in np.flatnonzero(coeffs):
            v = coeffs[j]
            out.append(f"{'-' if v < 0 else '+'} {abs(v):.17g} f{j + 1}")
        text = " ".join(out) if out else "0 f1"
        return text[2:] if text.startswith("+ ") else text

    lines = [f"\\ {name}: {lp.n_vars} edge variables, {lp.A.shape[0]} rows", "Minimize", f" obj: {terms(lp.c)}",
             "Subject To"]
    for r in range(lp.A.shape[0]):
        lines.append(f" r{r + 1}: {terms(lp.A[r])} = {lp.b[r]:.17g}")
    lines.append("Bounds")
    lines.extend(f" 0 <= f{j + 1} <= 1" for j in range(lp.n_vars))
    lines.append("End")
    Path(path).write_text("\n".join(lines) + "\n")
