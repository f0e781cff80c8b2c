"""Exact LP decoding of turbo codes by iterated nearest-point computations.

The LP optimum is the lowest point where the cost axis pierces the image
polytope.  Starting below it at the unconstrained shortest-path cost, each
iteration projects the current reference point onto the polytope and moves
the reference point up to where the separating hyperplane meets the axis.
The loop stops once the projection lies on the axis (or the reference point
is inside the polytope); the final corral then describes the optimal flow.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .nearest_point import (
    Corral,
    NumericalFailure,
    SingularFactorError,
    WolfeTolerances,
    nearest_point,
    warm_start_shift,
)
from .trellis import path_flow
from .turbo import (
    EPS_INT,
    TurboCode,
    assign_edge_costs,
    is_integral,
    pseudocodeword_from_flow,
)
from .wsp import ConstraintsOracle, image_of_flow

CODEWORD = "codeword"
FRACTIONAL = "fractional"
FAILURE = "numerical_failure"


@dataclass(frozen=True)
class DecoderOptions:
    warm_start: bool = True
    log_candidates: bool = False
    max_main_loops: int = 200
    eps_term: float = 1e-8
    eps_den: float = 1e-12
    eps_int: float = EPS_INT
    # geometry runs on costs multiplied by this factor
    cost_scale: float = 0.1
    wolfe: WolfeTolerances = field(default_factory=WolfeTolerances)
    check_invariants: bool = False


@dataclass
class DecoderStats:
    main_loops: int = 0
    major_cycles: int = 0
    minor_cycles: int = 0
    face_dim: int = 0
    integral: bool = False
    trivial: bool = False


@dataclass
class DecodeResult:
    status: str
    pseudocodeword: np.ndarray | None
    objective: float
    info_bits: np.ndarray | None
    stats: DecoderStats
    support: list = field(default_factory=list)  # (weight, path1, path2)
    initial_paths: tuple | None = None
    flow: tuple | None = None
    candidates: list | None = None  # every oracle answer, when logged
    reference_points: list = field(default_factory=list)  # unscaled r_{k+1} per iteration
    violations: list = field(default_factory=list)
    message: str = ""

    @property
    def is_codeword(self) -> bool:
        return self.status == CODEWORD

    def codeword(self) -> np.ndarray | None:
        if self.status != CODEWORD:
            return None
        return np.rint(self.pseudocodeword).astype(np.int8)

    def to_dict(self) -> dict:
        s = self.stats
        return {
            "status": self.status,
            "objective": None if not np.isfinite(self.objective) else float(self.objective),
            "info_bits": None if self.info_bits is None else [int(b) for b in self.info_bits],
            "pseudocodeword": None if self.pseudocodeword is None else [float(v) for v in self.pseudocodeword],
            "stats": {
                "main_loops": s.main_loops,
                "major_cycles": s.major_cycles,
                "minor_cycles": s.minor_cycles,
                "face_dim": s.face_dim,
                "integral": s.integral,
                "trivial": s.trivial,
            },
            "support_weights": [float(w) for w, _, _ in self.support],
            "reference_points": [float(r) for r in self.reference_points],
            "message": self.message,
        }


def recover_flow(tc: TurboCode, support) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Combined flow ``sum_i w_i f_i`` of weighted path pairs and its pseudocodeword."""
    f1 = np.zeros(tc.trellis.shape)
    f2 = np.zeros(tc.trellis.shape)
    for w, p1, p2 in support:
        f1 += w * path_flow(tc.trellis, p1)
        f2 += w * path_flow(tc.trellis, p2)
    return f1, f2, pseudocodeword_from_flow(tc, f1, f2)


class _Invariants:
    """Per-iteration checks of the geometric lemmas (test and acceptance use)."""

    def __init__(self, oracle: ConstraintsOracle):
        self.oracle = oracle
        self.violations: list[str] = []

    def separation(self, res, a, b):
        verts = res.vertices
        na = np.linalg.norm(a)
        if na <= 1e-6:
            return
        tol = 1e-7 * max(1.0, na * max(np.linalg.norm(res.nearest), np.abs(verts).max()))
        if np.any(a @ verts > b + tol):
            self.violations.append("corral vertex violates the separating inequality")
        # maximum of a.v over the whole polytope
        top = self.oracle(-a).v
        if a @ top > b + 1e-7 * max(1.0, na * np.linalg.norm(top)):
            self.violations.append("separating inequality is not valid for the polytope")
        if not a @ res.reference > b:
            self.violations.append("reference point is not strongly separated")

    def orientation(self, a, k):
        if not a[k] < 0:
            self.violations.append(f"a_(k+1) = {a[k]:.3e} is not negative")

    def monotone(self, r_old, r_new):
        if r_new <= r_old - 1e-12 * max(1.0, abs(r_old)):
            self.violations.append(f"reference point decreased: {r_old!r} -> {r_new!r}")

    def terminal(self, tc, costs, f1, f2, z):
        v = image_of_flow(tc, costs, f1, f2)
        if np.abs(v[:-1]).max(initial=0.0) > 1e-7:
            self.violations.append("recovered flow is not agreeable")
        target = np.zeros_like(v)
        target[-1] = z
        if np.abs(v - target).max() > 1e-7 * max(1.0, abs(z)):
            self.violations.append("image of recovered flow differs from the LP point")


def decode_lp(tc: TurboCode, llr, options: DecoderOptions | None = None) -> DecodeResult:
    """Solve the turbo-code LP relaxation for the LLR vector ``llr``."""
    opts = options or DecoderOptions()
    llr = np.asarray(llr, dtype=np.float64)
    k = tc.k
    scale = opts.cost_scale
    costs = assign_edge_costs(tc, llr)
    oracle = ConstraintsOracle(tc, (costs[0] * scale, costs[1] * scale), log=opts.log_candidates)
    checks = _Invariants(ConstraintsOracle(tc, oracle.costs)) if opts.check_invariants else None
    stats = DecoderStats()

    axis = np.zeros(k + 1)
    axis[k] = 1.0
    v0 = oracle(axis)
    r = np.zeros(k + 1)
    r[k] = v0.v[k]
    refs = [r[k] / scale]

    def finish(status, support, z, message=""):
        candidates = oracle.history if opts.log_candidates else None
        if status == FAILURE:
            return DecodeResult(FAILURE, None, float("nan"), None, stats, [], v0.paths,
                                candidates=candidates, reference_points=refs,
                                violations=checks.violations if checks else [], message=message)
        f1, f2, y = recover_flow(tc, support)
        stats.face_dim = len(support) - 1
        stats.integral = is_integral(y, opts.eps_int)
        info = None
        if stats.integral:
            word = np.rint(y).astype(np.int8)
            info = word[:k].astype(np.int64)
            if np.array_equal(tc.encode(info), word):
                status = CODEWORD
            else:
                stats.integral = False
                if checks:
                    checks.violations.append("integral pseudocodeword is not a codeword")
        if checks:
            checks.terminal(tc, costs, f1, f2, z)
        return DecodeResult(status, y, z, info if status == CODEWORD else None, stats, support,
                            v0.paths, (f1, f2), candidates, refs,
                            checks.violations if checks else [], message)

    if not v0.g.any():
        stats.trivial = True
        return finish(CODEWORD, [(1.0, *v0.paths)], r[k] / scale)

    warm: Corral | None = None
    try:
        while True:
            if stats.main_loops >= opts.max_main_loops:
                raise NumericalFailure("main loop cap exceeded")
            stats.main_loops += 1
            res = nearest_point(oracle, r, warm=warm, start=v0, tol=opts.wolfe)
            stats.major_cycles += res.major_cycles
            stats.minor_cycles += res.minor_cycles
            v = res.nearest
            a = r - v  # outward normal of the separating hyperplane a.v <= b
            b = float(a @ v)
            if checks:
                checks.separation(res, a, b)
            if np.linalg.norm(a) <= opts.eps_term * max(1.0, abs(r[k])):
                z = r[k]
                break
            if checks:
                checks.orientation(a, k)
            if abs(a[k]) < opts.eps_den:
                raise NumericalFailure("separating hyperplane is parallel to the cost axis")
            r_new = np.zeros(k + 1)
            r_new[k] = b / a[k]
            if not np.isfinite(r_new[k]):
                raise NumericalFailure("non-finite reference point")
            if checks:
                checks.monotone(r[k], r_new[k])
            refs.append(r_new[k] / scale)
            if np.linalg.norm(v - r_new) <= opts.eps_term * max(1.0, abs(r_new[k])):
                z = r_new[k]
                break
            warm = None
            if opts.warm_start:
                try:
                    warm = warm_start_shift(res.corral, r - r_new)
                except np.linalg.LinAlgError:
                    warm = None
            r = r_new
    except (NumericalFailure, SingularFactorError) as exc:
        return finish(FAILURE, [], float("nan"), str(exc))

    support = [(float(w), p1, p2) for w, (p1, p2) in zip(res.coeffs, res.payloads)]
    return finish(FRACTIONAL, support, z / scale)


def _best_candidate(tc: TurboCode, llr, path_pairs):
    words = {}
    for p1, p2 in path_pairs:
        for x in tc.info_from_paths(p1, p2):
            words.setdefault(x.tobytes(), x)
    X = np.array(list(words.values()), dtype=np.int64)
    Y = tc.encode_batch(X)
    obj = Y @ np.asarray(llr, dtype=np.float64)
    i = int(np.argmin(obj))
    return X[i], Y[i], float(obj[i])


def heuristic_a(tc: TurboCode, llr, result: DecodeResult):
    """Best codeword extending either half of a path pair in the LP support.

    Returns ``(info_bits, codeword, objective)``.
    """
    pairs = [(p1, p2) for _, p1, p2 in result.support] or [result.initial_paths]
    return _best_candidate(tc, llr, pairs)


def heuristic_b(tc: TurboCode, llr, result: DecodeResult):
    """Like :func:`heuristic_a` over every path pair the oracle produced."""
    if result.candidates is None:
        raise ValueError("decode with log_candidates=True to use heuristic B")
    pairs = list(result.candidates) + [(p1, p2) for _, p1, p2 in result.support]
    return _best_candidate(tc, llr, pairs)
