"""Frame-error-rate sweeps and oracle cross-checks."""

from __future__ import annotations

import csv
import io
import json
import math
import platform
import time
from dataclasses import asdict, dataclass, field, replace
from importlib import metadata

import numpy as np

from .channel import ChannelParams, simulate_frame
from .ctlp import CODEWORD, FAILURE, DecoderOptions, decode_lp, heuristic_a, heuristic_b
from .oracle import brute_force_ml, build_explicit_lp, simplex_lp
from .trellis import default_spec
from .turbo import TurboCode

CSV_COLUMNS = [
    "snr_db",
    "frames",
    "errors_lp",
    "fer_lp",
    "fer_heur_a",
    "fer_heur_b",
    "t_mean_us",
    "main_loops_mean",
    "major_cycles_mean",
    "face_dim_mean",
    "integral_share",
    "trivial_share",
]


@dataclass
class SweepConfig:
    code: str = "lte-40"
    snrs: list = field(default_factory=lambda: [0.0, 1.0, 2.0, 3.0, 4.0])
    max_frames: int = 100000
    max_errors: int = 200
    seed: int = 0
    heuristics: str = "ab"  # any subset of "ab"
    options: DecoderOptions = field(default_factory=DecoderOptions)
    timing: bool = True
    out_csv: str | None = None
    out_json: str | None = None

    def __post_init__(self):
        if self.max_frames < 1:
            raise ValueError("max_frames must be at least 1")
        if self.max_errors < 1:
            raise ValueError("max_errors must be at least 1")
        if set(self.heuristics) - set("ab"):
            raise ValueError("heuristics must be a subset of 'ab'")


@dataclass
class SweepRow:
    snr_db: float
    frames: int = 0
    errors_lp: int = 0
    errors_a: int | None = None
    errors_b: int | None = None
    failures: int = 0
    violations: int = 0  # frames with a failed invariant check (check_invariants only)
    violation_examples: list = field(default_factory=list)
    times: list = field(default_factory=list)
    main_loops: int = 0
    major_cycles: int = 0
    face_dim: int = 0
    integral: int = 0
    trivial: int = 0

    def fer(self, errors):
        return None if errors is None else errors / self.frames

    def as_dict(self, timing=True) -> dict:
        n = self.frames
        return {
            "snr_db": self.snr_db,
            "frames": n,
            "errors_lp": self.errors_lp,
            "fer_lp": self.fer(self.errors_lp),
            "fer_heur_a": self.fer(self.errors_a),
            "fer_heur_b": self.fer(self.errors_b),
            # compensated summation keeps the mean independent of frame order
            "t_mean_us": math.fsum(self.times) / n * 1e6 if timing else None,
            "main_loops_mean": self.main_loops / n,
            "major_cycles_mean": self.major_cycles / n,
            "face_dim_mean": self.face_dim / n,
            "integral_share": self.integral / n,
            "trivial_share": self.trivial / n,
        }


def _decode_frame(tc, llr, codeword, row: SweepRow, cfg: SweepConfig):
    opts = cfg.options
    if "b" in cfg.heuristics and not opts.log_candidates:
        opts = replace(opts, log_candidates=True)
    t0 = time.perf_counter()
    res = decode_lp(tc, llr, opts)
    row.times.append(time.perf_counter() - t0)
    row.frames += 1
    s = res.stats
    row.main_loops += s.main_loops
    row.major_cycles += s.major_cycles
    row.face_dim += s.face_dim
    row.integral += int(s.integral)
    row.trivial += int(s.trivial)
    row.failures += int(res.status == FAILURE)
    if res.violations:
        row.violations += 1
        if len(row.violation_examples) < 5:
            row.violation_examples.append((row.frames - 1, res.violations[0]))

    lp_ok = res.status == CODEWORD and np.array_equal(res.codeword(), codeword)
    row.errors_lp += int(not lp_ok)
    for name, heuristic in (("a", heuristic_a), ("b", heuristic_b)):
        if name not in cfg.heuristics:
            continue
        if lp_ok:
            ok = True
        elif res.status == CODEWORD:
            ok = False  # an LP codeword is ML; the heuristics keep it
        else:
            _, word, _ = heuristic(tc, llr, res)
            ok = np.array_equal(word, codeword)
        attr = f"errors_{name}"
        setattr(row, attr, (getattr(row, attr) or 0) + int(not ok))
    return res


def run_sweep(cfg: SweepConfig, progress=None) -> dict:
    """Simulate every SNR of ``cfg`` and write the requested CSV/JSON files.

    Each SNR stops after ``max_errors`` LP frame errors (fractional outputs and
    numerical failures count) or ``max_frames`` frames.  Frame ``f`` always
    uses the same random stream, whatever the stop point.
    """
    tc = TurboCode.from_profile(cfg.code)
    rows = []
    for snr in cfg.snrs:
        params = ChannelParams(float(snr), tc.rate, cfg.seed)
        row = SweepRow(float(snr))
        if "a" in cfg.heuristics:
            row.errors_a = 0
        if "b" in cfg.heuristics:
            row.errors_b = 0
        for frame in range(cfg.max_frames):
            _, codeword, llr = simulate_frame(tc, params, frame)
            _decode_frame(tc, llr, codeword, row, cfg)
            if row.errors_lp >= cfg.max_errors:
                break
        rows.append(row)
        if progress:
            progress(row.as_dict(cfg.timing))
    report = {
        "config": _config_echo(cfg),
        "metadata": _metadata(),
        "rows": [r.as_dict(cfg.timing) for r in rows],
        "failures": [r.failures for r in rows],
        "violations": [r.violations for r in rows],
        "violation_examples": [r.violation_examples for r in rows],
    }
    if cfg.out_csv:
        with open(cfg.out_csv, "w", newline="") as fh:
            fh.write(sweep_csv(report["rows"]))
    if cfg.out_json:
        with open(cfg.out_json, "w") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
    return report


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def _config_echo(cfg: SweepConfig) -> dict:
    d = asdict(cfg)
    d["snrs"] = [float(s) for s in cfg.snrs]
    return d


def _metadata() -> dict:
    try:
        version = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        version = "unknown"
    return {
        "package_version": version,
        "python": platform.python_version(),
        "numpy": np.__version__,
    }


# -- cross-check against the reference solvers --------------------------------


@dataclass
class CrosscheckConfig:
    k: int = 8
    d: int = 2
    frames: int = 1000
    snr_db: float = 1.0
    seed: int = 0
    brute_force: bool = True
    options: DecoderOptions = field(default_factory=DecoderOptions)

    def __post_init__(self):
        if self.k > 10:
            raise ValueError("cross-checks use the dense simplex and need k <= 10")


def crosscheck_code(cfg: CrosscheckConfig) -> TurboCode:
    perm = np.random.default_rng(cfg.seed).permutation(cfg.k)
    return TurboCode(default_spec(cfg.k, cfg.d), perm)


def run_crosscheck(cfg: CrosscheckConfig, llr_source=None) -> dict:
    """Compare CTLP with the simplex LP (and brute-force ML on codeword outputs).

    ``llr_source(tc, frame)`` may replace the AWGN channel, e.g. to feed
    all-zero or noiseless LLRs.
    """
    tc = crosscheck_code(cfg)
    params = ChannelParams(cfg.snr_db, tc.rate, cfg.seed)
    out = {
        "frames": 0, "max_gap": 0.0, "mismatches": 0, "ml_violations": 0, "failures": 0,
        "max_residual": 0.0, "integral": 0, "trivial": 0,
    }
    for frame in range(cfg.frames):
        llr = llr_source(tc, frame) if llr_source else simulate_frame(tc, params, frame)[2]
        res = decode_lp(tc, llr, cfg.options)
        out["frames"] += 1
        if res.status == FAILURE:
            out["failures"] += 1
            continue
        out["integral"] += int(res.stats.integral)
        out["trivial"] += int(res.stats.trivial)
        lp = build_explicit_lp(tc, llr)
        z, _ = simplex_lp(lp)
        gap = abs(z - res.objective)
        out["max_gap"] = max(out["max_gap"], gap)
        out["mismatches"] += int(gap > 1e-6)
        out["max_residual"] = max(out["max_residual"], lp.residual(lp.flow_vector(*res.flow)))
        if cfg.brute_force and res.status == CODEWORD:
            x_ml, obj_ml = brute_force_ml(tc, llr)
            if not (np.array_equal(x_ml, res.info_bits) or abs(obj_ml - res.objective) <= 1e-9):
                out["ml_violations"] += 1
    return out
