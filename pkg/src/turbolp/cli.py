"""Command-line entry point: ``turbolp sweep | crosscheck | decode``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .ctlp import DecoderOptions, decode_lp
from .sim import CrosscheckConfig, SweepConfig, run_crosscheck, run_sweep, sweep_csv
from .turbo import PROFILES, TurboCode, read_permutation
from .trellis import default_spec


def parse_snrs(text: str) -> list[float]:
    """``"0:5:1"`` (inclusive range), ``"0,2,4"`` or a single value."""
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) == 2:
            parts.append(1.0)
        start, stop, step = parts
        if step <= 0:
            raise argparse.ArgumentTypeError("SNR step must be positive")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 10) for i in range(n)]
    return [float(p) for p in text.split(",")]


def _options(args) -> DecoderOptions:
    return DecoderOptions(warm_start=not args.cold, check_invariants=getattr(args, "check", False))


def cmd_sweep(args) -> int:
    cfg = SweepConfig(
        code=args.code,
        snrs=args.snr,
        max_frames=args.max_frames,
        max_errors=args.max_errors,
        seed=args.seed,
        heuristics=args.heuristics,
        options=_options(args),
        timing=not args.no_timing,
        out_csv=args.out,
        out_json=args.json,
    )

    def progress(row):
        print(f"snr {row['snr_db']:g} dB: {row['frames']} frames, FER(LP) {row['fer_lp']:.3e}", file=sys.stderr)

    report = run_sweep(cfg, progress=progress)
    if not args.out:
        sys.stdout.write(sweep_csv(report["rows"]))
    return 0


def cmd_crosscheck(args) -> int:
    cfg = CrosscheckConfig(k=args.k, d=args.d, frames=args.frames, snr_db=args.snr, seed=args.seed,
                           brute_force=not args.no_ml, options=_options(args))
    report = run_crosscheck(cfg)
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 2 if report["failures"] else 0


def cmd_decode(args) -> int:
    if args.perm:
        perm = read_permutation(args.perm)
        tc = TurboCode(default_spec(len(perm), args.d), perm)
    else:
        tc = TurboCode.from_profile(args.code)
    llr = np.loadtxt(args.llr, dtype=np.float64, ndmin=1)
    if llr.shape != (tc.n,):
        print(f"expected {tc.n} LLR values, got {llr.size}", file=sys.stderr)
        return 1
    res = decode_lp(tc, llr, _options(args))
    json.dump(res.to_dict(), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="turbolp", description="Exact LP decoding of turbo codes.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--cold", action="store_true", help="disable warm starts between main loops")

    s = sub.add_parser("sweep", help="frame-error-rate and decoder statistics per SNR")
    s.add_argument("--code", default="lte-40", choices=sorted(PROFILES))
    s.add_argument("--snr", type=parse_snrs, default=parse_snrs("0:4:1"), help="e.g. 0:5:1 or 0,2,4 (dB)")
    s.add_argument("--max-frames", type=int, default=100000)
    s.add_argument("--max-errors", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--heuristics", default="ab", help="subset of 'ab'; empty string disables both")
    s.add_argument("--out", help="CSV output path (stdout when omitted)")
    s.add_argument("--json", help="optional JSON report path")
    s.add_argument("--no-timing", action="store_true", help="leave t_mean_us empty for reproducible CSV")
    s.add_argument("--check", action="store_true", help="evaluate geometric invariants on every frame")
    common(s)
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("crosscheck", help="compare against the simplex and brute-force references")
    c.add_argument("--k", type=int, default=8)
    c.add_argument("--d", type=int, default=2)
    c.add_argument("--frames", type=int, default=1000)
    c.add_argument("--snr", type=float, default=1.0)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--no-ml", action="store_true", help="skip the brute-force ML comparison")
    common(c)
    c.set_defaults(func=cmd_crosscheck)

    d = sub.add_parser("decode", help="decode one LLR vector (one value per line) to JSON")
    d.add_argument("--code", default="lte-40", choices=sorted(PROFILES))
    d.add_argument("--perm", help="interleaver file (one 0-based index per line) instead of a profile")
    d.add_argument("--d", type=int, default=3, help="memory of the constituent code with --perm")
    d.add_argument("--llr", required=True)
    common(d)
    d.set_defaults(func=cmd_decode)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
