"""Exact LP decoding of turbo codes by nearest-point computations in the constraints space."""

from .channel import ChannelParams, simulate_frame, transmit
from .ctlp import CODEWORD, FAILURE, FRACTIONAL, DecodeResult, DecoderOptions, decode_lp, heuristic_a, heuristic_b
from .nearest_point import WolfeTolerances
from .trellis import ConvCodeSpec, Trellis, build_trellis, default_spec, shortest_path
from .turbo import PROFILES, TurboCode, encode_turbo, is_agreeable, qpp_interleaver
from .wsp import ConstraintsOracle, ImagePoint, minimize_direction

__all__ = [
    "CODEWORD", "FAILURE", "FRACTIONAL", "PROFILES",
    "ChannelParams", "ConstraintsOracle", "ConvCodeSpec", "DecodeResult", "DecoderOptions",
    "ImagePoint", "Trellis", "TurboCode", "WolfeTolerances",
    "build_trellis", "decode_lp", "default_spec", "encode_turbo", "heuristic_a", "heuristic_b",
    "is_agreeable", "minimize_direction", "qpp_interleaver", "shortest_path",
    "simulate_frame", "transmit",
]
