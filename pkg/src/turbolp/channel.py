"""BPSK over AWGN with per-frame reproducible noise.

Random numbers come from numpy's Philox-4x64 counter-based generator keyed by
``(seed, 2 * frame)`` for channel noise and ``(seed, 2 * frame + 1)`` for
random information words.  A frame can therefore be regenerated on its own,
independent of how many frames were drawn before it or in which order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# "noiseless" frames are simulated at this SNR rather than with sigma = 0
MAX_SNR_DB = 100.0

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class ChannelParams:
    snr_db: float
    rate: float
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.rate <= 1:
            raise ValueError("code rate must lie in (0, 1]")

    @property
    def effective_snr_db(self) -> float:
        return min(float(self.snr_db), MAX_SNR_DB)

    @property
    def sigma2(self) -> float:
        """Noise variance for Eb/N0 = ``snr_db``: ``1 / (2 R 10^(snr/10))``."""
        return 1.0 / (2.0 * self.rate * 10.0 ** (self.effective_snr_db / 10.0))


def frame_generator(seed: int, frame: int, stream: int = 0) -> np.random.Generator:
    """Philox generator for one (seed, frame, stream) triple."""
    if frame < 0 or not 0 <= stream < 2:
        raise ValueError("frame must be >= 0 and stream in {0, 1}")
    key = np.array([seed & _MASK64, (2 * frame + stream) & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def transmit(codeword, params: ChannelParams, frame: int = 0) -> np.ndarray:
    """LLRs ``2 r / sigma^2`` of the BPSK word ``1 - 2 c`` plus Gaussian noise."""
    c = np.asarray(codeword)
    if c.ndim != 1 or np.any((c != 0) & (c != 1)):
        raise ValueError("codeword must be a 0/1 vector")
    sigma2 = params.sigma2
    noise = frame_generator(params.seed, frame, 0).standard_normal(c.size)
    r = (1.0 - 2.0 * c) + math.sqrt(sigma2) * noise
    return 2.0 * r / sigma2


def random_info(k: int, seed: int, frame: int) -> np.ndarray:
    return frame_generator(seed, frame, 1).integers(0, 2, size=k, dtype=np.int64)


def simulate_frame(tc, params: ChannelParams, frame: int, zero_codeword: bool = False):
    """Draw ``(info, codeword, llr)`` for one frame."""
    info = np.zeros(tc.k, dtype=np.int64) if zero_codeword else random_info(tc.k, params.seed, frame)
    codeword = tc.encode(info)
    return info, codeword, transmit(codeword, params, frame)


def gaussian_loglik(received, codeword, sigma2: float) -> float:
    """Exact log-likelihood of a received BPSK vector given ``codeword``."""
    s = 1.0 - 2.0 * np.asarray(codeword)
    r = np.asarray(received)
    return float(-np.sum((r - s) ** 2) / (2 * sigma2) - r.size * 0.5 * math.log(2 * math.pi * sigma2))
