"""Parallel-concatenated turbo codes built from two identical trellises.

Codeword layout (0-based): ``[0, k)`` systematic bits, ``[k, k + n_C)`` the
first constituent codeword, ``[k + n_C, n)`` the second constituent codeword.
The second encoder reads ``x[perm[j]]`` at segment ``j``, so information bit
``i`` is carried by segment ``i`` of trellis 1 and segment ``inv_perm[i]`` of
trellis 2.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .trellis import (
    ConvCodeSpec,
    Trellis,
    default_spec,
    encode_conv_batch,
    path_inputs,
)

# profile name -> (k, f1, f2) of the QPP interleaver pi(i) = (f1 i + f2 i^2) mod k
PROFILES = {
    "lte-40": (40, 3, 10),
    "lte-72": (72, 7, 18),
    "lte-128": (128, 15, 32),
}

EPS_INT = 1e-6
EPS_CLAMP = 1e-9


class NotAPermutationError(ValueError):
    pass


def qpp_interleaver(k: int, f1: int, f2: int) -> np.ndarray:
    """Quadratic permutation polynomial interleaver, 0-based."""
    i = np.arange(k, dtype=np.int64)
    perm = (f1 * i + f2 * i * i) % k
    if len(np.unique(perm)) != k:
        raise NotAPermutationError(f"QPP ({f1}, {f2}) is not a permutation of length {k}")
    return perm


def read_permutation(path) -> np.ndarray:
    """Permutation file: one 0-based index per line."""
    values = [int(line) for line in Path(path).read_text().split()]
    perm = np.array(values, dtype=np.int64)
    _check_permutation(perm, len(perm))
    return perm


def write_permutation(path, perm) -> None:
    Path(path).write_text("".join(f"{int(p)}\n" for p in perm))


def _check_permutation(perm: np.ndarray, k: int) -> None:
    if perm.shape != (k,) or not np.array_equal(np.sort(perm), np.arange(k)):
        raise NotAPermutationError("interleaver is not a permutation of 0..k-1")


class TurboCode:
    """Turbo code ``(x | e_C(x) | e_C(pi(x)))`` with ``pi(x)_j = x[perm[j]]``."""

    def __init__(self, conv: ConvCodeSpec, perm):
        perm = np.asarray(perm, dtype=np.int64)
        _check_permutation(perm, conv.k)
        self.conv = conv
        self.perm = perm
        self.perm.setflags(write=False)
        self.inv_perm = np.argsort(perm)
        self.inv_perm.setflags(write=False)
        self.trellis = Trellis(conv)
        self._build_index_sets()

    # both constituent encoders are identical, so one immutable trellis serves both
    @property
    def trellis1(self) -> Trellis:
        return self.trellis

    @property
    def trellis2(self) -> Trellis:
        return self.trellis

    @property
    def k(self) -> int:
        return self.conv.k

    @property
    def d(self) -> int:
        return self.conv.d

    @property
    def n_c(self) -> int:
        return self.conv.n_c

    @property
    def n(self) -> int:
        return self.k + 2 * self.n_c

    @property
    def rate(self) -> float:
        return self.k / self.n

    def _build_index_sets(self):
        # turbo-level J(e) per trellis, padded with index n (a zero-weight sentinel)
        k, n = self.k, self.n
        self.index_sets1 = self._index_sets(k, np.arange(k))
        self.index_sets2 = self._index_sets(k + self.n_c, self.perm)
        w = np.ones(n + 1)
        w[:k] = 0.5
        w[n] = 0.0
        self._weights = w

    def _index_sets(self, block: int, systematic: np.ndarray) -> np.ndarray:
        t, k, n = self.trellis, self.k, self.n
        seg_sys = np.full(t.n_segments, n, dtype=np.int64)
        seg_sys[:k] = systematic
        info_one = t.valid.copy()
        info_one[:, :, 0] = False
        info_one[k:] = False
        jc = t.index_sets
        j = np.empty(t.shape + (3,), dtype=np.int64)
        j[..., 0] = np.where(info_one, seg_sys[:, None, None], n)
        j[..., 1] = np.where(jc[..., 0] >= 0, block + jc[..., 0], n)
        j[..., 2] = np.where(jc[..., 1] >= 0, block + jc[..., 1], n)
        j.setflags(write=False)
        return j

    @classmethod
    def from_profile(cls, name: str) -> "TurboCode":
        try:
            k, f1, f2 = PROFILES[name]
        except KeyError:
            raise ValueError(f"unknown code profile {name!r}; known: {sorted(PROFILES)}") from None
        return cls(default_spec(k, 3), qpp_interleaver(k, f1, f2))

    def __repr__(self):
        return f"TurboCode(n={self.n}, k={self.k}, d={self.d})"

    # -- encoding -------------------------------------------------------------

    def encode_batch(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        return np.hstack(
            [
                x.astype(np.int8),
                encode_conv_batch(self.trellis, x),
                encode_conv_batch(self.trellis, x[:, self.perm]),
            ]
        )

    def encode(self, x) -> np.ndarray:
        x = np.asarray(x)
        if x.shape != (self.k,):
            raise ValueError(f"expected an information word of length {self.k}")
        return self.encode_batch(x[None, :])[0]

    # -- path pairs -----------------------------------------------------------

    def info_from_paths(self, path1, path2) -> tuple[np.ndarray, np.ndarray]:
        """Information words selected by each trellis path (trellis 2 de-interleaved)."""
        x1 = path_inputs(self.trellis, path1)[: self.k]
        x2 = np.empty(self.k, dtype=np.int8)
        x2[self.perm] = path_inputs(self.trellis, path2)[: self.k]
        return x1, x2

    def constraint_values(self, path1, path2) -> np.ndarray:
        """g_i = [trellis 1 takes input 1 for bit i] - [trellis 2 takes input 1 for bit i]."""
        x1, x2 = self.info_from_paths(path1, path2)
        return x1.astype(np.float64) - x2

    def constraint_values_flow(self, f1, f2) -> np.ndarray:
        k = self.k
        ones1 = f1[:k, :, 1].sum(axis=1)
        ones2 = f2[:k, :, 1].sum(axis=1)
        return ones1 - ones2[self.inv_perm]


def encode_turbo(tc: TurboCode, x) -> np.ndarray:
    return tc.encode(x)


def is_agreeable(tc: TurboCode, path1, path2) -> bool:
    x1, x2 = tc.info_from_paths(path1, path2)
    return bool(np.array_equal(x1, x2))


def assign_edge_costs(tc: TurboCode, llr) -> tuple[np.ndarray, np.ndarray]:
    """Edge costs ``c(e) = sum_{j in J(e)} lam_hat_j`` for both trellises.

    ``lam_hat`` halves the systematic LLRs because each systematic bit is
    charged once in each trellis.
    """
    llr = np.asarray(llr, dtype=np.float64)
    if llr.shape != (tc.n,):
        raise ValueError(f"LLR vector must have length {tc.n}, got {llr.shape}")
    lam = np.append(llr, 0.0) * tc._weights
    return lam[tc.index_sets1].sum(axis=-1), lam[tc.index_sets2].sum(axis=-1)


def pseudocodeword_from_flow(tc: TurboCode, f1, f2, eps: float = EPS_CLAMP) -> np.ndarray:
    """Pseudocodeword of a combined flow; systematic entries average both trellises."""
    n = tc.n
    y = np.zeros(n + 1)
    for f, sets in ((f1, tc.index_sets1), (f2, tc.index_sets2)):
        f = np.asarray(f, dtype=np.float64)
        y += np.bincount(sets.reshape(-1), weights=np.repeat(f.reshape(-1), 3), minlength=n + 1)
    y = y[:n] * tc._weights[:n]
    if np.any(y < -eps) or np.any(y > 1 + eps):
        raise ValueError("pseudocodeword entry outside [0, 1]; flow is not a path flow")
    return np.clip(y, 0.0, 1.0)


def is_integral(y, eps: float = EPS_INT) -> bool:
    y = np.asarray(y)
    return bool(np.all(np.minimum(np.abs(y), np.abs(1 - y)) <= eps))
