"""Terminated trellises of recursive rate-1 convolutional encoders.

A trellis for information length ``k`` and memory ``d`` has ``k + d`` segments.
Edges are stored segment-major in arrays of shape ``(k + d, 2**d, 2)`` indexed
by ``(segment, source state, input bit)``; an edge that does not exist in the
pruned trellis has ``next_state == -1``.  Paths are integer arrays holding one
flat edge index ``(i * S + s) * 2 + b`` per segment.

Encoder state convention: the shift register holds ``w[t-1] .. w[t-d]`` with
``w[t-1]`` in the most significant bit of the state integer.  The register
input is ``w = b ^ sum_j fb_j w[t-j]`` and the parity output is
``sum_j ff_j w[t-j]`` (with ``w[t-0] = w``).  Tail inputs are chosen so that
``w = 0``, which flushes the register to state 0 after ``d`` steps.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numba import njit


class InvalidPathError(ValueError):
    """Raised when an edge sequence is not a start-to-end path."""


def _parity(v: int) -> int:
    return bin(v).count("1") & 1


def _poly_from_octal(text: str, d: int) -> int:
    """Octal string (most significant bit = D^0) to a tap mask (bit j = D^j)."""
    value = int(str(text), 8)
    mask = 0
    for j in range(d + 1):
        if (value >> (d - j)) & 1:
            mask |= 1 << j
    return mask


def _poly_to_octal(mask: int, d: int) -> str:
    value = 0
    for j in range(d + 1):
        if (mask >> j) & 1:
            value |= 1 << (d - j)
    return format(value, "o")


@dataclass(frozen=True)
class ConvCodeSpec:
    """Recursive rate-1 convolutional encoder with ``2**d`` states.

    ``feedback`` and ``feedforward`` are tap masks where bit ``j`` is the
    coefficient of ``D**j``.
    """

    k: int
    d: int
    feedback: int
    feedforward: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("constraint length d must be >= 1")
        if self.k < 1:
            raise ValueError("information length k must be >= 1")
        limit = 1 << (self.d + 1)
        if not (0 <= self.feedback < limit and 0 <= self.feedforward < limit):
            raise ValueError("tap masks must only use D^0 .. D^d")
        if not self.feedback & 1:
            raise ValueError("feedback polynomial needs a D^0 coefficient of 1")

    @classmethod
    def from_octal(cls, k: int, d: int, feedback: str, feedforward: str) -> "ConvCodeSpec":
        return cls(k, d, _poly_from_octal(feedback, d), _poly_from_octal(feedforward, d))

    @property
    def feedback_octal(self) -> str:
        return _poly_to_octal(self.feedback, self.d)

    @property
    def feedforward_octal(self) -> str:
        return _poly_to_octal(self.feedforward, self.d)

    @property
    def n_c(self) -> int:
        return self.k + 2 * self.d

    @property
    def n_segments(self) -> int:
        return self.k + self.d

    @property
    def n_states(self) -> int:
        return 1 << self.d

    def step(self, state: int, bit: int) -> tuple[int, int]:
        """One encoder transition: returns ``(next_state, parity)``."""
        d = self.d
        reg = [(state >> (d - j)) & 1 for j in range(1, d + 1)]
        w = bit
        for j in range(1, d + 1):
            if (self.feedback >> j) & 1:
                w ^= reg[j - 1]
        out = w if self.feedforward & 1 else 0
        for j in range(1, d + 1):
            if (self.feedforward >> j) & 1:
                out ^= reg[j - 1]
        return (w << (d - 1)) | (state >> 1), out

    def flush_bit(self, state: int) -> int:
        """Input bit that drives the register input to 0 from ``state``."""
        d = self.d
        b = 0
        for j in range(1, d + 1):
            if (self.feedback >> j) & 1:
                b ^= (state >> (d - j)) & 1
        return b


# Default generator profiles, keyed by memory d: (feedback, feedforward) in octal.
DEFAULT_POLYNOMIALS = {
    2: ("7", "5"),
    3: ("13", "15"),  # LTE: 1 + D^2 + D^3 / 1 + D + D^3
}


def default_spec(k: int, d: int = 3) -> ConvCodeSpec:
    fb, ff = DEFAULT_POLYNOMIALS[d]
    return ConvCodeSpec.from_octal(k, d, fb, ff)


@njit(cache=True)
def _sp_forward(next_state, costs, dist, pred):
    n_seg, n_states, _ = next_state.shape
    for s in range(n_states):
        dist[0, s] = np.inf
    dist[0, 0] = 0.0
    for i in range(n_seg):
        for s in range(n_states):
            dist[i + 1, s] = np.inf
        # input 0 before input 1, then ascending source state: strict '<' keeps the first
        for b in range(2):
            for s in range(n_states):
                t = next_state[i, s, b]
                if t < 0:
                    continue
                c = dist[i, s] + costs[i, s, b]
                if c < dist[i + 1, t]:
                    dist[i + 1, t] = c
                    pred[i + 1, t] = 2 * s + b
    path = np.empty(n_seg, np.int64)
    s = 0
    for i in range(n_seg - 1, -1, -1):
        p = pred[i + 1, s]
        src = p >> 1
        path[i] = (i * n_states + src) * 2 + (p & 1)
        s = src
    return path, dist[n_seg, 0]


class Trellis:
    """Pruned, terminated trellis graph of a :class:`ConvCodeSpec`.

    Immutable after construction; safe to share between decoders.
    """

    def __init__(self, spec: ConvCodeSpec):
        self.spec = spec
        k, d = spec.k, spec.d
        n_seg, n_states = spec.n_segments, spec.n_states
        nxt = np.full((n_seg, n_states, 2), -1, dtype=np.int64)
        out = np.zeros((n_seg, n_states, 2), dtype=np.int8)
        full_next = np.empty((n_states, 2), dtype=np.int64)
        full_out = np.empty((n_states, 2), dtype=np.int8)
        for s in range(n_states):
            for b in range(2):
                full_next[s, b], full_out[s, b] = spec.step(s, b)
        flush = np.array([spec.flush_bit(s) for s in range(n_states)], dtype=np.int64)

        # forward reachability
        reach = np.zeros((n_seg + 1, n_states), dtype=bool)
        reach[0, 0] = True
        for i in range(n_seg):
            for s in np.flatnonzero(reach[i]):
                bits = (0, 1) if i < k else (flush[s],)
                for b in bits:
                    reach[i + 1, full_next[s, b]] = True
        # backward co-reachability to the terminal state 0
        coreach = np.zeros((n_seg + 1, n_states), dtype=bool)
        coreach[n_seg, 0] = True
        for i in range(n_seg - 1, -1, -1):
            for s in range(n_states):
                bits = (0, 1) if i < k else (flush[s],)
                if any(coreach[i + 1, full_next[s, b]] for b in bits):
                    coreach[i, s] = True
        alive = reach & coreach
        for i in range(n_seg):
            for s in np.flatnonzero(alive[i]):
                bits = (0, 1) if i < k else (flush[s],)
                for b in bits:
                    t = full_next[s, b]
                    if alive[i + 1, t]:
                        nxt[i, s, b] = t
                        out[i, s, b] = full_out[s, b]

        self.next_state = nxt
        self.output = out
        self.valid = nxt >= 0
        self.vertices = alive
        self.n_segments = n_seg
        self.n_states = n_states
        for arr in (nxt, out, self.valid, alive):
            arr.setflags(write=False)

        # J_C(e): codeword positions (0-based, within the n_C block) set by each edge
        jc = np.full((n_seg, n_states, 2, 2), -1, dtype=np.int64)
        seg = np.arange(n_seg)[:, None, None]
        bit = np.arange(2)[None, None, :]
        tail_in = (seg >= k) & (bit == 1) & self.valid
        jc[..., 0] = np.where(tail_in, seg - k, -1)
        jc[..., 1] = np.where(self.valid & (out == 1), d + seg, -1)
        jc.setflags(write=False)
        self.index_sets = jc

    @property
    def k(self) -> int:
        return self.spec.k

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.next_state.shape

    @property
    def n_edges(self) -> int:
        return int(self.valid.sum())

    @cached_property
    def edge_ids(self) -> np.ndarray:
        """Flat indices of all existing edges, segment-major."""
        return np.flatnonzero(self.valid.ravel())

    @cached_property
    def flush_input(self) -> np.ndarray:
        """Forced input per (tail segment, state); -1 where the state is absent."""
        k = self.k
        tail = np.full((self.d, self.n_states), -1, dtype=np.int64)
        for i in range(self.d):
            for s in range(self.n_states):
                for b in range(2):
                    if self.valid[k + i, s, b]:
                        tail[i, s] = b
        return tail

    def edge(self, flat: int) -> tuple[int, int, int]:
        """Decode a flat edge index into ``(segment, state, input)``."""
        return int(flat // (2 * self.n_states)), int((flat // 2) % self.n_states), int(flat & 1)

    def input_one_edges(self, segment: int) -> np.ndarray:
        """Flat indices of I_segment: existing input-1 edges of ``segment``."""
        states = np.flatnonzero(self.valid[segment, :, 1])
        return (segment * self.n_states + states) * 2 + 1

    def output_one_edges(self, segment: int) -> np.ndarray:
        """Flat indices of O_segment: existing edges with parity 1."""
        mask = self.valid[segment] & (self.output[segment] == 1)
        states, bits = np.nonzero(mask)
        return (segment * self.n_states + states) * 2 + bits

    def count_paths(self) -> int:
        """Number of start-to-end paths (exact integer DP)."""
        counts = [0] * self.n_states
        counts[0] = 1
        for i in range(self.n_segments):
            nxt = [0] * self.n_states
            for s in range(self.n_states):
                for b in range(2):
                    t = self.next_state[i, s, b]
                    if t >= 0:
                        nxt[t] += counts[s]
            counts = nxt
        return counts[0]

    def __repr__(self):
        return f"Trellis(k={self.k}, d={self.d}, edges={self.n_edges})"


def build_trellis(spec: ConvCodeSpec) -> Trellis:
    return Trellis(spec)


def encode_conv_batch(t: Trellis, x: np.ndarray) -> np.ndarray:
    """Encode rows of ``x`` (shape ``(N, k)``); returns shape ``(N, n_C)``."""
    x = np.asarray(x, dtype=np.int64)
    if x.ndim != 2 or x.shape[1] != t.k:
        raise ValueError(f"expected information words of length {t.k}")
    k, d = t.k, t.d
    n = x.shape[0]
    y = np.zeros((n, k + 2 * d), dtype=np.int8)
    state = np.zeros(n, dtype=np.int64)
    flush = t.flush_input
    for i in range(t.n_segments):
        b = x[:, i] if i < k else flush[i - k, state]
        y[:, d + i] = t.output[i, state, b]
        if i >= k:
            y[:, i - k] = b
        state = t.next_state[i, state, b]
    return y


def encode_conv(t: Trellis, x) -> np.ndarray:
    """Codeword of information word ``x``: ``d`` tail inputs, then ``k + d`` parities."""
    return encode_conv_batch(t, np.asarray(x).reshape(1, -1))[0]


def encode_path(t: Trellis, x) -> np.ndarray:
    """The path selecting input ``x[i]`` at every free segment ``i < k``."""
    x = np.asarray(x, dtype=np.int64)
    if x.shape != (t.k,):
        raise ValueError(f"expected an information word of length {t.k}")
    path = np.empty(t.n_segments, dtype=np.int64)
    s = 0
    flush = t.flush_input
    for i in range(t.n_segments):
        b = int(x[i]) if i < t.k else int(flush[i - t.k, s])
        path[i] = (i * t.n_states + s) * 2 + b
        s = int(t.next_state[i, s, b])
    return path


def check_path(t: Trellis, path) -> np.ndarray:
    path = np.asarray(path, dtype=np.int64)
    if path.shape != (t.n_segments,):
        raise InvalidPathError(f"path must have {t.n_segments} edges")
    s = 0
    for i, flat in enumerate(path):
        seg, src, b = t.edge(flat)
        if seg != i or src != s or not t.valid[seg, src, b]:
            raise InvalidPathError(f"edge {i} does not continue the path")
        s = int(t.next_state[seg, src, b])
    if s != 0:
        raise InvalidPathError("path does not end in the terminal state")
    return path


def path_inputs(t: Trellis, path) -> np.ndarray:
    """Input labels along a path (length ``k + d``)."""
    return (np.asarray(path) & 1).astype(np.int8)


def path_to_codeword(t: Trellis, path) -> np.ndarray:
    path = check_path(t, path)
    y = np.zeros(t.spec.n_c, dtype=np.int8)
    js = t.index_sets.reshape(-1, 2)[path].ravel()
    y[js[js >= 0]] = 1
    return y


def path_flow(t: Trellis, path) -> np.ndarray:
    """0/1 edge flow (shape of the trellis arrays) carried by ``path``."""
    f = np.zeros(t.shape)
    f.reshape(-1)[np.asarray(path)] = 1.0
    return f


def shortest_path(t: Trellis, edge_costs, scratch=None) -> tuple[np.ndarray, float]:
    """Minimum-cost start-to-end path by forward dynamic programming.

    ``edge_costs`` has the trellis shape ``(k + d, S, 2)``; entries of absent
    edges are ignored.  Ties prefer input 0, then the smaller source state.
    ``scratch`` may be a ``(dist, pred)`` pair of arrays of shape
    ``(k + d + 1, S)`` reused across calls.
    """
    costs = np.ascontiguousarray(edge_costs, dtype=np.float64)
    if costs.shape != t.shape:
        raise ValueError(f"edge costs must have shape {t.shape}")
    if scratch is None:
        dist = np.empty((t.n_segments + 1, t.n_states))
        pred = np.zeros((t.n_segments + 1, t.n_states), dtype=np.int64)
    else:
        dist, pred = scratch
    path, cost = _sp_forward(t.next_state, costs, dist, pred)
    return path, float(cost)


def codeword_to_path(t: Trellis, y) -> np.ndarray:
    """Inverse of :func:`path_to_codeword`."""
    y = np.asarray(y)
    if y.shape != (t.spec.n_c,):
        raise ValueError(f"expected a codeword of length {t.spec.n_c}")
    # cost sum_j y'_j (1 - 2 y_j) is minimised exactly by y' = y
    signs = np.append(1.0 - 2.0 * y, 0.0)
    costs = signs[t.index_sets].sum(axis=-1)
    path, _ = shortest_path(t, costs)
    if not np.array_equal(path_to_codeword(t, path), y):
        raise ValueError("not a codeword of this convolutional code")
    return path
