import itertools

import numpy as np
import pytest

from turbolp.trellis import default_spec
from turbolp.turbo import TurboCode


def all_paths(t):
    """Every start-to-end path, found by depth-first search over the edge arrays."""
    S = t.n_states
    out = []

    def walk(i, s, acc):
        if i == t.n_segments:
            if s == 0:
                out.append(np.array(acc, dtype=np.int64))
            return
        for b in range(2):
            nxt = t.next_state[i, s, b]
            if nxt >= 0:
                walk(i + 1, nxt, acc + [(i * S + s) * 2 + b])

    walk(0, 0, [])
    return out


def all_words(k):
    return np.array(list(itertools.product((0, 1), repeat=k)), dtype=np.int64)


def shift_register_encode(k, d, feedback, feedforward, x):
    """Reference encoder written directly from the register recursion."""
    reg = [0] * d  # reg[j-1] = w[t-j]
    tail, parity = [], []
    for t in range(k + d):
        fb = 0
        for j in range(1, d + 1):
            if (feedback >> j) & 1:
                fb ^= reg[j - 1]
        b = x[t] if t < k else fb  # the flush input cancels the feedback
        w = b ^ fb
        out = w if feedforward & 1 else 0
        for j in range(1, d + 1):
            if (feedforward >> j) & 1:
                out ^= reg[j - 1]
        if t >= k:
            tail.append(b)
        parity.append(out)
        reg = [w] + reg[:-1]
    return np.array(tail + parity, dtype=np.int8)


@pytest.fixture(scope="session")
def tiny_code():
    rng = np.random.default_rng(11)
    return TurboCode(default_spec(6, 2), rng.permutation(6))


@pytest.fixture(scope="session")
def small_code():
    rng = np.random.default_rng(3)
    return TurboCode(default_spec(8, 2), rng.permutation(8))


@pytest.fixture(scope="session")
def lte40():
    return TurboCode.from_profile("lte-40")


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
