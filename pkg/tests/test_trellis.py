import numpy as np
import pytest

from conftest import all_paths, all_words, shift_register_encode
from turbolp.trellis import (
    ConvCodeSpec,
    InvalidPathError,
    build_trellis,
    codeword_to_path,
    default_spec,
    encode_conv,
    encode_conv_batch,
    encode_path,
    path_to_codeword,
    shortest_path,
)


def test_d2_k4_shape():
    t = build_trellis(default_spec(4, 2))
    assert t.n_segments == 6
    # states present at the start of each segment
    counts = t.vertices.sum(axis=1)
    assert list(counts[:4]) == [1, 2, 4, 4]
    assert list(counts[4:6]) == [4, 2]
    assert t.vertices[6].sum() == 1 and t.vertices[6, 0]


def test_lte_k40_shape():
    spec = ConvCodeSpec.from_octal(40, 3, "13", "15")
    assert spec.feedback == 0b1101 and spec.feedforward == 0b1011
    t = build_trellis(spec)
    assert t.n_segments == 43
    assert t.vertices[3:41].sum(axis=1).tolist() == [8] * 38
    assert spec.n_c == 46


@pytest.mark.parametrize("k,d", [(1, 1), (5, 2), (7, 3), (12, 3)])
def test_path_count(k, d):
    assert build_trellis(default_spec(k, d) if d > 1 else ConvCodeSpec(k, 1, 0b11, 0b10)).count_paths() == 2 ** k


def test_out_degree():
    t = build_trellis(default_spec(9, 3))
    deg = t.valid.sum(axis=2)
    alive = t.vertices[:-1]
    assert np.all(deg[:9][alive[:9]] == 2)
    assert np.all(deg[9:][alive[9:]] == 1)
    assert np.all(deg[~alive] == 0)


def test_index_set_sizes():
    t = build_trellis(default_spec(10, 3))
    sizes = (t.index_sets >= 0).sum(axis=-1)
    assert sizes.max() <= 2
    assert np.all(sizes[:10] <= 1)


def test_zero_word():
    t = build_trellis(default_spec(8, 3))
    assert not encode_conv(t, np.zeros(8, dtype=int)).any()


def test_first_parity_of_unit_input():
    t = build_trellis(default_spec(4, 2))
    y = encode_conv(t, [1, 0, 0, 0])
    assert y[t.d] == 1


@pytest.mark.parametrize("d", [2, 3])
def test_encoder_matches_shift_register(d):
    rng = np.random.default_rng(d)
    spec = default_spec(8, d)
    t = build_trellis(spec)
    for _ in range(50):
        x = rng.integers(0, 2, 8)
        ref = shift_register_encode(8, d, spec.feedback, spec.feedforward, x)
        assert np.array_equal(encode_conv(t, x), ref)


def test_all_zero_path():
    t = build_trellis(default_spec(5, 2))
    zero = encode_path(t, np.zeros(5, dtype=int))
    assert not path_to_codeword(t, zero).any()


def test_codeword_is_union_of_index_sets():
    # every codeword of this code has weight >= 2, so check the definition edge by edge
    t = build_trellis(default_spec(5, 2))
    for p in all_paths(t):
        y = np.zeros(t.spec.n_c, dtype=np.int8)
        for e in p:
            i, s, b = t.edge(e)
            for j in t.index_sets[i, s, b]:
                if j >= 0:
                    y[j] = 1
        assert np.array_equal(path_to_codeword(t, p), y)


def test_round_trip_k6():
    t = build_trellis(default_spec(6, 2))
    words = encode_conv_batch(t, all_words(6))
    for y in words:
        assert np.array_equal(path_to_codeword(t, codeword_to_path(t, y)), y)


def test_bijection_k10():
    t = build_trellis(default_spec(10, 3))
    from_paths = {path_to_codeword(t, p).tobytes() for p in all_paths(t)}
    from_words = {y.tobytes() for y in encode_conv_batch(t, all_words(10))}
    assert len(from_paths) == 2 ** 10
    assert from_paths == from_words


def test_invalid_path():
    t = build_trellis(default_spec(4, 2))
    p = encode_path(t, [1, 0, 1, 1])
    bad = p.copy()
    bad[2] ^= 1 << 1  # wrong source state
    with pytest.raises(InvalidPathError):
        path_to_codeword(t, bad)
    with pytest.raises(InvalidPathError):
        path_to_codeword(t, p[:-1])


def test_shortest_path_zero_costs():
    t = build_trellis(default_spec(6, 2))
    path, cost = shortest_path(t, np.zeros(t.shape))
    assert cost == 0
    assert not (path & 1)[:6].any()


def test_shortest_path_penalised_inputs():
    t = build_trellis(default_spec(6, 2))
    c = np.zeros(t.shape)
    c[:6, :, 1] = 1.0
    path, cost = shortest_path(t, c)
    assert cost == 0 and not path_to_codeword(t, path).any()


def test_shortest_path_brute_force():
    rng = np.random.default_rng(0)
    t = build_trellis(default_spec(6, 2))
    paths = all_paths(t)
    for _ in range(20):
        c = rng.normal(size=t.shape)
        flat = c.reshape(-1)
        best = min(flat[p].sum() for p in paths)
        path, cost = shortest_path(t, c)
        assert cost == pytest.approx(best, abs=1e-12)
        assert flat[path].sum() == pytest.approx(cost, abs=1e-12)


def test_shortest_path_is_ml_for_bit_costs():
    rng = np.random.default_rng(1)
    t = build_trellis(default_spec(7, 3))
    words = encode_conv_batch(t, all_words(7))
    for _ in range(10):
        lam = rng.normal(size=t.spec.n_c)
        costs = np.append(lam, 0.0)[t.index_sets].sum(axis=-1)
        _, cost = shortest_path(t, costs)
        assert cost == pytest.approx((words @ lam).min(), abs=1e-12)


def test_shortest_path_beats_random_paths():
    rng = np.random.default_rng(2)
    t = build_trellis(default_spec(40, 3))
    c = rng.normal(size=t.shape)
    _, cost = shortest_path(t, c)
    flat = c.reshape(-1)
    for _ in range(1000):
        p = encode_path(t, rng.integers(0, 2, 40))
        assert cost <= flat[p].sum() + 1e-12


def test_octal_round_trip():
    spec = default_spec(5, 3)
    assert (spec.feedback_octal, spec.feedforward_octal) == ("13", "15")


def test_spec_validation():
    with pytest.raises(ValueError):
        ConvCodeSpec(4, 2, 0b110, 0b101)
    with pytest.raises(ValueError):
        ConvCodeSpec(4, 0, 1, 1)
