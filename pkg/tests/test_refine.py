import numpy as np
import pytest

from xlembed import (
    CrossLingualSpace,
    average_plain,
    average_weighted,
    build_identical_dictionary,
    dictionary_from_pairs,
    make_space,
    meemi_transform,
)
from synthetic import unit_gaussian_rows


# ---------------------------------------------------------------- oracle

def normal_equations(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Least-squares fit via the explicit normal equations (X^T X)^-1 X^T Y."""
    return np.linalg.inv(x.T @ x) @ (x.T @ y)


def _space_pair(src_tokens, src_rows, tgt_tokens, tgt_rows, freqs=None):
    src = make_space(src_tokens, src_rows, freqs=freqs)
    tgt = make_space(tgt_tokens, tgt_rows, freqs=freqs)
    return CrossLingualSpace(src=src, tgt=tgt)


# --------------------------------------------------------------- plain

def test_plain_midpoint():
    space = _space_pair(["w"], [[1.0, 0.0]], ["w"], [[0.0, 1.0]])
    d = build_identical_dictionary(space.src.vocab, space.tgt.vocab)
    out = average_plain(space, d)
    assert np.array_equal(out.src.matrix[0], [0.5, 0.5])
    assert np.array_equal(out.tgt.matrix[0], [0.5, 0.5])


def test_plain_fixed_point():
    v = [[0.3, -0.4]]
    space = _space_pair(["w"], v, ["w"], v)
    d = build_identical_dictionary(space.src.vocab, space.tgt.vocab)
    out = average_plain(space, d)
    assert np.array_equal(out.src.matrix, space.src.matrix)
    assert np.array_equal(out.tgt.matrix, space.tgt.matrix)


def test_plain_leaves_other_rows_byte_identical():
    rng = np.random.default_rng(0)
    src_rows = rng.normal(size=(6, 4))
    tgt_rows = rng.normal(size=(6, 4))
    toks = ["shared0", "shared1", "a", "b", "c", "d"]
    tgt_toks = ["shared0", "shared1", "e", "f", "g", "h"]
    space = _space_pair(toks, src_rows, tgt_toks, tgt_rows)
    d = build_identical_dictionary(space.src.vocab, space.tgt.vocab)
    out = average_plain(space, d)
    for i, tok in enumerate(toks):
        if not tok.startswith("shared"):
            assert out.src.matrix[i].tobytes() == src_rows[i].tobytes()
    for i, tok in enumerate(tgt_toks):
        if not tok.startswith("shared"):
            assert out.tgt.matrix[i].tobytes() == tgt_rows[i].tobytes()


def test_plain_idempotent():
    rng = np.random.default_rng(1)
    src_rows = rng.normal(size=(5, 3))
    tgt_rows = rng.normal(size=(5, 3))
    toks = [f"t{i}" for i in range(5)]
    space = _space_pair(toks, src_rows, toks, tgt_rows)
    d = build_identical_dictionary(space.src.vocab, space.tgt.vocab)
    once = average_plain(space, d)
    twice = average_plain(once, d)
    assert np.array_equal(once.src.matrix, twice.src.matrix)
    assert np.array_equal(once.tgt.matrix, twice.tgt.matrix)


def test_anchored_pairs_bit_equal_across_sides():
    rng = np.random.default_rng(2)
    toks = [f"t{i}" for i in range(40)]
    space = _space_pair(
        toks, rng.normal(size=(40, 8)), toks, rng.normal(size=(40, 8))
    )
    d = build_identical_dictionary(space.src.vocab, space.tgt.vocab)
    out = average_plain(space, d)
    for i in range(len(d)):
        si, ti = d.src_indices[i], d.tgt_indices[i]
        assert out.src.matrix[si].tobytes() == out.tgt.matrix[ti].tobytes()


# -------------------------------------------------------------- weighted

def test_weighted_three_to_one():
    space = _space_pair(
        ["w"], [[1.0, 0.0]], ["w"], [[0.0, 1.0]], freqs=[1]
    )
    d = dictionary_from_pairs([("w", "w")], space.src.vocab, space.tgt.vocab)
    d.f_src = np.array([3])
    d.f_tgt = np.array([1])
    out = average_weighted(space, d)
    assert np.allclose(out.src.matrix[0], [0.75, 0.25], atol=1e-15)
    assert np.array_equal(out.src.matrix[0], out.tgt.matrix[0])


def test_weighted_equal_frequencies_reduce_to_plain():
    rng = np.random.default_rng(3)
    toks = [f"t{i}" for i in range(10)]
    freqs = np.full(10, 7, dtype=np.int64)
    space = _space_pair(
        toks, rng.normal(size=(10, 4)), toks, rng.normal(size=(10, 4)),
        freqs=freqs,
    )
    d = build_identical_dictionary(space.src.vocab, space.tgt.vocab)
    plain = average_plain(space, d)
    weighted = average_weighted(space, d)
    assert np.allclose(plain.src.matrix, weighted.src.matrix, atol=1e-15)


def test_weighted_matches_direct_formula():
    rng = np.random.default_rng(4)
    n = 1000
    toks = [f"t{i:04d}" for i in range(n)]
    freqs = rng.integers(1, 10_000, size=n).astype(np.int64)
    src_rows = unit_gaussian_rows(rng, n, 16)
    tgt_rows = unit_gaussian_rows(rng, n, 16)
    space = _space_pair(toks, src_rows, toks, tgt_rows, freqs=freqs)
    d = build_identical_dictionary(space.src.vocab, space.tgt.vocab)
    out = average_weighted(space, d)
    for i in range(len(d)):
        si, ti = d.src_indices[i], d.tgt_indices[i]
        f1, f2 = float(d.f_src[i]), float(d.f_tgt[i])
        mu = (f1 * src_rows[si] + f2 * tgt_rows[ti]) / (f1 + f2)
        assert np.max(np.abs(out.src.matrix[si] - mu)) < 1e-12
        assert np.max(np.abs(out.tgt.matrix[ti] - mu)) < 1e-12


def test_weighted_dominant_side_bound():
    space = _space_pair(["w"], [[1.0, 0.0]], ["w"], [[0.0, 1.0]])
    d = dictionary_from_pairs([("w", "w")], space.src.vocab, space.tgt.vocab)
    d.f_src = np.array([10**6])
    d.f_tgt = np.array([1])
    out = average_weighted(space, d)
    assert np.max(np.abs(out.src.matrix[0] - [1.0, 0.0])) < 1e-5


def test_weighted_zero_total_frequency_names_pair():
    space = _space_pair(["w"], [[1.0, 0.0]], ["w"], [[0.0, 1.0]])
    d = dictionary_from_pairs([("w", "w")], space.src.vocab, space.tgt.vocab)
    d.f_src = np.array([0])
    d.f_tgt = np.array([0])
    with pytest.raises(ValueError) as err:
        average_weighted(space, d)
    assert "'w'" in str(err.value)


def test_weighted_relative_frequencies():
    # same absolute count, very different corpus sizes: relative weighting
    # tilts the mean toward the rarer corpus' side
    src = make_space(["w"], [[1.0, 0.0]], freqs=[100])
    tgt = make_space(["w"], [[0.0, 1.0]], freqs=[100])
    src.vocab.total_tokens = 1_000_000
    tgt.vocab.total_tokens = 1_000
    space = CrossLingualSpace(src=src, tgt=tgt)
    d = build_identical_dictionary(src.vocab, tgt.vocab)
    out_abs = average_weighted(space, d)
    out_rel = average_weighted(space, d, relative=True)
    assert np.allclose(out_abs.src.matrix[0], [0.5, 0.5])
    # relative: weights 1e-4 vs 1e-1 -> mean close to the target vector
    assert out_rel.src.matrix[0][1] > 0.99


def test_multi_pair_token_full_neighborhood():
    # source token paired with two targets: it averages over its whole
    # neighborhood; each target averages with its one counterpart, all from
    # the pre-update vectors (simultaneous semantics)
    src = make_space(["s"], [[1.0, 0.0]], freqs=[2])
    tgt = make_space(["t1", "t2"], [[0.0, 1.0], [0.0, -1.0]], freqs=[2, 2])
    space = CrossLingualSpace(src=src, tgt=tgt)
    d = dictionary_from_pairs([("s", "t1"), ("s", "t2")], src.vocab, tgt.vocab)
    out = average_plain(space, d)
    assert np.allclose(out.src.matrix[0], [1 / 3, 0.0])
    assert np.allclose(out.tgt.matrix[0], [0.5, 0.5])
    assert np.allclose(out.tgt.matrix[1], [0.5, -0.5])


def test_average_invalid_index_rejected():
    space = _space_pair(["w"], [[1.0, 0.0]], ["w"], [[0.0, 1.0]])
    d = dictionary_from_pairs([("w", "w")], space.src.vocab, space.tgt.vocab)
    d.src_indices = np.array([5])
    with pytest.raises(ValueError):
        average_plain(space, d)


def test_provenance_appended():
    space = _space_pair(["w"], [[1.0, 0.0]], ["w"], [[0.0, 1.0]])
    d = build_identical_dictionary(space.src.vocab, space.tgt.vocab)
    out = average_weighted(average_plain(space, d), d)
    assert [r["transform"] for r in out.provenance] == [
        "average_plain",
        "average_weighted",
    ]
    assert space.provenance == []  # input untouched


# ----------------------------------------------------------------- meemi

def test_meemi_identity_on_identical_spaces():
    rng = np.random.default_rng(5)
    toks = [f"t{i}" for i in range(30)]
    rows = rng.normal(size=(30, 6))
    space = _space_pair(toks, rows, toks, rows.copy())
    d = build_identical_dictionary(space.src.vocab, space.tgt.vocab)
    out = meemi_transform(space, d)
    assert np.max(np.abs(out.src.matrix - rows)) < 1e-10
    assert np.max(np.abs(out.tgt.matrix - rows)) < 1e-10


def test_meemi_beats_identity_residual():
    rng = np.random.default_rng(6)
    toks = [f"t{i}" for i in range(50)]
    x = rng.normal(size=(50, 8))
    y = rng.normal(size=(50, 8))
    space = _space_pair(toks, x, toks, y)
    d = build_identical_dictionary(space.src.vocab, space.tgt.vocab)
    out = meemi_transform(space, d)
    xs = x[d.src_indices]
    ys = y[d.tgt_indices]
    mid = (xs + ys) / 2
    res_before = np.linalg.norm(xs - mid) ** 2
    res_after = np.linalg.norm(out.src.matrix[d.src_indices] - mid) ** 2
    assert res_after <= res_before + 1e-12


def test_meemi_matches_normal_equations_oracle():
    rng = np.random.default_rng(7)
    n, d_dim = 100, 20
    toks = [f"t{i:03d}" for i in range(n)]
    x = rng.normal(size=(n, d_dim))
    y = rng.normal(size=(n, d_dim))
    space = _space_pair(toks, x, toks, y)
    d = build_identical_dictionary(space.src.vocab, space.tgt.vocab)
    out = meemi_transform(space, d)

    xs = x[d.src_indices]
    ys = y[d.tgt_indices]
    mid = (xs + ys) / 2
    m_src = normal_equations(xs, mid)
    expected = x @ m_src
    assert np.max(np.abs(out.src.matrix - expected)) < 1e-8


def test_meemi_moves_non_dictionary_rows():
    rng = np.random.default_rng(8)
    src_toks = ["shared0", "shared1", "shared2", "only-src"]
    tgt_toks = ["shared0", "shared1", "shared2", "only-tgt"]
    space = _space_pair(
        src_toks, rng.normal(size=(4, 2)), tgt_toks, rng.normal(size=(4, 2))
    )
    d = build_identical_dictionary(space.src.vocab, space.tgt.vocab)
    out = meemi_transform(space, d)
    assert not np.array_equal(out.src.matrix[3], space.src.matrix[3])


def test_meemi_underdetermined_falls_back_to_ridge():
    rng = np.random.default_rng(9)
    toks = ["a", "b"]
    space = _space_pair(
        toks, rng.normal(size=(2, 5)), toks, rng.normal(size=(2, 5))
    )
    d = build_identical_dictionary(space.src.vocab, space.tgt.vocab)
    with pytest.warns(UserWarning):
        out = meemi_transform(space, d)
    assert np.isfinite(out.src.matrix).all()


def test_meemi_empty_dictionary_rejected():
    space = _space_pair(["a"], [[1.0, 0.0]], ["b"], [[0.0, 1.0]])
    with pytest.warns(UserWarning):
        d = build_identical_dictionary(space.src.vocab, space.tgt.vocab)
    with pytest.raises(ValueError):
        meemi_transform(space, d)


# ------------------------------------------------------------ space type

def test_cross_lingual_space_dim_mismatch():
    src = make_space(["a"], [[1.0, 0.0]])
    tgt = make_space(["b"], [[1.0, 0.0, 0.0]])
    with pytest.raises(ValueError):
        CrossLingualSpace(src=src, tgt=tgt)
