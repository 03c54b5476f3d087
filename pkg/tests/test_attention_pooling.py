"""Attention weighting and pooling: worked values and structural properties."""

import math

import numpy as np
import pytest

from dre import autodiff as ad
from dre.attention import (
    apply_attention,
    assemble_attention_input,
    attention_input_width,
    attention_weights,
    pool,
)


def test_attention_width_arithmetic():
    assert attention_input_width(16, 8, 3) == 64
    assert attention_input_width(16, 8, 1) == 16 + 2 * 8


def test_assembled_row_is_emb_plus_zeros_for_dead_encoder():
    rng = np.random.default_rng(0)
    emb = ad.tensor(rng.normal(size=(1, 3, 4)), dtype=np.float64)
    zeros = [ad.tensor(np.zeros((1, 3, 6)), dtype=np.float64) for _ in range(2)]
    out = assemble_attention_input(emb, zeros)
    assert out.data.shape == (1, 3, 16)
    assert np.array_equal(out.data[..., :4], emb.data)
    assert np.array_equal(out.data[..., 4:], np.zeros((1, 3, 12)))


def test_single_token_gets_full_weight():
    rng = np.random.default_rng(1)
    h = ad.tensor(rng.normal(size=(1, 1, 5)), dtype=np.float64)
    w = ad.tensor(rng.normal(size=5), dtype=np.float64)
    a = attention_weights(h, w, np.array([[True]]))
    assert np.allclose(a.data, [[1.0]], atol=1e-15)


def test_identical_rows_get_uniform_weights():
    row = np.random.default_rng(2).normal(size=4)
    h = ad.tensor(np.tile(row, (1, 5, 1)), dtype=np.float64)
    w = ad.tensor(np.random.default_rng(3).normal(size=4), dtype=np.float64)
    mask = np.array([[True, True, True, False, False]])
    a = attention_weights(h, w, mask)
    assert np.allclose(a.data[0, :3], 1 / 3, atol=1e-12)
    assert np.array_equal(a.data[0, 3:], [0.0, 0.0])


def test_two_token_scalar_oracle():
    # rows engineered so the pre-softmax scores are tanh(1) and tanh(-1)
    h = ad.tensor([[[1.0, 0.0], [-1.0, 0.0]]], dtype=np.float64)
    w = ad.tensor([1.0, 0.0], dtype=np.float64)
    a = attention_weights(h, w, np.array([[True, True]])).data[0]

    e1, e2 = math.tanh(1.0), math.tanh(-1.0)  # +-0.7616
    z1, z2 = math.exp(e1), math.exp(e2)
    oracle = [z1 / (z1 + z2), z2 / (z1 + z2)]
    assert np.allclose(a, oracle, atol=1e-12)
    assert a == pytest.approx([0.8210, 0.1790], abs=5e-5)


def test_uniform_weights_halve_two_equal_rows():
    row = np.arange(4.0)
    h = ad.tensor(np.stack([row, row])[None], dtype=np.float64)
    a = ad.tensor([[0.5, 0.5]], dtype=np.float64)
    r = apply_attention(h, a)
    assert np.allclose(r.data[0], np.stack([row / 2, row / 2]), atol=1e-15)


def test_one_hot_weights_select_one_row():
    rng = np.random.default_rng(4)
    h = ad.tensor(rng.normal(size=(1, 3, 4)), dtype=np.float64)
    a = ad.tensor([[0.0, 1.0, 0.0]], dtype=np.float64)
    r = apply_attention(h, a).data[0]
    assert np.array_equal(r[1], h.data[0, 1])
    assert np.array_equal(r[[0, 2]], np.zeros((2, 4)))


def test_weighted_row_sum_equals_direct_oracle():
    rng = np.random.default_rng(5)
    h = ad.tensor(rng.normal(size=(1, 6, 5)), dtype=np.float64)
    w = ad.tensor(rng.normal(size=5), dtype=np.float64)
    mask = np.array([[True, True, True, True, False, False]])
    a = attention_weights(h, w, mask)
    r = apply_attention(h, a)
    summed = r.data[0].sum(axis=0)
    oracle = np.einsum("t,td->d", a.data[0], h.data[0])  # direct weighted sum
    assert np.allclose(summed, oracle, atol=1e-12)


def test_pool_single_row_duplicates_it():
    row = np.random.default_rng(6).normal(size=5)
    x = pool(ad.tensor(row[None, None], dtype=np.float64), np.array([[True]]))
    assert np.allclose(x.data[0], np.concatenate([row, row]), atol=1e-15)


def test_pool_direct_example():
    rows = ad.tensor([[[1.0, 0.0], [0.0, 1.0]]], dtype=np.float64)
    x = pool(rows, np.array([[True, True]]))
    assert np.allclose(x.data[0], [1.0, 1.0, 0.5, 0.5], atol=1e-15)


def test_max_half_dominates_mean_half():
    rng = np.random.default_rng(7)
    for _ in range(200):
        T, d = rng.integers(1, 7), rng.integers(1, 5)
        rows = ad.tensor(rng.normal(size=(1, T, d)), dtype=np.float64)
        mask = np.zeros((1, T), dtype=bool)
        mask[0, : rng.integers(1, T + 1)] = True
        x = pool(rows, mask).data[0]
        assert np.all(x[:d] >= x[d:] - 1e-12)


def test_weight_properties_random():
    rng = np.random.default_rng(8)
    for _ in range(200):
        T, d = rng.integers(1, 8), rng.integers(1, 6)
        h = ad.tensor(rng.normal(size=(2, T, d)), dtype=np.float64)
        w = ad.tensor(rng.normal(size=d), dtype=np.float64)
        mask = rng.random((2, T)) < 0.7
        mask[:, 0] = True
        a = attention_weights(h, w, mask).data
        assert np.all(a >= 0)
        assert np.allclose(a.sum(axis=-1), 1.0, atol=1e-6)
        assert np.array_equal(a[~mask], np.zeros((~mask).sum()))


def test_permutation_equivariance_of_attention_stage():
    rng = np.random.default_rng(9)
    T, d = 6, 4
    h_data = rng.normal(size=(1, T, d))
    w = ad.tensor(rng.normal(size=d), dtype=np.float64)
    mask = np.ones((1, T), dtype=bool)
    perm = rng.permutation(T)

    a = attention_weights(ad.tensor(h_data, dtype=np.float64), w, mask)
    r = apply_attention(ad.tensor(h_data, dtype=np.float64), a)
    a_p = attention_weights(ad.tensor(h_data[:, perm], dtype=np.float64), w, mask)
    r_p = apply_attention(ad.tensor(h_data[:, perm], dtype=np.float64), a_p)
    assert np.allclose(a_p.data[0], a.data[0][perm], atol=1e-12)
    assert np.allclose(r_p.data[0], r.data[0][perm], atol=1e-12)


def test_pool_is_permutation_invariant():
    rng = np.random.default_rng(10)
    rows = rng.normal(size=(1, 5, 3))
    mask = np.ones((1, 5), dtype=bool)
    x1 = pool(ad.tensor(rows, dtype=np.float64), mask).data
    perm = rng.permutation(5)
    x2 = pool(ad.tensor(rows[:, perm], dtype=np.float64), mask).data
    assert np.allclose(x1, x2, atol=1e-12)


def test_full_attention_pooling_path_is_padding_independent():
    rng = np.random.default_rng(11)
    T, d = 4, 5
    h_real = rng.normal(size=(T, d))
    w = ad.tensor(rng.normal(size=d), dtype=np.float64)

    def run(pad):
        h = np.zeros((1, T + pad, d))
        h[0, :T] = h_real
        mask = np.zeros((1, T + pad), dtype=bool)
        mask[0, :T] = True
        a = attention_weights(ad.tensor(h, dtype=np.float64), w, mask)
        return pool(apply_attention(ad.tensor(h, dtype=np.float64), a), mask).data

    assert np.allclose(run(0), run(3), atol=1e-12)


def test_all_masked_pooling_errors():
    with pytest.raises(ValueError):
        pool(ad.tensor(np.ones((1, 2, 2))), np.array([[False, False]]))
    with pytest.raises(ValueError):
        attention_weights(
            ad.tensor(np.ones((1, 2, 2))), ad.tensor(np.ones(2)), np.array([[False, False]])
        )
