import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles as O
from hybridchaos import DimensionMismatch, MapParams
from hybridchaos.crypto import (CipherKey, DiffMetrics, _diffuse_flat,
                                decrypt, derive_keystream, differential_test,
                                diffuse, diffusion_seed, encrypt,
                                inverse_permute, npcr, permute, quantize,
                                uaci)
from hybridchaos.dynamics import chi_square_uniform
from hybridchaos.imageio import ImageBuffer
from hybridchaos.testimage import synthetic_photo


def rand_image(rng, h, w, c):
    return ImageBuffer(rng.integers(0, 256, (h, w, c), dtype=np.uint8))


def const_image(v, h=8, w=8, c=3):
    return ImageBuffer(np.full((h, w, c), v, dtype=np.uint8))


KEY = CipherKey()


# -- keystream ----------------------------------------------------------------

def test_keystream_deterministic_and_sized():
    a = derive_keystream(KEY, 4096)
    assert a.dtype == np.uint8 and a.size == 4096
    assert np.array_equal(a, derive_keystream(KEY, 4096))
    assert derive_keystream(KEY, 1).size == 1


def test_keystream_rejects_empty():
    with pytest.raises(ValueError):
        derive_keystream(KEY, 0)


def test_quantize_takes_low_mantissa_bits():
    x = np.array([0.5, 0.5 + 2.0 ** -53, 0.5 + 255 * 2.0 ** -53, 0.0])
    assert quantize(x).tolist() == [0, 1, 255, 0]


def test_keystream_uniform_over_a_million_bytes():
    counts = np.bincount(derive_keystream(KEY, 1_000_000), minlength=256)
    assert chi_square_uniform(counts)[1] > 0.001


def test_keystream_key_sensitivity():
    other = CipherKey(params=KEY.params.with_(x0=KEY.params.x0 + 1e-15))
    a = derive_keystream(KEY, 10_000)
    b = derive_keystream(other, 10_000)
    assert np.mean(a != b) >= 0.99


def test_nonce_changes_keystream():
    a = derive_keystream(KEY, 1000)
    b = derive_keystream(CipherKey(nonce=1), 1000)
    assert np.mean(a != b) >= 0.9
    assert CipherKey(nonce=1).x0_effective != KEY.x0_effective


def test_nonce_bounds():
    with pytest.raises(ValueError):
        CipherKey(nonce=-1)
    with pytest.raises(ValueError):
        CipherKey(nonce=2 ** 64)


def test_seed_is_a_byte():
    assert 0 <= diffusion_seed(KEY) <= 255


# -- permutation --------------------------------------------------------------

def test_permute_invertible_and_preserves_multiset():
    img = rand_image(np.random.default_rng(1), 16, 12, 3)
    p = permute(img, KEY)
    assert inverse_permute(p, KEY) == img
    assert sorted(p.flat().tolist()) == sorted(img.flat().tolist())
    assert p != img


def test_permute_single_pixel_unchanged():
    img = ImageBuffer(np.array([[[77]]], dtype=np.uint8))
    assert permute(img, KEY) == img


# -- diffusion ----------------------------------------------------------------

def test_diffusion_hand_example():
    out = _diffuse_flat(np.zeros(2, np.uint8), np.array([5, 7], np.uint8), 0)
    assert out.tolist() == [5, 12]


def test_diffuse_inverse():
    img = rand_image(np.random.default_rng(2), 9, 7, 1)
    f = diffuse(img, KEY, "forward")
    assert diffuse(f, KEY, "inverse") == img


def test_diffuse_bad_direction():
    with pytest.raises(ValueError):
        diffuse(const_image(0), KEY, "sideways")


def test_diffusion_avalanche():
    rng = np.random.default_rng(3)
    stream = derive_keystream(KEY, 1024)
    hits = 0
    trials = 100
    for _ in range(trials):
        p = rng.integers(0, 256, 1024, dtype=np.uint8)
        i = int(rng.integers(0, 1023))
        q = p.copy()
        q[i] = (int(q[i]) + int(rng.integers(1, 256))) % 256
        a = _diffuse_flat(p, stream, 9)
        b = _diffuse_flat(q, stream, 9)
        hits += bool(np.all(a[i:] != b[i:]))
    assert hits / trials >= 0.99


# -- cipher -------------------------------------------------------------------

@pytest.mark.parametrize("rounds", [1, 2, 3])
def test_round_trip_16x16x3(rounds):
    rng = np.random.default_rng(rounds)
    for _ in range(5):
        img = rand_image(rng, 16, 16, 3)
        assert decrypt(encrypt(img, KEY, rounds), KEY, rounds) == img


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 24), st.integers(1, 24), st.sampled_from([1, 3]),
       st.integers(0, 2 ** 32 - 1), st.integers(0, 2 ** 16))
def test_round_trip_property(h, w, c, seed, nonce):
    img = rand_image(np.random.default_rng(seed), h, w, c)
    key = CipherKey(nonce=nonce)
    assert decrypt(encrypt(img, key), key) == img


def test_decrypt_all_zero_is_total():
    out = decrypt(const_image(0), KEY)
    assert out.shape == (8, 8, 3)


def test_rounds_must_be_positive():
    with pytest.raises(ValueError):
        encrypt(const_image(0), KEY, rounds=0)
    with pytest.raises(ValueError):
        decrypt(const_image(0), KEY, rounds=0)


def test_wrong_key_fails():
    img = synthetic_photo(64, 64)
    wrong = CipherKey(params=KEY.params.with_(x0=KEY.params.x0 + 1e-15))
    out = decrypt(encrypt(img, KEY), wrong)
    assert np.mean(out.data != img.data) >= 0.99


def test_encrypted_histograms_flat():
    enc = encrypt(synthetic_photo(), KEY)
    for ch in range(3):
        counts = np.bincount(enc.data[:, :, ch].ravel(), minlength=256)
        assert chi_square_uniform(counts)[1] > 0.001


def test_encrypt_matches_stagewise_pipeline():
    img = rand_image(np.random.default_rng(4), 5, 6, 3)
    x = img
    for k in range(2):
        x = diffuse(permute(x, KEY, k, 2), KEY, "forward", k, 2)
    assert x == encrypt(img, KEY, 2)
    y = x
    for k in reversed(range(2)):
        y = inverse_permute(diffuse(y, KEY, "inverse", k, 2), KEY, k, 2)
    assert y == img


# -- NPCR / UACI --------------------------------------------------------------

def test_metric_examples():
    z = const_image(0, 256, 256, 1)
    assert npcr(z, z) == [0.0] and uaci(z, z) == [0.0]
    assert npcr(z, const_image(1, 256, 256, 1)) == [100.0]
    assert uaci(z, const_image(255, 256, 256, 1)) == [100.0]
    assert uaci(z, const_image(85, 256, 256, 1))[0] == pytest.approx(100 / 3)
    one = z.data.copy()
    one[17, 3, 0] = 9
    assert npcr(z, ImageBuffer(one)) == [100 / 65536]


def test_metrics_match_loop_oracle():
    rng = np.random.default_rng(5)
    for _ in range(100):
        h, w = rng.integers(1, 12, 2)
        c = int(rng.choice([1, 3]))
        a, b = rand_image(rng, h, w, c), rand_image(rng, h, w, c)
        assert npcr(a, b) == O.npcr_loops(a.data, b.data)
        assert uaci(a, b) == O.uaci_loops(a.data, b.data)


@settings(max_examples=100)
@given(arrays(np.uint8, (4, 5, 3)), arrays(np.uint8, (4, 5, 3)))
def test_metric_bounds(a, b):
    for v in npcr(ImageBuffer(a), ImageBuffer(b)) + uaci(ImageBuffer(a), ImageBuffer(b)):
        assert 0.0 <= v <= 100.0


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        npcr(const_image(0, 4, 4, 3), const_image(0, 4, 5, 3))
    with pytest.raises(DimensionMismatch):
        uaci(const_image(0, 4, 4, 3), const_image(0, 4, 4, 1))


def test_identity_stub_sees_one_pixel():
    img = const_image(100, 16, 16, 3)
    m = differential_test(img, KEY, n_trials=10,
                          encrypt_fn=lambda im, key, rounds: im)
    single = 100.0 / (16 * 16)
    # one channel per trial changes in exactly one pixel
    assert sum(m.npcr) == pytest.approx(single)
    assert sum(m.uaci) == pytest.approx(single / 255)


def test_diff_metrics_averages():
    m = DiffMetrics((99.0, 100.0, 98.0), (33.0, 34.0, 32.0))
    assert m.npcr_avg == pytest.approx(99.0) and m.uaci_avg == pytest.approx(33.0)
    assert (m.npcr_r, m.npcr_g, m.npcr_b) == (99.0, 100.0, 98.0)
    assert m.uaci_b == 32.0
    assert m.rows()[-1] == ("average", m.npcr_avg, m.uaci_avg)
    with pytest.raises(AttributeError):
        DiffMetrics((1.0,), (1.0,)).npcr_r


def test_differential_rejects_zero_trials():
    with pytest.raises(ValueError):
        differential_test(const_image(0), KEY, n_trials=0)


def test_other_key_params_still_decrypt():
    key = CipherKey(params=MapParams(r1=0.7, r2=0.9, x0=0.123))
    img = rand_image(np.random.default_rng(6), 10, 10, 3)
    assert decrypt(encrypt(img, key), key) == img
