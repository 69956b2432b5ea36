import numpy as np
import pytest
from scipy import stats

from latticode import frodo
from latticode.codec import bits_to_index, label
from latticode.frodo import (
    decrypt,
    decrypt_noisy_word,
    deserialize_ciphertext,
    deserialize_public,
    deserialize_secret,
    derive_rng,
    encrypt,
    encrypt_trace,
    expand_a,
    keygen,
    keygen_trace,
    read_header,
    sample_gaussian,
    sample_uniform_zq,
    serialize_ciphertext,
    serialize_public,
    serialize_secret,
    zero_noise,
)
from latticode.params import get_params, params_registry, toy_d4_params

SEED = bytes(range(32))
SEED2 = bytes(range(1, 33))


class FirstDrawOnly:
    """Sampler returning ``first`` on the first call and zeros afterwards."""

    def __init__(self, first):
        self.first = first
        self.calls = 0

    def __call__(self, sigma, rng, shape):
        self.calls += 1
        if self.calls == 1:
            assert self.first.shape == tuple(shape)
            return self.first
        return np.zeros(shape, dtype=np.int64)


def random_bits(params, seed=0):
    return np.random.default_rng(seed).integers(0, 2, params.message_bits)


def test_registry_examples():
    p = get_params("frodo-640-e8")
    assert (p.q, p.sigma, p.rate_b, p.ct_bytes, p.dfr_log2) == (1 << 15, 3.25, 2, 9720, -164)
    p = get_params("frodo-1344-bw16-ct")
    assert (p.q, p.sigma, float(p.rate_b), p.ct_bytes) == (1 << 15, 1.17, 4.25, 20280)
    p = get_params("Frodo-976")
    assert (p.q, p.sigma, p.rate_b, p.ct_bytes, p.dfr_log2) == (1 << 16, 2.3, 3, 15744, -220)
    assert {r.ct_bytes for r in params_registry()} == {9720, 9072, 15744, 14760, 21632, 20280}
    for r in params_registry():
        assert r.rate_b == r.rate_listed
        assert r.ct_bytes == r.ct_bytes_listed
        assert r.message_bits == 64 * r.rate_b
    with pytest.raises(KeyError, match="unknown"):
        get_params("frodo-7")


def test_keygen_deterministic():
    p = get_params("frodo-640-e8")
    k1, k2 = keygen(p, SEED), keygen(p, SEED)
    assert k1.seed_a == k2.seed_a
    assert np.array_equal(k1.b_matrix, k2.b_matrix) and np.array_equal(k1.s_matrix, k2.s_matrix)
    assert not np.array_equal(keygen(p, SEED2).b_matrix, k1.b_matrix)
    with pytest.raises(ValueError, match="32 bytes"):
        keygen(p, b"short")


def test_public_key_equation():
    p = get_params("frodo-640")
    tr = keygen_trace(p, SEED)
    a = expand_a(tr.keypair.seed_a, p.n_prime, p.q)
    assert np.array_equal(tr.keypair.b_matrix, np.mod(a @ tr.keypair.s_matrix + tr.e_matrix, p.q))
    kz = keygen(p, SEED, sampler=zero_noise)
    assert not kz.b_matrix.any()  # S = 0 too, so B = A S = 0
    s = sample_gaussian(p.sigma, derive_rng("t", SEED), (p.n_prime, p.n_bar))
    # S drawn first, E forced to zero
    kp = keygen(p, SEED, sampler=FirstDrawOnly(s))
    assert np.array_equal(kp.b_matrix, np.mod(a @ s, p.q))


def test_zero_noise_message_and_v():
    p = get_params("frodo-640-e8")
    kp = keygen(p, SEED)
    zeros = np.zeros(p.message_bits, dtype=np.int64)
    tr = encrypt_trace(p, kp.public, zeros, SEED2, sampler=zero_noise)
    assert not tr.ciphertext.c2.any()
    s1 = np.random.default_rng(0).integers(-3, 4, (p.m_bar, p.n_prime))
    # S' drawn first, E' and E'' forced to zero
    tr = encrypt_trace(p, kp.public, zeros, SEED2, sampler=FirstDrawOnly(s1))
    assert np.array_equal(tr.ciphertext.c2, np.mod(s1 @ kp.b_matrix, p.q))


def test_naive_encoding_uses_top_bits():
    p = get_params("frodo-976")
    kp = keygen(p, SEED, sampler=zero_noise)
    v = np.arange(64) % 8
    bits = ((v[:, None] >> np.array([2, 1, 0])) & 1).ravel()
    ct = encrypt(p, kp.public, bits, SEED2, sampler=zero_noise)
    assert np.array_equal(ct.c2.ravel(), v * (p.q >> 3))


def test_wrong_message_length():
    p = get_params("frodo-640-e8")
    with pytest.raises(ValueError, match="128-bit"):
        encrypt(p, keygen(p, SEED).public, np.zeros(100, np.int64), SEED2)


def test_noise_identity():
    p = get_params("frodo-640-bw16")
    kg = keygen_trace(p, SEED)
    bits = random_bits(p)
    tr = encrypt_trace(p, kg.keypair.public, bits, SEED2)
    y = decrypt_noisy_word(p, kg.keypair.secret, tr.ciphertext)
    noise = tr.s_prime @ kg.e_matrix + tr.e_double_prime - tr.e_prime @ kg.keypair.s_matrix
    assert np.array_equal(np.mod(y - tr.encoded, p.q), np.mod(noise, p.q))
    assert np.array_equal(decrypt(p, kg.keypair, tr.ciphertext), bits)


@pytest.mark.parametrize("pid", [r.id for r in params_registry() if r.lattice != "BW32"])
def test_round_trip_every_set(pid):
    p = get_params(pid)
    kp = keygen(p, SEED)
    for i in range(3):
        bits = random_bits(p, i)
        assert np.array_equal(decrypt(p, kp, encrypt(p, kp.public, bits, bytes([i]) * 32)), bits)


def test_bw32_decrypt_rejected():
    p = get_params("frodo-640-bw32")
    kp = keygen(p, SEED)
    ct = encrypt(p, kp.public, random_bits(p), SEED2)
    with pytest.raises(NotImplementedError, match="2\\^32 cosets"):
        decrypt(p, kp, ct)


def test_toy_d4_worked_example():
    p = toy_d4_params()
    assert (p.n_prime, p.q, p.p, p.delta, p.message_bits) == (4, 16, 4, 2, 7)
    kp = keygen(p, SEED)
    bits = np.array([0, 1, 1, 0, 1, 1, 1])
    assert label(p.code, bits_to_index(p.code, bits)) == [1, 2, 3, 0]
    tr = encrypt_trace(p, kp.public, bits, SEED2)
    assert tr.encoded.ravel().tolist() == [4, 8, 12, 0]
    assert decrypt(p, kp, tr.ciphertext).tolist() == bits.tolist()


def test_encrypt_deterministic():
    p = get_params("frodo-640-e8")
    kp = keygen(p, SEED)
    bits = random_bits(p)
    a = serialize_ciphertext(p, encrypt(p, kp.public, bits, SEED2))
    b = serialize_ciphertext(p, encrypt(p, kp.public, bits, SEED2))
    assert a == b


def test_gaussian_sampler_statistics():
    rng = np.random.default_rng(0)
    sigma = 3.25
    x = sample_gaussian(sigma, rng, 1_000_000)
    assert abs(x.mean()) < 3 * sigma / 1000
    # rounding adds 1/12 to the variance of the continuous Gaussian
    assert abs(x.var() - sigma**2) / sigma**2 < 0.02
    assert abs(x.var() - (sigma**2 + 1 / 12)) / sigma**2 < 0.01
    assert not sample_gaussian(1e-9, rng, 1000).any()
    assert not sample_gaussian(0, rng, 10).any()
    with pytest.raises(ValueError):
        sample_gaussian(-1, rng, 1)


def test_uniform_sampler_chi_square():
    x = sample_uniform_zq(16, np.random.default_rng(1), 1_000_000)
    assert x.min() == 0 and x.max() == 15
    counts = np.bincount(x, minlength=16)
    assert stats.chisquare(counts).pvalue > 0.001


def test_serialization_round_trip():
    p = get_params("frodo-976-e8-ct")
    kp = keygen(p, SEED)
    ct = encrypt(p, kp.public, random_bits(p), SEED2)
    blob = serialize_public(p, kp.public)
    p2, pk = deserialize_public(blob)
    assert p2 == p and pk.seed_a == kp.seed_a and np.array_equal(pk.b_matrix, kp.b_matrix)
    p2, sk = deserialize_secret(serialize_secret(p, kp.secret))
    assert np.array_equal(sk.s_matrix, kp.s_matrix)
    cblob = serialize_ciphertext(p, ct)
    assert len(cblob) == 16 + p.ct_bytes
    p2, ct2 = deserialize_ciphertext(cblob)
    assert np.array_equal(ct2.c1, ct.c1) and np.array_equal(ct2.c2, ct.c2)
    assert read_header(cblob)[0] == frodo.KIND_CIPHERTEXT


def test_serialization_errors():
    p = get_params("frodo-640")
    kp = keygen(p, SEED)
    blob = serialize_public(p, kp.public)
    with pytest.raises(ValueError, match="magic"):
        deserialize_public(b"XXXX" + blob[4:])
    with pytest.raises(ValueError, match="kind"):
        deserialize_secret(blob)
    with pytest.raises(ValueError, match="bytes"):
        deserialize_public(blob[:-1])
    with pytest.raises(ValueError, match="truncated"):
        read_header(b"LC")


def test_toy_serialization():
    p = toy_d4_params()
    kp = keygen(p, SEED)
    assert deserialize_public(serialize_public(p, kp.public))[0] == p
