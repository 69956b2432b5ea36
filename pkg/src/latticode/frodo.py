"""FrodoPKE with pluggable message encoding.

Randomness is a seeded numpy ``Generator`` per operation, derived from
``sha256(tag || seed)`` so keygen, encryption and matrix expansion draw from
independent streams.  The error distribution is a rounded continuous
Gaussian.  Nothing here is constant-time; this is an analysis artifact, not
a hardened implementation.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .codec import decode_block, encode_block
from .params import ParamSet, get_params, param_id_number, toy_d4_params

SEED_BYTES = 32
SEED_A_BYTES = 16


def derive_rng(tag: str, seed: bytes) -> np.random.Generator:
    digest = hashlib.sha256(tag.encode() + b"\x00" + bytes(seed)).digest()
    return np.random.Generator(np.random.PCG64(int.from_bytes(digest, "little")))


def sample_gaussian(sigma: float, rng: np.random.Generator, size=None) -> np.ndarray:
    """Rounded continuous Gaussian of width sigma (``sigma == 0`` gives zeros)."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return np.zeros(size if size is not None else (), dtype=np.int64)
    return np.rint(rng.normal(0.0, sigma, size)).astype(np.int64)


def sample_uniform_zq(q: int, rng: np.random.Generator, size=None) -> np.ndarray:
    return rng.integers(0, q, size, dtype=np.int64)


Sampler = Callable[[float, np.random.Generator, tuple], np.ndarray]


def zero_noise(sigma: float, rng: np.random.Generator, size) -> np.ndarray:
    """Test hook: a sampler that never adds noise."""
    return np.zeros(size, dtype=np.int64)


@lru_cache(maxsize=8)
def expand_a(seed_a: bytes, n_prime: int, q: int) -> np.ndarray:
    a = sample_uniform_zq(q, derive_rng("expand-A", seed_a), (n_prime, n_prime))
    a.setflags(write=False)
    return a


def _mulmod(x: np.ndarray, y: np.ndarray, q: int) -> np.ndarray:
    # |entries| < 2**16 on one side and small noise on the other, so the dot
    # products fit in a float64 mantissa and BLAS is exact; int64 otherwise.
    bound = int(np.abs(x).max(initial=0)) * int(np.abs(y).max(initial=0)) * x.shape[-1]
    if bound < 1 << 53:
        prod = (x.astype(np.float64) @ y.astype(np.float64)).astype(np.int64)
    elif bound < 1 << 62:
        prod = x @ y
    else:
        raise OverflowError("matrix product would overflow int64")
    return np.mod(prod, q)


@dataclass(frozen=True)
class PublicKey:
    seed_a: bytes
    b_matrix: np.ndarray  # n' x n_bar over Z_q


@dataclass(frozen=True)
class SecretKey:
    s_matrix: np.ndarray  # n' x n_bar, small signed entries


@dataclass(frozen=True)
class KeyPair:
    public: PublicKey
    secret: SecretKey

    @property
    def seed_a(self) -> bytes:
        return self.public.seed_a

    @property
    def b_matrix(self) -> np.ndarray:
        return self.public.b_matrix

    @property
    def s_matrix(self) -> np.ndarray:
        return self.secret.s_matrix


@dataclass(frozen=True)
class Ciphertext:
    c1: np.ndarray  # m_bar x n'
    c2: np.ndarray  # m_bar x n_bar


@dataclass(frozen=True)
class KeygenTrace:
    keypair: KeyPair
    e_matrix: np.ndarray


@dataclass(frozen=True)
class EncryptTrace:
    ciphertext: Ciphertext
    s_prime: np.ndarray
    e_prime: np.ndarray
    e_double_prime: np.ndarray
    v_matrix: np.ndarray
    encoded: np.ndarray


def _check_seed(seed: bytes) -> bytes:
    seed = bytes(seed)
    if len(seed) != SEED_BYTES:
        raise ValueError(f"seed must be {SEED_BYTES} bytes, got {len(seed)}")
    return seed


def keygen_trace(params: ParamSet, seed: bytes, sampler: Sampler = sample_gaussian) -> KeygenTrace:
    seed = _check_seed(seed)
    seed_a = hashlib.sha256(b"seed-A\x00" + seed).digest()[:SEED_A_BYTES]
    a = expand_a(seed_a, params.n_prime, params.q)
    rng = derive_rng("keygen", seed)
    shape = (params.n_prime, params.n_bar)
    s = sampler(params.sigma, rng, shape)
    e = sampler(params.sigma, rng, shape)
    b = np.mod(_mulmod(a, s, params.q) + e, params.q)
    return KeygenTrace(KeyPair(PublicKey(seed_a, b), SecretKey(s)), e)


def keygen(params: ParamSet, seed: bytes, sampler: Sampler = sample_gaussian) -> KeyPair:
    return keygen_trace(params, seed, sampler).keypair


def encode_message(params: ParamSet, msg_bits) -> np.ndarray:
    """Message bits to the ``m_bar x n_bar`` matrix over Z_q (row-major tiling)."""
    bits = np.asarray(msg_bits, dtype=np.int64).ravel()
    if bits.size != params.message_bits:
        raise ValueError(f"{params.id} encrypts {params.message_bits}-bit messages, got {bits.size} bits")
    x = encode_block(params.code, bits)
    return x.reshape(params.m_bar, params.n_bar)


def decode_message(params: ParamSet, y: np.ndarray) -> np.ndarray:
    return decode_block(params.code, np.asarray(y, dtype=np.int64).reshape(-1))


def encrypt_trace(params: ParamSet, pk, msg_bits, seed: bytes, sampler: Sampler = sample_gaussian) -> EncryptTrace:
    pk = pk.public if isinstance(pk, KeyPair) else pk
    seed = _check_seed(seed)
    encoded = encode_message(params, msg_bits)
    a = expand_a(pk.seed_a, params.n_prime, params.q)
    rng = derive_rng("encrypt", seed)
    s1 = sampler(params.sigma, rng, (params.m_bar, params.n_prime))
    e1 = sampler(params.sigma, rng, (params.m_bar, params.n_prime))
    e2 = sampler(params.sigma, rng, (params.m_bar, params.n_bar))
    c1 = np.mod(_mulmod(s1, a, params.q) + e1, params.q)
    v = np.mod(_mulmod(s1, pk.b_matrix, params.q) + e2, params.q)
    c2 = np.mod(v + encoded, params.q)
    return EncryptTrace(Ciphertext(c1, c2), s1, e1, e2, v, encoded)


def encrypt(params: ParamSet, pk, msg_bits, seed: bytes, sampler: Sampler = sample_gaussian) -> Ciphertext:
    return encrypt_trace(params, pk, msg_bits, seed, sampler).ciphertext


def decrypt_noisy_word(params: ParamSet, sk, ct: Ciphertext) -> np.ndarray:
    """``Y = C2 - C1 S mod q``."""
    sk = sk.secret if isinstance(sk, KeyPair) else sk
    return np.mod(ct.c2 - _mulmod(ct.c1, sk.s_matrix, params.q), params.q)


def decrypt(params: ParamSet, sk, ct: Ciphertext) -> np.ndarray:
    return decode_message(params, decrypt_noisy_word(params, sk, ct))


# Serialization ---------------------------------------------------------------

MAGIC = b"LCFR"
VERSION = 1
KIND_PUBLIC, KIND_SECRET, KIND_CIPHERTEXT = 1, 2, 3
_HEADER = struct.Struct("<4sBBHHH4x")  # 16 bytes
TOY_PARAM_ID = 0xFFFF


def pack_values(values: np.ndarray, width: int) -> bytes:
    """Little-endian packing of ``width``-bit unsigned values, row-major."""
    v = np.asarray(values, dtype=np.uint64).ravel()
    if v.size and int(v.max()) >> width:
        raise ValueError(f"value does not fit in {width} bits")
    bits = ((v[:, None] >> np.arange(width, dtype=np.uint64)) & np.uint64(1)).astype(np.uint8)
    return np.packbits(bits.ravel(), bitorder="little").tobytes()


def unpack_values(data: bytes, width: int, count: int) -> np.ndarray:
    need = (count * width + 7) // 8
    if len(data) != need:
        raise ValueError(f"expected {need} bytes of packed data, got {len(data)}")
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")[: count * width]
    weights = np.int64(1) << np.arange(width, dtype=np.int64)
    return bits.reshape(count, width).astype(np.int64) @ weights


def _param_number(params: ParamSet) -> int:
    n = param_id_number(params)
    if n:
        return n
    if params.id == "toy-d4":
        return TOY_PARAM_ID
    raise ValueError("only registered parameter sets can be serialized")


def _header(kind: int, params: ParamSet) -> bytes:
    return _HEADER.pack(MAGIC, VERSION, kind, _param_number(params), params.n_prime, params.log2_q)


def read_header(blob: bytes) -> tuple[int, ParamSet, bytes]:
    if len(blob) < _HEADER.size:
        raise ValueError("truncated object: missing header")
    magic, version, kind, pid, n_prime, log2q = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise ValueError("bad magic: not a serialized key or ciphertext")
    if version != VERSION:
        raise ValueError(f"unsupported format version {version}")
    params = toy_d4_params(1 << log2q) if pid == TOY_PARAM_ID else get_params(pid)
    if params.n_prime != n_prime or params.log2_q != log2q:
        raise ValueError("header dimensions do not match the parameter set")
    return kind, params, blob[_HEADER.size :]


def _expect(blob: bytes, kind: int) -> tuple[ParamSet, bytes]:
    got, params, body = read_header(blob)
    if got != kind:
        raise ValueError(f"expected object kind {kind}, found {got}")
    return params, body


def serialize_public(params: ParamSet, pk: PublicKey) -> bytes:
    return _header(KIND_PUBLIC, params) + pk.seed_a + pack_values(pk.b_matrix, params.log2_q)


def deserialize_public(blob: bytes) -> tuple[ParamSet, PublicKey]:
    params, body = _expect(blob, KIND_PUBLIC)
    seed_a, rest = body[:SEED_A_BYTES], body[SEED_A_BYTES:]
    b = unpack_values(rest, params.log2_q, params.n_prime * params.n_bar)
    return params, PublicKey(seed_a, b.reshape(params.n_prime, params.n_bar))


def serialize_secret(params: ParamSet, sk: SecretKey) -> bytes:
    return _header(KIND_SECRET, params) + pack_values(np.mod(sk.s_matrix, params.q), params.log2_q)


def deserialize_secret(blob: bytes) -> tuple[ParamSet, SecretKey]:
    params, body = _expect(blob, KIND_SECRET)
    s = unpack_values(body, params.log2_q, params.n_prime * params.n_bar)
    s = np.where(s >= params.q // 2, s - params.q, s)
    return params, SecretKey(s.reshape(params.n_prime, params.n_bar))


def serialize_ciphertext(params: ParamSet, ct: Ciphertext) -> bytes:
    body = pack_values(np.concatenate([ct.c1.ravel(), ct.c2.ravel()]), params.log2_q)
    return _header(KIND_CIPHERTEXT, params) + body


def deserialize_ciphertext(blob: bytes) -> tuple[ParamSet, Ciphertext]:
    params, body = _expect(blob, KIND_CIPHERTEXT)
    n1 = params.m_bar * params.n_prime
    vals = unpack_values(body, params.log2_q, n1 + params.m_bar * params.n_bar)
    c1 = vals[:n1].reshape(params.m_bar, params.n_prime)
    c2 = vals[n1:].reshape(params.m_bar, params.n_bar)
    return params, Ciphertext(c1, c2)
