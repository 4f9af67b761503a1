"""Additive privacy amplification and the delayed-application pipeline.

The usual order is: hash the raw key down to a short secure key, then use it
as a one-time pad.  The delayed order encrypts with the raw key directly and
applies the hash afterwards; for that the receiver needs the message expanded
to a uniformly random element of the hash preimage, which is what
:func:`expand_message` produces.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from delayedpa.gf2 import (
    BinaryMatrix,
    BitVector,
    RowReduction,
    matvec,
    row_reduce,
    sample_preimage,
    toeplitz_from_seed,
)

__all__ = [
    "AdditivePaFunction",
    "DelayedPaSession",
    "pa_apply",
    "expand_message",
    "expand_imperfect_key",
    "dpa_encrypt",
    "dpa_recover_via_key",
    "dpa_recover_via_rawkey",
    "otp",
]


@dataclass(frozen=True)
class AdditivePaFunction:
    """A compressing GF(2)-linear hash with independent rows.

    Independence is checked once at construction and the row reduction is
    cached so repeated preimage draws only pay for back-substitution.
    """

    matrix: BinaryMatrix
    reduction: RowReduction = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.matrix.rows >= self.matrix.cols:
            raise ValueError("hash must compress: need n_pa < n")
        red = row_reduce(self.matrix)
        if red.rank < self.matrix.rows:
            raise ValueError("rows not independent")
        object.__setattr__(self, "reduction", red)

    @classmethod
    def from_rows(cls, rows) -> "AdditivePaFunction":
        return cls(BinaryMatrix.from_rows(rows))

    @classmethod
    def from_toeplitz_seed(cls, seed: BitVector, n_pa: int, n: int) -> "AdditivePaFunction":
        return cls(toeplitz_from_seed(seed, n_pa, n))

    @property
    def n(self) -> int:
        return self.matrix.cols

    @property
    def n_pa(self) -> int:
        return self.matrix.rows

    def __call__(self, a: BitVector) -> BitVector:
        return pa_apply(self, a)


def pa_apply(f: AdditivePaFunction, a: BitVector) -> BitVector:
    """Hash an n-bit input down to n_pa bits."""
    if a.length != f.n:
        raise ValueError(f"length mismatch: expected {f.n}, got {a.length}")
    return matvec(f.matrix, a)


def expand_message(f: AdditivePaFunction, m_prime: BitVector, rng) -> BitVector:
    """Uniform draw from the preimage {m : f(m) = m_prime}."""
    if m_prime.length != f.n_pa:
        raise ValueError(f"length mismatch: expected {f.n_pa}, got {m_prime.length}")
    return sample_preimage(f.matrix, m_prime, rng, reduction=f.reduction)


def expand_imperfect_key(
    f: AdditivePaFunction, g: AdditivePaFunction, a_prime: BitVector, rng
) -> BitVector:
    """Uniform m with f(m) = g(a_prime), for using an imperfect key as message."""
    if g.n_pa != f.n_pa:
        raise ValueError("output lengths of the two hashes must match")
    return expand_message(f, pa_apply(g, a_prime), rng)


def dpa_encrypt(a: BitVector, m: BitVector) -> BitVector:
    """XOR the expanded message with the raw (pre-hash) key."""
    return a ^ m


def dpa_recover_via_key(f: AdditivePaFunction, c: BitVector, k: BitVector) -> BitVector:
    """Recover the short message as f(c) XOR k; equals m' when c = a^m, k = f(a)."""
    if k.length != f.n_pa:
        raise ValueError(f"length mismatch: expected {f.n_pa}, got {k.length}")
    return pa_apply(f, c) ^ k


def dpa_recover_via_rawkey(f: AdditivePaFunction, c: BitVector, a: BitVector) -> BitVector:
    """Recover the short message as f(c XOR a); the other decoding route."""
    return pa_apply(f, c ^ a)


def otp(x: BitVector, pad: BitVector) -> BitVector:
    """One-time pad; same XOR as dpa_encrypt, kept separate so ledgers can
    account pad bits (single-use) apart from raw-key bits."""
    return x ^ pad


@dataclass(frozen=True)
class DelayedPaSession:
    """One delayed-PA exchange, immutable once built.

    ``create`` fixes ``m_prime`` and draws the expansion from
    ``selector_seed`` before the raw key is touched, so the message is
    independent of the key by construction.
    """

    f: AdditivePaFunction
    a: BitVector
    m_prime: BitVector
    m: BitVector
    selector_seed: int
    c: BitVector

    def __post_init__(self) -> None:
        if pa_apply(self.f, self.m) != self.m_prime:
            raise ValueError("expanded message does not hash to m_prime")
        if self.c != self.a ^ self.m:
            raise ValueError("ciphertext is not a XOR m")

    @classmethod
    def create(cls, f: AdditivePaFunction, m_prime: BitVector, a: BitVector, rng) -> "DelayedPaSession":
        selector_seed = rng.getrandbits(64)
        m = expand_message(f, m_prime, random.Random(selector_seed))
        return cls(f=f, a=a, m_prime=m_prime, m=m, selector_seed=selector_seed, c=dpa_encrypt(a, m))

    @property
    def key(self) -> BitVector:
        return pa_apply(self.f, self.a)

    def recover_via_key(self) -> BitVector:
        return dpa_recover_via_key(self.f, self.c, self.key)

    def recover_via_rawkey(self) -> BitVector:
        return dpa_recover_via_rawkey(self.f, self.c, self.a)

    def to_json(self) -> str:
        seed = self.f.matrix.toeplitz_seed
        if seed is not None:
            pa_doc = {"kind": "toeplitz", "seed": seed.to_hex(), "n_pa": self.f.n_pa, "n": self.f.n}
        else:
            pa_doc = {
                "kind": "matrix",
                "n_pa": self.f.n_pa,
                "n": self.f.n,
                "rows": [self.f.matrix.row(i).to_hex() for i in range(self.f.n_pa)],
            }
        doc = {
            "n": self.f.n,
            "n_pa": self.f.n_pa,
            "pa": pa_doc,
            "a": self.a.to_hex(),
            "m_prime": self.m_prime.to_hex(),
            "m": self.m.to_hex(),
            "c": self.c.to_hex(),
            "selector_seed": self.selector_seed,
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DelayedPaSession":
        doc = json.loads(text)
        n, n_pa = doc["n"], doc["n_pa"]
        pa_doc = doc["pa"]
        if pa_doc["kind"] == "toeplitz":
            seed = BitVector.from_hex(n + n_pa - 1, pa_doc["seed"])
            f = AdditivePaFunction.from_toeplitz_seed(seed, n_pa, n)
        else:
            rows = [BitVector.from_hex(n, h) for h in pa_doc["rows"]]
            f = AdditivePaFunction(BinaryMatrix.from_row_vectors(rows))
        return cls(
            f=f,
            a=BitVector.from_hex(n, doc["a"]),
            m_prime=BitVector.from_hex(n_pa, doc["m_prime"]),
            m=BitVector.from_hex(n, doc["m"]),
            selector_seed=doc["selector_seed"],
            c=BitVector.from_hex(n, doc["c"]),
        )
