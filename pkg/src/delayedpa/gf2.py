"""Bit-packed linear algebra over GF(2).

Vectors and matrix rows are stored as arbitrary-precision Python integers
with LSB-first packing: bit i lives at word i // 64, slot i % 64 when the
integer is viewed as 64-bit words.  XOR of equal-length vectors, AND plus
popcount dot products, and whole-row eliminations are then single big-int
operations, which keeps desk-scale exhaustive checks and 10^4-bit protocol
keys fast without any native extension.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

__all__ = [
    "BitVector",
    "BinaryMatrix",
    "RowReduction",
    "matvec",
    "matmul",
    "toeplitz_from_seed",
    "row_reduce",
    "kernel_basis",
    "sample_preimage",
]


def _parity(x: int) -> int:
    return x.bit_count() & 1


def _reverse_bits(value: int, width: int) -> int:
    out = 0
    for _ in range(width):
        out = (out << 1) | (value & 1)
        value >>= 1
    return out


@dataclass(frozen=True)
class BitVector:
    """GF(2) vector of ``length`` bits; bit i is ``(bits >> i) & 1``.

    Bits beyond ``length`` are always zero (canonical form), so equality and
    hashing work directly on the packed integer.
    """

    length: int
    bits: int = 0

    def __post_init__(self) -> None:
        if self.length < 0:
            raise ValueError("length must be nonnegative")
        if self.bits < 0 or self.bits.bit_length() > self.length:
            raise ValueError("set bits beyond declared length")

    @classmethod
    def zeros(cls, length: int) -> "BitVector":
        return cls(length, 0)

    @classmethod
    def from01(cls, text: str) -> "BitVector":
        """Parse a 0/1 string read left to right; character i becomes bit i."""
        value = 0
        for i, ch in enumerate(text):
            if ch == "1":
                value |= 1 << i
            elif ch != "0":
                raise ValueError(f"invalid bit character {ch!r}")
        return cls(len(text), value)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitVector":
        value = 0
        n = 0
        for b in bits:
            if b:
                value |= 1 << n
            n += 1
        return cls(n, value)

    @classmethod
    def random(cls, length: int, rng) -> "BitVector":
        if length == 0:
            return cls(0, 0)
        return cls(length, rng.getrandbits(length))

    @classmethod
    def from_hex(cls, length: int, digits: str) -> "BitVector":
        """Inverse of :meth:`to_hex`; nibble i//4 carries bit i, LSB first."""
        n_nibbles = (length + 3) // 4
        if len(digits) != n_nibbles:
            raise ValueError("hex digit count does not match length")
        value = 0
        for j, ch in enumerate(digits):
            value |= int(ch, 16) << (4 * j)
        if value.bit_length() > length:
            raise ValueError("set bits beyond declared length")
        return cls(length, value)

    def to_hex(self) -> str:
        n_nibbles = (self.length + 3) // 4
        return "".join(f"{(self.bits >> (4 * j)) & 0xF:x}" for j in range(n_nibbles))

    def to01(self) -> str:
        return "".join("1" if self[i] else "0" for i in range(self.length))

    def to_text(self) -> str:
        return f"bits={self.length}\n{self.to_hex()}\n"

    @classmethod
    def from_text(cls, text: str) -> "BitVector":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("bits="):
            raise ValueError("missing bits= header")
        length = int(lines[0][len("bits="):])
        digits = lines[1].strip() if len(lines) > 1 else ""
        return cls.from_hex(length, digits)

    def to_bytes(self) -> bytes:
        return self.bits.to_bytes((self.length + 7) // 8, "little")

    def cut(self, start: int, stop: int) -> "BitVector":
        """Bits [start, stop) as a new vector."""
        if not 0 <= start <= stop <= self.length:
            raise ValueError("cut range out of bounds")
        width = stop - start
        return BitVector(width, (self.bits >> start) & ((1 << width) - 1))

    def weight(self) -> int:
        return self.bits.bit_count()

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError("bit index out of range")
        return (self.bits >> i) & 1

    def __xor__(self, other: "BitVector") -> "BitVector":
        if self.length != other.length:
            raise ValueError(
                f"length mismatch: {self.length} vs {other.length}"
            )
        return BitVector(self.length, self.bits ^ other.bits)

    def __repr__(self) -> str:
        if self.length <= 32:
            return f"BitVector('{self.to01()}')"
        return f"BitVector(length={self.length}, hex='{self.to_hex()}')"


@dataclass(frozen=True)
class BinaryMatrix:
    """Dense GF(2) matrix, one packed integer per row.

    Bit j of ``row_words[i]`` is entry (i, j).  ``toeplitz_seed`` is kept for
    serialization when the matrix was built by :func:`toeplitz_from_seed`; it
    does not take part in equality.
    """

    rows: int
    cols: int
    row_words: tuple[int, ...]
    toeplitz_seed: BitVector | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative dimension")
        if len(self.row_words) != self.rows:
            raise ValueError("row count does not match row_words")
        for w in self.row_words:
            if w < 0 or w.bit_length() > self.cols:
                raise ValueError("row has set bits beyond cols")

    @classmethod
    def identity(cls, n: int) -> "BinaryMatrix":
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BinaryMatrix":
        return cls(rows, cols, (0,) * rows)

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]) -> "BinaryMatrix":
        words = []
        cols = None
        for r in rows:
            bits = list(r)
            if cols is None:
                cols = len(bits)
            elif len(bits) != cols:
                raise ValueError("ragged rows")
            w = 0
            for j, b in enumerate(bits):
                if b:
                    w |= 1 << j
            words.append(w)
        if cols is None:
            raise ValueError("matrix needs at least one row")
        return cls(len(words), cols, tuple(words))

    @classmethod
    def from_row_vectors(cls, rows: Iterable[BitVector]) -> "BinaryMatrix":
        rows = list(rows)
        if not rows:
            raise ValueError("matrix needs at least one row")
        cols = rows[0].length
        if any(r.length != cols for r in rows):
            raise ValueError("ragged rows")
        return cls(len(rows), cols, tuple(r.bits for r in rows))

    @classmethod
    def random(cls, rows: int, cols: int, rng) -> "BinaryMatrix":
        return cls(
            rows, cols,
            tuple(rng.getrandbits(cols) if cols else 0 for _ in range(rows)),
        )

    def entry(self, i: int, j: int) -> int:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError("entry index out of range")
        return (self.row_words[i] >> j) & 1

    def row(self, i: int) -> BitVector:
        return BitVector(self.cols, self.row_words[i])

    def to_lists(self) -> list[list[int]]:
        return [[self.entry(i, j) for j in range(self.cols)] for i in range(self.rows)]

    def to_text(self) -> str:
        lines = [f"rows={self.rows} cols={self.cols}"]
        lines.extend(self.row(i).to01() for i in range(self.rows))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BinaryMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = lines[0].split()
        if len(header) != 2 or not header[0].startswith("rows=") or not header[1].startswith("cols="):
            raise ValueError("bad matrix header")
        rows = int(header[0][len("rows="):])
        cols = int(header[1][len("cols="):])
        if len(lines) != rows + 1:
            raise ValueError("row count does not match header")
        words = []
        for ln in lines[1:]:
            if len(ln) != cols:
                raise ValueError("row width does not match header")
            words.append(BitVector.from01(ln).bits)
        return cls(rows, cols, tuple(words))

    def rank(self) -> int:
        return len(row_reduce(self).pivot_cols)


@dataclass(frozen=True)
class RowReduction:
    """Result of Gaussian elimination: ``row_ops @ original == upper``.

    ``upper`` is in reduced row-echelon form with pivots at ``pivot_cols``;
    ``row_ops`` is the invertible product of the elementary row operations
    (XORs and swaps) applied in order.
    """

    upper: BinaryMatrix
    row_ops: BinaryMatrix
    pivot_cols: tuple[int, ...]
    free_cols: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.pivot_cols)


def matvec(a: BinaryMatrix, v: BitVector) -> BitVector:
    """Matrix-vector product over GF(2): result[i] = XOR_j a[i][j] AND v[j]."""
    if v.length != a.cols:
        raise ValueError(f"dimension mismatch: matrix cols {a.cols}, vector length {v.length}")
    out = 0
    for i, row in enumerate(a.row_words):
        if _parity(row & v.bits):
            out |= 1 << i
    return BitVector(a.rows, out)


def matmul(a: BinaryMatrix, b: BinaryMatrix) -> BinaryMatrix:
    if a.cols != b.rows:
        raise ValueError(f"dimension mismatch: {a.cols} vs {b.rows}")
    words = []
    for ra in a.row_words:
        acc = 0
        w = ra
        while w:
            lsb = w & -w
            acc ^= b.row_words[lsb.bit_length() - 1]
            w ^= lsb
        words.append(acc)
    return BinaryMatrix(a.rows, b.cols, tuple(words))


def toeplitz_from_seed(seed: BitVector, n_pa: int, n: int) -> BinaryMatrix:
    """Toeplitz matrix with entry (i, j) = seed[i - j + n - 1].

    The first row is seed[n-1] .. seed[0] laid out over columns 0 .. n-1 and
    the first column walks seed[n-1] .. seed[n+n_pa-2], so the matrix is
    constant along every diagonal and fully determined by n + n_pa - 1 bits.
    """
    if n_pa < 1 or n < 1:
        raise ValueError("dimensions must be positive")
    if seed.length != n + n_pa - 1:
        raise ValueError(
            f"seed length {seed.length} does not match n + n_pa - 1 = {n + n_pa - 1}"
        )
    # Entry (i, j) = rev[(n_pa - 1 - i) + j] where rev is the bit-reversed
    # seed, so each row is a single shift+mask window.
    rev = _reverse_bits(seed.bits, seed.length)
    mask = (1 << n) - 1
    words = tuple(((rev >> (n_pa - 1 - i)) & mask) for i in range(n_pa))
    return BinaryMatrix(n_pa, n, words, toeplitz_seed=seed)


def row_reduce(a: BinaryMatrix) -> RowReduction:
    """Reduced row-echelon form with the row-operation product recorded.

    Handles any matrix; rank deficiency shows up as zero rows in ``upper``
    and a shorter ``pivot_cols``, never as an error.
    """
    work = list(a.row_words)
    ops = [1 << i for i in range(a.rows)]
    pivot_cols: list[int] = []
    r = 0
    for c in range(a.cols):
        if r == a.rows:
            break
        mask = 1 << c
        pivot = next((i for i in range(r, a.rows) if work[i] & mask), None)
        if pivot is None:
            continue
        if pivot != r:
            work[r], work[pivot] = work[pivot], work[r]
            ops[r], ops[pivot] = ops[pivot], ops[r]
        for i in range(a.rows):
            if i != r and work[i] & mask:
                work[i] ^= work[r]
                ops[i] ^= ops[r]
        pivot_cols.append(c)
        r += 1
    pivots = set(pivot_cols)
    free_cols = tuple(c for c in range(a.cols) if c not in pivots)
    return RowReduction(
        upper=BinaryMatrix(a.rows, a.cols, tuple(work)),
        row_ops=BinaryMatrix(a.rows, a.rows, tuple(ops)),
        pivot_cols=tuple(pivot_cols),
        free_cols=free_cols,
    )


def kernel_basis(a: BinaryMatrix) -> list[BitVector]:
    """Basis of {x : Ax = 0}; kernel size is 2**(cols - rank)."""
    red = row_reduce(a)
    basis = []
    for fc in red.free_cols:
        bits = 1 << fc
        for r, pc in enumerate(red.pivot_cols):
            if (red.upper.row_words[r] >> fc) & 1:
                bits |= 1 << pc
        basis.append(BitVector(a.cols, bits))
    return basis


def sample_preimage(
    a: BinaryMatrix,
    y: BitVector,
    rng,
    *,
    reduction: RowReduction | None = None,
) -> BitVector:
    """Uniform sample from {x : Ax = y} for a matrix with independent rows.

    Row-reduces once (or reuses a caller-cached ``reduction``), draws the
    free-column bits uniformly from ``rng``, and back-substitutes the pivot
    columns; every preimage element comes out with probability
    2**-(cols - rows).
    """
    if y.length != a.rows:
        raise ValueError(f"dimension mismatch: matrix rows {a.rows}, vector length {y.length}")
    red = reduction if reduction is not None else row_reduce(a)
    if red.rank < a.rows:
        raise ValueError("rows not independent")
    z = matvec(red.row_ops, y)
    x = 0
    n_free = len(red.free_cols)
    if n_free:
        draw = rng.getrandbits(n_free)
        for idx, fc in enumerate(red.free_cols):
            if (draw >> idx) & 1:
                x |= 1 << fc
    # Reduced echelon form: each pivot row touches its pivot plus free
    # columns only, so substitution needs no particular order.
    for r, pc in enumerate(red.pivot_cols):
        if z[r] ^ _parity(red.upper.row_words[r] & x):
            x |= 1 << pc
    return BitVector(a.cols, x)
