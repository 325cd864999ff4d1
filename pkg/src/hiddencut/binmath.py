"""Exact arithmetic over Z_2^n: bitstring masks, Walsh-Hadamard transforms,
group convolution, and GF(2) linear algebra.

Conventions used throughout the package:

* A *mask* is a length-n array of {0, 1}. Bit i of a mask refers to qubit i,
  and string renderings put bit 0 leftmost, so ``"0011"`` marks qubits {2, 3}
  of a 4-qubit system.
* A *table* is a real vector of length 2**n whose entry j belongs to the mask
  obtained by writing j in binary with bit 0 as the most significant bit
  (``mask_to_index("0011") == 3``).
* The forward transform is unnormalized, ``F[f](s) = sum_x (-1)^(x.s) f(x)``;
  the inverse carries the 1/2**n prefactor.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, DimensionError

Mask = np.ndarray

MIN_SYNDROME_MAX_BITS = 20


# ---------------------------------------------------------------------------
# Mask helpers
# ---------------------------------------------------------------------------

def as_mask(bits, n: int | None = None) -> Mask:
    """Coerce a bitstring ("0011"), iterable of 0/1, or array into a mask."""
    if isinstance(bits, str):
        arr = np.array([int(c) for c in bits], dtype=np.uint8)
    else:
        arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError(f"mask must be a nonempty 1-D bit sequence, got shape {arr.shape}")
    if np.any(arr > 1):
        raise DimensionError("mask entries must be 0 or 1")
    if n is not None and arr.size != n:
        raise DimensionError(f"mask has length {arr.size}, expected {n}")
    return arr


def mask_to_string(mask) -> str:
    return "".join(str(int(b)) for b in as_mask(mask))


def mask_to_index(mask) -> int:
    """Table index of a mask (bit 0 is the most significant bit)."""
    mask = as_mask(mask)
    idx = 0
    for b in mask:
        idx = (idx << 1) | int(b)
    return idx


def index_to_mask(index: int, n: int) -> Mask:
    if not 0 <= index < (1 << n):
        raise DimensionError(f"index {index} out of range for n={n}")
    return np.array([(index >> (n - 1 - i)) & 1 for i in range(n)], dtype=np.uint8)


def all_masks(n: int) -> np.ndarray:
    """All 2**n masks stacked as a (2**n, n) array, in table-index order."""
    idx = np.arange(1 << n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def complement(mask) -> Mask:
    return (1 - as_mask(mask)).astype(np.uint8)


def weight(mask) -> int:
    return int(as_mask(mask).sum())


def dot_mod2(x, s) -> int:
    """Dot product modulo 2 of two equal-length masks."""
    x = as_mask(x)
    s = as_mask(s)
    if x.size != s.size:
        raise DimensionError(f"length mismatch: {x.size} vs {s.size}")
    return int(np.bitwise_and(x, s).sum()) & 1


def index_dot_mod2(x_index, s_index):
    """Vectorized dot_mod2 on table indices: parity of the AND of the indices."""
    both = np.bitwise_and(np.asarray(x_index, dtype=np.uint64), np.uint64(s_index))
    return (np.bitwise_count(both) & np.uint64(1)).astype(np.uint8)


# ---------------------------------------------------------------------------
# Walsh-Hadamard transforms and convolution
# ---------------------------------------------------------------------------

def _as_table(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionError(f"table must be 1-D, got shape {arr.shape}")
    size = arr.size
    if size == 0 or size & (size - 1):
        raise DimensionError(f"table length {size} is not a power of two")
    if not np.all(np.isfinite(arr)):
        raise DimensionError("table entries must be finite")
    return arr


def table_n(values) -> int:
    """Number of bits n for a table of length 2**n."""
    return int(np.asarray(values).size).bit_length() - 1


def walsh_transform(f) -> np.ndarray:
    """Unnormalized Z_2^n Fourier transform, F[f](s) = sum_x (-1)^(x.s) f(x).

    Runs the radix-2 butterfly in O(n 2^n).
    """
    out = _as_table(f).copy()
    h = 1
    while h < out.size:
        v = out.reshape(-1, 2, h)
        top = v[:, 0, :] + v[:, 1, :]
        bot = v[:, 0, :] - v[:, 1, :]
        v[:, 0, :] = top
        v[:, 1, :] = bot
        h *= 2
    return out


def inverse_walsh(fhat) -> np.ndarray:
    """Inverse transform, F^-1[fhat](x) = 2^-n sum_s (-1)^(x.s) fhat(s)."""
    out = walsh_transform(fhat)
    out /= out.size
    return out


def convolve(f, g) -> np.ndarray:
    """Group convolution (f*g)(x) = sum_x' f(x') g(x XOR x'), by direct summation."""
    f = _as_table(f)
    g = _as_table(g)
    if f.size != g.size:
        raise DimensionError(f"length mismatch: {f.size} vs {g.size}")
    idx = np.arange(f.size)
    out = np.zeros_like(f)
    for xp in range(f.size):
        if f[xp] != 0.0:
            out += f[xp] * g[np.bitwise_xor(idx, xp)]
    return out


# ---------------------------------------------------------------------------
# GF(2) linear algebra on bit-packed rows
# ---------------------------------------------------------------------------

def _pack_rows(M) -> tuple[list[int], int]:
    """Rows of a binary matrix as ints, column 0 at the most significant bit."""
    arr = np.asarray(M, dtype=np.uint8)
    if arr.ndim != 2:
        raise DimensionError(f"matrix must be 2-D, got shape {arr.shape}")
    if np.any(arr > 1):
        raise DimensionError("matrix entries must be 0 or 1")
    m, n = arr.shape
    if n == 0:
        raise DimensionError("matrix must have at least one column")
    rows = []
    for i in range(m):
        word = 0
        for b in arr[i]:
            word = (word << 1) | int(b)
        rows.append(word)
    return rows, n


def _row_echelon(rows: list[int], n: int) -> dict[int, int]:
    """Reduced row echelon form; returns {pivot column: row word}."""
    pivots: dict[int, int] = {}
    for word in rows:
        for col in range(n):
            bit = 1 << (n - 1 - col)
            if not word & bit:
                continue
            if col in pivots:
                word ^= pivots[col]
            else:
                pivots[col] = word
                break
    # back-substitute so every pivot column appears in exactly one row
    for col in sorted(pivots, reverse=True):
        bit = 1 << (n - 1 - col)
        for other in pivots:
            if other < col and pivots[other] & bit:
                pivots[other] ^= pivots[col]
    return pivots


def rank_gf2(M) -> int:
    """Rank of a binary matrix over GF(2)."""
    rows, n = _pack_rows(M)
    return len(_row_echelon(rows, n))


def nullspace_gf2(M) -> list[Mask]:
    """Basis of {s : M s = 0 over GF(2)}, via Gaussian elimination.

    An empty matrix (zero rows) is legal and yields the standard basis of the
    full space. Pass a shape (0, n) array to convey n in that case.
    """
    rows, n = _pack_rows(M)
    pivots = _row_echelon(rows, n)
    free_cols = [c for c in range(n) if c not in pivots]
    basis = []
    for free in free_cols:
        vec = np.zeros(n, dtype=np.uint8)
        vec[free] = 1
        free_bit = 1 << (n - 1 - free)
        for col, word in pivots.items():
            if word & free_bit:
                vec[col] = 1
        basis.append(vec)
    return basis


def min_syndrome_weight(M, max_n: int = MIN_SYNDROME_MAX_BITS) -> tuple[Mask, int]:
    """Nontrivial s (not all-zeros, not all-ones) minimizing the syndrome
    weight |M s|, by exhaustive search over all 2^n - 2 candidates.

    Ties break to the lexicographically smallest bitstring. NP-hard in
    general, hence the hard cap on n.
    """
    rows, n = _pack_rows(M)
    if n > max_n:
        raise CapacityError(f"n={n} exceeds the brute-force cap of {max_n} bits")
    if n < 2:
        raise DimensionError("no nontrivial candidates exist for n < 2")
    candidates = np.arange(1, (1 << n) - 1, dtype=np.uint64)
    weights = np.zeros(candidates.size, dtype=np.int64)
    for word in rows:
        parities = np.bitwise_count(np.bitwise_and(candidates, np.uint64(word))) & np.uint64(1)
        weights += parities.astype(np.int64)
    best = int(np.argmin(weights))  # first minimum = lexicographically smallest
    return index_to_mask(int(candidates[best]), n), int(weights[best])


def span_gf2(members: Iterable[Sequence[int]] | np.ndarray, n: int | None = None) -> list[Mask]:
    """All elements of the subgroup of Z_2^n generated by the given masks,
    in table-index order. With no members, returns just the zero mask."""
    members = [as_mask(m, n) for m in members]
    if members:
        n = members[0].size
    if n is None:
        raise DimensionError("n required when members is empty")
    seen = {0}
    for m in members:
        word = mask_to_index(m)
        seen |= {word ^ prev for prev in seen}
    return [index_to_mask(i, n) for i in sorted(seen)]
