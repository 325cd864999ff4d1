"""Output distributions of StateHSP circuits over arbitrary finite abelian groups.

A group Z_N1 x ... x Z_Nm is described by its moduli; elements are coordinate
tuples, linearly indexed in mixed radix with the first modulus most
significant. The quantum side enters only through the overlap function
g -> <Psi| U(g) |Psi>, so the module works on synthetic overlap tables.
All transforms are direct O(|G|^2) summations; the order cap keeps that cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import CapacityError, ConsistencyError, DimensionError, DomainError

GROUP_ORDER_CAP = 4096
IMAG_RESIDUE_ATOL = 1e-9
SUM_DRIFT_ATOL = 1e-9


@dataclass(frozen=True)
class AbelianGroupSpec:
    """Finite abelian group Z_N1 x ... x Z_Nm given by its moduli."""

    moduli: tuple

    def __post_init__(self):
        moduli = tuple(int(N) for N in self.moduli)
        if not moduli:
            raise DimensionError("need at least one modulus")
        if any(N < 2 for N in moduli):
            raise DomainError(f"every modulus must be >= 2, got {moduli}")
        order = 1
        for N in moduli:
            order *= N
        if order > GROUP_ORDER_CAP:
            raise CapacityError(f"group order {order} exceeds the cap of {GROUP_ORDER_CAP}")
        object.__setattr__(self, "moduli", moduli)

    @property
    def order(self) -> int:
        out = 1
        for N in self.moduli:
            out *= N
        return out

    @cached_property
    def _radix_weights(self) -> np.ndarray:
        weights = np.ones(len(self.moduli), dtype=np.int64)
        for i in range(len(self.moduli) - 2, -1, -1):
            weights[i] = weights[i + 1] * self.moduli[i + 1]
        return weights

    @cached_property
    def coords_table(self) -> np.ndarray:
        """Coordinates of every element, shape (|G|, m), in index order."""
        idx = np.arange(self.order, dtype=np.int64)
        mods = np.asarray(self.moduli, dtype=np.int64)
        return (idx[:, None] // self._radix_weights[None, :]) % mods[None, :]

    def coords(self, index: int) -> tuple:
        if not 0 <= index < self.order:
            raise DomainError(f"index {index} out of range for group of order {self.order}")
        return tuple(int(c) for c in self.coords_table[index])

    def index(self, coords) -> int:
        coords = self._check_coords(coords)
        return int(np.dot(coords, self._radix_weights))

    def _check_coords(self, coords) -> np.ndarray:
        arr = np.asarray(coords, dtype=np.int64)
        if arr.shape != (len(self.moduli),):
            raise DimensionError(f"expected {len(self.moduli)} coordinates, got shape {arr.shape}")
        mods = np.asarray(self.moduli, dtype=np.int64)
        if np.any(arr < 0) or np.any(arr >= mods):
            raise DomainError(f"coordinates {tuple(arr)} out of range for moduli {self.moduli}")
        return arr

    @cached_property
    def inverse_permutation(self) -> np.ndarray:
        """Permutation sending the index of g to the index of g^-1."""
        mods = np.asarray(self.moduli, dtype=np.int64)
        inv_coords = (-self.coords_table) % mods[None, :]
        return inv_coords @ self._radix_weights

    def subtract_permutation(self, index: int) -> np.ndarray:
        """Permutation sending the index of k to the index of k - g, for fixed g."""
        mods = np.asarray(self.moduli, dtype=np.int64)
        diff = (self.coords_table - self.coords_table[index][None, :]) % mods[None, :]
        return diff @ self._radix_weights


def binary_group(n: int) -> AbelianGroupSpec:
    """Z_2^n with indexing that matches the binmath table convention."""
    return AbelianGroupSpec(moduli=(2,) * n)


def fourier_entry(k, g, group: AbelianGroupSpec) -> complex:
    """Matrix element F_kg = |G|^(-1/2) prod_i exp(-2 pi i k_i g_i / N_i)."""
    kc = group._check_coords(k)
    gc = group._check_coords(g)
    mods = np.asarray(group.moduli, dtype=np.float64)
    phase = -2.0j * np.pi * np.sum(kc * gc / mods)
    return complex(np.exp(phase) / np.sqrt(group.order))


def _as_group_table(values, group: AbelianGroupSpec) -> np.ndarray:
    arr = np.asarray(values)
    if arr.shape != (group.order,):
        raise DimensionError(f"table shape {arr.shape} does not match group order {group.order}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("table entries must be finite")
    return arr


def validate_overlap(values, group: AbelianGroupSpec, atol: float = 1e-10) -> np.ndarray:
    """Check the overlap-function invariants and return the table as complex."""
    arr = _as_group_table(values, group).astype(np.complex128)
    if abs(arr[0] - 1.0) > atol:
        raise DomainError("overlap at the identity must equal 1")
    if np.any(np.abs(arr) > 1.0 + atol):
        raise DomainError("overlap magnitudes must not exceed 1")
    mismatch = float(np.max(np.abs(arr[group.inverse_permutation] - np.conj(arr))))
    if mismatch > atol:
        raise DomainError(f"overlap is not conjugate-symmetric (deviation {mismatch})")
    return arr


def _direct_transform(values: np.ndarray, group: AbelianGroupSpec) -> np.ndarray:
    """Unnormalized sum_g exp(-2 pi i sum_i k_i g_i / N_i) f(g), one k at a time."""
    scaled = group.coords_table / np.asarray(group.moduli, dtype=np.float64)[None, :]
    out = np.empty(group.order, dtype=np.complex128)
    for k in range(group.order):
        phases = np.exp(-2.0j * np.pi * (scaled @ group.coords_table[k]))
        out[k] = np.dot(phases, values)
    return out


def distribution_from_overlap(overlap, t: int, group: AbelianGroupSpec) -> np.ndarray:
    """p_t(k) = |G|^(-1) sum_g exp(-2 pi i k.g) <Psi|U(g)|Psi>^t, as a real table."""
    if t < 1:
        raise DomainError("t must be a positive integer")
    arr = validate_overlap(overlap, group)
    raw = _direct_transform(arr**t, group) / group.order
    imag = float(np.max(np.abs(raw.imag)))
    if imag > IMAG_RESIDUE_ATOL:
        raise ConsistencyError(f"imaginary residue {imag} exceeds {IMAG_RESIDUE_ATOL}")
    probs = raw.real
    low = float(probs.min())
    if low < -IMAG_RESIDUE_ATOL:
        raise ConsistencyError(
            f"negative probability {low}: overlap is not a valid character mixture"
        )
    probs = np.where(probs < 0.0, 0.0, probs)
    total = float(probs.sum())
    if abs(total - 1.0) > SUM_DRIFT_ATOL:
        raise ConsistencyError(f"probabilities sum to {total}, expected 1")
    return probs / total


def group_convolve(f, h, group: AbelianGroupSpec) -> np.ndarray:
    """(f * h)(k) = sum_k' f(k') h(k k'^-1), by direct summation."""
    f = _as_group_table(f, group)
    h = _as_group_table(h, group)
    out = np.zeros(group.order, dtype=np.result_type(f, h))
    for kp in range(group.order):
        if f[kp] != 0:
            out += f[kp] * h[group.subtract_permutation(kp)]
    return out


def random_character_mixture_overlap(
    group: AbelianGroupSpec, seed, n_components: int | None = None
) -> np.ndarray:
    """Synthetic overlap h(g) = sum_k w_k exp(+2 pi i k.g) with w a distribution.

    Such mixtures are exactly the overlaps with a nonnegative Fourier spectrum
    (p_1 = w), so the resulting p_t is guaranteed to be a valid distribution.
    """
    rng = np.random.default_rng(seed)
    if n_components is None:
        n_components = min(group.order, 8)
    if not 1 <= n_components <= group.order:
        raise DomainError(f"n_components must lie in [1, {group.order}]")
    support = rng.choice(group.order, size=n_components, replace=False)
    weights = np.zeros(group.order)
    weights[support] = rng.random(n_components) + 1e-3
    weights /= weights.sum()
    # the kernel is symmetric in k and g, so the +2 pi i sum is the conjugate
    # of the forward transform of the (real) weight vector
    return np.conj(_direct_transform(weights, group))


def table_to_json(values, group: AbelianGroupSpec) -> dict:
    arr = _as_group_table(values, group).astype(np.complex128)
    return {
        "moduli": list(group.moduli),
        "values": [[float(v.real), float(v.imag)] for v in arr],
    }


def table_from_json(doc: dict) -> tuple[np.ndarray, AbelianGroupSpec]:
    group = AbelianGroupSpec(moduli=tuple(doc["moduli"]))
    values = np.array([complex(re, im) for re, im in doc["values"]], dtype=np.complex128)
    return _as_group_table(values, group), group
