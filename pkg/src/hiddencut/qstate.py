"""Dense statevectors and entanglement accounting.

Amplitude index convention matches :mod:`hiddencut.binmath`: basis state j of
an n-qubit register is the bitstring of j with qubit 0 as the most significant
bit, so ``state.reshape([2] * n)`` puts qubit i on axis i.
"""

from __future__ import annotations

import json
from functools import reduce
from pathlib import Path

import numpy as np

from . import binmath
from .errors import (
    CapacityError,
    ConsistencyError,
    DegeneracyError,
    DimensionError,
    DomainError,
)

PURITY_TABLE_MAX_QUBITS = 12
NORM_ATOL = 1e-10


def n_qubits(state) -> int:
    size = np.asarray(state).size
    if size < 2 or size & (size - 1):
        raise DimensionError(f"state length {size} is not a power of two >= 2")
    return size.bit_length() - 1


def _as_state(state, normalized: bool = False) -> np.ndarray:
    arr = np.asarray(state, dtype=np.complex128)
    if arr.ndim != 1:
        raise DimensionError(f"state must be 1-D, got shape {arr.shape}")
    n_qubits(arr)
    if normalized:
        norm2 = float(np.vdot(arr, arr).real)
        if abs(norm2 - 1.0) > NORM_ATOL:
            raise DimensionError(f"state norm^2 = {norm2} deviates from 1 beyond {NORM_ATOL}")
    return arr


def haar_random_state(n: int, seed) -> np.ndarray:
    """Haar-random pure state on n qubits.

    Samples i.i.d. standard complex Gaussian amplitudes and normalizes, which
    induces the unitarily invariant measure on pure states. Deterministic for
    a fixed seed.
    """
    if n < 1:
        raise DimensionError("need at least one qubit")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((2, 1 << n))
    vec = z[0] + 1j * z[1]
    return vec / np.linalg.norm(vec)


def tensor_product(parts) -> np.ndarray:
    """Kronecker product of states; the first part occupies the lowest qubit indices."""
    parts = [_as_state(p) for p in parts]
    if not parts:
        raise DimensionError("tensor_product requires at least one factor")
    return reduce(np.kron, parts)


def mix_states(a, b, eps: float) -> np.ndarray:
    """Normalized superposition sqrt(1-eps)*a + sqrt(eps)*b of two pure states."""
    a = _as_state(a)
    b = _as_state(b)
    if a.size != b.size:
        raise DimensionError(f"dimension mismatch: {a.size} vs {b.size}")
    if not 0.0 <= eps <= 1.0:
        raise DomainError(f"eps must lie in [0, 1], got {eps}")
    out = np.sqrt(1.0 - eps) * a + np.sqrt(eps) * b
    norm = np.linalg.norm(out)
    if norm < 1e-12:
        raise DegeneracyError("mixture has zero norm (states cancel)")
    return out / norm


def basis_state(bits) -> np.ndarray:
    """Computational basis state |bits> for a bitstring such as "01"."""
    mask = binmath.as_mask(bits)
    vec = np.zeros(1 << mask.size, dtype=np.complex128)
    vec[binmath.mask_to_index(mask)] = 1.0
    return vec


def apply_controlled_rx(state, control: int, target: int, phi: float) -> np.ndarray:
    """Apply |0><0| (x) I + |1><1| (x) Rx(phi), with Rx(phi) = exp(-i phi X / 2)."""
    state = _as_state(state)
    n = n_qubits(state)
    if not (0 <= control < n and 0 <= target < n):
        raise DimensionError(f"qubit index out of range for n={n}")
    if control == target:
        raise DimensionError("control and target must be distinct")
    c, s = np.cos(phi / 2.0), np.sin(phi / 2.0)
    rx = np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    arr = state.reshape([2] * n).copy()
    sel = [slice(None)] * n
    sel[control] = 1
    block = arr[tuple(sel)]
    t_axis = target - (1 if control < target else 0)
    block = np.moveaxis(np.tensordot(rx, block, axes=([1], [t_axis])), 0, t_axis)
    arr[tuple(sel)] = block
    return arr.reshape(-1)


def reduced_density(state, mask) -> np.ndarray:
    """Partial trace of |state><state| onto the qubits marked by mask."""
    state = _as_state(state, normalized=True)
    n = n_qubits(state)
    mask = binmath.as_mask(mask, n)
    kept = [i for i in range(n) if mask[i]]
    if not kept:
        return np.array([[1.0 + 0.0j]])
    traced = [i for i in range(n) if not mask[i]]
    a = state.reshape([2] * n).transpose(kept + traced).reshape(1 << len(kept), -1)
    return a @ a.conj().T


def purity(state, mask) -> float:
    """Subsystem purity Tr(rho_s^2) of the qubits marked by mask."""
    state = _as_state(state, normalized=True)
    n = n_qubits(state)
    mask = binmath.as_mask(mask, n)
    kept = [i for i in range(n) if mask[i]]
    traced = [i for i in range(n) if not mask[i]]
    a = state.reshape([2] * n).transpose(kept + traced).reshape(1 << len(kept), -1)
    # Tr((A A^dag)^2) = Tr((A^dag A)^2); form the Gram matrix on the smaller side
    g = a @ a.conj().T if len(kept) <= len(traced) else a.conj().T @ a
    return float(np.vdot(g, g).real)


def purity_table(state, max_qubits: int = PURITY_TABLE_MAX_QUBITS) -> np.ndarray:
    """All 2**n subsystem purities P(s), as a table indexed like binmath tables.

    The trivial entries P(0^n) and P(1^n) are pinned to exactly 1, and the
    complement symmetry of pure states is verified before returning.
    """
    state = _as_state(state, normalized=True)
    n = n_qubits(state)
    if n > max_qubits:
        raise CapacityError(f"purity table for n={n} exceeds the cap of {max_qubits} qubits")
    size = 1 << n
    table = np.empty(size, dtype=np.float64)
    table[0] = 1.0
    table[size - 1] = 1.0
    for idx in range(1, size - 1):
        table[idx] = purity(state, binmath.index_to_mask(idx, n))
    mirror = table[(size - 1) ^ np.arange(size)]
    drift = float(np.max(np.abs(table - mirror)))
    if drift > 1e-10:
        raise ConsistencyError(f"complement symmetry violated by {drift}")
    return table


def validate_purity_table(table, atol: float = 1e-10) -> np.ndarray:
    """Check the defining invariants of a purity table and return it as float64.

    Trivial entries must equal 1, every entry must lie in [2^-|s|, 1], and the
    table must be symmetric under mask complementation.
    """
    arr = np.asarray(table, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 2 or arr.size & (arr.size - 1):
        raise DimensionError(f"purity table must have power-of-two length, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("purity table entries must be finite")
    size = arr.size
    if abs(arr[0] - 1.0) > atol or abs(arr[size - 1] - 1.0) > atol:
        raise DomainError("trivial purities P(0^n) and P(1^n) must equal 1")
    idx = np.arange(size, dtype=np.uint64)
    lower = 2.0 ** (-np.bitwise_count(idx).astype(np.float64))
    if np.any(arr > 1.0 + atol) or np.any(arr < lower - atol):
        raise DomainError("purity entries must lie in [2^-|s|, 1]")
    if np.max(np.abs(arr - arr[(size - 1) ^ np.arange(size)])) > atol:
        raise DomainError("purity table must be complement-symmetric")
    return arr


def apply_swap_mask(pair_state, mask) -> np.ndarray:
    """Swap qubit i of copy 1 with qubit i of copy 2 wherever mask has a 1.

    The pair state lives on 2n qubits, copy 1 on qubits 0..n-1 and copy 2 on
    qubits n..2n-1. Applying the same mask twice is the identity.
    """
    pair_state = _as_state(pair_state)
    total = n_qubits(pair_state)
    if total % 2:
        raise DimensionError("pair state must have an even number of qubits")
    n = total // 2
    mask = binmath.as_mask(mask, n)
    perm = list(range(total))
    for i in range(n):
        if mask[i]:
            perm[i], perm[n + i] = perm[n + i], perm[i]
    return pair_state.reshape([2] * total).transpose(perm).reshape(-1).copy()


# ---------------------------------------------------------------------------
# Import/export: JSON list of (re, im) pairs, or raw little-endian float64
# pairs, both in increasing amplitude-index order.
# ---------------------------------------------------------------------------

def state_to_json(state) -> dict:
    state = _as_state(state)
    return {
        "n": n_qubits(state),
        "amplitudes": [[float(a.real), float(a.imag)] for a in state],
    }


def state_from_json(doc: dict) -> np.ndarray:
    amps = np.array([complex(re, im) for re, im in doc["amplitudes"]], dtype=np.complex128)
    if amps.size != 1 << int(doc["n"]):
        raise DimensionError("amplitude count does not match the declared qubit count")
    return _as_state(amps, normalized=True)


def save_state(path, state) -> None:
    """Write a state to ``*.json`` (JSON pairs) or anything else (raw binary)."""
    path = Path(path)
    state = _as_state(state)
    if path.suffix == ".json":
        path.write_text(json.dumps(state_to_json(state)))
    else:
        interleaved = np.empty(2 * state.size, dtype="<f8")
        interleaved[0::2] = state.real
        interleaved[1::2] = state.imag
        path.write_bytes(interleaved.tobytes())


def load_state(path) -> np.ndarray:
    path = Path(path)
    if path.suffix == ".json":
        return state_from_json(json.loads(path.read_text()))
    raw = np.frombuffer(path.read_bytes(), dtype="<f8")
    return _as_state(raw[0::2] + 1j * raw[1::2], normalized=True)
