"""Hidden-cut circuit output distributions.

Two routes to the same distribution over measurement outcomes x:

* the analytic one, ``p_t = inverse_walsh(P**t)``, which makes large copy
  counts t free, and
* a literal gate-by-gate simulation of the circuit (group register plus 2t
  state copies), kept as a small-scale ground-truth oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import binmath, qstate
from .errors import CapacityError, ConsistencyError, DomainError

SUPPORT_ATOL = 1e-9
NEGATIVE_CLAMP_ATOL = 1e-12
NEGATIVE_ERROR_ATOL = 1e-9
DIRECT_SIM_MAX_QUBITS = 14

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / np.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """Probability table over n-bit outcomes of the t-pair hidden cut circuit."""

    probs: np.ndarray
    n: int
    t: int

    def support(self, atol: float = SUPPORT_ATOL) -> np.ndarray:
        """Indices of outcomes with probability above atol."""
        return np.flatnonzero(self.probs > atol)

    def entropy_bits(self) -> float:
        pos = self.probs[self.probs > 0.0]
        return float(-np.sum(pos * np.log2(pos)))

    def to_json(self) -> dict:
        return {"n": self.n, "t": self.t, "probs": [float(p) for p in self.probs]}

    def to_csv_rows(self) -> list[tuple[str, float]]:
        return [
            (binmath.mask_to_string(binmath.index_to_mask(i, self.n)), float(p))
            for i, p in enumerate(self.probs)
        ]


def distribution_from_json(doc: dict) -> OutcomeDistribution:
    return OutcomeDistribution(
        probs=np.asarray(doc["probs"], dtype=np.float64), n=int(doc["n"]), t=int(doc["t"])
    )


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Ordered measurement samples; rows double as the measurement matrix M."""

    samples: np.ndarray  # shape (m, n), uint8
    seed: object = None

    @property
    def shots(self) -> int:
        return self.samples.shape[0]

    @property
    def n(self) -> int:
        return self.samples.shape[1]

    @property
    def matrix(self) -> np.ndarray:
        return self.samples


def _finalize_probs(raw: np.ndarray, n: int, t: int) -> OutcomeDistribution:
    low = float(raw.min())
    if low < -NEGATIVE_ERROR_ATOL:
        raise ConsistencyError(
            f"probability {low} below -{NEGATIVE_ERROR_ATOL}: input is not a valid purity table"
        )
    probs = np.where(raw < 0.0, 0.0, raw)
    total = float(probs.sum())
    if abs(total - 1.0) > NEGATIVE_CLAMP_ATOL:
        probs = probs / total
    return OutcomeDistribution(probs=probs, n=n, t=t)


def _check_t(t) -> int:
    if not isinstance(t, (int, np.integer)) or t < 1:
        raise DomainError(f"t must be a positive integer, got {t!r}")
    return int(t)


def exact_distribution(purities, t) -> OutcomeDistribution:
    """p_t as the inverse Walsh transform of the t-th power of the purity table."""
    t = _check_t(t)
    table = qstate.validate_purity_table(purities)
    raw = binmath.inverse_walsh(table**t)
    return _finalize_probs(raw, binmath.table_n(table), t)


def distribution_by_convolution(p1: OutcomeDistribution, t) -> OutcomeDistribution:
    """t-fold self-convolution of p_1, via repeated squaring in the Walsh domain."""
    t = _check_t(t)
    fhat = binmath.walsh_transform(p1.probs)
    acc = np.ones_like(fhat)
    power = t
    while power:
        if power & 1:
            acc = acc * fhat
        fhat = fhat * fhat
        power >>= 1
    raw = binmath.inverse_walsh(acc)
    return _finalize_probs(raw, p1.n, t)


# ---------------------------------------------------------------------------
# Direct circuit simulation (ground-truth oracle)
# ---------------------------------------------------------------------------

def _apply_single(vec: np.ndarray, mat: np.ndarray, qubit: int, total: int) -> np.ndarray:
    arr = vec.reshape([2] * total)
    arr = np.moveaxis(np.tensordot(mat, arr, axes=([1], [qubit])), 0, qubit)
    return arr.reshape(-1)


def _apply_fredkin(vec: np.ndarray, control: int, a: int, b: int, total: int) -> np.ndarray:
    arr = vec.reshape([2] * total).copy()

    def sel(va, vb):
        idx = [slice(None)] * total
        idx[control], idx[a], idx[b] = 1, va, vb
        return tuple(idx)

    arr[sel(0, 1)], arr[sel(1, 0)] = arr[sel(1, 0)].copy(), arr[sel(0, 1)].copy()
    return arr.reshape(-1)


def simulate_circuit_direct(state, t, max_total_qubits: int = DIRECT_SIM_MAX_QUBITS) -> OutcomeDistribution:
    """Exact marginal on the group register of the t-pair hidden cut circuit.

    Builds the full (2t+1)n-qubit register, applies Hadamards on the group
    register, the controlled SWAP (one Fredkin per group qubit per copy pair),
    Hadamards again, and marginalizes. Ground truth for exact_distribution.
    """
    t = _check_t(t)
    state = qstate._as_state(state, normalized=True)
    n = qstate.n_qubits(state)
    total = n * (2 * t + 1)
    if total > max_total_qubits:
        raise CapacityError(
            f"direct simulation needs {total} qubits, over the cap of {max_total_qubits}"
        )
    group = np.zeros(1 << n, dtype=np.complex128)
    group[0] = 1.0
    vec = group
    for _ in range(2 * t):
        vec = np.kron(vec, state)

    for i in range(n):
        vec = _apply_single(vec, _HADAMARD, i, total)
    for i in range(n):
        for j in range(t):
            copy_a = n * (1 + 2 * j) + i
            copy_b = n * (2 + 2 * j) + i
            vec = _apply_fredkin(vec, i, copy_a, copy_b, total)
    for i in range(n):
        vec = _apply_single(vec, _HADAMARD, i, total)

    marginal = np.abs(vec.reshape(1 << n, -1)) ** 2
    return _finalize_probs(marginal.sum(axis=1), n, t)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def sample(dist: OutcomeDistribution, shots: int, seed) -> SampleSet:
    """shots i.i.d. outcomes from the distribution, as stacked masks."""
    if shots < 1:
        raise DomainError("shots must be positive")
    rng = np.random.default_rng(seed)
    outcomes = rng.choice(dist.probs.size, size=shots, p=dist.probs)
    shifts = np.arange(dist.n - 1, -1, -1)
    samples = ((outcomes[:, None] >> shifts[None, :]) & 1).astype(np.uint8)
    return SampleSet(samples=samples, seed=seed)


def swap_test_bernoulli(purity_value: float, t, shots: int, seed) -> SampleSet:
    """Swap-test outcome bits: Bernoulli draws with mean (1 - P^t) / 2."""
    t = _check_t(t)
    if not -1e-9 <= purity_value <= 1.0 + 1e-9:
        raise DomainError(f"purity must lie in [0, 1], got {purity_value}")
    purity_value = min(max(purity_value, 0.0), 1.0)
    if shots < 1:
        raise DomainError("shots must be positive")
    rng = np.random.default_rng(seed)
    mu = 0.5 * (1.0 - purity_value**t)
    bits = (rng.random(shots) < mu).astype(np.uint8)
    return SampleSet(samples=bits[:, None], seed=seed)


def all_zeros_probability(purities, t) -> float:
    """p_t(0^n) = 2^-n sum_s P^t(s), the chance of the uninformative sample."""
    t = _check_t(t)
    table = qstate.validate_purity_table(purities)
    return float(np.mean(table**t))
