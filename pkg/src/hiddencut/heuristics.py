"""Postprocessing heuristics for weakly entangled bipartitions.

The first heuristic stops the standard nullspace elimination early, before
only the trivial all-zeros / all-ones candidates remain, and aggregates the
partitions suggested by repeated runs. The second turns a batch of circuit
samples into a classically evaluable estimator of the t-th-power subsystem
purity, 1 - 2|Ms|/m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from . import binmath, hcsim, qstate
from .errors import CapacityError, DegeneracyError, DimensionError, DomainError

EARLY_STOP_MAX_BITS = 20
DEFAULT_SHOTS_PER_RUN = 64
DEFAULT_RUNS = 50
DEFAULT_MERGE_THRESHOLD = 0.1


# ---------------------------------------------------------------------------
# Early stopping (candidate sets stored as 2^n-bit integers)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EarlyStopResult:
    """Survivor set of one early-stopped elimination run."""

    survivors: list[np.ndarray]
    uninformative: bool
    processed: int  # unique samples consumed before stopping


def _orth_word(x_index: int, size: int) -> int:
    """Bitmask over candidate indices s with x.s = 0, packed into an int."""
    keep = binmath.index_dot_mod2(np.arange(size, dtype=np.uint64), x_index) == 0
    return int.from_bytes(np.packbits(keep, bitorder="little").tobytes(), "little")


def _word_to_indices(word: int, size: int) -> np.ndarray:
    raw = word.to_bytes((size + 7) // 8, "little")
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")[:size]
    return np.flatnonzero(bits)


def _early_stop_core(
    ordered_indices: Sequence[int], n: int, orth: Callable[[int], int]
) -> tuple[int, int]:
    """Eliminate candidates sample by sample, stopping before triviality.

    Returns the survivor set as a 2^n-bit word plus the number of samples that
    actually made it into the elimination.
    """
    size = 1 << n
    full = (1 << size) - 1
    nontrivial = full ^ 1 ^ (1 << (size - 1))
    current = full
    processed = 0
    for x in ordered_indices:
        nxt = current & orth(int(x))
        if nxt & nontrivial == 0:
            break
        current = nxt
        processed += 1
    return current, processed


def _ordered_unique_indices(indices: np.ndarray) -> np.ndarray:
    """Unique sample indices by descending frequency, ties lexicographic."""
    unique, counts = np.unique(indices, return_counts=True)
    return unique[np.lexsort((unique, -counts))]


def early_stopping_run(samples: hcsim.SampleSet, max_n: int = EARLY_STOP_MAX_BITS) -> EarlyStopResult:
    """Run the early-stopped elimination on a batch of measurement samples.

    Unique samples are processed in order of descending frequency (ties broken
    lexicographically); each intersects the candidate set with {s : x.s = 0}.
    The run returns the last candidate set strictly larger than the trivial
    {all-zeros, all-ones} pair. If the set never shrank, the run is flagged
    uninformative and the full space is returned.
    """
    if samples.shots == 0:
        raise DimensionError("sample set is empty")
    n = samples.n
    if n > max_n:
        raise CapacityError(f"n={n} exceeds the explicit candidate-set cap of {max_n}")
    size = 1 << n
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    indices = (samples.samples.astype(np.int64) << shifts[None, :]).sum(axis=1)
    ordered = _ordered_unique_indices(indices)
    word, processed = _early_stop_core(ordered, n, lambda x: _orth_word(x, size))
    survivors = [binmath.index_to_mask(int(i), n) for i in _word_to_indices(word, size)]
    return EarlyStopResult(
        survivors=survivors,
        uninformative=len(survivors) == size,
        processed=processed,
    )


# ---------------------------------------------------------------------------
# Cut extraction and aggregation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CutCandidate:
    """A qubit partition suggested by a (closed) set of nullspace members."""

    nullspace_basis: tuple
    partition: tuple  # block masks, ordered by their smallest qubit index

    def block_sets(self) -> list[tuple[int, ...]]:
        return [tuple(int(q) for q in np.flatnonzero(b)) for b in self.partition]

    def label(self) -> str:
        return "|".join(",".join(str(q) for q in block) for block in self.block_sets())


def extract_cut(members, n: int | None = None) -> CutCandidate:
    """Finest partition consistent with every member being a union of blocks.

    Qubits i and j share a block iff every member has equal bits at i and j.
    Since bitwise XOR preserves column equality, the rule gives the same
    partition for a generating set as for its closure, so members need not be
    closed explicitly.
    """
    rows = [binmath.as_mask(m, n) for m in members]
    if rows:
        n = rows[0].size
    if n is None:
        raise DimensionError("n is required when members is empty")
    if not rows:
        return CutCandidate(nullspace_basis=(), partition=(np.ones(n, dtype=np.uint8),))
    matrix = np.stack(rows)
    if matrix.shape[1] != n:
        raise DimensionError("member length mismatch")

    signatures: dict[bytes, list[int]] = {}
    for qubit in range(n):
        signatures.setdefault(matrix[:, qubit].tobytes(), []).append(qubit)
    blocks = sorted(signatures.values(), key=lambda qs: qs[0])
    partition = []
    for qs in blocks:
        block = np.zeros(n, dtype=np.uint8)
        block[qs] = 1
        partition.append(block)

    basis = tuple(
        binmath.index_to_mask(binmath.mask_to_index(v), n)
        for v in _reduce_to_basis(matrix)
    )
    return CutCandidate(nullspace_basis=basis, partition=tuple(partition))


def _reduce_to_basis(matrix: np.ndarray) -> list[np.ndarray]:
    """Independent spanning subset of the rows (RREF rows, zero rows dropped)."""
    rows, n = binmath._pack_rows(matrix)
    pivots = binmath._row_echelon(rows, n)
    return [binmath.index_to_mask(pivots[c], n) for c in sorted(pivots)]


@dataclass(frozen=True)
class CutReport:
    """Aggregated outcome of k early-stopping runs."""

    candidate_frequencies: dict
    merged_partition: tuple
    confident: bool
    parameters: dict

    def merged_label(self) -> str:
        return "|".join(
            ",".join(str(int(q)) for q in np.flatnonzero(b)) for b in self.merged_partition
        )

    def to_json(self) -> dict:
        return {
            "candidate_frequencies": dict(sorted(self.candidate_frequencies.items())),
            "merged_partition": self.merged_label(),
            "confident": self.confident,
            "parameters": dict(self.parameters),
        }


def aggregate_cuts(
    candidates: Sequence[CutCandidate],
    threshold: float = DEFAULT_MERGE_THRESHOLD,
    parameters: dict | None = None,
) -> CutReport:
    """Merge the partitions observed in more than ``threshold`` of the runs.

    Merging takes the common refinement (blockwise intersection) of every
    above-threshold partition. With nothing above threshold, the report falls
    back to the single-block trivial partition and is flagged not confident.
    """
    if not candidates:
        raise DimensionError("no candidates to aggregate")
    k = len(candidates)
    n = candidates[0].partition[0].size

    freq: dict[str, float] = {}
    by_label: dict[str, CutCandidate] = {}
    for cand in candidates:
        label = cand.label()
        freq[label] = freq.get(label, 0.0) + 1.0 / k
        by_label[label] = cand
    selected = [by_label[label] for label, f in freq.items() if f > threshold]

    if not selected:
        merged = (np.ones(n, dtype=np.uint8),)
        confident = False
    else:
        signatures: dict[tuple, list[int]] = {}
        for qubit in range(n):
            sig = tuple(
                next(b for b, block in enumerate(cand.partition) if block[qubit])
                for cand in selected
            )
            signatures.setdefault(sig, []).append(qubit)
        blocks = sorted(signatures.values(), key=lambda qs: qs[0])
        merged_list = []
        for qs in blocks:
            block = np.zeros(n, dtype=np.uint8)
            block[qs] = 1
            merged_list.append(block)
        merged = tuple(merged_list)
        confident = True

    return CutReport(
        candidate_frequencies=freq,
        merged_partition=merged,
        confident=confident,
        parameters=parameters or {},
    )


def detect_cuts(
    dist: hcsim.OutcomeDistribution,
    shots: int = DEFAULT_SHOTS_PER_RUN,
    runs: int = DEFAULT_RUNS,
    threshold: float = DEFAULT_MERGE_THRESHOLD,
    seed=None,
) -> CutReport:
    """Full pipeline: k early-stopping runs, one cut per run, then aggregation."""
    base = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    candidates = []
    for child in base.spawn(runs):
        result = early_stopping_run(hcsim.sample(dist, shots, child))
        candidates.append(extract_cut(result.survivors))
    return aggregate_cuts(
        candidates,
        threshold,
        parameters={"t": dist.t, "shots": shots, "runs": runs, "threshold": threshold},
    )


# ---------------------------------------------------------------------------
# Planted-cut experiments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlantedCutResult:
    probability: float
    stderr: float
    repetitions: int
    t: int


def repetitions_for_precision(n: int, eps: float) -> int:
    """Repetition count 2^n / eps^2 that estimates prob(s) to precision eps."""
    if eps <= 0:
        raise DomainError("eps must be positive")
    return math.ceil((1 << n) / eps**2)


def find_planted_cut_probability(
    state,
    t: int,
    target,
    repetitions: int,
    shots: int = DEFAULT_SHOTS_PER_RUN,
    seed=None,
) -> PlantedCutResult:
    """Fraction of early-stopping runs whose survivor set contains the target.

    Each repetition draws ``shots`` samples from the exact p_t of the state
    (as multinomial outcome counts, which is all the frequency-ordered
    elimination consumes) and reruns the elimination.
    """
    purities = qstate.purity_table(state)
    dist = hcsim.exact_distribution(purities, t)
    n = dist.n
    size = 1 << n
    target_bit = 1 << binmath.mask_to_index(binmath.as_mask(target, n))
    orth_words = [_orth_word(x, size) for x in range(size)]
    rng = np.random.default_rng(seed)

    hits = 0
    for _ in range(repetitions):
        counts = rng.multinomial(shots, dist.probs)
        observed = np.flatnonzero(counts)
        ordered = observed[np.lexsort((observed, -counts[observed]))]
        word, _ = _early_stop_core(ordered, n, orth_words.__getitem__)
        if word & target_bit:
            hits += 1
    prob = hits / repetitions
    return PlantedCutResult(
        probability=prob,
        stderr=math.sqrt(max(prob * (1.0 - prob), 0.0) / repetitions),
        repetitions=repetitions,
        t=t,
    )


# ---------------------------------------------------------------------------
# Purity estimator from the measurement matrix
# ---------------------------------------------------------------------------

def _as_matrix(M) -> np.ndarray:
    if isinstance(M, hcsim.SampleSet):
        M = M.matrix
    arr = np.asarray(M, dtype=np.uint8)
    if arr.ndim != 2:
        raise DimensionError(f"measurement matrix must be 2-D, got shape {arr.shape}")
    return arr


def estimate_purity_t(M, s) -> float:
    """Estimator 1 - 2|Ms|/m of the t-th-power purity of the subsystem s.

    The t dependence is implicit in the distribution the rows were drawn from.
    """
    matrix = _as_matrix(M)
    m = matrix.shape[0]
    if m == 0:
        raise DegeneracyError("estimator needs at least one sample")
    s = binmath.as_mask(s, matrix.shape[1])
    syndrome_weight = int(np.sum((matrix.astype(np.int64) @ s.astype(np.int64)) % 2))
    return 1.0 + (-2.0 / m) * syndrome_weight


@dataclass(frozen=True)
class EstimatorDistribution:
    """Exact law of the estimator: an affinely transformed Binomial."""

    values: np.ndarray  # 1 - 2k/m for k = 0..m
    probs: np.ndarray
    m: int
    mu: float

    def sample(self, size: int, seed) -> np.ndarray:
        rng = np.random.default_rng(seed)
        return 1.0 - 2.0 * rng.binomial(self.m, self.mu, size=size) / self.m


def _checked_purity(p: float, atol: float = 1e-9) -> float:
    """Clip boundary round-off into [0, 1]; reject genuine violations."""
    if not -atol <= p <= 1.0 + atol:
        raise DomainError(f"purity must lie in [0, 1], got {p}")
    return min(max(p, 0.0), 1.0)


def estimator_distribution(p_true: float, t: int, m: int) -> EstimatorDistribution:
    """Exact pmf of the estimator for true purity p_true and m samples."""
    p_true = _checked_purity(p_true)
    if t < 1 or m < 1:
        raise DomainError("t and m must be positive")
    mu = 0.5 * (1.0 - p_true**t)
    k = np.arange(m + 1)
    return EstimatorDistribution(
        values=1.0 - 2.0 * k / m,
        probs=stats.binom.pmf(k, m, mu),
        m=m,
        mu=mu,
    )


@dataclass(frozen=True)
class EstimatorStats:
    mean: float
    variance: float
    snr: float
    m: int
    t: int

    def to_json(self) -> dict:
        return {
            "mean": self.mean,
            "variance": self.variance,
            "snr": self.snr,
            "m": self.m,
            "t": self.t,
        }


def estimator_stats(p_true: float, t: int, m: int) -> EstimatorStats:
    """Mean p^t, variance (1 - p^2t)/m, and SNR sqrt(m) p^t / sqrt(1 - p^2t)."""
    p_true = _checked_purity(p_true)
    if t < 1 or m < 1:
        raise DomainError("t and m must be positive")
    mean = p_true**t
    spread = 1.0 - p_true ** (2 * t)
    variance = spread / m
    snr = math.inf if spread == 0.0 else math.sqrt(m) * mean / math.sqrt(spread)
    return EstimatorStats(mean=mean, variance=variance, snr=snr, m=m, t=t)


# ---------------------------------------------------------------------------
# Two-layer network export
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TwoLayerNetwork:
    """The estimator written as a two-layer network with a mod-2 activation.

    Layer 1 is the binary measurement matrix with zero bias; layer 2 is a
    constant -2/m row with bias 1. Evaluating the network on a mask s
    reproduces estimate_purity_t(M, s) exactly.
    """

    weights1: np.ndarray  # (m, n) binary
    weights2_scale: float  # every entry of the 1 x m second layer
    bias2: float = 1.0
    activation: str = "mod2"

    @property
    def bias1(self) -> np.ndarray:
        return np.zeros(self.weights1.shape[0], dtype=np.float64)

    def evaluate(self, s) -> float:
        s = binmath.as_mask(s, self.weights1.shape[1])
        hidden = (self.weights1.astype(np.int64) @ s.astype(np.int64)) % 2
        return self.bias2 + self.weights2_scale * int(hidden.sum())

    def to_json(self) -> dict:
        m, n = self.weights1.shape
        return {
            "n": n,
            "m": m,
            "W1": [int(b) for b in self.weights1.reshape(-1)],
            "W2_scale": self.weights2_scale,
            "b2": self.bias2,
        }


def network_from_json(doc: dict) -> TwoLayerNetwork:
    m, n = int(doc["m"]), int(doc["n"])
    w1 = np.asarray(doc["W1"], dtype=np.uint8).reshape(m, n)
    return TwoLayerNetwork(weights1=w1, weights2_scale=float(doc["W2_scale"]), bias2=float(doc["b2"]))


def export_two_layer_network(M) -> TwoLayerNetwork:
    """Package a measurement matrix as the equivalent two-layer network."""
    matrix = _as_matrix(M)
    if matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise DimensionError("measurement matrix must be at least 1 x 1")
    return TwoLayerNetwork(weights1=matrix.copy(), weights2_scale=-2.0 / matrix.shape[0])
