"""Seeded, configuration-driven experiment pipelines with plot-ready artifacts.

Every artifact embeds its fully resolved configuration and master seed, and
all randomness fans out from the master seed through SeedSequence children
keyed by (seed, task indices), so reruns are byte-identical and tasks may be
reordered or parallelized without changing results.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import abelianhsp, binmath, hcsim, heuristics, qstate
from .errors import DomainError

logger = logging.getLogger("hiddencut")

PI = math.pi


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved parameters for one experiment run."""

    experiment: str = ""
    seed: int = 0
    out: str = "artifacts"
    state: dict = field(default_factory=lambda: {"kind": "haar", "n": 4})
    t_values: tuple = (1, 3, 100)
    shots: int = heuristics.DEFAULT_SHOTS_PER_RUN  # samples per early-stopping run (l)
    runs: int = heuristics.DEFAULT_RUNS  # early-stopping runs per report (k)
    repetitions: int = 0  # planted-cut repetitions; 0 means use the eps recipe
    eps: float = 0.1
    threshold: float = heuristics.DEFAULT_MERGE_THRESHOLD
    seeds: int = 6  # state seeds per planted-sweep cell
    n_values: tuple = (6,)
    phi_values: tuple = (0.1, 1.0, PI)
    masks: tuple = ()  # estimator-demo masks; empty means automatic
    m_values: tuple = (50, 200)
    trials: int = 2000  # Monte Carlo trials per estimator-demo row
    moduli: tuple = (3, 2)
    n_overlaps: int = 20

    def __post_init__(self):
        for name in ("shots", "runs", "seeds", "trials", "n_overlaps"):
            if getattr(self, name) < 1:
                raise DomainError(f"config field {name!r} must be positive")
        if self.repetitions < 0:
            raise DomainError("repetitions must be nonnegative")
        if not 0.0 < self.eps <= 1.0:
            raise DomainError("eps must lie in (0, 1]")

    def to_json(self) -> dict:
        doc = asdict(self)
        for key, value in doc.items():
            if isinstance(value, tuple):
                doc[key] = list(value)
        return doc


def config_from_dict(doc: dict) -> ExperimentConfig:
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(doc) - known
    if unknown:
        raise DomainError(f"unknown config keys: {sorted(unknown)}")
    doc = dict(doc)
    for key in ("t_values", "n_values", "phi_values", "masks", "m_values", "moduli"):
        if key in doc and isinstance(doc[key], list):
            doc[key] = tuple(doc[key])
    return ExperimentConfig(**doc)


def apply_overrides(doc: dict, overrides) -> dict:
    """Apply KEY=VALUE overrides (dotted keys descend into nested dicts)."""
    doc = json.loads(json.dumps(doc))  # deep copy
    for item in overrides or ():
        if "=" not in item:
            raise DomainError(f"override {item!r} is not KEY=VALUE")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        target = doc
        parts = key.split(".")
        for part in parts[:-1]:
            target = target.setdefault(part, {})
        target[parts[-1]] = value
    return doc


# ---------------------------------------------------------------------------
# Seeding and state recipes
# ---------------------------------------------------------------------------

def child_seed(master: int, *task_index: int) -> np.random.SeedSequence:
    """Deterministic child seed keyed by (master seed, task indices)."""
    return np.random.SeedSequence([int(master), *[int(i) for i in task_index]])


def build_state(recipe: dict, seed) -> np.ndarray:
    """Construct a state vector from a recipe dict.

    Kinds: ``haar`` (n), ``basis`` (bits), ``separable`` (factors: qubit
    counts), ``mixed`` (base recipe, eps), ``planted`` (factors, phi, and
    optional control/target; defaults wire qubit 0 to qubit n-1).
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    kind = recipe.get("kind")
    if kind == "haar":
        return qstate.haar_random_state(int(recipe["n"]), ss)
    if kind == "basis":
        return qstate.basis_state(recipe["bits"])
    if kind == "separable":
        factors = [int(f) for f in recipe["factors"]]
        children = ss.spawn(len(factors))
        return qstate.tensor_product(
            [qstate.haar_random_state(f, c) for f, c in zip(factors, children)]
        )
    if kind == "mixed":
        base_child, haar_child = ss.spawn(2)
        base = build_state(recipe["base"], base_child)
        noise = qstate.haar_random_state(qstate.n_qubits(base), haar_child)
        return qstate.mix_states(base, noise, float(recipe["eps"]))
    if kind == "planted":
        factors = [int(f) for f in recipe["factors"]]
        n = sum(factors)
        children = ss.spawn(len(factors))
        state = qstate.tensor_product(
            [qstate.haar_random_state(f, c) for f, c in zip(factors, children)]
        )
        control = int(recipe.get("control", 0))
        target = int(recipe.get("target", n - 1))
        return qstate.apply_controlled_rx(state, control, target, float(recipe["phi"]))
    raise DomainError(f"unknown state recipe kind {kind!r}")


def planted_target_mask(factors) -> np.ndarray:
    """Mask of the last register of a planted-cut state (e.g. 000111)."""
    factors = [int(f) for f in factors]
    n = sum(factors)
    mask = np.zeros(n, dtype=np.uint8)
    mask[n - factors[-1]:] = 1
    return mask


# ---------------------------------------------------------------------------
# Artifact writing
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path: Path, config: ExperimentConfig, fieldnames, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# config: {json.dumps(config.to_json(), sort_keys=True)}\n")
        fh.write(f"# seed: {config.seed}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    logger.info("wrote %s", path)
    return path


def write_json(path: Path, config: ExperimentConfig, payload: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"config": config.to_json(), "seed": config.seed, **payload}
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    logger.info("wrote %s", path)
    return path


# ---------------------------------------------------------------------------
# Experiment runners
# ---------------------------------------------------------------------------

def run_purity_scan(config: ExperimentConfig) -> Path:
    """One row per mask: P(s) and its requested powers, with cut annotations."""
    state = build_state(config.state, child_seed(config.seed, 0))
    purities = qstate.purity_table(state)
    n = qstate.n_qubits(state)
    planted = None
    if config.state.get("kind") == "planted":
        planted = binmath.mask_to_index(planted_target_mask(config.state["factors"]))

    fieldnames = ["bitstring", "purity"] + [f"purity_t{t}" for t in config.t_values]
    fieldnames.append("is_planted_cut")
    rows = []
    for idx in range(purities.size):
        mask = binmath.index_to_mask(idx, n)
        row = [binmath.mask_to_string(mask), purities[idx]]
        row += [purities[idx] ** t for t in config.t_values]
        is_planted = planted is not None and idx in (planted, (purities.size - 1) ^ planted)
        row.append(is_planted)
        rows.append(row)
    return write_csv(Path(config.out) / "purity_scan.csv", config, fieldnames, rows)


def run_distribution_scan(config: ExperimentConfig) -> Path:
    """One row per outcome x: p_t(x) for each requested t."""
    state = build_state(config.state, child_seed(config.seed, 0))
    purities = qstate.purity_table(state)
    n = qstate.n_qubits(state)
    dists = [hcsim.exact_distribution(purities, t) for t in config.t_values]
    for t, dist in zip(config.t_values, dists):
        drift = abs(dist.probs[0] - hcsim.all_zeros_probability(purities, t))
        if drift > 1e-12:
            raise DomainError(f"all-zeros identity violated by {drift} at t={t}")

    fieldnames = ["bitstring"] + [f"p_t{t}" for t in config.t_values]
    rows = []
    for idx in range(1 << n):
        mask = binmath.index_to_mask(idx, n)
        rows.append([binmath.mask_to_string(mask)] + [d.probs[idx] for d in dists])
    return write_csv(Path(config.out) / "dist_scan.csv", config, fieldnames, rows)


def run_planted_cut_sweep(config: ExperimentConfig) -> Path:
    """Planted-cut success probability per (n, phi, t, seed), plus seed statistics."""
    rows = []
    for ni, n in enumerate(config.n_values):
        factors = [n // 2, n - n // 2]
        target = planted_target_mask(factors)
        reps = config.repetitions or heuristics.repetitions_for_precision(n, config.eps)
        for pi_, phi in enumerate(config.phi_values):
            for ti, t in enumerate(config.t_values):
                per_seed = []
                for si in range(config.seeds):
                    state = build_state(
                        {"kind": "planted", "factors": factors, "phi": phi},
                        child_seed(config.seed, 1, ni, pi_, si),
                    )
                    result = heuristics.find_planted_cut_probability(
                        state,
                        t,
                        target,
                        reps,
                        shots=config.shots,
                        seed=child_seed(config.seed, 2, ni, pi_, ti, si),
                    )
                    per_seed.append(result)
                mean = float(np.mean([r.probability for r in per_seed]))
                std = float(np.std([r.probability for r in per_seed]))
                for si, result in enumerate(per_seed):
                    rows.append(
                        [n, phi, t, si, result.probability, result.stderr,
                         result.repetitions, mean, std]
                    )
    fieldnames = ["n", "phi", "t", "seed_index", "probability", "stderr",
                  "repetitions", "mean_over_seeds", "std_over_seeds"]
    return write_csv(Path(config.out) / "planted_sweep.csv", config, fieldnames, rows)


def run_estimator_demo(config: ExperimentConfig) -> Path:
    """Estimator rows: true value, one estimate, analytic and Monte Carlo statistics."""
    state = build_state(config.state, child_seed(config.seed, 0))
    purities = qstate.purity_table(state)
    n = qstate.n_qubits(state)

    if config.masks:
        masks = [binmath.as_mask(m, n) for m in config.masks]
    elif config.state.get("kind") == "planted":
        masks = [planted_target_mask(config.state["factors"])]
    else:
        masks = [binmath.index_to_mask((1 << n) - (1 << (n // 2)), n)]

    t_values = [t for t in config.t_values if t <= 16] or [1]
    rows = []
    task = 0
    for mask in masks:
        idx = binmath.mask_to_index(mask)
        p_true = heuristics._checked_purity(float(purities[idx]))
        for t in t_values:
            dist = hcsim.exact_distribution(purities, t)
            parity = binmath.index_dot_mod2(
                np.arange(1 << n, dtype=np.uint64), idx
            ).astype(np.float64)
            for m in config.m_values:
                task += 1
                rng = np.random.default_rng(child_seed(config.seed, 3, task))
                stats_row = heuristics.estimator_stats(p_true, t, m)

                one_shot = hcsim.sample(dist, m, child_seed(config.seed, 4, task))
                estimate = heuristics.estimate_purity_t(one_shot, mask)

                outcomes = rng.choice(dist.probs.size, size=(config.trials, m), p=dist.probs)
                mc = 1.0 - 2.0 * parity[outcomes].mean(axis=1)
                swap_draws = rng.binomial(m, 0.5 * (1.0 - p_true**t), size=config.trials)
                swap = 1.0 - 2.0 * swap_draws / m

                rows.append([
                    binmath.mask_to_string(mask), t, m, p_true**t, estimate,
                    stats_row.mean, stats_row.variance,
                    "inf" if math.isinf(stats_row.snr) else stats_row.snr,
                    float(mc.mean()), float(mc.var(ddof=1)),
                    float(swap.mean()), float(swap.var(ddof=1)),
                ])
    fieldnames = ["mask", "t", "m", "p_true_t", "estimate", "analytic_mean",
                  "analytic_variance", "snr", "mc_mean", "mc_variance",
                  "swap_mean", "swap_variance"]
    path = write_csv(Path(config.out) / "estimator_demo.csv", config, fieldnames, rows)
    # resource accounting: one batch of m circuit shots serves any number N of
    # estimates, while the swap-test route spends m shots per estimate
    accounting = [
        [m, n_estimates, m, m * n_estimates]
        for m in config.m_values
        for n_estimates in (1, 10, 100, 1000)
    ]
    write_csv(
        Path(config.out) / "shot_accounting.csv",
        config,
        ["m", "n_estimates", "hidden_cut_shots", "swap_test_shots"],
        accounting,
    )
    return path


def run_abelian_demo(config: ExperimentConfig) -> Path:
    """Check the convolution identity over a general abelian group, as JSON."""
    group = abelianhsp.AbelianGroupSpec(moduli=tuple(config.moduli))
    t = max(2, min(config.t_values, default=2))
    max_dev = 0.0
    for i in range(config.n_overlaps):
        overlap = abelianhsp.random_character_mixture_overlap(
            group, child_seed(config.seed, 5, i)
        )
        p1 = abelianhsp.distribution_from_overlap(overlap, 1, group)
        pt = abelianhsp.distribution_from_overlap(overlap, t, group)
        conv = p1
        for _ in range(t - 1):
            conv = abelianhsp.group_convolve(conv, p1, group)
        max_dev = max(max_dev, float(np.max(np.abs(conv - pt))))
    payload = {
        "moduli": list(group.moduli),
        "t": int(t),
        "n_overlaps": config.n_overlaps,
        "max_convolution_deviation": max_dev,
        "passed": max_dev < 1e-10,
    }
    return write_json(Path(config.out) / "abelian_demo.json", config, payload)


RUNNERS = {
    "purity-scan": run_purity_scan,
    "dist-scan": run_distribution_scan,
    "planted-sweep": run_planted_cut_sweep,
    "estimator-demo": run_estimator_demo,
    "abelian-demo": run_abelian_demo,
}
