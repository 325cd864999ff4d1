"""Tests for the experiment runners and the command-line interface."""

import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from hiddencut import binmath, cli, experiments, hcsim, qstate
from hiddencut.errors import DomainError
from hiddencut.experiments import ExperimentConfig, build_state, child_seed, config_from_dict


def read_csv(path):
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    header, data = rows[0], rows[1:]
    return header, [dict(zip(header, row)) for row in data]


def read_comments(path):
    with open(path) as fh:
        return [ln for ln in fh if ln.startswith("#")]


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------

def test_config_rejects_unknown_keys():
    with pytest.raises(DomainError):
        config_from_dict({"experiment": "dist-scan", "bogus": 1})


def test_config_rejects_bad_counts():
    with pytest.raises(DomainError):
        config_from_dict({"shots": 0})


def test_overrides_parse_json_and_dotted_paths():
    doc = {"state": {"kind": "haar", "n": 4}, "shots": 64}
    out = experiments.apply_overrides(doc, ["shots=128", "state.n=6", "out=somewhere"])
    assert out["shots"] == 128
    assert out["state"]["n"] == 6
    assert out["out"] == "somewhere"
    with pytest.raises(DomainError):
        experiments.apply_overrides(doc, ["shots128"])


def test_child_seed_is_deterministic_and_distinct():
    a = np.random.default_rng(child_seed(7, 1, 2)).random(4)
    b = np.random.default_rng(child_seed(7, 1, 2)).random(4)
    c = np.random.default_rng(child_seed(7, 1, 3)).random(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


# ---------------------------------------------------------------------------
# state recipes
# ---------------------------------------------------------------------------

def test_build_state_kinds():
    assert qstate.n_qubits(build_state({"kind": "haar", "n": 3}, 0)) == 3
    np.testing.assert_array_equal(
        build_state({"kind": "basis", "bits": "010"}, 0), qstate.basis_state("010")
    )
    sep = build_state({"kind": "separable", "factors": [2, 2]}, 1)
    table = qstate.purity_table(sep)
    assert table[binmath.mask_to_index("0011")] == pytest.approx(1.0, abs=1e-12)
    mixed = build_state({"kind": "mixed", "base": {"kind": "haar", "n": 3}, "eps": 0.1}, 2)
    assert qstate.n_qubits(mixed) == 3
    planted = build_state({"kind": "planted", "factors": [2, 2], "phi": 0.3}, 3)
    assert qstate.n_qubits(planted) == 4
    with pytest.raises(DomainError):
        build_state({"kind": "nope"}, 0)


def test_planted_target_mask():
    assert binmath.mask_to_string(experiments.planted_target_mask([3, 3])) == "000111"
    assert binmath.mask_to_string(experiments.planted_target_mask([2, 3])) == "00111"


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------

def test_purity_scan_separable(tmp_path):
    config = ExperimentConfig(
        experiment="purity-scan",
        seed=3,
        out=str(tmp_path),
        state={"kind": "separable", "factors": [2, 2]},
        t_values=(1, 5),
    )
    path = experiments.run_purity_scan(config)
    header, rows = read_csv(path)
    assert header[:2] == ["bitstring", "purity"]
    ones = {r["bitstring"] for r in rows if float(r["purity"]) > 1 - 1e-9}
    assert ones == {"0000", "0011", "1100", "1111"}
    for r in rows:
        assert float(r["purity_t5"]) <= float(r["purity_t1"]) + 1e-15


def test_purity_scan_planted_annotation(tmp_path):
    config = ExperimentConfig(
        experiment="purity-scan",
        seed=1,
        out=str(tmp_path),
        state={"kind": "planted", "factors": [3, 3], "phi": 0.1},
        t_values=(1,),
    )
    _, rows = read_csv(experiments.run_purity_scan(config))
    flagged = {r["bitstring"] for r in rows if r["is_planted_cut"] == "True"}
    assert flagged == {"000111", "111000"}
    planted_purity = next(float(r["purity"]) for r in rows if r["bitstring"] == "000111")
    others = [
        float(r["purity"])
        for r in rows
        if r["is_planted_cut"] == "False" and r["bitstring"] not in ("000000", "111111")
    ]
    assert planted_purity > max(others)


def test_distribution_scan_haar_uniformizes(tmp_path):
    config = ExperimentConfig(
        experiment="dist-scan",
        seed=2,
        out=str(tmp_path),
        state={"kind": "haar", "n": 4},
        t_values=(1, 100),
    )
    _, rows = read_csv(experiments.run_distribution_scan(config))
    even = [r for r in rows if r["bitstring"].count("1") % 2 == 0]
    odd = [r for r in rows if r["bitstring"].count("1") % 2 == 1]
    assert all(float(r["p_t100"]) < 1e-9 for r in odd)
    np.testing.assert_allclose([float(r["p_t100"]) for r in even], 1 / 8, atol=1e-3)
    for col in ("p_t1", "p_t100"):
        assert sum(float(r[col]) for r in rows) == pytest.approx(1.0, abs=1e-9)


def test_distribution_scan_mixed_keeps_secondary_peaks(tmp_path):
    config = ExperimentConfig(
        experiment="dist-scan",
        seed=4,
        out=str(tmp_path),
        state={
            "kind": "mixed",
            "base": {"kind": "separable", "factors": [2, 2]},
            "eps": 0.1,
        },
        t_values=(5, 300),
    )
    _, rows = read_csv(experiments.run_distribution_scan(config))
    by_bits = {r["bitstring"]: r for r in rows}
    # at t=5 the weak-cut peaks at 0011/1100 still stand over the noise floor
    for bits in ("0011", "1100"):
        assert float(by_bits[bits]["p_t5"]) > 1e-9
    junk = [float(r["p_t5"]) for r in rows
            if r["bitstring"] not in ("0000", "0011", "1100", "1111")
            and r["bitstring"].count("1") % 2 == 0]
    assert min(float(by_bits[b]["p_t5"]) for b in ("0011", "1100")) > max(junk)


def test_distribution_scan_zero_entry_matches_identity(tmp_path):
    config = ExperimentConfig(
        experiment="dist-scan",
        seed=9,
        out=str(tmp_path),
        state={"kind": "haar", "n": 3},
        t_values=(2, 9),
    )
    _, rows = read_csv(experiments.run_distribution_scan(config))
    table = qstate.purity_table(build_state(config.state, child_seed(9, 0)))
    zero_row = next(r for r in rows if r["bitstring"] == "000")
    for t in (2, 9):
        assert float(zero_row[f"p_t{t}"]) == pytest.approx(
            hcsim.all_zeros_probability(table, t), abs=1e-12
        )


def test_planted_sweep_weak_cut_beats_destroyed_cut(tmp_path):
    config = ExperimentConfig(
        experiment="planted-sweep",
        seed=5,
        out=str(tmp_path),
        n_values=(4,),
        phi_values=(0.1, math.pi),
        t_values=(2, 4),
        seeds=2,
        repetitions=80,
        shots=32,
    )
    _, rows = read_csv(experiments.run_planted_cut_sweep(config))
    assert len(rows) == 2 * 2 * 2  # phi x t x seeds
    def mean_for(phi, t):
        row = next(r for r in rows if float(r["phi"]) == phi and int(r["t"]) == t)
        return float(row["mean_over_seeds"])
    best_weak = max(mean_for(0.1, 2), mean_for(0.1, 4))
    assert best_weak > mean_for(math.pi, 2) - 1e-12
    assert all(int(r["repetitions"]) == 80 for r in rows)


def test_estimator_demo_exact_cut_and_variance(tmp_path):
    config = ExperimentConfig(
        experiment="estimator-demo",
        seed=6,
        out=str(tmp_path),
        state={"kind": "planted", "factors": [2, 2], "phi": 0.0},
        masks=("0011", "0101"),
        t_values=(1, 3),
        m_values=(200,),
        trials=4000,
    )
    _, rows = read_csv(experiments.run_estimator_demo(config))
    for r in rows:
        if r["mask"] == "0011":  # exact cut: zero syndrome at any shot count
            assert float(r["estimate"]) == 1.0
            assert r["snr"] == "inf"
        else:
            analytic = float(r["analytic_variance"])
            assert float(r["mc_variance"]) == pytest.approx(analytic, rel=0.10)
            assert float(r["swap_variance"]) == pytest.approx(analytic, rel=0.10)
            assert float(r["snr"]) > 0.0


def test_abelian_demo(tmp_path):
    config = ExperimentConfig(
        experiment="abelian-demo",
        seed=7,
        out=str(tmp_path),
        moduli=(3, 2),
        t_values=(3,),
        n_overlaps=5,
    )
    path = experiments.run_abelian_demo(config)
    doc = json.loads(path.read_text())
    assert doc["passed"] is True
    assert doc["max_convolution_deviation"] < 1e-10
    assert doc["config"]["moduli"] == [3, 2]


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def test_cli_runs_dist_scan(tmp_path, capsys):
    code = cli.main([
        "dist-scan",
        "--seed", "11",
        "--out", str(tmp_path),
        "--override", 'state={"kind": "haar", "n": 3}',
        "--override", "t_values=[1, 4]",
    ])
    assert code == 0
    out_path = capsys.readouterr().out.strip()
    assert out_path.endswith("dist_scan.csv")
    header, rows = read_csv(out_path)
    assert header == ["bitstring", "p_t1", "p_t4"]
    assert len(rows) == 8


def test_cli_reads_config_file(tmp_path):
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({
        "state": {"kind": "separable", "factors": [2, 2]},
        "t_values": [1],
        "out": str(tmp_path / "a"),
        "seed": 3,
    }))
    assert cli.main(["purity-scan", "--config", str(config_path)]) == 0
    assert (tmp_path / "a" / "purity_scan.csv").exists()


def test_cli_reports_structured_error(tmp_path, capsys):
    code = cli.main([
        "dist-scan", "--out", str(tmp_path), "--override", "shots=-3",
    ])
    assert code == 2
    err = capsys.readouterr().err
    report = json.loads(err)
    assert report["error"] == "DomainError"


def test_cli_module_entrypoint(tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "hiddencut.cli", "abelian-demo",
         "--seed", "1", "--out", str(tmp_path),
         "--override", "n_overlaps=2", "--override", "moduli=[3,2]"],
        capture_output=True, text=True,
    )
    assert result.returncode == 0, result.stderr
    assert (tmp_path / "abelian_demo.json").exists()


def test_reruns_are_byte_identical(tmp_path):
    for sub in ("one", "two"):
        config = ExperimentConfig(
            experiment="planted-sweep",
            seed=13,
            out=str(tmp_path / sub),
            n_values=(4,),
            phi_values=(0.1,),
            t_values=(2,),
            seeds=2,
            repetitions=40,
            shots=32,
        )
        experiments.run_planted_cut_sweep(config)
    one = (tmp_path / "one" / "planted_sweep.csv").read_bytes()
    two = (tmp_path / "two" / "planted_sweep.csv").read_bytes()
    # the embedded config mentions the output directory, which differs; the
    # data payload must match byte for byte
    assert one.split(b"\n", 2)[2] == two.split(b"\n", 2)[2]


def test_artifact_embeds_config_and_seed(tmp_path):
    config = ExperimentConfig(
        experiment="dist-scan", seed=21, out=str(tmp_path),
        state={"kind": "haar", "n": 2}, t_values=(1,),
    )
    path = experiments.run_distribution_scan(config)
    comments = read_comments(path)
    assert comments[0].startswith("# config: ")
    embedded = json.loads(comments[0][len("# config: "):])
    assert embedded["seed"] == 21
    assert embedded["state"] == {"kind": "haar", "n": 2}
    assert comments[1].strip() == "# seed: 21"
