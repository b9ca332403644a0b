#!/usr/bin/env python3
"""Smoke test for the benchkit_py extension module.

Builds the cdylib with cargo, loads it, and drives a small end-to-end
benchmark: synthetic collection -> run -> accuracy table -> estimators ->
comparison tests -> critical-difference diagram.
"""

import json
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def build_and_import():
    subprocess.run(
        ["cargo", "build", "-p", "benchkit-py"],
        cwd=REPO,
        check=True,
    )
    built = REPO / "target" / "debug" / "libbenchkit_py.so"
    if not built.exists():  # macOS name, just in case
        built = REPO / "target" / "debug" / "libbenchkit_py.dylib"
    stage = Path(tempfile.mkdtemp(prefix="benchkit_py_"))
    shutil.copy(built, stage / "benchkit_py.so")
    sys.path.insert(0, str(stage))
    import benchkit_py

    return benchkit_py


def approx(a, b, tol=1e-9):
    assert abs(a - b) < tol, f"{a} != {b} (tol {tol})"


def main():
    bk = build_and_import()

    # Special functions and estimators.
    approx(bk.normal_quantile(0.5), 0.0)
    approx(bk.normal_quantile(0.975), 1.959964, 1e-6)
    approx(bk.t_survival(0.0, 7), 0.5)
    e = bk.eta_hat([0.0, 0.0, 1.0, 0.0])
    approx(e.point, 0.25)
    approx(e.std_error, 0.25)
    e = bk.epsilon_star([0.2, 0.3, 0.4])
    approx(e.point, 0.3)
    approx(e.std_error, math.sqrt(0.01 / 3.0))

    # Losses and scores.
    assert bk.pointwise_loss("mmce", [0, 1, 1, 0], [0, 1, 0, 0]) == [0, 0, 1, 0]
    approx(bk.aggregate_score("f1", [1, 0, 1, 0], [1, 1, 0, 0]), 0.5)

    # Comparison tests.
    t = bk.paired_t_test([0.1, 0.2, 0.3, 0.4])
    approx(t.statistic, math.sqrt(15.0))
    approx(t.p_value, 0.030466291662170977)
    w = bk.wilcoxon_signed_rank([1.0, -0.5, 2.0])
    approx(w.statistic, 4.0)
    approx(w.effect_normalized, 2.0 / 3.0)
    s = bk.sign_test([0.1] * 8 + [0.9] * 2, [0.5] * 10)
    approx(s.p_value, 112.0 / 1024.0)
    f = bk.friedman_test([[1, 2, 3], [1, 2, 3], [2, 1, 3], [1, 3, 2]])
    approx(f.effect_raw, 4.5)
    approx(f.statistic, 27.0 / 7.0)
    assert bk.correct_pvalues([0.01, 0.04], "holm") == [0.02, 0.04]

    # Rank utilities and the diagram.
    ranks, avg, se = bk.average_ranks([[0.1, 0.2, 0.3], [0.1, 0.1, 0.3]])
    assert ranks[1] == [1.5, 1.5, 3.0]
    approx(sum(avg), 6.0)
    cd = bk.nemenyi_cd(5, 30)
    approx(cd, 1.1137, 2e-3)
    svg = bk.cd_diagram_svg([1.2, 1.5, 3.9], 0.5, ["a", "b", "c"])
    assert svg.startswith("<svg") and "cd-meta" in svg

    # End-to-end: synthetic collection, benchmark run, evaluation.
    workdir = Path(tempfile.mkdtemp(prefix="benchkit_smoke_"))
    collection = workdir / "collection"
    bk.synth_collection(
        str(collection), n_datasets=3, n_per_dataset=120, class_separation=6.0, seed=3
    )
    strategies = ["Baseline", "GaussianNB", "KNN"]
    completed, skipped, failed = bk.run_benchmark(
        str(collection), strategies=strategies, seed=11, parallelism=2
    )
    assert (completed, skipped, failed) == (9, 0, 0), (completed, skipped, failed)
    # Resume is a no-op.
    completed, skipped, failed = bk.run_benchmark(
        str(collection), strategies=strategies, seed=11
    )
    assert (completed, skipped) == (0, 9)

    acc = bk.accuracy_table(str(collection), strategies=strategies)
    mean_acc = {s: sum(v.values()) / len(v) for s, v in acc.items()}
    assert mean_acc["GaussianNB"] > mean_acc["Baseline"], mean_acc
    assert mean_acc["KNN"] > mean_acc["Baseline"], mean_acc

    paths = bk.export_reports(str(collection), strategies=strategies)
    names = {Path(p).name for p in paths}
    assert {"summary.md", "estimates.csv", "cd_diagram.svg"} <= names, names
    manifest = json.loads((collection / "reports" / "manifest.json").read_text())
    assert manifest["format_version"] == 1

    print("smoke test passed")
    print(f"  strategies: {bk.strategy_ids()}")
    print(f"  mean accuracy: { {k: round(v, 3) for k, v in mean_acc.items()} }")


if __name__ == "__main__":
    main()
