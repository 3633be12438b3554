"""Acceptance battery: one test per shipped criterion, pinned tolerances.

The default bundled configuration is executed twice through the CLI in a
session fixture; criteria assert on the report rows, the per-section
TIMING lines, and byte identity of the reports.  The kernel criterion
runs directly against the adaptive-quadrature oracle.  Every test prints
one CRITERION line; statistical rows are seed-pinned (see README).
"""

import csv
import os
import subprocess
import sys
import time

import pytest

from gfft.config import default_config

from .oracles import kernel_oracle_worst, random_kernel_cases

Z_LIMIT = 3.0


def _run_suite(out_dir: str) -> dict:
    env = dict(os.environ)
    env.pop("GFFT_SEED", None)
    t0 = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "gfft", "run", "--out", out_dir, "--no-figures"],
        capture_output=True,
        text=True,
        env=env,
    )
    wall = time.perf_counter() - t0
    assert proc.returncode == 0, f"suite run failed:\n{proc.stdout}\n{proc.stderr}"
    timings = {}
    for line in proc.stdout.splitlines():
        if line.startswith("TIMING "):
            _, name, value = line.split()
            timings[name] = float(value)
    run = {"out": out_dir, "timings": timings, "wall": wall}
    for name in ("rotation", "transform", "algebra"):
        with open(os.path.join(out_dir, f"{name}.csv"), newline="") as fh:
            run[name] = list(csv.DictReader(fh))
    return run


@pytest.fixture(scope="session")
def runs(tmp_path_factory):
    return [_run_suite(str(tmp_path_factory.mktemp(f"acceptance{i}"))) for i in (1, 2)]


def _ok(label: str, detail: str) -> None:
    print(f"CRITERION {label}: PASS ({detail})")


def test_c01_rotation_pairs_two_routes_agree(runs):
    cfg = default_config()
    funcs = cfg["rotation"]["functionals"]
    assert len(funcs) == 6 and len(cfg["rotation"]["pairs"]) == 4
    assert sum("pgp" in f["f"] for f in funcs) == 3
    assert sum("bbox" in f["f"] for f in funcs) == 3
    assert (cfg["n"], cfg["N"], cfg["T"]) == (100000, 1024, 1.0)

    rows = [r for r in runs[0]["rotation"] if r["case"].startswith("pair_")]
    assert len(rows) == 24
    worst = max(float(r["zscore"]) for r in rows)
    failed = [r["case"] for r in rows if r["pass"] != "True"]
    assert not failed and worst <= Z_LIMIT, f"rows over 3 sigma: {failed} (worst z = {worst:.2f})"
    t = runs[0]["timings"]["rotation/pairs"]
    assert t <= 120.0, f"rotation pairs took {t:.1f}s > 120s"
    _ok("1 rotation pairs", f"24 rows, worst z = {worst:.2f}, {t:.1f}s")


def test_c02_rotation_sequences_three_estimators_agree(runs):
    seqs = default_config()["rotation"]["sequences"]
    assert sorted(len(s["H"]) for s in seqs) == [2, 3]

    rows = [r for r in runs[0]["rotation"] if not r["case"].startswith("pair_")]
    assert len(rows) == 36  # 6 functionals x 2 sequences x 3 estimator pairings
    for suffix in (":e12", ":e13", ":e23"):
        assert sum(r["case"].endswith(suffix) for r in rows) == 12
    worst = max(float(r["zscore"]) for r in rows)
    failed = [r["case"] for r in rows if r["pass"] != "True"]
    assert not failed and worst <= Z_LIMIT, f"rows over 3 sigma: {failed} (worst z = {worst:.2f})"
    t = runs[0]["timings"]["rotation/seq"]
    assert t <= 120.0, f"sequence rotation took {t:.1f}s > 120s"
    _ok("2 sequence rotation", f"36 rows, worst z = {worst:.2f}, {t:.1f}s")


def test_c03_kernel_closed_form_vs_damped_quadrature():
    t0 = time.perf_counter()
    cases = random_kernel_cases(10, seed=20240816, deg_max=4)
    assert len(cases) == 10 and max(f.degree for f, _, _ in cases) <= 4
    worst = kernel_oracle_worst(cases, eps_list=(1e-2, 1e-3), r_points=21)
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-6, f"worst |closed - quad| = {worst:.3e} > 1e-6"
    assert elapsed <= 30.0, f"kernel oracle took {elapsed:.1f}s > 30s"
    _ok("3 kernel oracle", f"10 cases x 21 points x 2 eps, worst {worst:.2e}, {elapsed:.1f}s")


def test_c04_inverse_roundtrip(runs):
    assert default_config()["transform"]["inverse_cases"] == 50
    rows = [r for r in runs[0]["transform"] if r["case"].startswith("inverse:")]
    assert len(rows) == 50
    worst = max(float(r["residual"]) for r in rows)
    assert all(r["pass"] == "True" for r in rows) and worst <= 1e-9, f"worst roundtrip {worst:.3e}"
    assert all(float(r["tolerance"]) == 1e-9 for r in rows)
    t = runs[0]["timings"]["transform/inverse"]
    assert t <= 10.0, f"inverse suite took {t:.1f}s > 10s"
    _ok("4 inverse", f"50 roundtrips, worst {worst:.2e}, {t:.2f}s")


def test_c05_composition_including_sequence_and_wedge(runs):
    assert default_config()["transform"]["compose_cases"] == 25
    rows = [r for r in runs[0]["transform"] if r["case"].startswith("compose")]
    cases = {r["case"] for r in rows}
    assert sum(c.startswith("compose:") for c in cases) == 25
    assert {"compose_seq3", "compose_wedge"} <= cases
    worst = max(float(r["residual"]) for r in rows)
    assert all(r["pass"] == "True" for r in rows) and worst <= 1e-8, f"worst residual {worst:.3e}"
    t = runs[0]["timings"]["transform/compose"]
    assert t <= 10.0, f"composition suite took {t:.1f}s > 10s"
    _ok("5 composition", f"27 rows, worst {worst:.2e}, {t:.2f}s")


def test_c06_plancherel_isometry_and_indicator(runs):
    assert default_config()["transform"]["plancherel_cases"] == 20
    rows = [r for r in runs[0]["transform"] if r["case"].startswith("plancherel:")]
    assert len(rows) == 20
    worst = max(float(r["residual"]) for r in rows)
    assert all(r["pass"] == "True" for r in rows) and worst <= 1e-8, f"worst |ratio-1| {worst:.3e}"

    ind = {r["check"]: r for r in runs[0]["transform"] if r["case"] == "plancherel_indicator"}
    ratio_err = float(ind["norm_ratio_err"]["residual"])
    assert ind["norm_ratio_err"]["pass"] == "True" and ratio_err <= 1e-2
    assert ind["l2_cauchy_diff"]["pass"] == "True"
    t = runs[0]["timings"]["transform/plancherel"] + runs[0]["timings"]["transform/quadrature"]
    assert t <= 60.0, f"isometry checks took {t:.1f}s > 60s"
    _ok("6 plancherel", f"20 closed-form rows worst {worst:.2e}, indicator {ratio_err:.2e}, {t:.1f}s")


def test_c07_mc_continuation_matches_closed_form(runs):
    mc_cfg = default_config()["transform"]["mc"]
    assert len(mc_cfg["functionals"]) == 3 and mc_cfg["lambdas"] == [0.5, 1.0, 2.0]
    assert mc_cfg["n"] == 100000
    rows = [r for r in runs[0]["transform"] if r["case"].startswith("mc:")]
    assert len(rows) == 9
    worst = max(float(r["residual"]) for r in rows)
    failed = [r["case"] for r in rows if r["pass"] != "True"]
    assert not failed and worst <= Z_LIMIT, f"rows over 3 sigma: {failed} (worst z = {worst:.2f})"
    t = runs[0]["timings"]["transform/mc"]
    assert t <= 60.0, f"MC continuation took {t:.1f}s > 60s"
    _ok("7 MC continuation", f"3 functionals x 3 lambdas, worst z = {worst:.2f}, {t:.1f}s")


def test_c08_q_group_laws_exact(runs):
    assert default_config()["algebra"]["q_sample"] == 1000
    rows = runs[0]["algebra"]
    laws = {"identity": 1000, "inverse": 1000, "commutativity": 1000, "associativity": 1000,
            "q_compose_2_2": 1, "q_inverse_identity": 1}
    for law, count in laws.items():
        got = [r for r in rows if r["law"] == law]
        assert len(got) == count, (law, len(got))
        assert all(r["pass"] == "True" and float(r["residual"]) == 0.0 for r in got), f"{law} not exact"
    t = runs[0]["timings"]["algebra/qgroup"]
    assert t <= 1.0, f"q-group laws took {t:.2f}s > 1s"
    _ok("8 q-group", f"4002 exact rows, {t:.2f}s")


def test_c09_monoid_quotient_isomorphism(runs):
    assert default_config()["algebra"]["witness_substitutions"] == 200
    rows = runs[0]["algebra"]
    counts = {"monoid_identity": 6, "monoid_commutative": 36, "monoid_associative": 216,
              "xi_homomorphism": 25, "xi_roundtrip": 5, "barwedge_welldefined": 200}
    for law, count in counts.items():
        got = [r for r in rows if r["law"] == law]
        assert len(got) == count, (law, len(got))
        failed = [r["sample_id"] for r in got if r["pass"] != "True"]
        assert not failed, f"{law} failed at {failed}"
    t = runs[0]["timings"]["algebra/monoid"]
    assert t <= 5.0, f"monoid tables took {t:.1f}s > 5s"
    _ok("9 monoid/quotient", f"{sum(counts.values())} rows over 6 generators, {t:.1f}s")


def test_c10_free_group_words(runs):
    al = default_config()["algebra"]
    assert al["reduce_words"] == 10000 and al["eval_words"] == 20
    rows = runs[0]["algebra"]
    for law, count in (("reduce_idempotent", 10000), ("reduce_confluent", 10000)):
        got = [r for r in rows if r["law"] == law]
        assert len(got) == count
        assert all(r["pass"] == "True" and float(r["residual"]) == 0.0 for r in got), law
    for law in ("word_eval_reduced", "word_norm_letterwise"):
        got = [r for r in rows if r["law"] == law]
        assert len(got) == 20
        worst = max(float(r["residual"]) for r in got)
        assert all(r["pass"] == "True" for r in got) and worst <= 1e-7, f"{law} worst {worst:.3e}"
    t = runs[0]["timings"]["algebra/words"]
    assert t <= 60.0, f"word checks took {t:.1f}s > 60s"
    _ok("10 free group", f"20000 reduction rows + 40 evaluation rows, {t:.1f}s")


def test_c11_reports_byte_identical(runs):
    names = ("report.csv", "rotation.csv", "transform.csv", "algebra.csv", "summary.txt")
    for name in names:
        with open(os.path.join(runs[0]["out"], name), "rb") as fh:
            first = fh.read()
        with open(os.path.join(runs[1]["out"], name), "rb") as fh:
            second = fh.read()
        assert first == second, f"{name} differs between identically seeded runs"
    _ok("11 determinism", f"{len(names)} report files byte-identical across two runs")
