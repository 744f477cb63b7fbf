"""End-to-end acceptance checks, one test per shipped guarantee.

Each test prints a single PASS/FAIL line (visible with ``pytest -s`` or in
the captured output of a failure) so a reviewer can read the verdicts at a
glance.  Criterion 9's dataset half is skipped unless the environment
variable BLOWAUTH_DATASET points at a session CSV of the published
recordings; its performance half always runs.
"""

import os
import time

import numpy as np
import pytest

import oracles
from blowauth import (
    DecisionConfig,
    KernelConfig,
    authenticate,
    calibrate_threshold,
    dtw,
    eer,
    fuse,
    kernel_distance,
    load_sessions_csv,
    min_max_normalize,
    pairwise_matrix,
    run_protocol,
    sbd,
    shape_dtw,
    synth_dataset,
    synth_embeddings,
)
from blowauth.cli import main as cli_main
from blowauth.kernels import warm_up_jit


@pytest.fixture(scope="module", autouse=True)
def _warm_jit():
    # compile the numba cores once so timed criteria measure the algorithms
    warm_up_jit()


def _verdict(name: str, ok: bool, detail: str = "") -> None:
    line = f"{'PASS' if ok else 'FAIL'}: {name}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def test_criterion_01_dtw_oracle_equivalence():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        x = rng.uniform(0, 10, rng.integers(1, 7))
        y = rng.uniform(0, 10, rng.integers(1, 7))
        worst = max(worst, abs(dtw(x, y) - oracles.dtw_brute(x, y)))
    elapsed = time.perf_counter() - start
    _verdict(
        "criterion 1: dtw equals brute-force path enumeration on 200 short pairs",
        worst <= 1e-9 and elapsed < 10.0,
        f"max |diff| {worst:.2e}, {elapsed:.1f} s",
    )


def test_criterion_02_kernel_axioms():
    rng = np.random.default_rng(102)
    kinds = ["ed", "dtw", "shapedtw", "dtws", "sbd", "twed"]
    configs = {kind: KernelConfig(kind) for kind in kinds}
    ok = True
    detail = ""
    for i in range(500):
        n = int(rng.integers(20, 251))
        x = rng.uniform(0.0, 5.0, n)
        y = rng.uniform(0.0, 5.0, n)
        for kind in kinds:
            cfg = configs[kind]
            dxy = kernel_distance(x, y, cfg)
            dyx = kernel_distance(y, x, cfg)
            checks = [
                ("non-negative", dxy >= 0.0),
                ("symmetric", abs(dxy - dyx) <= 1e-9),
                ("self-distance", abs(kernel_distance(x, x, cfg)) <= 1e-9),
            ]
            for label, passed in checks:
                if not passed:
                    ok = False
                    detail = f"pair {i}, {kind}: {label} violated"
    tri_worst = 0.0
    cfg = configs["twed"]
    for _ in range(500):
        n = int(rng.integers(20, 251))
        x, y, z = (rng.uniform(0.0, 5.0, n) for _ in range(3))
        dxz = kernel_distance(x, z, cfg)
        dxy = kernel_distance(x, y, cfg)
        dyz = kernel_distance(y, z, cfg)
        tri_worst = max(tri_worst, dxz - (dxy + dyz))
    if tri_worst > 1e-9:
        ok = False
        detail = f"twed triangle violated by {tri_worst:.2e}"
    _verdict(
        "criterion 2: metric axioms for all six kernels, twed triangle inequality",
        ok,
        detail or f"500 pairs, 500 triples, max triangle slack {tri_worst:.2e}",
    )


def test_criterion_03_shapedtw_reduction():
    rng = np.random.default_rng(103)
    exact = True
    for _ in range(100):
        x = rng.uniform(0, 5, rng.integers(10, 80))
        y = rng.uniform(0, 5, rng.integers(10, 80))
        if shape_dtw(x, y, descriptor_len=1, include_derivative=False) != dtw(x, y):
            exact = False
    _verdict(
        "criterion 3: shape_dtw with length-1 raw descriptor equals dtw exactly",
        exact,
        "100 pairs",
    )


def test_criterion_04_sbd_properties():
    rng = np.random.default_rng(104)
    in_range = True
    for _ in range(500):
        x = rng.uniform(0.1, 5, rng.integers(20, 120))
        y = rng.uniform(0.1, 5, rng.integers(20, 120))
        d = sbd(x, y)
        if not 0.0 <= d <= 2.0:
            in_range = False
    x = rng.uniform(0.1, 5, 64)
    scale_err = abs(sbd(x, 3.0 * x))
    neg_err = abs(sbd(x, -x) - 2.0)
    _verdict(
        "criterion 4: sbd range [0,2], sbd(x,3x)=0, sbd(x,-x)=2",
        in_range and scale_err <= 1e-9 and neg_err <= 1e-9,
        f"scale err {scale_err:.2e}, negation err {neg_err:.2e}",
    )


def test_criterion_05_calibration_recall_exactness():
    ds = synth_dataset(5, 10, length=120, seed=0, noise=0.01)
    ok = True
    detail = ""
    frrs = {}
    for q in (10, 9, 8):
        cfg = DecisionConfig(kernel=KernelConfig("dtw"), k=2, q=q)
        res = run_protocol(ds, cfg)
        frrs[q] = res.row.frr
        if res.row.frr != (10 - q) / 10:
            ok = False
            detail = f"q={q}: FRR {res.row.frr} != {(10 - q) / 10}"
        g = res.genuine.reshape(5, 10)
        if not all(len(np.unique(row)) == 10 for row in g):
            ok = False
            detail = f"q={q}: tied genuine scores break the premise"
    _verdict(
        "criterion 5: calibrated FRR is exactly (n-q)/n at q=10/9/8",
        ok,
        detail or f"FRR {frrs[10]}/{frrs[9]}/{frrs[8]}",
    )


def test_criterion_06_eer_oracle():
    rng = np.random.default_rng(106)
    exact = True
    for _ in range(100):
        g = rng.uniform(0, 5, rng.integers(1, 15))
        imp = rng.uniform(0, 5, rng.integers(1, 15))
        if eer(g, imp) != oracles.eer_brute(g, imp):
            exact = False
    separated = eer([0.1, 0.2, 0.3], [5.0, 6.0, 7.0]) == 0.0
    identical = (
        eer([1.0, 2.0], [1.0, 2.0]) == 0.5
        and eer([0.5, 1.5, 2.5, 3.5], [0.5, 1.5, 2.5, 3.5]) == 0.5
    )
    _verdict(
        "criterion 6: eer equals the exhaustive sweep; separated 0, identical 0.5",
        exact and separated and identical,
        "100 random score sets",
    )


def test_criterion_07_fusion_normalization():
    rng = np.random.default_rng(107)
    ok = True
    detail = ""
    for i in range(1000):
        values = rng.uniform(-10, 10, rng.integers(2, 50))
        out = min_max_normalize(values)
        if not ((out >= 0.0).all() and (out <= 1.0).all()):
            ok, detail = False, f"list {i}: output outside [0,1]"
        order_in = np.argsort(values, kind="stable")
        order_out = np.argsort(out[order_in], kind="stable")
        if not (order_out == np.arange(len(values))).all():
            ok, detail = False, f"list {i}: order not preserved"
    blow = min_max_normalize(rng.uniform(0, 30, 100))
    face = min_max_normalize(rng.uniform(0, 2, 100))
    fused = fuse(blow, face, (0.5, 0.5))
    if not ((fused >= 0.0).all() and (fused <= 1.0).all()):
        ok, detail = False, "equal-weight fusion left [0,1]"

    # accept/deny decisions survive any strictly increasing transform of
    # the raw scores, because the threshold is an order statistic
    grid = np.arange(1, 5001) / 1000.0
    for t in range(50):
        a = rng.uniform(0.1, 3.0)
        b = rng.uniform(0.0, 2.0)
        c = rng.uniform(-5.0, 5.0)
        genuine = rng.choice(grid, size=10, replace=False)
        probes = rng.choice(grid, size=25, replace=False)
        q = int(rng.integers(1, 11))
        tau = calibrate_threshold(genuine, q)
        tau_t = calibrate_threshold(a * genuine + b * np.arctan(genuine) + c, q)
        for s in probes:
            before = authenticate(float(s), tau)
            after = authenticate(float(a * s + b * np.arctan(s) + c), tau_t)
            if before != after:
                ok, detail = False, f"transform {t}: decision flipped at score {s}"
    _verdict(
        "criterion 7: min-max keeps range/order; decisions invariant under "
        "increasing transforms",
        ok,
        detail or "1000 lists, 50 transforms",
    )


def test_criterion_08_synthetic_end_to_end():
    start = time.perf_counter()
    ds = synth_dataset(10, 10, length=250, seed=0, noise=0.01)
    blow_cfg = DecisionConfig(kernel=KernelConfig("dtw"), k=1, q=10)
    blow = run_protocol(ds, blow_cfg)
    ds_f = ds.with_embeddings(synth_embeddings(10, 10, sigma=0.05, seed=1))
    fused = run_protocol(ds_f, blow_cfg, channel="fused")
    elapsed = time.perf_counter() - start
    ok = (
        blow.row.far <= 0.05
        and blow.row.frr == 0.0
        and fused.row.far <= blow.row.far
        and elapsed < 60.0
    )
    _verdict(
        "criterion 8: 10x10 synthetic protocol -- FAR <= 5%, FRR = 0, fusion "
        "no worse, < 60 s",
        ok,
        f"blow FAR {blow.row.far:.4f}, FRR {blow.row.frr}, "
        f"fused FAR {fused.row.far:.4f}, {elapsed:.1f} s",
    )


def test_criterion_09_pairwise_performance():
    rng = np.random.default_rng(109)
    series = [rng.uniform(0, 5, 250) for _ in range(500)]
    start = time.perf_counter()
    m = pairwise_matrix(series, KernelConfig("dtw"))
    elapsed = time.perf_counter() - start
    _verdict(
        "criterion 9 (performance): 500x500 dtw matrix over length-250 series "
        "in < 300 s",
        m.values.shape == (500, 500) and elapsed < 300.0,
        f"{elapsed:.1f} s",
    )


def test_criterion_09_published_dataset_reproduction():
    path = os.environ.get("BLOWAUTH_DATASET")
    if not path:
        print(
            "SKIP: criterion 9 (reproduction) -- set BLOWAUTH_DATASET to a "
            "session CSV of the published recordings; the face/fusion "
            "accuracy figures are unreproducible regardless because the "
            "facial images are withheld, and fusion is accepted via "
            "criteria 7-8"
        )
        pytest.skip("BLOWAUTH_DATASET not set")
    ds = load_sessions_csv(path)
    res = run_protocol(ds, DecisionConfig(kernel=KernelConfig("dtw"), k=1, q=10))
    acc_err = abs(res.row.accuracy - 0.9822)
    far_err = abs(res.row.far - 0.0181)
    frr_err = abs(res.row.frr - 0.0)
    _verdict(
        "criterion 9 (reproduction): dtw/both/k=1/q=10 within 1.5 pp of the "
        "published rates",
        acc_err <= 0.015 and far_err <= 0.015 and frr_err <= 0.015,
        f"accuracy {res.row.accuracy:.4f}, FAR {res.row.far:.4f}, FRR {res.row.frr:.4f}",
    )


def test_criterion_10_cli_determinism(tmp_path):
    data = tmp_path / "data"
    code = cli_main(
        ["synth", "--out-dir", str(data), "--users", "4", "--sessions", "4",
         "--length", "60", "--noise", "0.02"]
    )
    assert code == 0
    args = [
        "evaluate",
        "--dataset", str(data / "sessions.csv"),
        "--embeddings", str(data / "embeddings.csv"),
        "--kernel", "dtw,sbd",
        "--channel", "blow,fused",
        "--mode", "both",
    ]
    r1, r2 = tmp_path / "r1", tmp_path / "r2"
    assert cli_main(args + ["--out-dir", str(r1)]) == 0
    assert cli_main(args + ["--out-dir", str(r2)]) == 0
    same_csv = (r1 / "report.csv").read_bytes() == (r2 / "report.csv").read_bytes()
    same_txt = (r1 / "report.txt").read_bytes() == (r2 / "report.txt").read_bytes()
    _verdict(
        "criterion 10: consecutive evaluate runs write byte-identical reports",
        same_csv and same_txt,
        "report.csv and report.txt compared",
    )
