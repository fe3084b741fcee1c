"""Acceptance gate. Each test appends one PASS/FAIL line to the terminal summary."""

import hashlib
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from spdmean.experiments import check_block_bound, convergence_records
from spdmean.geometry import EuclideanPoint
from spdmean.means import KarcherConfig, constants, iter_inductive, karcher_mean
from spdmean.sequences import Schedule
from spdmean.spd_core import MatrixSet, SpdMatrix, distance, geodesic
from spdmean.verify import run_suite

DIMS = (2, 3, 5)
MS = (2, 3, 5)
SEEDS = (0, 1, 2)
INSTANCES = [(d, m, s) for d in DIMS for m in MS for s in SEEDS]
COND = 1e3
BOUND_TOL = 1e-8
K_MAX = 2000
# err_sq below this is rounding noise around an exactly reached mean
EXACT_FLOOR = 1e-20


def _record(log, label, ok, detail):
    log.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")


def _instance(key):
    dim, m, seed = key
    ms = MatrixSet.random(dim, m, 1000 + seed, COND)
    G, diag = karcher_mean(ms, KarcherConfig(grad_tol=1e-12))
    return ms, G, diag, constants(ms, G)


@pytest.fixture(scope="module")
def instances():
    return {key: _instance(key) for key in INSTANCES}


def test_c1_block_permutation_bound(acceptance_log):
    start = time.perf_counter()
    worst, checked = -math.inf, 0
    for key in INSTANCES:
        ms, G, _, c = _instance(key)
        dim, m, seed = key
        recs = convergence_records(ms, Schedule(m, "block_perm", seed=seed), K_MAX * m, G, c.L)
        report = check_block_bound(recs, c, BOUND_TOL)
        assert report.boundaries == K_MAX
        worst = max(worst, report.max_violation)
        checked += 1
    elapsed = time.perf_counter() - start
    ok = worst <= BOUND_TOL and elapsed < 60.0 and checked >= 20
    _record(
        acceptance_log,
        "C1 block-permutation bound",
        ok,
        f"{checked} instances, k<=2000, max(err_sq - L/k)={worst:.3e}, {elapsed:.1f}s",
    )
    assert worst <= BOUND_TOL
    assert elapsed < 60.0


def test_c2_k_block_bound(instances, acceptance_log):
    worst_block, worst_m = -math.inf, -math.inf
    runs = 0
    for k in (2, 3):
        for key in [(d, m, 0) for d in DIMS for m in MS]:
            ms, G, _, c = instances[key]
            m = key[1]
            recs = convergence_records(
                ms, Schedule(m, "k_block_perm", seed=key[2], k=k), K_MAX * m, G, c.L
            )
            # bound over blocks of k*m positions
            worst_block = max(worst_block, check_block_bound(recs, c, BOUND_TOL).max_violation)
            # the same L/k check at every multiple of m
            worst_m = max(
                worst_m, max(r.err_sq - c.L / (r.n // m) for r in recs if r.n % m == 0)
            )
            runs += 1
    ok = worst_block <= BOUND_TOL and worst_m <= BOUND_TOL
    _record(
        acceptance_log,
        "C2 k-block bound",
        ok,
        f"{runs} runs (k in {{2,3}}), max violation per k*m-block={worst_block:.3e}, "
        f"per m-boundary={worst_m:.3e}",
    )
    assert ok


def test_c3_cyclic_convergence(instances, acceptance_log):
    worst_ratio, worst_bound, exact = 0.0, -math.inf, 0
    for key in INSTANCES:
        ms, G, _, c = instances[key]
        m = key[1]
        recs = convergence_records(ms, Schedule(m, "cyclic"), 10_000, G, c.L)
        early, late = recs[99].err_sq, recs[-1].err_sq
        if early <= EXACT_FLOOR:
            # already exact at n=100; the ratio is noise over noise
            assert late <= EXACT_FLOOR, key
            exact += 1
        else:
            worst_ratio = max(worst_ratio, late / early)
        worst_bound = max(worst_bound, check_block_bound(recs, c, BOUND_TOL).max_violation)
    ok = worst_ratio < 1e-2 and worst_bound <= BOUND_TOL
    _record(
        acceptance_log,
        "C3 cyclic convergence",
        ok,
        f"{len(INSTANCES)} instances, max err(1e4)/err(1e2)={worst_ratio:.3e} "
        f"({exact} exact at both), max(err_sq - L/k)={worst_bound:.3e}",
    )
    assert ok


def test_c4_two_matrix_exactness(acceptance_log):
    worst = 0.0
    for seed in range(50):
        dim = DIMS[seed % 3]
        pair = MatrixSet.random(dim, 2, 5000 + seed, COND)
        G, _ = karcher_mean(pair)
        worst = max(worst, distance(G, geodesic(pair[0], pair[1], 0.5)))
    _record(acceptance_log, "C4 two-matrix exactness", worst <= 1e-9, f"50 pairs, max d={worst:.3e}")
    assert worst <= 1e-9


C5_PROPERTIES = (
    "semiparallelogram",
    "geodesic_inequality",
    "convexity",
    "variance_inequality",
    "lipschitz_inductive",
)


def test_c5_metric_inequalities(acceptance_log):
    worst = {}
    for dim in (2, 3):
        for r in run_suite(seed=7, samples=500, dim=dim, tol=BOUND_TOL, only=C5_PROPERTIES):
            assert r.samples >= 500
            worst[r.name] = max(worst.get(r.name, -math.inf), r.max_violation)
    ok = set(worst) == set(C5_PROPERTIES) and max(worst.values()) <= BOUND_TOL
    detail = ", ".join(f"{k}={v:.2e}" for k, v in worst.items())
    _record(acceptance_log, "C5 metric inequalities", ok, f"500 samples x dims 2,3: {detail}")
    assert ok


def test_c6_oracle_equivalences(acceptance_log):
    r = np.random.default_rng(6)
    errs = {}
    # diagonal geodesic, distance and mean
    for _ in range(50):
        a, b = r.uniform(0.01, 100, 4), r.uniform(0.01, 100, 4)
        t = r.uniform()
        A, B = SpdMatrix(np.diag(a)), SpdMatrix(np.diag(b))
        want = a ** (1 - t) * b**t
        got = np.diag(geodesic(A, B, t).entries)
        errs["geodesic"] = max(errs.get("geodesic", 0), np.max(np.abs(got - want) / (1 + want)))
        d_want = np.sqrt(np.sum(np.log(b / a) ** 2))
        errs["distance"] = max(errs.get("distance", 0), abs(distance(A, B) - d_want) / (1 + d_want))
    for _ in range(10):
        diag = r.uniform(0.01, 100, size=(4, 3))
        ms = MatrixSet([SpdMatrix(np.diag(x)) for x in diag])
        G, _ = karcher_mean(ms)
        want = np.exp(np.log(diag).mean(axis=0))
        err = np.max(np.abs(G.entries - np.diag(want)) / (1 + np.abs(np.diag(want))))
        errs["mean"] = max(errs.get("mean", 0), err)
        logs = np.log(diag)
        delta = max(np.linalg.norm(logs[i] - logs[j]) for i in range(4) for j in range(4))
        alpha = np.mean(np.sum((logs - np.log(want)) ** 2, axis=1))
        c = constants(ms, G)
        errs["constants"] = max(
            errs.get("constants", 0),
            abs(c.delta_max - delta),
            abs(c.alpha - alpha),
            abs(c.L - (alpha + 3 * delta**2)) / (1 + c.L),
        )
    # scalars {1, e^2}: G = e, Delta = 2, alpha = 1, L = 13
    ms = MatrixSet([SpdMatrix([[1.0]]), SpdMatrix([[math.exp(2.0)]])])
    G, _ = karcher_mean(ms)
    c = constants(ms, G)
    errs["scalar"] = max(
        abs(G.entries[0, 0] - math.e) / math.e,
        abs(c.delta_max - 2),
        abs(c.alpha - 1),
        abs(c.L - 13),
    )
    # Euclidean inductive means are running arithmetic means
    pts = r.normal(size=(200, 5)) * 10
    worst = 0.0
    for state in iter_inductive(EuclideanPoint(p) for p in pts):
        want = pts[: state.n].mean(axis=0)
        worst = max(worst, np.max(np.abs(state.current.coords - want)))
    errs["euclidean"] = worst
    ok = max(errs.values()) <= 1e-12
    detail = ", ".join(f"{k}={v:.1e}" for k, v in errs.items())
    _record(acceptance_log, "C6 oracle equivalences", ok, detail)
    assert ok


def test_c7_solver_self_consistency(instances, acceptance_log):
    worst_grad, worst_d = 0.0, 0.0
    for key in [(d, m, 0) for d in DIMS for m in MS]:
        ms, G, diag, _ = instances[key]
        worst_grad = max(worst_grad, diag.grad_norm)
        mats = list(ms)
        variants = [
            MatrixSet(mats[::-1]),
            MatrixSet([mats[i] for i in np.random.default_rng(key[0]).permutation(len(mats))]),
            MatrixSet(mats * 2),
            MatrixSet(mats * 3),
        ]
        others = [karcher_mean(v)[0] for v in variants]
        others += [karcher_mean(ms, KarcherConfig(initializer=i))[0] for i in ("first", "inductive")]
        worst_d = max(worst_d, max(distance(G, H) for H in others))
    ok = worst_grad <= 1e-12 and worst_d <= 1e-8
    _record(
        acceptance_log,
        "C7 solver self-consistency",
        ok,
        f"max grad={worst_grad:.2e}, max d under permutation/repetition/initializer={worst_d:.2e}",
    )
    assert ok


def test_c8_determinism(tmp_path, acceptance_log):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dim": 3, "m": 3, "seed": 11, "n_max": 3000}))
    digests = []
    for i in range(2):
        out = tmp_path / f"run{i}.csv"
        subprocess.run(
            [sys.executable, "-m", "spdmean", "converge", str(cfg), "--out", str(out)],
            check=True,
            capture_output=True,
        )
        digests.append(hashlib.sha256(out.read_bytes()).hexdigest())
    ok = digests[0] == digests[1]
    _record(acceptance_log, "C8 determinism", ok, f"sha256 {digests[0][:16]} x2")
    assert ok
