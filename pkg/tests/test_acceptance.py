"""Acceptance criteria, one test each.

Every test appends a PASS/FAIL line to the shared log, which the terminal
summary prints at the end of the run.
"""

import contextlib
import json
import math
import random
import subprocess
import sys
import time
import warnings

import numpy as np
import pytest

from oracles import det3, random_correlation, symmetric_cubic_roots
from sortlab.bench import (
    DISTRIBUTIONS,
    TECHNIQUES,
    MetricsMatrix,
    MetricsRecord,
    generate_dataset,
    read_metrics_csv,
    write_metrics_csv,
)
from sortlab.cli import main
from sortlab.errors import FormatError
from sortlab.factors import (
    analyze,
    bartlett_test,
    eigen_percent,
    extract_factors,
    pca_eigen,
    promax,
    varimax,
)
from sortlab.sorts import heap_sort, shell_sort, verify_sorted_permutation
from sortlab.treap import Treap, random_priorities, treap_sort


@contextlib.contextmanager
def criterion(log, number, title):
    detail = {}
    try:
        yield detail
    except BaseException as e:
        line = f"[FAIL] {number}. {title}: {detail.get('msg') or e}"
        log.append(line)
        print(line)
        raise
    line = f"[PASS] {number}. {title}" + (f": {detail['msg']}" if detail.get("msg") else "")
    log.append(line)
    print(line)


def test_1_sorting_correctness(acceptance_log):
    with criterion(acceptance_log, 1, "sorting correctness") as d:
        sorts = {"shell": shell_sort, "heap": heap_sort, "treap": None}
        rng = random.Random(1)
        edge = [
            np.array([], dtype=np.int64),
            np.array([7], dtype=np.int64),
            np.full(4096, 3, dtype=np.int64),
            np.array([2**63 - 1, -(2**63), 0, -1, 2**63 - 1, -(2**63)], dtype=np.int64),
        ]
        cases = list(edge)
        while len(cases) < 1000:
            n = rng.randrange(0, 4097)
            cases.append(generate_dataset(n, rng.getrandbits(64), DISTRIBUTIONS[len(cases) % 4]))
        start = time.perf_counter()
        failures = 0
        for t in TECHNIQUES:
            for i, data in enumerate(cases):
                out = treap_sort(data, rng_seed=i) if t == "treap" else sorts[t](data)
                failures += not verify_sorted_permutation(data, out)
        elapsed = time.perf_counter() - start
        d["msg"] = f"{len(cases)} cases x {len(TECHNIQUES)} techniques, {failures} failures, {elapsed:.2f} s"
        assert failures == 0
        assert elapsed < 30


def test_2_eigen_trace_identity(acceptance_log):
    with criterion(acceptance_log, 2, "eigen trace identity") as d:
        rng = random.Random(2)
        worst_trace = worst_eig = 0.0
        for _ in range(100):
            r = random_correlation(rng)
            w, _ = pca_eigen(r)
            worst_trace = max(worst_trace, abs(w.sum() - 3.0))
            worst_eig = max(worst_eig, float(np.max(np.abs(w - symmetric_cubic_roots(r)))))
        d["msg"] = f"max |trace-3| {worst_trace:.1e}, max eigenvalue error {worst_eig:.1e}"
        assert worst_trace <= 1e-9
        assert worst_eig <= 1e-9


def test_3_rounding_anchor(acceptance_log):
    with criterion(acceptance_log, 3, "rounding anchor") as d:
        e = [2.969, 0.031, 2.519e-6]
        pct, _ = eigen_percent(e, 3)
        k = extract_factors(e)
        d["msg"] = f"P1 = {pct[0]:.4f} (target 98.966), retained {k}"
        assert abs(pct[0] - 98.966) <= 0.05
        assert k == 1


def test_4_bartlett_contract(acceptance_log):
    with criterion(acceptance_log, 4, "Bartlett contract") as d:
        ident = bartlett_test(np.eye(3), 50)
        assert ident.chi2 == 0.0
        assert ident.df == 3
        rng = random.Random(4)
        worst = 0.0
        for i in range(20):
            r = random_correlation(rng)
            n = 10 + 7 * i
            expected = -(n - 1 - (2 * 3 + 5) / 6) * math.log(det3(r))
            worst = max(worst, abs(bartlett_test(r, n).chi2 - expected))
        d["msg"] = f"identity chi2 {ident.chi2}, df {ident.df}, max oracle error {worst:.1e}"
        assert worst <= 1e-9


def test_5_rotation_conservation(acceptance_log):
    with criterion(acceptance_log, 5, "rotation conservation") as d:
        rng = np.random.default_rng(5)
        worst = 0.0
        for _ in range(50):
            a = rng.uniform(-1, 1, size=(3, 2))
            a /= np.maximum(np.linalg.norm(a, axis=1), 1.0)[:, None]
            b = varimax(a)
            worst = max(worst, float(np.max(np.abs((a**2).sum(1) - (b**2).sum(1)))))
        single = np.array([[0.9], [0.7], [0.4]])
        res = promax(single)
        d["msg"] = f"max communality drift {worst:.1e}"
        assert worst <= 1e-9
        assert np.array_equal(res.pattern, single)
        assert res.factor_correlation.tolist() == [[1.0]]
        assert np.array_equal(res.rotation, np.eye(1))


def test_6_headline_finding(acceptance_log, tmp_path):
    with criterion(acceptance_log, 6, "dominant first component on the default benchmark") as d:
        start = time.perf_counter()
        code = main(["pipeline", "--out", str(tmp_path)])
        elapsed = time.perf_counter() - start
        assert code == 0
        observed = {}
        for t in TECHNIQUES:
            doc = json.loads((tmp_path / f"factors_{t}.json").read_text())
            assert doc["n"] == 100
            observed[t] = (doc["percent"][0], doc["loadings"][0][0])
        summary = ", ".join(f"{t} PC1 {p:.2f}% time loading {l:.3f}" for t, (p, l) in observed.items())
        d["msg"] = f"{summary}; {elapsed:.1f} s"
        low = [t for t, (p, _) in observed.items() if p < 85]
        if low:
            warnings.warn(f"first component below 85% for {low}: {summary}")
            d["msg"] += f" (FLAG: below 85% for {low})"
        for t, (_, loading) in observed.items():
            assert abs(loading) >= 0.8, t
        assert elapsed < 60


def test_7_determinism(acceptance_log, tmp_path):
    with criterion(acceptance_log, 7, "synthetic-time determinism") as d:
        args = ["pipeline", "--synthetic-time", "--sizes", "1000,3000,10000,30000,100000", "--reps", "4", "--seed", "77"]
        outs = []
        for run in ("a", "b"):
            out = tmp_path / run
            res = subprocess.run(
                [sys.executable, "-m", "sortlab", *args, "--out", str(out)], capture_output=True, text=True
            )
            assert res.returncode == 0, res.stderr
            outs.append(out)
        same = [(outs[0] / f"factors_{t}.json").read_bytes() == (outs[1] / f"factors_{t}.json").read_bytes() for t in TECHNIQUES]
        d["msg"] = f"identical factors JSON for {sum(same)}/{len(same)} techniques"
        assert all(same)


def test_8_round_trips(acceptance_log, tmp_path):
    with criterion(acceptance_log, 8, "CSV/JSON round-trip") as d:
        rng = random.Random(8)
        for i in range(20):
            t = rng.choice(TECHNIQUES)
            m = MetricsMatrix(
                [
                    MetricsRecord(t, rng.randrange(10**7), rng.randrange(2**64), rng.randrange(10**12),
                                  rng.randrange(10**10), rng.randrange(10**7))
                    for _ in range(rng.randrange(30))
                ]
            )
            p = tmp_path / f"m{i}.csv"
            write_metrics_csv(m, p)
            assert read_metrics_csv(p) == m
        x = np.random.default_rng(8).uniform(1, 1e6, size=(12, 3))
        x[:, 1] += 2 * x[:, 0]
        doc = analyze(x, technique="heap").to_json_dict()
        assert json.loads(json.dumps(doc)) == doc
        bad = tmp_path / "bad.csv"
        good_row = "heap,10,1,5,80,1\n"
        bad.write_text("technique,n,seed,time_ns,mem_consumed_bits,total_mem_kb\n" + good_row * 4 + "heap,10,1,x,80,1\n")
        with pytest.raises(FormatError) as exc:
            read_metrics_csv(bad)
        assert exc.value.line == 6
        d["msg"] = "20 CSV matrices and factors JSON exact; malformed row reported at line 6"


def test_9_treap_structure(acceptance_log):
    with criterion(acceptance_log, 9, "treap structure") as d:
        n = 4095
        bound = 3 * math.log2(n)
        depths = []
        for seed in range(20):
            keys = np.random.default_rng(seed).integers(0, 1000, size=n)
            prios = random_priorities(n, seed)
            t = Treap(capacity=n)
            for lo in range(0, n, 64):
                t.extend(keys[lo : lo + 64], prios[lo : lo + 64])
                t.check_invariants()
            assert t.inorder().tolist() == sorted(keys.tolist())
            depths.append(float(t.node_depths().mean()))
        d["msg"] = f"worst mean depth {max(depths):.2f} <= {bound:.2f}"
        assert max(depths) <= bound
