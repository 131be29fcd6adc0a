"""Acceptance criteria, one test per criterion.

Each test records a single PASS/FAIL line; the lines are printed together at
the end of the pytest run (see ``conftest.py``) and also when this file is run
directly with ``python tests/test_acceptance.py``.

Criterion 8 trains two 5000-step models on a 10k-image MNIST subset and takes
several minutes.  It reads IDX files from ``$HCVQ_MNIST_DIR`` (default
``data/mnist`` in the repository); without them it fails with a message saying
so rather than substituting other data.
"""

import json
import math
import os
import statistics
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from hcvq.config import load_config
from hcvq.data import synth_cloud
from hcvq.geometry import PointCloud, pairwise_distances
from hcvq.gradcheck import NETWORK_TOL, TOPOLOGY_TOL, check_network, check_regularizer, check_topology
from hcvq.metrics import lifetime_entropy, mu0, persistent_entropy, soft_betti1
from hcvq.oracle import brute_force_ph
from hcvq.persistence import BACKEND, vr_persistence
from hcvq.regularizer import EntropyWindow
from hcvq.runio import compare_runs, load_dataset, write_comparison, write_text
from hcvq.vq import CodebookState, code_usage_entropy, paper_latent_entropy

sys.path.insert(0, str(Path(__file__).parent))
from conftest import ACCEPTANCE_LINES, SQRT2, triple_multiset  # noqa: E402

REPO = Path(__file__).resolve().parents[1]
MNIST_DIR = Path(os.environ.get("HCVQ_MNIST_DIR", REPO / "data" / "mnist"))
RUN_DIR = Path(os.environ.get("HCVQ_ACCEPTANCE_OUT", REPO / "runs" / "acceptance"))


def record(number, title, passed, detail):
    ACCEPTANCE_LINES[number] = f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {title}: {detail}"
    return passed


def max_triple_gap(a, b):
    ta, tb = triple_multiset(a), triple_multiset(b)
    if len(ta) != len(tb) or any(x[0] != y[0] for x, y in zip(ta, tb)):
        return math.inf
    return max((max(abs(x[1] - y[1]), abs(x[2] - y[2])) for x, y in zip(ta, tb)), default=0.0)


def test_01_oracle_equivalence():
    start = time.perf_counter()
    worst, mismatches = 0.0, 0
    for seed in range(200):
        rng = np.random.default_rng(seed)
        n, d = int(rng.integers(2, 11)), int(rng.integers(1, 5))
        pts = rng.normal(size=(n, d))
        if seed % 4 == 0:
            pts = np.round(pts, 1)  # exercise the tie-break
        dm = pairwise_distances(PointCloud(pts))
        gap = max_triple_gap(vr_persistence(dm), brute_force_ph(dm))
        worst = max(worst, gap)
        mismatches += gap > 1e-9
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 30
    record(1, "oracle equivalence", ok, f"200 clouds, max gap {worst:.1e}, {mismatches} mismatches, {elapsed:.1f}s")
    assert ok


def test_02_unit_square():
    sq = PointCloud([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    d = vr_persistence(sq)
    deaths0 = sorted(float(x) for x in d.deaths[d.mask(0)])
    loops = [(b, e) for dim, b, e in d.triples() if dim == 1 and e > b]
    ok = (
        np.allclose(deaths0, [1, 1, 1], rtol=0, atol=1e-9)
        and len(loops) == 1
        and abs(loops[0][0] - 1.0) <= 1e-9
        and abs(loops[0][1] - SQRT2) <= 1e-9
        and abs(mu0(d) - 1.0) <= 1e-9
    )
    record(2, "analytic square", ok, f"H0 deaths {deaths0}, H1 {loops}, mu0 {mu0(d)}")
    assert ok


def test_03_entropy_identities():
    errs = {n: abs(lifetime_entropy(np.full(n, 0.37)) - math.log(n)) for n in (1, 2, 5, 128)}
    e13 = lifetime_entropy([1.0, 3.0])
    pts = np.random.default_rng(3).normal(size=(40, 3))
    base = persistent_entropy(vr_persistence(PointCloud(pts)))
    scale_err = max(abs(persistent_entropy(vr_persistence(PointCloud(pts * s))) - base) for s in (0.1, 10.0))
    ok = max(errs.values()) <= 1e-12 and abs(e13 - 0.5623) <= 1e-4 and scale_err <= 1e-9
    record(3, "persistent entropy identities", ok,
           f"max |E - ln n| {max(errs.values()):.1e}, E{{1,3}} {e13:.6f}, scale drift {scale_err:.1e}")
    assert ok


def test_04_topology_gradients():
    start = time.perf_counter()
    results = check_topology(50) + check_regularizer(50)
    elapsed = time.perf_counter() - start
    ok = all(r.passed for r in results) and elapsed < 60
    summary = ", ".join(f"{r.metric} {r.max_rel_error:.1e}" for r in results)
    record(4, "64-bit gradient checks", ok, f"{summary} (tol {TOPOLOGY_TOL:.0e}), {elapsed:.1f}s")
    assert ok


def test_05_network_gradients():
    (res,) = check_network(n_params=20)
    record(5, "32-bit network gradient check", res.passed,
           f"20 parameters, max rel error {res.max_rel_error:.1e} (tol {NETWORK_TOL:.0e})")
    assert res.passed


def test_06_entropy_formulas():
    uniform = code_usage_entropy(np.full(128, 5))
    collapsed = code_usage_entropy(np.eye(128)[0] * 64)
    paper = paper_latent_entropy([1.0, 2.0, 3.0])
    window = EntropyWindow(200, clamp=10.0)
    rng = np.random.default_rng(6)
    peak = 0.0
    for v in rng.uniform(0, 25, 1000):
        window.push(v)
        peak = max(peak, max(window.buffer))
    ok = abs(uniform - math.log(128)) <= 1e-9 and collapsed == 0.0 and abs(paper - 1.0114) <= 1e-4 and peak <= 10.0
    record(6, "entropy formulas", ok,
           f"uniform {uniform:.9f}, collapsed {collapsed}, paper {{1,2,3}} {paper:.4f}, window max {peak}")
    assert ok


def test_07_soft_betti():
    circle = soft_betti1(vr_persistence(synth_cloud("circle", 64, 0.0, seed=0)), 0.01)
    worst, used = 0.0, 0
    for seed in range(20):
        kind = ("circle", "two_circles")[seed % 2]
        n = int(np.random.default_rng(seed).integers(8, 25))
        d = vr_persistence(synth_cloud(kind, n, 0.05, seed))
        ell = d.persistence[d.mask(1)]
        # zero-persistence pairs are kept in the diagram but contribute exactly 0
        pos = ell[ell > 0]
        assert np.all(pos > 10 * 0.01)
        worst = max(worst, abs(soft_betti1(d, 0.01) - len(pos)))
        used += 1
    ok = 0.95 <= circle <= 1.05 and worst < 0.05
    record(7, "soft Betti fidelity", ok, f"circle {circle:.6f}, max |beta1 - count| {worst:.1e} over {used} clouds")
    assert ok


def mnist_files():
    for images, labels in (("images-idx3-ubyte.gz", "labels-idx1-ubyte.gz"),
                           ("train-images-idx3-ubyte.gz", "train-labels-idx1-ubyte.gz"),
                           ("train-images-idx3-ubyte", "train-labels-idx1-ubyte")):
        if (MNIST_DIR / images).is_file():
            lab = MNIST_DIR / labels
            return MNIST_DIR / images, lab if lab.is_file() else None
    return None, None


@pytest.mark.slow
def test_08_directional_mnist():
    images, labels = mnist_files()
    if images is None:
        record(8, "directional MNIST experiment", False, f"no MNIST IDX files under {MNIST_DIR}")
        pytest.fail(f"MNIST IDX files not found under {MNIST_DIR}; see README for how to fetch them")
    base = ["data.source=idx", f"data.images={images}", f"data.labels={labels or ''}", "data.limit=10000",
            "steps=5000", "batch_size=64", "seed=0"]
    tried = []
    start = time.perf_counter()
    for lam in (0.1, 0.05, 0.5):
        cfg = load_config(None, base + [f"reg.lambda={lam}"])
        ds = load_dataset(cfg)
        rep = compare_runs(cfg, ds)
        out = RUN_DIR / f"lambda_{lam}"
        write_comparison(out, cfg, ds, rep)
        tried.append((lam, rep))
        if rep.directional_pass:
            break
    elapsed = time.perf_counter() - start
    passing = next((lam for lam, rep in tried if rep.directional_pass), None)
    summary = {
        "dataset": {"name": ds.name, "checksum": ds.checksum, "n_items": len(ds)},
        "lambdas_tried": [lam for lam, _ in tried],
        "passing_lambda": passing,
        "per_lambda": {str(lam): rep.to_dict() for lam, rep in tried},
    }
    RUN_DIR.mkdir(parents=True, exist_ok=True)
    write_text(RUN_DIR / "manifest.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    detail = "; ".join(
        f"lambda {lam}: E_z {rep.hcvq.e_z_final_mean:.4f} vs {rep.dry.e_z_final_mean:.4f}, "
        f"E(F) {rep.hcvq.persistent_entropy_final:.4f} vs {rep.dry.persistent_entropy_final:.4f}"
        for lam, rep in tried
    )
    record(8, "directional MNIST experiment", passing is not None,
           f"{detail} (hcvq vs dry, {len(ds)} images, {elapsed / 60:.1f} min)")
    assert passing is not None


def test_09_determinism(tmp_path):
    over = ["steps=40", "data.synthetic_n=256", "reg.window_k=10", "seed=11"]
    outs = []
    for name in ("a", "b"):
        cfg = load_config(None, over)
        ds = load_dataset(cfg)
        write_comparison(tmp_path / name, cfg, ds, compare_runs(cfg, ds))
        outs.append(tmp_path / name)
    files = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*") if p.suffix in (".csv", ".json", ".jsonl"))
    differing = [str(f) for f in files if (outs[0] / f).read_bytes() != (outs[1] / f).read_bytes()]
    ok = not differing and len(files) > 0
    record(9, "determinism", ok, f"{len(files)} CSV/JSON files compared, differing: {differing or 'none'}")
    assert ok


def test_10_performance():
    emb = CodebookState.initialize(128, 64, np.random.default_rng(0)).embeddings.astype(np.float64)
    dm = pairwise_distances(PointCloud(emb))
    vr_persistence(dm)  # warm-up
    times = []
    for _ in range(100):
        t0 = time.perf_counter()
        vr_persistence(dm)
        times.append(time.perf_counter() - t0)
    med = statistics.median(times) * 1e3
    ok = med < 50.0
    record(10, "performance envelope", ok, f"median {med:.1f} ms over 100 calls (K=128, D=64, {BACKEND} backend)")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-p", "no:cacheprovider"]))
