"""Compare the compiled and pure-Python persistence kernels.

Times ``vr_persistence`` on K x D codebooks: the freshly initialized table the
trainer starts from, a random Gaussian cloud, and (optionally) a trained
codebook loaded from a checkpoint, whose spread-out geometry makes the
dimension-1 reduction noticeably harder.

    python benchmarks/bench_persistence.py --repeats 100
    python benchmarks/bench_persistence.py --checkpoint runs/mnist/hcvq/model.ckpt
"""

import argparse
import statistics
import time

import numpy as np

import hcvq.persistence as ph
from hcvq.geometry import PointCloud, pairwise_distances
from hcvq.persistence import _pure
from hcvq.runio import load_checkpoint
from hcvq.vq import CodebookState


def time_calls(dm, repeats):
    ph.vr_persistence(dm)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        ph.vr_persistence(dm)
        times.append(time.perf_counter() - t0)
    return statistics.median(times) * 1e3, min(times) * 1e3


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--codes", type=int, default=128)
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--repeats", type=int, default=50)
    parser.add_argument("--pure-repeats", type=int, default=5)
    parser.add_argument("--checkpoint", help="also time the codebook stored in this checkpoint")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    clouds = {
        "initialized": CodebookState.initialize(args.codes, args.dim, rng).embeddings,
        "gaussian": rng.normal(size=(args.codes, args.dim)),
    }
    if args.checkpoint:
        clouds["checkpoint"] = load_checkpoint(args.checkpoint)["codebook"]

    compiled = ph._kernel if ph.BACKEND == "cython" else None
    print(f"{'cloud':<12} {'backend':<8} {'median ms':>10} {'min ms':>8}")
    for name, pts in clouds.items():
        dm = pairwise_distances(PointCloud(np.asarray(pts, dtype=np.float64)))
        rows = []
        if compiled is not None:
            ph._kernel = compiled
            rows.append(("cython",) + time_calls(dm, args.repeats))
        ph._kernel = _pure
        rows.append(("python",) + time_calls(dm, args.pure_repeats))
        if compiled is not None:
            ph._kernel = compiled
        for backend, med, best in rows:
            print(f"{name:<12} {backend:<8} {med:>10.1f} {best:>8.1f}")
        if len(rows) == 2:
            print(f"{name:<12} {'speedup':<8} {rows[1][1] / rows[0][1]:>10.1f}x")
    if compiled is None:
        print("compiled extension not built; only the pure backend was timed")


if __name__ == "__main__":
    main()
