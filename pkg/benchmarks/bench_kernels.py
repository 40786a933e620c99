"""Time the compiled kernel against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 1000] [--candidates 90] [--repeat 20]

Reports the best-of-``repeat`` wall time of one candidate scan (the
grid search's inner loop) and of a full one-component fit, per backend.
"""

import argparse
import time

import numpy as np

from ppursuit import _backend
from ppursuit.comoments import TrimSpec
from ppursuit.indices import IndexSpec, batch_values
from ppursuit.pursuit import fit


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1000, help="observations")
    ap.add_argument("--candidates", type=int, default=90, help="directions per scan")
    ap.add_argument("--p", type=int, default=5, help="columns for the fit benchmark")
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    S = rng.standard_t(5, (args.candidates, args.n))
    y = rng.standard_normal(args.n)
    X = rng.standard_t(5, (args.n, args.p))
    yx = X[:, 0] + rng.standard_normal(args.n)
    cases = [
        ("capi scan", IndexSpec("capi")),
        ("capi scan, trim 0.15", IndexSpec("capi", trim=TrimSpec(0.15))),
        ("covariance scan", IndexSpec("covariance")),
    ]
    backends = sorted(_backend.AVAILABLE)
    print(f"n={args.n} candidates={args.candidates} p={args.p} backends={backends}")
    print(f"{'case':<28}" + "".join(f"{b:>12}" for b in backends) + ("  python/compiled" if len(backends) > 1 else ""))
    for label, idx in cases:
        row = [best_time(lambda b=b: batch_values(idx, S, y, backend=b), args.repeat) for b in backends]
        _print(label, row)
    for trim in (0.0, 0.15):
        row = []
        for b in backends:
            prev = _backend.use(b)
            try:
                row.append(best_time(lambda: fit(X, yx, IndexSpec("capi", trim=TrimSpec.of(trim))),
                                     max(1, args.repeat // 10)))
            finally:
                _backend.use(prev)
        _print(f"fit h=1, trim {trim}", row)


def _print(label, row):
    cells = "".join(f"{t * 1e3:>10.2f}ms" for t in row)
    # backends are sorted, so a pair is (compiled, python)
    speed = f"{row[1] / row[0]:>16.2f}x" if len(row) == 2 else ""
    print(f"{label:<28}{cells}{speed}")


if __name__ == "__main__":
    main()
