"""Compare the compiled and NumPy training kernels on matched workloads.

Run after an editable install:  python benchmarks/bench_backends.py
"""

import time

import numpy as np

from coreselect._backend import pykernels

try:
    from coreselect._backend import _ckernels
except ImportError:
    _ckernels = None

REPEATS = 5


def _time(fn) -> float:
    best = float("inf")
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _logistic_case(rng, m, d, C, epochs, batch):
    X = rng.standard_normal((m, d))
    y = rng.integers(0, C, size=m).astype(np.int64)
    W0 = rng.standard_normal((d, C)) * 0.1
    b0 = np.zeros(C)
    perms = None
    if 0 < batch < m:
        perms = np.stack([rng.permutation(m) for _ in range(epochs)]).astype(np.int64)

    def runner(impl):
        def run():
            W = W0.copy()
            b = b0.copy()
            impl.train_logistic(X, y, W, b, 0.1, 0.9, epochs, 1.0 / m, batch, perms,
                                0.0, 10**9)
        return run

    return runner


def _mlp_case(rng, m, d, H, C, epochs, batch):
    X = rng.standard_normal((m, d))
    y = rng.integers(0, C, size=m).astype(np.int64)
    init = [rng.standard_normal((d, H)) * 0.1, np.zeros(H),
            rng.standard_normal((H, H)) * 0.1, np.zeros(H),
            rng.standard_normal((H, C)) * 0.1, np.zeros(C)]
    perms = None
    if 0 < batch < m:
        perms = np.stack([rng.permutation(m) for _ in range(epochs)]).astype(np.int64)

    def runner(impl):
        def run():
            params = [p.copy() for p in init]
            impl.train_mlp(X, y, *params, 0.1, 0.9, epochs, 1.0 / m, batch, perms,
                           0.0, 10**9)
        return run

    return runner


def main():
    rng = np.random.default_rng(7)
    cases = [
        ("logistic m=50 d=2 C=2 e=100 full", _logistic_case(rng, 50, 2, 2, 100, 0)),
        ("logistic m=500 d=20 C=5 e=100 full", _logistic_case(rng, 500, 20, 5, 100, 0)),
        ("logistic m=2000 d=100 C=10 e=30 b=128", _logistic_case(rng, 2000, 100, 10, 30, 128)),
        ("mlp m=200 d=10 H=50 C=3 e=40 full", _mlp_case(rng, 200, 10, 50, 3, 40, 0)),
        ("mlp m=500 d=50 H=100 C=5 e=20 b=125", _mlp_case(rng, 500, 50, 100, 5, 20, 125)),
    ]
    print(f"{'case':44s} {'numpy':>10s} {'compiled':>10s} {'speedup':>8s}")
    for name, make in cases:
        t_py = _time(make(pykernels))
        if _ckernels is None:
            print(f"{name:44s} {t_py * 1e3:9.2f}ms {'missing':>10s} {'-':>8s}")
            continue
        t_c = _time(make(_ckernels))
        print(f"{name:44s} {t_py * 1e3:9.2f}ms {t_c * 1e3:9.2f}ms {t_py / t_c:7.2f}x")
    if _ckernels is None:
        print("\ncompiled backend not built; run pip install -e . --no-build-isolation")


if __name__ == "__main__":
    main()
