"""Benchmark the compiled kernels against the NumPy fallback.

Run:  python3 benchmarks/bench_kernels.py
(Set CANDLEAUG_PURE_PYTHON=1 before importing to force the fallback in the
library itself; this script always times both implementations directly.)
"""

import time

import numpy as np

from candleaug import _kernels
from candleaug._kernels import pykernels


def _time(fn, *args, repeat=200):
    fn(*args)  # warm up
    started = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - started) / repeat


def main() -> None:
    rng = np.random.default_rng(0)
    compiled = _kernels._impl
    have_compiled = _kernels.BACKEND == "cython"

    print(f"active backend: {_kernels.BACKEND}")
    rows = []

    x10 = rng.uniform(0, 1, size=10)
    x256 = rng.uniform(0, 1, size=256)
    rows.append(("gaf_outer T=10", (x10,), 5000))
    rows.append(("gaf_outer T=256", (x256,), 200))

    kern = rng.normal(size=(8, 4, 3, 3))
    bias = rng.normal(size=8)
    one = rng.normal(size=(1, 4, 10, 10))
    rows.append(("conv2d_forward 1x4x10x10", (one, kern, bias), 2000))
    batch = rng.normal(size=(32, 4, 10, 10))
    rows.append(("conv2d_forward 32x4x10x10", (batch, kern, bias), 500))

    done = rng.normal(size=(1, 8, 8, 8))
    rows.append(("conv2d_param_grads 1x4x10x10", (one, done, 3, 3), 2000))
    dout = rng.normal(size=(32, 8, 8, 8))
    rows.append(("conv2d_param_grads 32x4x10x10", (batch, dout, 3, 3), 500))

    header = f"{'kernel':<32}{'numpy':>12}{'cython':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, args, repeat in rows:
        fn_name = name.split()[0]
        t_py = _time(getattr(pykernels, fn_name), *args, repeat=repeat)
        if have_compiled:
            t_cy = _time(getattr(compiled, fn_name), *args, repeat=repeat)
            print(f"{name:<32}{t_py * 1e6:>10.1f}us{t_cy * 1e6:>10.1f}us{t_py / t_cy:>9.1f}x")
        else:
            print(f"{name:<32}{t_py * 1e6:>10.1f}us{'n/a':>12}{'n/a':>10}")

    # parity spot check while we are here
    m_a = pykernels.gaf_outer(x10)
    if have_compiled:
        m_b = compiled.gaf_outer(x10)
        assert np.max(np.abs(m_a - m_b)) < 1e-15, "backends disagree"
        print("parity check: backends agree within 1e-15")


if __name__ == "__main__":
    main()
