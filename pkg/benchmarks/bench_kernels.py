"""Benchmark the compiled convolution kernels against the numpy fallback.

Times the raw kernels on the shapes the two architectures actually use, plus
a full forward/backward pass of each model, under both backends.

    python benchmarks/bench_kernels.py [--batch 64] [--repeats 5]
"""

import argparse
import time

import numpy as np

from eegattr import _kernels, engine, models
from eegattr.network import BackwardRule


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(batch, repeats):
    rng = np.random.default_rng(0)
    cases = {
        # temporal convolution of the compact 7-layer model: 16 x (1, 64)
        "conv 16x(1,64) on (8,192)": (
            rng.standard_normal((batch, 1, 8, 192)).astype(np.float32),
            rng.standard_normal((16, 1, 1, 64)).astype(np.float32),
        ),
        # eegnet temporal convolution: 8 x (1, 64) on padded input
        "conv 8x(1,64) on (22,317)": (
            rng.standard_normal((batch, 1, 22, 317)).astype(np.float32),
            rng.standard_normal((8, 1, 1, 64)).astype(np.float32),
        ),
    }
    rows = []
    for name, (x, w) in cases.items():
        out = _kernels.reference.conv2d_forward(x, w)
        g = np.ascontiguousarray(rng.standard_normal(out.shape).astype(np.float32))
        for op, call in (
            ("forward", lambda b: b.conv2d_forward(x, w)),
            ("input_grad", lambda b: b.conv2d_input_grad(g, w)),
            ("weight_grad", lambda b: b.conv2d_weight_grad(x, g)),
        ):
            times = {}
            for backend in available_backends():
                impl = backend_impl(backend)
                times[backend] = timeit(lambda: call(impl), repeats)
            rows.append((f"{name} {op}", times))
    return rows


def available_backends():
    names = ["numpy"]
    if _kernels.compiled_available():
        names.append("compiled")
    return names


def backend_impl(name):
    if name == "compiled":
        from eegattr._kernels import _fastconv
        return _fastconv
    return _kernels.reference


def bench_models(batch, repeats):
    rng = np.random.default_rng(1)
    rows = []
    for build, dims in (
        (models.build_interpretable_cnn, (8, 192, 2)),
        (models.build_eegnet, (22, 254, 4)),
    ):
        net = build(*dims, seed=0)
        x = rng.standard_normal((batch, dims[0], dims[1])).astype(np.float32)
        stats = models.compute_batch_stats(net, x[: min(batch, 16)])
        targets = np.zeros(batch, dtype=np.int64)

        def full_pass():
            trace = engine.forward_batch(net, x, stats)
            engine.backward_batch(net, trace, targets, BackwardRule("plain"))

        times = {}
        for backend in available_backends():
            _kernels.set_backend(backend)
            times[backend] = timeit(full_pass, repeats)
        _kernels.set_backend("auto")
        rows.append((f"{net.name} forward+backward (batch {batch})", times))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--batch", type=int, default=64)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    print(f"backends available: {', '.join(available_backends())}")
    rows = bench_kernels(args.batch, args.repeats) + bench_models(args.batch, args.repeats)
    width = max(len(r[0]) for r in rows)
    for name, times in rows:
        parts = [f"{backend}: {dt * 1e3:8.2f} ms" for backend, dt in times.items()]
        if len(times) == 2:
            ratio = times["numpy"] / times["compiled"]
            parts.append(f"compiled is {ratio:4.2f}x the numpy speed")
        print(f"{name.ljust(width)}  " + "  ".join(parts))


if __name__ == "__main__":
    main()
