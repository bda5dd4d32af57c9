"""Benchmark the numba rollout kernels against the pure-numpy fallback.

Runs each bundled scenario with both implementations, reports the best
wall time over a few repeats, the speedup, and the worst command-level
disagreement between the two.

Usage::

    python3 benchmarks/bench_kernels.py [--repeats 5] [--duration 10]
"""

import argparse

import numpy as np

from rigidflock.engine import run
from rigidflock.scenario import bundled_scenario_path, load_scenario

SCENARIOS = ("pentagon_flock", "pentagon_intercept")


def bench_scenario(name, repeats, duration):
    """Time one scenario under both kernels and check they agree."""
    overrides = {} if duration is None else {"duration": duration}
    scn = load_scenario(bundled_scenario_path(name), **overrides)
    cfg = scn.to_run_config()
    results = {}
    logs = {}
    for kernel in ("jit", "numpy"):
        run(scn.to_run_config(), force_kernel=kernel)  # warm-up / compile
        best = np.inf
        for _ in range(repeats):
            log = run(scn.to_run_config(), force_kernel=kernel)
            best = min(best, log.meta["runtime_s"])
            logs[kernel] = log
        results[kernel] = best
    parity = float(np.abs(logs["jit"].commands - logs["numpy"].commands).max())
    steps = int(round(cfg.duration / cfg.dt))
    return steps, results, parity


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timed repeats per kernel (default 5)")
    parser.add_argument("--duration", type=float, default=None,
                        help="override scenario duration in seconds")
    args = parser.parse_args(argv)

    header = (f"{'scenario':<20} {'steps':>8} {'numba [s]':>10} "
              f"{'numpy [s]':>10} {'speedup':>8} {'parity':>9}")
    print(header)
    print("-" * len(header))
    for name in SCENARIOS:
        steps, results, parity = bench_scenario(name, args.repeats,
                                                args.duration)
        print(f"{name:<20} {steps:>8d} {results['jit']:>10.4f} "
              f"{results['numpy']:>10.4f} "
              f"{results['numpy'] / results['jit']:>7.1f}x {parity:>9.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
