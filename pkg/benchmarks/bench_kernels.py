"""Compare the compiled and pure-Python DAG kernels.

    python3 benchmarks/bench_kernels.py [--grid 8] [--reps 2000]

Times the raw backward DP and a full TTC run on the same grid with each
backend, and checks both kernels return identical results.
"""

import argparse
import time

import numpy as np

from bandit_routing import _dagkernel_py, grid_network
from bandit_routing.harness import NetworkSpec, run_single

try:
    from bandit_routing import _dagkernel
except ImportError:
    _dagkernel = None


def time_kernel(fn, net, weights):
    start = time.perf_counter()
    for w in weights:
        fn(net._rev_order, net._out_ptr, net._out_links, net._heads, w, net.destination)
    return time.perf_counter() - start


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--grid", type=int, default=8)
    ap.add_argument("--reps", type=int, default=2000)
    args = ap.parse_args()

    net = grid_network(args.grid)
    rng = np.random.default_rng(0)
    weights = [rng.standard_normal(net.d) for _ in range(args.reps)]

    backends = {"python": _dagkernel_py.backward_dp}
    if _dagkernel is not None:
        backends["cython"] = _dagkernel.backward_dp
    else:
        print("compiled kernel not built; timing the fallback only")

    ref = None
    for name, fn in backends.items():
        out = fn(net._rev_order, net._out_ptr, net._out_links, net._heads, weights[0], net.destination)
        if ref is None:
            ref = out
        else:
            assert np.array_equal(ref[0], out[0]) and np.array_equal(ref[1], out[1]), "kernels disagree"
        secs = time_kernel(fn, net, weights)
        print(f"{name:>7}: {secs / args.reps * 1e6:8.1f} us per DP call (grid {args.grid}, d={net.d})")
    if len(backends) == 2:
        print("kernel outputs identical")

    # End-to-end: the kernel choice is made at import, so patch the module binding.
    import bandit_routing.network as network_mod
    for name, fn in backends.items():
        network_mod.backward_dp = fn
        res = run_single(NetworkSpec(grid=args.grid), "ttc", 25000, 1.0, 0)
        print(f"{name:>7}: TTC grid({args.grid}) T=25000 in {res.runtime_ms / 1e3:.2f} s, "
              f"commit epoch {res.commit_epoch}")


if __name__ == "__main__":
    main()
