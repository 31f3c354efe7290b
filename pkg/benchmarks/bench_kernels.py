"""Benchmark the compiled channel-application kernel against the numpy fallback.

Two views of the same question:
  * raw kernel calls on representative tensor-factorization shapes, and
  * full update sweeps of the dense backend with each kernel bound.

Usage: python benchmarks/bench_kernels.py [--repeats 5] [--sweeps 10]
"""

import argparse
import time

import numpy as np

from qca_tasep import (
    ModelParams,
    bulk_channel,
    init_state,
    kernels,
    left_boundary_channel,
    sweep,
)
from qca_tasep import _kernels_py

try:
    from qca_tasep import _kernels
except ImportError:
    _kernels = None

# (label, dim_left, phys, dim_right, superoperator kind) factorizations that
# occur in chains of 4 to 8 sites: boundary site channels (phys 2) and bulk
# bond channels (phys 4).  The physical superoperators are sparse, which the
# compiled kernel exploits; the last row repeats the largest bond shape with
# a dense random unitary to show the worst case without that structure.
CASES = (
    ("site, edge of N=4", 1, 2, 8, "boundary"),
    ("site, left of N=8", 1, 2, 128, "boundary"),
    ("site, right of N=8", 128, 2, 1, "boundary"),
    ("bond, N=4", 1, 4, 4, "hop"),
    ("bond, mid N=6", 4, 4, 4, "hop"),
    ("bond, mid N=8", 8, 4, 8, "hop"),
    ("bond, dense sup", 8, 4, 8, "dense"),
)


def make_superop(rng, phys, kind):
    if kind == "boundary":
        return np.ascontiguousarray(left_boundary_channel(0.3).superoperator())
    if kind == "hop":
        return np.ascontiguousarray(
            bulk_channel(0.75, np.pi / 4).superoperator()
        )
    # a random unitary keeps buffer magnitudes O(1) under arbitrarily many
    # in-place applications, so long timing loops stay numerically harmless
    mat = rng.normal(size=(phys**2, phys**2)) + 1j * rng.normal(
        size=(phys**2, phys**2)
    )
    q, _ = np.linalg.qr(mat)
    return np.ascontiguousarray(q)


def time_call(fn, repeats, setup=None):
    best = np.inf
    for _ in range(repeats):
        if setup is not None:
            setup()
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_raw(repeats):
    rng = np.random.default_rng(7)
    rows = []
    for label, dim_left, phys, dim_right, kind in CASES:
        d = dim_left * phys * dim_right
        buf0 = rng.normal(size=d * d) + 1j * rng.normal(size=d * d)
        buf = buf0.copy()
        sup = make_superop(rng, phys, kind)
        # batch small shapes so per-call dispatch overhead does not dominate
        loops = max(1, int(2e5 / (d * d)))

        def run(impl, buf=buf, sup=sup, loops=loops):
            for _ in range(loops):
                impl.apply_superop(buf, sup, dim_left, phys, dim_right)

        # contractive channels decay the buffer into denormal floats, which
        # tax scalar arithmetic; refresh before each timed run so every run
        # sees the same O(1) data a physical density matrix would have
        def refresh(buf=buf, buf0=buf0):
            buf[:] = buf0

        pure = time_call(lambda: run(_kernels_py), repeats, refresh) / loops
        if _kernels is not None:
            compiled = (
                time_call(lambda: run(_kernels), repeats, refresh) / loops
            )
            rows.append((label, pure, compiled))
        else:
            rows.append((label, pure, None))
    return rows


def bench_sweeps(repeats, n_sweeps):
    rows = []
    original = kernels.apply_superop
    try:
        for n in (4, 5, 6, 7, 8):
            params = ModelParams(
                n_sites=n, alpha=0.3, beta=0.7, tau=0.75, omega=np.pi / 4
            )

            def run(impl, n=n, params=params):
                kernels.apply_superop = impl.apply_superop
                state = init_state(n, "empty")
                for _ in range(n_sweeps):
                    state = sweep(state, params)

            pure = time_call(lambda: run(_kernels_py), repeats) / n_sweeps
            if _kernels is not None:
                compiled = time_call(lambda: run(_kernels), repeats) / n_sweeps
                rows.append((n, pure, compiled))
            else:
                rows.append((n, pure, None))
    finally:
        kernels.apply_superop = original
    return rows


def fmt_time(seconds):
    if seconds < 1e-3:
        return f"{seconds * 1e6:8.1f} us"
    return f"{seconds * 1e3:8.2f} ms"


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="best-of repeats")
    parser.add_argument("--sweeps", type=int, default=10, help="sweeps per timing")
    args = parser.parse_args()

    print(f"dispatch module selected compiled kernel: {kernels.COMPILED}")
    if _kernels is None:
        print("compiled extension not importable; timing the fallback only")

    print("\nraw kernel, one channel application")
    print("  case                    fallback      compiled   speedup")
    for label, pure, compiled in bench_raw(args.repeats):
        if compiled is None:
            print(f"  {label:<20s}  {fmt_time(pure)}           n/a       n/a")
        else:
            print(
                f"  {label:<20s}  {fmt_time(pure)}  {fmt_time(compiled)}"
                f"   {pure / compiled:6.2f}x"
            )

    print(f"\ndense backend, one full sweep (averaged over {args.sweeps})")
    print("  sites      fallback      compiled   speedup")
    for n, pure, compiled in bench_sweeps(args.repeats, args.sweeps):
        if compiled is None:
            print(f"  {n:5d}  {fmt_time(pure)}           n/a       n/a")
        else:
            print(
                f"  {n:5d}  {fmt_time(pure)}  {fmt_time(compiled)}"
                f"   {pure / compiled:6.2f}x"
            )


if __name__ == "__main__":
    main()
