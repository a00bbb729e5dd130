"""Time the compiled Volterra march against the pure-python fallback.

The march is the only quadratic-cost kernel in the package, so it is the
one piece worth compiling.  This script builds a realistic memory kernel
(free-space cubic coupling, softened band edge), marches it at several
grid sizes with both backends, checks the two produce the same numbers,
and prints the timing ratio.

Usage: python3 benchmarks/bench_volterra.py [--sizes 2000,8000,20000]
"""

import argparse
import time

import numpy as np

from greenmodes import HAVE_COMPILED_VOLTERRA, MemoryKernel
from greenmodes.numerics import volterra_march


def build_kernel_table(n_steps, t_max=400.0):
    gsq = 0.015 * np.pi
    kern = MemoryKernel(omega0=1.0,
                        weight=lambda w: gsq * np.asarray(w) ** 3
                        / (6.0 * np.pi**2),
                        omega_max=2.0)
    taus = np.linspace(0.0, t_max, n_steps + 1)
    return kern.table(taus), t_max / n_steps


def time_backend(table, h, backend, repeats):
    best = np.inf
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = volterra_march(table, h, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="2000,8000,20000",
                    help="comma separated step counts")
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if not HAVE_COMPILED_VOLTERRA:
        print("compiled march not built; timing the python fallback only")

    print("%8s %12s %12s %9s %10s"
          % ("n_steps", "python [s]", "compiled [s]", "speedup", "max |dy|"))
    for n in sizes:
        table, h = build_kernel_table(n)
        t_py, y_py = time_backend(table, h, "python", args.repeats)
        if HAVE_COMPILED_VOLTERRA:
            t_c, y_c = time_backend(table, h, "compiled", args.repeats)
            dev = np.max(np.abs(y_py - y_c))
            print("%8d %12.4f %12.4f %8.1fx %10.1e"
                  % (n, t_py, t_c, t_py / t_c, dev))
        else:
            print("%8d %12.4f %12s %9s %10s" % (n, t_py, "-", "-", "-"))


if __name__ == "__main__":
    main()
