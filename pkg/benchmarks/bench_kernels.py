"""Compare the compiled reservoir kernel with the numpy fallback.

Run from the repository root after an editable install::

    python benchmarks/bench_kernels.py [--sizes 50 200 800] [--offsets 64] [--repeat 5]

Each case uses a thermal-like reservoir (all modes occupied) so every level
pair contributes; timings are the best of ``--repeat`` calls.
"""
import argparse
import timeit

import numpy as np

from forbidtrans._kernels import _fallback

try:
    from forbidtrans._kernels import _bath
except ImportError:
    _bath = None


def make_case(n, n_offsets, seed=0):
    rng = np.random.default_rng(seed)
    energies = np.sort(rng.uniform(0.0, 4.0, n))
    sigma = rng.dirichlet(np.ones(n))
    r2 = np.abs(rng.normal(size=(n, n))) ** 2
    offsets = np.linspace(-2.0, 2.0, n_offsets)
    return energies, sigma, np.ascontiguousarray(r2), offsets


def bench(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[50, 200, 800])
    parser.add_argument("--offsets", type=int, default=64)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    if _bath is None:
        print("compiled kernel not built; only the fallback is timed")
    print(f"{'modes':>6} {'kind':>10} {'python [s]':>12} {'compiled [s]':>13} {'speedup':>8} {'max rel diff':>13}")
    for n in args.sizes:
        e, s, r2, x = make_case(n, args.offsets)
        for gaussian in (True, False):
            call = (e, s, r2, x, gaussian, 0.05, 3.0)
            t_py = bench(_fallback.bath_spectrum, call, args.repeat)
            kind = "gaussian" if gaussian else "lorentzian"
            if _bath is None:
                print(f"{n:6d} {kind:>10} {t_py:12.4g} {'-':>13} {'-':>8} {'-':>13}")
                continue
            t_c = bench(_bath.bath_spectrum, call, args.repeat)
            a, b = _fallback.bath_spectrum(*call), _bath.bath_spectrum(*call)
            diff = np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300))
            print(f"{n:6d} {kind:>10} {t_py:12.4g} {t_c:13.4g} {t_py / t_c:8.1f} {diff:13.2e}")


if __name__ == "__main__":
    main()
