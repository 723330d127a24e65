"""Time the float scan kernels: compiled backend against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--T 1e5] [--repeat 5]

Compilation time is excluded by a warm-up call. With numba missing or
WCPS_DISABLE_NUMBA=1 both columns run the numpy code.
"""
import argparse
import time

from wcps import _kernels as K
from wcps.exactnum import parse_quad
from wcps.regions import region_from_weight
from wcps.rotation import delta_sup_scan, float_segments
from wcps.weights import make_hat


def best_of(fn, repeat):
    fn()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T", type=float, default=1e5)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    tau = parse_quad("1/2+1/2*sqrt(5)")
    P = region_from_weight(make_hat((-1 / tau, 1), 0, 1), alpha=tau)
    edges = K.edges_from_rings(P.float_rings())
    _, _, u0, u1, iota = float_segments((0, 0), tau, args.T)
    al, lam = float(tau), float(P.area())
    lo, hi = K.polygon_chords_numpy(iota, al, edges)

    cases = [
        ("polygon_chords", lambda: K.polygon_chords(iota, al, edges),
         lambda: K.polygon_chords_numpy(iota, al, edges)),
        ("segment_profile", lambda: K.segment_profile(u0, u1, lo, hi, lam),
         lambda: K.segment_profile_numpy(u0, u1, lo, hi, lam)),
        ("riemann_inside_count", lambda: K.riemann_inside_count(0.1, 0.2, al, 1e-4, 10 ** 6, edges),
         lambda: K.riemann_inside_count_numpy(0.1, 0.2, al, 1e-4, 10 ** 6, edges)),
    ]
    print(f"backend: {K.BACKEND}; {len(iota)} orbit segments (T={args.T:g})")
    print(f"{'kernel':<22}{'compiled s':>12}{'numpy s':>12}{'speedup':>10}")
    for name, fast, slow in cases:
        a, b = best_of(fast, args.repeat), best_of(slow, args.repeat)
        print(f"{name:<22}{a:>12.4f}{b:>12.4f}{b / a:>10.1f}")
    t0 = time.perf_counter()
    delta_sup_scan(P, tau, (0, 0), args.T, checkpoints=[args.T])
    print(f"full delta_sup_scan to T={args.T:g}: {time.perf_counter() - t0:.3f}s")


if __name__ == "__main__":
    main()
