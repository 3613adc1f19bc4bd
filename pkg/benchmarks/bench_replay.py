"""Time the replay kernels: compiled extension against the pure-Python loops.

    python3 benchmarks/bench_replay.py --T 3000 --M 210 --repeat 5
"""

import argparse
import time

import numpy as np

from fifarank import kernels


def make_inputs(M, T, seed):
    rng = np.random.default_rng(seed)
    home = rng.integers(0, M, T)
    away = (home + rng.integers(1, M, T)) % M
    y = rng.choice([0.0, 0.5, 1.0], T)
    return {
        "theta": rng.normal(1500, 150, M),
        "home": home,
        "away": away,
        "venue_b": (rng.random(T) < 0.6).astype(float),
        "y": y,
        "step": rng.choice([5.0, 10.0, 15.0, 25.0, 35.0], T),
        "knockout": rng.random(T) < 0.05,
        "goal_diff": rng.integers(-4, 5, T),
        "weight": np.ones(T),
    }


def cases(x):
    return {
        "fifa": lambda th, b: kernels.fifa_replay(th, x["home"], x["away"], x["y"], 1 - x["y"], x["step"],
                                                  x["knockout"], 600.0, backend=b),
        "davidson": lambda th, b: kernels.davidson_replay(th, x["home"], x["away"], x["venue_b"], x["y"],
                                                          x["weight"], 35.0, 0.3, 0.9, 200.0, backend=b),
        "skellam": lambda th, b: kernels.skellam_replay(th, x["home"], x["away"], x["venue_b"], x["goal_diff"],
                                                        x["weight"], 7.5, -0.1, 0.2, 300.0, backend=b),
    }


def best_time(fn, theta, backend, repeat):
    best = np.inf
    for _ in range(repeat):
        th = theta.copy()
        start = time.perf_counter()
        fn(th, backend)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--M", type=int, default=210)
    ap.add_argument("--T", type=int, default=3000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    backends = kernels.available_backends()
    x = make_inputs(args.M, args.T, args.seed)
    print(f"M={args.M} T={args.T} best of {args.repeat}; backends: {', '.join(backends)}")
    print(f"{'kernel':10s}" + "".join(f"{b:>14s}" for b in backends) + ("   speedup" if len(backends) > 1 else ""))
    for name, fn in cases(x).items():
        times = {b: best_time(fn, x["theta"], b, args.repeat) for b in backends}
        row = f"{name:10s}" + "".join(f"{times[b] * 1e3:12.3f}ms" for b in backends)
        if "compiled" in times:
            row += f"   {times['python'] / times['compiled']:7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
