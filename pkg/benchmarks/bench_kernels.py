"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py [--scale S]

Prints one line per kernel with the per-call time of each backend and the
speedup. Both backends receive identical inputs and their outputs are
checked for equality before timing. Sizes are kept small because the
fallback is slow on the all-pairs kernels; ``--scale`` multiplies them.
"""
import argparse
import time

import numpy as np

from orbitpressure import _kernels
from orbitpressure._kernels import _pykernels
from orbitpressure.orbit_metrics import min_match_size
from orbitpressure.systems import symbols_to_agree


def cases(rng, scale):
    m = 60 * scale
    words = rng.integers(0, 2, size=(m, 48)).astype(np.uint8)
    words[: m // 2, :4] = 0
    orbits = np.ascontiguousarray(rng.random((m, 16)))
    orbits[: m // 2] = np.round(orbits[: m // 2], 1)
    grid = np.ascontiguousarray(rng.random((24, 24)))
    mask = rng.random((64, 64)) < 0.3
    r, n = 0.2, 10
    J, mm, mm16 = symbols_to_agree(r), min_match_size(n, r), min_match_size(16, r)
    fk_words = _pykernels.sym_ball_words(words, n, 1, r, 3, J, mm)
    covered = fk_words[0] | fk_words[1]
    weights = rng.random(m)
    rows = np.arange(m, dtype=np.int64)
    return {
        "fk_tau 24x24": lambda k: k.fk_tau(grid),
        "lcs_mask 64x64": lambda k: k.lcs_mask(mask),
        f"sym_within_many fk {m}": lambda k: k.sym_within_many(words[0], words, n, 1, r, 3, J, mm),
        f"sym_ball_words mean {m}": lambda k: k.sym_ball_words(words, n, 1, r, 1, J, mm),
        f"sym_ball_words fk {m}": lambda k: k.sym_ball_words(words, n, 1, r, 3, J, mm),
        f"circ_ball_words maxmean {m}": lambda k: k.circ_ball_words(orbits, r, 2, mm16),
        f"circ_ball_words fk {m}": lambda k: k.circ_ball_words(orbits, r, 3, mm16),
        f"row_gains {m}": lambda k: k.row_gains(fk_words, rows, covered, weights),
    }


def per_call(fn, budget=0.5):
    """Seconds per call, looping until ``budget`` seconds have elapsed."""
    calls, t0 = 0, time.perf_counter()
    while True:
        fn()
        calls += 1
        elapsed = time.perf_counter() - t0
        if elapsed >= budget:
            return elapsed / calls


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", type=int, default=1)
    args = ap.parse_args()
    if "cython" not in _kernels.available():
        raise SystemExit("compiled backend not built; run `pip install -e .` first")
    from orbitpressure._kernels import _ckernels

    rng = np.random.default_rng(0)
    print(f"{'kernel':28s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>9s}")
    for name, fn in cases(rng, args.scale).items():
        a, b = fn(_pykernels), fn(_ckernels)
        assert np.array_equal(np.asarray(a), np.asarray(b)), name
        tp = per_call(lambda: fn(_pykernels))
        tc = per_call(lambda: fn(_ckernels))
        print(f"{name:28s} {tp * 1e3:12.3f} {tc * 1e3:12.4f} {tp / tc:8.0f}x", flush=True)


if __name__ == "__main__":
    main()
