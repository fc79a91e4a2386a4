"""Compare the compiled root-modulus kernels against the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--n 20000] [--order 5] [--repeat 3]

Prints timings for both kernels, the speed-up, and the largest
disagreement between the two on the same inputs.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from imexstab import _kernels_py
from imexstab.coeffs import generate_scheme

try:
    from imexstab import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def _best(fn, repeat: int) -> float:
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run(n: int, order: int, delta: float, repeat: int, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    s = generate_scheme(order, delta)
    mu = rng.uniform(-20, 2, n) + 1j * rng.uniform(-10, 10, n)
    # points well inside the diagram make first_exceeding scan everything
    inside = 0.5 * rng.uniform(-1, 1, n) + 0.05j * rng.uniform(-1, 1, n)
    out = {"n": n, "order": order, "delta": delta}
    impls = {"python": _kernels_py}
    if _compiled is not None:
        impls["compiled"] = _compiled
    vals = {}
    for name, mod in impls.items():
        out[f"{name}_max_root_modulus_s"] = _best(lambda: mod.max_root_modulus(s.c, s.b, mu), repeat)
        out[f"{name}_first_exceeding_s"] = _best(lambda: mod.first_exceeding(s.c, s.b, inside, 1.0), repeat)
        vals[name] = mod.max_root_modulus(s.c, s.b, mu)
    if _compiled is not None:
        out["speedup_max_root_modulus"] = out["python_max_root_modulus_s"] / out["compiled_max_root_modulus_s"]
        out["speedup_first_exceeding"] = out["python_first_exceeding_s"] / out["compiled_first_exceeding_s"]
        out["max_abs_difference"] = float(np.max(np.abs(vals["python"] - vals["compiled"])))
    return out


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=20000)
    p.add_argument("--order", type=int, default=5)
    p.add_argument("--delta", type=float, default=0.3)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    if _compiled is None:
        print("compiled extension not available; timing the fallback only")
    res = run(args.n, args.order, args.delta, args.repeat)
    for k, v in res.items():
        print(f"{k:32s} {v:.6g}" if isinstance(v, float) else f"{k:32s} {v}")


if __name__ == "__main__":
    main()
