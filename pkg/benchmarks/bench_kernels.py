"""Timing comparison between the two recurrent-sweep kernel backends.

Runs the forward and backward LSTM sweeps at several (steps, hidden)
sizes against both the compiled extension and the numpy fallback, and
prints per-call times with the speedup ratio.  Outputs are checked to
agree before timing so the numbers always describe equivalent work.

    python3 benchmarks/bench_kernels.py [--repeats N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from warnsift.nn import kernels_py

try:
    from warnsift.nn import _core
except ImportError:
    _core = None

SIZES = ((32, 32), (64, 64), (128, 128), (256, 256), (256, 512))


def _forward_args(rng: np.random.Generator, steps: int, hidden: int):
    zx = rng.normal(scale=0.5, size=(steps, 4 * hidden))
    wh = rng.normal(scale=0.1, size=(hidden, 4 * hidden))
    h = np.zeros((steps, hidden))
    c = np.zeros((steps, hidden))
    gates = np.zeros((steps, 4 * hidden))
    return zx, wh, h, c, gates


def _backward_args(rng: np.random.Generator, steps: int, hidden: int):
    zx, wh, h, c, gates = _forward_args(rng, steps, hidden)
    kernels_py.lstm_forward(zx, wh, h, c, gates)
    dh_up = rng.normal(size=(steps, hidden))
    dz = np.zeros((steps, 4 * hidden))
    dwh = np.zeros((hidden, 4 * hidden))
    return wh, h, c, gates, dh_up, dz, dwh


def _time_call(fn, args, repeats: int) -> float:
    """Best-of-N wall time for one call, in milliseconds."""
    fn(*args)  # warm up
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - started)
    return best * 1e3


def _check_agreement(steps: int, hidden: int) -> None:
    rng = np.random.default_rng(0)
    zx, wh, h1, c1, g1 = _forward_args(rng, steps, hidden)
    h2, c2, g2 = h1.copy(), c1.copy(), g1.copy()
    kernels_py.lstm_forward(zx, wh, h1, c1, g1)
    _core.lstm_forward(zx, wh, h2, c2, g2)
    if not np.allclose(h1, h2, rtol=1e-12, atol=1e-12):
        raise SystemExit("backends disagree on the forward sweep")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="timing repetitions per cell")
    args = parser.parse_args()

    if _core is None:
        print("compiled extension not importable; nothing to compare")
        print("(the package still works: the numpy fallback is selected at import)")
        return

    rng = np.random.default_rng(42)
    header = f"{'size (T x H)':>14}  {'op':>8}  {'numpy ms':>10}  {'compiled ms':>12}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for steps, hidden in SIZES:
        _check_agreement(steps, hidden)
        for op, maker in (("forward", _forward_args), ("backward", _backward_args)):
            base_args = maker(rng, steps, hidden)
            py_fn = getattr(kernels_py, f"lstm_{op}")
            c_fn = getattr(_core, f"lstm_{op}")
            py_ms = _time_call(py_fn, base_args, args.repeats)
            c_ms = _time_call(c_fn, base_args, args.repeats)
            print(
                f"{steps:>7} x {hidden:<4}  {op:>8}  {py_ms:>10.3f}  {c_ms:>12.3f}"
                f"  {py_ms / c_ms:>7.1f}x"
            )


if __name__ == "__main__":
    main()
