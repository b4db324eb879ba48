"""Compare the compiled kernels against the pure-Python fallback.

Usage::

    python benchmarks/bench_kernels.py [--number N] [--sessions]

Per-kernel timings are taken in-process on identical inputs. With
``--sessions`` Window/Batch sessions on the 4x4 grid are also timed end to end under
each backend in a subprocess, since the backend is fixed at import.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from tscl import _kernels_py

try:
    from tscl import _kernels as _kernels_cy
except ImportError:  # extension not built
    _kernels_cy = None


def cases(rng: np.random.Generator):
    ts = np.arange(1.0, 11.0)
    ys = rng.uniform(size=10)
    chain = rng.uniform(size=5)
    p5 = rng.dirichlet(np.ones(5))
    grid = rng.uniform(size=16)
    p16 = rng.dirichlet(np.ones(16))
    q = rng.normal(0, 0.1, (13, 2))
    draws = rng.random(48)
    return {
        "ols_slope(K=10)": lambda k: k.ols_slope(ts, ys, 10),
        "chain_train": lambda k: k.chain_train(chain, 2, 0.08, 0.7, 1e-4),
        "chain_train_batch": lambda k: k.chain_train_batch(chain, p5, 0.08, 0.7, 1e-4),
        "grid_train": lambda k: k.grid_train(grid, 4, 5, 0.08, 0.7, 1e-5),
        "grid_train_batch": lambda k: k.grid_train_batch(grid, 4, p16, 0.08, 0.7, 1e-5),
        "mdp_episode(L=12)": lambda k: k.mdp_episode(
            q, 12, 24, 0.5, 0.9, 0.5, 1.0, 0.0, draws
        ),
        "mdp_greedy_success": lambda k: k.mdp_greedy_success(q, 12, 24),
    }


def time_call(fn, number: int) -> float:
    """Best of three, in microseconds per call."""
    return min(timeit.repeat(fn, number=number, repeat=3)) / number * 1e6


SESSION = (
    "import time;"
    "from tscl.harness import ExperimentConfig, run_session;"
    "from tscl.teachers import TeacherConfig;"
    "cfg = ExperimentConfig(student_kind='grid2d',"
    " teacher=TeacherConfig(formulation='batch'), max_steps=1000);"
    "t = time.perf_counter();"
    "[run_session(cfg, s) for s in range(3)];"
    "print(time.perf_counter() - t)"
)


def session_seconds(pure: bool) -> float:
    env = dict(os.environ, TSCL_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", SESSION], env=env, capture_output=True,
                         text=True, check=True)
    return float(out.stdout)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--number", type=int, default=20000, help="calls per timing")
    parser.add_argument("--sessions", action="store_true", help="also time whole sessions")
    args = parser.parse_args(argv)

    if _kernels_cy is None:
        print("compiled kernels are not built; nothing to compare", file=sys.stderr)
        return 1

    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'python us':>12}{'cython us':>12}{'speedup':>10}")
    for name, call in cases(rng).items():
        py = time_call(lambda: call(_kernels_py), args.number)
        cy = time_call(lambda: call(_kernels_cy), args.number)
        print(f"{name:<22}{py:>12.2f}{cy:>12.2f}{py / cy:>9.1f}x")

    if args.sessions:
        py, cy = session_seconds(True), session_seconds(False)
        print(f"\n3 grid window/batch sessions x 1000 steps: python {py:.2f}s, cython {cy:.2f}s "
              f"({py / cy:.1f}x)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
