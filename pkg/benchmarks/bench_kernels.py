"""Compare the numba and numpy kernel backends.

Each backend runs in its own interpreter (the backend is fixed at import
time).  Timings are best-of-``--repeat`` after one warm-up call, so numba
compilation is excluded.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, timeit
import numpy as np
from fhesim import _backend
from fhesim.modarith import MontgomeryContext, ModulusSet, find_ntt_prime
from fhesim.ntt import NttPlan, ntt_rows, intt_rows
from fhesim.transpose import MatrixView, TuHierarchy, transpose_recursive
from fhesim.archmodel import ModelParams, load_preset
from fhesim.scheduler import load_program, lower_to_kernels, map_and_schedule, trace_path

repeat = int(sys.argv[1])
rng = np.random.default_rng(0)
N = 1 << 14
ctxs = [MontgomeryContext(find_ntt_prime(64, N, i), 64) for i in range(8)]
mset = ModulusSet(ctxs)
plan = NttPlan(mset, N)
x = np.stack([rng.integers(0, c.q, N, dtype=np.uint64) for c in ctxs])
y = np.stack([rng.integers(0, c.q, N, dtype=np.uint64) for c in ctxs])
data = rng.integers(0, 1 << 62, 512 * 512, dtype=np.uint64)
arch = load_preset("cryptolight")
graph = lower_to_kernels(load_program(trace_path("lr")), ModelParams(), arch)

cases = {
    "montgomery vector mul (8 x 2^14)": lambda: mset.mul(x, y),
    "NTT forward+inverse (8 x 2^14)": lambda: intt_rows(ntt_rows(x, plan), plan),
    "recursive transpose (512 x 512)": lambda: transpose_recursive(
        MatrixView(data.copy(), 512), TuHierarchy(bank_count=512)),
    "list schedule (LR trace)": lambda: map_and_schedule(graph, arch),
}
out = {}
for name, fn in cases.items():
    fn()
    out[name] = min(timeit.repeat(fn, number=1, repeat=repeat))
print(json.dumps({"backend": _backend.BACKEND, "times": out}))
"""


def run(backend: str, repeat: int) -> dict:
    env = dict(os.environ, FHESIM_BACKEND=backend)
    proc = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env,
                          capture_output=True, text=True)
    if proc.returncode:
        sys.exit(f"{backend} worker failed:\n{proc.stderr}")
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    nb, np_ = run("numba", args.repeat), run("numpy", args.repeat)
    print(f"{'kernel':36s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for name, t_nb in nb["times"].items():
        t_np = np_["times"][name]
        print(f"{name:36s} {t_nb * 1e3:10.2f} {t_np * 1e3:10.2f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
