"""Compare the numba kernels against their numpy fallbacks.

Usage::

    python3 benchmarks/bench_kernels.py [--samples 20000] [--repeat 3]

Both paths are called directly, so the ``JOINTCDI_DISABLE_NUMBA`` flag is
irrelevant here. Each kernel runs once before timing to exclude compilation.
"""

import argparse
import time

import numpy as np

from jointcdi import _kernels
from jointcdi.channel import ScenarioConfig, draw_rays, draw_user
from jointcdi.codebooks import rvq_codebook
from jointcdi.geometry import ArrayGeometry


def best_of(fn, args, repeat):
    fn(*args)  # warm-up / JIT
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def per_query(fn):
    # the simulator quantizes one direction at a time against a small codebook
    def run(book, queries):
        return np.array([fn(book, q[None, :])[1][0] for q in queries])
    return run


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--samples", type=int, default=20_000)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()

    if not _kernels.HAVE_NUMBA:
        print("numba not importable; nothing to compare")
        return

    rng = np.random.default_rng(1)
    scen = ScenarioConfig.simplified(20.0)
    user = draw_user(scen, rng)
    g, t, ph = draw_rays(scen, user, rng, args.samples)
    ura = ArrayGeometry.ura(8, 8)
    ucca = ArrayGeometry.ucca(4, 8)
    book = rvq_codebook(64, 10, rng).codewords
    hbar = rng.standard_normal((args.samples // 10, 64)) + 1j * rng.standard_normal((args.samples // 10, 64))
    small = rvq_codebook(16, 8, rng).codewords
    queries = rng.standard_normal((2000, 16)) + 1j * rng.standard_normal((2000, 16))

    cases = [
        ("URA 8x8 synthesis", _kernels.ura_channels_numba, _kernels.ura_channels_numpy,
         (g, t, ph, ura.n_h, ura.n_v, ura.d_h, ura.d_v)),
        ("UCCA 4x8 synthesis", _kernels.ucca_channels_numba, _kernels.ucca_channels_numpy,
         (g, t, ph, np.asarray(ucca.radii), ucca.n_per_ring)),
        ("codebook search 1024x64", _kernels.best_codewords_numba, _kernels.best_codewords_numpy,
         (book, hbar)),
        ("2000 single queries 256x16", per_query(_kernels.best_codewords_numba),
         per_query(_kernels.best_codewords_numpy), (small, queries)),
    ]
    print(f"{'kernel':<26}{'numba s':>10}{'numpy s':>10}{'speedup':>9}  max|diff|")
    for name, f_nb, f_np, fargs in cases:
        t_nb, o_nb = best_of(f_nb, fargs, args.repeat)
        t_np, o_np = best_of(f_np, fargs, args.repeat)
        a = o_nb[1] if isinstance(o_nb, tuple) else o_nb
        b = o_np[1] if isinstance(o_np, tuple) else o_np
        print(f"{name:<26}{t_nb:>10.3f}{t_np:>10.3f}{t_np / t_nb:>8.1f}x  {np.max(np.abs(a - b)):.1e}")


if __name__ == "__main__":
    main()
