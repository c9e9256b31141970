"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--paths 1000] [--horizon 500]
"""

import argparse
import timeit

import numpy as np

from maxjump import _pykernels
from maxjump import fixtures as fx

try:
    from maxjump import _ckernels
except ImportError:
    _ckernels = None


def cases(paths, horizon):
    sys, chain = fx.production(with_io=False)
    rng = np.random.default_rng(0)
    cum = chain.cumulative()
    uniforms = rng.random(horizon * 20)
    modes = rng.integers(0, sys.M, (paths, horizon + 1)).astype(np.int64)
    x0 = np.zeros((paths, sys.n))
    ksys, kchain = fx.kstep_example()
    P = rng.uniform(0.5, 2, (ksys.M, ksys.n))
    mA = rng.uniform(0, 1, (3, 3, 3))
    mc = np.full((3, 3), 1 / 3)
    mP = rng.uniform(0.5, 2, (3, 3))
    return {
        f"sample_chain ({len(uniforms)} steps)": lambda k: k.sample_chain(cum, uniforms, 0),
        f"propagate max-plus ({paths} x {horizon})": lambda k: k.propagate(sys._A, modes, x0, None, True),
        "kstep_deltas M=2 n=2 k0=2 (x200)": lambda k: [k.kstep_deltas(ksys._A, kchain.c, P, 2) for _ in range(200)],
        "kstep_deltas M=3 n=3 k0=6": lambda k: k.kstep_deltas(mA, mc, mP, 6),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--paths", type=int, default=1000)
    ap.add_argument("--horizon", type=int, default=500)
    args = ap.parse_args()

    backends = {"python": _pykernels}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    else:
        print("compiled extension not built; timing the fallback only")

    print(f"{'kernel':<42} " + " ".join(f"{b:>12}" for b in backends) + "   speedup")
    for name, fn in cases(args.paths, args.horizon).items():
        times = {b: min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat)) for b, k in backends.items()}
        row = f"{name:<42} " + " ".join(f"{t * 1e3:>10.2f}ms" for t in times.values())
        if "cython" in times:
            row += f"   {times['python'] / times['cython']:.1f}x"
        print(row)


if __name__ == "__main__":
    main()
