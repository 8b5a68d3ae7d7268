"""Time the hot kernels with numba and with the pure-Python fallback.

Each backend runs in its own interpreter because the choice is made when
rotorrouter.kernels is imported. The numba column excludes compile time
(one warm-up call per workload).

    python benchmarks/bench_kernels.py [--scale 1.0] [--skip-python]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import rotorrouter
from rotorrouter.abelian import ParticleConfig, stabilize
from rotorrouter.lattice import DirectionOrdering
from rotorrouter.rotor1d import Params1D, RecTriple, oracle_sweep, orbit_arrays
from rotorrouter.rotornd import grow
from rotorrouter.words import SturmianParams, exit_word, sturmian_word, subword_complexity

scale = float(sys.argv[1])
o = DirectionOrdering.cyclic(2)
n = lambda k: max(1, int(k * scale))
work = {
    "orbit (5,1)": lambda: orbit_arrays(RecTriple(0, 0, 0), Params1D(5, 1), n(200_000)),
    "oracle sweep box 12": lambda: oracle_sweep(-12, 12, Params1D(3, 2)),
    "floor word": lambda: sturmian_word(SturmianParams.from_rs(7, 3), n(200_000)),
    "factor count n=20": lambda: subword_complexity(
        exit_word(RecTriple(0, 0, 0), Params1D(5, 1), n(100_000)), 20),
    "aggregate deposits": lambda: grow(n(2_000), o, method="sequential"),
    "stabilize queue": lambda: stabilize(ParticleConfig.from_origin(n(1_000), o)),
}
out = {"backend": rotorrouter.backend(), "seconds": {}}
for name, fn in work.items():
    fn()
    t0 = time.perf_counter()
    fn()
    out["seconds"][name] = time.perf_counter() - t0
print(json.dumps(out))
"""


def run(scale: float, no_numba: bool) -> dict:
    env = dict(os.environ)
    env.pop("ROTORROUTER_NO_NUMBA", None)
    if no_numba:
        env["ROTORROUTER_NO_NUMBA"] = "1"
    res = subprocess.run([sys.executable, "-c", WORKER, str(scale)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", type=float, default=1.0, help="multiply workload sizes")
    ap.add_argument("--skip-python", action="store_true", help="time only the numba path")
    args = ap.parse_args(argv)

    fast = run(args.scale, False)
    slow = None if args.skip_python else run(args.scale, True)
    print(f"{'workload':<22}{fast['backend']:>12}" + ("" if slow is None else f"{'python':>12}{'ratio':>10}"))
    for name, t in fast["seconds"].items():
        line = f"{name:<22}{t:>12.4f}"
        if slow is not None:
            ts = slow["seconds"][name]
            line += f"{ts:>12.4f}{ts / t if t > 0 else float('inf'):>10.1f}"
        print(line)


if __name__ == "__main__":
    main()
