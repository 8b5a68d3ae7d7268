"""Command-line front end.

Exit codes: 0 success, 1 a checked property failed, 2 usage error,
3 an exit word does not match its floor word.
"""
from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction

import numpy as np

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_MISMATCH = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _int_list(text: str, n: int | None = None) -> list[int]:
    try:
        vals = [int(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"expected {n} integers, got {len(vals)}")
    return vals


def _positive(name: str, v: int, minimum: int = 1):
    if v < minimum:
        raise UsageError(f"--{name} must be >= {minimum}")


def _finish(args, outputs: list, params: dict, t0: float, extra: dict | None = None):
    from .artifacts import write_manifest

    if not outputs:
        return
    target = getattr(args, "manifest", None) or f"{outputs[0]}.manifest.json"
    write_manifest(target, sys.argv if args.argv is None else args.argv, params,
                   outputs, time.perf_counter() - t0, extra)


# ----------------------------------------------------------------- commands


def cmd_sim1d(args) -> int:
    from .artifacts import csv_text, write_csv
    from .rotor1d import Params1D, RecTriple, invariant_g, orbit_arrays

    t0 = time.perf_counter()
    try:
        params = Params1D(args.r, args.s)
        start = RecTriple(*_int_list(args.init, 3)).validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _positive("steps", args.steps, 0)
    traj, bits = orbit_arrays(start, params, args.steps)
    g0 = invariant_g(start, params)
    rows, ok = [], True
    for t in range(args.steps):
        tri = RecTriple(*(int(v) for v in traj[t]))
        g = invariant_g(tri, params)
        ok &= g == g0 and tri.is_valid
        rows.append((t, *tri, g, "+" if bits[t] else "-"))
    header = ["t", "x", "y", "z", "g", "branch"]
    outputs = []
    if args.out:
        outputs.append(str(write_csv(args.out, header, rows)))
    else:
        sys.stdout.write(csv_text(header, rows))
    _finish(args, outputs, {"r": args.r, "s": args.s, "init": list(start), "steps": args.steps}, t0)
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_word(args) -> int:
    from .artifacts import write_csv
    from .rotor1d import Params1D, RecTriple
    from .words import SturmianParams, exit_word, first_mismatch, sturmian_word

    t0 = time.perf_counter()
    try:
        params = Params1D(args.r, args.s)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _positive("length", args.length)
    word = exit_word(RecTriple(0, 0, 0), params, args.length)
    outputs, extra, code = [], {}, EXIT_OK
    if args.out:
        rows = zip(range(word.start_index, word.start_index + len(word)), word.bits.tolist())
        outputs.append(str(write_csv(args.out, ["n", "w"], rows)))
    else:
        print("word", str(word))
    if args.check_sturmian:
        sp = SturmianParams.from_rs(args.r, args.s)
        miss = first_mismatch(word, sturmian_word(sp, args.length))
        sturmian = miss is None and not sp.is_rational
        if sturmian:
            verdict = "sturmian"
        elif miss is None:
            verdict = "mismatch: floor word matches but slope is rational (periodic, not Sturmian)"
        else:
            verdict = f"mismatch: first differing index {miss}"
        print(f"r={args.r} s={args.s} length={args.length} {verdict}")
        extra = {"verdict": "match" if sturmian else "mismatch", "first_mismatch": miss,
                 "rational_slope": sp.is_rational}
        code = EXIT_OK if sturmian else EXIT_MISMATCH
    _finish(args, outputs, {"r": args.r, "s": args.s, "length": args.length,
                            "check_sturmian": args.check_sturmian}, t0, extra)
    return code


def scan_pgm(cells: dict, rmax: int, smax: int) -> np.ndarray:
    """White for a match, black otherwise; r grows rightward, s upward."""
    img = np.zeros((smax, rmax), dtype=np.int64)
    for (r, s), cell in cells.items():
        img[smax - s, r - 1] = 255 if cell.match else 0
    return img


def cmd_scan(args) -> int:
    from .artifacts import csv_text, write_csv, write_pgm
    from .words import sturmian_scan

    t0 = time.perf_counter()
    for name in ("rmax", "smax", "length"):
        _positive(name, getattr(args, name))
    cells = sturmian_scan(args.rmax, args.smax, args.length, threads=args.threads,
                          complexity_max=args.complexity_max if args.detail_csv else 0)
    rows = [(r, s, c.verdict, c.first_mismatch) for (r, s), c in sorted(cells.items())]
    header = ["r", "s", "verdict", "first_mismatch"]
    outputs = []
    if args.csv:
        outputs.append(str(write_csv(args.csv, header, rows)))
    elif not args.pgm:
        sys.stdout.write(csv_text(header, rows))
    if args.pgm:
        outputs.append(str(write_pgm(args.pgm, scan_pgm(cells, args.rmax, args.smax))))
    if args.detail_csv:
        detail = [(r, s, c.verdict, c.first_mismatch, int(c.rational), c.complexity_excess,
                   int(c.complexity_sturmian)) for (r, s), c in sorted(cells.items())]
        outputs.append(str(write_csv(args.detail_csv,
                                     ["r", "s", "verdict", "first_mismatch", "rational",
                                      "first_complexity_excess", "complexity_sturmian"], detail)))
    _finish(args, outputs, {"rmax": args.rmax, "smax": args.smax, "length": args.length}, t0,
            {"matches": sum(c.match for c in cells.values()), "cells": len(cells)})
    return EXIT_OK


def _ordering(text: str | None, dim: int):
    from .lattice import DirectionOrdering

    try:
        if text is None:
            return DirectionOrdering.cyclic(dim)
        if text in ("axial", "cyclic"):
            return DirectionOrdering.named(text, dim)
        ordering = DirectionOrdering.parse(text, dim)
    except ValueError as exc:
        raise UsageError(f"bad ordering {text!r}: {exc}") from None
    return ordering


def region_pgm(state) -> np.ndarray:
    """Occupied sites black on white over the bounding box plus one cell;
    for d > 2 the slice through the origin. Rows run from high y to low y."""
    pts = state.occupied_sites()
    if state.dim > 2:
        pts = pts[np.all(pts[:, 2:] == 0, axis=1)]
    if state.dim == 1:
        pts = np.concatenate([pts, np.zeros((pts.shape[0], 1), dtype=pts.dtype)], axis=1)
    reach = int(np.abs(pts[:, :2]).max()) + 1
    size = 2 * reach + 1
    img = np.full((size, size), 255, dtype=np.int64)
    img[reach - pts[:, 1], pts[:, 0] + reach] = 0
    return img


def simnd_stats(state, epsilon: float) -> tuple[dict, list[str]]:
    """Summary measurements and the list of failed checks."""
    from .rotornd import (center_of_mass, coclique_sums, cocliques, disc_coverage_check,
                          harmonicity_report, radii)

    failures = []
    stats = {"m": state.m, "dimension": state.dim, "ordering": state.ordering.label,
             "cocliques": [list(c) for c in cocliques(state.ordering)]}
    inr, outr = radii(state)
    stats["inradius"], stats["outradius"] = inr, outr
    if state.m >= 1:
        com = center_of_mass(state)
        stats["center_of_mass"] = [str(c) for c in com]
        stats["center_of_mass_float"] = [float(c) for c in com]
        if any(not 0 <= c <= 1 for c in com):
            failures.append("center of mass outside the unit cube")
        sums = coclique_sums(state)
        stats["coclique_sums"] = {",".join(map(str, c)): str(Fraction(v, state.m))
                                  for c, v in sums.items()}
        if any(v > state.m for v in sums.values()):
            failures.append("a coclique sum exceeds 1")
        h = harmonicity_report(state)
        stats["harmonicity"] = {"min_off_origin": str(h.min_off_origin),
                                "max_off_origin": str(h.max_off_origin),
                                "at_origin": str(h.at_origin),
                                "bounds": [str(h.lower_bound), str(h.upper_bound)]}
        if not h.within_bounds:
            failures.append("Laplacian of visit counts out of bounds")
        if state.dim == 2:
            cov = disc_coverage_check(state, epsilon)
            stats["disc_coverage"] = {"epsilon": epsilon, "radius": cov.radius,
                                      "all_covered": cov.all_covered,
                                      "missing": [list(p) for p in cov.missing],
                                      "margin": cov.margin}
            if not cov.all_covered:
                failures.append("disc not covered")
    stats["failures"] = failures
    return stats, failures


def cmd_simnd(args) -> int:
    from .artifacts import csv_text, write_csv, write_json, write_pgm
    from .profiles import axis_profile
    from .rotornd import grow

    t0 = time.perf_counter()
    _positive("dim", args.dim)
    _positive("particles", args.particles, 0)
    if not args.epsilon > 0:
        raise UsageError("--epsilon must be positive")
    ordering = _ordering(args.ordering, args.dim)
    state = grow(args.particles, ordering, method=args.method)
    stats, failures = simnd_stats(state, args.epsilon)
    outputs = []
    if args.region_pgm:
        outputs.append(str(write_pgm(args.region_pgm, region_pgm(state))))
    if args.profile_csv and state.m >= 1:
        prof = axis_profile(state)
        outputs.append(str(write_csv(args.profile_csv, ["r", "H"],
                                     zip(prof.r.astype(int).tolist(), prof.values.tolist()))))
    if args.stats_json:
        outputs.append(str(write_json(args.stats_json, stats)))
    if not outputs:
        import json
        sys.stdout.write(json.dumps(stats, sort_keys=True, indent=2) + "\n")
    _finish(args, outputs, {"dim": args.dim, "ordering": ordering.label,
                            "particles": args.particles, "epsilon": args.epsilon,
                            "method": args.method}, t0)
    for f in failures:
        print("violation:", f, file=sys.stderr)
    return EXIT_VIOLATION if failures else EXIT_OK


def schedule_names(k: int, seed: int) -> list[str]:
    """queue, scanline, then random schedules seeded seed, seed+1, ..."""
    base = ["queue", "scanline"]
    return (base + [f"random:{seed + i}" for i in range(max(0, k - 2))])[:k]


def cmd_abelian(args) -> int:
    from .abelian import ParticleConfig, deviation_series, stabilize
    from .artifacts import csv_text, write_csv

    t0 = time.perf_counter()
    _positive("particles", args.particles)
    _positive("rounds", args.rounds, 0)
    _positive("schedules", args.schedules, 0)
    ordering = _ordering(args.ordering, 2)
    failures = []
    start = ParticleConfig.from_origin(args.particles, ordering)
    reference = None
    for name in schedule_names(args.schedules, args.seed):
        cfg, fired = stabilize(start.copy(), name)
        result = (cfg.snapshot(), cfg.odometer_map(), fired)
        if reference is None:
            reference = result
        elif result != reference:
            failures.append(f"schedule {name} disagrees")
    series = deviation_series(args.particles, args.rounds, ordering, workers=args.threads)
    rows = [(n, dev, 3 * n) for n, dev in enumerate(series)]
    failures += [f"round {n}: deviation {float(dev)} > {3 * n}" for n, dev, _ in rows if dev > 3 * n]
    header = ["n", "max_dev", "bound"]
    outputs = []
    if args.out:
        outputs.append(str(write_csv(args.out, header, rows)))
    else:
        sys.stdout.write(csv_text(header, rows))
    _finish(args, outputs, {"particles": args.particles, "rounds": args.rounds,
                            "schedules": args.schedules, "seed": args.seed,
                            "ordering": ordering.label}, t0,
            {"schedules_agree": not any("schedule" in f for f in failures),
             "firings": reference[2] if reference else None})
    for f in failures:
        print("violation:", f, file=sys.stderr)
    return EXIT_VIOLATION if failures else EXIT_OK


def cmd_green(args) -> int:
    from .artifacts import csv_text, write_csv
    from .profiles import (FIT_WINDOW, axis_profile, fit_root_exponent, ftilde_root,
                           green_compare, profile3d)
    from .rotornd import grow

    t0 = time.perf_counter()
    _positive("m", args.m)
    if args.dim not in (2, 3):
        raise UsageError("--dim must be 2 or 3")
    ordering = _ordering(args.ordering, args.dim)
    state = grow(args.m, ordering)
    extra = {"ordering": ordering.label}
    prof = axis_profile(state)
    extra["root"] = prof.root()
    if args.dim == 2:
        header, rows = ["r", "H", "F", "Ftilde"], green_compare(state)
        extra["ftilde_root"] = ftilde_root(state)
    else:
        header, rows = ["r", "H", "m_over_r"], profile3d(state)
    if args.fit:
        fit = fit_root_exponent(prof)
        extra["fit"] = {"r0": fit.r0, "lambda": fit.lam, "window": list(fit.window),
                        "window_fractions": list(FIT_WINDOW), "residual": fit.residual,
                        "samples": fit.n_samples}
        print(f"root {fit.r0} lambda {fit.lam!r}")
    outputs = []
    if args.out:
        outputs.append(str(write_csv(args.out, header, rows)))
    else:
        sys.stdout.write(csv_text(header, rows))
    _finish(args, outputs, {"m": args.m, "dim": args.dim, "fit": args.fit}, t0, extra)
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rotorrouter", description=__doc__.splitlines()[0])
    p.add_argument("--threads", type=int, default=1, help="worker cap for scans and rounds")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--manifest", help="manifest path (default: first output + .manifest.json)")

    sp = sub.add_parser("sim1d", help="iterate the 1-D map and tabulate the orbit")
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--s", type=int, required=True)
    sp.add_argument("--init", default="0,0,0", help="starting triple x,y,z")
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--out")
    common(sp)
    sp.set_defaults(func=cmd_sim1d)

    sp = sub.add_parser("word", help="exit word of (0,0,0), optionally checked against its floor word")
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--s", type=int, required=True)
    sp.add_argument("--length", type=int, required=True)
    sp.add_argument("--check-sturmian", action="store_true")
    sp.add_argument("--out")
    common(sp)
    sp.set_defaults(func=cmd_word)

    sp = sub.add_parser("scan", help="compare exit words with floor words over an (r,s) grid")
    sp.add_argument("--rmax", type=int, required=True)
    sp.add_argument("--smax", type=int, required=True)
    sp.add_argument("--length", type=int, default=100_000)
    sp.add_argument("--csv")
    sp.add_argument("--pgm")
    sp.add_argument("--detail-csv", help="also write rationality and factor-count columns")
    sp.add_argument("--complexity-max", type=int, default=30)
    common(sp)
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("simnd", help="grow an aggregate in d dimensions")
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--ordering", help='signed axes, e.g. "1,2,-1,-2" (default: cyclic)')
    sp.add_argument("--particles", type=int, required=True)
    sp.add_argument("--epsilon", type=float, default=0.1)
    sp.add_argument("--method", choices=["auto", "sequential", "odometer"], default="auto")
    sp.add_argument("--region-pgm")
    sp.add_argument("--profile-csv")
    sp.add_argument("--stats-json")
    common(sp)
    sp.set_defaults(func=cmd_simnd)

    sp = sub.add_parser("abelian", help="schedule independence and the binomial deviation bound")
    sp.add_argument("--particles", type=int, default=1000)
    sp.add_argument("--rounds", type=int, default=40)
    sp.add_argument("--schedules", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--ordering", help="signed axes for d = 2 (default: cyclic)")
    sp.add_argument("--out")
    common(sp)
    sp.set_defaults(func=cmd_abelian)

    sp = sub.add_parser("green", help="axis profile against the Green's function")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--ordering")
    sp.add_argument("--fit", action="store_true")
    sp.add_argument("--out")
    common(sp)
    sp.set_defaults(func=cmd_green)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    args.argv = None if argv is None else ["rotorrouter", *argv]
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
