"""Acceptance suite: one test per criterion, each with its stated tolerance
and runtime budget. Results are summarised at the end of the pytest run."""
import math
import time

import numpy as np
import pytest

from rotorrouter.abelian import ParticleConfig, deviation_series, stabilize
from rotorrouter.bounds import (
    bound_width, check_hyperbola_bounds, check_linear_bounds, exit_path, pythagorean_check,
    pythagorean_triples, trajectory,
)
from rotorrouter.lattice import DirectionOrdering
from rotorrouter.profiles import axis_profile, fit_root_exponent, ftilde_root
from rotorrouter.rotor1d import (
    Params1D, RecTriple, invariant_g, orbit_arrays, orbit_groups, oracle_sweep,
    reached_from_minimal,
)
from rotorrouter.rotornd import (
    AggregateState, center_of_mass, cocliques, disc_coverage_check, grow, harmonicity_report,
    run_recording,
)
from rotorrouter.words import (
    SturmianParams, exit_word, first_mismatch, sturmian_scan, sturmian_word, subword_complexity,
)

ORIGIN = RecTriple(0, 0, 0)
ORDERINGS = (DirectionOrdering.cyclic(2), DirectionOrdering.axial(2))


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def box_size(xmin, ymax):
    return sum(y - x + 1 for x in range(xmin, 1) for y in range(0, ymax + 1))


@pytest.mark.criterion(1, "oracle equivalence")
def test_criterion_01_oracle_equivalence(record_property):
    with Timer() as t:
        total = 0
        for r in range(1, 6):
            for s in range(1, 6):
                checked, bad = oracle_sweep(-30, 30, Params1D(r, s))
                assert bad == 0, (r, s)
                assert checked == box_size(-30, 30)
                total += checked
    assert t.elapsed < 60
    record_property("detail", f"{total} (triple, r, s) cases, 0 mismatches")


@pytest.mark.criterion(2, "invariant conservation")
def test_criterion_02_invariant(record_property):
    rng = np.random.default_rng(2024)
    steps = 0
    with Timer() as t:
        while steps < 10 ** 5:
            p = Params1D(int(rng.integers(1, 11)), int(rng.integers(1, 11)))
            x = -int(rng.integers(0, 50))
            y = int(rng.integers(0, 50))
            start = RecTriple(x, y, int(rng.integers(x, y + 1)))
            n = 1000
            traj, _ = orbit_arrays(start, p, n)
            g0 = invariant_g(start, p)
            for row in traj.tolist():
                assert invariant_g(RecTriple(*row), p) == g0
            steps += n
    assert t.elapsed < 10
    record_property("detail", f"{steps} steps, g constant on every orbit")


@pytest.mark.criterion(3, "orbit classification")
def test_criterion_03_orbits(record_property):
    groups_checked = 0
    with Timer() as t:
        for rs in ((1, 1), (2, 1), (2, 3)):
            p = Params1D(*rs)
            for members in orbit_groups(40, p).values():
                if len(members) < 2:
                    continue
                _, missing = reached_from_minimal(members, p, 10 ** 4)
                assert not missing, (rs, sorted(missing)[:5])
                groups_checked += 1
    assert t.elapsed < 60
    record_property("detail", f"{groups_checked} multi-member groups fully reached")


@pytest.mark.criterion(4, "Sturmian identity (2,1)")
def test_criterion_04_silver(record_property):
    with Timer() as t:
        p = SturmianParams.silver()
        q = SturmianParams.from_rs(2, 1)
        # same alpha and beta, compared exactly over a common denominator
        assert p.radicand == q.radicand
        assert [v * q.denom for v in (p.a0, p.a1, p.b0, p.b1)] == \
            [v * p.denom for v in (q.a0, q.a1, q.b0, q.b1)]
        w = exit_word(ORIGIN, Params1D(2, 1), 10 ** 6)
        assert first_mismatch(w, sturmian_word(p, 10 ** 6)) is None
    assert t.elapsed < 30
    record_property("detail", "10^6 terms equal")


@pytest.mark.criterion(5, "complexity count (5,1)")
def test_criterion_05_complexity(record_property):
    with Timer() as t:
        count = subword_complexity(exit_word(ORIGIN, Params1D(5, 1), 10 ** 6), 68)
    assert count == 70
    assert t.elapsed < 60
    record_property("detail", f"{count} factors of length 68")


@pytest.mark.criterion(6, "exit path crossings (5,1)")
def test_criterion_06_crossings(record_property):
    with Timer() as t:
        path = exit_path(ORIGIN, Params1D(5, 1), 5000)
        points = [(1, 1), (5, 10), (221, 493), (1513, 3382)]
        for pt in points:
            assert path.contains(pt), pt
    assert t.elapsed < 10
    record_property("detail", "all four points on the path")


@pytest.mark.criterion(7, "linear bounds")
def test_criterion_07_linear_bounds(record_property):
    onsets = {}
    with Timer() as t:
        for rs in ((1, 1), (2, 1), (5, 1), (2, 3)):
            p = Params1D(*rs)
            rep = check_linear_bounds(trajectory(ORIGIN, p, 10 ** 4), 0.1)
            assert rep.ok and rep.violations_after(rep.first_valid_t) == []
            onsets[rs] = rep.first_valid_t
            r, s = rs
            assert abs(bound_width(p, 0.1) - (r * math.sqrt(s) + s * math.sqrt(r) + 0.1)) < 1e-9
    assert t.elapsed < 30
    record_property("detail", "onsets " + ", ".join(f"{k}: t={v}" for k, v in onsets.items()))


@pytest.mark.criterion(8, "hyperbola bounds")
def test_criterion_08_hyperbolas(record_property):
    with Timer() as t:
        for n in range(1, 51):
            assert check_hyperbola_bounds(n, 10 ** 4), n
    assert t.elapsed < 60
    record_property("detail", "n = 1..50, t <= 10^4")


@pytest.mark.criterion(9, "Pythagorean identity")
def test_criterion_09_pythagorean(record_property):
    with Timer() as t:
        triples = list(pythagorean_triples(65))
        for a, n, b in triples:
            assert pythagorean_check(a, n, b), (a, n, b)
    assert {(3, 4, 5), (4, 3, 5), (33, 56, 65), (56, 33, 65)} <= set(triples)
    assert t.elapsed < 60
    record_property("detail", f"{len(triples)} ordered triples")


@pytest.mark.criterion(10, "center of mass")
def test_criterion_10_center_of_mass(record_property):
    m = 10 ** 4
    finals = []
    with Timer() as t:
        for o in ORDERINGS:
            state = AggregateState(o)
            hist = run_recording(state, m)
            pos = [o.position(k) for k in (1, 2)]
            neg = [o.position(-k) for k in (1, 2)]
            bal = hist[:, pos] - hist[:, neg]
            n = np.arange(1, m + 1)
            # coordinate i after n deposits is bal_i / n; compare numerators exactly
            assert (bal >= 0).all() and (bal <= n[:, None]).all()
            for c in cocliques(o):
                assert (bal[:, [k - 1 for k in c]].sum(axis=1) <= n).all()
            com = center_of_mass(state)
            assert all(0 <= v <= 1 for v in com)
            finals.append(f"{o.label}: ({', '.join(str(v) for v in com)})")
    assert t.elapsed < 60
    record_property("detail", "; ".join(finals))


@pytest.mark.criterion(11, "harmonicity")
def test_criterion_11_harmonicity(record_property):
    notes = []
    with Timer() as t:
        for o in ORDERINGS:
            rep = harmonicity_report(grow(10 ** 4, o, method="sequential"))
            assert rep.within_bounds, o.label
            assert rep.origin_relative_error < 0.01, o.label
            notes.append(f"{o.label}: off-origin range [{rep.min_off_origin}, "
                         f"{rep.max_off_origin}], origin rel. error "
                         f"{rep.origin_relative_error:.2e}")
    assert t.elapsed < 60
    record_property("detail", "; ".join(notes))


@pytest.mark.criterion(12, "abelian equality")
def test_criterion_12_abelian(record_property):
    start = ParticleConfig.from_origin(1000, ORDERINGS[0])
    policies = ["queue", "scanline"] + [f"random:{k}" for k in range(18)]
    with Timer() as t:
        ref, fired = stabilize(start.copy(), policies[0])
        for policy in policies[1:]:
            cfg, n = stabilize(start.copy(), policy)
            assert cfg == ref, policy
            assert n == fired and cfg.odometer_map() == ref.odometer_map(), policy
    assert t.elapsed < 60
    record_property("detail", f"{len(policies)} schedules, {fired} firings each")


@pytest.mark.criterion(13, "binomial bound")
def test_criterion_13_binomial(record_property):
    peaks = []
    with Timer() as t:
        for o in ORDERINGS:
            series = deviation_series(10 ** 4, 40, o)
            for n, dev in enumerate(series):
                assert dev <= 3 * n, (o.label, n, dev)
            peaks.append(f"{o.label} max {float(max(series)):.3f}")
    assert t.elapsed < 120
    record_property("detail", ", ".join(peaks))


@pytest.mark.criterion(14, "disc coverage")
def test_criterion_14_disc(record_property):
    notes = []
    with Timer() as t:
        for m, method in ((10 ** 5, "sequential"), (10 ** 6, "odometer")):
            with Timer() as step:
                cov = disc_coverage_check(grow(m, ORDERINGS[0], method=method), 0.1)
            assert cov.all_covered, cov.missing[:5]
            notes.append(f"m={m} ({method}, {step.elapsed:.0f}s) radius {cov.radius:.3f}, "
                         f"inradius margin {cov.margin:.1f}")
    assert step.elapsed < 300
    record_property("detail", "; ".join(notes))


@pytest.mark.criterion(15, "profile roots (soft)")
def test_criterion_15_profiles(record_property):
    with Timer() as t:
        s2 = grow(31415, ORDERINGS[0])
        prof = axis_profile(s2)
        root2 = prof.root()
        fit = fit_root_exponent(prof)
        root3 = axis_profile(grow(14137, DirectionOrdering.cyclic(3))).root()
        lam_axial = fit_root_exponent(axis_profile(grow(31415, ORDERINGS[1]))).lam
    checks = {"2-D root": abs(root2 - 100) <= 5, "3-D root": abs(root3 - 15) <= 2,
              "lambda": 2.0 <= fit.lam <= 2.5 and 2.0 <= lam_axial <= 2.5}
    assert t.elapsed < 600
    # soft criterion: out-of-band values are reported, not failed
    record_property("status", "PASS" if all(checks.values()) else "DISCREPANCY")
    record_property("detail", f"2-D root {root2:g}, 3-D root {root3:g}, lambda {fit.lam:.3f} "
                              f"(axial {lam_axial:.3f}); Ftilde root {ftilde_root(s2):.3g} "
                              f"does not track the H root (normalization, see ledger)")


@pytest.mark.criterion("S", "desk-scale Sturmian scan 30x30, 10^5 terms")
def test_desk_scale_scan(record_property):
    with Timer() as t:
        cells = sturmian_scan(30, 30, 10 ** 5)
    stripe = [c for (r, s), c in cells.items() if -4 <= r - s <= 3]
    assert all(c.match for c in stripe)
    assert all(c.complexity_sturmian for c in stripe if not c.rational)
    for (r, s), c in cells.items():
        if r - s == 4:
            assert c.match == (r % 2 == 0), (r, s)
    above = sorted(k for k, c in cells.items() if k[0] - k[1] < -4 and c.match)
    assert t.elapsed < 600
    record_property("detail", f"{sum(c.match for c in cells.values())}/900 cells match; "
                              f"stripe all match; r-s=4 row matches iff r even; "
                              f"matches with r-s<-4: {above}")
