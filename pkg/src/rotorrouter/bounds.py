"""Trajectory bounds for the 1-D model: exit paths, linear bounds on
x*sqrt(s) + y*sqrt(r), hyperbola bounds and the Pythagorean endpoints."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .rotor1d import Params1D, RecTriple, orbit_arrays

PRECISION_BITS = 128


@dataclass
class ExitPath:
    """points[k] = (left exits, right exits) after k+1 particles."""

    points: np.ndarray

    def __len__(self):
        return self.points.shape[0]

    def contains(self, point) -> bool:
        if len(self) == 0:
            return False
        left, right = point
        return bool(np.any((self.points[:, 0] == left) & (self.points[:, 1] == right)))

    def steps_valid(self) -> bool:
        """Each point adds exactly one exit to the previous one."""
        full = np.vstack([np.zeros((1, 2), dtype=np.int64), self.points])
        d = np.diff(full, axis=0)
        return bool(np.all((d.sum(axis=1) == 1) & (d.min(axis=1) == 0)))


@dataclass
class Trajectory1D:
    """triples[t] is the state after t particles; bits[t] is 1 for an f^+ step out of it."""

    triples: np.ndarray
    params: Params1D
    bits: np.ndarray

    def __len__(self):
        return self.triples.shape[0]

    def __getitem__(self, t) -> RecTriple:
        return RecTriple(*(int(v) for v in self.triples[t]))


def trajectory(t0: RecTriple, params: Params1D, n_steps: int) -> Trajectory1D:
    triples, bits = orbit_arrays(RecTriple(*t0), params, n_steps)
    return Trajectory1D(triples, params, bits)


def exit_path(t0: RecTriple, params: Params1D, n_particles: int) -> ExitPath:
    if n_particles < 0:
        raise ValueError("n_particles must be >= 0")
    if n_particles == 0:
        return ExitPath(np.zeros((0, 2), dtype=np.int64))
    _, bits = orbit_arrays(RecTriple(*t0), params, n_particles)
    right = np.cumsum(bits, dtype=np.int64)
    left = np.arange(1, n_particles + 1, dtype=np.int64) - right
    return ExitPath(np.stack([left, right], axis=1))


# ------------------------------------------------------------ linear bounds


@dataclass
class LinearBoundsReport:
    lower: float
    upper: float
    width: float
    first_valid_t: int
    violations: list = field(default_factory=list)      # (t, mu) strictly outside
    indeterminate: list = field(default_factory=list)   # (t, mu) within rounding of a bound
    n_checked: int = 0

    def violations_after(self, t: int) -> list:
        return [v for v in self.violations if v[0] >= t]

    @property
    def ok(self) -> bool:
        """No violation at or after the onset (vacuous unless the onset is inside the run)."""
        return self.first_valid_t < self.n_checked


def linear_bound_limits(params: Params1D, epsilon: float):
    """(lower, upper) for x*sqrt(s) + y*sqrt(r) as mpf values.

    These are the bounds reached at the end of the boundedness proof:
    lower = -((r-2)sqrt(s) + s sqrt(r) + eps)/2, upper = ((r+2)sqrt(s) + s sqrt(r) + eps)/2.
    """
    r, s = params.r, params.s
    with mpmath.workprec(PRECISION_BITS):
        rs, rr = mpmath.sqrt(s), mpmath.sqrt(r)
        eps = mpmath.mpf(epsilon)
        lower = -((r - 2) * rs + s * rr + eps) / 2
        upper = ((r + 2) * rs + s * rr + eps) / 2
    return lower, upper


def check_linear_bounds(traj: Trajectory1D, epsilon: float) -> LinearBoundsReport:
    """Check lower < mu(t) < upper for every t; report the onset after which
    no violation occurs. Values within the accumulated rounding error of a
    bound are listed as indeterminate and do not count as violations."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    p = traj.params
    lower, upper = linear_bound_limits(p, epsilon)
    violations, unclear = [], []
    with mpmath.workprec(PRECISION_BITS):
        rs, rr = mpmath.sqrt(p.s), mpmath.sqrt(p.r)
        ulp = mpmath.ldexp(1, -PRECISION_BITS + 4)
        bound_err = (abs(lower) + abs(upper) + 1) * ulp
        for t, (x, y, _) in enumerate(traj.triples.tolist()):
            mu = x * rs + y * rr
            err = (abs(x) * rs + abs(y) * rr + 1) * ulp + bound_err
            if mu - lower > err and upper - mu > err:
                continue
            if lower - mu > err or mu - upper > err:
                violations.append((t, float(mu)))
            else:
                unclear.append((t, float(mu)))
    onset = violations[-1][0] + 1 if violations else 0
    return LinearBoundsReport(float(lower), float(upper), float(upper - lower), onset,
                              violations, unclear, len(traj))


def bound_width(params: Params1D, epsilon: float) -> float:
    lower, upper = linear_bound_limits(params, epsilon)
    return float(upper - lower)


# --------------------------------------------------------- r = s = 1 results


def hyperbola_violations(n: int, n_steps: int) -> np.ndarray:
    """Times t <= n_steps at which the orbit of (-n, 0, 0) breaks
    x^2 - y^2 < n^2 + n or (x-1)^2 - (y-1)^2 > n^2."""
    if n < 1:
        raise ValueError("n must be >= 1")
    traj, _ = orbit_arrays(RecTriple(-n, 0, 0), Params1D(1, 1), n_steps)
    x, y = traj[:, 0], traj[:, 1]
    upper_ok = x * x - y * y < n * n + n
    lower_ok = (x - 1) ** 2 - (y - 1) ** 2 > n * n
    return np.flatnonzero(~(upper_ok & lower_ok))


def check_hyperbola_bounds(n: int, n_steps: int) -> bool:
    return hyperbola_violations(n, n_steps).shape[0] == 0


def pythagorean_check(a: int, n: int, b: int) -> bool:
    """From (-n, 0, 0) with r = s = 1, after a+b-n particles x = -b and y = a."""
    if min(a, n, b) < 1 or a * a + n * n != b * b:
        raise ValueError(f"({a}, {n}, {b}) is not a Pythagorean triple")
    traj, _ = orbit_arrays(RecTriple(-n, 0, 0), Params1D(1, 1), a + b - n)
    x, y, _ = traj[-1]
    return int(x) == -b and int(y) == a


def pythagorean_triples(b_max: int):
    """All (a, n, b) with a^2 + n^2 = b^2, all positive, b <= b_max; both orders of (a, n)."""
    for b in range(1, b_max + 1):
        for a in range(1, b):
            n2 = b * b - a * a
            n = math.isqrt(n2)
            if n * n == n2:
                yield a, n, b
