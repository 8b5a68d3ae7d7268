"""Rotor-router aggregation on Z^d and the measurements taken on it.

Each particle starts at the origin, and at every occupied site steps in
the rotor's direction and then advances the rotor. The first unoccupied
site it reaches becomes occupied with its rotor at ordering position 0.
``visits`` counts arrivals at each site, including the placement at the
origin and the final arrival at the settling site.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Mapping

import numpy as np

from . import kernels
from .lattice import DirectionOrdering, Grid

DEFAULT_STEP_CAP = 10 ** 9
_MARGIN = 2
# above this many particles ``grow`` switches to the odometer method
ODOMETER_THRESHOLD = 50_000

__all__ = [
    "AggregateState", "DirectionOrdering", "deposit", "run", "run_recording", "grow",
    "center_of_mass", "cocliques", "coclique_sums", "discrete_laplacian",
    "harmonicity_report", "disc_radius", "disc_coverage_check", "radii",
]


class AggregateState:
    """Occupied set, rotors, visit counts and direction totals on a dense grid.

    The grid is a cube around the origin that is enlarged whenever a
    particle settles within two cells of its edge.
    """

    def __init__(self, ordering: DirectionOrdering, half: int = 8):
        self.ordering = ordering
        self.grid = Grid(ordering.dim, half)
        self.occ = np.zeros(self.grid.size, dtype=np.uint8)
        self.rot = np.zeros(self.grid.size, dtype=np.int64)
        self.visits = np.zeros(self.grid.size, dtype=np.int64)
        self.totals = np.zeros(ordering.size, dtype=np.int64)
        self.m = 0
        self.occ[self.grid.origin] = 1
        self._refresh()

    @classmethod
    def fresh(cls, ordering: DirectionOrdering | str = "cyclic", dim: int = 2) -> "AggregateState":
        if isinstance(ordering, str):
            ordering = DirectionOrdering.named(ordering, dim)
        return cls(ordering)

    @property
    def dim(self) -> int:
        return self.ordering.dim

    def _refresh(self):
        self.offsets = self.grid.offsets(self.ordering)
        self.margin = self.grid.margin(_MARGIN)

    def enlarge(self, new_half: int) -> None:
        target = self.grid.enlarged(new_half)
        if target.half == self.grid.half:
            return
        for name in ("occ", "rot", "visits"):
            setattr(self, name, self.grid.embed(getattr(self, name), target))
        self.grid = target
        self._refresh()

    def _grow_for(self, extra: int) -> None:
        """Enlarge ahead of ``extra`` more particles (ball-volume estimate)."""
        need = radius_for(self.m + extra + 1, self.dim) * 1.2 + 4 + _MARGIN
        if need > self.grid.half:
            self.enlarge(int(math.ceil(need)))

    def copy(self) -> "AggregateState":
        other = AggregateState.__new__(AggregateState)
        other.ordering = self.ordering
        other.grid = self.grid
        other.occ = self.occ.copy()
        other.rot = self.rot.copy()
        other.visits = self.visits.copy()
        other.totals = self.totals.copy()
        other.m = self.m
        other._refresh()
        return other

    # ---- sparse views
    def occupied_sites(self) -> np.ndarray:
        return self.grid.coords(np.flatnonzero(self.occ))

    def occupied_set(self) -> set:
        return {tuple(p) for p in self.occupied_sites().tolist()}

    def is_occupied(self, point) -> bool:
        return self.grid.contains(point) and bool(self.occ[self.grid.index(point)])

    def rotor_at(self, point) -> int:
        """Ordering position the rotor at ``point`` points to."""
        if not self.is_occupied(point):
            raise KeyError(f"{tuple(point)} is not occupied")
        return int(self.rot[self.grid.index(point)])

    def visits_at(self, point) -> int:
        if not self.grid.contains(point):
            return 0
        return int(self.visits[self.grid.index(point)])

    def visits_map(self) -> dict:
        idx = np.flatnonzero(self.visits)
        return {tuple(p): int(v) for p, v in zip(self.grid.coords(idx).tolist(), self.visits[idx])}

    def direction_totals(self) -> dict:
        """Steps taken in each direction, keyed by signed axis token."""
        return {tok: int(self.totals[i]) for i, tok in enumerate(self.ordering.order)}

    def total_steps(self) -> int:
        return int(self.totals.sum())

    def axis_balance(self) -> list[int]:
        """T(e_i) - T(-e_i) for i = 1..d."""
        t = self.direction_totals()
        return [t[i] - t[-i] for i in range(1, self.dim + 1)]

    def snapshot(self) -> dict:
        """Grid-independent content, for equality checks."""
        idx = np.flatnonzero(self.occ | (self.visits > 0))
        pts = [tuple(p) for p in self.grid.coords(idx).tolist()]
        return {
            "m": self.m,
            "ordering": self.ordering.order,
            "totals": tuple(int(v) for v in self.totals),
            "sites": dict(zip(pts, zip(self.occ[idx].tolist(), self.rot[idx].tolist(),
                                       self.visits[idx].tolist()))),
        }

    def __eq__(self, other):
        if not isinstance(other, AggregateState):
            return NotImplemented
        return self.snapshot() == other.snapshot()

    def __repr__(self):
        return f"AggregateState(dim={self.dim}, ordering={self.ordering.label}, m={self.m})"


def radius_for(volume: float, dim: int) -> float:
    """Radius of the d-ball of the given volume."""
    unit = math.pi ** (dim / 2) / math.gamma(dim / 2 + 1)
    return (volume / unit) ** (1.0 / dim)


def _deposit_many(state: AggregateState, n: int, history: np.ndarray | None,
                  cap: int) -> np.ndarray:
    settled = np.empty(max(n, 0), dtype=np.int64)
    coords = np.empty((max(n, 0), state.dim), dtype=np.int64)
    done = 0
    empty_hist = np.zeros((0, state.ordering.size), dtype=np.int64)
    state._grow_for(n)
    while done < n:
        hist = empty_hist if history is None else history[done:]
        k = kernels.deposit_run(state.occ, state.rot, state.visits, state.offsets,
                                state.grid.origin, state.margin, n - done, state.totals,
                                hist, settled[done:], cap)
        if k < 0:
            raise RuntimeError(f"a particle walk exceeded {cap} steps")
        coords[done:done + k] = state.grid.coords(settled[done:done + k])
        done += k
        state.m += k
        if done < n:
            state.enlarge(int(state.grid.half * 1.5) + 4)
    return coords


def deposit(state: AggregateState, cap: int = DEFAULT_STEP_CAP) -> tuple:
    """Add one particle at the origin; returns the site where it settles."""
    return tuple(int(c) for c in _deposit_many(state, 1, None, cap)[0])


def run(state: AggregateState, m_particles: int, cap: int = DEFAULT_STEP_CAP) -> AggregateState:
    """Deposit ``m_particles`` particles in turn (in place; also returned)."""
    if m_particles < 0:
        raise ValueError("m_particles must be >= 0")
    if m_particles:
        _deposit_many(state, m_particles, None, cap)
    return state


def run_recording(state: AggregateState, m_particles: int,
                  cap: int = DEFAULT_STEP_CAP) -> np.ndarray:
    """Like ``run``; returns the direction totals after each deposit,
    shape (m_particles, 2d), columns in ordering position order."""
    history = np.zeros((m_particles, state.ordering.size), dtype=np.int64)
    if m_particles:
        _deposit_many(state, m_particles, history, cap)
    return history


def grow(m: int, ordering: DirectionOrdering | str = "cyclic", dim: int = 2,
         method: str = "auto") -> AggregateState:
    """The aggregate of m particles from the single-site start.

    ``sequential`` walks every particle. ``odometer`` computes the same
    state through the abelian property and certifies it (see
    ``abelian.odometer_aggregate``). ``auto`` picks by size.
    """
    if isinstance(ordering, str):
        ordering = DirectionOrdering.named(ordering, dim)
    if method == "auto":
        method = "odometer" if m >= ODOMETER_THRESHOLD else "sequential"
    if method == "sequential":
        return run(AggregateState(ordering), m)
    if method == "odometer":
        from .abelian import odometer_aggregate
        return odometer_aggregate(m, ordering).state
    raise ValueError(f"unknown method {method!r}")


# ------------------------------------------------------------ measurements


def center_of_mass(state: AggregateState) -> tuple:
    """((T(e_i) - T(-e_i)) / m)_i as exact fractions."""
    if state.m < 1:
        raise ValueError("center of mass needs m >= 1")
    return tuple(Fraction(v, state.m) for v in state.axis_balance())


def coclique_intervals(ordering: DirectionOrdering) -> list[frozenset]:
    """For each axis i, the directions strictly after e_i up to and including -e_i."""
    out = []
    for i in range(1, ordering.dim + 1):
        lo, hi = ordering.position(i), ordering.position(-i)
        out.append(frozenset(ordering.order[lo + 1:hi + 1]))
    return out


def cocliques(ordering: DirectionOrdering) -> list[tuple]:
    """All maximal sets of axes whose intervals are pairwise disjoint."""
    iv = coclique_intervals(ordering)
    d = ordering.dim
    ok = []
    for size in range(d, 0, -1):
        for combo in combinations(range(1, d + 1), size):
            if any(set(combo) < set(c) for c in ok):
                continue
            if all(not (iv[a - 1] & iv[b - 1]) for a, b in combinations(combo, 2)):
                ok.append(combo)
    return sorted(ok)


def coclique_sums(state: AggregateState) -> dict:
    """sum over C of (T(e_i) - T(-e_i)), for each maximal coclique C."""
    bal = state.axis_balance()
    return {c: sum(bal[i - 1] for i in c) for c in cocliques(state.ordering)}


def discrete_laplacian(field: Mapping, x, dim: int | None = None):
    """(1/2d) * sum of field over the 2d neighbours of x, minus field(x).

    Missing sites read 0. Integer or Fraction inputs give an exact Fraction.
    """
    x = tuple(int(c) for c in x)
    d = dim or len(x)
    total = 0
    for k in range(d):
        for sgn in (1, -1):
            nb = list(x)
            nb[k] += sgn
            total += field.get(tuple(nb), 0)
    centre = field.get(x, 0)
    if isinstance(total, float) or isinstance(centre, float):
        return total / (2 * d) - centre
    return Fraction(total, 2 * d) - centre


def _laplacian_times_2d(grid: Grid, values: np.ndarray) -> np.ndarray:
    """sum over neighbours minus 2d times the value, flat int64."""
    out = -2 * grid.dim * values
    for k in range(1, grid.dim + 1):
        grid.shift_add(out, values, k)
        grid.shift_add(out, values, -k)
    return out


@dataclass
class HarmonicityReport:
    min_off_origin: Fraction
    max_off_origin: Fraction
    at_origin: Fraction
    lower_bound: Fraction
    upper_bound: Fraction
    m: int

    @property
    def within_bounds(self) -> bool:
        return self.lower_bound <= self.min_off_origin and self.max_off_origin <= self.upper_bound

    @property
    def origin_relative_error(self) -> float:
        return float(abs(self.at_origin + self.m) / self.m)


def harmonicity_report(state: AggregateState) -> HarmonicityReport:
    """Extremes of the Laplacian of the visit counts away from the origin,
    and its value at the origin, as exact fractions."""
    if state.m < 1:
        raise ValueError("needs m >= 1")
    g, d = state.grid, state.dim
    lap = _laplacian_times_2d(g, state.visits)
    support = state.visits > 0
    near = support.copy()
    for k in range(1, d + 1):
        for sgn in (1, -1):
            g.shift_add(near, support, sgn * k)
    near[g.origin] = False
    vals = lap[near]
    return HarmonicityReport(
        Fraction(int(vals.min()), 2 * d), Fraction(int(vals.max()), 2 * d),
        Fraction(int(lap[g.origin]), 2 * d),
        Fraction(-d) + Fraction(3, 2) - Fraction(1, 2 * d), Fraction(d) + Fraction(1, 2),
        state.m)


def radii(state: AggregateState) -> tuple[float, float]:
    """(inradius, outradius): distance to the nearest unoccupied site and to
    the farthest occupied one."""
    n2 = state.grid.norms_sq()
    occ = state.occ.astype(bool)
    return math.sqrt(int(n2[~occ].min())), math.sqrt(int(n2[occ].max()))


def disc_radius(m: int, epsilon: float) -> float:
    return (8 * m / (3 * math.exp(6 + epsilon))) ** 0.25


@dataclass
class DiscCoverage:
    radius: float
    all_covered: bool
    missing: list
    margin: float  # inradius - radius; positive means room to spare


def disc_coverage_check(state: AggregateState, epsilon: float = 0.1) -> DiscCoverage:
    if state.dim != 2:
        raise ValueError("disc coverage is defined for d = 2")
    if state.m < 1:
        raise ValueError("needs m >= 1")
    r0 = disc_radius(state.m, epsilon)
    n2 = state.grid.norms_sq()
    inside = n2 < r0 * r0
    miss = np.flatnonzero(inside & (state.occ == 0))
    missing = [tuple(p) for p in state.grid.coords(miss).tolist()]
    inr, _ = radii(state)
    return DiscCoverage(r0, not missing, missing, inr - r0)
