"""Many particles at once: legal firings, stabilization under different
schedules, synchronous rounds, the binomial comparison, and the fast
exact route to large aggregates through the odometer.

A site holding two or more particles may fire: one particle moves in the
direction of the site's rotor and the rotor advances. Starting from m+1
particles at the origin with every rotor at position 0, the stable
configuration occupies exactly the aggregate of m single-particle
deposits, and the per-site firing counts (the odometer) determine its
rotors and visit counts.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .kernels import CAP_EXCEEDED, DONE, NEEDS_GROW, NEEDS_RANDOM
from .lattice import DirectionOrdering, Grid
from .rotornd import AggregateState, radius_for

DEFAULT_FIRING_CAP = 10 ** 10
_MARGIN = 2
_RANDOM_CHUNK = 1 << 20


class IllegalFiring(ValueError):
    """Firing a site that holds fewer than two particles."""


class ParticleConfig:
    """Particle counts and rotors on a dense grid around the origin."""

    def __init__(self, ordering: DirectionOrdering, half: int = 4):
        self.ordering = ordering
        self.grid = Grid(ordering.dim, half)
        self.counts = np.zeros(self.grid.size, dtype=np.int64)
        self.rotors = np.zeros(self.grid.size, dtype=np.int64)
        self.odometer = np.zeros(self.grid.size, dtype=np.int64)
        self._refresh()

    def _refresh(self):
        self.offsets = self.grid.offsets(self.ordering)
        self.margin = self.grid.margin(_MARGIN)

    @classmethod
    def from_origin(cls, m: int, ordering: DirectionOrdering | str = "cyclic",
                    dim: int = 2) -> "ParticleConfig":
        if isinstance(ordering, str):
            ordering = DirectionOrdering.named(ordering, dim)
        if m < 0:
            raise ValueError("particle count must be >= 0")
        cfg = cls(ordering, int(radius_for(max(m, 1), ordering.dim)) + 2 * _MARGIN + 2)
        cfg.counts[cfg.grid.origin] = m
        return cfg

    @classmethod
    def from_sites(cls, counts: dict, ordering: DirectionOrdering,
                   rotors: dict | None = None) -> "ParticleConfig":
        pts = list(counts) + list(rotors or {})
        reach = max([max(abs(c) for c in p) for p in pts] + [0])
        total = sum(counts.values())
        cfg = cls(ordering, reach + int(radius_for(max(total, 1), ordering.dim)) + 2 * _MARGIN + 2)
        for p, v in counts.items():
            if v < 0:
                raise ValueError("particle counts must be >= 0")
            cfg.counts[cfg.grid.index(p)] = v
        for p, v in (rotors or {}).items():
            cfg.rotors[cfg.grid.index(p)] = v % ordering.size
        return cfg

    def copy(self) -> "ParticleConfig":
        other = ParticleConfig.__new__(ParticleConfig)
        other.ordering = self.ordering
        other.grid = self.grid
        other.counts = self.counts.copy()
        other.rotors = self.rotors.copy()
        other.odometer = self.odometer.copy()
        other._refresh()
        return other

    def enlarge(self, new_half: int) -> None:
        target = self.grid.enlarged(new_half)
        if target.half == self.grid.half:
            return
        self.counts = self.grid.embed(self.counts, target)
        self.rotors = self.grid.embed(self.rotors, target)
        self.odometer = self.grid.embed(self.odometer, target)
        self.grid = target
        self._refresh()

    def _enlarge_step(self):
        self.enlarge(int(self.grid.half * 1.5) + 4)

    def total(self) -> int:
        return int(self.counts.sum())

    def count_at(self, point) -> int:
        return int(self.counts[self.grid.index(point)]) if self.grid.contains(point) else 0

    def rotor_at(self, point) -> int:
        return int(self.rotors[self.grid.index(point)]) if self.grid.contains(point) else 0

    def is_stable(self) -> bool:
        return bool(self.counts.max() <= 1)

    def counts_map(self) -> dict:
        idx = np.flatnonzero(self.counts)
        return {tuple(p): int(v) for p, v in zip(self.grid.coords(idx).tolist(), self.counts[idx])}

    def rotors_map(self) -> dict:
        """Rotor positions that differ from the initial 0."""
        idx = np.flatnonzero(self.rotors)
        return {tuple(p): int(v) for p, v in zip(self.grid.coords(idx).tolist(), self.rotors[idx])}

    def odometer_map(self) -> dict:
        """Number of firings at each site that has fired."""
        idx = np.flatnonzero(self.odometer)
        return {tuple(p): int(v) for p, v in zip(self.grid.coords(idx).tolist(), self.odometer[idx])}

    def snapshot(self) -> tuple:
        return self.ordering.order, self.counts_map(), self.rotors_map()

    def __eq__(self, other):
        if not isinstance(other, ParticleConfig):
            return NotImplemented
        return self.snapshot() == other.snapshot()


@dataclass
class FiringSequence:
    sites: list = field(default_factory=list)

    def apply(self, config: ParticleConfig) -> ParticleConfig:
        for x in self.sites:
            fire(config, x)
        return config


def fire(config: ParticleConfig, x) -> ParticleConfig:
    """Send one particle from x along its rotor, then advance the rotor."""
    x = tuple(int(c) for c in x)
    while not config.grid.contains(x) or config.margin[config.grid.index(x)]:
        config._enlarge_step()
    p = config.grid.index(x)
    if config.counts[p] < 2:
        raise IllegalFiring(f"site {x} holds {int(config.counts[p])} particle(s); firing needs 2")
    kernels.fire_one(config.counts, config.rotors, config.offsets, p)
    config.odometer[p] += 1
    return config


def _parse_policy(policy: str, seed):
    if policy.startswith("random"):
        name, _, tail = policy.partition(":")
        if tail:
            seed = int(tail)
        return "random", seed
    if policy in ("queue", "scanline"):
        return policy, seed
    raise ValueError(f"unknown policy {policy!r}")


def stabilize(config: ParticleConfig, policy: str = "queue", seed: int | None = None,
              cap: int = DEFAULT_FIRING_CAP) -> tuple[ParticleConfig, int]:
    """Fire single particles until no site holds more than one.

    Policies: ``queue`` (FIFO of unstable sites), ``scanline`` (raster
    sweeps) and ``random`` (uniform choice among unstable sites, seeded;
    ``"random:7"`` is shorthand for seed 7). Works in place and returns
    the configuration with the number of firings.
    """
    policy, seed = _parse_policy(policy, seed)
    fired = 0
    if policy == "random":
        rng = np.random.default_rng(seed)
        buf = rng.integers(0, 1 << 62, size=_RANDOM_CHUNK, dtype=np.int64)
        pos = 0
    while True:
        left = cap - fired
        if policy == "queue":
            status, k = kernels.stabilize_queue(config.counts, config.rotors, config.odometer,
                                                config.offsets, config.margin, left)
        elif policy == "scanline":
            status, k = kernels.stabilize_scanline(config.counts, config.rotors, config.odometer,
                                                   config.offsets, config.margin, left)
        else:
            status, k, used = kernels.stabilize_random(config.counts, config.rotors,
                                                       config.odometer, config.offsets, config.margin,
                                                       buf[pos:], left)
            pos += used
        fired += int(k)
        if status == DONE:
            return config, fired
        if status == NEEDS_GROW:
            config._enlarge_step()
        elif status == NEEDS_RANDOM:
            buf = np.concatenate([buf[pos:], rng.integers(0, 1 << 62, size=_RANDOM_CHUNK,
                                                          dtype=np.int64)])
            pos = 0
        elif status == CAP_EXCEEDED:
            raise RuntimeError(f"stabilization exceeded {cap} firings")


# --------------------------------------------------------- synchronous rounds


def _round_sends(rot: np.ndarray, k: np.ndarray, n_dirs: int) -> list[np.ndarray]:
    """Particles each site sends to each ordering position when it ejects
    k particles in rotor order starting at rot."""
    q, rem = np.divmod(k, n_dirs)
    return [q + (((p - rot) % n_dirs) < rem) for p in range(n_dirs)]


def parallel_round(config: ParticleConfig, workers: int = 1) -> ParticleConfig:
    """One synchronous round: every site holding c >= 2 particles ejects
    c - 1 of them in rotor order; deliveries land after all sites have
    acted. Returns a new configuration; identical for any ``workers``."""
    out = config.copy()
    unstable = out.counts >= 2
    if np.any(unstable & (out.margin > 0)):
        out._enlarge_step()
        unstable = out.counts >= 2
    g, n_dirs = out.grid, out.ordering.size
    k = np.where(unstable, out.counts - 1, 0)
    rot = out.rotors

    def part(bounds):
        lo, hi = bounds
        local_k = np.zeros_like(k)
        local_k[lo:hi] = k[lo:hi]
        delta = np.zeros_like(k)
        for p, sends in enumerate(_round_sends(rot, local_k, n_dirs)):
            g.shift_add(delta, sends, out.ordering.order[p])
        return delta

    cuts = np.linspace(0, g.size, max(1, workers) + 1).astype(np.int64)
    chunks = list(zip(cuts[:-1], cuts[1:]))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            deltas = list(pool.map(part, chunks))
    else:
        deltas = [part(c) for c in chunks]
    new_counts = out.counts - k
    for delta in deltas:
        new_counts += delta
    out.counts = new_counts
    out.rotors = (rot + k) % n_dirs
    out.odometer = out.odometer + k
    return out


def rounds(m: int, n_rounds: int, ordering: DirectionOrdering | str = "cyclic",
           workers: int = 1):
    """Yield H_{m,0}, H_{m,1}, ..., H_{m,n_rounds} as configurations."""
    cfg = ParticleConfig.from_origin(m, ordering)
    cfg.enlarge(n_rounds + 2 * _MARGIN + 2)
    yield cfg
    for _ in range(n_rounds):
        cfg = parallel_round(cfg, workers)
        yield cfg


def stabilize_by_rounds(config: ParticleConfig, workers: int = 1,
                        max_rounds: int = 10 ** 7) -> tuple[ParticleConfig, int]:
    cfg = config
    for n in range(max_rounds + 1):
        if cfg.is_stable():
            return cfg, n
        cfg = parallel_round(cfg, workers)
    raise RuntimeError(f"not stable after {max_rounds} rounds")


# ------------------------------------------------------ binomial comparison


def binomial_B(n: int, x: int, y: int) -> Fraction:
    """4^-n C(n, (n+x+y)/2) C(n, (n+x-y)/2), with C(n, k) = 0 off 0..n."""
    if n < 0:
        raise ValueError("n must be >= 0")

    def c(twice_k):
        if twice_k % 2:
            return 0
        k = twice_k // 2
        return math.comb(n, k) if 0 <= k <= n else 0

    return Fraction(c(n + x + y) * c(n + x - y), 4 ** n)


def _max_deviation(cfg: ParticleConfig, m: int, n: int) -> Fraction:
    """max over sites of |H_{m,n} - m B_n|, exact."""
    scale = 4 ** n
    worst = 0
    seen = set()
    for p, h in cfg.counts_map().items():
        seen.add(p)
        b = binomial_B(n, *p)
        worst = max(worst, abs(h * scale - m * b.numerator * (scale // b.denominator)))
    for x in range(-n, n + 1):
        for y in range(-n, n + 1):
            if (x, y) in seen or (x + y - n) % 2 or abs(x) + abs(y) > n:
                continue
            b = binomial_B(n, x, y)
            worst = max(worst, m * b.numerator * (scale // b.denominator))
    return Fraction(worst, scale)


def deviation_series(m: int, n_rounds: int, ordering: DirectionOrdering | str = "cyclic",
                     workers: int = 1) -> list[Fraction]:
    """max |H_{m,n} - m B_n| for n = 0..n_rounds."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return [_max_deviation(cfg, m, n)
            for n, cfg in enumerate(rounds(m, n_rounds, ordering, workers))]


def check_Hn_vs_B(m: int, n_rounds: int, ordering: DirectionOrdering | str = "cyclic",
                  workers: int = 1) -> Fraction:
    return deviation_series(m, n_rounds, ordering, workers)[-1]


# -------------------------------------------------------- odometer aggregate


@dataclass
class OdometerCertificate:
    max_count: int
    min_count: int
    fired_not_single: int     # sites with odometer > 0 not left holding exactly 1
    sites_on_cycles: int      # of the last-exit pointer graph on fired sites
    boundary_clear: bool
    particles: int

    @property
    def ok(self) -> bool:
        return (self.max_count <= 1 and self.min_count >= 0 and self.fired_not_single == 0
                and self.sites_on_cycles == 0 and self.boundary_clear)


@dataclass
class OdometerResult:
    state: AggregateState
    certificate: OdometerCertificate
    stats: dict


def _sends_from_zero(odo: np.ndarray, n_dirs: int) -> list[np.ndarray]:
    q, rem = np.divmod(odo, n_dirs)
    return [q + (rem > p) for p in range(n_dirs)]


def final_counts(grid: Grid, ordering: DirectionOrdering, start: np.ndarray,
                 odo: np.ndarray) -> np.ndarray:
    """Counts after each site x fires odo[x] times from rotor 0, in any order."""
    counts = start - odo
    for p, sends in enumerate(_sends_from_zero(odo, ordering.size)):
        grid.shift_add(counts, sends, ordering.order[p])
    return counts


def certify_odometer(grid: Grid, ordering: DirectionOrdering, m_total: int,
                     odo: np.ndarray) -> OdometerCertificate:
    """Check from scratch that ``odo`` is the odometer of stabilizing
    m_total particles at the origin with all rotors at 0.

    If the counts it produces are all <= 1, firing odo is at least the
    true odometer. If moreover every fired site ends with exactly one
    particle and the pointers to each fired site's last exit form no
    cycle, it cannot exceed it: the sites where it did would keep every
    extra particle among themselves and so carry such a cycle.
    """
    start = np.zeros(grid.size, dtype=np.int64)
    start[grid.origin] = m_total
    counts = final_counts(grid, ordering, start, odo)
    fired = odo > 0
    offsets = grid.offsets(ordering)
    succ = np.arange(grid.size, dtype=np.int64) + offsets[(odo - 1) % ordering.size]
    succ = np.where(fired, succ, np.arange(grid.size, dtype=np.int64))
    edge = grid.margin(1).astype(bool)
    return OdometerCertificate(
        int(counts.max()), int(counts.min()), int(np.count_nonzero(fired & (counts != 1))),
        int(kernels.cycle_sites(succ, fired)), not bool(np.any(fired & edge)),
        int(counts.sum()))


def _poisson_guess(grid: Grid, m_total: int, radius: float) -> np.ndarray:
    """Rounded solution of (normalized Laplacian) u = 1 - m_total*delta_0 on
    a ball, u = 0 outside: a close guess for the odometer."""
    import pyamg
    import scipy.sparse as sp

    inside = grid.norms_sq() <= (radius + 1.0) ** 2
    where = np.flatnonzero(inside)
    n = where.shape[0]
    index = np.full(grid.size, -1, dtype=np.int64)
    index[where] = np.arange(n)
    rows, cols, vals = [np.arange(n)], [np.arange(n)], [np.full(n, 1.0)]
    w = 1.0 / (2 * grid.dim)
    for stride in grid.strides:
        for nb in (where + stride, where - stride):
            j = index[nb]
            ok = j >= 0
            rows.append(np.flatnonzero(ok))
            cols.append(j[ok])
            vals.append(np.full(int(ok.sum()), -w))
    # minus the normalized Laplacian: symmetric positive definite
    a = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n))
    rhs = -np.ones(n)
    rhs[index[grid.origin]] += m_total
    solver = pyamg.ruge_stuben_solver(a)
    sol = solver.solve(rhs, tol=1e-12, maxiter=200)
    u = np.zeros(grid.size, dtype=np.int64)
    u[where] = np.maximum(0, np.rint(sol)).astype(np.int64)
    return u


def odometer_aggregate(m: int, ordering: DirectionOrdering | str = "cyclic", dim: int = 2,
                       use_poisson: bool | None = None) -> OdometerResult:
    """The aggregate of m deposits, computed through its odometer.

    Guess the odometer from a Poisson solve, fire the guess in bulk, then
    repair: fire every site holding two or more (now at least the true
    odometer), unfire sites left empty that have fired, and unfire once
    around each cycle of last-exit pointers. The result is certified by
    ``certify_odometer`` before it is returned; a failed certificate
    raises RuntimeError.
    """
    if isinstance(ordering, str):
        ordering = DirectionOrdering.named(ordering, dim)
    if m < 0:
        raise ValueError("m must be >= 0")
    d, n_dirs = ordering.dim, ordering.size
    m_total = m + 1
    radius = radius_for(m_total, d)
    grid = Grid(d, int(math.ceil(radius)) + 8)
    if use_poisson is None:
        use_poisson = m >= 2000
    odo = _poisson_guess(grid, m_total, radius) if use_poisson else np.zeros(grid.size, np.int64)
    start = np.zeros(grid.size, dtype=np.int64)
    start[grid.origin] = m_total
    counts = final_counts(grid, ordering, start, odo)
    rot = odo % n_dirs
    stats = {"guess_total": int(odo.sum())}

    while True:
        status, events = kernels.relax(counts, rot, odo, grid.offsets(ordering),
                                       grid.margin(_MARGIN), 0)
        stats["fire_events"] = stats.get("fire_events", 0) + int(events)
        if status == DONE:
            break
        bigger = grid.enlarged(int(grid.half * 1.25) + 4)
        counts, rot, odo = (grid.embed(a, bigger) for a in (counts, rot, odo))
        grid = bigger
    offsets = grid.offsets(ordering)
    _, events = kernels.relax(counts, rot, odo, offsets, grid.margin(_MARGIN), 1)
    stats["unfire_events"] = int(events)
    stats["cycle_unfirings"] = int(kernels.pop_cycles(counts, rot, odo, offsets))

    cert = certify_odometer(grid, ordering, m_total, odo)
    if not cert.ok:
        raise RuntimeError(f"odometer certificate failed: {cert}")
    state = AggregateState.__new__(AggregateState)
    state.ordering = ordering
    state.grid = grid
    final = final_counts(grid, ordering, start, odo)
    state.occ = (final == 1).astype(np.uint8)
    state.rot = np.where(state.occ > 0, odo % n_dirs, 0).astype(np.int64)
    state.visits = odo + state.occ
    state.visits[grid.origin] -= 1
    state.totals = np.array([int(s.sum()) for s in _sends_from_zero(odo, n_dirs)], dtype=np.int64)
    state.m = m
    state._refresh()
    stats["odometer_total"] = int(odo.sum())
    return OdometerResult(state, cert, stats)
