"""Radial visit-count profiles of an aggregate, the lattice Green's
function comparison, and the power-law fit near the profile's root."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rotornd import AggregateState

# Euler-Mascheroni constant, 20 significant digits (OEIS A001620)
EULER_GAMMA = 0.57721566490153286061
FIT_WINDOW = (0.5, 0.98)
MIN_FIT_SAMPLES = 5


@dataclass
class RadialProfile:
    r: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=np.float64)
        self.values = np.asarray(self.values)
        if self.r.shape != self.values.shape or self.r.ndim != 1:
            raise ValueError("r and values must be 1-D arrays of equal length")
        if np.any(np.diff(self.r) <= 0):
            raise ValueError("r must be strictly increasing")

    def __len__(self):
        return self.r.shape[0]

    def root(self) -> float:
        """First r where the profile reaches 0, interpolated linearly
        between the last positive and the first nonpositive sample."""
        v = self.values.astype(np.float64)
        hits = np.flatnonzero(v <= 0)
        if hits.shape[0] == 0:
            raise ValueError("profile has no zero")
        k = int(hits[0])
        if k == 0:
            return float(self.r[0])
        r1, r2, v1, v2 = self.r[k - 1], self.r[k], v[k - 1], v[k]
        return float(r1 + (r2 - r1) * v1 / (v1 - v2))


@dataclass
class FitResult:
    r0: float
    lam: float
    window: tuple
    residual: float
    n_samples: int


def axis_profile(state: AggregateState, axis: int = 1) -> RadialProfile:
    """H_m at k * e_axis (negative axis tokens point the other way) for
    k = 0, 1, ... up to and including the first zero."""
    if state.m < 1:
        raise ValueError("needs m >= 1")
    d = state.dim
    if not 1 <= abs(axis) <= d:
        raise ValueError(f"axis must be in +-1..+-{d}")
    step = np.zeros(d, dtype=np.int64)
    step[abs(axis) - 1] = 1 if axis > 0 else -1
    vals = []
    k = 0
    while True:
        v = state.visits_at(tuple((k * step).tolist()))
        vals.append(v)
        if v == 0 and k > 0:
            break
        k += 1
    meta = {"m": state.m, "dimension": d, "ordering": state.ordering.label, "axis": axis}
    return RadialProfile(np.arange(len(vals)), np.array(vals, dtype=np.int64), meta)


def green_tilde(r) -> np.ndarray:
    """(log r + 1.5 log 2 + gamma) / (2 pi), the large-r form of the
    planar lattice Green's function."""
    r = np.asarray(r, dtype=np.float64)
    if np.any(r < 1):
        raise ValueError("defined for r >= 1")
    return (np.log(r) + 1.5 * math.log(2.0) + EULER_GAMMA) / (2 * math.pi)


def green_compare(state: AggregateState, axis: int = 1) -> list[tuple]:
    """Rows (r, H, F, Ftilde) with F = H_m(0) - m*G~(r) and
    Ftilde = H_m(0) - m*(G~(r) - 1/2); F and Ftilde are None at r = 0."""
    if state.dim != 2:
        raise ValueError("the Green's function comparison is for d = 2")
    prof = axis_profile(state, axis)
    h0, m = int(prof.values[0]), state.m
    rows = [(0, h0, None, None)]
    if len(prof) > 1:
        g = green_tilde(prof.r[1:])
        for r, h, gv in zip(prof.r[1:].astype(int).tolist(), prof.values[1:].tolist(), g.tolist()):
            rows.append((r, int(h), h0 - m * gv, h0 - m * (gv - 0.5)))
    return rows


def fit_root_exponent(profile: RadialProfile, window=FIT_WINDOW) -> FitResult:
    """Fit value ~ c (r0 - r)^lambda by least squares in log-log space
    over r in [window[0]*r0, window[1]*r0]."""
    r0 = profile.root()
    lo, hi = window[0] * r0, window[1] * r0
    if not 0 < lo < hi <= r0:
        raise ValueError("window must satisfy 0 < lo < hi <= 1")
    v = profile.values.astype(np.float64)
    sel = (profile.r >= lo) & (profile.r <= hi) & (v > 0)
    n = int(sel.sum())
    if n < MIN_FIT_SAMPLES:
        raise ValueError(f"fit window holds {n} samples; need {MIN_FIT_SAMPLES}")
    x = np.log(r0 - profile.r[sel])
    y = np.log(v[sel])
    (lam, c), res, *_ = np.polyfit(x, y, 1, full=True)
    residual = float(res[0]) if res.size else 0.0
    return FitResult(r0, float(lam), (float(lo), float(hi)), residual, n)


def profile3d(state: AggregateState, axis: int = 1) -> list[tuple]:
    """Rows (r, H, m/r) along an axis of a 3-D aggregate; m/r is None at r = 0."""
    if state.dim != 3:
        raise ValueError("profile3d is for d = 3")
    prof = axis_profile(state, axis)
    return [(int(r), int(h), state.m / r if r else None)
            for r, h in zip(prof.r.tolist(), prof.values.tolist())]


def ftilde_root(state: AggregateState) -> float:
    """The r >= 1 where Ftilde = H_m(0) - m*(G~(r) - 1/2) vanishes, in closed
    form (Ftilde decreases in r); 1.0 if it is already <= 0 at r = 1."""
    if state.dim != 2 or state.m < 1:
        raise ValueError("needs d = 2 and m >= 1")
    h0 = state.visits_at((0, 0))
    exponent = 2 * math.pi * (h0 / state.m + 0.5) - 1.5 * math.log(2.0) - EULER_GAMMA
    return max(1.0, math.exp(exponent))
