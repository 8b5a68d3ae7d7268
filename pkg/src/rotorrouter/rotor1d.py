"""The one-dimensional (r, s) rotor-router model.

Two representations of a state live here. ``LabelState1D`` is the raw
occupied interval with one R/L label per site and is advanced by actually
walking a particle. ``RecTriple`` is the compact form of a recurrent state
R^(z-x) L^(y-z) R^s on [x, y+s-1], advanced by a closed-form piecewise
linear map. Rendering a triple to labels is the only bridge between them.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import NamedTuple

import numpy as np

from . import kernels
from .kernels import L_LABEL, R_LABEL

# Coordinates are kept within this bound so that every quantity the
# numba kernels touch (sums of two coordinates, x*x in g) fits in int64.
MAX_COORD = 2 ** 30

DEFAULT_PARTICLE_CAP = 10 ** 7


class StepCapExceeded(RuntimeError):
    """A walk or reduction ran past its guaranteed-finite bound."""


class ExitSide(IntEnum):
    LEFT = -1
    RIGHT = 1


@dataclass(frozen=True)
class Params1D:
    r: int
    s: int

    def __post_init__(self):
        if int(self.r) != self.r or int(self.s) != self.s or self.r < 1 or self.s < 1:
            raise ValueError(f"r and s must be positive integers, got ({self.r}, {self.s})")


class RecTriple(NamedTuple):
    x: int
    y: int
    z: int

    def validate(self) -> "RecTriple":
        x, y, z = self
        if not (x <= 0 <= y and x <= z <= y):
            raise ValueError(f"{tuple(self)} is not a recurrent triple (need x <= 0 <= y, x <= z <= y)")
        return self

    @property
    def is_valid(self) -> bool:
        return self.x <= 0 <= self.y and self.x <= self.z <= self.y


class OrbitKey(NamedTuple):
    g: int
    xmod: int
    ymod: int


@dataclass
class LabelState1D:
    """Occupied interval [x, y] with labels[k] the label of site x + k."""

    x: int
    labels: np.ndarray

    def __post_init__(self):
        self.labels = np.ascontiguousarray(self.labels, dtype=np.uint8)
        if self.labels.ndim != 1 or self.labels.shape[0] == 0:
            raise ValueError("labels must be a non-empty 1-D sequence")
        if np.any(self.labels > 1):
            raise ValueError("labels must be R (0) or L (1)")
        if not (self.x <= 0 <= self.y):
            raise ValueError(f"interval [{self.x}, {self.y}] must contain the origin")

    @property
    def y(self) -> int:
        return self.x + self.labels.shape[0] - 1

    @classmethod
    def initial(cls) -> "LabelState1D":
        return cls(0, np.zeros(1, dtype=np.uint8))

    @classmethod
    def from_string(cls, x: int, word: str) -> "LabelState1D":
        table = {"R": R_LABEL, "L": L_LABEL}
        try:
            labels = np.array([table[c] for c in word.upper()], dtype=np.uint8)
        except KeyError as exc:
            raise ValueError(f"labels must be R or L, got {word!r}") from exc
        return cls(x, labels)

    def label_string(self) -> str:
        return "".join("RL"[int(v)] for v in self.labels)

    def label_at(self, site: int) -> str:
        return "RL"[int(self.labels[site - self.x])]

    def copy(self) -> "LabelState1D":
        return LabelState1D(self.x, self.labels.copy())

    def __eq__(self, other):
        if not isinstance(other, LabelState1D):
            return NotImplemented
        return self.x == other.x and np.array_equal(self.labels, other.labels)

    def __repr__(self):
        return f"LabelState1D(x={self.x}, labels={self.label_string()!r})"


# ----------------------------------------------------------- explicit walks


def zigzag_landmarks(state: LabelState1D) -> list[int]:
    """Predicted turning points of the next particle's walk.

    Starts at the origin and alternates between the R-labelled sites left
    of the origin and the L-labelled sites right of it, heading first in
    the direction of the origin's label, and ends at the exit site.
    """
    x, y = state.x, state.y
    lab = state.labels
    left = [x + k for k in range(-x - 1, -1, -1) if lab[k] == R_LABEL]
    right = [x + k for k in range(-x + 1, y - x + 1) if lab[k] == L_LABEL]
    left.append(x - 1)
    right.append(y + 1)
    first, second = (left, right) if lab[-x] == L_LABEL else (right, left)
    marks = [0]
    for i in range(max(len(first), len(second))):
        for seq in (first, second):
            if i < len(seq):
                marks.append(seq[i])
                if seq[i] in (x - 1, y + 1):
                    return marks
    return marks


def _turning_points(path: np.ndarray) -> list[int]:
    pts = [int(path[0])]
    for k in range(1, path.shape[0] - 1):
        if (path[k] - path[k - 1]) != (path[k + 1] - path[k]):
            pts.append(int(path[k]))
    if path.shape[0] > 1:
        pts.append(int(path[-1]))
    return pts


def equilibrate_explicit(state: LabelState1D, params: Params1D,
                         check: bool = False) -> tuple[LabelState1D, ExitSide]:
    """Walk one particle from the origin and grow the interval where it exits.

    With ``check`` the visited path is recorded and its turning points are
    compared with ``zigzag_landmarks``; a disagreement raises AssertionError.
    """
    n = state.labels.shape[0]
    labels = state.labels.copy()
    cap = 4 * (n + 1) ** 2
    if check:
        marks = zigzag_landmarks(state)
        predicted = sum(abs(b - a) for a, b in zip(marks, marks[1:]))
        path = np.empty(min(predicted, cap) + 2, dtype=np.int64)
        walk_cap = min(cap, path.shape[0] - 1)
    else:
        path = np.zeros(0, dtype=np.int64)
        walk_cap = cap
    side, steps = kernels.walk_1d(labels, -state.x, walk_cap, path)
    if side == 0:
        if check and walk_cap < cap:
            raise AssertionError("walk is longer than the zigzag prediction")
        raise StepCapExceeded(f"particle walk exceeded {cap} steps")
    if check:
        seen = _turning_points(path[:steps + 1] + state.x)
        if seen != marks:
            raise AssertionError(f"walk turned at {seen}, expected {marks}")
    if side > 0:
        grown = np.concatenate([labels, np.full(params.s, R_LABEL, dtype=np.uint8)])
        return LabelState1D(state.x, grown), ExitSide.RIGHT
    grown = np.concatenate([np.full(params.r, R_LABEL, dtype=np.uint8), labels])
    return LabelState1D(state.x - params.r, grown), ExitSide.LEFT


def render(t: RecTriple, params: Params1D) -> LabelState1D:
    x, y, z = RecTriple(*t).validate()
    out = np.empty(y - x + params.s, dtype=np.uint8)
    kernels.render_triple(x, y, z, params.s, out)
    return LabelState1D(x, out)


def as_triple(state: LabelState1D, params: Params1D) -> RecTriple | None:
    """The triple of a recurrent label state, or None if not of that form."""
    y, z, ok = kernels.read_triple(state.x, state.labels, params.s)
    if not ok or y < 0:
        return None
    return RecTriple(state.x, int(y), int(z))


def is_recurrent(state: LabelState1D, params: Params1D) -> bool:
    return as_triple(state, params) is not None


def reduce_to_recurrent(state: LabelState1D, params: Params1D,
                        max_particles: int = DEFAULT_PARTICLE_CAP) -> tuple[RecTriple, int]:
    """Add particles until the labels read R^i L^j R^s."""
    cur = state
    for steps in range(max_particles + 1):
        t = as_triple(cur, params)
        if t is not None:
            return t, steps
        cur, _ = equilibrate_explicit(cur, params)
    raise StepCapExceeded(f"no recurrent state within {max_particles} particles")


# --------------------------------------------------------- closed-form map


def _check_range(*coords: int) -> None:
    for c in coords:
        if abs(c) > MAX_COORD:
            raise OverflowError(f"coordinate {c} outside the supported range |c| <= 2**30")


def is_plus_step(t: RecTriple) -> bool:
    """True when the next particle exits on the right."""
    return t[0] + t[1] <= t[2]


def apply_piecewise(t: RecTriple, params: Params1D) -> RecTriple:
    x, y, z = RecTriple(*t).validate()
    if x + y <= z:
        out = RecTriple(x, y + params.s, z - y)
    else:
        out = RecTriple(x - params.r, y, z - x + 1)
    _check_range(out.x, out.y)
    return out


def iterate(t: RecTriple, params: Params1D, n: int) -> RecTriple:
    """n applications of the piecewise map."""
    x, y, z = RecTriple(*t).validate()
    _check_range(x - n * params.r, y + n * params.s)
    bits = np.empty(n, dtype=np.uint8)
    x, y, z = kernels.orbit(x, y, z, params.r, params.s, n, np.zeros((0, 3), np.int64), bits)
    return RecTriple(int(x), int(y), int(z))


def orbit_arrays(t: RecTriple, params: Params1D, n: int) -> tuple[np.ndarray, np.ndarray]:
    """States t_0..t_n as an (n+1, 3) array and the n branch bits."""
    x, y, z = RecTriple(*t).validate()
    _check_range(x - n * params.r, y + n * params.s)
    traj = np.empty((n + 1, 3), dtype=np.int64)
    bits = np.empty(n, dtype=np.uint8)
    kernels.orbit(x, y, z, params.r, params.s, n, traj, bits)
    return traj, bits


def invariant_g(t: RecTriple, params: Params1D) -> int:
    """s x^2 - r y^2 + (r-2) s x + r s y - 2 r s z, exact."""
    x, y, z = (int(v) for v in t)
    _check_range(x, y, z)
    r, s = params.r, params.s
    return s * x * x - r * y * y + (r - 2) * s * x + r * s * y - 2 * r * s * z


def z_from_invariant(x: int, y: int, n: int, params: Params1D) -> int | None:
    """The unique z with g(x, y, z) = n and x <= z <= y, if there is one."""
    if not (x <= 0 <= y):
        raise ValueError("need x <= 0 <= y")
    _check_range(x, y)
    r, s = params.r, params.s
    num = s * x * x - r * y * y + (r - 2) * s * x + r * s * y - n
    z, rem = divmod(num, 2 * r * s)
    if rem or not (x <= z <= y):
        return None
    return z


def orbit_key(t: RecTriple, params: Params1D) -> OrbitKey:
    return OrbitKey(invariant_g(t, params), t[0] % params.r, t[1] % params.s)


def same_orbit(t1: RecTriple, t2: RecTriple, params: Params1D) -> bool:
    RecTriple(*t1).validate()
    RecTriple(*t2).validate()
    return orbit_key(t1, params) == orbit_key(t2, params)


class EmptyIntervalError(ValueError):
    """No x fits the requested invariant, residue and right endpoint."""


def recurrent_interval(y: int, n: int, x0mod: int, params: Params1D) -> tuple[int, int]:
    """Endpoints (a_minus, a_plus) of {x <= 0, x = x0mod mod r : x <= z_n(x, y) <= y}.

    Both z - x and z - y grow as x moves left, so the scan from the
    largest candidate stops at the first x whose z overshoots y.
    """
    if y < 0:
        raise ValueError("y must be >= 0")
    r = params.r
    x = -((-x0mod) % r)
    found = []
    while True:
        _check_range(x)
        z2 = params.s * x * x - r * y * y + (r - 2) * params.s * x + r * params.s * y - n
        if z2 > 2 * r * params.s * y:
            break
        z = z_from_invariant(x, y, n, params)
        if z is not None:
            found.append(x)
        x -= r
    if not found:
        raise EmptyIntervalError(f"A_{n}({y}) is empty for x = {x0mod} mod {r}")
    return min(found), max(found)


def oracle_sweep(xmin: int, ymax: int, params: Params1D) -> tuple[int, int]:
    """Compare label walks with the closed form on every triple in the box.

    Returns (triples checked, mismatches).
    """
    checked, bad = kernels.oracle_sweep(xmin, ymax, params.r, params.s)
    return int(checked), int(bad)


def recurrent_triples(xmin: int, ymax: int):
    """All triples with xmin <= x <= 0 <= y <= ymax, x <= z <= y."""
    for x in range(xmin, 1):
        for y in range(0, ymax + 1):
            for z in range(x, y + 1):
                yield RecTriple(x, y, z)


def orbit_groups(bound: int, params: Params1D) -> dict[OrbitKey, list[RecTriple]]:
    """Triples with |x|, y <= bound grouped by orbit key."""
    groups: dict[OrbitKey, list[RecTriple]] = {}
    for t in recurrent_triples(-bound, bound):
        groups.setdefault(orbit_key(t, params), []).append(t)
    return groups


def reached_from_minimal(members: list[RecTriple], params: Params1D,
                         max_steps: int = 10 ** 4) -> tuple[RecTriple, set]:
    """Iterate from the member with least |x| + y and report which members
    were not visited within ``max_steps`` steps."""
    start = min(members, key=lambda t: (-t.x + t.y, -t.x, t.y, t.z))
    traj, _ = orbit_arrays(start, params, max_steps)
    want = np.array(members, dtype=np.int64).reshape(-1, 3)
    lo, hi = want.min(axis=0), want.max(axis=0)
    inside = np.all((traj >= lo) & (traj <= hi), axis=1)
    dims = tuple((hi - lo + 1).tolist())
    seen = np.ravel_multi_index(tuple((traj[inside] - lo).T), dims)
    keys = np.ravel_multi_index(tuple((want - lo).T), dims)
    hit = np.isin(keys, seen)
    missing = {RecTriple(*(int(v) for v in row)) for row in want[~hit]}
    return start, missing
