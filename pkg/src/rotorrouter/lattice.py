"""Direction orderings and flat, origin-centred grids on Z^d."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import chain

import numpy as np


@dataclass(frozen=True)
class DirectionOrdering:
    """Cyclic order of the 2d unit directions of Z^d.

    ``order`` holds signed axis tokens: ``k`` is e_k and ``-k`` is -e_k.
    Position i in the tuple is the i-th direction a rotor points to.
    """

    dim: int
    order: tuple
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        order = tuple(int(t) for t in self.order)
        want = set(chain(range(1, self.dim + 1), range(-self.dim, 0)))
        if len(order) != 2 * self.dim or set(order) != want:
            raise ValueError(
                f"ordering {order} must list each of +-1..+-{self.dim} exactly once")
        object.__setattr__(self, "order", order)

    @classmethod
    def parse(cls, text: str, dim: int | None = None) -> "DirectionOrdering":
        """Parse ``"1,2,-1,-2"``; the dimension defaults to len/2."""
        try:
            tokens = tuple(int(t) for t in text.replace(" ", "").split(",") if t)
        except ValueError as exc:
            raise ValueError(f"bad ordering {text!r}") from exc
        if dim is None:
            if len(tokens) % 2:
                raise ValueError(f"bad ordering {text!r}")
            dim = len(tokens) // 2
        return cls(dim, tokens)

    @classmethod
    def axial(cls, dim: int) -> "DirectionOrdering":
        """e1 < -e1 < e2 < -e2 < ..."""
        return cls(dim, tuple(chain.from_iterable((k, -k) for k in range(1, dim + 1))), "axial")

    @classmethod
    def cyclic(cls, dim: int) -> "DirectionOrdering":
        """e1 < e2 < ... < ed < -e1 < ... < -ed"""
        return cls(dim, tuple(range(1, dim + 1)) + tuple(-k for k in range(1, dim + 1)), "cyclic")

    @classmethod
    def named(cls, name: str, dim: int) -> "DirectionOrdering":
        if name == "axial":
            return cls.axial(dim)
        if name == "cyclic":
            return cls.cyclic(dim)
        return cls.parse(name, dim)

    @property
    def size(self) -> int:
        return 2 * self.dim

    def position(self, token: int) -> int:
        return self.order.index(token)

    @property
    def conventional(self) -> bool:
        """Both e_1 < ... < e_d and e_i < -e_i hold."""
        pos = [self.position(k) for k in range(1, self.dim + 1)]
        increasing = all(a < b for a, b in zip(pos, pos[1:]))
        paired = all(self.position(k) < self.position(-k) for k in range(1, self.dim + 1))
        return increasing and paired

    @property
    def label(self) -> str:
        return self.name or ",".join(str(t) for t in self.order)

    def vector(self, token: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=np.int64)
        v[abs(token) - 1] = 1 if token > 0 else -1
        return v

    def __str__(self):
        return ",".join(str(t) for t in self.order)


class Grid:
    """Cube [-half, half]^dim flattened in C order."""

    def __init__(self, dim: int, half: int):
        self.dim = dim
        self.half = int(half)
        self.side = 2 * self.half + 1
        self.shape = (self.side,) * dim
        self.size = self.side ** dim
        self.strides = np.array([self.side ** (dim - 1 - k) for k in range(dim)], dtype=np.int64)
        self.origin = int(self.half * self.strides.sum())

    def offsets(self, ordering: DirectionOrdering) -> np.ndarray:
        """Flat displacement of each ordering position."""
        if ordering.dim != self.dim:
            raise ValueError("ordering dimension does not match grid")
        return np.array([(1 if t > 0 else -1) * self.strides[abs(t) - 1] for t in ordering.order],
                        dtype=np.int64)

    def index(self, point) -> int:
        p = np.asarray(point, dtype=np.int64).reshape(self.dim)
        if np.any(np.abs(p) > self.half):
            raise IndexError(f"{tuple(p)} outside grid of half-width {self.half}")
        return int(((p + self.half) * self.strides).sum())

    def contains(self, point) -> bool:
        return bool(np.all(np.abs(np.asarray(point)) <= self.half))

    def coords(self, flat) -> np.ndarray:
        """(k, dim) array of lattice points for flat indices."""
        flat = np.atleast_1d(np.asarray(flat, dtype=np.int64))
        out = np.empty((flat.shape[0], self.dim), dtype=np.int64)
        rest = flat.copy()
        for k in range(self.dim):
            out[:, k], rest = np.divmod(rest, self.strides[k])
        return out - self.half

    def margin(self, width: int) -> np.ndarray:
        """uint8 mask of cells within ``width`` of the boundary."""
        mask = np.zeros(self.shape, dtype=np.uint8)
        for k in range(self.dim):
            lo = [slice(None)] * self.dim
            hi = [slice(None)] * self.dim
            lo[k] = slice(0, width)
            hi[k] = slice(self.side - width, self.side)
            mask[tuple(lo)] = 1
            mask[tuple(hi)] = 1
        return mask.ravel()

    def norms_sq(self) -> np.ndarray:
        """Squared Euclidean norm of every cell, flat."""
        axis = np.arange(-self.half, self.half + 1, dtype=np.int64) ** 2
        total = np.zeros(self.shape, dtype=np.int64)
        for k in range(self.dim):
            shape = [1] * self.dim
            shape[k] = self.side
            total = total + axis.reshape(shape)
        return total.ravel()

    def enlarged(self, new_half: int) -> "Grid":
        return Grid(self.dim, max(new_half, self.half))

    def embed(self, flat: np.ndarray, target: "Grid") -> np.ndarray:
        """Copy a flat array of this grid into the centre of ``target``."""
        pad = target.half - self.half
        arr = flat.reshape(self.shape)
        out = np.pad(arr, pad)
        return np.ascontiguousarray(out).ravel()

    def shift_add(self, dest: np.ndarray, src: np.ndarray, token: int) -> None:
        """dest[x + e] += src[x] for the direction ``token``, both flat.

        Cells shifted past the boundary are dropped; callers keep a margin.
        """
        d = dest.reshape(self.shape)
        s = src.reshape(self.shape)
        k = abs(token) - 1
        dst_sl = [slice(None)] * self.dim
        src_sl = [slice(None)] * self.dim
        if token > 0:
            dst_sl[k] = slice(1, None)
            src_sl[k] = slice(None, -1)
        else:
            dst_sl[k] = slice(None, -1)
            src_sl[k] = slice(1, None)
        d[tuple(dst_sl)] += s[tuple(src_sl)]

    def __repr__(self):
        return f"Grid(dim={self.dim}, half={self.half})"
