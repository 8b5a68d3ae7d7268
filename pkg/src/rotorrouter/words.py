"""Exit words, exact floor (Sturmian) words and factor counting."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .rotor1d import Params1D, RecTriple, orbit_arrays

_INT64_SAFE = 2 ** 62


@dataclass
class BinaryWord:
    """bits[k] is the letter with index start_index + k."""

    bits: np.ndarray
    start_index: int = 1

    def __post_init__(self):
        self.bits = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if self.bits.ndim != 1 or self.bits.shape[0] == 0:
            raise ValueError("a word needs at least one letter")
        if np.any(self.bits > 1):
            raise ValueError("letters must be 0 or 1")

    def __len__(self):
        return self.bits.shape[0]

    def letter(self, n: int) -> int:
        """Letter with index n in the word's own numbering."""
        k = n - self.start_index
        if not 0 <= k < len(self):
            raise IndexError(n)
        return int(self.bits[k])

    def __str__(self):
        return "".join("01"[b] for b in self.bits[:80]) + ("..." if len(self) > 80 else "")

    def __eq__(self, other):
        if not isinstance(other, BinaryWord):
            return NotImplemented
        return self.start_index == other.start_index and np.array_equal(self.bits, other.bits)


@dataclass(frozen=True)
class SturmianParams:
    """Slope and intercept in Q(sqrt(radicand)).

    n*alpha + beta = (a0 + a1*n + (b0 + b1*n)*sqrt(radicand)) / denom, so
    alpha = (a1 + b1*sqrt(radicand)) / denom and beta = (a0 + b0*sqrt(radicand)) / denom.
    """

    a0: int
    a1: int
    b0: int
    b1: int
    radicand: int
    denom: int

    def __post_init__(self):
        if self.denom == 0:
            raise ValueError("denominator must be nonzero")
        if self.radicand < 0:
            raise ValueError("radicand must be >= 0")
        if _floor_exact(self.a1, self.b1, self.radicand, self.denom) != 0:
            raise ValueError("slope must satisfy 0 <= alpha < 1")

    @classmethod
    def from_rs(cls, r: int, s: int) -> "SturmianParams":
        """alpha = sqrt(s)/(sqrt(r)+sqrt(s)), beta = (alpha-1)/r + 1/2, beta mod 1."""
        Params1D(r, s)
        if r == s:
            p = cls(r - 1, r, 0, 0, 0, 2 * r)
        else:
            p = cls(-2 * s + (r - s) * (r - 2), -2 * s * r, 2, 2 * r, r * s, 2 * r * (r - s))
        return p.reduced()

    @classmethod
    def silver(cls) -> "SturmianParams":
        """alpha = sqrt(2) - 1, beta = alpha/2."""
        return cls(-1, -2, 1, 2, 2, 2)

    @classmethod
    def rational(cls, p: int, q: int, c: int = 0) -> "SturmianParams":
        """alpha = p/q, beta = c/q."""
        if q < 0:
            p, q, c = -p, -q, -c
        return cls(c, p, 0, 0, 0, q)

    def reduced(self) -> "SturmianParams":
        """Same slope with beta shifted into [0, 1)."""
        k = _floor_exact(self.a0, self.b0, self.radicand, self.denom)
        if k == 0:
            return self
        return SturmianParams(self.a0 - k * self.denom, self.a1, self.b0, self.b1,
                              self.radicand, self.denom)

    @property
    def is_rational(self) -> bool:
        root = math.isqrt(self.radicand)
        return root * root == self.radicand or (self.b0 == 0 and self.b1 == 0)

    @property
    def alpha(self) -> float:
        return (self.a1 + self.b1 * math.sqrt(self.radicand)) / self.denom

    @property
    def beta(self) -> float:
        return (self.a0 + self.b0 * math.sqrt(self.radicand)) / self.denom


def _floor_exact(a: int, b: int, d: int, m: int) -> int:
    """floor((a + b*sqrt(d)) / m) with Python integers."""
    bb = b * b * d
    t = math.isqrt(bb)
    exact = t * t == bb
    if b >= 0:
        lo = a + t
    else:
        lo = a - t if exact else a - t - 1
    if m > 0:
        return lo // m
    return (-lo) // (-m) if exact else (-lo - 1) // (-m)


def floor_value(p: SturmianParams, n: int) -> int:
    """floor(n*alpha + beta), exact."""
    return _floor_exact(p.a0 + p.a1 * n, p.b0 + p.b1 * n, p.radicand, p.denom)


def exit_word(t0: RecTriple, params: Params1D, length: int, start: int = 1) -> BinaryWord:
    """Letters w_start .. w_(start+length-1) of the exit word of t0.

    w_n = 1 when the step from f^n(t0) to f^(n+1)(t0) is an f^- step,
    i.e. particle n+1 leaves on the left; w_n = 0 for a right exit.
    From (0, 0, 0) the first particle always leaves on the right, so w_0
    carries no information and the default slice starts at n = 1.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    if start < 0:
        raise ValueError("start must be >= 0")
    _, bits = orbit_arrays(RecTriple(*t0), params, start + length)
    return BinaryWord(1 - bits[start:], start)


def right_exits(word: BinaryWord) -> np.ndarray:
    """Per-particle right-exit indicator (1 = f^+ step) of an exit word."""
    return (1 - word.bits).astype(np.uint8)


def sturmian_word(p: SturmianParams, length: int, start: int = 1) -> BinaryWord:
    """w_n = floor((n+1)alpha + beta) - floor(n alpha + beta), n = start..start+length-1.

    Integer arithmetic only. Three paths, chosen by which one is exact for
    the size of the numbers involved.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    if start < 0:
        raise ValueError("start must be >= 0")
    out = np.empty(length, dtype=np.uint8)
    a0, a1, b0, b1, d, m = p.a0, p.a1, p.b0, p.b1, p.radicand, p.denom
    # the kernels begin at n = 1; re-base n so that n = 1 means ``start``
    a0, b0 = a0 + a1 * (start - 1), b0 + b1 * (start - 1)
    root = math.isqrt(d)
    if root * root == d:
        # sqrt is an integer: fold it into the rational part
        a0, a1, b0, b1, d = a0 + b0 * root, a1 + b1 * root, 0, 0, 0
    n_max = length + 1
    b_max = abs(b0) + abs(b1) * n_max
    a_max = abs(a0) + abs(a1) * n_max
    if b_max * b_max * max(d, 1) < _INT64_SAFE and a_max + b_max * (root + 1) < _INT64_SAFE:
        kernels.floor_word(a0, a1, b0, b1, d, m, length, out)
    elif (b1 >= 0 and b0 + b1 >= 0
          and (2 * b_max + b1) * b1 * d < _INT64_SAFE
          and a_max + b_max * (root + 1) < _INT64_SAFE):
        t0 = math.isqrt((b0 + b1) ** 2 * d)
        kernels.floor_word_incremental(a0, a1, b0, b1, d, m, t0, (b0 + b1) ** 2 * d - t0 * t0,
                                       length, out)
    else:
        prev = _floor_exact(a0 + a1, b0 + b1, d, m)
        for k in range(length):
            n1 = k + 2
            cur = _floor_exact(a0 + a1 * n1, b0 + b1 * n1, d, m)
            out[k] = cur - prev
            prev = cur
    return BinaryWord(out, start)


def first_mismatch(w1: BinaryWord, w2: BinaryWord) -> int | None:
    """Index (in w1's numbering) of the first differing letter over the common length."""
    n = min(len(w1), len(w2))
    diff = np.flatnonzero(w1.bits[:n] != w2.bits[:n])
    if diff.shape[0] == 0:
        return None
    return int(diff[0]) + w1.start_index


def subword_complexity(w: BinaryWord, n: int) -> int:
    """Number of distinct length-n factors of w."""
    bits = w.bits
    if n < 1:
        raise ValueError("factor length must be >= 1")
    if n > bits.shape[0]:
        raise ValueError(f"factor length {n} exceeds word length {bits.shape[0]}")
    count = bits.shape[0] - n + 1
    if n <= 62:
        codes = np.empty(count, dtype=np.int64)
        kernels.window_codes(bits, n, codes)
        if n <= 22:
            return int(kernels.count_marked(codes, np.zeros(1 << n, dtype=np.uint8)))
        return int(np.unique(codes).shape[0])
    # longer factors: one 62-bit code per chunk, then distinct rows
    cols = []
    for start in range(0, n, 62):
        width = min(62, n - start)
        codes = np.empty(bits.shape[0] - start - width + 1, dtype=np.int64)
        kernels.window_codes(bits[start:], width, codes)
        cols.append(codes[:count])
    return int(np.unique(np.stack(cols, axis=1), axis=0).shape[0])


def first_complexity_excess(w: BinaryWord, n_max: int) -> int | None:
    """Smallest n <= n_max whose factor count is not n + 1, if any."""
    for n in range(1, min(n_max, len(w)) + 1):
        if subword_complexity(w, n) != n + 1:
            return n
    return None


def is_balanced(w: BinaryWord, max_len: int) -> bool:
    """1-counts of equal-length factors differ by at most one, up to max_len."""
    prefix = np.concatenate([[0], np.cumsum(w.bits, dtype=np.int64)])
    for k in range(1, min(max_len, len(w)) + 1):
        sums = prefix[k:] - prefix[:-k]
        if sums.max() - sums.min() > 1:
            return False
    return True


@dataclass(frozen=True)
class ScanCell:
    r: int
    s: int
    match: bool
    first_mismatch: int | None
    rational: bool
    complexity_excess: int | None  # None: n+1 factors for every n checked

    @property
    def verdict(self) -> str:
        return "match" if self.match else "mismatch"

    @property
    def complexity_sturmian(self) -> bool:
        return self.complexity_excess is None and not self.rational


def scan_cell(r: int, s: int, length: int, complexity_max: int = 30) -> ScanCell:
    params = Params1D(r, s)
    p = SturmianParams.from_rs(r, s)
    ew = exit_word(RecTriple(0, 0, 0), params, length)
    sw = sturmian_word(p, length)
    miss = first_mismatch(ew, sw)
    excess = first_complexity_excess(ew, complexity_max) if complexity_max else None
    return ScanCell(r, s, miss is None, miss, p.is_rational, excess)


def sturmian_scan(rmax: int, smax: int, length: int, threads: int = 1,
                  complexity_max: int = 30) -> dict[tuple[int, int], ScanCell]:
    """Compare exit words with the floor formula over [1,rmax] x [1,smax].

    Cells are independent, so the result does not depend on ``threads``.
    """
    if rmax < 1 or smax < 1 or length < 1:
        raise ValueError("rmax, smax and length must be >= 1")
    keys = [(r, s) for s in range(1, smax + 1) for r in range(1, rmax + 1)]
    if threads <= 1:
        cells = [scan_cell(r, s, length, complexity_max) for r, s in keys]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cells = list(pool.map(lambda k: scan_cell(k[0], k[1], length, complexity_max), keys))
    return dict(zip(keys, cells))
