"""Permutation arithmetic, ranking and bulk enumeration for S_n.

Conventions used everywhere in this package:

* points are 0-based internally; all text I/O (one-line and cycle
  notation, JSON reports) is 1-based,
* composition is ``compose(a, b)(x) == a(b(x))`` -- apply ``b`` first,
* the rank of a permutation is its index in the lexicographic order of
  one-line image tuples, computed through the factorial number system.
"""

from __future__ import annotations

import itertools
import re
from functools import lru_cache
from math import factorial
from typing import Iterator, Sequence

import numpy as np

#: hard cap on the degree for streaming enumeration (12! ~ 4.8e8 ranks)
MAX_ENUM_DEGREE = 12
#: cap on degrees for which dense rank-indexed tables are materialized
MAX_DENSE_DEGREE = 10
#: cap for the full n! x n! multiplication table (7! = 5040)
MAX_TABLE_DEGREE = 7


class Permutation:
    """Bijection on {0..n-1} stored in one-line (image array) form."""

    __slots__ = ("images",)

    def __init__(self, images: Sequence[int]):
        imgs = tuple(int(x) for x in images)
        n = len(imgs)
        if n == 0:
            raise ValueError("empty permutation")
        seen = [False] * n
        for v in imgs:
            if not 0 <= v < n or seen[v]:
                raise ValueError("images are not a bijection on {0..n-1}")
            seen[v] = True
        object.__setattr__(self, "images", imgs)

    def __setattr__(self, name, value):  # immutable value type
        raise AttributeError("Permutation is immutable")

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, x: int) -> int:
        return self.images[x]

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self.images == other.images

    def __hash__(self) -> int:
        return hash(self.images)

    def __repr__(self) -> str:
        return f"Permutation({list(self.images)})"

    def __str__(self) -> str:
        return format_perm(self)


def identity(n: int) -> Permutation:
    return Permutation(range(n))


def transposition(n: int, i: int, j: int) -> Permutation:
    """The transposition (i j) in S_n, 0-based points."""
    imgs = list(range(n))
    imgs[i], imgs[j] = imgs[j], imgs[i]
    return Permutation(imgs)


def compose(a: Permutation, b: Permutation) -> Permutation:
    """compose(a, b)(x) == a(b(x))."""
    if a.degree != b.degree:
        raise ValueError("degree mismatch")
    bi = b.images
    ai = a.images
    return Permutation(tuple(ai[bi[x]] for x in range(len(ai))))


def inverse(p: Permutation) -> Permutation:
    imgs = [0] * p.degree
    for x, y in enumerate(p.images):
        imgs[y] = x
    return Permutation(imgs)


def cycle_type(p: Permutation) -> tuple[int, ...]:
    """Cycle lengths of p, sorted descending (a partition of the degree)."""
    seen = [False] * p.degree
    lengths = []
    for start in range(p.degree):
        if seen[start]:
            continue
        length = 0
        x = start
        while not seen[x]:
            seen[x] = True
            x = p.images[x]
            length += 1
        lengths.append(length)
    return tuple(sorted(lengths, reverse=True))


def sign(p: Permutation) -> int:
    """(-1)^(n - number of cycles)."""
    n_cycles = len(cycle_type(p))
    return 1 if (p.degree - n_cycles) % 2 == 0 else -1


def perm_rank(p: Permutation) -> int:
    """Lexicographic rank in [0, n!) via the Lehmer code."""
    imgs = p.images
    n = len(imgs)
    r = 0
    for j in range(n - 1):
        smaller_later = sum(1 for k in range(j + 1, n) if imgs[k] < imgs[j])
        r += smaller_later * factorial(n - 1 - j)
    return r


def perm_unrank(index: int, degree: int) -> Permutation:
    """Inverse of perm_rank on [0, n!)."""
    if not 0 <= index < factorial(degree):
        raise ValueError("rank out of range")
    avail = list(range(degree))
    imgs = []
    r = index
    for j in range(degree):
        f = factorial(degree - 1 - j)
        d, r = divmod(r, f)
        imgs.append(avail.pop(d))
    return Permutation(imgs)


def enumerate_perms(n: int, parity: str = "all") -> Iterator[Permutation]:
    """Stream S_n in lexicographic order, optionally filtered by sign.

    parity is one of "all", "even", "odd".
    """
    if not 1 <= n <= MAX_ENUM_DEGREE:
        raise ValueError("degree too large")
    if parity not in ("all", "even", "odd"):
        raise ValueError(f"unknown parity filter {parity!r}")
    want = {"all": None, "even": 1, "odd": -1}[parity]
    for imgs in itertools.permutations(range(n)):
        p = Permutation(imgs)
        if want is None or sign(p) == want:
            yield p


# ---------------------------------------------------------------------------
# text formats: one-line "3 1 2" (1-based) and cycle "(1 3 2)"
# ---------------------------------------------------------------------------

_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def format_perm(p: Permutation) -> str:
    """Canonical one-line notation, 1-based."""
    return " ".join(str(x + 1) for x in p.images)


def parse_perm(text: str, degree: int | None = None) -> Permutation:
    """Parse one-line ("3 1 2") or cycle ("(1 3 2)") notation, 1-based."""
    text = text.strip()
    if not text:
        raise ValueError("empty permutation text")
    if text.startswith("("):
        return _parse_cycles(text, degree)
    tokens = text.replace(",", " ").split()
    imgs = [int(t) - 1 for t in tokens]
    if degree is not None and len(imgs) != degree:
        raise ValueError(f"expected degree {degree}, got {len(imgs)}")
    return Permutation(imgs)


def _parse_cycles(text: str, degree: int | None) -> Permutation:
    cycles = []
    for m in _CYCLE_RE.finditer(text):
        entries = [int(t) - 1 for t in m.group(1).replace(",", " ").split()]
        if entries:
            cycles.append(entries)
    if _CYCLE_RE.sub("", text).strip():
        # everything outside (...) groups must be blank
        raise ValueError(f"malformed cycle notation: {text!r}")
    flat = [x for c in cycles for x in c]
    if len(set(flat)) != len(flat):
        raise ValueError("repeated point in cycle notation")
    n = degree if degree is not None else (max(flat) + 1 if flat else 1)
    if flat and max(flat) >= n:
        raise ValueError("cycle entry exceeds degree")
    if min(flat, default=0) < 0:
        raise ValueError("cycle entries must be >= 1")
    imgs = list(range(n))
    for c in cycles:
        for k, x in enumerate(c):
            imgs[x] = c[(k + 1) % len(c)]
    return Permutation(imgs)


# ---------------------------------------------------------------------------
# bulk rank-indexed tables (numpy, cached per degree, read-only)
# ---------------------------------------------------------------------------


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@lru_cache(maxsize=None)
def all_perms(n: int) -> np.ndarray:
    """All of S_n as an (n!, n) int8 array, row r = images of rank r."""
    if not 1 <= n <= MAX_DENSE_DEGREE:
        raise ValueError("degree too large")
    if n == 1:
        return _frozen(np.zeros((1, 1), dtype=np.int8))
    sub = all_perms(n - 1)
    block = sub.shape[0]
    out = np.empty((n * block, n), dtype=np.int8)
    base = np.arange(n, dtype=np.int8)
    for v in range(n):
        others = np.delete(base, v)
        out[v * block : (v + 1) * block, 0] = v
        out[v * block : (v + 1) * block, 1:] = others[sub]
    return _frozen(out)


@lru_cache(maxsize=None)
def parities(n: int) -> np.ndarray:
    """Parity bit per rank (0 = even, 1 = odd), aligned with all_perms."""
    if n == 1:
        return _frozen(np.zeros(1, dtype=np.int8))
    sub = parities(n - 1)
    block = sub.shape[0]
    out = np.empty(n * block, dtype=np.int8)
    for v in range(n):
        # placing value v first contributes v inversions
        out[v * block : (v + 1) * block] = (sub + v) % 2
    return _frozen(out)


@lru_cache(maxsize=None)
def signs(n: int) -> np.ndarray:
    """Sign per rank as float64 (+1 even, -1 odd)."""
    return _frozen(1.0 - 2.0 * parities(n).astype(np.float64))


def rank_rows(rows: np.ndarray) -> np.ndarray:
    """Vectorized lexicographic rank of each row of an (m, n) image array."""
    rows = np.asarray(rows)
    m, n = rows.shape
    out = np.zeros(m, dtype=np.int64)
    for j in range(n - 1):
        smaller_later = (rows[:, j + 1 :] < rows[:, j : j + 1]).sum(axis=1)
        out += smaller_later.astype(np.int64) * factorial(n - 1 - j)
    return out


def invert_rows(rows: np.ndarray) -> np.ndarray:
    """Row-wise permutation inverses of an (m, n) image array."""
    rows = np.asarray(rows)
    m, n = rows.shape
    out = np.empty_like(rows)
    mi = np.arange(m)[:, None]
    out[mi, rows.astype(np.intp)] = np.arange(n, dtype=rows.dtype)
    return out


@lru_cache(maxsize=None)
def inverse_ranks(n: int) -> np.ndarray:
    """inverse_ranks(n)[r] = rank of the inverse of the rank-r permutation."""
    return _frozen(rank_rows(invert_rows(all_perms(n))))


@lru_cache(maxsize=None)
def mult_table(n: int) -> np.ndarray:
    """Full multiplication table: mult_table(n)[a, b] = rank(perm_a o perm_b).

    Composition applies b first. Kept to degree <= 7 (100 MB at 7).
    """
    if n > MAX_TABLE_DEGREE:
        raise ValueError("degree too large")
    perms = all_perms(n)
    fact = perms.shape[0]
    out = np.empty((fact, fact), dtype=np.int32)
    for a in range(fact):
        out[a] = rank_rows(perms[a][perms.astype(np.intp)])
    return _frozen(out)


@lru_cache(maxsize=None)
def _code_powers(n: int) -> np.ndarray:
    return _frozen(np.array([n**k for k in range(n - 1, -1, -1)], dtype=np.int64))


@lru_cache(maxsize=None)
def _code_lookup(n: int) -> np.ndarray:
    """Base-n image-code -> rank lookup (degree <= 8; 67 MB at 8)."""
    if n > 8:
        raise ValueError("degree too large")
    codes = all_perms(n).astype(np.int64) @ _code_powers(n)
    table = np.full(n**n, -1, dtype=np.int32)
    table[codes] = np.arange(codes.shape[0], dtype=np.int32)
    return _frozen(table)


def rank_rows_fast(rows: np.ndarray) -> np.ndarray:
    """Rank rows through the code lookup when available, else Lehmer."""
    n = rows.shape[1]
    if n <= 8:
        # n^n < 2^31 up to n = 8; accumulate in int32 to avoid the
        # bandwidth cost of an int64 blow-up on large batches
        codes = np.zeros(rows.shape[0], dtype=np.int32)
        for j in range(n):
            codes *= n
            codes += rows[:, j]
        return _code_lookup(n)[codes].astype(np.int64)
    return rank_rows(rows)


def compose_rank(n: int, a: int, b: int) -> int:
    """Rank of perm_a o perm_b without materializing the full table."""
    perms = all_perms(n)
    return int(rank_rows(perms[a][perms[b]][None, :])[0])
