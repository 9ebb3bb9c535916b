"""Dense real-valued functions on S_n and subset bookkeeping.

Functions live in L^2(S_n) with the expectation inner product
<f, g> = E_{sigma ~ S_n}[f(sigma) g(sigma)]; values are indexed by
lexicographic rank. Subsets carry parity metadata so densities can be
reported both over S_n (|A|/n!) and over A_n (|A|/(n!/2)).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Iterable, Sequence

import numpy as np

from .perm import (
    MAX_DENSE_DEGREE,
    Permutation,
    all_perms,
    format_perm,
    parities,
    parse_perm,
    perm_rank,
    rank_rows,
    signs,
)

#: density conventions accepted throughout: reference measure on S_n or A_n
CONVENTIONS = ("Sn", "An")


def _check_degree(n: int) -> None:
    if not 1 <= n <= MAX_DENSE_DEGREE:
        raise ValueError("degree too large")


class GroupFunction:
    """Dense function on S_n; values[r] = f(permutation of rank r)."""

    __slots__ = ("degree", "values")

    def __init__(self, degree: int, values: np.ndarray):
        _check_degree(degree)
        # always copy: instances are immutable and must not freeze or
        # alias caller-owned buffers
        vals = np.array(values, dtype=np.float64)
        if vals.shape != (factorial(degree),):
            raise ValueError("value array length must be degree!")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        self.degree = degree
        self.values = vals
        vals.setflags(write=False)

    @classmethod
    def constant(cls, degree: int, c: float) -> "GroupFunction":
        return cls(degree, np.full(factorial(degree), float(c)))

    @classmethod
    def dictator(cls, degree: int, i: int, j: int) -> "GroupFunction":
        """Indicator x_{i -> j} of permutations sending i to j (0-based)."""
        vals = (all_perms(degree)[:, i] == j).astype(np.float64)
        return cls(degree, vals)

    @classmethod
    def indicator(cls, family: "SetFamily") -> "GroupFunction":
        return cls(family.degree, family.mask.astype(np.float64))

    def __call__(self, p: Permutation) -> float:
        return float(self.values[perm_rank(p)])

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, other):
        return self._combine(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return GroupFunction(self.degree, -self.values)

    def _combine(self, other, op):
        if isinstance(other, GroupFunction):
            if other.degree != self.degree:
                raise ValueError("degree mismatch")
            return GroupFunction(self.degree, op(self.values, other.values))
        return GroupFunction(self.degree, op(self.values, float(other)))


def expectation(f: GroupFunction) -> float:
    # np.sum reduces pairwise, so results are reproducible bit for bit
    return float(np.sum(f.values)) / factorial(f.degree)


def inner_product(f: GroupFunction, g: GroupFunction) -> float:
    if f.degree != g.degree:
        raise ValueError("degree mismatch")
    return float(np.sum(f.values * g.values)) / factorial(f.degree)


def lp_norm(f: GroupFunction, p: float) -> float:
    return float(np.sum(np.abs(f.values) ** p) / factorial(f.degree)) ** (1.0 / p)


def l2_norm(f: GroupFunction) -> float:
    return inner_product(f, f) ** 0.5


def sign_twist(f: GroupFunction) -> GroupFunction:
    """Pointwise product with the sign character; an involution."""
    return GroupFunction(f.degree, f.values * signs(f.degree))


# ---------------------------------------------------------------------------
# restrictions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Restriction:
    """Ordered restriction I -> J: fix images of sources[k] to targets[k]."""

    sources: tuple[int, ...]
    targets: tuple[int, ...]

    def __post_init__(self):
        src = tuple(int(i) for i in self.sources)
        tgt = tuple(int(j) for j in self.targets)
        object.__setattr__(self, "sources", src)
        object.__setattr__(self, "targets", tgt)
        if len(src) != len(tgt):
            raise ValueError("source and target lists differ in length")
        if len(set(src)) != len(src) or len(set(tgt)) != len(tgt):
            raise ValueError("restriction entries must be distinct")

    @property
    def size(self) -> int:
        return len(self.sources)

    def umvirate_mask(self, degree: int) -> np.ndarray:
        perms = all_perms(degree)
        mask = np.ones(perms.shape[0], dtype=bool)
        for i, j in zip(self.sources, self.targets):
            if not (0 <= i < degree and 0 <= j < degree):
                raise ValueError("restriction index out of range")
            mask &= perms[:, i] == j
        return mask


@dataclass(frozen=True)
class RestrictionStats:
    expectation: float
    l2_norm: float


def _minimal_lex_completion(n: int, fixed: dict[int, int]) -> np.ndarray:
    """Image array with the given position->value constraints and the
    lexicographically smallest completion elsewhere."""
    used = set(fixed.values())
    free_vals = iter(v for v in range(n) if v not in used)
    out = np.empty(n, dtype=np.int8)
    for pos in range(n):
        out[pos] = fixed[pos] if pos in fixed else next(free_vals)
    return out


def transport_permutations(
    degree: int, r: Restriction
) -> tuple[np.ndarray, np.ndarray]:
    """Canonical (sigma, pi) identifying the umvirate with S_{n-t}.

    sigma sends n-t+l to sources[l]; pi sends targets[l] to n-t+l; free
    entries are the minimal-lexicographic completions. For any element u
    of the umvirate, pi o u o sigma fixes the top t points.
    """
    t = r.size
    n = degree
    sigma = _minimal_lex_completion(n, {n - t + l: r.sources[l] for l in range(t)})
    pi = _minimal_lex_completion(n, {r.targets[l]: n - t + l for l in range(t)})
    return sigma, pi


def restrict(
    f: GroupFunction,
    r: Restriction,
    transport: tuple[np.ndarray, np.ndarray] | None = None,
) -> tuple[GroupFunction, RestrictionStats]:
    """Restrict f to the umvirate I -> J, transported to S_{n-t}.

    The returned function is rho' |-> f(pi^{-1} o lift(rho') o sigma^{-1})
    where lift embeds S_{n-t} as the stabilizer of the top t points. The
    conditional statistics do not depend on the transport choice.
    """
    n = f.degree
    t = r.size
    if t >= n:
        raise ValueError("restriction size must be smaller than the degree")
    sigma, pi = transport_permutations(n, r) if transport is None else transport
    _validate_transport(n, r, sigma, pi)
    inv_sigma = np.argsort(sigma).astype(np.int8)
    inv_pi = np.argsort(pi).astype(np.int8)

    sub = all_perms(n - t)
    lifted = np.empty((sub.shape[0], n), dtype=np.int8)
    lifted[:, : n - t] = sub
    lifted[:, n - t :] = np.arange(n - t, n, dtype=np.int8)
    # u = pi^{-1} o lifted o sigma^{-1}; columns first, then values
    rows = inv_pi[lifted[:, inv_sigma.astype(np.intp)]]
    vals = f.values[rank_rows(rows)]
    g = GroupFunction(n - t, vals)
    stats = RestrictionStats(
        expectation=float(np.sum(vals)) / vals.shape[0],
        l2_norm=(float(np.sum(vals * vals)) / vals.shape[0]) ** 0.5,
    )
    return g, stats


def _validate_transport(n, r, sigma, pi):
    t = r.size
    for l in range(t):
        if sigma[n - t + l] != r.sources[l] or pi[r.targets[l]] != n - t + l:
            raise ValueError("transport permutations do not match the restriction")


def restriction_expectation(f: GroupFunction, r: Restriction) -> float:
    """E[f | umvirate] without transporting (direct conditional mean)."""
    mask = r.umvirate_mask(f.degree)
    return float(np.sum(f.values[mask])) / int(mask.sum())


# ---------------------------------------------------------------------------
# subsets of S_n
# ---------------------------------------------------------------------------


class SetFamily:
    """Subset of S_n: sorted rank list plus a dense membership mask."""

    __slots__ = ("degree", "ranks", "mask")

    def __init__(self, degree: int, ranks: Iterable[int]):
        _check_degree(degree)
        arr = np.unique(np.asarray(list(ranks), dtype=np.int64))
        if arr.size and (arr[0] < 0 or arr[-1] >= factorial(degree)):
            raise ValueError("rank out of range")
        mask = np.zeros(factorial(degree), dtype=bool)
        mask[arr] = True
        self.degree = degree
        self.ranks = arr
        self.mask = mask
        arr.setflags(write=False)
        mask.setflags(write=False)

    @classmethod
    def from_mask(cls, degree: int, mask: np.ndarray) -> "SetFamily":
        return cls(degree, np.flatnonzero(np.asarray(mask, dtype=bool)))

    @classmethod
    def from_perms(cls, perms: Sequence[Permutation]) -> "SetFamily":
        if not perms:
            raise ValueError("cannot infer degree from an empty collection")
        n = perms[0].degree
        return cls(n, [perm_rank(p) for p in perms])

    @classmethod
    def full(cls, degree: int, ambient: str = "Sn") -> "SetFamily":
        if ambient == "Sn":
            return cls(degree, range(factorial(degree)))
        return cls.from_mask(degree, parities(degree) == 0)

    def __len__(self) -> int:
        return int(self.ranks.size)

    def __contains__(self, p: Permutation) -> bool:
        return bool(self.mask[perm_rank(p)])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SetFamily)
            and self.degree == other.degree
            and np.array_equal(self.ranks, other.ranks)
        )

    def members(self) -> list[Permutation]:
        tbl = all_perms(self.degree)
        return [Permutation(tuple(int(x) for x in tbl[r])) for r in self.ranks]

    @property
    def parity_profile(self) -> tuple[int, int]:
        """(even member count, odd member count)."""
        par = parities(self.degree)[self.ranks]
        odd = int(par.sum())
        return len(self) - odd, odd

    def mu(self, convention: str = "Sn") -> float:
        if convention not in CONVENTIONS:
            raise ValueError(f"unknown density convention {convention!r}")
        ref = factorial(self.degree)
        if convention == "An":
            ref //= 2
        return len(self) / ref

    def intersection(self, other: "SetFamily") -> "SetFamily":
        self._check(other)
        return SetFamily.from_mask(self.degree, self.mask & other.mask)

    def difference(self, other: "SetFamily") -> "SetFamily":
        self._check(other)
        return SetFamily.from_mask(self.degree, self.mask & ~other.mask)

    def union(self, other: "SetFamily") -> "SetFamily":
        self._check(other)
        return SetFamily.from_mask(self.degree, self.mask | other.mask)

    def _check(self, other: "SetFamily") -> None:
        if self.degree != other.degree:
            raise ValueError("degree mismatch")

    def image_rows(self) -> np.ndarray:
        return all_perms(self.degree)[self.ranks.astype(np.intp)]


def density(a: SetFamily, b) -> float:
    """|A inside B| / |B| for B a SetFamily or a Restriction umvirate."""
    if isinstance(b, Restriction):
        n = a.degree
        mask = b.umvirate_mask(n)
        size = int(mask.sum())
        if size == 0:
            raise ValueError("empty reference set")
        return int(np.count_nonzero(a.mask & mask)) / size
    if a.degree != b.degree:
        raise ValueError("degree mismatch")
    if len(b) == 0:
        raise ValueError("empty reference set")
    return len(a.intersection(b)) / len(b)


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------


def write_set_file(family: SetFamily, convention: str = "Sn") -> str:
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown density convention {convention!r}")
    lines = [f"n={family.degree} convention={convention}"]
    lines.extend(format_perm(p) for p in family.members())
    return "\n".join(lines) + "\n"


def read_set_file(text: str) -> tuple[SetFamily, str]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty set file")
    header = dict(item.split("=", 1) for item in lines[0].split())
    n = int(header["n"])
    convention = header.get("convention", "Sn")
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown density convention {convention!r}")
    ranks = [perm_rank(parse_perm(ln, n)) for ln in lines[1:]]
    return SetFamily(n, ranks), convention


def write_function_file(f: GroupFunction, notation: str = "rank") -> str:
    lines = [f"n={f.degree}"]
    if notation == "rank":
        lines.extend(
            f"{r} {v!r}" for r, v in enumerate(f.values.tolist()) if v != 0.0
        )
    elif notation == "perm":
        tbl = all_perms(f.degree)
        for r, v in enumerate(f.values.tolist()):
            if v != 0.0:
                imgs = " ".join(str(int(x) + 1) for x in tbl[r])
                lines.append(f"{imgs} {v!r}")
    else:
        raise ValueError(f"unknown notation {notation!r}")
    return "\n".join(lines) + "\n"


def read_function_file(text: str) -> GroupFunction:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty function file")
    header = dict(item.split("=", 1) for item in lines[0].split())
    n = int(header["n"])
    vals = np.zeros(factorial(n))
    for ln in lines[1:]:
        tokens = ln.split()
        if len(tokens) == 2:
            vals[int(tokens[0])] = float(tokens[1])
        elif len(tokens) == n + 1:
            r = perm_rank(parse_perm(" ".join(tokens[:n]), n))
            vals[r] = float(tokens[-1])
        else:
            raise ValueError(f"malformed function file line: {ln!r}")
    return GroupFunction(n, vals)
