"""Partitions of n, characters of S_n, and the orthogonal decompositions
of L^2(S_n): isotypic components V_lambda and pure-degree levels V_d.

Characters are computed exactly in integer arithmetic by border-strip
removal (abacus/beta-set form of the Murnaghan-Nakayama recursion), so
the projectors are free of coefficient drift.

Level d collects the V_lambda whose first row has length n - d; the
level spaces satisfy V_d = W_d cap W_{d-1}^perp where W_d is spanned by
the d-umvirate indicators, which gives the second, least-squares
computation path for f^{=d}.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import Sequence

import numpy as np

from .funcspace import GroupFunction
from .perm import (
    all_perms,
    inverse_ranks,
    invert_rows,
    mult_table,
    rank_rows_fast,
)

Partition = tuple[int, ...]

#: class-sum convolutions are guaranteed exact and fast up to here
MAX_EXACT_DEGREE = 7
#: degree 8 is permitted only behind an explicit slow acknowledgment
MAX_SLOW_DEGREE = 8


def check_partition(lam: Sequence[int]) -> Partition:
    lam = tuple(int(x) for x in lam)
    if not lam or any(p <= 0 for p in lam):
        raise ValueError("partition parts must be positive")
    if any(lam[i] < lam[i + 1] for i in range(len(lam) - 1)):
        raise ValueError("partition parts must be weakly decreasing")
    return lam


@lru_cache(maxsize=None)
def partitions(n: int) -> tuple[Partition, ...]:
    """All partitions of n in descending lexicographic order."""

    def gen(remaining: int, cap: int):
        if remaining == 0:
            yield ()
            return
        for first in range(min(cap, remaining), 0, -1):
            for rest in gen(remaining - first, first):
                yield (first,) + rest

    return tuple(gen(n, n))


def transpose(lam: Partition) -> Partition:
    lam = check_partition(lam)
    return tuple(sum(1 for p in lam if p > i) for i in range(lam[0]))


def partition_dim(lam: Partition) -> int:
    """Dimension by the hook length formula, exact integer."""
    lam = check_partition(lam)
    n = sum(lam)
    lamt = transpose(lam)
    hooks = 1
    for i, row in enumerate(lam):
        for j in range(row):
            hooks *= row - j + lamt[j] - i - 1
    dim, rem = divmod(factorial(n), hooks)
    assert rem == 0
    return dim


def level_of(lam: Partition) -> int:
    """d_lambda = n - (first row length)."""
    lam = check_partition(lam)
    return sum(lam) - lam[0]


def dual_level_of(lam: Partition) -> int:
    """min(d_lambda, d_{lambda transpose})."""
    return min(level_of(lam), level_of(transpose(lam)))


def mn_character(lam: Partition, rho: Partition) -> int:
    """chi_lambda on the class of cycle type rho (both partitions of n)."""
    lam = check_partition(lam) if lam else ()
    rho = tuple(rho)
    if sum(lam) != sum(rho):
        raise ValueError("partition sizes differ")
    return _mn(lam, rho)


@lru_cache(maxsize=None)
def _mn(lam: Partition, rho: Partition) -> int:
    if not rho:
        return 1
    k, rest = rho[0], rho[1:]
    m = len(lam)
    beta = [lam[i] + (m - 1 - i) for i in range(m)]
    beta_set = set(beta)
    total = 0
    for b in beta:
        nb = b - k
        if nb < 0 or nb in beta_set:
            continue
        height = sum(1 for x in beta if nb < x < b)
        nbeta = sorted((x for x in beta if x != b), reverse=True)
        nbeta.append(nb)
        nbeta.sort(reverse=True)
        nlam = tuple(nbeta[i] - (m - 1 - i) for i in range(m))
        nlam = tuple(p for p in nlam if p > 0)
        total += (-1) ** height * _mn(nlam, rest)
    return total


@dataclass(frozen=True)
class CharacterTable:
    """Exact character table of S_n; rows and columns are indexed by the
    canonical partition order (classes are labelled by cycle type)."""

    degree: int
    labels: tuple[Partition, ...]
    table: np.ndarray  # (num partitions, num classes) int64
    class_sizes: np.ndarray

    @classmethod
    def build(cls, n: int) -> "CharacterTable":
        labels = partitions(n)
        table = np.array(
            [[mn_character(lam, rho) for rho in labels] for lam in labels],
            dtype=np.int64,
        )
        sizes = np.array([class_size(rho) for rho in labels], dtype=np.int64)
        table.setflags(write=False)
        sizes.setflags(write=False)
        return cls(n, labels, table, sizes)

    def character(self, lam: Partition) -> np.ndarray:
        return self.table[self.labels.index(check_partition(lam))]

    def row_orthogonality_defect(self) -> int:
        """max |sum_c |c| chi_l(c) chi_m(c) - n! delta_lm| (0 when exact)."""
        weighted = self.table * self.class_sizes
        gram = weighted @ self.table.T
        target = np.eye(len(self.labels), dtype=np.int64) * factorial(self.degree)
        return int(np.abs(gram - target).max())


def class_size(rho: Partition) -> int:
    """n! / z_rho with z_rho = prod k^{m_k} m_k!."""
    rho = check_partition(rho)
    z = 1
    for k in set(rho):
        m = rho.count(k)
        z *= k**m * factorial(m)
    return factorial(sum(rho)) // z


@lru_cache(maxsize=None)
def character_table(n: int) -> CharacterTable:
    return CharacterTable.build(n)


@lru_cache(maxsize=None)
def class_ids(n: int) -> np.ndarray:
    """Conjugacy class index (into partitions(n)) of every rank."""
    labels = {rho: k for k, rho in enumerate(partitions(n))}
    perms = all_perms(n)
    out = np.empty(perms.shape[0], dtype=np.int16)
    for r in range(perms.shape[0]):
        imgs = perms[r]
        seen = [False] * n
        lengths = []
        for start in range(n):
            if seen[start]:
                continue
            ln, x = 0, start
            while not seen[x]:
                seen[x] = True
                x = int(imgs[x])
                ln += 1
            lengths.append(ln)
        out[r] = labels[tuple(sorted(lengths, reverse=True))]
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# isotypic projections
# ---------------------------------------------------------------------------


def _check_isotypic_degree(n: int, slow: bool) -> None:
    if n <= MAX_EXACT_DEGREE:
        return
    if n <= MAX_SLOW_DEGREE and slow:
        return
    if n <= MAX_SLOW_DEGREE:
        raise ValueError(
            f"degree {n} requires the explicit slow acknowledgment (slow=True)"
        )
    raise ValueError("degree too large")


def class_sums(f: GroupFunction, slow: bool = False) -> np.ndarray:
    """S[c, g] = sum over h in class c of f(h^{-1} g), for every class.

    All isotypic projections of f are integer-weighted combinations of
    these rows, so one pass serves the whole decomposition.
    """
    n = f.degree
    _check_isotypic_degree(n, slow)
    if n <= MAX_EXACT_DEGREE:
        return _class_sums_by_table(f)
    return _class_sums_by_ranking(f)


def _class_sums_by_table(f: GroupFunction) -> np.ndarray:
    n = f.degree
    cid = class_ids(n)
    fact = factorial(n)
    out = np.zeros((len(partitions(n)), fact))
    table = mult_table(n)
    # classes are closed under inverse in S_n, so summing f[M[h, :]]
    # into the class of h realizes sum_{h in c} f(h^{-1} g)
    for h in range(fact):
        out[cid[h]] += f.values[table[h]]
    return out


def _class_sums_by_ranking(f: GroupFunction, block: int = 64) -> np.ndarray:
    """Tableless path for degrees past the multiplication-table cap:
    translations are ranked in blocks through the base-n code lookup."""
    n = f.degree
    cid = class_ids(n)
    fact = factorial(n)
    out = np.zeros((len(partitions(n)), fact))
    perms = all_perms(n)
    pidx = perms.astype(np.intp)
    inv = invert_rows(perms)
    for h0 in range(0, fact, block):
        rows = inv[h0 : h0 + block][:, pidx]        # (B, n!, n)
        flat = rows.reshape(-1, n)
        ranks = rank_rows_fast(flat).reshape(rows.shape[0], fact)
        vals = f.values[ranks]
        for k in range(rows.shape[0]):              # cheap row adds
            out[cid[h0 + k]] += vals[k]
    return out


def isotypic_decompose(
    f: GroupFunction, slow: bool = False
) -> dict[Partition, GroupFunction]:
    """All components f^{=lambda}; sums to f by completeness."""
    n = f.degree
    sums = class_sums(f, slow=slow)
    ct = character_table(n)
    fact = factorial(n)
    out = {}
    for k, lam in enumerate(ct.labels):
        dim = partition_dim(lam)
        vals = (dim / fact) * (ct.table[k].astype(np.float64) @ sums)
        out[lam] = GroupFunction(n, vals)
    return out


def isotypic_project(f: GroupFunction, lam: Partition, slow: bool = False) -> GroupFunction:
    """f^{=lambda} = (dim/n!) sum_h chi_lambda(h) f(h^{-1} .)."""
    n = f.degree
    lam = check_partition(lam)
    if sum(lam) != n:
        raise ValueError("partition size must equal the degree")
    sums = class_sums(f, slow=slow)
    ct = character_table(n)
    k = ct.labels.index(lam)
    dim = partition_dim(lam)
    vals = (dim / factorial(n)) * (ct.table[k].astype(np.float64) @ sums)
    return GroupFunction(n, vals)


def isotypic_projector_matrix(n: int, lams: Sequence[Partition]) -> np.ndarray:
    """Explicit n! x n! matrix of sum over the given lambdas of P_lambda.

    Entry [g, u] = sum_lam (dim_lam/n!) chi_lam(class(g u^{-1})).
    """
    if n > MAX_EXACT_DEGREE:
        raise ValueError("degree too large")
    ct = character_table(n)
    coef = np.zeros(len(ct.labels))
    for lam in lams:
        k = ct.labels.index(check_partition(lam))
        coef += partition_dim(ct.labels[k]) * ct.table[k] / factorial(n)
    table = mult_table(n)
    cid = class_ids(n)
    ir = inverse_ranks(n).astype(np.intp)
    pair_class = cid[table[:, ir]]  # [g, u] = class of g o u^{-1}
    return coef[pair_class]


# ---------------------------------------------------------------------------
# level projections
# ---------------------------------------------------------------------------


def level_partitions(n: int, d: int) -> tuple[Partition, ...]:
    return tuple(lam for lam in partitions(n) if level_of(lam) == d)


def level_dimension(n: int, d: int) -> int:
    """dim V_d = sum of dim(lambda)^2 over lambda at level d."""
    return sum(partition_dim(lam) ** 2 for lam in level_partitions(n, d))


def level_project(
    f: GroupFunction, d: int, method: str = "auto", slow: bool = False
) -> GroupFunction:
    """Projection f^{=d} onto the pure-degree-d space V_d.

    method "isotypic" sums the relevant isotypic projections (degree <= 7,
    8 behind slow=True); method "lsq" projects onto the span of the
    d-umvirate indicators and subtracts the span of the (d-1)-umvirate
    indicators (degree <= 10, d <= 2).
    """
    n = f.degree
    if not 0 <= d <= n - 1:
        raise ValueError("level out of range")
    if method == "auto":
        method = "isotypic" if n <= MAX_EXACT_DEGREE else "lsq"
    if method == "isotypic":
        _check_isotypic_degree(n, slow)
        sums = class_sums(f, slow=slow)
        ct = character_table(n)
        coef = np.zeros(len(ct.labels))
        for lam in level_partitions(n, d):
            k = ct.labels.index(lam)
            coef += partition_dim(lam) * ct.table[k] / factorial(n)
        return GroupFunction(n, coef @ sums)
    if method == "lsq":
        if d > 2:
            raise ValueError("least-squares path supports d <= 2 only")
        upper = _w_projection(f, d)
        lower = _w_projection(f, d - 1) if d >= 1 else np.zeros_like(upper)
        return GroupFunction(n, upper - lower)
    raise ValueError(f"unknown method {method!r}")


def level_decompose(f: GroupFunction, slow: bool = False) -> list[GroupFunction]:
    """[f^{=0}, ..., f^{=n-1}]; the levels sum back to f."""
    n = f.degree
    comps = isotypic_decompose(f, slow=slow)
    out = []
    for d in range(n):
        vals = np.zeros(factorial(n))
        for lam in level_partitions(n, d):
            vals += comps[lam].values
        out.append(GroupFunction(n, vals))
    return out


#: pseudo-inverse cut-off for the umvirate Gram systems, relative to the
#: largest eigenvalue (the indicator family is linearly dependent)
GRAM_PINV_RTOL = 1e-10


def _umvirate_keys(n: int, d: int) -> list[tuple[tuple[int, ...], np.ndarray]]:
    """Spanning set of W_d: for every increasing position d-tuple I, all
    ordered image d-tuples; returns (I, array of image tuples) pairs."""
    if d == 0:
        return [((), np.zeros((1, 0), dtype=np.int64))]
    out = []
    for I in itertools.combinations(range(n), d):
        imgs = np.array(
            list(itertools.permutations(range(n), d)), dtype=np.int64
        )
        out.append((I, imgs))
    return out


def _w_gram(n: int, d: int) -> tuple[np.ndarray, list[tuple[int, ...]], np.ndarray]:
    """Gram matrix of the W_d spanning indicators under the expectation
    inner product, computed combinatorially: the inner product of two
    umvirate indicators is (n-k)!/n! when the joined constraints form a
    partial injection with k pairs, else 0.
    """
    if d == 0:
        return np.array([[1.0]]), [()], np.zeros((1, 0), dtype=np.int64)
    keys = _umvirate_keys(n, d)
    cols: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
    for I, img_block in keys:
        cols.extend((I, tuple(int(x) for x in row)) for row in img_block)
    m = len(cols)
    pos = np.array([c[0] for c in cols], dtype=np.int64)
    img = np.array([c[1] for c in cols], dtype=np.int64)
    gram = np.zeros((m, m))
    fact = factorial(n)
    w = np.array([factorial(n - k) / fact for k in range(2 * d + 1)])
    # block the quadratic loop to keep memory modest
    step = 512
    for a0 in range(0, m, step):
        a1 = min(a0 + step, m)
        pa = pos[a0:a1, :, None]      # (B, d, 1)
        ia = img[a0:a1, :, None]
        pb = pos.T[None, :, :]        # (1, d, m)
        ib = img.T[None, :, :]
        same_pos = pa[:, :, None, :] == pb[:, None, :, :]   # (B, d, d, m)
        same_img = ia[:, :, None, :] == ib[:, None, :, :]
        consistent = np.all(same_pos == same_img, axis=(1, 2))
        shared = np.sum(same_pos & same_img, axis=(1, 2))
        gram[a0:a1] = np.where(consistent, w[2 * d - shared], 0.0)
    return gram, [c[0] for c in cols], img


def _w_rhs(f: GroupFunction, d: int) -> np.ndarray:
    """<f, x_{I->J}> over the W_d spanning set, by key counting."""
    n = f.degree
    if d == 0:
        return np.array([float(np.sum(f.values)) / factorial(n)])
    perms = all_perms(n)
    fact = factorial(n)
    out = []
    for I in itertools.combinations(range(n), d):
        key = np.zeros(perms.shape[0], dtype=np.int64)
        for i in I:
            key = key * n + perms[:, i]
        sums = np.bincount(key, weights=f.values, minlength=n**d)
        for J in itertools.permutations(range(n), d):
            k = 0
            for j in J:
                k = k * n + j
            out.append(sums[k] / fact)
    return np.array(out)


def _w_projection(f: GroupFunction, d: int) -> np.ndarray:
    """Least-squares projection of f onto W_d, returned as a value array."""
    n = f.degree
    if d == 0:
        return np.full(factorial(n), float(np.sum(f.values)) / factorial(n))
    gram, positions, images = _w_gram(n, d)
    rhs = _w_rhs(f, d)
    evals, evecs = np.linalg.eigh(gram)
    cut = GRAM_PINV_RTOL * evals.max()
    inv = np.where(evals > cut, 1.0 / np.maximum(evals, cut), 0.0)
    coeffs = evecs @ (inv * (evecs.T @ rhs))
    # evaluate sum coeffs[I,J] x_{I->J} pointwise
    perms = all_perms(n)
    vals = np.zeros(perms.shape[0])
    idx = 0
    block = factorial(n) // factorial(n - d)
    for I in itertools.combinations(range(n), d):
        key = np.zeros(perms.shape[0], dtype=np.int64)
        for i in I:
            key = key * n + perms[:, i]
        lookup = np.zeros(n**d)
        for J in itertools.permutations(range(n), d):
            k = 0
            for j in J:
                k = k * n + j
            lookup[k] = coeffs[idx]
            idx += 1
        vals += lookup[key]
    return vals


def level_table(f: GroupFunction, slow: bool = False) -> list[dict]:
    """Per-partition report rows: lambda, transpose, levels, dim, mass."""
    from .funcspace import inner_product

    comps = isotypic_decompose(f, slow=slow)
    rows = []
    for lam in partitions(f.degree):
        comp = comps[lam]
        rows.append(
            {
                "lambda": list(lam),
                "transpose": list(transpose(lam)),
                "d": level_of(lam),
                "d_tilde": dual_level_of(lam),
                "dim": partition_dim(lam),
                "norm_sq": inner_product(comp, comp),
            }
        )
    return rows


def dimension_bound_report(n: int, d: int) -> dict:
    """Diagnostic: does dim(lambda) > (n/(e d))^d hold whenever the dual
    level exceeds d? Reported, never asserted, because the underlying
    estimate assumes large n."""
    if d <= 0:
        raise ValueError("d must be positive")
    threshold = (n / (np.e * d)) ** d
    failures = [
        list(lam)
        for lam in partitions(n)
        if dual_level_of(lam) > d and partition_dim(lam) <= threshold
    ]
    return {
        "n": n,
        "d": d,
        "threshold": threshold,
        "holds": not failures,
        "failures": failures,
    }
