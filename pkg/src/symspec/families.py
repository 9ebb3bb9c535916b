"""Named families in S_n/A_n, product-freeness certification, product
counting, restriction factoring, triple equivalence, and extremal search.

A triple (A, B, C) is product-free when no a in A, b in B satisfy
ab in C (composition applies b first); a single set A is product-free
when the triple (A, A, A) is.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from math import factorial
from typing import Iterable

import numpy as np

from .funcspace import SetFamily
from .perm import (
    MAX_TABLE_DEGREE,
    Permutation,
    all_perms,
    format_perm,
    inverse_ranks,
    mult_table,
    parities,
    perm_unrank,
    rank_rows,
    transposition,
)

AMBIENTS = ("Sn", "An")
FAMILY_KINDS = ("F", "star", "inverse_star", "avoid", "umvirate")


@dataclass(frozen=True)
class FamilySpec:
    """Constructive description of a named family (0-based indices).

    F: pi(x) in I and pi(I) cap I empty; star: pi(x) in I;
    inverse_star: pi^{-1}(x) in I; avoid: pi(I) cap J empty;
    umvirate: pi(I[k]) = J[k] for each k.
    """

    kind: str
    degree: int
    x: int | None = None
    sources: tuple[int, ...] = ()
    targets: tuple[int, ...] = ()
    ambient: str = "An"

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.ambient not in AMBIENTS:
            raise ValueError(f"unknown ambient {self.ambient!r}")
        object.__setattr__(self, "sources", tuple(int(i) for i in self.sources))
        object.__setattr__(self, "targets", tuple(int(j) for j in self.targets))
        idx = list(self.sources) + list(self.targets)
        if self.x is not None:
            idx.append(self.x)
        if any(not 0 <= i < self.degree for i in idx):
            raise ValueError("index out of range")
        if len(set(self.sources)) != len(self.sources):
            raise ValueError("repeated index")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError("repeated index")
        need_x = self.kind in ("F", "star", "inverse_star")
        if need_x and self.x is None:
            raise ValueError(f"family kind {self.kind!r} requires x")
        if self.kind == "umvirate" and len(self.sources) != len(self.targets):
            raise ValueError("umvirate requires |I| == |J|")

    def describe(self) -> str:
        one = lambda v: ",".join(str(i + 1) for i in v)
        if self.kind == "F":
            return f"F:x={self.x + 1},I={one(self.sources)}"
        if self.kind == "star":
            return f"star:x={self.x + 1},I={one(self.sources)}"
        if self.kind == "inverse_star":
            return f"istar:x={self.x + 1},I={one(self.sources)}"
        if self.kind == "avoid":
            return f"avoid:I={one(self.sources)};J={one(self.targets)}"
        return f"umv:I={one(self.sources)};J={one(self.targets)}"


_SPEC_FIELD = re.compile(r"([a-zA-Z]+)\s*=\s*(\d+(?:\s*,\s*\d+)*)")


def parse_family_spec(text: str, degree: int, ambient: str = "An") -> FamilySpec:
    """Mini-language: "F:x=1,I=2,3", "star:x=1,I=2,3", "istar:x=1,I=2,3",
    "avoid:I=1,2;J=3,4", "umv:I=1;J=2" (all indices 1-based)."""
    text = text.strip()
    if ":" not in text:
        raise ValueError(f"malformed family spec {text!r}")
    head, params = text.split(":", 1)
    kinds = {
        "F": "F",
        "star": "star",
        "istar": "inverse_star",
        "avoid": "avoid",
        "umv": "umvirate",
    }
    if head not in kinds:
        raise ValueError(f"unknown family kind {head!r}")
    fields: dict[str, list[int]] = {}
    for chunk in params.split(";"):
        for m in _SPEC_FIELD.finditer(chunk):
            fields[m.group(1)] = [int(v) - 1 for v in m.group(2).split(",")]
    x = fields.get("x", [None])[0] if "x" in fields else None
    return FamilySpec(
        kind=kinds[head],
        degree=degree,
        x=x,
        sources=tuple(fields.get("I", ())),
        targets=tuple(fields.get("J", ())),
        ambient=ambient,
    )


def build_family(spec: FamilySpec) -> SetFamily:
    """Materialize the family by an enumeration pass with parity filter."""
    n = spec.degree
    perms = all_perms(n)
    mask = np.ones(perms.shape[0], dtype=bool)
    src = list(spec.sources)
    tgt = list(spec.targets)
    if spec.kind == "F":
        mask &= np.isin(perms[:, spec.x], src)
        for i in src:
            mask &= ~np.isin(perms[:, i], src)
    elif spec.kind == "star":
        mask &= np.isin(perms[:, spec.x], src)
    elif spec.kind == "inverse_star":
        hit = np.zeros(perms.shape[0], dtype=bool)
        for j in src:
            hit |= perms[:, j] == spec.x
        mask &= hit
    elif spec.kind == "avoid":
        for i in src:
            mask &= ~np.isin(perms[:, i], tgt)
    else:  # umvirate
        for i, j in zip(src, tgt):
            mask &= perms[:, i] == j
    if spec.ambient == "An":
        mask &= parities(n) == 0
    return SetFamily.from_mask(n, mask)


def build_star(n: int, x: int, targets: Iterable[int], ambient: str = "Sn") -> SetFamily:
    return build_family(FamilySpec("star", n, x=x, sources=tuple(targets), ambient=ambient))


def build_inverse_star(n: int, x: int, targets: Iterable[int], ambient: str = "Sn") -> SetFamily:
    return build_family(
        FamilySpec("inverse_star", n, x=x, sources=tuple(targets), ambient=ambient)
    )


# ---------------------------------------------------------------------------
# product-freeness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PFWitness:
    a: Permutation
    b: Permutation
    c: Permutation

    def to_dict(self) -> dict:
        return {
            "a": format_perm(self.a),
            "b": format_perm(self.b),
            "c": format_perm(self.c),
        }


@dataclass(frozen=True)
class PFResult:
    product_free: bool
    witness: PFWitness | None
    checked_pairs: int

    def to_dict(self) -> dict:
        return {
            "product_free": self.product_free,
            "witness": self.witness.to_dict() if self.witness else None,
            "checked_pairs": self.checked_pairs,
        }


def _product_ranks(n: int, a_rank: int, b_ranks: np.ndarray) -> np.ndarray:
    """Ranks of perm_a o perm_b for a fixed a and many b."""
    if n <= MAX_TABLE_DEGREE:
        return mult_table(n)[a_rank][b_ranks.astype(np.intp)]
    perms = all_perms(n)
    rows = perms[a_rank][perms[b_ranks.astype(np.intp)].astype(np.intp)]
    return rank_rows(rows)


def is_product_free(
    a: SetFamily, b: SetFamily | None = None, c: SetFamily | None = None
) -> PFResult:
    """Certify that no product a b with a in A, b in B lands in C, or
    return the first witness in rank order."""
    if (b is None) != (c is None):
        raise ValueError("pass either one set or all three")
    b = a if b is None else b
    c = a if c is None else c
    if not (a.degree == b.degree == c.degree):
        raise ValueError("degree mismatch")
    n = a.degree
    checked = 0
    for a_rank in a.ranks:
        prods = _product_ranks(n, int(a_rank), b.ranks)
        hits = c.mask[prods]
        checked += len(b)
        if np.any(hits):
            k = int(np.argmax(hits))
            return PFResult(
                False,
                PFWitness(
                    perm_unrank(int(a_rank), n),
                    perm_unrank(int(b.ranks[k]), n),
                    perm_unrank(int(prods[k]), n),
                ),
                checked,
            )
    return PFResult(True, None, checked)


def count_products(
    a: SetFamily, b: SetFamily, c: SetFamily
) -> tuple[int, float]:
    """(#{(a, b): ab in C}, same count / (n!)^2); the normalized value
    equals the triple expectation of the three indicators."""
    if not (a.degree == b.degree == c.degree):
        raise ValueError("degree mismatch")
    n = a.degree
    count = 0
    for a_rank in a.ranks:
        prods = _product_ranks(n, int(a_rank), b.ranks)
        count += int(np.count_nonzero(c.mask[prods]))
    return count, count / factorial(n) ** 2


def invert_family(a: SetFamily) -> SetFamily:
    return SetFamily(a.degree, inverse_ranks(a.degree)[a.ranks])


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeasureReport:
    spec: FamilySpec
    size: int
    mu_sn: float
    mu_an: float
    estimate: float | None
    ratio: float | None

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.describe(),
            "size": self.size,
            "mu_Sn": self.mu_sn,
            "mu_An": self.mu_an,
            "estimate": self.estimate,
            "ratio": self.ratio,
        }


def measure_family(spec: FamilySpec) -> MeasureReport:
    """Exact measure by enumeration (authoritative) and, for the F
    families, the closed-form t e^{-t^2} / sqrt(n) approximation with
    t = |I|/sqrt(n) (diagnostic only)."""
    fam = build_family(spec)
    n = spec.degree
    size = len(fam)
    mu_sn = size / factorial(n)
    mu_an = size / (factorial(n) // 2)
    estimate = None
    ratio = None
    if spec.kind == "F":
        t = len(spec.sources) / math.sqrt(n)
        estimate = t * math.exp(-t * t) / math.sqrt(n)
        ratio = (mu_an / estimate) if estimate > 0 else None
    return MeasureReport(spec, size, mu_sn, mu_an, estimate, ratio)


# ---------------------------------------------------------------------------
# restriction factoring
# ---------------------------------------------------------------------------


def factor_restriction(
    a: SetFamily,
    b: SetFamily,
    c: SetFamily,
    i: int,
    i_prime: int,
    x: int,
) -> tuple[SetFamily, SetFamily, SetFamily]:
    """Factor the dictator relation D_{i->i'} D_{x->i} = D_{x->i'} out of
    the restricted triple (A_{i->i'}, B_{x->i}, C_{x->i'}).

    Each restriction is translated by transpositions through the last
    point so it lands in the stabilizer of that point, then re-indexed
    as a subset of S_{n-1}; products are preserved, so product triples
    of the output biject with product triples among the restrictions.
    """
    n = a.degree
    if not (a.degree == b.degree == c.degree):
        raise ValueError("degree mismatch")
    if n < 2:
        raise ValueError("degree must be at least 2")
    for v in (i, i_prime, x):
        if not 0 <= v < n:
            raise ValueError("index out of range")
    if x in (i, i_prime):
        raise ValueError("index clash")
    last = n - 1
    out = []
    for fam, (pos, val), (left, right) in (
        (a, (i, i_prime), (i_prime, i)),
        (b, (x, i), (i, x)),
        (c, (x, i_prime), (i_prime, x)),
    ):
        rows = fam.image_rows()
        rows = rows[rows[:, pos] == val]
        tl = np.asarray(transposition(n, left, last).images, dtype=np.int8)
        tr = np.asarray(transposition(n, right, last).images, dtype=np.int8)
        moved = tl[rows[:, tr.astype(np.intp)]]
        if moved.size and not np.all(moved[:, last] == last):
            raise AssertionError("translated restriction must fix the last point")
        out.append(SetFamily(n - 1, rank_rows(moved[:, :last]) if moved.size else []))
    return out[0], out[1], out[2]


# ---------------------------------------------------------------------------
# the six equivalent triples
# ---------------------------------------------------------------------------

EQUIVALENT_FORMS = (
    "a b = c",
    "a' c = b",
    "c b' = a",
    "b' a' = c'",
    "c' a = b'",
    "b c' = a'",
)


def equivalent_triples(
    a: SetFamily, b: SetFamily, c: SetFamily
) -> list[tuple[str, tuple[SetFamily, SetFamily, SetFamily]]]:
    """The six rewritings of the product equation (primes are inverses);
    each resulting triple is product-free iff the input is."""
    ai, bi, ci = invert_family(a), invert_family(b), invert_family(c)
    return [
        (EQUIVALENT_FORMS[0], (a, b, c)),
        (EQUIVALENT_FORMS[1], (ai, c, b)),
        (EQUIVALENT_FORMS[2], (c, bi, a)),
        (EQUIVALENT_FORMS[3], (bi, ai, ci)),
        (EQUIVALENT_FORMS[4], (ci, a, bi)),
        (EQUIVALENT_FORMS[5], (b, ci, ai)),
    ]


def map_witness(w: PFWitness, form: str) -> PFWitness:
    """Carry a witness of (A, B, C) to the equivalent triple given by form."""
    from .perm import compose, inverse

    a, b, c = w.a, w.b, w.c
    mapping = {
        "a b = c": (a, b, c),
        "a' c = b": (inverse(a), c, b),
        "c b' = a": (c, inverse(b), a),
        "b' a' = c'": (inverse(b), inverse(a), inverse(c)),
        "c' a = b'": (inverse(c), a, inverse(b)),
        "b c' = a'": (b, inverse(c), inverse(a)),
    }
    x, y, z = mapping[form]
    if compose(x, y) != z:
        raise AssertionError("witness mapping broke the product equation")
    return PFWitness(x, y, z)


# ---------------------------------------------------------------------------
# extremal search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchResult:
    best: SetFamily
    size: int
    certificate: PFResult
    mode: str
    nodes: int
    best_family_size: int
    best_family_spec: str
    optimum_matches_family: bool
    budget_exhausted: bool

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "members": [format_perm(p) for p in self.best.members()],
            "certificate": self.certificate.to_dict(),
            "mode": self.mode,
            "nodes": self.nodes,
            "best_family_size": self.best_family_size,
            "best_family_spec": self.best_family_spec,
            "optimum_matches_family": self.optimum_matches_family,
            "budget_exhausted": self.budget_exhausted,
        }


def best_f_family(n: int) -> tuple[int, FamilySpec]:
    """Largest F family inside A_n over all centers and target sets."""
    best = (-1, None)
    for x in range(n):
        pool = [i for i in range(n) if i != x]
        for size in range(1, n):
            for src in itertools.combinations(pool, size):
                spec = FamilySpec("F", n, x=x, sources=src, ambient="An")
                cnt = len(build_family(spec))
                if cnt > best[0]:
                    best = (cnt, spec)
    return best


class _AltGroup:
    """A_n minus the identity, with a local multiplication table.

    The identity is excluded up front (id * id = id already breaks
    product-freeness); products equal to the identity are marked -1 in
    the local table and can never collide with a chosen set.
    """

    def __init__(self, n: int):
        self.n = n
        even = np.flatnonzero(parities(n) == 0)
        self.ranks = even[even != 0]  # identity has rank 0
        self.local = {int(r): k for k, r in enumerate(self.ranks)}
        table = mult_table(n)[np.ix_(self.ranks, self.ranks)]
        lut = np.full(factorial(n), -1, dtype=np.int32)
        lut[self.ranks] = np.arange(self.ranks.size, dtype=np.int32)
        self.mul = lut[table]
        self.size = int(self.ranks.size)
        self.sq = self.mul.diagonal().copy()
        self.inv = lut[inverse_ranks(n)[self.ranks]]
        # mask of u with u^2 = v, per v
        self.sq_preimage = [0] * self.size
        for u in range(self.size):
            s = int(self.sq[u])
            if s >= 0:
                self.sq_preimage[s] |= 1 << u

    def family_mask(self, fam: SetFamily) -> int:
        bits = 0
        for r in fam.ranks:
            k = self.local.get(int(r), -1)
            if k >= 0:
                bits |= 1 << k
        return bits

    def to_family(self, mask: int) -> SetFamily:
        idx = [k for k in range(self.size) if mask >> k & 1]
        return SetFamily(self.n, self.ranks[idx])

    def prod_mask(self, members: list[int]) -> int:
        bits = 0
        for u in members:
            row = self.mul[u]
            for w in members:
                t = int(row[w])
                if t >= 0:
                    bits |= 1 << t
        return bits


def _conflict_degrees(g: _AltGroup) -> np.ndarray:
    """Number of product triples (x, y, xy) within the universe that each
    element participates in, used as the static branching order."""
    deg = np.zeros(g.size, dtype=np.int64)
    for u in range(g.size):
        row = g.mul[u]
        hits = row[row >= 0]
        deg[u] += g.size * 2          # as left and as right factor
        np.add.at(deg, hits, 1)       # as the product
    return deg


def _static_pair_conflicts(g: _AltGroup) -> list[int]:
    """mask[u] = set of w such that {u, w} alone already has a product."""
    masks = [0] * g.size
    for u in range(g.size):
        for w in range(u + 1, g.size):
            uw, wu = int(g.mul[u, w]), int(g.mul[w, u])
            bad = (
                uw in (u, w)
                or wu in (u, w)
                or int(g.sq[u]) == w
                or int(g.sq[w]) == u
            )
            if bad:
                masks[u] |= 1 << w
                masks[w] |= 1 << u
    return masks


def _feasible_after(
    g: _AltGroup, chosen: list[int], v: int, cand: int, prod: int
) -> tuple[int, int]:
    """New (candidate mask, product mask) after adding v to chosen.

    Candidates already compatible with the old chosen set only need the
    checks that involve v: being a product of the new pairs, forming a
    product with v that lands in the set, or squaring to v.
    """
    new_prod = prod
    sq_v = int(g.sq[v])
    if sq_v >= 0:
        new_prod |= 1 << sq_v
    for s in chosen:
        for t in (int(g.mul[v, s]), int(g.mul[s, v])):
            if t >= 0:
                new_prod |= 1 << t
    bad = new_prod | g.sq_preimage[v]
    vin = int(g.inv[v])
    for s in chosen + [v]:
        t = int(g.mul[s, vin])   # u with u v = s
        if t >= 0:
            bad |= 1 << t
        t = int(g.mul[vin, s])   # u with v u = s
        if t >= 0:
            bad |= 1 << t
    return cand & ~(bad | (1 << v)), new_prod


def max_product_free(
    n: int,
    mode: str = "exact",
    budget: int = 200_000,
    seed: int = 0xC0FFEE,
) -> SearchResult:
    """Maximum (exact, n <= 5) or best-found (heuristic, n <= 7)
    product-free subset of A_n; the result is always re-certified."""
    if mode not in ("exact", "heuristic"):
        raise ValueError(f"unknown mode {mode!r}")
    if n < 3:
        raise ValueError("degree must be at least 3")
    if mode == "exact" and factorial(n) // 2 > 60:
        raise ValueError("exact mode supports |A_n| <= 60")
    if mode == "heuristic" and n > 7:
        raise ValueError("heuristic mode supports degree <= 7")
    g = _AltGroup(n)
    fam_size, fam_spec = best_f_family(n)
    seed_masks = [g.family_mask(build_family(fam_spec))]
    inv_mask = g.family_mask(invert_family(build_family(fam_spec)))
    seed_masks.append(inv_mask)

    if mode == "heuristic":
        best_mask, iters, exhausted = _local_search(g, seed_masks, budget, seed)
        nodes = iters
    else:
        # a strong warm start is cheap and sharpens the pruning bound
        warm, _, _ = _local_search(g, seed_masks, min(budget, 60_000), seed)
        best_mask, nodes = _branch_and_bound(g, warm)
        exhausted = False
    best = g.to_family(best_mask)
    cert = is_product_free(best)
    if not cert.product_free:
        raise AssertionError("search returned a set that fails certification")
    return SearchResult(
        best=best,
        size=len(best),
        certificate=cert,
        mode=mode,
        nodes=nodes,
        best_family_size=fam_size,
        best_family_spec=fam_spec.describe(),
        optimum_matches_family=len(best) == fam_size,
        budget_exhausted=exhausted,
    )


def exhaustive_max_product_free(n: int) -> int:
    """Independent oracle: maximum product-free subset size of A_n by
    scanning all 2^(|A_n|-1) identity-free subsets (n <= 4 only)."""
    if n > 4:
        raise ValueError("exhaustive oracle supports degree <= 4")
    g = _AltGroup(n)
    best = 0
    for mask in range(1 << g.size):
        if mask.bit_count() > best and _mask_product_free(g, mask):
            best = mask.bit_count()
    return best


def _mask_product_free(g: _AltGroup, mask: int) -> bool:
    members = [k for k in range(g.size) if mask >> k & 1]
    for u in members:
        row = g.mul[u]
        for w in members:
            t = int(row[w])
            if t >= 0 and mask >> t & 1:
                return False
    return True


def _local_search(
    g: _AltGroup, seeds: list[int], budget: int, seed: int
) -> tuple[int, int, bool]:
    """Randomized add/drop local search with restarts; deterministic for
    a fixed seed. Keeps the pair-product mask in sync so feasibility is
    O(|S|) per attempted add. Returns (best, iterations, exhausted)."""
    rng = np.random.default_rng(seed)
    best = 0
    for s in seeds:
        if _mask_product_free(g, s) and s.bit_count() > best.bit_count():
            best = s
    iters = 0
    n_restarts = len(seeds) + 2
    per_restart = max(1, budget // n_restarts)
    for restart in range(n_restarts):
        cur_mask = 0
        if restart < len(seeds) and _mask_product_free(g, seeds[restart]):
            cur_mask = seeds[restart]
        members = [k for k in range(g.size) if cur_mask >> k & 1]
        prod = g.prod_mask(members)
        spent = 0
        while spent < per_restart and iters < budget:
            spent += 1
            iters += 1
            u = int(rng.integers(0, g.size))
            if cur_mask >> u & 1:
                continue
            if _add_feasible(g, cur_mask, members, prod, u):
                cur_mask |= 1 << u
                sq_u = int(g.sq[u])
                if sq_u >= 0:
                    prod |= 1 << sq_u
                for s in members:
                    for t in (int(g.mul[u, s]), int(g.mul[s, u])):
                        if t >= 0:
                            prod |= 1 << t
                members.append(u)
                if cur_mask.bit_count() > best.bit_count():
                    best = cur_mask
            elif members and rng.random() < 0.15:
                drop = members.pop(int(rng.integers(0, len(members))))
                cur_mask &= ~(1 << drop)
                prod = g.prod_mask(members)
    return best, iters, iters >= budget


def _add_feasible(
    g: _AltGroup, mask: int, members: list[int], prod: int, u: int
) -> bool:
    if prod >> u & 1:
        return False
    new = mask | (1 << u)
    sq_u = int(g.sq[u])
    if sq_u >= 0 and new >> sq_u & 1:
        return False
    for s in members:
        for t in (int(g.mul[u, s]), int(g.mul[s, u])):
            if t >= 0 and new >> t & 1:
                return False
    return True


def _branch_and_bound(
    g: _AltGroup, warm_mask: int, branch_order: str = "desc"
) -> tuple[int, int]:
    """Exact maximum product-free subset by DFS over include/exclude
    decisions in static conflict order, with an independent-pair bound.
    Deterministic; branch_order "asc" explores a different tree and must
    reach the same optimum (used as a self-check)."""
    degrees = _conflict_degrees(g)
    order = np.argsort(-degrees if branch_order == "desc" else degrees, kind="stable")
    static = _static_pair_conflicts(g)
    best_mask = warm_mask if _mask_product_free(g, warm_mask) else 0
    best_size = best_mask.bit_count()
    full = (1 << g.size) - 1
    nodes = 0

    def pair_bound(cand: int) -> int:
        # greedy disjoint statically-conflicting pairs inside cand
        count = 0
        avail = cand
        m = avail
        while m:
            u = (m & -m).bit_length() - 1
            m &= m - 1
            if not avail >> u & 1:
                continue
            hit = static[u] & avail & ~(1 << u)
            if hit:
                w = (hit & -hit).bit_length() - 1
                avail &= ~((1 << u) | (1 << w))
                m &= ~(1 << w)
                count += 1
        return cand.bit_count() - count

    def dfs(chosen: list[int], chosen_mask: int, cand: int, prod: int):
        nonlocal best_mask, best_size, nodes
        nodes += 1
        size = len(chosen)
        if size > best_size:
            best_size, best_mask = size, chosen_mask
        if not cand:
            return
        if size + pair_bound(cand) <= best_size:
            return
        # branch on the highest-static-degree candidate
        v = -1
        for u in order:
            if cand >> int(u) & 1:
                v = int(u)
                break
        new_cand, new_prod = _feasible_after(g, chosen, v, cand, prod)
        dfs(chosen + [v], chosen_mask | (1 << v), new_cand, new_prod)
        dfs(chosen, chosen_mask, cand & ~(1 << v), prod)

    dfs([], 0, full, 0)
    return best_mask, nodes
