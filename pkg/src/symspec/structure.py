"""Globalness scans, the negative/random/structured coefficient split,
associated stars, and the star inequalities.

Densities inside umvirates are computed with one pass of t-tuple key
counting over the member list (keys are (positions, images) tuples), not
by filtering per umvirate; at degree 8 and t = 4 there are 2.8M
umvirates, so the scan must be a single pass.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from math import factorial
from typing import Sequence

import numpy as np

from .funcspace import GroupFunction, SetFamily
from .linear import CoeffMatrix, interval_slice, normalized_form
from .perm import all_perms

#: exhaustive restriction scans are capped here
MAX_SCAN_T = 4
MAX_SCAN_DEGREE = 10

#: slack for inequalities with fully explicit constants
INEQ_ATOL = 1e-12


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Parameters:
    """Density and threshold bookkeeping for a triple of sets.

    delta defaults to a user-supplied value (0.25) because the literal
    log^{-R} n prescription is vacuous at desk-scale n; pass explicit_r
    to use the literal formula.
    """

    n: int
    alpha: float
    beta: float
    gamma: float
    delta: float = 0.25

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        for v in (self.alpha, self.beta, self.gamma):
            if v < 0:
                raise ValueError("densities must be nonnegative")

    @classmethod
    def from_log_exponent(
        cls, n: int, alpha: float, beta: float, gamma: float, r: float
    ) -> "Parameters":
        return cls(n, alpha, beta, gamma, delta=math.log(n) ** (-r))

    @classmethod
    def for_single_set(cls, a: SetFamily, delta: float = 0.25) -> "Parameters":
        mu = a.mu("Sn")
        return cls(a.degree, mu, mu, mu, delta)

    @classmethod
    def for_triple(
        cls, a: SetFamily, b: SetFamily, c: SetFamily, delta: float = 0.25
    ) -> "Parameters":
        return cls(a.degree, a.mu("Sn"), b.mu("Sn"), c.mu("Sn"), delta)

    @property
    def eps_a(self) -> float:
        return self.n * self.delta * self.alpha * min(self.beta, self.gamma)

    @property
    def eps_b(self) -> float:
        return self.n * self.delta * self.beta * min(self.alpha, self.gamma)

    @property
    def eps_c(self) -> float:
        return self.n * self.delta * self.gamma * min(self.alpha, self.beta)

    def eps_for(self, role: str) -> float:
        return {"A": self.eps_a, "B": self.eps_b, "C": self.eps_c}[role]

    def mu_for(self, role: str) -> float:
        return {"A": self.alpha, "B": self.beta, "C": self.gamma}[role]


# ---------------------------------------------------------------------------
# globalness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GlobalnessReport:
    t: int
    worst_sources: tuple[int, ...]
    worst_targets: tuple[int, ...]
    worst_density: float
    epsilon: float          # worst density = epsilon^2
    relative_k: float       # worst density / mu(A), same convention both sides
    mu: float
    convention: str
    per_t: tuple[tuple[int, float], ...]  # (size, worst density at that size)

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "worst_sources": [i + 1 for i in self.worst_sources],
            "worst_targets": [j + 1 for j in self.worst_targets],
            "worst_density": self.worst_density,
            "epsilon": self.epsilon,
            "relative_k": self.relative_k,
            "mu": self.mu,
            "convention": self.convention,
            "per_t": [{"t": s, "worst_density": w} for s, w in self.per_t],
        }


def _scan_size(a: SetFamily, s: int, reference: float) -> tuple[float, tuple, tuple]:
    """Worst density over all s-umvirates, one counting pass per position
    tuple; deterministic tie-break on the first lexicographic maximizer."""
    n = a.degree
    rows = a.image_rows().astype(np.int64)
    best = -1.0
    best_key = None
    for pos in itertools.combinations(range(n), s):
        key = np.zeros(rows.shape[0], dtype=np.int64)
        for i in pos:
            key = key * n + rows[:, i]
        counts = np.bincount(key, minlength=n**s)
        k = int(np.argmax(counts))
        dens = counts[k] / reference
        if dens > best + 1e-15:
            digits = []
            kk = k
            for _ in range(s):
                digits.append(kk % n)
                kk //= n
            best = float(dens)
            best_key = (pos, tuple(reversed(digits)))
    return best, best_key[0], best_key[1]


def globalness(a: SetFamily, t: int, convention: str = "Sn") -> GlobalnessReport:
    """Exhaustive restriction scan: the worst density of A inside any
    umvirate of size 1..t, with both the (t, eps) and relative (t, K)
    parameterisations."""
    n = a.degree
    if not 1 <= t <= min(MAX_SCAN_T, n - 1):
        raise ValueError("t out of range")
    if n > MAX_SCAN_DEGREE:
        raise ValueError("degree too large")
    if convention == "An" and t > n - 2:
        raise ValueError("t too large for the A_n convention")
    if len(a) == 0:
        raise ValueError("empty set")
    per_t = []
    best = (-1.0, (), ())
    for s in range(1, t + 1):
        ref = factorial(n - s)
        if convention == "An":
            ref //= 2
        worst, pos, img = _scan_size(a, s, ref)
        per_t.append((s, worst))
        if worst > best[0] + 1e-15:
            best = (worst, pos, img)
    mu = a.mu(convention)
    worst = best[0]
    return GlobalnessReport(
        t=t,
        worst_sources=best[1],
        worst_targets=best[2],
        worst_density=worst,
        epsilon=float(np.sqrt(worst)),
        relative_k=worst / mu,
        mu=mu,
        convention=convention,
        per_t=tuple(per_t),
    )


def function_globalness(f: GroupFunction, t: int) -> tuple[float, tuple, tuple]:
    """Worst conditional L2 norm over the size-t restrictions of f.

    This is the function-level globalness parameter: f is (t, eps)-global
    when the returned worst norm is at most eps. Restricted norms are
    monotone in the restriction size, so the exact-size scan also bounds
    every smaller restriction.
    """
    n = f.degree
    if not 1 <= t <= min(MAX_SCAN_T, n - 1):
        raise ValueError("t out of range")
    perms = all_perms(n)
    sq = f.values * f.values
    best = (-1.0, (), ())
    ref = factorial(n - t)
    for pos in itertools.combinations(range(n), t):
        key = np.zeros(perms.shape[0], dtype=np.int64)
        for i in pos:
            key = key * n + perms[:, i]
        sums = np.bincount(key, weights=sq, minlength=n**t)
        k = int(np.argmax(sums))
        norm = float(np.sqrt(sums[k] / ref))
        if norm > best[0] + 1e-15:
            digits = []
            kk = k
            for _ in range(t):
                digits.append(kk % n)
                kk //= n
            best = (norm, pos, tuple(reversed(digits)))
    return best


def relative_globalness_profile(
    a: SetFamily, t_max: int, exponents: Sequence[float] | None = None
) -> list[dict]:
    """Per-size relative globalness: for each restriction size t <= t_max,
    the worst density against K_t mu(A) with K_t = n^{e_t}.

    The exponent profile defaults to e_t = t/4 but stays caller-supplied:
    the pairing of restriction size with threshold exponent is a tunable,
    not a constant of the library.
    """
    n = a.degree
    if exponents is None:
        exponents = [t / 4 for t in range(1, t_max + 1)]
    if len(exponents) != t_max:
        raise ValueError("need one exponent per restriction size")
    mu = a.mu("Sn")
    rep = globalness(a, t_max)
    out = []
    for (t, worst), e in zip(rep.per_t, exponents):
        k = n**e
        out.append(
            {
                "t": t,
                "worst_density": worst,
                "exponent": e,
                "k": k,
                "relatively_global": bool(worst <= k * mu + INEQ_ATOL),
            }
        )
    return out


@dataclass(frozen=True)
class BumpReport:
    r: int
    best_t: int
    sources: tuple[int, ...]
    targets: tuple[int, ...]
    density: float
    threshold: float
    ratio: float
    passes: bool
    per_t: tuple[dict, ...]

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "best_t": self.best_t,
            "sources": [i + 1 for i in self.sources],
            "targets": [j + 1 for j in self.targets],
            "density": self.density,
            "threshold": self.threshold,
            "ratio": self.ratio,
            "passes": self.passes,
            "per_t": list(self.per_t),
        }


def density_bump_search(a: SetFamily, r: int = 1) -> BumpReport:
    """Scan t = 1..4r for an umvirate where the density of A beats
    n^{t/4} mu(A). The threshold conclusion is reported, never asserted:
    it is an asymptotic statement."""
    if len(a) == 0:
        raise ValueError("empty set")
    if not 1 <= 4 * r <= 4:
        raise ValueError("4r must be at most 4")
    n = a.degree
    mu = a.mu("Sn")
    per_t = []
    best = None
    for t in range(1, 4 * r + 1):
        worst, pos, img = _scan_size(a, t, factorial(n - t))
        threshold = n ** (t / 4) * mu
        ratio = worst / threshold
        per_t.append(
            {
                "t": t,
                "density": worst,
                "threshold": threshold,
                "ratio": ratio,
                "sources": [i + 1 for i in pos],
                "targets": [j + 1 for j in img],
            }
        )
        if best is None or ratio > best[0] + 1e-15:
            best = (ratio, t, pos, img, worst, threshold)
    ratio, t, pos, img, dens, threshold = best
    return BumpReport(
        r=r,
        best_t=t,
        sources=pos,
        targets=img,
        density=dens,
        threshold=threshold,
        ratio=ratio,
        passes=bool(dens >= threshold - INEQ_ATOL),
        per_t=tuple(per_t),
    )


# ---------------------------------------------------------------------------
# coefficient split
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StructureDecomposition:
    source: np.ndarray
    eps: float
    minus: np.ndarray   # entries in (-inf, 0)
    rand: np.ndarray    # entries in (0, eps)
    struc: np.ndarray   # entries in [eps, inf)

    def reassembled(self) -> np.ndarray:
        return self.minus + self.rand + self.struc


def decompose_coeffs(m: CoeffMatrix | np.ndarray, eps: float) -> StructureDecomposition:
    """Interval slices (-inf,0), (0,eps), [eps,inf): an exact partition
    of the nonzero entries."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    arr = m.entries if isinstance(m, CoeffMatrix) else np.asarray(m, dtype=np.float64)
    return StructureDecomposition(
        source=arr,
        eps=eps,
        minus=interval_slice(arr, upper=0.0, include_lower=False),
        rand=interval_slice(arr, lower=0.0, upper=eps, include_lower=False),
        struc=interval_slice(arr, lower=eps, include_lower=True, upper=np.inf),
    )


# ---------------------------------------------------------------------------
# associated stars
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StarSystem:
    degree: int
    eps: float
    delta: float
    mu: float
    coeffs: np.ndarray
    targets: tuple[tuple[int, ...], ...]          # L(i): j with a_ij > eps
    inverse_targets: tuple[tuple[int, ...], ...]  # L'(i): j with a_ji > eps
    weights: np.ndarray                           # s(i)
    inverse_weights: np.ndarray                   # s'(i)
    large: np.ndarray                             # s(i) > delta mu
    inverse_large: np.ndarray
    star_matrix: np.ndarray                       # rows of struc or zero
    inverse_star_matrix: np.ndarray               # rows of struc^T or zero

    def star_set(self, i: int) -> SetFamily:
        from .families import build_star

        return build_star(self.degree, i, self.targets[i])

    def inverse_star_set(self, i: int) -> SetFamily:
        from .families import build_inverse_star

        return build_inverse_star(self.degree, i, self.inverse_targets[i])


def star_system(
    a: SetFamily, params: Parameters, role: str = "A"
) -> StarSystem:
    """Stars associated to the structured coefficients of A.

    L(i) collects the columns with a_ij > eps; s(i) sums those
    coefficients over n-1 and equals the correlation of A with the star
    1_{i -> L(i)}; a star is large when s(i) > delta mu(A). The star
    matrix keeps exactly the structured rows of large stars.
    """
    n = a.degree
    eps = params.eps_for(role)
    if eps < 0:
        raise ValueError("star threshold eps must be nonnegative")
    coeffs = normalized_form(GroupFunction.indicator(a)).entries
    mu = a.mu("Sn")
    struc = interval_slice(coeffs, lower=eps, include_lower=True, upper=np.inf)
    targets = tuple(
        tuple(int(j) for j in np.flatnonzero(coeffs[i] > eps)) for i in range(n)
    )
    inverse_targets = tuple(
        tuple(int(j) for j in np.flatnonzero(coeffs[:, i] > eps)) for i in range(n)
    )
    weights = np.array(
        [coeffs[i, list(targets[i])].sum() / (n - 1) if targets[i] else 0.0 for i in range(n)]
    )
    inverse_weights = np.array(
        [
            coeffs[list(inverse_targets[i]), i].sum() / (n - 1)
            if inverse_targets[i]
            else 0.0
            for i in range(n)
        ]
    )
    large = weights > params.delta * mu
    inverse_large = inverse_weights > params.delta * mu
    star_matrix = np.where(large[:, None], struc, 0.0)
    inverse_star_matrix = np.where(inverse_large[:, None], struc.T, 0.0)
    return StarSystem(
        degree=n,
        eps=eps,
        delta=params.delta,
        mu=mu,
        coeffs=coeffs,
        targets=targets,
        inverse_targets=inverse_targets,
        weights=weights,
        inverse_weights=inverse_weights,
        large=large,
        inverse_large=inverse_large,
        star_matrix=star_matrix,
        inverse_star_matrix=inverse_star_matrix,
    )


# ---------------------------------------------------------------------------
# star inequalities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StarInequalityResult:
    lhs: float
    rhs: float
    zeta: float
    holds: bool


def star_inequalities(
    v: np.ndarray, u: np.ndarray, zeta: float
) -> StarInequalityResult:
    """||v||_2^2 + ||u||_2^2 + <v, u> <= 1 - zeta(1 - zeta) for
    nonnegative vectors with entries <= 1 - zeta and total ell-1 mass 1
    (the inputs are rescaled to total mass 1 first)."""
    if not 0 <= zeta <= 0.5:
        raise ValueError("zeta must lie in [0, 1/2]")
    v = np.asarray(v, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if v.shape != u.shape or v.ndim != 1:
        raise ValueError("v and u must be vectors of equal length")
    if np.any(v < 0) or np.any(u < 0):
        raise ValueError("entries must be nonnegative")
    total = float(v.sum() + u.sum())
    if total <= 0:
        raise ValueError("vectors must carry positive mass")
    v = v / total
    u = u / total
    if np.max(v, initial=0.0) > 1 - zeta + INEQ_ATOL or np.max(u, initial=0.0) > 1 - zeta + INEQ_ATOL:
        raise ValueError("entries exceed 1 - zeta after normalization")
    lhs = float(v @ v + u @ u + v @ u)
    rhs = 1 - zeta * (1 - zeta)
    holds = lhs <= rhs + INEQ_ATOL
    if not holds:
        raise ArithmeticError("star inequality violated")
    return StarInequalityResult(lhs=lhs, rhs=rhs, zeta=zeta, holds=holds)


def triple_sum_identity(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """(<X 1, Y 1>, sum_{i,j,k} x_ij y_ik) -- equal by expansion; both
    sides are computed through independent routes."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    lhs = float((x @ np.ones(x.shape[1])) @ (y @ np.ones(y.shape[1])))
    rhs = float(np.einsum("ij,ik->", x, y))
    return lhs, rhs


# ---------------------------------------------------------------------------
# near-disjointness of large stars
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Star:
    """A star 1_{center -> targets} or its inverse-image counterpart."""

    kind: str  # "star" | "inverse"
    center: int
    targets: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in ("star", "inverse"):
            raise ValueError(f"unknown star kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(sorted(set(self.targets))))

    def mu(self, n: int) -> float:
        return len(self.targets) / n

    def member_mask(self, rows: np.ndarray) -> np.ndarray:
        if not self.targets:
            return np.zeros(rows.shape[0], dtype=bool)
        if self.kind == "star":
            return np.isin(rows[:, self.center], self.targets)
        mask = np.zeros(rows.shape[0], dtype=bool)
        for j in self.targets:
            mask |= rows[:, j] == self.center
        return mask


@dataclass(frozen=True)
class DisjointnessReport:
    mu_e: float
    star_intersections: tuple[float, ...]
    hypothesis_failures: tuple[str, ...]
    gate_holds: bool
    lhs: float
    rhs: float
    inequality_holds: bool

    def to_dict(self) -> dict:
        return {
            "mu_e": self.mu_e,
            "star_intersections": list(self.star_intersections),
            "hypothesis_failures": list(self.hypothesis_failures),
            "gate_holds": self.gate_holds,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "inequality_holds": self.inequality_holds,
        }


def star_disjointness_check(
    e: SetFamily, stars: Sequence[Star], eps: float, delta: float
) -> DisjointnessReport:
    """Gate-checked near-disjointness: when every star intersects E in
    measure >= delta mu(E) and >= (eps/2) mu(S), and
    100/(delta^2 n) <= mu(E) <= delta^2 eps^2 / 100, then
    sum mu(E cap S) <= mu(E) + 20 mu(E)^2/(delta^2 eps^2) + 4/(delta^2 n).

    When a hypothesis fails only the failure is reported; the (always
    computed) inequality values stay advisory. A gate pass with a failed
    conclusion raises, since every constant is explicit.
    """
    n = e.degree
    mu_e = e.mu("Sn")
    rows = e.image_rows()
    inters = []
    failures = []
    for k, star in enumerate(stars):
        inter = int(star.member_mask(rows).sum()) / factorial(n)
        inters.append(inter)
        if inter < delta * mu_e - INEQ_ATOL:
            failures.append(f"star {k}: mu(E cap S) < delta mu(E)")
        if inter < (eps / 2) * star.mu(n) - INEQ_ATOL:
            failures.append(f"star {k}: mu(E cap S) < (eps/2) mu(S)")
    if mu_e < 100 / (delta**2 * n) - INEQ_ATOL:
        failures.append("mu(E) < 100/(delta^2 n)")
    if mu_e > delta**2 * eps**2 / 100 + INEQ_ATOL:
        failures.append("mu(E) > delta^2 eps^2 / 100")
    gate = not failures
    lhs = float(sum(inters))
    rhs = mu_e + 20 * mu_e**2 / (delta**2 * eps**2) + 4 / (delta**2 * n)
    holds = lhs <= rhs + INEQ_ATOL
    if gate and not holds:
        raise ArithmeticError("star disjointness bound violated under its hypotheses")
    return DisjointnessReport(
        mu_e=mu_e,
        star_intersections=tuple(inters),
        hypothesis_failures=tuple(failures),
        gate_holds=gate,
        lhs=lhs,
        rhs=rhs,
        inequality_holds=holds,
    )


def dyadic_overlap_bound(
    m: np.ndarray, n_: np.ndarray, m_limit: int, n_limit: int
) -> tuple[float, float]:
    """|<M 1, N 1>| <= sqrt(m' n') ||M|| ||N|| for matrices whose rows
    carry at most m' resp. n' nonzero entries (limits are verified)."""
    m = np.asarray(m, dtype=np.float64)
    n_ = np.asarray(n_, dtype=np.float64)
    if int((m != 0).sum(axis=1).max(initial=0)) > m_limit:
        raise ValueError("row support limit violated")
    if int((n_ != 0).sum(axis=1).max(initial=0)) > n_limit:
        raise ValueError("row support limit violated")
    lhs = abs(float((m @ np.ones(m.shape[1])) @ (n_ @ np.ones(n_.shape[1]))))
    rhs = float(np.sqrt(m_limit * n_limit) * np.linalg.norm(m) * np.linalg.norm(n_))
    if lhs > rhs + INEQ_ATOL:
        raise ArithmeticError("dyadic overlap bound violated")
    return lhs, rhs


# ---------------------------------------------------------------------------
# the ell-1 bound for star matrices, hypothesis-gated
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StarL1Report:
    l1_mass: float               # (||A_star||_1 + ||A'_star||_1)/(n-1)
    intersection_mass: float     # sum over large stars of mu(A cap S)
    rhs: float                   # alpha(1+delta) + explicit slack terms
    density_gate_holds: bool     # 1000/(delta^5 n^2) <= alpha min(beta,gamma)^2
    disjointness: DisjointnessReport
    gate_holds: bool
    inequality_holds: bool

    def to_dict(self) -> dict:
        return {
            "l1_mass": self.l1_mass,
            "intersection_mass": self.intersection_mass,
            "rhs": self.rhs,
            "density_gate_holds": self.density_gate_holds,
            "disjointness": self.disjointness.to_dict(),
            "gate_holds": self.gate_holds,
            "inequality_holds": self.inequality_holds,
        }


def star_l1_report(a: SetFamily, params: Parameters, role: str = "A") -> StarL1Report:
    """ell-1 mass of the star matrices against the explicit-constant
    chain alpha(1+delta) + 20 alpha^2/(delta^2 eps^2) + 4/(delta^2 n).

    Asserted only when the density gate and every near-disjointness
    hypothesis hold; at small n the hypotheses generally fail and the
    values are reported for audit.
    """
    n = a.degree
    system = star_system(a, params, role)
    alpha = params.mu_for(role)
    eps = params.eps_for(role)
    delta = params.delta
    others = {"A": (params.beta, params.gamma), "B": (params.alpha, params.gamma), "C": (params.alpha, params.beta)}[role]
    l1 = (np.abs(system.star_matrix).sum() + np.abs(system.inverse_star_matrix).sum()) / (n - 1)
    stars = [
        Star("star", i, system.targets[i])
        for i in range(n)
        if system.large[i]
    ] + [
        Star("inverse", i, system.inverse_targets[i])
        for i in range(n)
        if system.inverse_large[i]
    ]
    disj = star_disjointness_check(a, stars, eps, delta)
    density_gate = 1000 / (delta**5 * n**2) <= alpha * min(others) ** 2 + INEQ_ATOL
    rhs = alpha * (1 + delta) + 20 * alpha**2 / (delta**2 * eps**2) + 4 / (delta**2 * n)
    gate = density_gate and disj.gate_holds
    holds = l1 <= rhs + INEQ_ATOL
    if gate and not holds:
        raise ArithmeticError("star ell-1 bound violated under its hypotheses")
    return StarL1Report(
        l1_mass=float(l1),
        intersection_mass=float(sum(disj.star_intersections)),
        rhs=float(rhs),
        density_gate_holds=bool(density_gate),
        disjointness=disj,
        gate_holds=bool(gate),
        inequality_holds=bool(holds),
    )


# ---------------------------------------------------------------------------
# term-by-term calculator for the structured expansion
# ---------------------------------------------------------------------------


def struc_terms_report(
    a: SetFamily, b: SetFamily, c: SetFamily, params: Parameters
) -> dict:
    """Every term <B_y A_x, C_z> of the 27-way expansion of <B A, C>
    over the minus/rand/struc split, plus the three structured-negative
    terms singled out by the analysis and the residual. No assertions:
    the error terms carry unspecified polylog factors."""
    ma = normalized_form(GroupFunction.indicator(a)).entries
    mb = normalized_form(GroupFunction.indicator(b)).entries
    mc = normalized_form(GroupFunction.indicator(c)).entries
    da = decompose_coeffs(ma, params.eps_a)
    db = decompose_coeffs(mb, params.eps_b)
    dc = decompose_coeffs(mc, params.eps_c)
    parts = {"minus": 0, "rand": 1, "struc": 2}
    pa = (da.minus, da.rand, da.struc)
    pb = (db.minus, db.rand, db.struc)
    pc = (dc.minus, dc.rand, dc.struc)
    n = a.degree
    total = float(np.sum((mb @ ma) * mc))
    terms = {}
    for bn, bi in parts.items():
        for an, ai in parts.items():
            for cn, ci in parts.items():
                terms[f"B_{bn} A_{an} C_{cn}"] = float(np.sum((pb[bi] @ pa[ai]) * pc[ci]))
    named = {
        "B_struc A_minus C_struc": terms["B_struc A_minus C_struc"],
        "B_minus A_struc C_struc": terms["B_minus A_struc C_struc"],
        "B_struc A_struc C_minus": terms["B_struc A_struc C_minus"],
    }
    main = sum(named.values())
    return {
        "total": total,
        "total_normalized": total / (n - 1) ** 2,
        "terms": terms,
        "main_negative_terms": named,
        "residual": total - main,
        "part_norms": {
            "A_minus": float(np.linalg.norm(da.minus)),
            "A_rand": float(np.linalg.norm(da.rand)),
            "A_struc": float(np.linalg.norm(da.struc)),
            "B_minus": float(np.linalg.norm(db.minus)),
            "B_rand": float(np.linalg.norm(db.rand)),
            "B_struc": float(np.linalg.norm(db.struc)),
            "C_minus": float(np.linalg.norm(dc.minus)),
            "C_rand": float(np.linalg.norm(dc.rand)),
            "C_struc": float(np.linalg.norm(dc.struc)),
        },
        "eps": {"A": params.eps_a, "B": params.eps_b, "C": params.eps_c},
    }
