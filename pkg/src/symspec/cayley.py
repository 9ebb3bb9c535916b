"""Cayley convolution operators on L^2(S_n) and their spectra.

The left operator is (L_f g)(sigma) = E_pi[f(pi) g(pi sigma)] and the
right one is (R_f g)(sigma) = E_pi[g(sigma pi) f(pi)]; both commute with
the group action from one side, so they preserve every isotypic
component V_lambda and every level V_d. Two evaluation paths are kept
throughout: explicit n! x n! matrices (small n, oracle) and
convolution over the kernel support (production); tests pin them
together.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import e as EULER_E
from math import factorial

import numpy as np

from .funcspace import GroupFunction, inner_product, l2_norm, sign_twist
from .irreps import (
    MAX_EXACT_DEGREE,
    dual_level_of,
    isotypic_decompose,
    isotypic_projector_matrix,
    level_dimension,
    level_partitions,
    level_project,
    partition_dim,
    partitions,
)
from .perm import (
    all_perms,
    inverse_ranks,
    mult_table,
    parities,
    rank_rows,
    rank_rows_fast,
)

#: explicit-matrix constructions (trace oracle, isotypic compression)
MAX_MATRIX_DEGREE = 7
MAX_TRACE_DEGREE = 6
MAX_ISO_RADIUS_DEGREE = 6
MAX_LEVEL_RADIUS_DEGREE = 7
MAX_LEVEL_RADIUS_D = 3
#: dense convolution guard; above it the kernel support must be small
MAX_DENSE_APPLY_DEGREE = 8
MAX_SPARSE_SUPPORT = 100_000

#: relative tolerance used to cluster eigenvalues when counting
#: multiplicities; reported so borderline clusters are auditable
EIG_CLUSTER_RTOL = 1e-8
#: absolute floor for the clustering scale, so that blocks on which the
#: operator vanishes collapse to a single zero eigenvalue
EIG_CLUSTER_FLOOR = 1e-12

_BASIS_SEED = 0xC0FFEE


@dataclass(frozen=True)
class CayleyOperator:
    kernel: GroupFunction
    side: str = "left"

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ValueError(f"unknown side {self.side!r}")


def left_operator(f: GroupFunction) -> CayleyOperator:
    return CayleyOperator(f, "left")


def right_operator(f: GroupFunction) -> CayleyOperator:
    return CayleyOperator(f, "right")


def apply(op: CayleyOperator, g: GroupFunction) -> GroupFunction:
    """Exact group-algebra convolution over the kernel's support."""
    f = op.kernel
    n = f.degree
    if g.degree != n:
        raise ValueError("degree mismatch")
    support = np.flatnonzero(f.values)
    if n > MAX_DENSE_APPLY_DEGREE and support.size > MAX_SPARSE_SUPPORT:
        raise ValueError("kernel support too large at this degree")
    fact = factorial(n)
    out = np.zeros(fact)
    if n <= MAX_MATRIX_DEGREE:
        table = mult_table(n)
        for pi in support:
            row = table[pi] if op.side == "left" else table[:, pi]
            out += f.values[pi] * g.values[row]
    else:
        perms = all_perms(n)
        pidx = perms.astype(np.intp)
        ranker = rank_rows_fast if n <= 8 else rank_rows
        for pi in support:
            if op.side == "left":
                rows = perms[pi][pidx]                      # pi o sigma
            else:
                rows = perms[:, perms[pi].astype(np.intp)]  # sigma o pi
            out += f.values[pi] * g.values[ranker(rows)]
    return GroupFunction(n, out / fact)


def operator_matrix(op: CayleyOperator) -> np.ndarray:
    """Explicit matrix M with (op g)(sigma) = sum_tau M[sigma, tau] g(tau).

    Left: M[sigma, tau] = f(tau sigma^{-1})/n!.
    Right: M[sigma, tau] = f(sigma^{-1} tau)/n!.
    """
    f = op.kernel
    n = f.degree
    if n > MAX_MATRIX_DEGREE:
        raise ValueError("degree too large")
    table = mult_table(n)
    ir = inverse_ranks(n).astype(np.intp)
    fact = factorial(n)
    if op.side == "left":
        return f.values[table[:, ir]].T / fact
    return f.values[table[ir, :]] / fact


def right_translate(g: GroupFunction, tau_rank: int) -> GroupFunction:
    """(g tau)(pi) = g(pi tau^{-1}), by rank of tau."""
    n = g.degree
    table = mult_table(n)
    ir = int(inverse_ranks(n)[tau_rank])
    return GroupFunction(n, g.values[table[:, ir]])


def trace_check(f: GroupFunction, side: str = "left") -> tuple[float, float]:
    """(tr(T* T), ||f||_2^2) from the explicit operator matrix; the two
    agree for both the left and the right operator."""
    if f.degree > MAX_TRACE_DEGREE:
        raise ValueError("degree too large")
    # the adjoint under the expectation inner product is the plain matrix
    # transpose (uniform weights cancel), so tr(T* T) is the entry mass
    mat = operator_matrix(CayleyOperator(f, side))
    trace = float(np.sum(mat * mat))
    return trace, inner_product(f, f)


# ---------------------------------------------------------------------------
# compressed spectra
# ---------------------------------------------------------------------------


def _orthonormal_basis(projector: np.ndarray, dim: int) -> np.ndarray:
    """Expectation-orthonormal basis of the range of a projector matrix."""
    fact = projector.shape[0]
    rng = np.random.default_rng(_BASIS_SEED)
    probe = rng.standard_normal((fact, dim + 8))
    image = projector @ probe
    u, s, _ = np.linalg.svd(image, full_matrices=False)
    if s.size < dim or s[dim - 1] <= s[0] * 1e-9:
        raise ArithmeticError("projector rank below expected dimension")
    return u[:, :dim] * np.sqrt(fact)


def _compress(op: CayleyOperator, basis: np.ndarray) -> np.ndarray:
    mat = operator_matrix(op)
    return basis.T @ (mat @ basis) / basis.shape[0]


#: power iteration settings for large compressed blocks
POWER_ITER_CAP = 1000
POWER_ITER_RESIDUAL = 1e-10
FULL_SOLVE_MAX_DIM = 2000


def _largest_singular_value(c: np.ndarray) -> float:
    if c.shape[0] <= FULL_SOLVE_MAX_DIM:
        return float(np.linalg.svd(c, compute_uv=False)[0])
    gram = c.T @ c
    v = np.full(c.shape[0], 1.0 / np.sqrt(c.shape[0]))
    lam = 0.0
    for _ in range(POWER_ITER_CAP):
        w = gram @ v
        new_lam = float(np.linalg.norm(w))
        if new_lam == 0.0:
            return 0.0
        v = w / new_lam
        if abs(new_lam - lam) <= POWER_ITER_RESIDUAL * max(new_lam, 1.0):
            lam = new_lam
            break
        lam = new_lam
    return float(np.sqrt(lam))


@dataclass(frozen=True)
class LevelRadius:
    d: int
    r: float
    r_from_level_kernel: float
    dim: int


def level_radius(f: GroupFunction, d: int) -> LevelRadius:
    """r_d(L_f): largest singular value of L_f compressed to V_d.

    Also recomputes the radius with the kernel replaced by its own
    level-d part, which must agree because L_f and L_{f^{=d}} coincide
    on V_d.
    """
    n = f.degree
    if n > MAX_LEVEL_RADIUS_DEGREE:
        raise ValueError("degree too large")
    if not 0 <= d <= min(MAX_LEVEL_RADIUS_D, n - 1):
        raise ValueError("level out of range")
    dim = level_dimension(n, d)
    projector = isotypic_projector_matrix(n, level_partitions(n, d))
    basis = _orthonormal_basis(projector, dim)
    r = _largest_singular_value(_compress(left_operator(f), basis))
    f_d = level_project(f, d)
    r_level = _largest_singular_value(_compress(left_operator(f_d), basis))
    return LevelRadius(d, r, r_level, dim)


@dataclass(frozen=True)
class IsotypicRadius:
    lam: tuple[int, ...]
    r: float
    dim: int
    eigs: tuple[tuple[float, int], ...]  # (eigenvalue of L*L, multiplicity)
    spread: float
    min_multiplicity: int


def isotypic_radius(f: GroupFunction, lam) -> IsotypicRadius:
    """Spectrum of L_f* L_f inside V_lambda, with eigenvalue multiplicities.

    Every eigenspace of a one-side-commuting self-adjoint operator inside
    V_lambda has dimension at least dim(lambda); the clustered
    multiplicities make that checkable.
    """
    n = f.degree
    if n > MAX_ISO_RADIUS_DEGREE:
        raise ValueError("degree too large")
    lam = tuple(int(x) for x in lam)
    dim_l = partition_dim(lam)
    dim_space = dim_l * dim_l
    projector = isotypic_projector_matrix(n, [lam])
    basis = _orthonormal_basis(projector, dim_space)
    c = _compress(left_operator(f), basis)
    evals = np.linalg.eigvalsh(c.T @ c)[::-1]
    clusters = _cluster(evals)
    r = float(np.sqrt(max(evals[0], 0.0)))
    spread = float(evals[0] - evals[-1])
    return IsotypicRadius(
        lam=lam,
        r=r,
        dim=dim_l,
        eigs=tuple((float(v), m) for v, m in clusters),
        spread=spread,
        min_multiplicity=min(m for _, m in clusters),
    )


def _cluster(evals: np.ndarray) -> list[tuple[float, int]]:
    scale = max(float(np.max(np.abs(evals), initial=0.0)), EIG_CLUSTER_FLOOR)
    out: list[list[float]] = []
    for v in evals:
        if out and abs(out[-1][-1] - v) <= EIG_CLUSTER_RTOL * scale:
            out[-1].append(float(v))
        else:
            out.append([float(v)])
    return [(float(np.mean(c)), len(c)) for c in out]


def radius_ratio_report(f: GroupFunction, d: int) -> dict:
    """Diagnostic ratio r_d * n^{d/2} / (||f||_2 * eps) where eps is the
    worst 2d-restriction norm of f.

    The matching eigenvalue estimate carries unknown 2^{Cd^4} log^{Cd}
    factors, so the ratio is emitted for inspection, never asserted.
    """
    from .structure import function_globalness

    n = f.degree
    res = level_radius(f, d)
    eps, sources, targets = function_globalness(f, max(1, 2 * d))
    norm = l2_norm(f)
    denom = norm * eps
    return {
        "d": d,
        "r": res.r,
        "eps": eps,
        "worst_sources": [i + 1 for i in sources],
        "worst_targets": [j + 1 for j in targets],
        "norm": norm,
        "ratio": res.r * n ** (d / 2) / denom if denom > 0 else None,
    }


@dataclass(frozen=True)
class SpectralReport:
    levels: tuple[LevelRadius, ...]
    partitions: tuple[IsotypicRadius, ...]
    trace: float
    norm_sq: float

    def to_dict(self) -> dict:
        return {
            "levels": [
                {"d": lr.d, "r": lr.r, "dim": lr.dim} for lr in self.levels
            ],
            "partitions": [
                {
                    "lambda": list(ir_.lam),
                    "r": ir_.r,
                    "dim": ir_.dim,
                    "eigs": [{"value": v, "mult": m} for v, m in ir_.eigs],
                }
                for ir_ in self.partitions
            ],
            "trace": self.trace,
            "norm_sq": self.norm_sq,
            "eig_cluster_rtol": EIG_CLUSTER_RTOL,
        }


def spectral_report(f: GroupFunction, d_max: int = 1) -> SpectralReport:
    n = f.degree
    levels = tuple(
        level_radius(f, d) for d in range(0, min(d_max, MAX_LEVEL_RADIUS_D, n - 1) + 1)
    )
    parts: tuple[IsotypicRadius, ...] = ()
    if n <= MAX_ISO_RADIUS_DEGREE:
        parts = tuple(isotypic_radius(f, lam) for lam in partitions(n))
    # the operator trace from the explicit matrix, independent of the
    # per-partition spectra it must budget for
    mat = operator_matrix(left_operator(f))
    trace = float(np.sum(mat * mat))
    return SpectralReport(levels, parts, trace, inner_product(f, f))


# ---------------------------------------------------------------------------
# triple products and the degree decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TripleDecomposition:
    """<g, L_f h> split into low levels, their sign twists, and the
    high dual-degree remainder."""

    d: int
    total: float
    level_terms: tuple[float, ...]          # i = 0..d
    twisted_terms: tuple[float, ...]        # i = 0..d
    remainder: float                        # sum over dual level > d
    identity_residual: float
    high_degree_bound: float
    high_degree_holds: bool
    indicator_stats: dict | None

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "total": self.total,
            "level_terms": list(self.level_terms),
            "twisted_terms": list(self.twisted_terms),
            "remainder": self.remainder,
            "identity_residual": self.identity_residual,
            "high_degree_bound": self.high_degree_bound,
            "high_degree_holds": self.high_degree_holds,
            "indicator_stats": self.indicator_stats,
        }


def triple_expectation(
    f: GroupFunction, g: GroupFunction, h: GroupFunction, d: int = 1
) -> TripleDecomposition:
    """E_{sigma,tau}[f(sigma) g(tau) h(sigma tau)] with its split into
    levels 0..d, the sign-twisted levels, and the remainder.

    Requires d < n/2 - 1 so that no partition has both its level and its
    dual level at most d. For {0,1}-valued even-supported inputs the
    result also carries the residual against twice the product of the
    means plus twice the linear term, and its explicit e/n bound.
    """
    n = f.degree
    if g.degree != n or h.degree != n:
        raise ValueError("degree mismatch")
    if n > MAX_EXACT_DEGREE:
        raise ValueError("degree too large")
    if not 0 <= d < n / 2 - 1:
        raise ValueError("d must satisfy d < n/2 - 1")

    op = left_operator(f)
    total = inner_product(g, apply(op, h))

    comps_h = isotypic_decompose(h)
    t_lam = {lam: inner_product(g, apply(op, comps_h[lam])) for lam in partitions(n)}

    ft, gt, ht = sign_twist(f), sign_twist(g), sign_twist(h)
    opt = left_operator(ft)
    comps_ht = isotypic_decompose(ht)
    tt_lam = {
        lam: inner_product(gt, apply(opt, comps_ht[lam])) for lam in partitions(n)
    }

    level_terms = tuple(
        sum(t_lam[lam] for lam in level_partitions(n, i)) for i in range(d + 1)
    )
    twisted_terms = tuple(
        sum(tt_lam[lam] for lam in level_partitions(n, i)) for i in range(d + 1)
    )
    remainder = sum(t_lam[lam] for lam in partitions(n) if dual_level_of(lam) > d)
    identity_residual = abs(
        total - (sum(level_terms) + sum(twisted_terms) + remainder)
    )
    norms = l2_norm(f) * l2_norm(g) * l2_norm(h)
    high_bound = (n / (EULER_E * (d + 1))) ** (-(d + 1) / 2) * norms
    stats = None
    if all(_is_even_indicator(x) for x in (f, g, h)):
        from .funcspace import expectation

        alpha, beta, gamma = (expectation(x) for x in (f, g, h))
        stats = {"alpha": alpha, "beta": beta, "gamma": gamma}
        if d >= 1:
            linear = level_terms[1]
            residual = abs(total - 2 * alpha * beta * gamma - 2 * linear)
            bound = EULER_E / n * np.sqrt(alpha * beta * gamma)
            stats.update(
                linear_term=linear,
                residual=residual,
                bound=float(bound),
                holds=bool(residual <= bound + 1e-12),
            )
    return TripleDecomposition(
        d=d,
        total=total,
        level_terms=level_terms,
        twisted_terms=twisted_terms,
        remainder=remainder,
        identity_residual=identity_residual,
        high_degree_bound=high_bound,
        high_degree_holds=bool(abs(remainder) <= high_bound + 1e-12),
        indicator_stats=stats,
    )


def _is_even_indicator(f: GroupFunction) -> bool:
    vals = f.values
    zero_or_one = np.all((vals == 0.0) | (vals == 1.0))
    return bool(zero_or_one and np.all(vals[parities(f.degree) == 1] == 0.0))
