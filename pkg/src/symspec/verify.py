"""Named self-check suite behind the verify subcommand.

Each check re-derives one of the library's exact identities or
explicit-constant inequalities at a small degree and compares against an
independent path (enumeration oracles, closed forms, or cross-module
recomputation). Checks are deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Callable

import numpy as np

from . import cayley, families, funcspace, irreps, linear, structure
from .funcspace import GroupFunction, Restriction, SetFamily, density, inner_product
from .perm import mult_table, parities

SUITES = ("core", "repr", "operator", "structure", "families", "all")


@dataclass(frozen=True)
class CheckResult:
    name: str
    suite: str
    passed: bool
    details: dict

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "suite": self.suite,
            "passed": self.passed,
            "details": self.details,
        }


def _rng(seed: int, salt: int) -> np.random.Generator:
    return np.random.default_rng((seed, salt))


def _random_indicator(n, rng, p=0.5, even_only=False):
    mask = rng.random(factorial(n)) < p
    if even_only:
        mask &= parities(n) == 0
    return GroupFunction(n, mask.astype(float))


def _brute_triple(f, g, h):
    n = f.degree
    table = mult_table(n)
    acc = 0.0
    for a in range(factorial(n)):
        acc += float(np.sum(f.values[a] * g.values * h.values[table[a]]))
    return acc / factorial(n) ** 2


# ---------------------------------------------------------------------------
# core: exact linear identities
# ---------------------------------------------------------------------------


def check_parseval(seed: int) -> CheckResult:
    rng = _rng(seed, 1)
    worst = 0.0
    for _ in range(10):
        f = GroupFunction(4, rng.normal(size=24))
        g = GroupFunction(4, rng.normal(size=24))
        mf, mg = linear.normalized_form(f), linear.normalized_form(g)
        direct = inner_product(linear.evaluate_linear(mf), linear.evaluate_linear(mg))
        worst = max(worst, abs(linear.parseval_inner(mf, mg) - direct))
    dictator = linear.normalized_form(GroupFunction.dictator(3, 0, 0))
    value = linear.parseval_inner(dictator, dictator)
    worst_dict = abs(value - 2.0 / 9.0)
    passed = worst <= 1e-9 and worst_dict <= 1e-12
    return CheckResult(
        "parseval-identity", "core", passed,
        {"max_abs_error": worst, "dictator_error": worst_dict},
    )


def check_convolution_formula(seed: int) -> CheckResult:
    rng = _rng(seed, 2)
    worst = 0.0
    for _ in range(5):
        fs = [GroupFunction(4, rng.normal(size=24)) for _ in range(3)]
        ms = [linear.normalized_form(x) for x in fs]
        lows = [linear.evaluate_linear(m) for m in ms]
        formula = linear.triple_linear_term(*ms)
        worst = max(worst, abs(formula - _brute_triple(*lows)))
    return CheckResult(
        "convolution-formula", "core", worst <= 1e-9, {"max_abs_error": worst}
    )


def check_normalized_sums(seed: int) -> CheckResult:
    rng = _rng(seed, 3)
    worst = 0.0
    for _ in range(100):
        f = _random_indicator(4, rng, rng.uniform(0.1, 0.9))
        m = linear.normalized_form(f)
        worst = max(
            worst,
            float(np.max(np.abs(m.entries.sum(axis=0)))),
            float(np.max(np.abs(m.entries.sum(axis=1)))),
        )
    return CheckResult(
        "normalized-row-col-sums", "core", worst <= 1e-10, {"max_abs_sum": worst}
    )


def check_level1_representation(seed: int) -> CheckResult:
    rng = _rng(seed, 4)
    worst = 0.0
    for _ in range(3):
        f = GroupFunction(5, rng.normal(size=120))
        lhs = linear.evaluate_linear(linear.normalized_form(f))
        rhs = irreps.level_project(f, 1)
        worst = max(worst, float(np.max(np.abs(lhs.values - rhs.values))))
    return CheckResult(
        "level1-representation", "core", worst <= 1e-9, {"max_abs_error": worst}
    )


def check_one_sided_parseval(seed: int) -> CheckResult:
    rng = _rng(seed, 5)
    ok = True
    margin = np.inf
    for _ in range(20):
        coeffs = rng.normal(size=(5, 5))
        g = linear.centered_linear(coeffs)
        lhs = inner_product(g, g)
        rhs = linear.one_sided_level1_norm_sq(coeffs)
        ok &= lhs <= rhs + 1e-12
        margin = min(margin, rhs - lhs)
    return CheckResult(
        "one-sided-parseval", "core", bool(ok), {"min_margin": float(margin)}
    )


# ---------------------------------------------------------------------------
# repr: decomposition identities
# ---------------------------------------------------------------------------


def check_dim_squares(seed: int) -> CheckResult:
    ok = all(
        sum(irreps.partition_dim(lam) ** 2 for lam in irreps.partitions(n))
        == factorial(n)
        for n in range(1, 9)
    )
    return CheckResult("dim-squared-sum", "repr", ok, {"max_n": 8})


def check_projector_algebra(seed: int) -> CheckResult:
    rng = _rng(seed, 6)
    worst = 0.0
    for n in (4, 5):
        f = GroupFunction(n, rng.normal(size=factorial(n)))
        comps = irreps.isotypic_decompose(f)
        total = np.zeros(factorial(n))
        for lam, comp in comps.items():
            total += comp.values
            again = irreps.isotypic_project(comp, lam)
            worst = max(worst, float(np.max(np.abs(again.values - comp.values))))
        worst = max(worst, float(np.max(np.abs(total - f.values))))
        cross = irreps.isotypic_project(comps[irreps.partitions(n)[1]], irreps.partitions(n)[2])
        worst = max(worst, float(np.max(np.abs(cross.values))))
    return CheckResult(
        "projector-algebra", "repr", worst <= 1e-8, {"max_abs_error": worst}
    )


def check_sign_transpose_duality(seed: int) -> CheckResult:
    rng = _rng(seed, 7)
    worst = 0.0
    n = 5
    f = GroupFunction(n, rng.normal(size=factorial(n)))
    for lam in irreps.partitions(n):
        lhs = funcspace.sign_twist(irreps.isotypic_project(f, lam))
        rhs = irreps.isotypic_project(funcspace.sign_twist(f), irreps.transpose(lam))
        worst = max(worst, float(np.max(np.abs(lhs.values - rhs.values))))
    return CheckResult(
        "sign-transpose-duality", "repr", worst <= 1e-8, {"max_abs_error": worst}
    )


def check_hook_vs_character(seed: int) -> CheckResult:
    ok = True
    for n in range(2, 7):
        idc = tuple([1] * n)
        for lam in irreps.partitions(n):
            ok &= irreps.mn_character(lam, idc) == irreps.partition_dim(lam)
    return CheckResult("hook-vs-character-dim", "repr", ok, {"max_n": 6})


def check_character_orthogonality(seed: int) -> CheckResult:
    defect = max(
        irreps.character_table(n).row_orthogonality_defect() for n in range(2, 7)
    )
    return CheckResult(
        "character-orthogonality", "repr", defect == 0, {"max_defect": defect}
    )


def check_level_paths(seed: int) -> CheckResult:
    rng = _rng(seed, 8)
    f = GroupFunction(5, rng.normal(size=120))
    worst = 0.0
    for d in (0, 1, 2):
        iso = irreps.level_project(f, d, method="isotypic")
        lsq = irreps.level_project(f, d, method="lsq")
        worst = max(worst, float(np.max(np.abs(iso.values - lsq.values))))
    return CheckResult(
        "level-projection-two-paths", "repr", worst <= 1e-8, {"max_abs_error": worst}
    )


# ---------------------------------------------------------------------------
# operator checks
# ---------------------------------------------------------------------------


def check_trace_identity(seed: int) -> CheckResult:
    rng = _rng(seed, 9)
    worst = 0.0
    for n in (3, 4):
        f = GroupFunction(n, rng.normal(size=factorial(n)))
        for side in ("left", "right"):
            tr, norm_sq = cayley.trace_check(f, side)
            worst = max(worst, abs(tr - norm_sq))
    return CheckResult(
        "trace-identity", "operator", worst <= 1e-10, {"max_abs_error": worst}
    )


def check_level_radius_paths(seed: int) -> CheckResult:
    rng = _rng(seed, 10)
    f = _random_indicator(5, rng, 0.4)
    res = cayley.level_radius(f, 1)
    err = abs(res.r - res.r_from_level_kernel)
    return CheckResult(
        "level-radius-two-kernels", "operator", err <= 1e-9,
        {"r": res.r, "error": err},
    )


def check_eigen_multiplicity(seed: int) -> CheckResult:
    rng = _rng(seed, 11)
    f = _random_indicator(5, rng, 0.5)
    ok = True
    worst = 10**9
    for lam in irreps.partitions(5):
        res = cayley.isotypic_radius(f, lam)
        ok &= res.min_multiplicity >= irreps.partition_dim(lam)
        worst = min(worst, res.min_multiplicity - irreps.partition_dim(lam))
    return CheckResult(
        "eigenspace-multiplicity", "operator", bool(ok), {"min_slack": int(worst)}
    )


def check_class_function_spectrum(seed: int) -> CheckResult:
    n = 5
    cid = irreps.class_ids(n)
    mask = cid == list(irreps.partitions(n)).index((5,))
    f = GroupFunction(n, mask / np.mean(mask))
    worst = 0.0
    for lam in irreps.partitions(n):
        res = cayley.isotypic_radius(f, lam)
        scale = max(1.0, abs(res.eigs[0][0]))
        worst = max(worst, res.spread / scale)
    return CheckResult(
        "class-function-single-eig", "operator", worst <= 1e-8,
        {"max_relative_spread": worst},
    )


def check_decomposition_identity(seed: int) -> CheckResult:
    rng = _rng(seed, 12)
    worst = 0.0
    for _ in range(5):
        fs = [_random_indicator(5, rng, 0.5) for _ in range(3)]
        res = cayley.triple_expectation(*fs, d=1)
        worst = max(worst, res.identity_residual)
    return CheckResult(
        "triple-decomposition-identity", "operator", worst <= 1e-10,
        {"max_residual": worst},
    )


def check_high_degree_and_residual(seed: int) -> CheckResult:
    rng = _rng(seed, 13)
    ok = True
    worst_ratio = 0.0
    for _ in range(10):
        fs = [
            _random_indicator(6, rng, rng.uniform(0.2, 0.8), even_only=True)
            for _ in range(3)
        ]
        if any(x.values.sum() == 0 for x in fs):
            continue
        res = cayley.triple_expectation(*fs, d=1)
        ok &= res.high_degree_holds
        stats = res.indicator_stats
        ok &= stats is not None and stats["holds"]
        if stats and stats["bound"] > 0:
            worst_ratio = max(worst_ratio, stats["residual"] / stats["bound"])
    return CheckResult(
        "high-degree-and-level-residual", "operator", bool(ok),
        {"worst_residual_ratio": worst_ratio},
    )


# ---------------------------------------------------------------------------
# structure checks
# ---------------------------------------------------------------------------


def check_globalness_oracle(seed: int) -> CheckResult:
    import itertools

    rng = _rng(seed, 14)
    worst = 0.0
    for _ in range(5):
        fam = SetFamily.from_mask(5, rng.random(120) < rng.uniform(0.3, 0.7))
        rep = structure.globalness(fam, 2)
        for t in (1, 2):
            brute = max(
                density(fam, Restriction(pos, img))
                for pos in itertools.combinations(range(5), t)
                for img in itertools.permutations(range(5), t)
            )
            worst = max(worst, abs(rep.per_t[t - 1][1] - brute))
    return CheckResult(
        "globalness-scan-oracle", "structure", worst <= 1e-12, {"max_abs_error": worst}
    )


def check_star_correlation(seed: int) -> CheckResult:
    rng = _rng(seed, 15)
    worst = 0.0
    for _ in range(3):
        fam = SetFamily.from_mask(6, rng.random(720) < 0.4)
        params = structure.Parameters.for_single_set(fam, delta=0.3)
        system = structure.star_system(fam, params)
        for i in range(6):
            star = system.star_set(i)
            if len(star) == 0:
                continue
            rhs = fam.intersection(star).mu("Sn") - fam.mu("Sn") * star.mu("Sn")
            worst = max(worst, abs(system.weights[i] - rhs))
    return CheckResult(
        "star-correlation-identity", "structure", worst <= 1e-12,
        {"max_abs_error": worst},
    )


def check_zeta_inequality(seed: int) -> CheckResult:
    rng = _rng(seed, 16)
    ok = True
    samples = 20_000
    for _ in range(samples):
        zeta = float(rng.uniform(0, 0.5))
        v = rng.uniform(0, 1, size=4)
        u = rng.uniform(0, 1, size=4)
        total = v.sum() + u.sum()
        v, u = v / total, u / total
        if max(v.max(), u.max()) > 1 - zeta:
            continue
        res = structure.star_inequalities(v, u, zeta)
        ok &= res.holds
    return CheckResult(
        "zeta-star-inequality", "structure", bool(ok), {"samples": samples}
    )


def check_matrix_triple_bound(seed: int) -> CheckResult:
    rng = _rng(seed, 17)
    ok = True
    for _ in range(2_000):
        m, n_, s = rng.normal(size=(3, 6, 6))
        value, bound = linear.matrix_triple_bound(m, n_, s)
        ok &= abs(value) <= bound + 1e-12
    return CheckResult(
        "matrix-triple-bound", "structure", bool(ok), {"samples": 2000}
    )


def check_disjointness_gate(seed: int) -> CheckResult:
    n = 8
    a = families.build_family(
        families.FamilySpec("star", n, x=0, sources=(1, 2), ambient="Sn")
    )
    b = families.build_family(
        families.FamilySpec("star", n, x=1, sources=(3,), ambient="Sn")
    )
    rep = structure.star_disjointness_check(
        a.union(b),
        [structure.Star("star", 0, (1, 2)), structure.Star("star", 1, (3,))],
        eps=0.2,
        delta=0.3,
    )
    # the check itself raises on a gate pass with a failed bound
    return CheckResult(
        "star-disjointness-gate", "structure", rep.inequality_holds, rep.to_dict()
    )


def check_dyadic_overlap(seed: int) -> CheckResult:
    rng = _rng(seed, 18)
    ok = True
    for _ in range(1_000):
        m = rng.normal(size=(6, 6)) * (rng.random((6, 6)) < 0.4)
        n_ = rng.normal(size=(6, 6)) * (rng.random((6, 6)) < 0.4)
        mlim = int(max((m != 0).sum(axis=1).max(), 1))
        nlim = int(max((n_ != 0).sum(axis=1).max(), 1))
        lhs, rhs = structure.dyadic_overlap_bound(m, n_, mlim, nlim)
        ok &= lhs <= rhs + 1e-12
    return CheckResult("dyadic-overlap-bound", "structure", bool(ok), {"samples": 1000})


# ---------------------------------------------------------------------------
# families checks
# ---------------------------------------------------------------------------


def check_f_families_product_free(seed: int) -> CheckResult:
    import itertools

    checked = 0
    ok = True
    for n in (5, 6):
        for x in range(n):
            pool = [i for i in range(n) if i != x]
            for size in (1, 2):
                for src in itertools.combinations(pool, size):
                    fam = families.build_family(
                        families.FamilySpec("F", n, x=x, sources=src, ambient="An")
                    )
                    ok &= families.is_product_free(fam).product_free
                    checked += 1
    return CheckResult(
        "f-families-product-free", "families", bool(ok), {"specs_checked": checked}
    )


def check_cross_pattern(seed: int) -> CheckResult:
    ok = True
    n = 6
    for x, I, J in ((0, (1, 2), (3, 4)), (1, (2,), (0, 5))):
        a = families.build_family(
            families.FamilySpec("avoid", n, sources=I, targets=J, ambient="An")
        )
        b = families.build_family(
            families.FamilySpec("star", n, x=x, sources=I, ambient="An")
        )
        c = families.build_family(
            families.FamilySpec("star", n, x=x, sources=J, ambient="An")
        )
        ok &= families.is_product_free(a, b, c).product_free
    return CheckResult("cross-pattern-triples", "families", bool(ok), {"n": n})


def check_factor_restriction(seed: int) -> CheckResult:
    rng = _rng(seed, 19)
    ok = True
    for _ in range(10):
        sets = [
            SetFamily.from_mask(5, rng.random(120) < 0.45) for _ in range(3)
        ]
        fa, fb, fc = families.factor_restriction(*sets, 1, 3, 0)
        count, _ = families.count_products(fa, fb, fc)
        direct = 0
        a, b, c = sets
        for pa in a.members():
            if pa.images[1] != 3:
                continue
            for pb in b.members():
                if pb.images[0] != 1:
                    continue
                from symspec.perm import compose

                pc = compose(pa, pb)
                if pc in c and pc.images[0] == 3:
                    direct += 1
        ok &= count == direct
    return CheckResult(
        "factor-restriction-counts", "families", bool(ok), {"instances": 10}
    )


def check_equivalent_triples(seed: int) -> CheckResult:
    rng = _rng(seed, 20)
    ok = True
    for _ in range(10):
        sets = [SetFamily.from_mask(4, rng.random(24) < 0.3) for _ in range(3)]
        base = families.is_product_free(*sets).product_free
        for _, triple in families.equivalent_triples(*sets):
            ok &= families.is_product_free(*triple).product_free == base
    return CheckResult(
        "equivalent-triples-agree", "families", bool(ok), {"instances": 10}
    )


def check_count_vs_expectation(seed: int) -> CheckResult:
    rng = _rng(seed, 21)
    worst = 0.0
    for _ in range(3):
        sets = [SetFamily.from_mask(5, rng.random(120) < 0.4) for _ in range(3)]
        _, normalized = families.count_products(*sets)
        res = cayley.triple_expectation(
            *[GroupFunction.indicator(s) for s in sets], d=1
        )
        worst = max(worst, abs(normalized - res.total))
    return CheckResult(
        "count-vs-triple-expectation", "families", worst <= 1e-10,
        {"max_abs_error": worst},
    )


def check_maxpf_oracle(seed: int) -> CheckResult:
    res = families.max_product_free(4, "exact", seed=seed)
    oracle = families.exhaustive_max_product_free(4)
    ok = res.size == oracle and res.certificate.product_free
    return CheckResult(
        "maxpf-exact-vs-exhaustive", "families", bool(ok),
        {"branch_and_bound": res.size, "exhaustive": oracle},
    )


CHECKS: tuple[tuple[str, Callable[[int], CheckResult]], ...] = (
    ("core", check_parseval),
    ("core", check_convolution_formula),
    ("core", check_normalized_sums),
    ("core", check_level1_representation),
    ("core", check_one_sided_parseval),
    ("repr", check_dim_squares),
    ("repr", check_projector_algebra),
    ("repr", check_sign_transpose_duality),
    ("repr", check_hook_vs_character),
    ("repr", check_character_orthogonality),
    ("repr", check_level_paths),
    ("operator", check_trace_identity),
    ("operator", check_level_radius_paths),
    ("operator", check_eigen_multiplicity),
    ("operator", check_class_function_spectrum),
    ("operator", check_decomposition_identity),
    ("operator", check_high_degree_and_residual),
    ("structure", check_globalness_oracle),
    ("structure", check_star_correlation),
    ("structure", check_zeta_inequality),
    ("structure", check_matrix_triple_bound),
    ("structure", check_disjointness_gate),
    ("structure", check_dyadic_overlap),
    ("families", check_f_families_product_free),
    ("families", check_cross_pattern),
    ("families", check_factor_restriction),
    ("families", check_equivalent_triples),
    ("families", check_count_vs_expectation),
    ("families", check_maxpf_oracle),
)


def run_suite(suite: str, seed: int) -> dict:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    results = []
    for tag, fn in CHECKS:
        if suite != "all" and tag != suite:
            continue
        results.append(fn(seed))
    return {
        "suite": suite,
        "seed": seed,
        "checks": [r.to_dict() for r in results],
        "all_passed": all(r.passed for r in results),
    }
