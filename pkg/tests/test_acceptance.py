"""Acceptance suite: one test per criterion, at the stated scales and
tolerances. Each test prints a single pass line with its headline
numbers when it succeeds (pytest -v names double as the pass/fail table).
"""

import itertools
import json
import subprocess
import sys
from math import factorial

import numpy as np
import pytest

from symspec import cayley, families, irreps, linear, structure
from symspec.funcspace import (
    GroupFunction,
    Restriction,
    SetFamily,
    density,
    inner_product,
    sign_twist,
)
from symspec.perm import mult_table, parities


def _brute_triple(f, g, h):
    n = f.degree
    table = mult_table(n)
    acc = 0.0
    for a in range(factorial(n)):
        acc += float(np.sum(f.values[a] * g.values * h.values[table[a]]))
    return acc / factorial(n) ** 2


def _random_indicator(n, rng, p, even_only=False):
    mask = rng.random(factorial(n)) < p
    if even_only:
        mask &= parities(n) == 0
    return GroupFunction(n, mask.astype(float))


def test_criterion_1_exact_identity_suite():
    rng = np.random.default_rng(101)
    worst_parseval = 0.0
    worst_conv = 0.0
    worst_sums = 0.0
    worst_level1 = 0.0
    for n in (4, 5):
        for _ in range(3):
            f = GroupFunction(n, rng.normal(size=factorial(n)))
            g = GroupFunction(n, rng.normal(size=factorial(n)))
            h = GroupFunction(n, rng.normal(size=factorial(n)))
            ms = [linear.normalized_form(x) for x in (f, g, h)]
            lows = [linear.evaluate_linear(m) for m in ms]
            worst_parseval = max(
                worst_parseval,
                abs(linear.parseval_inner(ms[0], ms[1]) - inner_product(lows[0], lows[1])),
            )
            worst_conv = max(
                worst_conv,
                abs(linear.triple_linear_term(*ms) - _brute_triple(*lows)),
            )
            for m in ms:
                worst_sums = max(
                    worst_sums,
                    float(np.max(np.abs(m.entries.sum(axis=0)))),
                    float(np.max(np.abs(m.entries.sum(axis=1)))),
                )
            worst_level1 = max(
                worst_level1,
                float(
                    np.max(
                        np.abs(
                            lows[0].values - irreps.level_project(f, 1).values
                        )
                    )
                ),
            )
    assert worst_parseval <= 1e-9
    assert worst_conv <= 1e-9
    assert worst_sums <= 1e-10
    assert worst_level1 <= 1e-9
    print(
        f"ACCEPTANCE criterion-1 PASS: parseval<= {worst_parseval:.2e}, "
        f"convolution<= {worst_conv:.2e}, sums<= {worst_sums:.2e}, "
        f"level1<= {worst_level1:.2e}"
    )


def test_criterion_2_representation_suite():
    # exact squared-dimension counts
    for n in range(1, 9):
        assert sum(irreps.partition_dim(l) ** 2 for l in irreps.partitions(n)) == factorial(n)
    # hook dims equal characters at the identity, exactly
    for n in range(2, 8):
        idc = tuple([1] * n)
        for lam in irreps.partitions(n):
            assert irreps.mn_character(lam, idc) == irreps.partition_dim(lam)
    # projector algebra at S4-S5
    rng = np.random.default_rng(102)
    worst = 0.0
    for n in (4, 5):
        f = GroupFunction(n, rng.normal(size=factorial(n)))
        comps = irreps.isotypic_decompose(f)
        total = np.zeros(factorial(n))
        for lam, comp in comps.items():
            total += comp.values
            again = irreps.isotypic_project(comp, lam)
            worst = max(worst, float(np.max(np.abs(again.values - comp.values))))
            other = irreps.partitions(n)[0] if lam != irreps.partitions(n)[0] else irreps.partitions(n)[1]
            cross = irreps.isotypic_project(comp, other)
            worst = max(worst, float(np.max(np.abs(cross.values))))
        worst = max(worst, float(np.max(np.abs(total - f.values))))
    assert worst <= 1e-8
    # sign-transpose duality up to n = 7
    worst_dual = 0.0
    for n in (5, 7):
        f = GroupFunction(n, rng.normal(size=factorial(n)))
        comps = irreps.isotypic_decompose(f)
        twisted = irreps.isotypic_decompose(sign_twist(f))
        for lam in irreps.partitions(n):
            lhs = sign_twist(comps[lam]).values
            rhs = twisted[irreps.transpose(lam)].values
            worst_dual = max(worst_dual, float(np.max(np.abs(lhs - rhs))))
    assert worst_dual <= 1e-8
    print(
        f"ACCEPTANCE criterion-2 PASS: projectors<= {worst:.2e}, "
        f"duality<= {worst_dual:.2e}, dims exact to n=8"
    )


def test_criterion_3_operator_suite():
    rng = np.random.default_rng(103)
    # trace identity from the explicit-matrix oracle
    worst_trace = 0.0
    for n in (3, 4):
        f = GroupFunction(n, rng.normal(size=factorial(n)))
        for side in ("left", "right"):
            tr, norm_sq = cayley.trace_check(f, side)
            worst_trace = max(worst_trace, abs(tr - norm_sq))
    assert worst_trace <= 1e-10
    # level radius from the kernel vs its level part
    f5 = _random_indicator(5, rng, 0.4)
    res = cayley.level_radius(f5, 1)
    assert abs(res.r - res.r_from_level_kernel) <= 1e-9
    # eigenspace multiplicities and class-function spectra
    find = _random_indicator(5, rng, 0.5)
    for lam in irreps.partitions(5):
        rad = cayley.isotypic_radius(find, lam)
        assert rad.min_multiplicity >= irreps.partition_dim(lam)
    cid = irreps.class_ids(5)
    class_mask = cid == list(irreps.partitions(5)).index((3, 1, 1))
    fclass = GroupFunction(5, class_mask / np.mean(class_mask))
    for lam in irreps.partitions(5):
        rad = cayley.isotypic_radius(fclass, lam)
        assert rad.spread <= 1e-8 * max(1.0, abs(rad.eigs[0][0]))
    # decomposition identity at d = 1
    worst_identity = 0.0
    for _ in range(10):
        fs = [_random_indicator(5, rng, 0.5) for _ in range(3)]
        worst_identity = max(
            worst_identity, cayley.triple_expectation(*fs, d=1).identity_residual
        )
    assert worst_identity <= 1e-10
    # explicit-constant bounds on 100 random A_6-supported triples
    checked = 0
    worst_ratio = 0.0
    while checked < 100:
        fs = [
            _random_indicator(6, rng, rng.uniform(0.1, 0.9), even_only=True)
            for _ in range(3)
        ]
        if any(x.values.sum() == 0 for x in fs):
            continue
        res6 = cayley.triple_expectation(*fs, d=1)
        assert res6.high_degree_holds
        stats = res6.indicator_stats
        assert stats is not None and stats["holds"], stats
        worst_ratio = max(worst_ratio, stats["residual"] / stats["bound"])
        checked += 1
    print(
        f"ACCEPTANCE criterion-3 PASS: trace<= {worst_trace:.2e}, "
        f"identity<= {worst_identity:.2e}, worst residual ratio {worst_ratio:.3f} "
        f"on {checked} A6 triples"
    )


def test_criterion_4_structure_suite():
    rng = np.random.default_rng(104)
    # globalness scan vs per-umvirate enumeration on 50 random sets
    cases = [(6, 2)] * 25 + [(7, 2)] * 15 + [(8, 1)] * 10
    worst_scan = 0.0
    for n, tmax in cases:
        fam = SetFamily.from_mask(n, rng.random(factorial(n)) < rng.uniform(0.2, 0.8))
        rep = structure.globalness(fam, tmax)
        for t in range(1, tmax + 1):
            brute = max(
                density(fam, Restriction(pos, img))
                for pos in itertools.combinations(range(n), t)
                for img in itertools.permutations(range(n), t)
            )
            worst_scan = max(worst_scan, abs(rep.per_t[t - 1][1] - brute))
    assert worst_scan <= 1e-12
    # star correlation identity
    worst_star = 0.0
    for _ in range(5):
        fam = SetFamily.from_mask(6, rng.random(720) < 0.4)
        params = structure.Parameters.for_single_set(fam, delta=0.3)
        system = structure.star_system(fam, params)
        for i in range(6):
            star = system.star_set(i)
            if len(star) == 0:
                continue
            rhs = fam.intersection(star).mu("Sn") - fam.mu("Sn") * star.mu("Sn")
            worst_star = max(worst_star, abs(system.weights[i] - rhs))
    assert worst_star <= 1e-12
    # zeta inequality on 1e5 random domain points
    count = 0
    while count < 100_000:
        zeta = float(rng.uniform(0, 0.5))
        size = int(rng.integers(2, 8))
        v = rng.uniform(0, 1, size=size)
        u = rng.uniform(0, 1, size=size)
        total = v.sum() + u.sum()
        v, u = v / total, u / total
        if max(v.max(), u.max()) > 1 - zeta:
            continue
        res = structure.star_inequalities(v, u, zeta)
        assert res.holds
        count += 1
    # disjointness lemma asserted whenever explicit hypotheses hold
    a = families.build_family(
        families.FamilySpec("star", 8, x=0, sources=(1, 2), ambient="Sn")
    )
    b = families.build_family(
        families.FamilySpec("star", 8, x=1, sources=(3,), ambient="Sn")
    )
    instances = [
        (a.union(b), [structure.Star("star", 0, (1, 2)), structure.Star("star", 1, (3,))], 0.2, 0.3),
        (a, [structure.Star("star", 0, (1, 2))], 0.2, 0.3),
        (a, [structure.Star("star", 5, (7,))], 0.9, 0.9),
    ]
    for e, stars, eps, delta in instances:
        rep = structure.star_disjointness_check(e, stars, eps, delta)
        # the check itself raises if the gate holds and the bound fails
        assert rep.gate_holds is False or rep.inequality_holds
    # matrix triple bound on 1e4 random triples
    for _ in range(10_000):
        m, n_, s = rng.normal(size=(3, 6, 6))
        value, bound = linear.matrix_triple_bound(m, n_, s)
        assert abs(value) <= bound + 1e-12
    print(
        f"ACCEPTANCE criterion-4 PASS: scan oracle<= {worst_scan:.2e} on 50 sets, "
        f"star identity<= {worst_star:.2e}, 1e5 zeta points, 1e4 triple bounds"
    )


def test_criterion_5_families_suite():
    # every F family certifies product-free: n <= 7, all x, all |I| <= 3
    specs = 0
    for n in range(3, 8):
        for x in range(n):
            pool = [i for i in range(n) if i != x]
            for size in (1, 2, 3):
                if size > len(pool):
                    continue
                for src in itertools.combinations(pool, size):
                    fam = families.build_family(
                        families.FamilySpec("F", n, x=x, sources=src, ambient="An")
                    )
                    res = families.is_product_free(fam)
                    assert res.product_free, (n, x, src, res.witness)
                    specs += 1
    # cross pattern triples at n = 6
    n = 6
    patterns = 0
    for x, I, J in ((0, (1, 2), (3, 4)), (1, (0, 2), (3,)), (5, (0,), (1, 2))):
        a = families.build_family(
            families.FamilySpec("avoid", n, sources=I, targets=J, ambient="An")
        )
        bset = families.build_family(
            families.FamilySpec("star", n, x=x, sources=I, ambient="An")
        )
        cset = families.build_family(
            families.FamilySpec("star", n, x=x, sources=J, ambient="An")
        )
        assert families.is_product_free(a, bset, cset).product_free
        patterns += 1
    # factor_restriction preserves product counts on 100 random instances
    rng = np.random.default_rng(105)
    from symspec.perm import compose

    for _ in range(100):
        sets = [SetFamily.from_mask(5, rng.random(120) < 0.45) for _ in range(3)]
        i, ip, x = 1, 3, 0
        fa, fb, fc = families.factor_restriction(*sets, i, ip, x)
        count, _ = families.count_products(fa, fb, fc)
        direct = 0
        for pa in sets[0].members():
            if pa.images[i] != ip:
                continue
            for pb in sets[1].members():
                if pb.images[x] != i:
                    continue
                pc = compose(pa, pb)
                if pc in sets[2] and pc.images[x] == ip:
                    direct += 1
        assert count == direct
    # all six equivalent triples agree on product-freeness
    for _ in range(30):
        sets = [SetFamily.from_mask(4, rng.random(24) < 0.35) for _ in range(3)]
        base = families.is_product_free(*sets).product_free
        for form, triple in families.equivalent_triples(*sets):
            assert families.is_product_free(*triple).product_free == base, form
    print(
        f"ACCEPTANCE criterion-5 PASS: {specs} F specs certified, "
        f"{patterns} cross patterns, 100 factored instances, 30 equivalence orbits"
    )


def test_criterion_6_desk_scale_measure():
    rep = families.measure_family(
        families.FamilySpec("F", 10, x=0, sources=(1, 2, 3), ambient="An")
    )
    assert rep.size == round(rep.mu_an * (factorial(10) // 2))
    assert rep.estimate == pytest.approx(0.12197, abs=1e-4)
    assert 0.5 <= rep.ratio <= 2.0
    print(
        f"ACCEPTANCE criterion-6 PASS: exact mu over A10 = {rep.mu_an:.6f}, "
        f"estimate {rep.estimate:.6f}, ratio {rep.ratio:.4f}"
    )


def test_criterion_7_extremal_search():
    res4 = families.max_product_free(4, "exact", seed=0)
    oracle4 = families.exhaustive_max_product_free(4)
    assert res4.size == oracle4
    assert res4.certificate.product_free
    # seeds must not change the optimum
    sizes = {
        families.max_product_free(4, "exact", seed=s).size for s in (0, 1, 0xC0FFEE)
    }
    assert sizes == {oracle4}
    # neither must the thread-count hint (CLI level)
    outs = []
    for threads in ("1", "4"):
        proc = subprocess.run(
            [sys.executable, "-m", "symspec.cli", "maxpf", "--n", "4",
             "--mode", "exact", "--threads", threads, "--no-timestamp"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        outs.append(proc.stdout)
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["result"]["size"] == oracle4
    res5a = families.max_product_free(5, "exact", seed=0)
    res5b = families.max_product_free(5, "exact", seed=9001)
    assert res5a.size == res5b.size
    assert res5a.certificate.product_free and res5b.certificate.product_free
    # the optimum is maximal: no element of A_5 extends it
    from symspec.perm import enumerate_perms, perm_rank

    best = res5a.best
    for p in enumerate_perms(5, "even"):
        if p in best:
            continue
        extended = SetFamily(5, list(best.ranks) + [perm_rank(p)])
        assert not families.is_product_free(extended).product_free
    print(
        f"ACCEPTANCE criterion-7 PASS: A4 optimum {res4.size} == oracle, "
        f"A5 optimum {res5a.size} reproducible and maximal "
        f"(best F family {res5a.best_family_size})"
    )


def test_criterion_8_determinism():
    args = [
        sys.executable, "-m", "symspec.cli", "verify", "--n", "5",
        "--suite", "all", "--seed", "0", "--no-timestamp",
    ]
    first = subprocess.run(args, capture_output=True, text=True)
    second = subprocess.run(args, capture_output=True, text=True)
    assert first.returncode == 0 and second.returncode == 0
    assert first.stdout == second.stdout
    # with timestamps, reports differ only in the timestamp field
    args_ts = args[:-1]
    a = json.loads(subprocess.run(args_ts, capture_output=True, text=True).stdout)
    b = json.loads(subprocess.run(args_ts, capture_output=True, text=True).stdout)
    a.pop("timestamp"), b.pop("timestamp")
    assert a == b
    print("ACCEPTANCE criterion-8 PASS: verify --suite all byte-identical across runs")
