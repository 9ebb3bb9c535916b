from math import factorial

import numpy as np
import pytest

from symspec.cayley import (
    CayleyOperator,
    apply,
    isotypic_radius,
    left_operator,
    level_radius,
    operator_matrix,
    right_operator,
    right_translate,
    spectral_report,
    trace_check,
    triple_expectation,
)
from symspec.funcspace import GroupFunction, expectation
from symspec.irreps import class_ids, isotypic_projector_matrix, partition_dim, partitions
from symspec.perm import parities, perm_unrank


def random_function(n, rng):
    return GroupFunction(n, rng.normal(size=factorial(n)))


def random_even_indicator(n, rng, p=0.5):
    mask = (rng.random(factorial(n)) < p) & (parities(n) == 0)
    return GroupFunction(n, mask.astype(float))


def test_apply_full_averaging():
    rng = np.random.default_rng(20)
    g = random_function(4, rng)
    res = apply(left_operator(GroupFunction.constant(4, 1.0)), g)
    assert np.allclose(res.values, expectation(g), atol=1e-12)


def test_apply_point_mass_translation():
    n = 4
    rng = np.random.default_rng(21)
    g = random_function(n, rng)
    pi0 = 7
    vals = np.zeros(factorial(n))
    vals[pi0] = factorial(n)
    res = apply(left_operator(GroupFunction(n, vals)), g)
    from symspec.perm import compose

    p0 = perm_unrank(pi0, n)
    for r in range(factorial(n)):
        sigma = perm_unrank(r, n)
        assert res.values[r] == pytest.approx(g(compose(p0, sigma)), abs=1e-12)


def test_apply_matches_matrix_both_sides():
    rng = np.random.default_rng(22)
    n = 4
    f, g = random_function(n, rng), random_function(n, rng)
    for side in ("left", "right"):
        op = CayleyOperator(f, side)
        direct = apply(op, g).values
        via_matrix = operator_matrix(op) @ g.values
        assert np.max(np.abs(direct - via_matrix)) < 1e-12


def test_right_commutation():
    rng = np.random.default_rng(23)
    n = 4
    f, g = random_function(n, rng), random_function(n, rng)
    op = left_operator(f)
    for tau in (1, 5, 17):
        lhs = apply(op, right_translate(g, tau))
        rhs = right_translate(apply(op, g), tau)
        assert np.max(np.abs(lhs.values - rhs.values)) < 1e-12


def test_trace_point_mass_and_constant():
    n = 3
    vals = np.zeros(6)
    vals[0] = 1.0
    tr, norm_sq = trace_check(GroupFunction(n, vals))
    assert tr == pytest.approx(1 / 6, abs=1e-12)
    assert norm_sq == pytest.approx(1 / 6, abs=1e-12)

    tr, norm_sq = trace_check(GroupFunction.constant(4, 2.0))
    assert tr == pytest.approx(4.0, abs=1e-12)
    assert norm_sq == pytest.approx(4.0, abs=1e-12)


def test_trace_identity_random_both_sides():
    rng = np.random.default_rng(24)
    for n in (3, 4):
        f = random_function(n, rng)
        for side in ("left", "right"):
            tr, norm_sq = trace_check(f, side)
            assert tr == pytest.approx(norm_sq, abs=1e-10)


def test_level_radius_basics():
    rng = np.random.default_rng(25)
    f = random_function(4, rng)
    r0 = level_radius(f, 0)
    assert r0.r == pytest.approx(abs(expectation(f)), abs=1e-10)
    one = GroupFunction.constant(5, 1.0)
    for d in (1, 2):
        assert level_radius(one, d).r == pytest.approx(0.0, abs=1e-10)


def test_level_radius_two_kernel_paths_agree():
    rng = np.random.default_rng(26)
    mask = rng.random(120) < 0.4
    f = GroupFunction(5, mask.astype(float))
    res = level_radius(f, 1)
    assert res.r == pytest.approx(res.r_from_level_kernel, abs=1e-9)
    assert res.dim == 16


def test_isotypic_radius_trivial_partition():
    rng = np.random.default_rng(27)
    f = random_function(4, rng)
    res = isotypic_radius(f, (4,))
    assert res.dim == 1
    assert res.eigs[0][0] == pytest.approx(expectation(f) ** 2, abs=1e-10)
    assert res.r == pytest.approx(abs(expectation(f)), abs=1e-10)


def test_class_function_kernel_single_eigenvalue():
    n = 5
    cid = class_ids(n)
    # normalized indicator of the 5-cycle class
    mask = cid == list(partitions(n)).index((5,))
    f = GroupFunction(n, mask / np.mean(mask))
    for lam in partitions(n):
        res = isotypic_radius(f, lam)
        scale = max(1.0, abs(res.eigs[0][0]))
        assert res.spread <= 1e-8 * scale
        assert len(res.eigs) == 1


def test_class_function_left_equals_right():
    n = 4
    rng = np.random.default_rng(28)
    cid = class_ids(n)
    class_vals = rng.normal(size=len(partitions(n)))
    f = GroupFunction(n, class_vals[cid])
    g = random_function(n, rng)
    lhs = apply(left_operator(f), g)
    rhs = apply(right_operator(f), g)
    assert np.max(np.abs(lhs.values - rhs.values)) < 1e-12


def test_eigenspace_multiplicity_at_least_dim():
    rng = np.random.default_rng(29)
    n = 5
    f = GroupFunction(n, (rng.random(120) < 0.5).astype(float))
    for lam in partitions(n):
        res = isotypic_radius(f, lam)
        assert res.min_multiplicity >= partition_dim(lam)
        assert sum(m for _, m in res.eigs) == partition_dim(lam) ** 2


def test_operator_preserves_isotypic_components():
    rng = np.random.default_rng(30)
    n = 4
    f = random_function(n, rng)
    lmat = operator_matrix(left_operator(f))
    for lam in partitions(n):
        p = isotypic_projector_matrix(n, [lam])
        leak = (np.eye(24) - p) @ lmat @ p
        assert np.linalg.norm(leak, 2) < 1e-9


def test_trace_budget_across_partitions():
    rng = np.random.default_rng(31)
    n = 5
    f = random_function(n, rng)
    rep = spectral_report(f, d_max=1)
    assert rep.trace == pytest.approx(rep.norm_sq, abs=1e-9)
    # the compressed per-partition spectra carry the same budget
    partition_sum = sum(v * m for p in rep.partitions for v, m in p.eigs)
    assert partition_sum == pytest.approx(rep.norm_sq, abs=1e-9)
    assert all(p.r >= 0 for p in rep.partitions)
    d = rep.to_dict()
    assert {"levels", "partitions", "trace", "norm_sq"} <= set(d)
    assert d["levels"][0]["d"] == 0


def test_level_radius_full_space_oracle():
    """Independent oracle: eigensolve P_d L^T L P_d on the whole space."""
    rng = np.random.default_rng(35)
    n = 4
    f = random_function(n, rng)
    lmat = operator_matrix(left_operator(f))
    for d in (0, 1, 2):
        from symspec.irreps import level_partitions

        p = isotypic_projector_matrix(n, level_partitions(n, d))
        compressed = p @ lmat.T @ lmat @ p
        top = float(np.max(np.linalg.eigvalsh(compressed)))
        oracle = np.sqrt(max(top, 0.0))
        res = level_radius(f, d)
        assert res.r == pytest.approx(oracle, abs=1e-9)


def test_radius_ratio_report():
    from symspec.cayley import radius_ratio_report
    from symspec.funcspace import l2_norm

    rng = np.random.default_rng(36)
    f = GroupFunction(5, (rng.random(120) < 0.4).astype(float))
    rep = radius_ratio_report(f, 1)
    assert rep["ratio"] == pytest.approx(
        rep["r"] * 5**0.5 / (l2_norm(f) * rep["eps"])
    )
    # eps is the worst conditional L2 norm over 2-restrictions
    from symspec.funcspace import Restriction, restrict
    import itertools as it

    worst = max(
        restrict(f, Restriction((i, k), (j, l)))[1].l2_norm
        for i, k in it.permutations(range(5), 2)
        for j, l in it.permutations(range(5), 2)
    )
    assert rep["eps"] == pytest.approx(worst, abs=1e-12)


def test_triple_constant_case():
    one = GroupFunction.constant(5, 1.0)
    res = triple_expectation(one, one, one, d=1)
    assert res.total == pytest.approx(1.0, abs=1e-12)
    assert res.level_terms[0] + res.twisted_terms[0] == pytest.approx(1.0, abs=1e-10)
    assert res.identity_residual < 1e-10


def test_triple_decomposition_sums_to_total():
    rng = np.random.default_rng(32)
    n = 5
    for _ in range(5):
        fs = [GroupFunction(n, (rng.random(120) < 0.5).astype(float)) for _ in range(3)]
        res = triple_expectation(*fs, d=1)
        assert res.identity_residual < 1e-10


def test_triple_total_against_double_enumeration():
    rng = np.random.default_rng(33)
    n = 4
    from symspec.perm import mult_table

    table = mult_table(n)
    for _ in range(3):
        f, g, h = (random_function(n, rng) for _ in range(3))
        res = triple_expectation(f, g, h, d=0)
        acc = 0.0
        for a in range(24):
            acc += float(np.sum(f.values[a] * g.values * h.values[table[a]]))
        oracle = acc / 24**2
        assert res.total == pytest.approx(oracle, abs=1e-12)


def test_even_indicator_triples_bounds_s6():
    rng = np.random.default_rng(34)
    n = 6
    for _ in range(5):
        fs = [random_even_indicator(n, rng, rng.uniform(0.2, 0.8)) for _ in range(3)]
        res = triple_expectation(*fs, d=1)
        assert res.identity_residual < 1e-10
        assert res.high_degree_holds
        stats = res.indicator_stats
        assert stats is not None
        assert stats["holds"], (stats["residual"], stats["bound"])


def test_triple_guards():
    f = GroupFunction.constant(4, 1.0)
    with pytest.raises(ValueError, match="d must satisfy"):
        triple_expectation(f, f, f, d=1)
    g = GroupFunction.constant(5, 1.0)
    with pytest.raises(ValueError, match="degree mismatch"):
        triple_expectation(g, g, f, d=0)
