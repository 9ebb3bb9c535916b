from math import factorial

import numpy as np
import pytest

from symspec.cayley import triple_expectation
from symspec.funcspace import GroupFunction, SetFamily
from symspec.families import (
    FamilySpec,
    best_f_family,
    build_family,
    count_products,
    equivalent_triples,
    exhaustive_max_product_free,
    factor_restriction,
    invert_family,
    is_product_free,
    map_witness,
    max_product_free,
    measure_family,
    parse_family_spec,
)
from symspec.perm import Permutation, compose, identity, parities, perm_rank


def random_family(n, rng, p=0.5, ambient="Sn"):
    mask = rng.random(factorial(n)) < p
    if ambient == "An":
        mask &= parities(n) == 0
    return SetFamily.from_mask(n, mask)


def test_build_family_empty_targets():
    fam = build_family(FamilySpec("F", 5, x=0, sources=(), ambient="An"))
    assert len(fam) == 0


def test_build_family_f_example():
    spec = parse_family_spec("F:x=1,I=2", 5, "An")
    fam = build_family(spec)
    assert len(fam) == 12
    assert fam.mu("An") == pytest.approx(0.2)
    for p in fam.members():
        assert p.images[0] == 1 and p.images[1] != 1


def test_build_star_full():
    spec = FamilySpec("star", 4, x=0, sources=(0, 1, 2, 3), ambient="An")
    fam = build_family(spec)
    assert len(fam) == 12  # the whole ambient A_4


def test_build_inverse_star_and_umvirate():
    inv = build_family(FamilySpec("inverse_star", 4, x=2, sources=(0,), ambient="Sn"))
    for p in inv.members():
        assert p.images[0] == 2
    umv = build_family(FamilySpec("umvirate", 4, sources=(0, 1), targets=(1, 0), ambient="Sn"))
    assert len(umv) == 2


def test_avoid_family():
    fam = build_family(FamilySpec("avoid", 5, sources=(0, 1), targets=(0, 1), ambient="Sn"))
    for p in fam.members():
        assert p.images[0] not in (0, 1) and p.images[1] not in (0, 1)


def test_parse_family_spec_roundtrip():
    for text in ("F:x=1,I=2,3", "star:x=2,I=1,4", "istar:x=1,I=3", "avoid:I=1,2;J=3,4", "umv:I=1;J=2"):
        spec = parse_family_spec(text, 6)
        assert spec.describe() == text
    with pytest.raises(ValueError):
        parse_family_spec("blah:x=1", 5)


def test_is_product_free_identity_witness():
    singleton = SetFamily(4, [0])
    res = is_product_free(singleton)
    assert not res.product_free
    assert res.witness.a == identity(4)
    assert res.witness.c == identity(4)


def test_odd_permutations_product_free():
    odd = SetFamily.from_mask(5, parities(5) == 1)
    assert is_product_free(odd).product_free


def test_f_family_certifies_s6():
    spec = FamilySpec("F", 6, x=0, sources=(1, 2), ambient="An")
    fam = build_family(spec)
    res = is_product_free(fam)
    assert res.product_free
    assert res.checked_pairs == len(fam) ** 2


def test_cross_pattern_triple():
    # (1_{I -> J-bar}, 1_{x -> I}, 1_{x -> J}) is product-free
    n = 6
    for x, I, J in ((0, (1, 2), (3, 4)), (1, (2,), (0, 5)), (2, (0, 3), (1,))):
        a = build_family(FamilySpec("avoid", n, sources=I, targets=J, ambient="An"))
        b = build_family(FamilySpec("star", n, x=x, sources=I, ambient="An"))
        c = build_family(FamilySpec("star", n, x=x, sources=J, ambient="An"))
        assert is_product_free(a, b, c).product_free


def test_count_products_parity_disjoint():
    even = SetFamily.from_mask(4, parities(4) == 0)
    odd = SetFamily.from_mask(4, parities(4) == 1)
    count, _ = count_products(odd, odd, odd)
    assert count == 0
    full = SetFamily.full(4)
    count, normalized = count_products(full, full, full)
    assert count == 24 * 24
    assert normalized == 1.0


def test_count_products_matches_triple_expectation():
    rng = np.random.default_rng(40)
    n = 5
    for _ in range(5):
        a, b, c = (random_family(n, rng, 0.4) for _ in range(3))
        _, normalized = count_products(a, b, c)
        res = triple_expectation(
            GroupFunction.indicator(a),
            GroupFunction.indicator(b),
            GroupFunction.indicator(c),
            d=1,
        )
        assert normalized == pytest.approx(res.total, abs=1e-10)


def test_measure_family():
    empty = measure_family(FamilySpec("F", 5, x=0, sources=(), ambient="An"))
    assert empty.size == 0 and empty.estimate == 0.0
    rep = measure_family(parse_family_spec("F:x=1,I=2", 5, "An"))
    assert rep.mu_an == pytest.approx(0.2)
    assert rep.ratio == pytest.approx(rep.mu_an / rep.estimate)


def test_factor_restriction_empty():
    empty = SetFamily(5, [])
    out = factor_restriction(empty, empty, empty, 1, 2, 0)
    assert all(len(f) == 0 for f in out)
    assert all(f.degree == 4 for f in out)


def test_factor_restriction_index_clash():
    fam = SetFamily(5, [1, 2, 3])
    with pytest.raises(ValueError, match="index clash"):
        factor_restriction(fam, fam, fam, 1, 2, 1)


def brute_restricted_products(a, b, c, i, ip, x):
    """#{(a,b): a(i)=ip, b(x)=i, ab in C_{x->ip}} by a double loop."""
    n = a.degree
    count = 0
    for pa in a.members():
        if pa.images[i] != ip:
            continue
        for pb in b.members():
            if pb.images[x] != i:
                continue
            pc = compose(pa, pb)
            if pc in c and pc.images[x] == ip:
                count += 1
    return count


def test_factor_restriction_preserves_products():
    rng = np.random.default_rng(41)
    n = 5
    for trial in range(20):
        a, b, c = (random_family(n, rng, 0.45) for _ in range(3))
        i, ip, x = 1, 3, 0
        fa, fb, fc = factor_restriction(a, b, c, i, ip, x)
        direct = brute_restricted_products(a, b, c, i, ip, x)
        transformed, _ = count_products(fa, fb, fc)
        assert transformed == direct
        assert is_product_free(fa, fb, fc).product_free == (direct == 0)


def test_equivalent_triples_agree():
    rng = np.random.default_rng(42)
    n = 4
    for _ in range(20):
        a, b, c = (random_family(n, rng, 0.3) for _ in range(3))
        base = is_product_free(a, b, c)
        for form, triple in equivalent_triples(a, b, c):
            res = is_product_free(*triple)
            assert res.product_free == base.product_free, form
            if not base.product_free:
                mapped = map_witness(base.witness, form)
                assert mapped.a in triple[0]
                assert mapped.b in triple[1]
                assert mapped.c in triple[2]


def test_equivalent_triples_counts_match():
    rng = np.random.default_rng(43)
    n = 4
    a, b, c = (random_family(n, rng, 0.4) for _ in range(3))
    counts = [count_products(*t)[0] for _, t in equivalent_triples(a, b, c)]
    assert len(set(counts)) == 1


def test_symmetric_single_set_orbit():
    # A = A^{-1}: the orbit collapses and all six verdicts agree
    n = 4
    fam = SetFamily(n, [perm_rank(Permutation([1, 0, 3, 2])), perm_rank(Permutation([2, 3, 0, 1]))])
    assert invert_family(fam) == fam
    verdicts = {is_product_free(*t).product_free for _, t in equivalent_triples(fam, fam, fam)}
    assert len(verdicts) == 1


def test_max_product_free_n3():
    res = max_product_free(3, "exact")
    assert res.size == 1
    assert res.size == exhaustive_max_product_free(3)


def test_max_product_free_n4_matches_oracle():
    res = max_product_free(4, "exact")
    assert res.size == exhaustive_max_product_free(4)
    assert res.certificate.product_free


def test_branch_orders_agree():
    from symspec.families import _AltGroup, _branch_and_bound

    for n in (3, 4):
        g = _AltGroup(n)
        down, _ = _branch_and_bound(g, 0, "desc")
        up, _ = _branch_and_bound(g, 0, "asc")
        assert down.bit_count() == up.bit_count()


def test_max_product_free_mode_guards():
    with pytest.raises(ValueError):
        max_product_free(6, "exact")
    with pytest.raises(ValueError):
        max_product_free(8, "heuristic")
    with pytest.raises(ValueError):
        max_product_free(4, "annealing")


def test_heuristic_recertifies():
    res = max_product_free(4, "heuristic", budget=5000, seed=7)
    assert res.certificate.product_free
    assert res.size >= res.best_family_size
    assert res.budget_exhausted  # tiny budgets must be flagged
    assert res.mode == "heuristic"


def test_best_f_family():
    size, spec = best_f_family(5)
    assert size == 12
    assert spec.kind == "F"


def test_invert_family():
    rng = np.random.default_rng(44)
    fam = random_family(4, rng, 0.5)
    inv = invert_family(fam)
    assert len(inv) == len(fam)
    assert invert_family(inv) == fam
