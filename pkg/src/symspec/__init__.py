"""symspec: desk-scale spectral and combinatorial analysis on S_n and A_n.

Composition applies the right factor first (compose(a, b)(x) = a(b(x)));
internal indices are 0-based while every text interface is 1-based.
"""

from .perm import (
    Permutation,
    compose,
    enumerate_perms,
    format_perm,
    identity,
    inverse,
    parse_perm,
    perm_rank,
    perm_unrank,
    sign,
)
from .funcspace import (
    GroupFunction,
    Restriction,
    SetFamily,
    density,
    expectation,
    inner_product,
    l2_norm,
    restrict,
    sign_twist,
)
from .irreps import (
    CharacterTable,
    isotypic_decompose,
    isotypic_project,
    level_decompose,
    level_project,
    mn_character,
    partition_dim,
    partitions,
    transpose,
)
from .linear import (
    CoeffMatrix,
    evaluate_linear,
    matrix_triple_bound,
    normalized_form,
    parseval_inner,
    triple_linear_term,
)
from .cayley import (
    CayleyOperator,
    apply,
    isotypic_radius,
    level_radius,
    spectral_report,
    trace_check,
    triple_expectation,
)
from .structure import (
    Parameters,
    decompose_coeffs,
    density_bump_search,
    globalness,
    star_disjointness_check,
    star_inequalities,
    star_system,
)
from .families import (
    FamilySpec,
    build_family,
    count_products,
    equivalent_triples,
    factor_restriction,
    is_product_free,
    max_product_free,
    measure_family,
    parse_family_spec,
)

__version__ = "0.1.0"
