"""Coefficient-matrix toolkit for linear functions on S_n.

A linear function sum a_ij x_{i->j} is in normalized form when every row
and column of (a_ij) sums to zero; in that form the inner product, the
level-1 norm, and the triple convolution all reduce to ordinary matrix
arithmetic, with a 1/(n-1) or 1/(n-1)^2 normalization.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .funcspace import GroupFunction
from .perm import all_perms

#: absolute tolerance on row/column sums for the normalized flag
NORMALIZED_ATOL = 1e-10


@dataclass(frozen=True)
class CoeffMatrix:
    """n x n real coefficients a_ij for sum a_ij x_{i->j}.

    The normalized flag is data computed from the entries at construction;
    operations whose identities require normalization check it and fail
    loudly rather than silently returning wrong values.
    """

    entries: np.ndarray
    degree: int = field(init=False)
    normalized: bool = field(init=False)

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("coefficient matrix must be square")
        if not np.all(np.isfinite(arr)):
            raise ValueError("entries must be finite")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)
        object.__setattr__(self, "degree", arr.shape[0])
        sums_ok = (
            np.max(np.abs(arr.sum(axis=0)), initial=0.0) <= NORMALIZED_ATOL
            and np.max(np.abs(arr.sum(axis=1)), initial=0.0) <= NORMALIZED_ATOL
        )
        object.__setattr__(self, "normalized", bool(sums_ok))

    @classmethod
    def zeros(cls, n: int) -> "CoeffMatrix":
        return cls(np.zeros((n, n)))

    def frobenius(self) -> float:
        return float(np.sqrt(np.sum(self.entries**2)))

    def l1(self) -> float:
        return float(np.sum(np.abs(self.entries)))


def normalized_form(f: GroupFunction) -> CoeffMatrix:
    """Coefficients a_ij = (1 - 1/n)(E[f_{i->j}] - E[f]).

    The result represents f^{=1}: evaluate_linear(normalized_form(f))
    equals the pure-degree-1 part of f.
    """
    n = f.degree
    perms = all_perms(n)
    fact = factorial(n)
    cond = np.empty((n, n))
    for i in range(n):
        sums = np.bincount(perms[:, i].astype(np.int64), weights=f.values, minlength=n)
        cond[i] = sums / factorial(n - 1)
    mean = float(np.sum(f.values)) / fact
    return CoeffMatrix((1.0 - 1.0 / n) * (cond - mean))


def evaluate_linear(m: CoeffMatrix) -> GroupFunction:
    """The function pi |-> sum_i a_{i, pi(i)}."""
    n = m.degree
    perms = all_perms(n)
    vals = np.zeros(perms.shape[0])
    for i in range(n):
        vals += m.entries[i][perms[:, i].astype(np.intp)]
    return GroupFunction(n, vals)


def parseval_inner(m: CoeffMatrix, other: CoeffMatrix) -> float:
    """<f, g> = sum a_ij b_ij / (n-1); requires m to be normalized."""
    if m.degree != other.degree:
        raise ValueError("degree mismatch")
    if not m.normalized:
        raise ValueError("matrix is not normalized")
    return float(np.sum(m.entries * other.entries)) / (m.degree - 1)


def triple_linear_term(
    m_f: CoeffMatrix, m_g: CoeffMatrix, m_h: CoeffMatrix
) -> float:
    """E_{sigma,tau}[f(sigma) g(tau) h(sigma tau)] = <M_g M_f, M_h>/(n-1)^2
    for normalized coefficient matrices."""
    if not (m_f.degree == m_g.degree == m_h.degree):
        raise ValueError("degree mismatch")
    for m in (m_f, m_g, m_h):
        if not m.normalized:
            raise ValueError("matrix is not normalized")
    n = m_f.degree
    prod = m_g.entries @ m_f.entries
    return float(np.sum(prod * m_h.entries)) / (n - 1) ** 2


#: slack for the Frobenius triple bound assertion
TRIPLE_BOUND_ATOL = 1e-12


def matrix_triple_bound(
    m: CoeffMatrix | np.ndarray,
    n_: CoeffMatrix | np.ndarray,
    s: CoeffMatrix | np.ndarray,
) -> tuple[float, float]:
    """(|<MN, S>|, ||M|| ||N|| ||S||) in Frobenius norms; the first never
    exceeds the second (checked, with 1e-12 slack for rounding)."""
    ma, na, sa = (_entries(x) for x in (m, n_, s))
    value = float(np.sum((ma @ na) * sa))
    bound = float(np.linalg.norm(ma) * np.linalg.norm(na) * np.linalg.norm(sa))
    if abs(value) > bound + TRIPLE_BOUND_ATOL:
        raise ArithmeticError("matrix triple bound violated")
    return value, bound


def _entries(x) -> np.ndarray:
    return x.entries if isinstance(x, CoeffMatrix) else np.asarray(x, dtype=np.float64)


def interval_slice(
    m: CoeffMatrix | np.ndarray,
    lower: float = -np.inf,
    upper: float = np.inf,
    include_lower: bool = True,
    include_upper: bool = False,
) -> np.ndarray:
    """M_I: keep entries inside the interval, zero elsewhere."""
    arr = _entries(m)
    lo = arr >= lower if include_lower else arr > lower
    hi = arr <= upper if include_upper else arr < upper
    return np.where(lo & hi, arr, 0.0)


def one_sided_level1_norm_sq(coeffs: np.ndarray) -> float:
    """Upper bound (8/n) sum a_ij^2 for || sum a_ij (x_{i->j} - 1/n) ||_2^2,
    valid for arbitrary (not necessarily normalized) coefficients."""
    arr = np.asarray(coeffs, dtype=np.float64)
    return 8.0 / arr.shape[0] * float(np.sum(arr**2))


def centered_linear(coeffs: np.ndarray) -> GroupFunction:
    """The function sum a_ij (x_{i->j} - 1/n) as a GroupFunction."""
    arr = np.asarray(coeffs, dtype=np.float64)
    g = evaluate_linear(CoeffMatrix(arr))
    shift = float(arr.sum()) / arr.shape[0]
    return GroupFunction(g.degree, g.values - shift)


def level1_ratio_report(f: GroupFunction, eps: float) -> dict:
    """Diagnostic for the small-coefficient level-1 mass: reports
    X^2 = sum_{|a_ij|<eps} a_ij^2/(n-1) against E[f] * max(eps, E[f]).

    The polylogarithmic factor in the reference inequality carries an
    unspecified exponent, so only the raw ratio is reported.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    n = f.degree
    a = normalized_form(f).entries
    mean = float(np.sum(f.values)) / factorial(n)
    small = np.abs(a) < eps
    x_sq = float(np.sum(a[small] ** 2)) / (n - 1)
    eps2 = max(eps, mean)
    denom = mean * eps2
    return {
        "x_squared": x_sq,
        "mean": mean,
        "eps": eps,
        "eps_effective": eps2,
        "ratio": x_sq / denom if denom > 0 else float("inf"),
        "small_entry_count": int(small.sum()),
    }


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def matrix_to_json(m: CoeffMatrix) -> str:
    return json.dumps(
        {
            "degree": m.degree,
            "normalized": m.normalized,
            "entries": m.entries.tolist(),
        },
        sort_keys=True,
    )


def matrix_from_json(text: str) -> CoeffMatrix:
    data = json.loads(text)
    arr = np.asarray(data["entries"], dtype=np.float64)
    if arr.shape != (data["degree"], data["degree"]):
        raise ValueError("entry shape disagrees with degree header")
    return CoeffMatrix(arr)


def matrix_to_csv(m: CoeffMatrix) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in m.entries.tolist():
        writer.writerow(row)
    return buf.getvalue()
