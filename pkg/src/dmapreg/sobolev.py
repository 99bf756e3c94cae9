"""Symbolic Sobolev-membership classification over a degenerate map.

For a validated map with standard form y and a polynomial field z, the
composite f = z o x^{-1} has first/second derivatives that are rational
functions with denominator mu = det Dy.  Membership of f in W^{k,p} reduces
to integrability of mu^{-l} P against the area weight mu, where P is an
explicit polynomial "quotient" (l = 1, d = 2 entries for k = 1; l = 3,
d = 4 entries for k = 2).

The arithmetic backbone is the weight w(m, n) = m + n + min(m, n): the
monomial u^m v^n / mu^l lies in L^p iff w(m, n) > 3l - 6/p.  Sorting the
terms of P by weight gives the leading parts Lambda_r P, and membership for
p in the band Pi(r, l) is equivalent to Lambda_r P = 0.  The classifier
walks the coefficient-condition cascade (cases a, b, c, ... on z or on the
reduced field w) and cross-validates every step against the corresponding
Lambda_r P = 0 test on the exactly computed quotient; any disagreement
raises InternalInconsistencyError, since it would mean the two formulations
of the same criterion fell out of sync.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple, Union

from .dmap import DMapRecord, reduce_field
from .poly2 import Poly2, kron2, row_times_grid, row_times_mat2

PLike = Union[int, Fraction]

#: Leading parts are only examined up to this weight (case f sits at r = 8).
MAX_CASE_WEIGHT = 8


class InternalInconsistencyError(RuntimeError):
    """The coefficient cascade and the leading-part test disagreed."""


def weight(m: int, n: int) -> int:
    """The integrability weight of u^m v^n: m + n + min(m, n)."""
    if m < 0 or n < 0:
        raise ValueError("exponents must be non-negative")
    return m + n + min(m, n)


def monomial_in_Lp(m: int, n: int, ell: int, p: PLike) -> bool:
    """Exact membership test for u^m v^n / mu^l in L^p with weight mu."""
    p = Fraction(p)
    if p < 1:
        raise ValueError("p must be at least 1")
    if ell < 0:
        raise ValueError("ell must be non-negative")
    return weight(m, n) > 3 * ell - Fraction(6) / p


def p_range(r: int, ell: int) -> Tuple[Fraction, Optional[Fraction]]:
    """The band Pi(r, l) = [6/(3l - r), 6/(3l - 1 - r)); None means infinity."""
    if 3 * ell - r <= 0:
        raise ValueError(f"p_range undefined for r={r}, ell={ell} (need r < 3*ell)")
    lower = Fraction(6, 3 * ell - r)
    upper = Fraction(6, 3 * ell - 1 - r) if 3 * ell - 1 - r > 0 else None
    return lower, upper


def leading_part(P: Poly2, r: int) -> Poly2:
    """Terms of P whose exponents have weight at most r."""
    return P.filter_terms(lambda j, k: weight(j, k) <= r)


@dataclass(frozen=True)
class QuotientData:
    """The polynomial quotient P with its denominator power l for order k."""

    k: int
    P: Poly2
    ell: int


def quotient_first(record: DMapRecord, z: Poly2) -> QuotientData:
    """First-order quotient P = Dz * Gamma (so Dh o y = mu^{-1} P)."""
    if z.dim != 1:
        raise ValueError("the field must be a scalar polynomial")
    row = row_times_mat2((z.diff(1), z.diff(2)), record.gamma_adj)
    return QuotientData(k=1, P=Poly2.from_components(list(row)), ell=1)


def _second_order_row(
    record: DMapRecord, w: Poly2, post: Callable[[Poly2], Poly2]
) -> Tuple[Poly2, ...]:
    """Components of (mu D^2 w - Dw Gamma D^2 y)(Gamma (x) Gamma).

    ``post`` is applied to every intermediate polynomial; it is the identity
    for the full quotient and a weight cut-off for the classifier, which only
    needs the low-weight terms (the weight of a product term is at least the
    sum of the factors' weights, so cutting early is exact for what is kept).
    """
    mu = post(record.mu)
    g = record.gamma_adj
    gamma_t = [[post(g[(i, j)]) for j in range(2)] for i in range(2)]
    y1, y2 = record.y.components()

    def second_row(f: Poly2) -> List[Poly2]:
        return [
            post(f.diff(1).diff(1)),
            post(f.diff(1).diff(2)),
            post(f.diff(2).diff(1)),
            post(f.diff(2).diff(2)),
        ]

    d2w = second_row(w)
    d2y = [second_row(y1), second_row(y2)]
    dw_gamma = [
        post(post(w.diff(1)) * gamma_t[0][0] + post(w.diff(2)) * gamma_t[1][0]),
        post(post(w.diff(1)) * gamma_t[0][1] + post(w.diff(2)) * gamma_t[1][1]),
    ]
    q_row = [
        post(mu * d2w[col] - (dw_gamma[0] * d2y[0][col] + dw_gamma[1] * d2y[1][col]))
        for col in range(4)
    ]
    kron = [
        [post(gamma_t[i][k] * gamma_t[j][l]) for k in range(2) for l in range(2)]
        for i in range(2)
        for j in range(2)
    ]
    return tuple(
        post(sum((q_row[row] * kron[row][col] for row in range(4)), Poly2.zero()))
        for col in range(4)
    )


def quotient_second(record: DMapRecord, w: Poly2) -> QuotientData:
    """Second-order quotient for a reduced field (requires w20 = w02 = 0)."""
    if w.dim != 1:
        raise ValueError("the field must be a scalar polynomial")
    if w.coeff(2, 0) != 0 or w.coeff(0, 2) != 0:
        raise ValueError("quotient_second expects a reduced field with w20 = w02 = 0")
    row = _second_order_row(record, w, post=lambda poly: poly)
    return QuotientData(k=2, P=Poly2.from_components(list(row)), ell=3)


def _truncated_second_quotient(record: DMapRecord, w: Poly2, r_max: int) -> Poly2:
    cut = lambda poly: poly.filter_terms(lambda j, k: weight(j, k) <= r_max)
    row = _second_order_row(record, w, post=cut)
    return Poly2.from_components(list(row))


# -- the cascade -------------------------------------------------------------


@dataclass(frozen=True)
class RegularityReport:
    """Classification outcome for f = z o x^{-1} at differentiation order k.

    ``p_sup`` is the supremum of the open-ended membership band [1, p_sup);
    None encodes that every finite p is included.  A ``p_sup`` of 1 encodes
    the empty band (second order only).  ``conjectured_bounded`` marks the
    terminal case, where the derivatives are additionally expected - but not
    proven - to be bounded.
    """

    k: int
    case_label: str
    p_sup: Optional[Fraction]
    failed_conditions: Tuple[str, ...]
    conjectured_bounded: bool

    def contains(self, p: PLike) -> bool:
        p = Fraction(p)
        if p < 1:
            raise ValueError("p must be at least 1")
        if self.p_sup is None:
            return True
        return p < self.p_sup

    @property
    def p_interval(self) -> str:
        if self.p_sup is None:
            return "[1, inf)"
        if self.p_sup == 1:
            return "empty"
        return f"[1, {self.p_sup})"


_Condition = Tuple[str, Fraction]


def _k1_cases(z: Poly2) -> List[Tuple[str, List[_Condition], Optional[Fraction]]]:
    z10 = z.coeff(1, 0)
    z01 = z.coeff(0, 1)
    z11 = z.coeff(1, 1)
    return [
        ("a", [], Fraction(3)),
        ("b", [("z10", z10), ("z01", z01)], Fraction(6)),
        ("c", [("z11", z11)], None),
    ]


def _k2_cases(
    record: DMapRecord, w: Poly2
) -> List[Tuple[str, List[_Condition], Optional[Fraction]]]:
    alpha, beta, gamma, delta = record.params
    c = w.coeff

    def pair(j: int, k: int) -> Tuple[Fraction, Fraction]:
        return record.y.coeff(j, k)

    # The u-side identity mirrors the v-side one under the u <-> v swap, which
    # also exchanges the two map components; hence the reversed pairs here.
    vec_u = [
        2 * a - 3 * alpha * b - 2 * beta * g
        for a, b, g in zip(pair(3, 1)[::-1], pair(3, 0)[::-1], pair(1, 2)[::-1])
    ]
    vec_v = [
        2 * a - 3 * delta * b - 2 * gamma * g
        for a, b, g in zip(pair(1, 3), pair(0, 3), pair(2, 1))
    ]
    res_51 = c(5, 1) - (
        c(2, 2) / 2 * vec_u[0] + c(4, 0) * vec_u[1] + beta * c(3, 2) + Fraction(5, 2) * alpha * c(5, 0)
    )
    res_15 = c(1, 5) - (
        c(2, 2) / 2 * vec_v[0] + c(0, 4) * vec_v[1] + gamma * c(2, 3) + Fraction(5, 2) * delta * c(0, 5)
    )
    return [
        ("a", [("w10", c(1, 0)), ("w01", c(0, 1))], Fraction(6, 5)),
        ("b", [("w11", c(1, 1))], Fraction(3, 2)),
        ("c", [("w21", c(2, 1)), ("w12", c(1, 2))], Fraction(2)),
        (
            "d",
            [
                ("w31 - (3/2)*alpha*w30", c(3, 1) - Fraction(3, 2) * alpha * c(3, 0)),
                ("w13 - (3/2)*delta*w03", c(1, 3) - Fraction(3, 2) * delta * c(0, 3)),
            ],
            Fraction(3),
        ),
        (
            "e",
            [
                ("w30", c(3, 0)),
                ("w03", c(0, 3)),
                ("w31", c(3, 1)),
                ("w13", c(1, 3)),
                ("w41 - 2*alpha*w40 - beta*w22", c(4, 1) - 2 * alpha * c(4, 0) - beta * c(2, 2)),
                ("w14 - 2*delta*w04 - gamma*w22", c(1, 4) - 2 * delta * c(0, 4) - gamma * c(2, 2)),
            ],
            Fraction(6),
        ),
        (
            "f",
            [
                ("w51 - [w22/2, w40].swap(2*y31 - 3*alpha*y30 - 2*beta*y12) - beta*w32 - (5/2)*alpha*w50", res_51),
                ("w15 - [w22/2, w04].(2*y13 - 3*delta*y03 - 2*gamma*y21) - gamma*w23 - (5/2)*delta*w05", res_15),
            ],
            None,
        ),
    ]


def _case_r(k: int, index: int) -> int:
    # k=1: cases a,b,c sit at r = 0,1,2; k=2: cases a..f sit at r = 3..8.
    return index if k == 1 else 3 + index


def _cross_check(case: str, r: int, cascade_zero: bool, leading_zero: bool) -> None:
    if cascade_zero != leading_zero:
        raise InternalInconsistencyError(
            f"case {case!r}: coefficient cascade says "
            f"{'satisfied' if cascade_zero else 'violated'} but the leading part "
            f"Lambda_{r} P is {'zero' if leading_zero else 'nonzero'}"
        )


def classify(record: DMapRecord, z: Poly2, k: int) -> RegularityReport:
    """Classify f = z o x^{-1} in W^{k,p}: deepest satisfied case and p band.

    The coefficient cascade is evaluated in order and stops at the first
    violated case; each evaluated verdict is cross-validated against the
    vanishing of the matching leading part of the quotient polynomial.
    """
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    if z.dim != 1:
        raise ValueError("the field must be a scalar polynomial")
    if k == 1:
        cases = _k1_cases(z)
        P = quotient_first(record, z).P
    else:
        w = reduce_field(record, z)
        cases = _k2_cases(record, w)
        P = _truncated_second_quotient(record, w, MAX_CASE_WEIGHT)

    # Case a of the first-order cascade is unconditional, so k=1 never stays
    # here; for k=2 the empty band [1, 1) is a real outcome.
    case_label = "none"
    p_sup: Optional[Fraction] = Fraction(1)
    failed: Tuple[str, ...] = ()
    for index, (case, conditions, sup) in enumerate(cases):
        r = _case_r(k, index)
        cascade_zero = all(residual == 0 for _, residual in conditions)
        leading_zero = leading_part(P, r).is_zero
        _cross_check(case, r, cascade_zero, leading_zero)
        if not cascade_zero:
            failed = tuple(
                f"{name} = 0 (residual {residual})"
                for name, residual in conditions
                if residual != 0
            )
            break
        case_label = case
        p_sup = sup
    terminal = "c" if k == 1 else "f"
    return RegularityReport(
        k=k,
        case_label=case_label,
        p_sup=p_sup,
        failed_conditions=failed,
        conjectured_bounded=(case_label == terminal),
    )
