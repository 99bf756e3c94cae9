"""Linear coefficient constraints for target Sobolev membership.

Given a validated map and a bidegree box of polynomial fields, the smoothness
conditions of the classification cascade are linear in the field
coefficients.  This module materialises them as labelled exact-rational rows
over the coefficient space, row-reduces them (fraction-free elimination with
deterministic pivoting), and produces a basis of the admissible subspace in
reduced echelon order.

Second-order conditions are stated on the reduced field w and pulled back to
the raw coefficients through w_jk = z_jk - z20 (y_jk)_1 - z02 (y_jk)_2.  Any
referenced coefficient outside the space is structurally zero, so conditions
involving only such coefficients become automatic (zero rows) rather than
errors.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Tuple, Union

from .poly2 import Poly2

if TYPE_CHECKING:  # pragma: no cover
    from .dmap import DMapRecord

PLike = Union[int, Fraction]
_F0 = Fraction(0)


@dataclass(frozen=True)
class CoefficientSpace:
    """Fields of bidegree at most (max_deg_u, max_deg_v), lexicographic order."""

    max_deg_u: int
    max_deg_v: int

    def __post_init__(self) -> None:
        if self.max_deg_u < 0 or self.max_deg_v < 0:
            raise ValueError("degrees must be non-negative")

    @property
    def dimension(self) -> int:
        return (self.max_deg_u + 1) * (self.max_deg_v + 1)

    def indices(self) -> List[Tuple[int, int]]:
        return [
            (j, k)
            for j in range(self.max_deg_u + 1)
            for k in range(self.max_deg_v + 1)
        ]

    def contains(self, j: int, k: int) -> bool:
        return 0 <= j <= self.max_deg_u and 0 <= k <= self.max_deg_v

    def index_of(self, j: int, k: int) -> int:
        if not self.contains(j, k):
            raise ValueError(f"({j}, {k}) outside the space")
        return j * (self.max_deg_v + 1) + k

    def contains_poly(self, z: Poly2) -> bool:
        return all(self.contains(j, k) for j, k in z.terms)


@dataclass(frozen=True)
class ConstraintSystem:
    """Labelled linear conditions over a coefficient space, with their RREF."""

    space: CoefficientSpace
    rows: Tuple[Tuple[Fraction, ...], ...]
    labels: Tuple[str, ...]
    reduced: Tuple[Tuple[Fraction, ...], ...]
    rank: int

    @property
    def admissible_dimension(self) -> int:
        return self.space.dimension - self.rank


# -- exact elimination -------------------------------------------------------


def _primitive(row: List[int]) -> List[int]:
    g = 0
    for entry in row:
        g = gcd(g, entry)
    return [entry // g for entry in row] if g > 1 else row


def _rref(rows: Sequence[Sequence[Fraction]]) -> Tuple[List[List[Fraction]], List[int]]:
    """Reduced row echelon form with pivot columns.

    The elimination is fraction-free: rows are scaled to integers, updated by
    exact cross-multiplication and kept primitive (gcd-reduced), with
    deterministic pivoting (first nonzero column, smallest row index).  Only
    the final normalisation to leading ones divides.
    """
    if not rows:
        return [], []
    width = len(rows[0])
    matrix: List[List[int]] = []
    for row in rows:
        if len(row) != width:
            raise ValueError("ragged constraint matrix")
        scale = 1
        for entry in row:
            scale = lcm(scale, entry.denominator)
        matrix.append(_primitive([int(entry * scale) for entry in row]))
    height = len(matrix)
    pivots: List[int] = []
    rank = 0
    for col in range(width):
        pivot_row = next((i for i in range(rank, height) if matrix[i][col] != 0), None)
        if pivot_row is None:
            continue
        matrix[rank], matrix[pivot_row] = matrix[pivot_row], matrix[rank]
        pivot = matrix[rank][col]
        for i in range(height):
            factor = matrix[i][col]
            if i == rank or factor == 0:
                continue
            row_i = matrix[i]
            row_p = matrix[rank]
            for j in range(width):
                row_i[j] = row_i[j] * pivot - factor * row_p[j]
            row_i[col] = 0
            matrix[i] = _primitive(row_i)
        pivots.append(col)
        rank += 1
    reduced: List[List[Fraction]] = []
    for i, col in enumerate(pivots):
        pivot = matrix[i][col]
        reduced.append([Fraction(entry, pivot) for entry in matrix[i]])
    return reduced, pivots


# -- condition construction --------------------------------------------------

WForm = Dict[Tuple[int, int], Fraction]


def _k1_forms(case: str) -> List[Tuple[str, WForm]]:
    forms = {
        "a": [],
        "b": [("z10", {(1, 0): Fraction(1)}), ("z01", {(0, 1): Fraction(1)})],
        "c": [("z11", {(1, 1): Fraction(1)})],
    }
    return forms[case]


def _k2_forms(record: "DMapRecord", case: str) -> List[Tuple[str, WForm]]:
    alpha, beta, gamma, delta = record.params

    def pair(j: int, k: int) -> Tuple[Fraction, Fraction]:
        return record.y.coeff(j, k)

    if case == "a":
        return [("w10", {(1, 0): Fraction(1)}), ("w01", {(0, 1): Fraction(1)})]
    if case == "b":
        return [("w11", {(1, 1): Fraction(1)})]
    if case == "c":
        return [("w21", {(2, 1): Fraction(1)}), ("w12", {(1, 2): Fraction(1)})]
    if case == "d":
        return [
            (
                "w31 - (3/2)*alpha*w30",
                {(3, 1): Fraction(1), (3, 0): -Fraction(3, 2) * alpha},
            ),
            (
                "w13 - (3/2)*delta*w03",
                {(1, 3): Fraction(1), (0, 3): -Fraction(3, 2) * delta},
            ),
        ]
    if case == "e":
        return [
            ("w30", {(3, 0): Fraction(1)}),
            ("w03", {(0, 3): Fraction(1)}),
            ("w31", {(3, 1): Fraction(1)}),
            ("w13", {(1, 3): Fraction(1)}),
            (
                "w41 - 2*alpha*w40 - beta*w22",
                {(4, 1): Fraction(1), (4, 0): -2 * alpha, (2, 2): -beta},
            ),
            (
                "w14 - 2*delta*w04 - gamma*w22",
                {(1, 4): Fraction(1), (0, 4): -2 * delta, (2, 2): -gamma},
            ),
        ]
    if case == "f":
        # The u-side pairs are component-swapped: the identity is the u <-> v
        # mirror of the v-side one, and the swap exchanges the map components.
        vec_u = [
            2 * a - 3 * alpha * b - 2 * beta * g
            for a, b, g in zip(pair(3, 1)[::-1], pair(3, 0)[::-1], pair(1, 2)[::-1])
        ]
        vec_v = [
            2 * a - 3 * delta * b - 2 * gamma * g
            for a, b, g in zip(pair(1, 3), pair(0, 3), pair(2, 1))
        ]
        return [
            (
                "w51 - [w22/2, w40].swap(2*y31 - 3*alpha*y30 - 2*beta*y12) - beta*w32 - (5/2)*alpha*w50",
                {
                    (5, 1): Fraction(1),
                    (2, 2): -vec_u[0] / 2,
                    (4, 0): -vec_u[1],
                    (3, 2): -beta,
                    (5, 0): -Fraction(5, 2) * alpha,
                },
            ),
            (
                "w15 - [w22/2, w04].(2*y13 - 3*delta*y03 - 2*gamma*y21) - gamma*w23 - (5/2)*delta*w05",
                {
                    (1, 5): Fraction(1),
                    (2, 2): -vec_v[0] / 2,
                    (0, 4): -vec_v[1],
                    (2, 3): -gamma,
                    (0, 5): -Fraction(5, 2) * delta,
                },
            ),
        ]
    raise ValueError(f"unknown case {case!r}")


_K1_SUPS: List[Tuple[str, Optional[Fraction]]] = [
    ("a", Fraction(3)),
    ("b", Fraction(6)),
    ("c", None),
]
_K2_SUPS: List[Tuple[str, Optional[Fraction]]] = [
    ("a", Fraction(6, 5)),
    ("b", Fraction(3, 2)),
    ("c", Fraction(2)),
    ("d", Fraction(3)),
    ("e", Fraction(6)),
    ("f", None),
]


def case_for_p(k: int, p: PLike) -> str:
    """The case whose band [previous sup, own sup) contains p."""
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    p = Fraction(p)
    if p < 1:
        raise ValueError("p must be at least 1")
    table = _K1_SUPS if k == 1 else _K2_SUPS
    for case, sup in table:
        if sup is None or p < sup:
            return case
    raise AssertionError("unreachable")


def _pullback_row(
    record: "DMapRecord", form: WForm, space: CoefficientSpace
) -> List[Fraction]:
    """Row of a w-condition over the raw coefficient space."""
    row = [_F0] * space.dimension
    shift_1 = _F0
    shift_2 = _F0
    for (j, k), coeff in form.items():
        if space.contains(j, k):
            row[space.index_of(j, k)] += coeff
        y_jk = record.y.coeff(j, k)
        shift_1 += coeff * y_jk[0]
        shift_2 += coeff * y_jk[1]
    if space.contains(2, 0):
        row[space.index_of(2, 0)] -= shift_1
    if space.contains(0, 2):
        row[space.index_of(0, 2)] -= shift_2
    return row


def _direct_row(form: WForm, space: CoefficientSpace) -> List[Fraction]:
    row = [_F0] * space.dimension
    for (j, k), coeff in form.items():
        if space.contains(j, k):
            row[space.index_of(j, k)] += coeff
    return row


def _build_system(
    space: CoefficientSpace, labelled_rows: List[Tuple[str, List[Fraction]]]
) -> ConstraintSystem:
    rows = tuple(tuple(row) for _, row in labelled_rows)
    labels = tuple(label for label, _ in labelled_rows)
    reduced, pivots = _rref(rows)
    return ConstraintSystem(
        space=space,
        rows=rows,
        labels=labels,
        reduced=tuple(tuple(row) for row in reduced),
        rank=len(pivots),
    )


def constraints_for(
    record: "DMapRecord", k: int, p: PLike, space: CoefficientSpace
) -> ConstraintSystem:
    """Cumulative conditions for membership in W^{k,p} over the given space."""
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    p = Fraction(p)
    if p < 1:
        raise ValueError("p must be at least 1")
    selected = case_for_p(k, p)
    labelled: List[Tuple[str, List[Fraction]]] = []
    table = _K1_SUPS if k == 1 else _K2_SUPS
    for case, _ in table:
        if k == 1:
            forms = _k1_forms(case)
            rows = [(f"k1:{case}:{name}", _direct_row(form, space)) for name, form in forms]
        else:
            forms = _k2_forms(record, case)
            rows = [
                (f"k2:{case}:{name}", _pullback_row(record, form, space))
                for name, form in forms
            ]
        labelled.extend(rows)
        if case == selected:
            break
    return _build_system(space, labelled)


def c1_system(
    record: "DMapRecord", space: Optional[CoefficientSpace] = None
) -> ConstraintSystem:
    """The five conditions for a continuously differentiable composite."""
    if space is None:
        space = CoefficientSpace(2, 2)
    alpha, beta, gamma, delta = record.params
    forms: List[Tuple[str, WForm]] = [
        ("z10", {(1, 0): Fraction(1)}),
        ("z01", {(0, 1): Fraction(1)}),
        ("z11", {(1, 1): Fraction(1)}),
        (
            "z21 - alpha*z20 - beta*z02",
            {(2, 1): Fraction(1), (2, 0): -alpha, (0, 2): -beta},
        ),
        (
            "z12 - gamma*z20 - delta*z02",
            {(1, 2): Fraction(1), (2, 0): -gamma, (0, 2): -delta},
        ),
    ]
    labelled = [(f"c1:{name}", _direct_row(form, space)) for name, form in forms]
    return _build_system(space, labelled)


def c1_residuals(record: "DMapRecord", z: Poly2) -> List[Tuple[str, Fraction]]:
    """Exact residuals of the five differentiability conditions for z."""
    if z.dim != 1:
        raise ValueError("the field must be a scalar polynomial")
    alpha, beta, gamma, delta = record.params
    c = z.coeff
    return [
        ("z10", c(1, 0)),
        ("z01", c(0, 1)),
        ("z11", c(1, 1)),
        ("z21 - alpha*z20 - beta*z02", c(2, 1) - alpha * c(2, 0) - beta * c(0, 2)),
        ("z12 - gamma*z20 - delta*z02", c(1, 2) - gamma * c(2, 0) - delta * c(0, 2)),
    ]


def admissible_basis(system: ConstraintSystem) -> Tuple[Poly2, ...]:
    """Nullspace basis of the constraint rows, in reduced echelon order."""
    space = system.space
    reduced, pivots = _rref(system.rows)
    pivot_set = set(pivots)
    free_cols = [col for col in range(space.dimension) if col not in pivot_set]
    indices = space.indices()
    basis = []
    for free in free_cols:
        coeffs: Dict[Tuple[int, int], Fraction] = {indices[free]: Fraction(1)}
        for row, pivot_col in zip(reduced, pivots):
            if row[free] != 0:
                coeffs[indices[pivot_col]] = -row[free]
        basis.append(Poly2(1, coeffs))
    return tuple(basis)


def check_membership(system: ConstraintSystem, z: Poly2) -> Tuple[bool, Tuple[str, ...]]:
    """Evaluate every labelled condition on z; report the violated ones."""
    if z.dim != 1:
        raise ValueError("the field must be a scalar polynomial")
    if not system.space.contains_poly(z):
        raise ValueError("field has support outside the coefficient space")
    vector = [z.coeff(j, k) for j, k in system.space.indices()]
    violated = []
    for label, row in zip(system.labels, system.rows):
        residual = sum((a * b for a, b in zip(row, vector)), _F0)
        if residual != 0:
            violated.append(label)
    return (not violated, tuple(violated))
