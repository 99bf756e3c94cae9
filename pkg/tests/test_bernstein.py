"""Bernstein-coefficient positivity certificates."""

import random
from fractions import Fraction

import pytest

from dmapreg import (
    POSITIVE,
    UNKNOWN,
    WITNESS,
    Poly2,
    SubdivisionBudget,
    U,
    V,
    bernstein_coefficients,
    certify_positive_on_box,
    restrict_to_box,
)


def _box(a, b, c, d):
    return (Fraction(a), Fraction(b), Fraction(c), Fraction(d))


def test_restrict_to_box_matches_evaluation():
    rng = random.Random(11)
    poly = U**3 + U * V * 2 - V**2 + Poly2.constant(Fraction(1, 3))
    box = _box(Fraction(1, 4), Fraction(3, 4), Fraction(1, 8), Fraction(1, 2))
    coeffs = restrict_to_box(poly, box)
    u0, u1, v0, v1 = box
    for _ in range(10):
        s = Fraction(rng.randint(0, 8), 8)
        t = Fraction(rng.randint(0, 8), 8)
        direct = poly.eval((u0 + (u1 - u0) * s, v0 + (v1 - v0) * t))
        via = sum(
            row[k] * s**j * t**k
            for j, row in enumerate(coeffs)
            for k in range(len(row))
        )
        assert via == direct


def test_bernstein_bounds_function_values():
    rng = random.Random(12)
    poly = U**2 * V - U * V**2 + Poly2.constant(Fraction(1, 5))
    bern = bernstein_coefficients(restrict_to_box(poly, _box(0, 1, 0, 1)))
    flat = [entry for row in bern for entry in row]
    lo, hi = min(flat), max(flat)
    for _ in range(20):
        pt = (Fraction(rng.randint(0, 16), 16), Fraction(rng.randint(0, 16), 16))
        val = poly.eval(pt)
        assert lo <= val <= hi


def test_certify_positive_constant():
    status, witness = certify_positive_on_box(Poly2.constant(3), _box(0, 1, 0, 1))
    assert status == POSITIVE and witness is None


def test_certify_positive_needs_subdivision():
    # (u - 1/2)^2 + 1/100 is positive but has negative Bernstein coefficients
    # on the unit box at depth zero.
    p = (U - Poly2.constant(Fraction(1, 2))) ** 2 + Poly2.constant(Fraction(1, 100))
    status, witness = certify_positive_on_box(p, _box(0, 1, 0, 1))
    assert status == POSITIVE and witness is None


def test_certify_witness_for_sign_change():
    p = U + V - Poly2.constant(Fraction(1, 2))
    status, witness = certify_positive_on_box(p, _box(0, 1, 0, 1))
    assert status == WITNESS
    assert p.eval(witness) <= 0


def test_certify_unknown_on_exhausted_budget():
    p = (U - Poly2.constant(Fraction(1, 2))) ** 2 + Poly2.constant(Fraction(1, 10**6))
    status, witness = certify_positive_on_box(
        p, _box(0, 1, 0, 1), max_depth=1, budget=SubdivisionBudget(remaining=2)
    )
    assert status == UNKNOWN and witness is None


def test_budget_spend():
    budget = SubdivisionBudget(remaining=2)
    assert budget.spend() and budget.spend()
    assert not budget.spend()


def test_certify_on_shifted_box():
    # u*v is zero on the axes but positive on a box bounded away from them.
    p = U * V
    status, _ = certify_positive_on_box(p, _box(Fraction(1, 4), 1, Fraction(1, 4), 1))
    assert status == POSITIVE
    # On the full square the axes give exact zero values at non-origin
    # corners, so certification reports a witness.
    status, witness = certify_positive_on_box(p, _box(0, 1, 0, 1))
    assert status == WITNESS
    assert witness != (0, 0) and p.eval(witness) <= 0
