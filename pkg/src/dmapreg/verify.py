"""Independent numeric verification of the symbolic classification.

The sharp membership statements are about integrals of (mu^{-l} |P|)^p mu
over the parameter square, which are singular only at the degenerate corner
(0,0).  The oracle therefore integrates over truncated domains
Sigma \\ [0, eps_j]^2 for the dyadic shrink eps_j = 2^{-j} and inspects how
the truncated values I(eps_j) grow: convergence shows up as geometrically
decaying increments, a logarithmic blow-up as constant increments, and a
power blow-up as geometrically growing increments.  The increments are
exactly the integrals over the dyadic annuli [0, 2^{1-j}]^2 \\ [0, 2^{-j}]^2,
so each is computed once, independently, by adaptive tensor Gauss-Legendre
panels - no catastrophic cancellation between levels.

The slope of log2(increment) per level j is fitted over the last six levels;
thresholds: slope < -0.5 -> convergent, |slope| <= 0.1 -> divergent_log,
slope > 0.1 -> divergent_power, anything else -> inconclusive.
"""

from __future__ import annotations

import functools
import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .constraints import c1_residuals
from .dmap import DMapRecord, canonical_dmap, jacobian
from .poly2 import Poly2
from .sobolev import RegularityReport

PLike = Union[int, Fraction]

CONVERGENT = "convergent"
DIVERGENT_LOG = "divergent_log"
DIVERGENT_POWER = "divergent_power"
INCONCLUSIVE = "inconclusive"

GAUSS_ORDER = 32
ANNULUS_REL_TOL = 1e-10
MAX_PANELS_PER_ANNULUS = 800
MAX_J = 24


class QuadratureError(RuntimeError):
    """The adaptive quadrature could not meet its per-annulus tolerance."""


# -- fast float evaluation ---------------------------------------------------


class _FloatPoly:
    """Dense float coefficient matrix for tensor evaluation on node vectors."""

    def __init__(self, poly: Poly2):
        rows = poly.max_degree_u + 1
        cols = poly.max_degree_v + 1
        self.matrix = np.zeros((rows, cols))
        for (j, k), (value,) in poly.terms.items():
            self.matrix[j, k] = float(value)

    def eval_grid(self, u_nodes: np.ndarray, v_nodes: np.ndarray) -> np.ndarray:
        pu = np.power.outer(u_nodes, np.arange(self.matrix.shape[0]))
        pv = np.power.outer(v_nodes, np.arange(self.matrix.shape[1]))
        return pu @ self.matrix @ pv.T


@functools.lru_cache(maxsize=4)
def _gauss_nodes(order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return nodes, weights


class _Integrand:
    """(mu^{-l}|P|)^p mu evaluated in log space to dodge overflow.

    |P| is the euclidean norm of the components: equivalent to any other
    vector norm (so the divergence verdict is unaffected) and smooth away
    from common zeros, which keeps Gauss panels spectrally accurate.
    """

    def __init__(self, mu: Poly2, P: Poly2, ell: int, p: float):
        self.mu = _FloatPoly(mu)
        self.components = [_FloatPoly(c) for c in P.components()]
        self.p = p
        self.mu_exponent = 1.0 - ell * p

    def __call__(self, u_nodes: np.ndarray, v_nodes: np.ndarray) -> np.ndarray:
        mu_vals = self.mu.eval_grid(u_nodes, v_nodes)
        if np.min(mu_vals) <= 0.0:
            raise QuadratureError("Jacobian determinant non-positive at a quadrature node")
        square_sum = np.square(self.components[0].eval_grid(u_nodes, v_nodes))
        for comp in self.components[1:]:
            square_sum += np.square(comp.eval_grid(u_nodes, v_nodes))
        with np.errstate(divide="ignore"):
            log_f = 0.5 * self.p * np.log(square_sum) + self.mu_exponent * np.log(mu_vals)
        with np.errstate(over="raise"):
            try:
                values = np.exp(log_f)
            except FloatingPointError as exc:
                raise QuadratureError("integrand overflow at a quadrature node") from exc
        return values


Rect = Tuple[float, float, float, float]


def _panel(integrand: _Integrand, rect: Rect) -> float:
    a, b, c, d = rect
    nodes, weights = _gauss_nodes(GAUSS_ORDER)
    u_nodes = 0.5 * (a + b) + 0.5 * (b - a) * nodes
    v_nodes = 0.5 * (c + d) + 0.5 * (d - c) * nodes
    values = integrand(u_nodes, v_nodes)
    scale = 0.25 * (b - a) * (d - c)
    return float(scale * (weights @ values @ weights))


def _split4(rect: Rect) -> Tuple[Rect, ...]:
    a, b, c, d = rect
    mu_ = 0.5 * (a + b)
    mv_ = 0.5 * (c + d)
    return ((a, mu_, c, mv_), (a, mu_, mv_, d), (mu_, b, c, mv_), (mu_, b, mv_, d))


def _integrate_region(
    integrand: _Integrand,
    rects: Sequence[Rect],
    rel_tol: float = ANNULUS_REL_TOL,
    max_panels: int = MAX_PANELS_PER_ANNULUS,
) -> float:
    """Adaptive tensor Gauss-Legendre over a union of rectangles.

    Global strategy: each leaf carries the refined estimate (sum of its four
    children panels) and the coarse-vs-refined discrepancy as error; the
    worst leaf is split until the summed error meets the relative tolerance.
    """
    panels_used = 0
    counter = 0
    heap: List[Tuple[float, int, Rect, float, Tuple[Rect, ...], Tuple[float, ...]]] = []
    leaves: Dict[int, Tuple[Rect, float, float]] = {}

    def make_leaf(rect: Rect) -> Tuple[int, float, float]:
        nonlocal panels_used, counter
        coarse = _panel(integrand, rect)
        children = _split4(rect)
        child_vals = tuple(_panel(integrand, child) for child in children)
        panels_used += 5
        fine = math.fsum(child_vals)
        error = abs(fine - coarse)
        counter += 1
        heapq.heappush(heap, (-error, counter, rect, fine, children, child_vals))
        leaves[counter] = (rect, fine, error)
        return counter, fine, error

    for rect in rects:
        make_leaf(rect)

    while True:
        total = math.fsum(value for _, value, _ in leaves.values())
        total_error = math.fsum(err for _, _, err in leaves.values())
        if total_error <= rel_tol * max(abs(total), 1e-300):
            break
        if panels_used >= max_panels:
            raise QuadratureError(
                f"needed more than {max_panels} panels for tolerance {rel_tol:g}"
            )
        neg_error, leaf_id, rect, fine, children, child_vals = heapq.heappop(heap)
        if leaf_id not in leaves:
            continue
        if -neg_error <= 0.0:
            break  # nothing left to improve
        del leaves[leaf_id]
        for child in children:
            make_leaf(child)
    ordered = sorted(leaves.values(), key=lambda item: item[0])
    return math.fsum(value for _, value, _ in ordered)


def _annulus_rects(j: int) -> Tuple[Rect, ...]:
    """Graded rectangles covering annulus level j (level 1: outer region).

    Away from the axes mu ~ uv, but below v ~ u^2 (resp. left of u ~ v^2)
    the cubic edge terms take over; a plain rectangle spanning that
    transition needs deep adaptive splitting.  Grading the strips
    dyadically down to the transition height keeps the integrand's
    variation per strip bounded, so each strip is one accepted panel.
    """
    a = 2.0**-j
    b = 2.0 ** (1 - j)
    rects = []
    # [a, b] x [0, b], graded in v down to a^2.
    hi = b
    while hi > a * a:
        rects.append((a, b, 0.5 * hi, hi))
        hi *= 0.5
    rects.append((a, b, 0.0, hi))
    # [0, a] x [a, b], graded in u down to a^2.
    hi = a
    while hi > a * a:
        rects.append((0.5 * hi, hi, a, b))
        hi *= 0.5
    rects.append((0.0, hi, a, b))
    return tuple(rects)


# -- divergence diagnostics --------------------------------------------------


@dataclass(frozen=True)
class DivergenceDiagnostic:
    """Truncated integrals I(eps_j) with the fitted growth verdict.

    ``rate_estimate`` is the fitted slope of log2(increment) per level: about
    -r for convergence rate eps^r, about 0 for logarithmic divergence, about
    +q for a power divergence I(eps) ~ eps^{-q}.
    """

    epsilons: Tuple[float, ...]
    values: Tuple[float, ...]
    verdict: str
    rate_estimate: float


def _fit_slope(points: Sequence[Tuple[int, float]]) -> float:
    js = [float(j) for j, _ in points]
    logs = [math.log2(d) for _, d in points]
    n = len(points)
    mean_j = sum(js) / n
    mean_log = sum(logs) / n
    denom = sum((j - mean_j) ** 2 for j in js)
    if denom == 0.0:
        return 0.0
    return sum((j - mean_j) * (l - mean_log) for j, l in zip(js, logs)) / denom


def _verdict_from_increments(
    increments: Sequence[Tuple[int, float]], total: float
) -> Tuple[str, float]:
    if total <= 0.0:
        return CONVERGENT, 0.0
    window = list(increments)[-6:]
    floor = 1e-13 * total
    positive = [(j, d) for j, d in window if d > floor]
    if len(positive) < 2:
        last_j, last_d = window[-1]
        if last_d <= floor:
            # Increments vanished below resolution: the sequence stabilised.
            return CONVERGENT, 0.0
        # Only the newest increment registers against the running total: each
        # annulus dwarfs the sum of all earlier ones.  A convergent tail is
        # decreasing, so this pattern can only be a steep power blow-up.
        older = [(j, d) for j, d in window[:-1] if d > 0.0]
        if not older:
            return DIVERGENT_POWER, float("inf")
        return DIVERGENT_POWER, _fit_slope(older + [(last_j, last_d)])
    slope = _fit_slope(positive)
    if slope < -0.5:
        return CONVERGENT, slope
    if abs(slope) <= 0.1:
        return DIVERGENT_LOG, slope
    if slope > 0.1:
        return DIVERGENT_POWER, slope
    return INCONCLUSIVE, slope


def truncated_norm(
    record: DMapRecord,
    P: Poly2,
    ell: int,
    p: PLike,
    j_max: int = 20,
) -> DivergenceDiagnostic:
    """Truncated-domain integrals of (mu^{-l}|P|)^p mu with a growth verdict.

    I(eps_j) integrates over the square minus [0, eps_j]^2 for eps_j = 2^-j,
    j = 2..j_max; the domain is decomposed into dyadic annuli so each
    increment is an independent, positively-weighted quadrature.
    """
    p = Fraction(p)
    if p < 1:
        raise ValueError("p must be at least 1")
    if ell < 0:
        raise ValueError("ell must be non-negative")
    if not 4 <= j_max <= MAX_J:
        raise ValueError(f"j_max must be between 4 and {MAX_J}")
    integrand = _Integrand(record.mu, P, ell, float(p))
    annulus_values = [
        _integrate_region(integrand, _annulus_rects(j)) for j in range(1, j_max + 1)
    ]
    epsilons = []
    values = []
    running = annulus_values[0]
    increments: List[Tuple[int, float]] = []
    for j in range(2, j_max + 1):
        running += annulus_values[j - 1]
        epsilons.append(2.0**-j)
        values.append(running)
        increments.append((j, annulus_values[j - 1]))
    verdict, rate = _verdict_from_increments(increments, values[-1])
    return DivergenceDiagnostic(
        epsilons=tuple(epsilons),
        values=tuple(values),
        verdict=verdict,
        rate_estimate=rate,
    )


def monomial_oracle(
    m: int,
    n: int,
    ell: int,
    p: PLike,
    record: Optional[DMapRecord] = None,
    j_max: int = 20,
) -> DivergenceDiagnostic:
    """truncated_norm for the plain monomial u^m v^n over the reference map."""
    if m < 0 or n < 0:
        raise ValueError("exponents must be non-negative")
    if record is None:
        record = canonical_dmap()
    return truncated_norm(record, Poly2.monomial(m, n), ell, p, j_max=j_max)


# -- closed-form cross-check -------------------------------------------------


@dataclass(frozen=True)
class SubstitutedBounds:
    """Closed-form bracket for the model integral of u^m v^n / mu^l over the
    lower wedge, via the substitution (u, v) = (st, s^2 t (1 - t)).

    The substituted integrand factorises as s^{e1} * t^{e2} (1-t)^{p n}; the
    integral over the wedge is bounded between the s-range [0,1] and [0,2]
    products.  An exponent at or below -1 means divergence.
    """

    divergent: bool
    lower: float
    upper: float


def substituted_norm(m: int, n: int, ell: int, p: PLike) -> SubstitutedBounds:
    p = Fraction(p)
    if p < 1:
        raise ValueError("p must be at least 1")
    if m < 0 or n < 0 or ell < 0:
        raise ValueError("m, n, ell must be non-negative")
    e1 = p * (m + 2 * n - 3 * ell) + 5
    e2 = p * (m + n - 2 * ell) + 3
    e3 = p * n
    if e1 <= -1 or e2 <= -1:
        return SubstitutedBounds(divergent=True, lower=math.inf, upper=math.inf)
    s_lower = 1.0 / float(e1 + 1)
    s_upper = 2.0 ** float(e1 + 1) / float(e1 + 1)
    beta_value = math.exp(
        math.lgamma(float(e2 + 1)) + math.lgamma(float(e3 + 1)) - math.lgamma(float(e2 + e3 + 2))
    )
    return SubstitutedBounds(
        divergent=False, lower=s_lower * beta_value, upper=s_upper * beta_value
    )


# -- gradient limit at the collapsed corner ----------------------------------


@dataclass(frozen=True)
class GradientLimitReport:
    """Observed gradients along rays into the corner against the exact limit."""

    limit: Tuple[Fraction, Fraction]
    observed: Tuple[Tuple[Fraction, Tuple[float, float]], ...]
    max_deviation: float


def gradient_limit_check(
    record: DMapRecord, z: Poly2, j_max: int = 20
) -> GradientLimitReport:
    """Compare grad f along rays (t, lambda t), t = 2^-j_max, with the limit.

    Requires z to satisfy the differentiability conditions; the limit is
    -(n1, n2)/n3 for the normal direction n = s20 x s02 built from the
    surface coefficients s_jk = (x_jk, z_jk).
    """
    residuals = [(label, res) for label, res in c1_residuals(record, z) if res != 0]
    if residuals:
        labels = ", ".join(label for label, _ in residuals)
        raise ValueError(f"field violates the differentiability conditions: {labels}")
    x20 = record.x.coeff(2, 0)
    x02 = record.x.coeff(0, 2)
    s20 = (x20[0], x20[1], z.coeff(2, 0))
    s02 = (x02[0], x02[1], z.coeff(0, 2))
    normal = (
        s20[1] * s02[2] - s20[2] * s02[1],
        s20[2] * s02[0] - s20[0] * s02[2],
        s20[0] * s02[1] - s20[1] * s02[0],
    )
    limit = (-normal[0] / normal[2], -normal[1] / normal[2])
    dx = jacobian(record.x)
    dz1 = z.diff(1)
    dz2 = z.diff(2)
    t = Fraction(1, 2**j_max)
    observed = []
    worst = Fraction(0)
    for lam in (Fraction(1, 4), Fraction(1), Fraction(4)):
        point = (t, lam * t)
        a = dx[(0, 0)].eval(point)
        b = dx[(0, 1)].eval(point)
        c = dx[(1, 0)].eval(point)
        d = dx[(1, 1)].eval(point)
        det = a * d - b * c
        g1 = dz1.eval(point)
        g2 = dz2.eval(point)
        grad = ((g1 * d - g2 * c) / det, (-g1 * b + g2 * a) / det)
        worst = max(worst, abs(grad[0] - limit[0]), abs(grad[1] - limit[1]))
        observed.append((lam, (float(grad[0]), float(grad[1]))))
    return GradientLimitReport(
        limit=limit, observed=tuple(observed), max_deviation=float(worst)
    )


# -- endpoint-singular reference integral ------------------------------------


def log_squared_integral(upper: PLike = Fraction(1, 2), tol: float = 1e-10) -> float:
    """Numerically integrate 1/(x ln^2 x) from 0 to upper (< 1).

    The integrand blows up at 0 with a 1/ln tail that plain truncation cannot
    reach, so the quadrature uses a tanh-sinh (double-exponential)
    substitution x = (b/2)(1 + tanh((pi/2) sinh t)) with log-stable factors,
    under trapezoidal step-halving.
    """
    b = float(Fraction(upper))
    if not 0.0 < b < 1.0:
        raise ValueError("upper must lie in (0, 1)")
    log_half_b = math.log(b / 2.0)
    t_cut = 30.0

    def transformed(t: float) -> float:
        w = 0.5 * math.pi * math.sinh(t)
        # log(1 + tanh w) and (1 - tanh w), stable for large |w|.
        if w >= 0.0:
            log1p_tanh = math.log(2.0) - math.log1p(math.exp(-2.0 * w))
            one_minus_tanh = 2.0 * math.exp(-2.0 * w) / (1.0 + math.exp(-2.0 * w))
        else:
            log1p_tanh = math.log(2.0) + 2.0 * w - math.log1p(math.exp(2.0 * w))
            one_minus_tanh = 2.0 / (1.0 + math.exp(2.0 * w))
        log_x = log_half_b + log1p_tanh
        dx_over_x = 0.5 * math.pi * math.cosh(t) * one_minus_tanh
        return dx_over_x / (log_x * log_x)

    def trapezoid(h: float) -> float:
        steps = int(t_cut / h)
        total = transformed(0.0)
        for i in range(1, steps + 1):
            total += transformed(i * h) + transformed(-i * h)
        return h * total

    h = 0.5
    previous = trapezoid(h)
    for _ in range(8):
        h *= 0.5
        current = trapezoid(h)
        if abs(current - previous) <= tol * abs(current):
            return current
        previous = current
    return previous


# -- classification agreement probes -----------------------------------------


def agreement_probes(report: RegularityReport) -> Tuple[Optional[Fraction], Optional[Fraction]]:
    """(p inside, p outside) probes for checking a classification by oracle.

    Probes sit far enough from the band edge that the increment decay/growth
    rates (at least one log2 unit per level inside, half a unit outside)
    clear the verdict thresholds for every reachable band.
    """
    sup = report.p_sup
    if sup is None:
        return Fraction(6), None
    if sup == 1:
        return None, Fraction(3, 2)
    return max(Fraction(1), sup - 1), sup + Fraction(1, 2)
