"""Analytic tradeoff between the witness value and certified randomness.

For a fixed guessing probability ``p`` the best achievable witness value is
a maximum over a one-parameter family of planar strategy geometries, each a
piecewise-analytic function of the free angle with four branches separated
by clamping breakpoints.  The resulting envelope, as a function of ``p``,
inverts to the min-entropy bound; where trivial measurements beat it near
``p = 1`` the envelope is replaced by its tangent chord through the
classical point (upper concave bound).
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ._golden import golden_max
from .adversary import EpsilonPair
from .errors import DomainError, SearchError, ValidationError
from .witness import (
    classical_bound,
    max_guess_probability,
    quantum_bound,
    witness_bounds,
)

logger = logging.getLogger(__name__)

_EDGE_TOL = 1e-12
#: Interior breakpoints must be continuous to this tolerance (tested).
CONTINUITY_TOL = 1e-9


def guessing_angle(p: float) -> float:
    """Angle beta with cos(beta) = 2p - 1, the gap a pinned state keeps
    from its nearest measurement axis."""
    if not 0.5 <= p <= 1.0 + _EDGE_TOL:
        raise ValidationError(f"guessing probability must be in [1/2, 1], got {p!r}")
    return math.acos(min(1.0, 2.0 * p - 1.0))


def _beta_checked(p: float) -> float:
    beta = guessing_angle(p)
    if math.pi - 4.0 * beta < -_EDGE_TOL:
        raise ValidationError(
            f"guessing probability {p!r} admits no strategy geometry "
            "(angle range is empty)"
        )
    return beta


@dataclass(frozen=True)
class Breakpoints:
    """Clamping breakpoints partitioning the free angle's range.

    Outside [a1, a2] the two cross states are clamped against the first
    axis; outside [b1, b2] the aligned states are.  ``alpha_max`` is the
    right end of the admissible range.
    """

    a1: float
    a2: float
    b1: float
    b2: float
    alpha_max: float

    def knots(self) -> list[float]:
        """Sorted unique segment boundaries clipped to the range."""
        raw = [0.0, self.a1, self.b1, self.a2, self.b2, self.alpha_max]
        pts = sorted(min(max(x, 0.0), self.alpha_max) for x in raw)
        knots = [pts[0]]
        for x in pts[1:]:
            if x - knots[-1] > 1e-14:
                knots.append(x)
        return knots


def breakpoints(eps: EpsilonPair, p: float) -> Breakpoints:
    """Compute the branch breakpoints for a bias pair and guessing
    probability; refuses geometries outside the charted domain."""
    beta = _beta_checked(p)
    delta = eps.delta
    arg = delta * math.sin(beta)
    if arg > 1.0 + _EDGE_TOL:
        raise DomainError(
            f"delta * sin(beta) = {arg:.6g} > 1: clamping angle undefined "
            f"for eps=({eps.eps1}, {eps.eps2}), p={p}"
        )
    s = math.asin(min(1.0, arg))
    alpha_max = max(0.0, math.pi - 4.0 * beta)
    a1 = max(0.0, s - 3.0 * beta)
    a2 = math.pi - 3.0 * beta - s
    b1 = s - beta
    b2 = min(alpha_max, math.pi - s - beta)
    if b1 > a2 + _EDGE_TOL:
        raise DomainError(
            f"breakpoint ordering b1 <= a2 violated (b1={b1:.6g}, "
            f"a2={a2:.6g}) for eps=({eps.eps1}, {eps.eps2}), p={p}"
        )
    return Breakpoints(a1, a2, b1, b2, alpha_max)


def _check_alpha(alpha, alpha_max: float) -> None:
    arr = np.asarray(alpha, dtype=float)
    if np.any(arr < -_EDGE_TOL) or np.any(arr > alpha_max + 1e-9):
        raise ValidationError(
            f"alpha must lie in [0, {alpha_max:.6g}], got {alpha!r}"
        )


def _f_array(eps: EpsilonPair, beta: float, bp: Breakpoints,
             alphas: np.ndarray) -> np.ndarray:
    """First-case branch table, vectorized over the free angle."""
    d, sg = eps.delta, eps.sigma
    cb = math.cos(beta)
    c1 = np.cos(beta + alphas)
    c2 = np.cos(2.0 * beta + alphas)
    c3 = np.cos(3.0 * beta + alphas)
    plus = np.sqrt(np.maximum(0.0, d * d + 1.0 + 2.0 * d * c2))
    minus = np.sqrt(np.maximum(0.0, d * d + 1.0 - 2.0 * d * c2))
    outer = (alphas < bp.a1) | (alphas > bp.b2)
    seg2 = ~outer & (alphas < bp.b1)
    seg3 = ~outer & ~seg2 & (alphas < bp.a2)
    v_outer = (2.0 * d * sg + sg * sg * d) * cb + sg * sg * c1 - 2.0 * sg * c3
    v2 = sg * sg * d * cb + sg * sg * c1 + 2.0 * sg * minus
    v3 = sg * sg * plus + 2.0 * sg * minus
    v4 = sg * sg * plus + 2.0 * d * sg * cb - 2.0 * sg * c3
    return np.select([outer, seg2, seg3], [v_outer, v2, v3], default=v4)


def _g_array(eps: EpsilonPair, beta: float, bp: Breakpoints,
             alphas: np.ndarray) -> np.ndarray:
    """Second-case branch table, vectorized over the free angle."""
    d, sg = eps.delta, eps.sigma
    cb = math.cos(beta)
    c1 = np.cos(beta + alphas)
    c2 = np.cos(2.0 * beta + alphas)
    c3 = np.cos(3.0 * beta + alphas)
    plus = np.sqrt(np.maximum(0.0, d * d + 1.0 + 2.0 * d * c2))
    minus = np.sqrt(np.maximum(0.0, d * d + 1.0 - 2.0 * d * c2))
    outer = (alphas < bp.a1) | (alphas > bp.b2)
    seg2 = ~outer & (alphas < bp.b1)
    seg3 = ~outer & ~seg2 & (alphas < bp.a2)
    v_outer = (d * sg * cb + sg * c1
               + (sg * sg * d + d) * cb - (sg * sg + 1.0) * c3)
    v2 = d * sg * cb + sg * c1 + (sg * sg + 1.0) * minus
    v3 = sg * plus + (sg * sg + 1.0) * minus
    v4 = sg * plus + (sg * sg * d + d) * cb - (sg * sg + 1.0) * c3
    return np.select([outer, seg2, seg3], [v_outer, v2, v3], default=v4)


def _prefactor(eps: EpsilonPair) -> float:
    return 0.5 * (0.5 - eps.eps1) ** 2 * (0.5 - eps.eps2)


def _case_array(eps: EpsilonPair, p: float, alphas: np.ndarray,
                case: int) -> np.ndarray:
    beta = _beta_checked(p)
    bp = breakpoints(eps, p)
    _check_alpha(alphas, bp.alpha_max)
    d, sg = eps.delta, eps.sigma
    cb = math.cos(beta)
    c1 = np.cos(beta + alphas)
    if case == 1:
        pinned = d * cb + c1 + _f_array(eps, beta, bp, alphas)
    else:
        pinned = d * sg * cb + sg * c1 + _g_array(eps, beta, bp, alphas)
    return 0.5 + _prefactor(eps) * pinned


def _case_scalar(eps: EpsilonPair, beta: float, bp: Breakpoints,
                 alpha: float, case: int) -> float:
    """Scalar twin of :func:`_case_array` for tight refinement loops."""
    d, sg = eps.delta, eps.sigma
    cb = math.cos(beta)
    c1 = math.cos(beta + alpha)
    c2 = math.cos(2.0 * beta + alpha)
    c3 = math.cos(3.0 * beta + alpha)
    plus = math.sqrt(max(0.0, d * d + 1.0 + 2.0 * d * c2))
    minus = math.sqrt(max(0.0, d * d + 1.0 - 2.0 * d * c2))
    if case == 1:
        if alpha < bp.a1 or alpha > bp.b2:
            tail = ((2.0 * d * sg + sg * sg * d) * cb + sg * sg * c1
                    - 2.0 * sg * c3)
        elif alpha < bp.b1:
            tail = sg * sg * d * cb + sg * sg * c1 + 2.0 * sg * minus
        elif alpha < bp.a2:
            tail = sg * sg * plus + 2.0 * sg * minus
        else:
            tail = sg * sg * plus + 2.0 * d * sg * cb - 2.0 * sg * c3
        pinned = d * cb + c1 + tail
    else:
        if alpha < bp.a1 or alpha > bp.b2:
            tail = (d * sg * cb + sg * c1
                    + (sg * sg * d + d) * cb - (sg * sg + 1.0) * c3)
        elif alpha < bp.b1:
            tail = d * sg * cb + sg * c1 + (sg * sg + 1.0) * minus
        elif alpha < bp.a2:
            tail = sg * plus + (sg * sg + 1.0) * minus
        else:
            tail = sg * plus + (sg * sg * d + d) * cb - (sg * sg + 1.0) * c3
        pinned = d * sg * cb + sg * c1 + tail
    return 0.5 + _prefactor(eps) * pinned


def branch_f(eps: EpsilonPair, p: float, alpha: float) -> float:
    """Contribution of the three unpinned states in the first strategy
    case, selected by the breakpoint segment containing ``alpha``."""
    beta = _beta_checked(p)
    bp = breakpoints(eps, p)
    _check_alpha(alpha, bp.alpha_max)
    return float(_f_array(eps, beta, bp, np.asarray([alpha]))[0])


def branch_g(eps: EpsilonPair, p: float, alpha: float) -> float:
    """Unpinned-state contribution for the second strategy case."""
    beta = _beta_checked(p)
    bp = breakpoints(eps, p)
    _check_alpha(alpha, bp.alpha_max)
    return float(_g_array(eps, beta, bp, np.asarray([alpha]))[0])


def case_G1(eps: EpsilonPair, p: float, alpha: float) -> float:
    """Witness value when the likely-both-ones input carries the pinned
    guessing probability."""
    return float(_case_array(eps, p, np.asarray([alpha]), 1)[0])


def case_G2(eps: EpsilonPair, p: float, alpha: float) -> float:
    """Witness value when a mixed input carries the pinned guessing
    probability."""
    return float(_case_array(eps, p, np.asarray([alpha]), 2)[0])


def case_G3(eps: EpsilonPair, p: float, alpha: float) -> float:
    """Witness value when the doubly likely input carries the pin; equals
    the first case outside (b1, b2) and never exceeds it inside
    (verification-only)."""
    beta = _beta_checked(p)
    bp = breakpoints(eps, p)
    _check_alpha(alpha, bp.alpha_max)
    if alpha <= bp.b1 or alpha >= bp.b2:
        return case_G1(eps, p, alpha)
    d, sg = eps.delta, eps.sigma
    cb = math.cos(beta)
    c1 = math.cos(beta + alpha)
    c2 = math.cos(2.0 * beta + alpha)
    c3 = math.cos(3.0 * beta + alpha)
    plus = math.sqrt(max(0.0, d * d + 1.0 + 2.0 * d * c2))
    minus = math.sqrt(max(0.0, d * d + 1.0 - 2.0 * d * c2))
    if alpha < bp.a2:
        k_term = 2.0 * sg * minus
    else:
        k_term = 2.0 * d * sg * cb - 2.0 * sg * c3
    bracket = sg * sg * d * cb + plus + sg * sg * c1 + k_term
    return 0.5 + _prefactor(eps) * bracket


def _validate_guess_range(eps: EpsilonPair, p: float) -> float:
    p_floor = max_guess_probability(eps)
    if p < p_floor - 1e-9 or p > 1.0 + _EDGE_TOL:
        raise ValidationError(
            f"guessing probability must lie in [{p_floor:.12g}, 1], got {p!r}"
        )
    return min(p, 1.0)


def envelope_detail(eps: EpsilonPair, p: float, n_scan: int = 2048,
                    refine: bool = True) -> tuple[float, float, int]:
    """Maximize both strategy cases over the free angle.

    Dense scan (at least ``n_scan`` points split across the smooth
    segments, all breakpoints evaluated exactly) followed by golden-section
    refinement inside the winning grid cell of each segment.  Returns
    ``(value, best_alpha, case)``; ties resolve to the first case.
    ``refine=False`` skips the golden pass (cheap scans inside searches).
    """
    p = _validate_guess_range(eps, p)
    beta = _beta_checked(p)
    bp = breakpoints(eps, p)
    knots = bp.knots()
    best_value, best_alpha, best_case = -math.inf, 0.0, 1
    for case in (1, 2):
        def scalar(alpha: float, _case=case) -> float:
            return _case_scalar(eps, beta, bp, alpha, _case)

        if bp.alpha_max <= 1e-14:
            value, alpha_star = scalar(0.0), 0.0
        else:
            value, alpha_star = -math.inf, 0.0
            for lo, hi in zip(knots[:-1], knots[1:]):
                m = max(9, int(n_scan * (hi - lo) / bp.alpha_max))
                grid = np.linspace(lo, hi, m)
                vals = _case_array(eps, p, grid, case)
                j = int(np.argmax(vals))
                if vals[j] > value:
                    value, alpha_star = float(vals[j]), float(grid[j])
                if refine:
                    g_lo = grid[max(0, j - 1)]
                    g_hi = grid[min(m - 1, j + 1)]
                    x, fx = golden_max(scalar, float(g_lo), float(g_hi),
                                       iters=50)
                    if fx > value:
                        value, alpha_star = fx, x
        if value > best_value + 1e-15 or (case == 1 and value > best_value):
            best_value, best_alpha, best_case = value, alpha_star, case
    return best_value, best_alpha, best_case


def envelope_G(eps: EpsilonPair, p: float, n_scan: int = 2048,
               refine: bool = True) -> float:
    """Best witness value at fixed guessing probability ``p``."""
    return envelope_detail(eps, p, n_scan, refine=refine)[0]


def threshold_witness(eps: EpsilonPair) -> float:
    """Envelope value at p = 1: the witness level below which rank-1
    strategies certify nothing."""
    return envelope_G(eps, 1.0)


@dataclass(frozen=True)
class ConvexifiedBound:
    """Upper concave bound: the envelope below the tangent point, the
    chord through the classical point above it."""

    eps: EpsilonPair
    p0: float
    witness_at_p0: float
    classical: float

    def __call__(self, p: float) -> float:
        p = _validate_guess_range(self.eps, p)
        if p >= self.p0:
            frac = (1.0 - p) / (1.0 - self.p0)
            return self.classical + (self.witness_at_p0 - self.classical) * frac
        return envelope_G(self.eps, p)


def convexify_F(eps: EpsilonPair,
                n_scan: int = 4096) -> tuple[float, ConvexifiedBound]:
    """Find the tangent point p0 minimizing the chord slope
    (G(p) - E_c) / (p - 1) and return the chord-completed bound.

    Only meaningful when the p = 1 envelope value drops below the
    classical bound; otherwise the bound is the envelope itself and this
    raises.
    """
    e_c = classical_bound(eps)
    e_thr = threshold_witness(eps)
    if e_thr >= e_c:
        raise ValidationError(
            "bound is not convexified here (envelope at p=1 is "
            f"{e_thr:.12g} >= classical {e_c:.12g}); use envelope_G"
        )
    p_floor = max_guess_probability(eps)

    def ratio(p: float, scan_points: int = 256,
              refine: bool = False) -> float:
        g = envelope_G(eps, p, n_scan=scan_points, refine=refine)
        return (g - e_c) / (p - 1.0)

    grid = np.linspace(p_floor, 1.0 - 1e-7, n_scan)
    values = np.array([ratio(float(p)) for p in grid])
    if not np.all(np.isfinite(values)):
        raise SearchError("tangent-point scan produced non-finite ratios")
    j = int(np.argmin(values))
    if j == len(grid) - 1:
        raise SearchError(
            "tangent-point scan pushed against p = 1; the chord slope "
            "should diverge there — bound inputs are inconsistent"
        )
    if j == 0:
        p0 = float(grid[0])
    else:
        p0, _ = golden_max(
            lambda p: -ratio(p, scan_points=2048, refine=True),
            float(grid[j - 1]), float(grid[j + 1]), iters=60,
        )
    g_p0 = envelope_G(eps, p0)
    return p0, ConvexifiedBound(eps, p0, g_p0, e_c)


@dataclass(frozen=True)
class TradeoffPoint:
    """One sampled point of the tradeoff curve."""

    E: float
    p: float
    H: float
    beta: float
    case: int = 0            # 0 marks the chord region
    alpha_star: float = math.nan


@dataclass(frozen=True)
class TradeoffCurve:
    """The witness-vs-randomness curve for one feasible bias pair.

    ``E_of_p`` evaluates the inverse bound directly; ``H_of_E`` inverts it
    by bisection, returning exactly zero at or below the left edge.
    """

    eps: EpsilonPair
    E_l: float
    E_threshold: float
    E_q: float
    E_c: float
    p_min: float
    convexified: bool
    p0: float | None
    samples: tuple[TradeoffPoint, ...] = field(repr=False)
    _bound: ConvexifiedBound | None = field(default=None, repr=False)

    def E_of_p(self, p: float) -> float:
        if self.convexified:
            assert self._bound is not None
            return self._bound(p)
        return envelope_G(self.eps, p)

    def p_of_E(self, E: float) -> float:
        if E > self.E_q + 1e-9:
            raise DomainError(
                f"witness value {E!r} exceeds the quantum bound {self.E_q:.12g}"
            )
        if E <= self.E_l:
            return 1.0
        lo, hi = self.p_min, 1.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if self.E_of_p(mid) >= E:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def H_of_E(self, E: float) -> float:
        if E <= self.E_l:
            return 0.0
        return -math.log2(self.p_of_E(E))


def curve(eps: EpsilonPair, n_points: int = 129) -> TradeoffCurve:
    """Sample the full tradeoff curve on Chebyshev-spaced guessing
    probabilities (dense near both ends, where the curve is steepest)."""
    if n_points < 2:
        raise ValidationError("need at least 2 curve points")
    wb = witness_bounds(eps)
    if not wb.feasible:
        raise DomainError(
            f"bias pair ({eps.eps1}, {eps.eps2}) is infeasible; "
            "no randomness tradeoff exists"
        )
    e_q, _ = quantum_bound(eps)
    e_c = classical_bound(eps)
    e_thr = threshold_witness(eps)
    e_l = max(e_c, e_thr)
    convexified = e_thr < e_c
    p0 = None
    bound = None
    if convexified:
        p0, bound = convexify_F(eps)
    p_floor = wb.p_min
    assert p_floor is not None
    mid = 0.5 * (p_floor + 1.0)
    half = 0.5 * (1.0 - p_floor)
    points = []
    for j in range(n_points):
        p = mid - half * math.cos(math.pi * j / (n_points - 1))
        p = min(max(p, p_floor), 1.0)
        try:
            if convexified and p >= p0:
                assert bound is not None
                e_val = bound(p)
                case, alpha_star = 0, math.nan
            else:
                e_val, alpha_star, case = envelope_detail(eps, p)
        except DomainError as err:
            logger.warning("skipping curve sample at p=%.12g: %s", p, err)
            continue
        points.append(TradeoffPoint(
            E=e_val, p=p, H=(-math.log2(p)) + 0.0, beta=guessing_angle(p),
            case=case, alpha_star=alpha_star,
        ))
    points.sort(key=lambda pt: pt.E)
    return TradeoffCurve(
        eps=eps, E_l=e_l, E_threshold=e_thr, E_q=e_q, E_c=e_c,
        p_min=p_floor, convexified=convexified, p0=p0,
        samples=tuple(points), _bound=bound,
    )


def curve_header_json(c: TradeoffCurve) -> str:
    """One-line JSON header carried with the curve CSV."""
    payload = {
        "eps1": c.eps.eps1,
        "eps2": c.eps.eps2,
        "E_l": float(format(c.E_l, ".12g")),
        "E_threshold": float(format(c.E_threshold, ".12g")),
        "E_q": float(format(c.E_q, ".12g")),
        "p0": None if c.p0 is None else float(format(c.p0, ".12g")),
        "convexified": c.convexified,
    }
    return json.dumps(payload, sort_keys=True)


def curve_to_csv(c: TradeoffCurve, include_header: bool = True) -> str:
    """CSV body E,p,H,case,alpha_star, preceded by the JSON header line."""
    lines = []
    if include_header:
        lines.append("# " + curve_header_json(c))
    lines.append("E,p,H,case,alpha_star")
    for pt in c.samples:
        lines.append(",".join([
            format(pt.E, ".12g"),
            format(pt.p, ".12g"),
            format(pt.H, ".12g"),
            str(pt.case),
            format(pt.alpha_star, ".12g"),
        ]))
    return "\n".join(lines) + "\n"


def threshold_crossover_root(lo: float = 0.02, hi: float = 0.135,
                             iters: int = 60) -> float:
    """Diagonal bias at which the p = 1 envelope value meets the classical
    bound; beyond it trivial measurements force the chord construction."""
    def gap(e: float) -> float:
        pair = EpsilonPair(e, e)
        return threshold_witness(pair) - classical_bound(pair)

    if gap(lo) <= 0.0 or gap(hi) >= 0.0:
        raise SearchError(
            f"crossover not bracketed on [{lo}, {hi}]"
        )
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
