"""Closed-form classical and quantum success bounds, optimal strategies,
certified randomness at maximal violation, and the feasible bias region."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .adversary import EpsilonPair, HiddenVariableContext, LambdaDistribution
from .bloch import BlochVector, Measurement, born_probability, effective_vector
from .errors import BranchError, SearchError, ValidationError

#: Branch labels for the two bias regimes of the quantum optimum.
BRANCH_LOW = "t<=1"
BRANCH_HIGH = "t>1"

#: A pair strictly on a feasibility boundary counts as infeasible.
FEASIBILITY_TOL = 1e-12

_BIT_PAIRS = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class Strategy:
    """Encoding-decoding strategy for one hidden-variable setting: a pure
    state per 2-bit input (indexed ``2*a0 + a1``) and two binary
    measurements."""

    states: tuple[BlochVector, BlochVector, BlochVector, BlochVector]
    measurements: tuple[Measurement, Measurement]

    def __post_init__(self):
        if len(self.states) != 4 or len(self.measurements) != 2:
            raise ValidationError("a strategy has 4 states and 2 measurements")
        for r in self.states:
            if not r.is_unit():
                raise ValidationError(
                    f"state {r} has norm {r.norm():.17g}, not 1"
                )

    def state_for(self, a0: int, a1: int) -> BlochVector:
        return self.states[2 * a0 + a1]

    def prob_zero_table(self) -> np.ndarray:
        """P(b = 0 | a0, a1, y) as a (2, 2, 2) array."""
        table = np.empty((2, 2, 2))
        for a0, a1 in _BIT_PAIRS:
            for y in (0, 1):
                table[a0, a1, y] = born_probability(
                    self.state_for(a0, a1), self.measurements[y], 0
                )
        return table


def expected_success(strategy: Strategy, ctx: HiddenVariableContext) -> float:
    """Success probability of the strategy under one hidden-variable
    setting: the chance that the reported bit matches the queried one."""
    total = 0.0
    for a0, a1 in _BIT_PAIRS:
        for y in (0, 1):
            ay = a0 if y == 0 else a1
            p_in = (ctx.p_bit_zero(0) if a0 == 0 else 1 - ctx.p_bit_zero(0)) \
                * (ctx.p_bit_zero(1) if a1 == 0 else 1 - ctx.p_bit_zero(1)) \
                * (ctx.p_question_zero() if y == 0
                   else 1 - ctx.p_question_zero())
            total += p_in * born_probability(
                strategy.state_for(a0, a1), strategy.measurements[y], ay
            )
    return total


def strategy_max_outcome(strategy: Strategy) -> float:
    """Largest of the 16 outcome probabilities P(b | a, y)."""
    best = 0.0
    for a0, a1 in _BIT_PAIRS:
        for y in (0, 1):
            for b in (0, 1):
                best = max(best, born_probability(
                    strategy.state_for(a0, a1), strategy.measurements[y], b
                ))
    return best


def classical_bound(eps: EpsilonPair) -> float:
    """Best success probability with classical (deterministic) encodings:
    3/4 + (eps1 + eps2)/2 - eps1*eps2."""
    return 0.75 + 0.5 * (eps.eps1 + eps.eps2) - eps.eps1 * eps.eps2


def aligned_measurement_value(eps: EpsilonPair) -> float:
    """Best success probability when both measurement axes coincide (the
    optimum once t > 1): 3/4 + eps2/2 + eps1^2 (1 - 2 eps2).  Never exceeds
    the classical bound; equal to it only at eps1 = 0."""
    e1, e2 = eps.eps1, eps.eps2
    return 0.75 + 0.5 * e2 + e1**2 * (1.0 - 2.0 * e2)


def quantum_bound(eps: EpsilonPair) -> tuple[float, str]:
    """Best quantum success probability and the bias branch it came from.

    Below the measurement-angle cap (t <= 1) the optimum separates the two
    measurement axes by arccos(t); above it the axes coincide and the bound
    drops to a value never exceeding the classical one.
    """
    e1, e2 = eps.eps1, eps.eps2
    if eps.t <= 1.0:
        value = 0.5 + 0.5 * math.sqrt(
            0.5 + 8.0 * e1**4 + 2.0 * e2**2 + 32.0 * e1**4 * e2**2
        )
        return value, BRANCH_LOW
    return aligned_measurement_value(eps), BRANCH_HIGH


def max_guess_probability(eps: EpsilonPair) -> float:
    """Largest outcome probability under the optimal strategy (t <= 1):
    (1 + (t + delta) / sqrt(delta^2 + 2 t delta + 1)) / 2."""
    t = eps.t
    if t > 1.0:
        raise BranchError(
            f"the guessing-probability closed form needs t <= 1; t = {t:.6g}"
        )
    d = eps.delta
    return 0.5 * (1.0 + (t + d) / math.sqrt(d * d + 2.0 * t * d + 1.0))


def min_entropy_at_max_violation(eps: EpsilonPair) -> float:
    """Certified min-entropy (bits) when the witness sits at the quantum
    optimum; equals -log2 of the maximal guessing probability."""
    t = eps.t
    if t > 1.0:
        raise BranchError(
            f"the min-entropy closed form needs t <= 1; t = {t:.6g}"
        )
    d = eps.delta
    return 1.0 - math.log2(1.0 + (t + d) / math.sqrt(d * d + 2.0 * t * d + 1.0))


def optimal_strategy(eps: EpsilonPair, k: int) -> Strategy:
    """The maximizing strategy for hidden-variable setting ``k``.

    The first axis is pinned to (1, 0, 0); the second is separated by
    arccos(t) when t <= 1 and aligned when t > 1, with its x-sign matched
    to the parity of the two bit-bias signs so that the large effective
    vectors carry the likely inputs.  Each state points along its
    effective vector.
    """
    ctx = HiddenVariableContext(k, eps)
    t = eps.t
    v0 = BlochVector(1.0, 0.0, 0.0)
    sign = (-1.0) ** (ctx.k0 + ctx.k1)
    if t <= 1.0:
        v1 = BlochVector(sign * t, math.sqrt(max(0.0, 1.0 - t * t)), 0.0)
    else:
        v1 = BlochVector(sign, 0.0, 0.0)
    states = []
    for a0, a1 in _BIT_PAIRS:
        va = effective_vector((a0, a1), ctx.k2, eps.eps2, v0, v1)
        n = va.norm()
        # zero norm needs eps2 = 0 together with t = 1, i.e. eps1 = 1/2,
        # which EpsilonPair already excludes
        assert n > 0.0, "degenerate effective vector on the open domain"
        states.append(va.scaled(1.0 / n))
    return Strategy(tuple(states), (Measurement.rank1(v0),
                                    Measurement.rank1(v1)))


def combine_over_lambda(dist: LambdaDistribution, per_lambda_E) -> float:
    """Convex combination of per-setting success probabilities."""
    values = np.asarray(list(per_lambda_E), dtype=float)
    if values.shape != (8,):
        raise ValidationError("expected one success value per setting (8)")
    return float(dist.as_array() @ values)


@dataclass(frozen=True)
class WitnessBounds:
    """Everything decided by a bias pair: both bounds, the branch, the
    guessing probability and min-entropy at maximal violation (absent on
    the t > 1 branch), and the feasibility verdict."""

    eps: EpsilonPair
    E_c: float
    E_q: float
    branch: str
    p_min: float | None
    H_at_Eq: float | None
    feasible: bool


def witness_bounds(eps: EpsilonPair) -> WitnessBounds:
    """Assemble the closed-form bounds and the feasibility verdict."""
    e_c = classical_bound(eps)
    e_q, branch = quantum_bound(eps)
    if branch == BRANCH_LOW:
        p_min = max_guess_probability(eps)
        h = min_entropy_at_max_violation(eps)
    else:
        p_min = None
        h = None
    feasible = (
        branch == BRANCH_LOW
        and e_q - e_c > FEASIBILITY_TOL
        and h is not None
        and h > FEASIBILITY_TOL
    )
    return WitnessBounds(eps, e_c, e_q, branch, p_min, h, feasible)


def is_feasible(eps: EpsilonPair) -> bool:
    return witness_bounds(eps).feasible


@dataclass(frozen=True)
class RegionRow:
    eps1: float
    eps2: float
    feasible: bool
    E_c: float
    E_q: float
    H_at_Eq: float   # nan when the t > 1 branch leaves it undefined


def feasibility_region(resolution: int, eps_max: float) -> list[RegionRow]:
    """Evaluate feasibility on a uniform grid over [0, eps_max]^2.

    Biases must stay below 1/2, so for eps_max >= 0.5 the grid is sampled
    half-open (endpoint excluded).
    """
    if resolution < 2:
        raise ValidationError("grid resolution must be at least 2")
    if not 0.0 < eps_max <= 0.5:
        raise ValidationError("eps_max must lie in (0, 0.5]")
    endpoint = eps_max < 0.5
    axis = np.linspace(0.0, eps_max, resolution, endpoint=endpoint)
    rows = []
    for e1 in axis:
        for e2 in axis:
            wb = witness_bounds(EpsilonPair(float(e1), float(e2)))
            rows.append(RegionRow(
                float(e1), float(e2), wb.feasible, wb.E_c, wb.E_q,
                wb.H_at_Eq if wb.H_at_Eq is not None else math.nan,
            ))
    return rows


def region_to_csv(rows: list[RegionRow]) -> str:
    """CSV body with header eps1,eps2,feasible,E_c,E_q,H_at_Eq."""
    lines = ["eps1,eps2,feasible,E_c,E_q,H_at_Eq"]
    for r in rows:
        lines.append(",".join([
            format(r.eps1, ".12g"),
            format(r.eps2, ".12g"),
            "true" if r.feasible else "false",
            format(r.E_c, ".12g"),
            format(r.E_q, ".12g"),
            format(r.H_at_Eq, ".12g"),
        ]))
    return "\n".join(lines) + "\n"


def feasibility_boundary_root(direction: tuple[float, float],
                              s_max: float | None = None,
                              iters: int = 60) -> float:
    """Bisect the sign of (quantum - classical bound) along a ray from the
    origin; returns the scale of the crossing point.

    The direction is normalized so its largest component is 1, making the
    returned scale the boundary coordinate along the dominant axis.
    """
    d1, d2 = direction
    big = max(abs(d1), abs(d2))
    if big <= 0:
        raise ValidationError("direction must be nonzero")
    d1, d2 = d1 / big, d2 / big
    hi = 0.4999 if s_max is None else s_max

    def gap(s: float) -> float:
        e_q, _ = quantum_bound(EpsilonPair(s * d1, s * d2))
        return e_q - classical_bound(EpsilonPair(s * d1, s * d2))

    lo = 0.0
    if gap(lo) <= 0.0 or gap(hi) >= 0.0:
        raise SearchError(
            f"no sign change of E_q - E_c along direction ({d1}, {d2}) "
            f"on [0, {hi}]"
        )
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def trivial_measurement_optimum(eps: EpsilonPair, k: int) -> float:
    """Best success probability once one measurement is trivial and the
    states plus the other measurement are chosen optimally.

    The answering box then ignores the state on the trivial slot, so the
    best play answers the other question perfectly and guesses the biased
    value on the trivial one; the optimum over the four trivial corners
    equals the classical bound.
    """
    ctx = HiddenVariableContext(k, eps)
    py0 = ctx.p_question_zero()
    best = 0.0
    for slot in (0, 1):
        p_slot = py0 if slot == 0 else 1.0 - py0
        for fixed_outcome in (0, 1):
            p_bit = ctx.p_bit_zero(slot)
            p_match = p_bit if fixed_outcome == 0 else 1.0 - p_bit
            best = max(best, (1.0 - p_slot) + p_slot * p_match)
    return best
