"""Biased input sources and the eight-point hidden-variable attack model.

The eavesdropper fixes, per hidden variable, the sign of each source bias
at its allowed extreme, and mixes the eight settings so that the observed
joint input distribution stays uniform.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .bloch import _parse_bit_pair
from .errors import ValidationError

BALANCE_TOL = 1e-12

#: Sign rows of the balance constraints: for each input bit, the weighted
#: sum of (-1)^{k_bit} over the eight hidden variables must vanish.
_SIGN_ROWS = np.array(
    [[(-1.0) ** ((k >> shift) & 1) for k in range(8)] for shift in (2, 1, 0)]
)


@dataclass(frozen=True)
class EpsilonPair:
    """The two source biases, each in [0, 1/2).

    eps1 biases the encoder's two input bits, eps2 the measurement choice.
    """

    eps1: float
    eps2: float

    def __post_init__(self):
        for name, value in (("eps1", self.eps1), ("eps2", self.eps2)):
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise ValidationError(f"{name} must be a finite number")
            if not 0.0 <= value < 0.5:
                raise ValidationError(
                    f"{name} must lie in [0, 0.5), got {value!r}"
                )

    @property
    def t(self) -> float:
        """Cosine of the optimal angle between the two measurement axes
        (before capping at 1); nonnegative on the whole domain."""
        e1, e2 = self.eps1, self.eps2
        num = 8.0 * e1**2 * (1.0 + 4.0 * e2**2)
        den = 1.0 + 16.0 * e1**4 - 4.0 * e2**2 - 64.0 * e1**4 * e2**2
        return num / den

    @property
    def delta(self) -> float:
        """Odds ratio of the measurement-choice bias, >= 1."""
        return (1.0 + 2.0 * self.eps2) / (1.0 - 2.0 * self.eps2)

    @property
    def sigma(self) -> float:
        """Odds ratio of the encoder-bit bias, >= 1."""
        return (1.0 + 2.0 * self.eps1) / (1.0 - 2.0 * self.eps1)


@dataclass(frozen=True)
class HiddenVariableContext:
    """One of the eight adversary settings ``k``, bits ``k0 k1 k2``.

    Bit ``k_i`` fixes the sign of the bias on encoder bit ``i`` and ``k2``
    the sign on the measurement choice:
    ``P(a_i = 0 | k) = 1/2 + (-1)^{k_i} eps1`` and
    ``P(y = 0 | k) = 1/2 + (-1)^{k2} eps2``.
    """

    k: int
    eps: EpsilonPair

    def __post_init__(self):
        if self.k not in range(8):
            raise ValidationError(f"k must be in 0..7, got {self.k!r}")

    @property
    def k0(self) -> int:
        return (self.k >> 2) & 1

    @property
    def k1(self) -> int:
        return (self.k >> 1) & 1

    @property
    def k2(self) -> int:
        return self.k & 1

    def p_bit_zero(self, i: int) -> float:
        """P(a_i = 0) under this setting."""
        if i not in (0, 1):
            raise ValidationError(f"bit index must be 0 or 1, got {i!r}")
        ki = self.k0 if i == 0 else self.k1
        return 0.5 + (-1.0) ** ki * self.eps.eps1

    def p_question_zero(self) -> float:
        """P(y = 0) under this setting."""
        return 0.5 + (-1.0) ** self.k2 * self.eps.eps2

    def input_distribution(self) -> np.ndarray:
        """Joint P(a0, a1, y) as a (2, 2, 2) array."""
        p0 = self.p_bit_zero(0)
        p1 = self.p_bit_zero(1)
        py = self.p_question_zero()
        pa0 = np.array([p0, 1.0 - p0])
        pa1 = np.array([p1, 1.0 - p1])
        pyv = np.array([py, 1.0 - py])
        return pa0[:, None, None] * pa1[None, :, None] * pyv[None, None, :]


def conditional_input_probs(ctx: HiddenVariableContext, a, y: int) -> float:
    """Joint probability P(a, y | k): the bits are independent, each biased
    per the context's sign pattern."""
    a0, a1 = _parse_bit_pair(a)
    if y not in (0, 1):
        raise ValidationError(f"y must be a bit, got {y!r}")
    p0 = ctx.p_bit_zero(0)
    p1 = ctx.p_bit_zero(1)
    py = ctx.p_question_zero()
    return ((p0 if a0 == 0 else 1.0 - p0)
            * (p1 if a1 == 0 else 1.0 - p1)
            * (py if y == 0 else 1.0 - py))


@dataclass(frozen=True)
class LambdaDistribution:
    """Adversary mixture over the eight hidden variables.

    Valid distributions are nonnegative, sum to one, and balance each bit
    of ``k`` (equal mass on both sign choices), which is exactly what keeps
    the observed joint input distribution uniform at 1/8.
    """

    weights: tuple[float, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (8,):
            raise ValidationError("a distribution needs exactly 8 weights")
        if np.any(w < -BALANCE_TOL):
            raise ValidationError(f"negative weight in {self.weights}")
        if abs(w.sum() - 1.0) > BALANCE_TOL:
            raise ValidationError(f"weights sum to {w.sum():.17g}, not 1")
        residual = _SIGN_ROWS @ w
        if np.max(np.abs(residual)) > BALANCE_TOL:
            raise ValidationError(
                "weights break the uniform-marginal balance; residuals "
                f"{residual.tolist()}"
            )
        object.__setattr__(self, "weights", tuple(float(x) for x in w))

    @classmethod
    def uniform(cls) -> "LambdaDistribution":
        return cls((0.125,) * 8)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    def to_json(self) -> str:
        return json.dumps(list(self.weights))

    @classmethod
    def from_json(cls, text: str) -> "LambdaDistribution":
        data = json.loads(text)
        if not isinstance(data, list):
            raise ValidationError("expected a JSON array of 8 numbers")
        return cls(tuple(float(x) for x in data))


def solve_lambda_distribution(mode: str = "uniform",
                              seed: int | None = None) -> LambdaDistribution:
    """Produce a distribution satisfying the balance constraints.

    ``uniform`` returns (1/8, ..., 1/8).  ``parametrized`` samples the
    solution polytope: draw a Dirichlet point, project it onto the affine
    subspace fixed by the constraints (the constraint rows are mutually
    orthogonal, so the projection is a closed form), and reject draws that
    leave the nonnegative orthant.
    """
    if mode == "uniform":
        return LambdaDistribution.uniform()
    if mode != "parametrized":
        raise ValidationError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(0 if seed is None else seed)
    ones = np.ones(8)
    for _ in range(10_000):
        w = rng.dirichlet(ones)
        w = w - (w.sum() - 1.0) * ones / 8.0
        for row in _SIGN_ROWS:
            w = w - (row @ w) * row / 8.0
        if np.all(w >= 0.0):
            w = np.maximum(w, 0.0)
            return LambdaDistribution(tuple(w / w.sum()))
    raise ValidationError("polytope sampling failed after 10000 draws")


@dataclass(frozen=True)
class MarginalReport:
    """Deviation report for a candidate adversary mixture.

    ``bias_deviations`` holds the observed shift of each single-input
    marginal from 1/2: the three balance constraints make exactly these
    vanish.  ``joint_deviations`` holds |P(a, y) - 1/8| for the eight
    joint cells; balancing the marginals does not kill the pair and
    triple correlations a non-uniform mixture induces, so these can stay
    nonzero for balanced mixtures (only the uniform mixture zeroes all
    eight).  ``context_bias_deviation`` is how far the per-setting
    conditionals stray from the declared bias magnitudes.
    """

    context_bias_deviation: float
    bias_deviations: tuple[float, float, float]
    joint_deviations: tuple[float, ...]
    max_deviation: float
    balanced: bool
    joint_uniform: bool


def validate_marginals(dist, eps: EpsilonPair,
                       tol: float = BALANCE_TOL) -> MarginalReport:
    """Check what a mixture hides and what it leaks.

    Accepts a LambdaDistribution or any sequence of 8 nonnegative weights
    (so that broken candidates can be diagnosed rather than rejected at
    construction).  Reports deviations; never raises on imbalance.
    """
    w = dist.as_array() if isinstance(dist, LambdaDistribution) else \
        np.asarray(list(dist), dtype=float)
    if w.shape != (8,):
        raise ValidationError("a distribution needs exactly 8 weights")
    contexts = [HiddenVariableContext(k, eps) for k in range(8)]
    ctx_dev = 0.0
    for ctx in contexts:
        for i in (0, 1):
            ctx_dev = max(ctx_dev,
                          abs(abs(ctx.p_bit_zero(i) - 0.5) - eps.eps1))
        ctx_dev = max(ctx_dev,
                      abs(abs(ctx.p_question_zero() - 0.5) - eps.eps2))
    joint = np.zeros((2, 2, 2))
    for k, ctx in enumerate(contexts):
        joint += w[k] * ctx.input_distribution()
    joint_dev = np.abs(joint - 0.125).reshape(-1)
    p_a0 = sum(w[k] * ctx.p_bit_zero(0) for k, ctx in enumerate(contexts))
    p_a1 = sum(w[k] * ctx.p_bit_zero(1) for k, ctx in enumerate(contexts))
    p_y = sum(w[k] * ctx.p_question_zero() for k, ctx in enumerate(contexts))
    bias_dev = (abs(p_a0 - 0.5), abs(p_a1 - 0.5), abs(p_y - 0.5))
    max_dev = max(float(joint_dev.max()), *bias_dev, ctx_dev)
    return MarginalReport(
        context_bias_deviation=ctx_dev,
        bias_deviations=bias_dev,
        joint_deviations=tuple(float(x) for x in joint_dev),
        max_deviation=max_dev,
        balanced=max(bias_dev) <= tol and ctx_dev <= tol,
        joint_uniform=float(joint_dev.max()) <= tol,
    )
