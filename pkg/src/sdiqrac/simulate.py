"""Monte Carlo execution of the prepare-and-measure rounds.

The simulator is transparent about the hidden variable (it records which
setting produced each round) because the per-setting conditional maxima
that bound the extractable randomness are unobservable otherwise; an
observer view that strips the hidden variable is available for exports.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .adversary import EpsilonPair, HiddenVariableContext, LambdaDistribution
from .errors import ValidationError
from .witness import Strategy, optimal_strategy

_BLOCK = 1 << 20
#: Full per-round logs are refused above this many rounds unless forced.
MAX_LOGGED_TRIALS = 10_000_000


@dataclass(frozen=True)
class TrialRecord:
    """One protocol round as seen with hidden-variable transparency."""

    lambda_k: int
    a: str
    y: int
    b: int


@dataclass
class SimulationSummary:
    """Streaming aggregate of simulated rounds.

    ``counts[k, a0, a1, y, b]`` holds exact integer cell counts; merging
    two summaries is plain addition, so block-parallel runs combine in any
    order.  ``trial_log`` is populated only when requested.
    """

    trials: int
    success_count: int
    counts: np.ndarray
    trial_log: np.ndarray | None = field(default=None, repr=False)

    @property
    def E_hat(self) -> float:
        if self.trials == 0:
            return math.nan
        return self.success_count / self.trials

    @property
    def std_err(self) -> float:
        if self.trials == 0:
            return math.nan
        e = self.E_hat
        return math.sqrt(max(e * (1.0 - e), 0.0) / self.trials)

    @property
    def joint_counts(self) -> np.ndarray:
        """(a0, a1, y) histogram, hidden variable and outcome traced out."""
        return self.counts.sum(axis=(0, 4))

    @property
    def lambda_counts(self) -> np.ndarray:
        return self.counts.sum(axis=(1, 2, 3, 4))

    def merge(self, other: "SimulationSummary") -> "SimulationSummary":
        log = None
        if self.trial_log is not None and other.trial_log is not None:
            log = np.concatenate([self.trial_log, other.trial_log])
        return SimulationSummary(
            trials=self.trials + other.trials,
            success_count=self.success_count + other.success_count,
            counts=self.counts + other.counts,
            trial_log=log,
        )

    def records(self):
        """Iterate the retained rounds as TrialRecord values."""
        if self.trial_log is None:
            raise ValidationError("run() was not asked to keep a trial log")
        for k, a0, a1, y, b in self.trial_log:
            yield TrialRecord(int(k), f"{a0}{a1}", int(y), int(b))

    def to_json_dict(self, observer_view: bool = False) -> dict:
        """Summary as plain data; the observer view hides everything the
        hidden variable indexes."""
        out = {
            "trials": int(self.trials),
            "E_hat": self.E_hat,
            "std_err": self.std_err,
            "joint_counts": self.joint_counts.astype(int).tolist(),
        }
        if not observer_view:
            out["lambda_counts"] = self.lambda_counts.astype(int).tolist()
            out["counts"] = self.counts.astype(int).tolist()
        return out

    def to_json(self, indent: int | None = None,
                observer_view: bool = False) -> str:
        return json.dumps(self.to_json_dict(observer_view), indent=indent,
                          sort_keys=True)


def trial_log_to_csv(summary: SimulationSummary) -> str:
    """CSV body lambda,a0,a1,y,b of the retained rounds."""
    if summary.trial_log is None:
        raise ValidationError("run() was not asked to keep a trial log")
    lines = ["lambda,a0,a1,y,b"]
    for row in summary.trial_log:
        lines.append(",".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"


def _resolve_strategies(eps: EpsilonPair, strategy) -> list[Strategy]:
    if isinstance(strategy, str):
        if strategy != "optimal":
            raise ValidationError(
                f"unknown strategy spec {strategy!r}; use 'optimal', one "
                "Strategy, or a sequence of 8"
            )
        return [optimal_strategy(eps, k) for k in range(8)]
    if isinstance(strategy, Strategy):
        return [strategy] * 8
    strategies = list(strategy)
    if len(strategies) != 8 or not all(isinstance(s, Strategy)
                                       for s in strategies):
        raise ValidationError("expected one strategy per hidden variable (8)")
    return strategies


def run(eps: EpsilonPair, dist: LambdaDistribution, strategy="optimal",
        trials: int = 1_000_000, seed: int = 0,
        log_trials: bool = False) -> SimulationSummary:
    """Simulate protocol rounds and aggregate them.

    Per round: draw the hidden setting from ``dist``, the inputs from the
    setting's biased conditionals, and the outcome from the strategy's
    response distribution.  ``strategy`` is ``"optimal"`` (per-setting
    optima), a single Strategy applied to every setting (a device that
    cannot see the hidden variable), or a sequence of eight.
    Blocks are independently seeded, so summaries merge exactly.
    """
    if trials < 1:
        raise ValidationError("need at least one trial")
    if log_trials and trials > MAX_LOGGED_TRIALS:
        raise ValidationError(
            f"refusing to retain more than {MAX_LOGGED_TRIALS} rounds; "
            "run without log_trials"
        )
    strategies = _resolve_strategies(eps, strategy)
    prob_b0 = np.stack([s.prob_zero_table() for s in strategies])  # (8,2,2,2)
    contexts = [HiddenVariableContext(k, eps) for k in range(8)]
    p_a0 = np.array([c.p_bit_zero(0) for c in contexts])
    p_a1 = np.array([c.p_bit_zero(1) for c in contexts])
    p_y0 = np.array([c.p_question_zero() for c in contexts])
    cum = np.cumsum(dist.as_array())

    n_blocks = (trials + _BLOCK - 1) // _BLOCK
    seeds = np.random.SeedSequence(seed).spawn(n_blocks)
    total = SimulationSummary(0, 0, np.zeros((8, 2, 2, 2, 2), dtype=np.int64),
                              trial_log=np.empty((0, 5), dtype=np.int8)
                              if log_trials else None)
    done = 0
    for block_seed in seeds:
        n = min(_BLOCK, trials - done)
        done += n
        rng = np.random.default_rng(block_seed)
        lam = np.searchsorted(cum, rng.random(n), side="right")
        lam = np.minimum(lam, 7)
        a0 = (rng.random(n) >= p_a0[lam]).astype(np.int8)
        a1 = (rng.random(n) >= p_a1[lam]).astype(np.int8)
        y = (rng.random(n) >= p_y0[lam]).astype(np.int8)
        b = (rng.random(n) >= prob_b0[lam, a0, a1, y]).astype(np.int8)
        ay = np.where(y == 0, a0, a1)
        counts = np.zeros((8, 2, 2, 2, 2), dtype=np.int64)
        np.add.at(counts, (lam, a0, a1, y, b), 1)
        block = SimulationSummary(
            trials=n,
            success_count=int(np.count_nonzero(b == ay)),
            counts=counts,
            trial_log=np.stack(
                [lam.astype(np.int8), a0, a1, y, b], axis=1)
            if log_trials else None,
        )
        total = total.merge(block)
    return total


def empirical_min_entropy(summary: SimulationSummary,
                          dist: LambdaDistribution) -> float:
    """Estimate the certified randomness from per-setting conditional
    frequencies: -log2 of the mixture of per-setting maximal outcome
    frequencies.

    Undefined (NaN, with a warning naming the holes) while any conditional
    cell of a weighted setting is still empty.
    """
    if summary.trials == 0:
        warnings.warn("no trials recorded; min-entropy undefined")
        return math.nan
    weights = dist.as_array()
    mixture = 0.0
    missing = []
    for k in range(8):
        if weights[k] == 0.0:
            continue
        cell = summary.counts[k]          # (a0, a1, y, b)
        n_ay = cell.sum(axis=3)
        if np.any(n_ay == 0):
            holes = [(int(a0), int(a1), int(y))
                     for a0, a1, y in zip(*np.nonzero(n_ay == 0))]
            missing.append((k, holes))
            continue
        cond = cell / n_ay[..., None]
        mixture += weights[k] * float(cond.max())
    if missing:
        warnings.warn(
            "min-entropy undefined: no samples for (setting, input) cells "
            + "; ".join(f"k={k}: {holes}" for k, holes in missing)
        )
        return math.nan
    return -math.log2(mixture)
