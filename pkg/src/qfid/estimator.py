"""Adaptive measurement loop: batch sizing, CI tracking, early stopping.

Each shot contributes one scalar value; the running mean is the fidelity
estimate.  Two value semantics are available:

* ``success`` (default): 1 if the outcome falls in the high-probability set
  S = {x : p_ideal(x) >= tau * max p_ideal} with tau = 0.5, else 0.  The
  mean is then the probability of an ideal-typical outcome, a natural
  fidelity proxy for deterministic-answer circuits.
* ``xeb``: the normalized linear cross-entropy value, suited to scrambled
  circuits; per-shot values are mapped through
  (2^n * p_ideal(x) - 1) / (2^n * sum p^2 - 1) so mean, deviation and CI
  share one linear scale.

Sampling stops once z_alpha * sigma / sqrt(|T|) <= delta (after a minimum
number of batches), or when the shot cap is reached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .simulator import DistributionOracle, OutcomeDistribution

SUCCESS_THRESHOLD = 0.5  # tau: fraction of the ideal max that still counts


class EstimationError(ValueError):
    pass


class UniformIdeal(EstimationError):
    """XEB normalization is undefined for a uniform ideal distribution."""


class DomainError(EstimationError):
    pass


class DimensionMismatch(EstimationError):
    pass


@dataclass
class PlanConfig:
    delta: float = 0.01
    alpha: float = 0.05
    p_max: int = 10_000
    batch_min: int = 20
    min_batches_before_stop: int = 2
    estimator: str = "success"

    def __post_init__(self) -> None:
        if not 0.0 < self.delta < 1.0:
            raise DomainError(f"delta must be in (0,1), got {self.delta}")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must be in (0,1), got {self.alpha}")
        if self.batch_min < 1:
            raise DomainError(f"batch_min must be >= 1, got {self.batch_min}")
        if self.p_max < self.batch_min:
            raise DomainError("p_max must be at least batch_min")
        if self.estimator not in ("success", "xeb"):
            raise DomainError(f"estimator must be success|xeb, got {self.estimator!r}")

    @property
    def z_alpha(self) -> float:
        return z_quantile(self.alpha)


@dataclass
class BatchStat:
    index: int
    size: int
    batch_mean: float
    cum_mean: float
    cum_std: float
    ci: float
    total_shots: int


@dataclass
class EstimationTrace:
    batch_size: int
    estimator: str
    batches: list[BatchStat] = field(default_factory=list)
    fhat: float = 0.0
    sigma: float = 0.0
    ci: float = math.inf
    shots_used: int = 0
    stop_reason: str = ""


# Acklam's rational approximation to the inverse normal CDF, then one
# Halley refinement through erfc; absolute error well below 1e-9.
_PPF_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
          1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_PPF_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
          6.680131188771972e01, -1.328068155288572e01)
_PPF_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
          -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_PPF_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
          3.754408661907416e00)


def _norm_ppf(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability must be in (0,1), got {p}")
    a, b, c, d = _PPF_A, _PPF_B, _PPF_C, _PPF_D
    p_low = 0.02425
    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    elif p <= 1.0 - p_low:
        q = p - 0.5
        r = q * q
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / (
            ((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0
        )
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    err = 0.5 * math.erfc(-x / math.sqrt(2.0)) - p
    u = err * math.sqrt(2.0 * math.pi) * math.exp(x * x / 2.0)
    return x - u / (1.0 + x * u / 2.0)


def z_quantile(alpha: float) -> float:
    """Two-sided normal quantile Phi^-1(1 - alpha/2)."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must be in (0,1), got {alpha}")
    return _norm_ppf(1.0 - alpha / 2.0)


def batch_size(complexity: float, depth_t: int, cfg: PlanConfig) -> int:
    """max(batch_min, ceil(C * ln(1 + depth))); the +1 guards depth 0/1."""
    if complexity <= 0.0:
        raise EstimationError(f"complexity must be > 0, got {complexity}")
    if depth_t < 0:
        raise EstimationError(f"depth must be >= 0, got {depth_t}")
    return max(cfg.batch_min, math.ceil(complexity * math.log1p(depth_t)))


def success_set(ideal: OutcomeDistribution) -> set[int]:
    """Outcome indices reaching at least tau * max of the ideal probability."""
    threshold = SUCCESS_THRESHOLD * float(ideal.probs.max())
    return {int(i) for i in np.flatnonzero(ideal.probs >= threshold)}


def xeb_scale(ideal: OutcomeDistribution) -> tuple[float, float]:
    """(a, b) so that a * p_ideal(x) + b is the normalized per-shot value."""
    dim = 2**ideal.num_bits
    denom = dim * float(np.square(ideal.probs).sum()) - 1.0
    if abs(denom) < 1e-9:
        raise UniformIdeal("xeb undefined: ideal distribution is uniform")
    return dim / denom, -1.0 / denom


def shot_value(outcome: str, est: str, ideal: OutcomeDistribution) -> float:
    """Scalar contribution of one measured bitstring."""
    idx = int(outcome, 2) if outcome else 0
    if est == "success":
        return 1.0 if idx in success_set(ideal) else 0.0
    if est == "xeb":
        a, b = xeb_scale(ideal)
        return a * float(ideal.probs[idx]) + b
    raise EstimationError(f"estimator must be success|xeb, got {est!r}")


def estimate(
    oracle: DistributionOracle,
    ideal: OutcomeDistribution,
    cfg: PlanConfig,
    batch: int,
) -> EstimationTrace:
    """Run the adaptive loop until the CI criterion or the shot cap."""
    if batch < 1:
        raise EstimationError(f"batch must be >= 1, got {batch}")
    if oracle.num_bits != ideal.num_bits:
        raise DimensionMismatch(
            f"oracle has {oracle.num_bits} bits, ideal has {ideal.num_bits}"
        )
    z = cfg.z_alpha
    if cfg.estimator == "success":
        good = success_set(ideal)
        value_of = np.zeros(2**ideal.num_bits)
        value_of[list(good)] = 1.0
    else:
        a, b = xeb_scale(ideal)
        value_of = a * ideal.probs + b

    trace = EstimationTrace(batch_size=batch, estimator=cfg.estimator)
    total = 0
    running_sum = 0.0
    running_sumsq = 0.0
    while True:
        shots = oracle.sample(batch)
        values = value_of[[int(s, 2) if s else 0 for s in shots]]
        total += batch
        running_sum += float(values.sum())
        running_sumsq += float(np.square(values).sum())
        mean = running_sum / total
        if total > 1:
            var = max(0.0, (running_sumsq - total * mean * mean) / (total - 1))
        else:
            var = 0.0
        std = math.sqrt(var)
        ci = z * std / math.sqrt(total)
        trace.batches.append(
            BatchStat(
                index=len(trace.batches),
                size=batch,
                batch_mean=float(values.mean()),
                cum_mean=mean,
                cum_std=std,
                ci=ci,
                total_shots=total,
            )
        )
        trace.fhat, trace.sigma, trace.ci, trace.shots_used = mean, std, ci, total
        if ci <= cfg.delta and len(trace.batches) >= cfg.min_batches_before_stop:
            trace.stop_reason = "ci_met"
            break
        if total >= cfg.p_max:
            trace.stop_reason = "cap_reached"
            break
    if cfg.estimator == "xeb":
        trace.fhat = min(max(trace.fhat, 0.0), 1.05)
    return trace


def hellinger_distance(p: OutcomeDistribution, q: OutcomeDistribution) -> float:
    """sqrt(1 - sum sqrt(p*q)), clamped to [0, 1]."""
    if p.num_bits != q.num_bits:
        raise DimensionMismatch(f"{p.num_bits} bits vs {q.num_bits} bits")
    affinity = float(np.sqrt(p.probs * q.probs).sum())
    return math.sqrt(min(1.0, max(0.0, 1.0 - affinity)))


def bernoulli_hellinger(f_est: float, f_true: float) -> float:
    """Hellinger distance between the (f, 1-f) per-shot value distributions.

    Inputs are clamped to [0, 1] first, so xeb estimates slightly above 1
    from the reporting clamp are handled gracefully.
    """
    a = min(max(f_est, 0.0), 1.0)
    b = min(max(f_true, 0.0), 1.0)
    affinity = math.sqrt(a * b) + math.sqrt((1.0 - a) * (1.0 - b))
    return math.sqrt(min(1.0, max(0.0, 1.0 - affinity)))
