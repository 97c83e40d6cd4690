"""
Cost model of the sequential pointer-chasing baseline.

A lookup walks ell hops, each succeeding with probability p and costing
time T. A failed walk is retried from the start until one succeeds.

"""

import math
from dataclasses import asdict, dataclass
from typing import List, Optional

import numpy as np

from src.utils.logger import log
from src.hbf.domain.exceptions import InvalidArgument
from src.hbf.domain.seeds import derive_seed

SIMULATION_BLOCK = 4096
MAX_ATTEMPTS = 10**9

COMPARISON_COLUMNS = (
    "system",
    "p",
    "ell",
    "T",
    "success_prob",
    "expected_time",
    "expected_time_repeat",
    "measured_success",
    "measured_time_mean",
    "trials",
    "seed",
)


@dataclass(frozen=True)
class ChaseModel:
    p: float
    ell: int
    T: float = 1.0

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise InvalidArgument(f"per-hop success p must lie in (0, 1], got {self.p}")
        if int(self.ell) != self.ell or self.ell < 1:
            raise InvalidArgument(f"hop count must be an integer >= 1, got {self.ell}")
        if not (math.isfinite(self.T) and self.T > 0):
            raise InvalidArgument(f"per-hop time must be finite and > 0, got {self.T}")


@dataclass(frozen=True)
class ChaseStats:
    """
    Monte Carlo estimates for one ChaseModel.

    success_rate is the single-walk success frequency; attempts and total
    time are per lookup under repeat-until-success. `truncated` counts
    lookups that hit the attempt cap.

    """

    success_rate: float
    mean_attempts: float
    mean_total_time: float
    std_total_time: float
    trials: int
    truncated: int
    seed: int


@dataclass(frozen=True)
class HbfStats:
    """Measured one-shot index performance: a single parallel round per query."""

    accuracy: float
    trials: int
    T: float = 1.0
    seed: int = 0


@dataclass(frozen=True)
class ComparisonRow:
    system: str
    p: float
    ell: int
    T: float
    success_prob: float
    expected_time: float
    expected_time_repeat: float
    measured_success: Optional[float]
    measured_time_mean: Optional[float]
    trials: int
    seed: int

    @property
    def rounds(self) -> int:
        return self.ell

    def as_dict(self) -> dict:
        return asdict(self)


def chase_success_prob(model: ChaseModel) -> float:
    return model.p**model.ell


def chase_expected_time(model: ChaseModel) -> float:
    return model.ell * model.T


def chase_expected_time_repeat(model: ChaseModel) -> float:
    success = chase_success_prob(model)
    if success == 0.0:
        log.warning("p^ell underflows for %s; expected time is infinite", model)
        return math.inf
    expected = model.ell * model.T / success
    if math.isinf(expected):
        log.warning("expected repeat time overflows for %s", model)
    return expected


def _geometric(rng: np.random.Generator, success: float, size: int) -> np.ndarray:
    # inversion sampling in float64, so tiny success rates give huge
    # counts instead of overflowing an integer draw
    if success <= 0.0:
        return np.full(size, math.inf)
    return np.ceil(np.log(rng.random(size)) / math.log1p(-success))


def chase_simulate(model: ChaseModel, trials: int, seed: int) -> ChaseStats:
    """
    Simulate `trials` lookups. The first walk of each lookup is drawn hop
    by hop; once it fails, the number of further walks is geometric in
    p^ell. Trials run in fixed blocks with seeds derived from
    (seed, block), so the result depends only on (model, trials, seed).

    """
    if trials < 1:
        raise InvalidArgument(f"trials must be >= 1, got {trials}")
    walk_success = chase_success_prob(model)

    first_ok = 0
    attempts_sum = 0
    attempts_sq_sum = 0
    truncated = 0
    for block, start in enumerate(range(0, trials, SIMULATION_BLOCK)):
        size = min(SIMULATION_BLOCK, trials - start)
        rng = np.random.default_rng(derive_seed(seed, "chase", block))
        ok = np.all(rng.random((size, model.ell)) < model.p, axis=1)
        failed = int(size - np.count_nonzero(ok))

        attempts = np.ones(size, dtype=np.int64)
        if failed:
            retries = _geometric(rng, walk_success, failed)
            attempts[~ok] = 1 + np.minimum(retries, MAX_ATTEMPTS - 1).astype(np.int64)
            truncated += int(np.count_nonzero(retries >= MAX_ATTEMPTS - 1))

        first_ok += int(np.count_nonzero(ok))
        # python ints keep the aggregate exact and order independent
        attempts_sum += int(attempts.sum())
        attempts_sq_sum += sum(int(a) * int(a) for a in attempts)

    if truncated:
        log.warning(
            "%s of %s lookups hit the %s attempt cap", truncated, trials, MAX_ATTEMPTS
        )

    walk_time = model.ell * model.T
    mean_attempts = attempts_sum / trials
    variance = max(0.0, attempts_sq_sum / trials - mean_attempts**2)
    return ChaseStats(
        success_rate=first_ok / trials,
        mean_attempts=mean_attempts,
        mean_total_time=mean_attempts * walk_time,
        std_total_time=math.sqrt(variance) * walk_time,
        trials=trials,
        truncated=truncated,
        seed=seed,
    )


def compare_report(
    hbf_stats: HbfStats, chase_model: ChaseModel, chase_stats: Optional[ChaseStats] = None
) -> List[ComparisonRow]:
    """One row for the one-shot index (ell = 1) and one for the baseline."""
    hbf = ComparisonRow(
        system="hbf",
        p=hbf_stats.accuracy,
        ell=1,
        T=hbf_stats.T,
        success_prob=hbf_stats.accuracy,
        expected_time=hbf_stats.T,
        expected_time_repeat=(
            hbf_stats.T / hbf_stats.accuracy if hbf_stats.accuracy > 0 else math.inf
        ),
        measured_success=hbf_stats.accuracy,
        measured_time_mean=hbf_stats.T,
        trials=hbf_stats.trials,
        seed=hbf_stats.seed,
    )
    chase = ComparisonRow(
        system="pointer-chase",
        p=chase_model.p,
        ell=chase_model.ell,
        T=chase_model.T,
        success_prob=chase_success_prob(chase_model),
        expected_time=chase_expected_time(chase_model),
        expected_time_repeat=chase_expected_time_repeat(chase_model),
        measured_success=chase_stats.success_rate if chase_stats else None,
        measured_time_mean=chase_stats.mean_total_time if chase_stats else None,
        trials=chase_stats.trials if chase_stats else 0,
        seed=chase_stats.seed if chase_stats else 0,
    )
    return [hbf, chase]
