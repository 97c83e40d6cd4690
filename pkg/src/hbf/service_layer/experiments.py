"""
Monte Carlo experiments, decoder calibration and multi-index voting.

Every random draw is seeded from the experiment's master seed through
`derive_seed`, so a run is reproduced exactly by its config. Calibration
draws its probes from streams no evaluation trial uses.

"""

import math
import time
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from src.utils.logger import log
from src.hbf.domain import baseline, bounds
from src.hbf.domain.exceptions import DegenerateCalibration, InvalidArgument
from src.hbf.domain.hypervector import convolve, correlate
from src.hbf.domain.model import (
    DEFAULT_TOP_K,
    DecodeOutcome,
    DecoderConfig,
    HbfMemory,
    Hit,
    Reject,
    build,
    correlate_vector,
    decide,
    score_codebook,
)
from src.hbf.domain.noise import NoiseKind, NoiseSpec, apply_key_noise, apply_memory_noise
from src.hbf.domain.seeds import derive_seed

MIN_PROBES = 100
PROBE_CHUNK = 64
SLACK_SIGMAS = 3.0
SIGN_TEST_Z = 1.645

HIT_CORRECT = "hit-correct"
HIT_WRONG = "hit-wrong"
REJECT = "reject"

MEMBER = "member"
NON_MEMBER = "non-member"

TRIAL_COLUMNS = (
    "experiment",
    "d",
    "n",
    "label_count",
    "rho",
    "master_seed",
    "tau",
    "delta",
    "trial",
    "trial_seed",
    "query_kind",
    "key",
    "noise",
    "outcome",
    "s1",
    "s2",
)
CAPACITY_COLUMNS = (
    "experiment",
    "d",
    "n",
    "label_count",
    "rho",
    "master_seed",
    "tau",
    "delta",
    "sigma_hat",
    "mu_hat",
    "trials",
    "accuracy",
    "reject_rate",
    "wrong_rate",
)
AMPLIFY_COLUMNS = (
    "experiment",
    "d",
    "n",
    "label_count",
    "rho",
    "master_seed",
    "r",
    "trial",
    "trial_seed",
    "key",
    "noise",
    "single_outcome",
    "voted_outcome",
)


# --------------
# CONFIGURATIONS
# --------------
@dataclass(frozen=True)
class ExperimentConfig:
    """
    One experiment run. `decoder=None` means auto-calibrate at `eps` on
    the clean store before any trial runs.

    """

    dim: int = 4096
    n: int = 100
    label_count: int = 100
    rho: float = 1.0
    noise: Tuple[NoiseSpec, ...] = ()
    decoder: Optional[DecoderConfig] = None
    eps: float = 0.01
    trials: int = 1000
    master_seed: int = 0
    out: Optional[str] = None
    probe_count: int = 1000
    top_k: int = DEFAULT_TOP_K
    timings: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidArgument(f"trials must be >= 1, got {self.trials}")
        if self.n < 1:
            raise InvalidArgument(f"n must be >= 1, got {self.n}")
        if self.label_count < max(2, self.top_k):
            raise InvalidArgument(
                f"label_count must be >= top_k={self.top_k}, got {self.label_count}"
            )
        if self.decoder is None and not 0 < self.eps < 1:
            raise InvalidArgument(f"eps must lie in (0, 1), got {self.eps}")
        if self.probe_count < MIN_PROBES:
            raise InvalidArgument(f"probe_count must be >= {MIN_PROBES}")
        object.__setattr__(self, "noise", tuple(self.noise))

    @classmethod
    def from_mapping(cls, manifest: Mapping, **overrides) -> "ExperimentConfig":
        """
        Build from a manifest dict with `[experiment]` and `[decoder]`
        sections. Overrides that are not None win over manifest values.

        """
        section = dict(manifest.get("experiment", {}))
        decoder = manifest.get("decoder")
        values = {
            "dim": section.get("dim"),
            "n": section.get("n"),
            "label_count": section.get("label_count"),
            "rho": section.get("rho"),
            "noise": section.get("noise"),
            "eps": section.get("eps"),
            "trials": section.get("trials"),
            "master_seed": section.get("seed", section.get("master_seed")),
            "out": section.get("out"),
            "probe_count": section.get("probe_count"),
            "top_k": section.get("top_k"),
        }
        if decoder and "tau" in decoder:
            values["decoder"] = DecoderConfig(
                float(decoder["tau"]),
                float(decoder.get("delta", 0.0)),
                int(decoder.get("top_k", DEFAULT_TOP_K)),
            )
        values.update({k: v for k, v in overrides.items() if v is not None})
        if values.get("noise") is not None:
            values["noise"] = tuple(
                spec if isinstance(spec, NoiseSpec) else NoiseSpec.parse(spec)
                for spec in values["noise"]
            )
        return cls(**{k: v for k, v in values.items() if v is not None})


@dataclass(frozen=True)
class AmplifiedConfig:
    r: int = 3

    def __post_init__(self):
        if self.r < 1:
            raise InvalidArgument(f"r must be >= 1, got {self.r}")
        if self.r % 2 == 0:
            log.warning("even r=%s can split votes evenly; odd r is recommended", self.r)

    @property
    def majority(self) -> int:
        return -(-self.r // 2)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    trial_seed: int
    query_kind: str
    key: bytes
    noise: str
    outcome: str
    s1: float
    s2: float
    runtime_s: Optional[float] = None


@dataclass
class ExperimentResult:
    name: str
    columns: Tuple[str, ...]
    rows: List[dict]
    summary: Dict[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class ScoreMoments:
    """
    Calibrated score statistics. `sigma` is the impostor score std, `mu`
    the mean true-label score; `rho` and `c` rescale them to the form
    margin_failure_bound takes (match ~ rho d, impostor variance ~ c d).

    """

    sigma: float
    mu: float
    rho: float
    c: float
    probe_count: int


@dataclass(frozen=True)
class Store:
    memory: HbfMemory
    labels: Tuple[bytes, ...]
    truth: Dict[bytes, bytes]

    @property
    def keys(self) -> List[bytes]:
        return sorted(self.truth)


# -----------
# CALIBRATION
# -----------
def _sign_block(rng: np.random.Generator, rows: int, dim: int) -> np.ndarray:
    return 2.0 * rng.integers(0, 2, size=(rows, dim)).astype(np.float64) - 1.0


def estimate_score_moments(
    mem: HbfMemory, labels: Sequence[bytes], probe_count: int, seed: int
) -> ScoreMoments:
    """
    Impostor spread from random non-member keys, and match level from
    synthetic held-in probes: a fresh random key bound to a label is
    superposed into the memory and decoded right back.

    """
    if probe_count < MIN_PROBES:
        raise InvalidArgument(f"probe_count must be >= {MIN_PROBES}, got {probe_count}")
    labels = tuple(labels)
    values = mem.value_codebook.matrix(labels)
    d = mem.dim

    impostor_rng = np.random.default_rng(derive_seed(seed, "calibration", "impostor"))
    match_rng = np.random.default_rng(derive_seed(seed, "calibration", "match"))
    impostor, match = [], []
    for start in range(0, probe_count, PROBE_CHUNK):
        size = min(PROBE_CHUNK, probe_count - start)

        keys = _sign_block(impostor_rng, size, d)
        impostor.append((correlate(keys, mem.vector) @ values.T).ravel())

        keys = _sign_block(match_rng, size, d)
        bound_values = values[match_rng.integers(0, len(labels), size=size)]
        bound = convolve(keys, bound_values)
        z = correlate(keys, mem.vector) + mem.gain * correlate(keys, bound)
        match.append(np.einsum("ij,ij->i", z, bound_values))

    sigma = float(np.std(np.concatenate(impostor), ddof=1))
    mu = float(np.mean(np.concatenate(match)))
    return ScoreMoments(sigma, mu, mu / d**2, sigma**2 / d**3, probe_count)


def calibrate_decoder(
    mem: HbfMemory,
    labels: Sequence[bytes],
    probe_count: int,
    eps: float,
    seed: int,
    top_k: int = DEFAULT_TOP_K,
) -> DecoderConfig:
    """
    tau is the extreme-value threshold for the largest of |labels|
    impostors at level eps, floored at mu/2; delta is mu/4.

    """
    moments = estimate_score_moments(mem, labels, probe_count, seed)
    return decoder_from_moments(moments, len(labels), eps, top_k)


def decoder_from_moments(
    moments: ScoreMoments, label_count: int, eps: float, top_k: int = DEFAULT_TOP_K
) -> DecoderConfig:
    if moments.sigma <= 0 or not math.isfinite(moments.sigma):
        raise DegenerateCalibration(
            f"impostor score spread is {moments.sigma}; is the memory empty?"
        )
    tau = bounds.evt_threshold_exact(moments.sigma, label_count, eps)
    delta = 0.0
    if moments.mu > 0:
        tau = max(tau, moments.mu / 2)
        delta = moments.mu / 4
    log.info(
        "calibrated decoder: sigma=%.6g mu=%.6g tau=%.6g delta=%.6g",
        moments.sigma,
        moments.mu,
        tau,
        delta,
    )
    return DecoderConfig(tau, delta, top_k)


# ------------------
# STORES AND QUERIES
# ------------------
def make_store(
    dim: int, n: int, label_count: int, rho: float, master_seed: int, *name
) -> Store:
    """
    n records key-000000.. -> label-00000.. with labels drawn uniformly.
    Codebook seeds and label draws come from (master_seed, *name).

    """
    labels = tuple(b"label-%05d" % j for j in range(label_count))
    rng = np.random.default_rng(derive_seed(master_seed, *name, "values"))
    picks = rng.integers(0, label_count, size=n)
    truth = {b"key-%06d" % i: labels[j] for i, j in enumerate(picks)}
    memory = build(
        truth.items(),
        dim,
        rho,
        key_seed=derive_seed(master_seed, *name, "key-codebook"),
        value_seed=derive_seed(master_seed, *name, "value-codebook"),
    )
    return Store(memory, labels, truth)


def seeded_noise(noise: Sequence[NoiseSpec], trial_seed: int) -> List[NoiseSpec]:
    return [
        spec.with_seed(derive_seed(trial_seed, "noise", j)) for j, spec in enumerate(noise)
    ]


def noisy_scores(
    mem: HbfMemory, key: bytes, labels: Sequence[bytes], noise: Sequence[NoiseSpec]
):
    """Apply memory then query noise and score every label."""
    noisy_mem = apply_memory_noise(mem, noise)
    key_vector = apply_key_noise(mem.key_codebook.vector(key), noise)
    z = correlate_vector(noisy_mem, key_vector)
    return score_codebook(z, labels, noisy_mem.value_codebook)


def classify(outcome: DecodeOutcome, truth: Optional[bytes]) -> str:
    if isinstance(outcome, Reject):
        return REJECT
    if truth is not None and outcome.label == truth:
        return HIT_CORRECT
    return HIT_WRONG


def _noise_text(noise: Sequence[NoiseSpec]) -> str:
    return ";".join(str(spec) for spec in noise)


def _noise_level(noise: Sequence[NoiseSpec], kind: NoiseKind) -> float:
    return sum(spec.level for spec in noise if spec.kind is kind)


def _binomial_slack(p: float, trials: int) -> float:
    p = min(1.0, max(0.0, p))
    return SLACK_SIGMAS * math.sqrt(p * (1 - p) / trials)


def _resolve_decoder(
    cfg: ExperimentConfig, store: Store, *name
) -> Tuple[DecoderConfig, ScoreMoments]:
    moments = estimate_score_moments(
        store.memory,
        store.labels,
        cfg.probe_count,
        derive_seed(cfg.master_seed, *name, "calibration"),
    )
    if cfg.decoder is not None:
        return cfg.decoder, moments
    return decoder_from_moments(moments, len(store.labels), cfg.eps, cfg.top_k), moments


def _base_row(cfg: ExperimentConfig, name: str, decoder: DecoderConfig) -> dict:
    return {
        "experiment": name,
        "d": cfg.dim,
        "n": cfg.n,
        "label_count": cfg.label_count,
        "rho": cfg.rho,
        "master_seed": cfg.master_seed,
        "tau": decoder.tau,
        "delta": decoder.delta,
    }


def _columns(cfg: ExperimentConfig) -> Tuple[str, ...]:
    # wall-clock columns are opt-in so default output stays byte-reproducible
    return TRIAL_COLUMNS + ("runtime_s",) if cfg.timings else TRIAL_COLUMNS


def _run_trials(
    cfg: ExperimentConfig,
    name: str,
    store: Store,
    decoder: DecoderConfig,
    queries,
) -> Tuple[List[TrialRecord], List[float]]:
    """
    Run one decode per (trial, key, truth) in `queries`. Returns the
    records and, for member queries, the true-label score of each trial.

    """
    records, true_scores = [], []
    for trial, key, truth in queries:
        trial_seed = derive_seed(cfg.master_seed, name, "trial", trial)
        noise = seeded_noise(cfg.noise, trial_seed)
        started = time.perf_counter() if cfg.timings else None
        scores = noisy_scores(store.memory, key, store.labels, noise)
        outcome = decide(scores, decoder)
        elapsed = time.perf_counter() - started if cfg.timings else None
        if truth is not None:
            true_scores.append(next(s for label, s in scores if label == truth))
        records.append(
            TrialRecord(
                trial=trial,
                trial_seed=trial_seed,
                query_kind=NON_MEMBER if truth is None else MEMBER,
                key=key,
                noise=_noise_text(cfg.noise),
                outcome=classify(outcome, truth),
                s1=outcome.best_score,
                s2=outcome.runner_up,
                runtime_s=elapsed,
            )
        )
    return records, true_scores


def _trial_rows(cfg, name, decoder, records: Sequence[TrialRecord]) -> List[dict]:
    base = _base_row(cfg, name, decoder)
    rows = []
    for rec in records:
        row = dict(base)
        row.update(
            trial=rec.trial,
            trial_seed=rec.trial_seed,
            query_kind=rec.query_kind,
            key=rec.key,
            noise=rec.noise,
            outcome=rec.outcome,
            s1=rec.s1,
            s2=rec.s2,
        )
        if cfg.timings:
            row["runtime_s"] = rec.runtime_s
        rows.append(row)
    return rows


def _rates(records: Sequence[TrialRecord]) -> Dict[str, float]:
    counts = Counter(rec.outcome for rec in records)
    total = len(records)
    return {
        "accuracy": counts[HIT_CORRECT] / total,
        "reject_rate": counts[REJECT] / total,
        "wrong_rate": counts[HIT_WRONG] / total,
    }


def normalized_fp_bound(tau: float, sigma: float, candidates: int, d: int) -> float:
    """fp_bound with tau rescaled so impostor scores have variance d."""
    if tau <= 0:
        return 1.0
    return bounds.fp_bound(candidates, d, tau * math.sqrt(d) / sigma)


# -----------
# EXPERIMENTS
# -----------
def run_fp_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Non-member queries only; measured trigger rate against fp_bound."""
    name = "fp"
    store = make_store(cfg.dim, cfg.n, cfg.label_count, cfg.rho, cfg.master_seed, name)
    decoder, moments = _resolve_decoder(cfg, store, name)
    log.debug("fp experiment: %s trials with %s", cfg.trials, decoder)

    queries = ((trial, b"absent-%06d" % trial, None) for trial in range(cfg.trials))
    records, _ = _run_trials(cfg, name, store, decoder, queries)

    false_positives = sum(rec.outcome != REJECT for rec in records)
    fp_rate = false_positives / cfg.trials
    bound = normalized_fp_bound(decoder.tau, moments.sigma, cfg.label_count, cfg.dim)
    summary = {
        "trials": cfg.trials,
        "false_positives": false_positives,
        "fp_rate": fp_rate,
        "tau": decoder.tau,
        "delta": decoder.delta,
        "sigma_hat": moments.sigma,
        "mu_hat": moments.mu,
        "fp_bound": bound,
        "bound_holds": fp_rate <= bound + _binomial_slack(bound, cfg.trials),
    }
    log.info("fp experiment: rate=%s bound=%s", fp_rate, bound)
    rows = _trial_rows(cfg, name, decoder, records)
    return ExperimentResult(name, _columns(cfg), rows, summary)


def run_fn_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """
    Member queries under the configured key and memory noise. Reports
    accuracy and the measured true-label score relative to the clean
    mean, next to the (d - 2H)(1 - 2 p_e) / d shrinkage it should follow.

    """
    name = "fn"
    store = make_store(cfg.dim, cfg.n, cfg.label_count, cfg.rho, cfg.master_seed, name)
    decoder, moments = _resolve_decoder(cfg, store, name)

    keys = store.keys
    pick_rng = np.random.default_rng(derive_seed(cfg.master_seed, name, "queries"))
    picks = pick_rng.integers(0, len(keys), size=cfg.trials)
    queries = ((t, keys[i], store.truth[keys[i]]) for t, i in enumerate(picks))
    records, true_scores = _run_trials(cfg, name, store, decoder, queries)

    hamming = _noise_level(cfg.noise, NoiseKind.KEY_HAMMING)
    p_e = _noise_level(cfg.noise, NoiseKind.MEMORY_FLIP)
    predicted = bounds.signal_mean(cfg.dim, hamming, p_e) / cfg.dim
    measured = math.fsum(true_scores) / len(true_scores) / moments.mu if moments.mu else 0.0

    # effective dimension at which the measured clean SNR matches the
    # unit-variance convention of fn_bound
    d_eff = (moments.mu / moments.sigma) ** 2 if moments.sigma > 0 else 0.0
    if d_eff >= 2 and hamming < cfg.dim:
        bound = bounds.fn_bound(d_eff, hamming * d_eff / cfg.dim, p_e, cfg.label_count)
    else:
        bound = 1.0
    rates = _rates(records)
    error = 1.0 - rates["accuracy"]
    summary = {
        "trials": cfg.trials,
        **rates,
        "tau": decoder.tau,
        "delta": decoder.delta,
        "sigma_hat": moments.sigma,
        "mu_hat": moments.mu,
        "effective_dim": d_eff,
        "predicted_signal_ratio": predicted,
        "measured_signal_ratio": measured,
        "fn_bound": bound,
        "bound_holds": error <= bound + _binomial_slack(bound, cfg.trials),
    }
    log.info("fn experiment: accuracy=%s bound=%s", rates["accuracy"], bound)
    rows = _trial_rows(cfg, name, decoder, records)
    return ExperimentResult(name, _columns(cfg), rows, summary)


def run_capacity_sweep(cfg: ExperimentConfig, grid: Sequence[int]) -> ExperimentResult:
    """One calibrated store per n in `grid`, one CSV row per n."""
    name = "capacity"
    grid = list(grid)
    if not grid:
        raise InvalidArgument("capacity grid must not be empty")
    if grid != sorted(grid) or len(set(grid)) != len(grid):
        raise InvalidArgument(f"capacity grid must be strictly ascending, got {grid}")

    rows = []
    for n in grid:
        point = replace(cfg, n=n)
        store = make_store(
            point.dim, n, point.label_count, point.rho, point.master_seed, name, n
        )
        decoder, moments = _resolve_decoder(point, store, name, n)
        keys = store.keys
        pick_rng = np.random.default_rng(derive_seed(point.master_seed, name, n, "queries"))
        picks = pick_rng.integers(0, len(keys), size=point.trials)
        queries = ((t, keys[i], store.truth[keys[i]]) for t, i in enumerate(picks))
        records, _ = _run_trials(point, f"{name}-{n}", store, decoder, queries)

        row = _base_row(point, name, decoder)
        row.update(sigma_hat=moments.sigma, mu_hat=moments.mu, trials=point.trials)
        row.update(_rates(records))
        rows.append(row)
        log.debug("capacity n=%s accuracy=%s sigma=%s", n, row["accuracy"], moments.sigma)

    summary = {
        "grid": grid,
        "accuracy": [row["accuracy"] for row in rows],
        "sigma_hat": [row["sigma_hat"] for row in rows],
    }
    return ExperimentResult(name, CAPACITY_COLUMNS, rows, summary)


# -------------
# AMPLIFICATION
# -------------
def _per_memory(noise: Sequence[NoiseSpec], index: int) -> List[NoiseSpec]:
    return [spec.with_seed(derive_seed(spec.rng_seed, "memory", index)) for spec in noise]


def _decode_each(memories, key, decoders, labels, noise) -> List[DecodeOutcome]:
    return [
        decide(noisy_scores(mem, key, labels, _per_memory(noise, i)), decoder)
        for i, (mem, decoder) in enumerate(zip(memories, decoders))
    ]


def vote(outcomes: Sequence[DecodeOutcome], majority: int) -> DecodeOutcome:
    """
    Plurality over the Hit labels, ties to the smaller label. The winner
    needs at least `majority` votes, else the first memory's scores come
    back as a Reject.

    """
    votes = Counter(o.label for o in outcomes if isinstance(o, Hit))
    if votes:
        label, count = min(votes.items(), key=lambda item: (-item[1], item[0]))
        if count >= majority:
            return next(o for o in outcomes if isinstance(o, Hit) and o.label == label)
    first = outcomes[0]
    if isinstance(first, Reject):
        return first
    return Reject(first.best_score, first.runner_up, first.top_k)


def amplified_decode(
    memories: Sequence[HbfMemory],
    key: bytes,
    cfg: Union[DecoderConfig, Sequence[DecoderConfig]],
    labels: Sequence[bytes],
    noise: Sequence[NoiseSpec] = (),
) -> DecodeOutcome:
    """
    Decode `key` in each of r independent memories and vote. `cfg` is
    one decoder for all memories or one per memory; `noise` specs are
    applied to memory i with seeds derived from (spec seed, i).

    """
    if not memories:
        raise InvalidArgument("need at least one memory")
    decoders = [cfg] * len(memories) if isinstance(cfg, DecoderConfig) else list(cfg)
    if len(decoders) != len(memories):
        raise InvalidArgument(f"{len(memories)} memories but {len(decoders)} decoders")
    outcomes = _decode_each(memories, key, decoders, labels, noise)
    return vote(outcomes, AmplifiedConfig(len(memories)).majority)


def run_amplification_experiment(
    cfg: ExperimentConfig, amp: AmplifiedConfig
) -> ExperimentResult:
    """
    r stores over the same records with independent codebooks. Every
    query is decoded by memory 0 alone and by the vote; the two error
    indicators are compared with a one-sided paired sign test.

    """
    name = "amplify"
    base = make_store(cfg.dim, cfg.n, cfg.label_count, cfg.rho, cfg.master_seed, name, 0)
    stores = [base]
    for i in range(1, amp.r):
        memory = build(
            base.truth.items(),
            cfg.dim,
            cfg.rho,
            key_seed=derive_seed(cfg.master_seed, name, i, "key-codebook"),
            value_seed=derive_seed(cfg.master_seed, name, i, "value-codebook"),
        )
        stores.append(Store(memory, base.labels, base.truth))
    resolved = [_resolve_decoder(cfg, store, name, i) for i, store in enumerate(stores)]
    decoders = [decoder for decoder, _ in resolved]
    memories = [store.memory for store in stores]

    keys = base.keys
    pick_rng = np.random.default_rng(derive_seed(cfg.master_seed, name, "queries"))
    picks = pick_rng.integers(0, len(keys), size=cfg.trials)

    rows = []
    single_errors = voted_errors = single_only = voted_only = 0
    for trial, i in enumerate(picks):
        key, truth = keys[i], base.truth[keys[i]]
        trial_seed = derive_seed(cfg.master_seed, name, "trial", trial)
        noise = seeded_noise(cfg.noise, trial_seed)
        per_memory = _decode_each(memories, key, decoders, base.labels, noise)
        single = classify(per_memory[0], truth)
        voted = classify(vote(per_memory, amp.majority), truth)

        single_wrong, voted_wrong = single != HIT_CORRECT, voted != HIT_CORRECT
        single_errors += single_wrong
        voted_errors += voted_wrong
        single_only += single_wrong and not voted_wrong
        voted_only += voted_wrong and not single_wrong
        rows.append(
            {
                "experiment": name,
                "d": cfg.dim,
                "n": cfg.n,
                "label_count": cfg.label_count,
                "rho": cfg.rho,
                "master_seed": cfg.master_seed,
                "r": amp.r,
                "trial": trial,
                "trial_seed": trial_seed,
                "key": key,
                "noise": _noise_text(cfg.noise),
                "single_outcome": single,
                "voted_outcome": voted,
            }
        )

    discordant = single_only + voted_only
    sign_z = (single_only - voted_only) / math.sqrt(discordant) if discordant else 0.0
    summary = {
        "trials": cfg.trials,
        "r": amp.r,
        "single_error": single_errors / cfg.trials,
        "voted_error": voted_errors / cfg.trials,
        "single_only_errors": single_only,
        "voted_only_errors": voted_only,
        "sign_z": sign_z,
        "improved": sign_z > SIGN_TEST_Z,
    }
    log.info(
        "amplification r=%s: single=%s voted=%s z=%.3f",
        amp.r,
        summary["single_error"],
        summary["voted_error"],
        sign_z,
    )
    return ExperimentResult(name, AMPLIFY_COLUMNS, rows, summary)


# --------
# BASELINE
# --------
def run_baseline_experiment(
    cfg: ExperimentConfig, p: float, ells: Sequence[int], T: float = 1.0
) -> ExperimentResult:
    """
    Measure one-shot accuracy with an fn run, then set it beside the
    pointer-chasing model for each hop count in `ells`.

    """
    if not ells:
        raise InvalidArgument("need at least one hop count")
    fn = run_fn_experiment(cfg)
    hbf_stats = baseline.HbfStats(fn.summary["accuracy"], cfg.trials, T, cfg.master_seed)

    rows = []
    for ell in ells:
        model = baseline.ChaseModel(p, ell, T)
        seed = derive_seed(cfg.master_seed, "baseline", ell)
        stats = baseline.chase_simulate(model, cfg.trials, seed)
        hbf_row, chase_row = baseline.compare_report(hbf_stats, model, stats)
        if not rows:
            rows.append(hbf_row.as_dict())
        rows.append(chase_row.as_dict())
    summary = {"hbf_accuracy": hbf_stats.accuracy, "ells": list(ells), "p": p, "T": T}
    return ExperimentResult("baseline", baseline.COMPARISON_COLUMNS, rows, summary)
