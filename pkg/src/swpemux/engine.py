"""Discrete-trial Monte Carlo engine for the multiplexed write/read source.

One trial is one write train: m time bins, each holding at most one spin-wave
excitation. The first Stokes detector click (real or dark) heralds the train
and freezes the feed-forward logic; every later bin is ignored. After a
storage time tau the surviving spin wave is read out and the anti-Stokes
polarization is sampled from the effective pair state conditioned on which
Stokes detector fired.

Randomness comes from counter-mode Philox streams keyed by
(seed, domain, setting index, chunk index). Chunk boundaries and the draw
order inside a chunk are fixed, so a batch is bitwise reproducible for a given
seed no matter how many worker threads execute the chunks.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from .config import ExperimentConfig
from .states import (
    MeasurementSetting,
    TRANSMIT,
    joint_probabilities,
    werner_state,
)
from .util import first_success_probability

# Trials per RNG chunk. Fixed: changing it reshuffles streams, so results are
# reproducible per package version, and independent of thread count always.
CHUNK_TRIALS = 1 << 16

_DOMAIN_TRIALS = 0
_DOMAIN_COINCIDENCE = 1

_MAX_SEED = 1 << 64
_MAX_SETTINGS = 1 << 20
_MAX_CHUNKS = 1 << 40


def derive_stream(seed: int, domain: int, setting_index: int, chunk_index: int) -> np.random.Generator:
    """Independent Philox stream for one (domain, setting, chunk) cell.

    The 128-bit Philox key is seed | domain<<64 | setting<<68 | chunk<<88.
    Distinct keys give statistically independent counter-mode streams, which
    is what makes scheduling-order-independent parallelism possible.
    """
    if not 0 <= seed < _MAX_SEED:
        raise ValueError(f"seed must lie in [0, 2^64), got {seed}")
    if not 0 <= domain < 16:
        raise ValueError(f"domain must lie in [0, 16), got {domain}")
    if not 0 <= setting_index < _MAX_SETTINGS:
        raise ValueError(f"setting index must lie in [0, 2^20), got {setting_index}")
    if not 0 <= chunk_index < _MAX_CHUNKS:
        raise ValueError(f"chunk index must lie in [0, 2^40), got {chunk_index}")
    key = seed | (domain << 64) | (setting_index << 68) | (chunk_index << 88)
    return np.random.Generator(np.random.Philox(key=key))


# ---------------------------------------------------------------------------
# model quantities


def visibility(
    config: ExperimentConfig,
    m: Optional[int] = None,
    tau: Optional[float] = None,
    *,
    form: str = "saturating",
) -> float:
    """Two-photon interference visibility of mode pairs in an m-bin train
    after a storage time tau (microseconds).

    The cross-mode background divides the single-mode visibility by
    1 + beta (m - 1) chi ("saturating", the default) or multiplies it by
    1 - beta (m - 1) chi ("linear"); both forms agree to first order and the
    data cannot tell them apart, so the choice is an explicit argument.
    Memory decay contributes exp(-(tau - tau_ref)/tau_c). The result is
    clamped to [0, 1].
    """
    if m is None:
        m = config.m
    if tau is None:
        tau = config.tau_ref
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m}")
    if tau < 0.0:
        raise ValueError(f"storage time must be non-negative, got {tau}")
    load = config.beta * (m - 1) * config.chi
    if form == "saturating":
        base = config.v1 / (1.0 + load)
    elif form == "linear":
        base = config.v1 * (1.0 - load)
    else:
        raise ValueError(f"unknown visibility form {form!r}")
    value = base * math.exp(-(tau - config.tau_ref) / config.tau_c)
    return min(max(value, 0.0), 1.0)


def effective_pair_state(
    config: ExperimentConfig,
    m: Optional[int] = None,
    tau: Optional[float] = None,
    *,
    form: str = "saturating",
) -> np.ndarray:
    """Werner-form effective state of one heralded mode pair:
    V(m, tau) rho_pair(theta) + (1 - V) I/4."""
    return werner_state(config.theta, visibility(config, m, tau, form=form))


class ProbabilityPair(NamedTuple):
    """Exact geometric-series value and its first-order (linear in m) form."""

    exact: float
    linear: float


def analytic_p_s(config: ExperimentConfig, m: Optional[int] = None) -> ProbabilityPair:
    """Per-train herald probability 1 - (1 - chi eta_d)^m, with the linear
    approximation m chi eta_d for reporting. Dark counts are not included."""
    if m is None:
        m = config.m
    p_bin = config.chi * config.eta_d
    return ProbabilityPair(first_success_probability(p_bin, m), m * p_bin)


def analytic_p_sas(config: ExperimentConfig, m: Optional[int] = None) -> ProbabilityPair:
    """Per-train heralded coincidence probability: herald probability times
    the readout success gamma eta_as. Dark counts are not included."""
    herald = analytic_p_s(config, m)
    readout = config.gamma * config.eta_as
    return ProbabilityPair(herald.exact * readout, herald.linear * readout)


# ---------------------------------------------------------------------------
# plan and result records


@dataclass(frozen=True)
class SettingPair:
    """Analyzer settings for the Stokes arm and the anti-Stokes arm."""

    stokes: MeasurementSetting
    anti_stokes: MeasurementSetting

    def tokens(self) -> tuple[str, str]:
        return (self.stokes.token(), self.anti_stokes.token())

    @staticmethod
    def from_tokens(stokes: str, anti_stokes: str) -> "SettingPair":
        return SettingPair(
            MeasurementSetting.from_token(stokes), MeasurementSetting.from_token(anti_stokes)
        )


HV_PAIR = SettingPair(MeasurementSetting.linear(0.0), MeasurementSetting.linear(0.0))


@dataclass(frozen=True)
class RunPlan:
    """Everything a batch needs: configuration, storage time, analyzer
    setting pairs, trials per pair and the RNG seed."""

    config: ExperimentConfig
    tau: float
    settings: tuple[SettingPair, ...]
    n_trials: int
    seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "settings", tuple(self.settings))
        if self.tau < 0.0:
            raise ValueError(f"storage time must be non-negative, got {self.tau}")
        if not self.settings:
            raise ValueError("a run plan needs at least one analyzer setting pair")
        if self.n_trials < 1:
            raise ValueError(f"n_trials must be at least 1 per setting pair, got {self.n_trials}")
        if not 0 <= self.seed < _MAX_SEED:
            raise ValueError(f"seed must lie in [0, 2^64), got {self.seed}")
        if len(self.settings) >= _MAX_SETTINGS:
            raise ValueError("too many setting pairs for the stream layout")

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "tau": self.tau,
            "settings": [
                {"stokes": p.stokes.token(), "anti_stokes": p.anti_stokes.token()}
                for p in self.settings
            ],
            "n_trials": self.n_trials,
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> "RunPlan":
        known = {"config", "tau", "settings", "n_trials", "seed"}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown run plan keys: {', '.join(unknown)}")
        missing = sorted(known - set(data))
        if missing:
            raise ValueError(f"run plan is missing keys: {', '.join(missing)}")
        pairs = []
        for entry in data["settings"]:
            pairs.append(SettingPair.from_tokens(entry["stokes"], entry["anti_stokes"]))
        return RunPlan(
            config=ExperimentConfig.from_dict(data["config"]),
            tau=float(data["tau"]),
            settings=tuple(pairs),
            n_trials=int(data["n_trials"]),
            seed=int(data["seed"]),
        )


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of a single write train.

    herald_bin is 1-based. All herald and readout fields are None when no
    click occurred; a trial that was never heralded cannot have a readout.
    """

    trial_index: int
    herald_bin: Optional[int]
    herald_detector: Optional[int]
    herald_was_dark: bool
    readout_detector: Optional[int]
    storage_time: float

    @property
    def heralded(self) -> bool:
        return self.herald_bin is not None


@dataclass
class CoincidenceRow:
    """Counts for one analyzer setting pair.

    c_dXtY counts coincidences between Stokes detector X and anti-Stokes
    detector Y; n_d1/n_d2 are herald singles and n_total the number of trials.
    """

    pair: SettingPair
    c_d1t1: int = 0
    c_d1t2: int = 0
    c_d2t1: int = 0
    c_d2t2: int = 0
    n_d1: int = 0
    n_d2: int = 0
    n_total: int = 0

    def counts(self) -> np.ndarray:
        # no dtype cast: simulated rows hold ints, exact tables hold probabilities
        return np.array([[self.c_d1t1, self.c_d1t2], [self.c_d2t1, self.c_d2t2]])

    @property
    def n_coincidences(self) -> int:
        return self.c_d1t1 + self.c_d1t2 + self.c_d2t1 + self.c_d2t2

    def validate(self) -> None:
        values = (
            self.c_d1t1, self.c_d1t2, self.c_d2t1, self.c_d2t2,
            self.n_d1, self.n_d2, self.n_total,
        )
        if any(v < 0 for v in values):
            raise ValueError("coincidence counts must be non-negative")
        if self.c_d1t1 > self.n_d1 or self.c_d1t2 > self.n_d1:
            raise ValueError("D1 coincidences exceed D1 herald singles")
        if self.c_d2t1 > self.n_d2 or self.c_d2t2 > self.n_d2:
            raise ValueError("D2 coincidences exceed D2 herald singles")
        if self.n_d1 > self.n_total or self.n_d2 > self.n_total:
            raise ValueError("herald singles exceed the number of trials")
        if self.n_d1 + self.n_d2 > self.n_total:
            raise ValueError("total heralds exceed the number of trials")

    def merge(self, other: "CoincidenceRow") -> None:
        if other.pair != self.pair:
            raise ValueError("cannot merge rows with different setting pairs")
        self.c_d1t1 += other.c_d1t1
        self.c_d1t2 += other.c_d1t2
        self.c_d2t1 += other.c_d2t1
        self.c_d2t2 += other.c_d2t2
        self.n_d1 += other.n_d1
        self.n_d2 += other.n_d2
        self.n_total += other.n_total


@dataclass
class CoincidenceTable:
    """Ordered coincidence rows, one per analyzer setting pair."""

    rows: list = field(default_factory=list)

    def validate(self) -> None:
        for row in self.rows:
            row.validate()

    def find(self, pair: SettingPair) -> CoincidenceRow:
        for row in self.rows:
            if row.pair == pair:
                return row
        raise KeyError(f"no row for setting pair {pair.tokens()}")

    def merge(self, other: "CoincidenceTable") -> None:
        """Row-wise merge of two tables over the same setting pairs. Counts
        are integers, so the merge order can never change the result."""
        if len(other.rows) != len(self.rows):
            raise ValueError("cannot merge tables with different row counts")
        for mine, theirs in zip(self.rows, other.rows):
            mine.merge(theirs)


@dataclass
class BatchResult:
    """Aggregate outcome of run_batch."""

    table: CoincidenceTable
    herald_bin_histogram: np.ndarray
    n_trials_total: int
    n_heralds: int
    n_dark_heralds: int
    n_coincidences: int
    p_s_hat: float
    p_sas_hat: float
    tau: float
    seed: int


# ---------------------------------------------------------------------------
# sampling


class _PairLaw(NamedTuple):
    """Per-setting-pair probabilities the kernel samples from."""

    p_d1: float            # herald lands on D1 given a real click
    p_t1_given_d: tuple    # P(T1 | D1), P(T1 | D2) given a successful readout
    p_read: float          # readout coincidence probability after a real herald
    p_background: float    # anti-Stokes click probability after a dark herald


def _pair_law(config: ExperimentConfig, tau: float, pair: SettingPair) -> _PairLaw:
    rho = effective_pair_state(config, config.m, tau)
    joint = np.clip(joint_probabilities(rho, pair.stokes, pair.anti_stokes), 0.0, None)
    p_det = joint.sum(axis=1)
    conditional = []
    for i in range(2):
        # a port with zero herald probability is never sampled; 0.5 keeps the
        # arithmetic finite
        conditional.append(joint[i, 0] / p_det[i] if p_det[i] > 0.0 else 0.5)
    total = p_det.sum()
    p_d1 = p_det[0] / total if total > 0.0 else 0.5
    p_read = config.gamma * config.eta_as
    p_background = min(
        1.0,
        config.dark_rate + config.beta * (config.m - 1) * config.chi * config.gamma * config.eta_as,
    )
    return _PairLaw(float(p_d1), (float(conditional[0]), float(conditional[1])), p_read, p_background)


def _simulate_chunk(gen: np.random.Generator, n: int, config: ExperimentConfig, law: _PairLaw):
    """Vectorized simulation of n trials.

    Fixed draw order (part of the reproducibility contract): per-bin
    excitation, per-bin Stokes detection, one detector-identity uniform,
    per-bin dark counts for D1 then D2 (drawn only when dark_rate > 0), one
    readout-success uniform, one readout-port uniform.
    Returns (heralded, first_bin, herald_true, herald_det, readout_det).
    """
    m = config.m
    excited = gen.random((n, m)) < config.chi
    true_click = excited & (gen.random((n, m)) < config.eta_d)
    u_identity = gen.random(n)
    if config.dark_rate > 0.0:
        dark1 = gen.random((n, m)) < config.dark_rate
        dark2 = gen.random((n, m)) < config.dark_rate
        any_click = true_click | dark1 | dark2
    else:
        dark1 = dark2 = None
        any_click = true_click
    u_read = gen.random(n)
    u_port = gen.random(n)

    heralded = any_click.any(axis=1)
    first_bin = np.argmax(any_click, axis=1)  # only meaningful where heralded
    rows = np.arange(n)
    # a real click in the herald bin wins detector identity over a simultaneous
    # dark count; dark-only bins are dark heralds
    herald_true = heralded & true_click[rows, first_bin]

    herald_det = np.zeros(n, dtype=np.int8)
    herald_det[herald_true] = np.where(u_identity[herald_true] < law.p_d1, 1, 2)
    dark_herald = heralded & ~herald_true
    if dark1 is not None:
        d1 = dark1[rows, first_bin]
        d2 = dark2[rows, first_bin]
        only1 = dark_herald & d1 & ~d2
        only2 = dark_herald & d2 & ~d1
        both = dark_herald & d1 & d2
        herald_det[only1] = 1
        herald_det[only2] = 2
        herald_det[both] = np.where(u_identity[both] < 0.5, 1, 2)

    readout_det = np.zeros(n, dtype=np.int8)
    if herald_true.any():
        mask = herald_true
        success = u_read[mask] < law.p_read
        p_t1 = np.asarray(law.p_t1_given_d)[herald_det[mask] - 1]
        port = np.where(u_port[mask] < p_t1, 1, 2)
        readout_det[mask] = np.where(success, port, 0)
    if dark_herald.any():
        # accidental anti-Stokes click after a dark herald: unpolarized
        success = u_read[dark_herald] < law.p_background
        port = np.where(u_port[dark_herald] < 0.5, 1, 2)
        readout_det[dark_herald] = np.where(success, port, 0)

    return heralded, first_bin, herald_true, herald_det, readout_det


def _chunk_counts(gen, n, config, law, m):
    """Counts for one chunk: (c11, c12, c21, c22, n_d1, n_d2, n_total,
    n_dark) plus the herald-bin histogram."""
    heralded, first_bin, herald_true, herald_det, readout_det = _simulate_chunk(gen, n, config, law)
    d1 = herald_det == 1
    d2 = herald_det == 2
    t1 = readout_det == 1
    t2 = readout_det == 2
    counts = (
        int(np.count_nonzero(d1 & t1)),
        int(np.count_nonzero(d1 & t2)),
        int(np.count_nonzero(d2 & t1)),
        int(np.count_nonzero(d2 & t2)),
        int(np.count_nonzero(d1)),
        int(np.count_nonzero(d2)),
        int(n),
        int(np.count_nonzero(heralded & ~herald_true)),
    )
    histogram = np.bincount(first_bin[heralded], minlength=m).astype(np.int64)
    return counts, histogram


def run_trial(
    config: ExperimentConfig,
    tau: float,
    pair: SettingPair,
    rng: np.random.Generator,
    trial_index: int = 0,
) -> TrialRecord:
    """Simulate one write train and return its TrialRecord.

    rng must be a stream dedicated to this trial (see derive_stream); the
    draw order is documented in _simulate_chunk.
    """
    if tau < 0.0:
        raise ValueError(f"storage time must be non-negative, got {tau}")
    law = _pair_law(config, tau, pair)
    heralded, first_bin, herald_true, herald_det, readout_det = _simulate_chunk(
        rng, 1, config, law
    )
    if not heralded[0]:
        return TrialRecord(trial_index, None, None, False, None, tau)
    readout = int(readout_det[0])
    return TrialRecord(
        trial_index=trial_index,
        herald_bin=int(first_bin[0]) + 1,
        herald_detector=int(herald_det[0]),
        herald_was_dark=not bool(herald_true[0]),
        readout_detector=readout if readout else None,
        storage_time=tau,
    )


def _chunk_sizes(n_trials: int) -> Iterable[tuple[int, int]]:
    chunk_index = 0
    remaining = n_trials
    while remaining > 0:
        size = CHUNK_TRIALS if remaining >= CHUNK_TRIALS else remaining
        yield chunk_index, size
        chunk_index += 1
        remaining -= size


def run_batch(plan: RunPlan, n_threads: int = 1) -> BatchResult:
    """Run n_trials write trains per analyzer setting pair.

    n_threads only changes wall-clock time: work is split into fixed chunks
    with chunk-keyed RNG streams and the integer counts are summed, so the
    output is bitwise identical for any thread count. Totals accumulate in
    Python integers, which cannot overflow.

    p_s_hat is heralds/trials over the whole batch. p_sas_hat is
    coincidences/trials restricted to H/V-basis setting pairs when the plan
    contains any (readout success is polarization independent in this model,
    so other pairs estimate the same number); otherwise all pairs count.
    """
    if n_threads < 1:
        raise ValueError(f"thread count must be at least 1, got {n_threads}")
    config = plan.config
    m = config.m
    laws = [_pair_law(config, plan.tau, pair) for pair in plan.settings]

    tasks = [
        (s_idx, chunk_idx, size)
        for s_idx in range(len(plan.settings))
        for chunk_idx, size in _chunk_sizes(plan.n_trials)
    ]

    def run_task(task):
        s_idx, chunk_idx, size = task
        gen = derive_stream(plan.seed, _DOMAIN_TRIALS, s_idx, chunk_idx)
        return s_idx, _chunk_counts(gen, size, config, laws[s_idx], m)

    totals = [[0] * 8 for _ in plan.settings]
    histogram = np.zeros(m, dtype=np.int64)
    if n_threads == 1:
        results = map(run_task, tasks)
    else:
        pool = ThreadPoolExecutor(max_workers=n_threads)
        results = pool.map(run_task, tasks)
    try:
        for s_idx, (counts, hist) in results:
            acc = totals[s_idx]
            for i, value in enumerate(counts):
                acc[i] += value
            histogram += hist
    finally:
        if n_threads > 1:
            pool.shutdown()

    table = CoincidenceTable()
    n_heralds = 0
    n_dark = 0
    n_coincidences = 0
    hv_coincidences = 0
    hv_trials = 0
    for pair, acc in zip(plan.settings, totals):
        row = CoincidenceRow(
            pair,
            c_d1t1=acc[0], c_d1t2=acc[1], c_d2t1=acc[2], c_d2t2=acc[3],
            n_d1=acc[4], n_d2=acc[5], n_total=acc[6],
        )
        row.validate()
        table.rows.append(row)
        n_heralds += acc[4] + acc[5]
        n_dark += acc[7]
        n_coincidences += row.n_coincidences
        if pair == HV_PAIR:
            hv_coincidences += row.n_coincidences
            hv_trials += acc[6]

    n_trials_total = plan.n_trials * len(plan.settings)
    if hv_trials:
        p_sas_hat = hv_coincidences / hv_trials
    else:
        p_sas_hat = n_coincidences / n_trials_total
    return BatchResult(
        table=table,
        herald_bin_histogram=histogram,
        n_trials_total=n_trials_total,
        n_heralds=n_heralds,
        n_dark_heralds=n_dark,
        n_coincidences=n_coincidences,
        p_s_hat=n_heralds / n_trials_total,
        p_sas_hat=p_sas_hat,
        tau=plan.tau,
        seed=plan.seed,
    )


def run_coincidence_batch(
    config: ExperimentConfig,
    tau: float,
    settings: Sequence[SettingPair],
    n_coincidences: int,
    seed: int,
) -> CoincidenceTable:
    """Sample n heralded coincidences per setting pair directly.

    This draws from the conditional law of run_batch given a real herald and
    a successful readout, P(D_i, T_j) = Tr[rho_eff (P_i x Q_j)], as one
    multinomial per pair. Use it where published statistics are quoted per
    heralded coincidence; the full per-trial engine would need about
    1/(p_s gamma eta_as) trials per coincidence to reach the same counts.
    Dark heralds are not part of the conditional law.
    """
    if n_coincidences < 1:
        raise ValueError(f"n_coincidences must be at least 1, got {n_coincidences}")
    if tau < 0.0:
        raise ValueError(f"storage time must be non-negative, got {tau}")
    settings = tuple(settings)
    if not settings:
        raise ValueError("need at least one analyzer setting pair")
    rho = effective_pair_state(config, config.m, tau)
    table = CoincidenceTable()
    for s_idx, pair in enumerate(settings):
        joint = np.clip(joint_probabilities(rho, pair.stokes, pair.anti_stokes), 0.0, None)
        probabilities = (joint / joint.sum()).ravel()
        gen = derive_stream(seed, _DOMAIN_COINCIDENCE, s_idx, 0)
        c11, c12, c21, c22 = (int(v) for v in gen.multinomial(n_coincidences, probabilities))
        row = CoincidenceRow(
            pair,
            c_d1t1=c11, c_d1t2=c12, c_d2t1=c21, c_d2t2=c22,
            n_d1=c11 + c12, n_d2=c21 + c22, n_total=n_coincidences,
        )
        row.validate()
        table.rows.append(row)
    return table
