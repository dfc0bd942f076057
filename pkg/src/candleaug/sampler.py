"""Label-preserving sample generation by local perturbation of encoded windows.

Each episode multiplies every diagonal entry of every channel by an
independent uniform scale near 1, rebuilds the off-diagonals so the matrix
stays a consistent angular field, decodes back to prices, and re-encodes.
A candidate is kept only when the classifier still assigns the seed's label;
the working tensor is restored to the original every reset_period episodes
so drift stays bounded.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import _kernels
from .classifier import Classifier
from .gaf import ConstantSeries, GafTensor, decode_tensor, encode_window
from .ohlc import CandleWindow, PatternLabel


class SamplerError(ValueError):
    pass


class SeedUnlabeled(SamplerError):
    pass


class BudgetExhausted(RuntimeError):
    """Raised when the episode budget runs out before the target is met.

    Carries the partial sample set and the per-seed diagnostics.
    """

    def __init__(self, message: str, samples: list["GeneratedSample"], report: "GenerateReport"):
        super().__init__(message)
        self.samples = samples
        self.report = report


@dataclass(frozen=True)
class SamplerConfig:
    scale_low: float = 0.99
    scale_high: float = 1.01
    reset_period: int = 3
    episodes: int = 30
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 < self.scale_low <= 1.0 <= self.scale_high):
            raise ValueError("need 0 < scale_low <= 1 <= scale_high")
        if self.reset_period < 1:
            raise ValueError("reset_period must be >= 1")
        if self.episodes < 0:
            raise ValueError("episodes must be >= 0")


@dataclass(frozen=True)
class GeneratedSample:
    window: CandleWindow
    label: PatternLabel
    source_index: int
    episode: int


@dataclass(frozen=True)
class EpisodeState:
    """Working tensor captured at the top of an episode, before perturbing."""

    episode: int
    was_reset: bool
    tensor: GafTensor


@dataclass
class SeedStats:
    episodes: int = 0
    accepted: int = 0
    taken: int = 0
    error: str | None = None

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.episodes if self.episodes else 0.0


@dataclass
class GenerateReport:
    per_seed: list[SeedStats] = field(default_factory=list)
    episodes_total: int = 0
    passes: int = 0


def perturb_diagonals(t: GafTensor, rng: np.random.Generator, cfg: SamplerConfig) -> GafTensor:
    """Scale each diagonal entry by an independent uniform draw, clamp to the
    cosine range, and rebuild every off-diagonal from the implied series so
    the output is again a consistent angular field.

    Channels are processed in open/high/low/close order, T draws each, so the
    draw sequence is reproducible for a given rng state.
    """
    channels = np.empty_like(t.channels)
    for ci in range(t.channels.shape[0]):
        diag = np.diagonal(t.channels[ci])
        scales = rng.uniform(cfg.scale_low, cfg.scale_high, size=diag.shape[0])
        new_diag = np.clip(scales * diag, -1.0, 1.0)
        values = np.sqrt((new_diag + 1.0) / 2.0)
        channels[ci] = _kernels.gaf_outer(values)
    return GafTensor(channels, t.scales)


def run_with_trace(
    seed_window: CandleWindow,
    clf: Classifier,
    cfg: SamplerConfig,
    source_index: int = 0,
) -> tuple[list[GeneratedSample], list[EpisodeState]]:
    """run() plus a per-episode capture of the pre-perturbation working tensor."""
    original = encode_window(seed_window)
    seed_label = clf.predict(original)
    if seed_label is PatternLabel.NONE:
        raise SeedUnlabeled("seed window carries no pattern under this classifier")

    rng = np.random.default_rng(cfg.seed)
    working = original.copy()
    counter = 0
    samples: list[GeneratedSample] = []
    trace: list[EpisodeState] = []
    for episode in range(1, cfg.episodes + 1):
        was_reset = counter == cfg.reset_period
        if was_reset:
            working = original.copy()
            counter = 0
        trace.append(EpisodeState(episode, was_reset, working.copy()))
        working = perturb_diagonals(working, rng, cfg)
        counter += 1
        candidate = decode_tensor(working)
        try:
            reencoded = encode_window(candidate)
        except ConstantSeries:
            continue  # degenerate inversion; treat as a rejection
        if clf.predict(reencoded) is seed_label:
            samples.append(GeneratedSample(candidate, seed_label, source_index, episode))
    return samples, trace


def run(
    seed_window: CandleWindow,
    clf: Classifier,
    cfg: SamplerConfig,
    source_index: int = 0,
) -> list[GeneratedSample]:
    """Run cfg.episodes perturbation episodes from one seed window.

    Perturbations accumulate between resets; every emitted sample's window
    re-encodes to a tensor the classifier labels the same as the seed.
    """
    return run_with_trace(seed_window, clf, cfg, source_index)[0]


def _derived_seed(base: int, pass_idx: int, seed_idx: int) -> int:
    return int(np.random.SeedSequence([base, pass_idx, seed_idx]).generate_state(1)[0])


def generate_dataset(
    seeds: Sequence[tuple[CandleWindow, PatternLabel]],
    clf: Classifier,
    cfg: SamplerConfig,
    target: int,
    episode_budget: int | None = None,
) -> tuple[list[GeneratedSample], GenerateReport]:
    """Round-robin the sampler across seed windows until `target` samples.

    The target is split evenly across the distinct labels present in seeds
    (remainder to the lowest codes), so a balanced seed set yields a balanced
    output. Seeds whose prediction disagrees with their stored label are
    recorded as rejected and skipped. Raises BudgetExhausted - carrying the
    partial set and per-seed report - when the episode budget runs out or no
    seed can make progress.
    """
    if target < 1:
        raise ValueError("target must be >= 1")
    if not seeds:
        raise ValueError("need at least one seed window")
    budget = episode_budget if episode_budget is not None else max(100 * target, 5000)

    labels = sorted({label for _, label in seeds if label is not PatternLabel.NONE})
    if not labels:
        raise SeedUnlabeled("no seed carries a pattern label")
    quota = {
        label: target // len(labels) + (1 if i < target % len(labels) else 0)
        for i, label in enumerate(labels)
    }
    counts = {label: 0 for label in labels}
    report = GenerateReport(per_seed=[SeedStats() for _ in seeds])
    samples: list[GeneratedSample] = []
    verified: dict[int, bool] = {}

    while len(samples) < target:
        runnable = False
        for i, (window, label) in enumerate(seeds):
            if len(samples) >= target or report.episodes_total >= budget:
                break
            stats = report.per_seed[i]
            if stats.error is not None:
                continue
            if label is PatternLabel.NONE:
                stats.error = "SeedUnlabeled"
                continue
            if counts[label] >= quota[label]:
                continue
            if i not in verified:
                try:
                    pred = clf.predict(encode_window(window))
                except ConstantSeries:
                    pred = PatternLabel.NONE
                verified[i] = pred is label
                if not verified[i]:
                    stats.error = "SeedUnlabeled" if pred is PatternLabel.NONE else "SeedRejected"
                    continue
            elif not verified[i]:
                continue
            runnable = True
            episodes = min(cfg.episodes, budget - report.episodes_total)
            if episodes == 0:
                break
            run_cfg = replace(cfg, episodes=episodes,
                              seed=_derived_seed(cfg.seed, report.passes, i))
            out = run(window, clf, run_cfg, source_index=i)
            stats.episodes += episodes
            stats.accepted += len(out)
            report.episodes_total += episodes
            take = min(len(out), quota[label] - counts[label], target - len(samples))
            samples.extend(out[:take])
            counts[label] += take
            stats.taken += take
        report.passes += 1
        if len(samples) >= target:
            break
        if report.episodes_total >= budget or not runnable:
            raise BudgetExhausted(
                f"collected {len(samples)}/{target} samples in "
                f"{report.episodes_total} episodes",
                samples,
                report,
            )
    return samples, report
