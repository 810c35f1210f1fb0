"""Micro differential evolution over projection-angle genomes.

A tiny-population DE/rand/1 optimizer with binomial crossover and one-to-one
selection searches the continuous angle space [0, 180) for the n-angle subset
whose filtered back-projection best correlates with the source image.  Fitness
is always computed on a quantized copy of the genome (distinct grid angles);
the genome itself stays real-valued.

Determinism: every random draw comes from a generator keyed on
(seed, generation, individual), so results are byte-identical across reruns
and across any ``jobs`` setting.  Per individual and generation the draws are,
in order: the three partner indices, the forced crossover gene, then one
uniform per gene.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .fitness import CorrelationScore, reconstruction_fitness
from .image_io import GrayImage
from .radon import AngleSet
from .search import History, SearchResult

DIFFERENTIAL_WEIGHT = 0.5
CROSSOVER_RATE = 0.9
DEFAULT_STEP = 10.0  # degrees; decoded angles land on multiples of this


@dataclass(frozen=True)
class DEConfig:
    """Knobs for one optimizer run.

    ``step`` sets the fitness grid: genomes are decoded to multiples of
    ``step`` degrees, so 10 searches the 18 round-number angles, 1.0 searches
    whole degrees, and 11.25 restricts the search to the 16-angle equidistant
    grid.  ``value_to_reach`` stops the run early once the best correlation
    reaches it.
    """

    pop_size: int
    nfc_max: int
    f: float = DIFFERENTIAL_WEIGHT
    cr: float = CROSSOVER_RATE
    step: float = DEFAULT_STEP
    seed: int = 0
    value_to_reach: float | None = None

    def __post_init__(self) -> None:
        if self.pop_size < 4:
            raise ValueError("pop_size must be at least 4 for DE/rand/1")
        if self.nfc_max < self.pop_size:
            raise ValueError("nfc_max cannot be smaller than the population")
        if not 0.0 < self.f <= 2.0:
            raise ValueError("differential weight must lie in (0, 2]")
        if not 0.0 <= self.cr <= 1.0:
            raise ValueError("crossover rate must lie in [0, 1]")
        if not 0.0 < self.step <= 180.0:
            raise ValueError("step must lie in (0, 180]")
        if abs(180.0 / self.step - round(180.0 / self.step)) > 1e-9:
            raise ValueError("step must divide 180 evenly")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def n_levels(self) -> int:
        """Number of distinct grid angles the decoder can emit."""
        return round(180.0 / self.step)


def default_config(n_angles: int, *, step: float = DEFAULT_STEP, seed: int = 0) -> DEConfig:
    """Micro-population settings sized for 4- and 8-angle searches."""
    if n_angles <= 4:
        return DEConfig(pop_size=6, nfc_max=300, step=step, seed=seed)
    return DEConfig(pop_size=10, nfc_max=400, step=step, seed=seed)


def decode_genome(genome: np.ndarray, step: float = DEFAULT_STEP) -> AngleSet:
    """Quantize a real-valued genome to distinct grid angles in [0, 180).

    Each gene snaps to the nearest multiple of ``step`` (half-up; values that
    round to 180 wrap to 0).  A gene whose slot is already taken advances one
    slot at a time, wrapping at 180, until it finds a free one.  The result
    is sorted ascending; the genome itself is never altered.
    """
    used: set[float] = set()
    for g in genome:
        q = (math.floor(float(g) / step + 0.5) * step) % 180.0
        while q in used:
            q = (q + step) % 180.0
        used.add(q)
    return AngleSet(used)


def _reflect(values: np.ndarray) -> np.ndarray:
    """Fold arbitrary reals back into [0, 180) by reflection at 0 and 180."""
    t = np.mod(values, 360.0)
    t = np.where(t >= 180.0, 360.0 - t, t)
    return np.where(t >= 180.0, 0.0, t)


def _rng_for(seed: int, generation: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(generation, index)))


def mde_optimize(
    img: GrayImage,
    n: int,
    cfg: DEConfig,
    *,
    jobs: int = 1,
) -> SearchResult:
    """Search for the n angles whose reconstruction best matches ``img``.

    Exactly ``cfg.nfc_max`` fitness evaluations are consumed (fewer only when
    ``value_to_reach`` fires): the initial population costs ``pop_size`` and
    each generation costs ``pop_size`` more, with the last generation
    truncated to whatever budget remains.  Selection keeps the trial on ties,
    so the population can drift across plateaus.
    """
    if n < 1:
        raise ValueError("must select at least one angle")
    if n > cfg.n_levels:
        raise ValueError(f"cannot place {n} distinct angles on a {cfg.n_levels}-slot grid")

    def evaluate(genome: np.ndarray) -> tuple[AngleSet, CorrelationScore]:
        angles = decode_genome(genome, cfg.step)
        return angles, reconstruction_fitness(img, angles)

    def eval_all(batch: list[np.ndarray]) -> list[tuple[AngleSet, CorrelationScore]]:
        if jobs > 1 and len(batch) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                return list(pool.map(evaluate, batch))
        return [evaluate(g) for g in batch]

    history: History = []
    evaluations = 0
    best_rank = -math.inf
    best_angles: AngleSet | None = None
    best_score: CorrelationScore | None = None
    stop = False

    def record(angles: AngleSet, score: CorrelationScore) -> None:
        nonlocal evaluations, best_rank, best_angles, best_score, stop
        evaluations += 1
        r = score.ranking_value()
        if best_angles is None or r > best_rank:
            best_rank = r
            best_angles = angles
            best_score = score
        history.append((evaluations, None if best_rank == -math.inf else best_rank))
        if cfg.value_to_reach is not None and best_rank >= cfg.value_to_reach:
            stop = True

    genomes = [
        _rng_for(cfg.seed, 0, i).uniform(0.0, 180.0, n)
        for i in range(cfg.pop_size)
    ]
    scores: list[CorrelationScore] = []
    for (angles, score) in eval_all(genomes):
        record(angles, score)
        scores.append(score)
        if stop:
            break

    generation = 1
    while not stop and evaluations < cfg.nfc_max:
        k = min(cfg.pop_size, cfg.nfc_max - evaluations)
        trials: list[np.ndarray] = []
        for i in range(k):
            rng = _rng_for(cfg.seed, generation, i)
            others = [j for j in range(cfg.pop_size) if j != i]
            r1, r2, r3 = rng.choice(others, size=3, replace=False)
            mutant = _reflect(genomes[r1] + cfg.f * (genomes[r2] - genomes[r3]))
            j_rand = int(rng.integers(n))
            mask = rng.random(n) < cfg.cr
            mask[j_rand] = True
            trials.append(np.where(mask, mutant, genomes[i]))
        for i, (angles, score) in enumerate(eval_all(trials)):
            record(angles, score)
            if score.ranking_value() >= scores[i].ranking_value():
                genomes[i] = trials[i]
                scores[i] = score
            if stop:
                break
        generation += 1

    assert best_angles is not None and best_score is not None
    return SearchResult(
        best_angles=best_angles,
        best_score=best_score,
        evaluations=evaluations,
        history=tuple(history),
    )
