"""Exhaustive n-of-m projection-angle search.

Every n-subset of the candidate angles is evaluated with the shared
reconstruction-correlation objective, in lexicographic subset order; ties are
broken toward the lexicographically smallest angle tuple, so the result does
not depend on evaluation scheduling.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .fitness import CorrelationScore, reconstruction_fitness
from .image_io import GrayImage
from .radon import AngleSet

DEFAULT_BUDGET_CAP = 10_000

# (evaluation index starting at 1, best-so-far score or None while undefined)
History = list[tuple[int, float | None]]


class BudgetExceededError(ValueError):
    """Raised when a search would exceed its evaluation budget."""


@dataclass(frozen=True)
class SearchResult:
    best_angles: AngleSet
    best_score: CorrelationScore
    evaluations: int
    history: tuple[tuple[int, float | None], ...]

    def to_json_dict(self) -> dict:
        return {
            "best_angles": list(self.best_angles),
            "best_angles_rounded": list(self.best_angles.rounded()),
            "best_score": self.best_score.value,
            "evaluations": self.evaluations,
            "history": [[i, s] for i, s in self.history],
        }


def count_combinations(n: int, m: int) -> int:
    """Exact binomial coefficient C(m, n)."""
    if n < 0 or m < 0:
        raise ValueError("counts must be non-negative")
    if n > m:
        raise ValueError(f"cannot choose {n} angles out of {m}")
    return math.comb(m, n)


def _fold_history(scores: list[CorrelationScore]) -> tuple[History, int, float]:
    history: History = []
    best = -math.inf
    best_index = -1
    for i, score in enumerate(scores):
        r = score.ranking_value()
        if r > best:
            best = r
            best_index = i
        history.append((i + 1, None if best == -math.inf else best))
    return history, best_index, best


def exhaustive_search(
    img: GrayImage,
    n: int,
    candidates: AngleSet,
    *,
    budget_cap: int = DEFAULT_BUDGET_CAP,
    jobs: int = 1,
) -> SearchResult:
    """Evaluate every n-subset of ``candidates`` and return the best.

    The subset count must not exceed ``budget_cap`` (brute force over all 180
    whole-degree angles is deliberately refused).  ``jobs`` > 1 evaluates
    subsets concurrently; the reduction stays in lexicographic order, so the
    result is identical at any job count.
    """
    if n < 1:
        raise ValueError("must select at least one angle")
    total = count_combinations(n, len(candidates))
    if total > budget_cap:
        raise BudgetExceededError(
            f"{total} combinations exceed the budget cap of {budget_cap}; "
            "raise the cap or use the evolutionary search"
        )
    subsets = [AngleSet(c) for c in itertools.combinations(candidates.angles, n)]

    def evaluate(angles: AngleSet) -> CorrelationScore:
        return reconstruction_fitness(img, angles)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            scores = list(pool.map(evaluate, subsets))
    else:
        scores = [evaluate(s) for s in subsets]

    history, best_index, _ = _fold_history(scores)
    if best_index < 0:
        best_index = 0  # every subset undefined: keep the first for determinism
    return SearchResult(
        best_angles=subsets[best_index],
        best_score=scores[best_index],
        evaluations=total,
        history=tuple(history),
    )


def write_result_json(result: SearchResult, path: str | os.PathLike, extra: dict | None = None) -> None:
    payload = result.to_json_dict()
    if extra:
        payload.update(extra)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def write_history_csv(history, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["evaluation", "best_so_far"])
        for i, score in history:
            writer.writerow([i, "" if score is None else repr(score)])
