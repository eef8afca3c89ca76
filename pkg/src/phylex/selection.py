"""Standard, down-sampled, and cohort lexicase parent selection.

Plans describe which training cases each individual is directly
evaluated on this generation; selection itself operates on completed
ScoreRecords. Case sets and candidate pools are always canonicalized to
ascending order before shuffling, so level-1.0 down-sampling and
single-cohort partitioning reproduce standard lexicase bit for bit
under a shared seed.
"""

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .core import RngStream


class PlanKind(enum.Enum):
    FULL = "full"
    DOWNSAMPLE = "downsample"
    COHORT = "cohort"


@dataclass
class SelectionPlan:
    kind: PlanKind
    num_cases: int
    subsample_level: float
    sampled_cases: Optional[np.ndarray] = None        # DOWNSAMPLE/FULL: sorted case ids
    cohort_of_individual: Optional[np.ndarray] = None  # COHORT: individual -> cohort
    cohort_members: list = field(default_factory=list)   # COHORT: sorted individual ids
    cohort_cases: list = field(default_factory=list)     # COHORT: sorted case ids

    @property
    def num_cohorts(self) -> int:
        return len(self.cohort_cases)

    def cases_for_individual(self, index: int) -> np.ndarray:
        """Cases the individual is directly evaluated on this generation."""
        if self.kind is PlanKind.COHORT:
            return self.cohort_cases[self.cohort_of_individual[index]]
        return self.sampled_cases

    def evaluations_per_generation(self, pop_size: int) -> int:
        """Closed-form direct-evaluation count for budget accounting."""
        if self.kind is PlanKind.COHORT:
            return sum(len(m) * len(c) for m, c in zip(self.cohort_members, self.cohort_cases))
        return pop_size * len(self.sampled_cases)


def downsample_size(num_cases: int, level: float) -> int:
    return max(1, round(level * num_cases))


def make_full_plan(num_cases: int) -> SelectionPlan:
    return SelectionPlan(PlanKind.FULL, num_cases, 1.0,
                         sampled_cases=np.arange(num_cases, dtype=np.int64))


def make_downsample_plan(num_cases: int, level: float, rng: RngStream) -> SelectionPlan:
    """Fresh uniform sample (without replacement) of the training set."""
    if num_cases < 1:
        raise ValueError("num_cases must be >= 1")
    if not 0.0 < level <= 1.0:
        raise ValueError("subsample level must be in (0, 1]")
    size = downsample_size(num_cases, level)
    sampled = np.sort(rng.subsampling.choice(num_cases, size=size, replace=False))
    return SelectionPlan(PlanKind.DOWNSAMPLE, num_cases, level,
                         sampled_cases=sampled.astype(np.int64))


def make_cohort_plan(pop_size: int, num_cases: int, level: float,
                     rng: RngStream) -> SelectionPlan:
    """Randomly partition population and training set into k = round(1/level)
    paired cohorts, each split as evenly as possible (sizes differ by <= 1)."""
    if not 0.0 < level <= 1.0:
        raise ValueError("subsample level must be in (0, 1]")
    k = max(1, round(1.0 / level))
    if k > pop_size or k > num_cases:
        raise ValueError(f"{k} cohorts cannot partition pop={pop_size}, cases={num_cases}")
    members = _partition(pop_size, k, rng)
    cases = _partition(num_cases, k, rng)
    cohort_of = np.empty(pop_size, dtype=np.int64)
    for i, group in enumerate(members):
        cohort_of[group] = i
    return SelectionPlan(PlanKind.COHORT, num_cases, level,
                         cohort_of_individual=cohort_of,
                         cohort_members=members, cohort_cases=cases)


def _partition(n: int, k: int, rng: RngStream) -> list:
    perm = rng.subsampling.permutation(n)
    base, extra = divmod(n, k)
    groups = []
    at = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        groups.append(np.sort(perm[at:at + size]).astype(np.int64))
        at += size
    return groups


def lexicase_survivors(scores: np.ndarray, unknown: np.ndarray,
                       candidates: np.ndarray, case_order: np.ndarray) -> np.ndarray:
    """Survivor pool after applying every case in order (kernel-backed)."""
    return kernels.lexicase_filter(scores, unknown, candidates, case_order)


def lexicase_select_one(candidates, case_order, rng: RngStream):
    """Select one parent from (id, ScoreRecord) pairs.

    Cases apply in the given order; at each case the pool keeps exact
    ties with the pool maximum, skipping any case where some pool member
    is Unknown. The final survivor is drawn uniformly at random.
    """
    if not candidates:
        raise ValueError("empty candidate pool")
    ids = [cid for cid, _ in candidates]
    scores = np.ascontiguousarray(np.stack([rec.scores for _, rec in candidates]))
    unknown = np.ascontiguousarray(
        np.stack([rec.unknown_mask() for _, rec in candidates]).astype(np.uint8))
    order = np.asarray(case_order, dtype=np.int64)
    survivors = lexicase_survivors(scores, unknown, np.arange(len(ids), dtype=np.int64), order)
    pick = survivors[rng.tiebreak.integers(len(survivors))]
    return ids[pick]


def select_parents(records, plan: SelectionPlan, estimation_active: bool,
                   n_parents: int, rng: RngStream) -> np.ndarray:
    """Select n_parents individual indices under the given plan.

    Full/down-sample: every selection runs over the whole population with
    a fresh shuffle of the usable case set (the sampled cases when
    estimation is off, all cases when it is on). Cohort: parent slots are
    apportioned evenly across cohorts (remainder to random cohorts) and
    each selection runs within its cohort, over the cohort's cases
    (estimation off) or all cases (estimation on).
    """
    scores = np.ascontiguousarray(np.stack([rec.scores for rec in records]))
    unknown = np.ascontiguousarray(
        np.stack([rec.unknown_mask() for rec in records]).astype(np.uint8))
    return select_parents_from_matrices(scores, unknown, plan, estimation_active,
                                        n_parents, rng)


def select_parents_from_matrices(scores: np.ndarray, unknown: np.ndarray,
                                 plan: SelectionPlan, estimation_active: bool,
                                 n_parents: int, rng: RngStream) -> np.ndarray:
    """select_parents over prebuilt (P, T) score / unknown matrices."""
    if n_parents < 1:
        raise ValueError("n_parents must be >= 1")
    pop_size = scores.shape[0]
    all_cases = np.arange(plan.num_cases, dtype=np.int64)
    shuffle = rng.shuffle
    tiebreak = rng.tiebreak

    if plan.kind is not PlanKind.COHORT:
        case_set = all_cases if estimation_active else plan.sampled_cases
        candidates = np.arange(pop_size, dtype=np.int64)
        parents = np.empty(n_parents, dtype=np.int64)
        for slot in range(n_parents):
            order = case_set[shuffle.permutation(len(case_set))]
            survivors = lexicase_survivors(scores, unknown, candidates, order)
            parents[slot] = survivors[tiebreak.integers(len(survivors))]
        return parents

    k = plan.num_cohorts
    counts = np.full(k, n_parents // k, dtype=np.int64)
    remainder = n_parents - counts.sum()
    if remainder > 0:
        counts[rng.subsampling.choice(k, size=remainder, replace=False)] += 1
    parents = np.empty(n_parents, dtype=np.int64)
    slot = 0
    for i in range(k):
        candidates = plan.cohort_members[i]
        case_set = all_cases if estimation_active else plan.cohort_cases[i]
        for _ in range(counts[i]):
            order = case_set[shuffle.permutation(len(case_set))]
            survivors = lexicase_survivors(scores, unknown, candidates, order)
            parents[slot] = survivors[tiebreak.integers(len(survivors))]
            slot += 1
    return parents
