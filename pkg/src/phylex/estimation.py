"""Phylogeny-informed score completion.

Each generation every individual is directly evaluated on only a subset
of training cases. These routines fill in the remaining cases from the
nearest evaluated ancestor (lineage walk) or nearest evaluated relative
(breadth-first search), so selection can operate on the full case set.
A case with no evaluated source within the search bound receives the
configured fail score (the problem's worst attainable score).
"""

import enum
from dataclasses import dataclass

import numpy as np

from .core import ESTIMATED, EVALUATED, UNKNOWN, ScoreRecord
from .phylogeny import Phylogeny


class Mode(enum.Enum):
    NONE = "none"
    ANCESTOR = "ancestor"
    RELATIVE = "relative"


@dataclass(frozen=True)
class EstimatorConfig:
    mode: Mode
    depth_limit: int = 10
    fail_score: float = 0.0

    def __post_init__(self):
        if self.depth_limit < 0:
            raise ValueError("depth_limit must be non-negative")

    @property
    def miss_distance(self) -> int:
        """Sentinel distance recorded when estimation fails."""
        return self.depth_limit + 1


def estimate_case(phylo: Phylogeny, taxon_id: int, case_index: int,
                  cfg: EstimatorConfig) -> tuple[float, int]:
    """Estimate one case score; returns (score, source distance).

    A miss is reported as (fail_score, depth_limit + 1).
    """
    if cfg.mode is Mode.NONE:
        raise ValueError("estimation requested with mode None")
    if cfg.mode is Mode.ANCESTOR:
        found = phylo.nearest_evaluated_ancestor(taxon_id, case_index, cfg.depth_limit)
    else:
        found = phylo.nearest_evaluated_relative(taxon_id, case_index, cfg.depth_limit)
    if found is None:
        return cfg.fail_score, cfg.miss_distance
    return found


def complete_scores(phylo: Phylogeny, taxon_id: int, evaluated: dict,
                    num_cases: int, cfg: EstimatorConfig) -> ScoreRecord:
    """Build a full-length ScoreRecord for one individual.

    Directly evaluated positions keep their exact scores; the rest are
    estimated (mode Ancestor/Relative) or left Unknown (mode None).
    """
    scores = np.zeros(num_cases, dtype=np.float64)
    kind = np.full(num_cases, UNKNOWN, dtype=np.int8)
    distance = np.zeros(num_cases, dtype=np.int32)
    for case, score in evaluated.items():
        if not 0 <= case < num_cases:
            raise ValueError(f"evaluated case {case} out of range [0, {num_cases})")
        scores[case] = score
        kind[case] = EVALUATED

    if cfg.mode is Mode.NONE:
        return ScoreRecord(scores, kind, distance)

    missing = np.flatnonzero(kind == UNKNOWN).tolist()
    if cfg.mode is Mode.ANCESTOR:
        hits = fill_from_ancestors(phylo, taxon_id, missing, cfg.depth_limit)
    else:
        hits = fill_from_relatives(phylo, taxon_id, missing, cfg.depth_limit)
    for case in missing:
        kind[case] = ESTIMATED
        hit = hits.get(case)
        if hit is None:
            scores[case] = cfg.fail_score
            distance[case] = cfg.miss_distance
        else:
            scores[case], distance[case] = hit
    return ScoreRecord(scores, kind, distance)


def fill_from_ancestors(phylo, taxon_id, missing, depth_limit):
    """Single lineage walk filling all missing cases; equivalent to a
    per-case nearest_evaluated_ancestor query."""
    hits = {}
    remaining = set(missing)
    tax = phylo.taxa.get(taxon_id)
    if tax is None:
        raise ValueError(f"unknown taxon {taxon_id}")
    depth = 0
    while tax is not None and depth <= depth_limit and remaining:
        record = tax.eval_record
        if record:
            found = remaining.intersection(record)
            for case in found:
                hits[case] = (record[case], depth)
            remaining -= found
        tax = phylo.taxa.get(tax.parent) if tax.parent is not None else None
        depth += 1
    return hits

def fill_from_relatives(phylo, taxon_id, missing, depth_limit):
    """Single breadth-first sweep filling all missing cases. Visiting
    frontiers in ascending-id order reproduces the per-case BFS tie-break
    (nearest first, then lowest taxon id)."""
    if taxon_id not in phylo.taxa:
        raise ValueError(f"unknown taxon {taxon_id}")
    hits = {}
    remaining = set(missing)
    visited = {taxon_id}
    frontier = [taxon_id]
    distance = 0
    while frontier and distance <= depth_limit and remaining:
        for tid in sorted(frontier):
            record = phylo.taxa[tid].eval_record
            if not record:
                continue
            found = remaining.intersection(record)
            for case in found:
                hits[case] = (record[case], distance)
            remaining -= found
            if not remaining:
                break
        nxt = []
        for tid in frontier:
            tax = phylo.taxa[tid]
            neighbors = list(tax.children)
            if tax.parent is not None and tax.parent in phylo.taxa:
                neighbors.append(tax.parent)
            for nid in neighbors:
                if nid not in visited:
                    visited.add(nid)
                    nxt.append(nid)
        frontier = nxt
        distance += 1
    return hits


def estimation_stats(record: ScoreRecord, cfg: EstimatorConfig):
    """(hits, failures, mean hit distance or None) for one ScoreRecord."""
    est = record.kind == ESTIMATED
    fails = int((est & (record.distance > cfg.depth_limit)).sum())
    hit_mask = est & (record.distance <= cfg.depth_limit)
    hits = int(hit_mask.sum())
    mean_dist = float(record.distance[hit_mask].mean()) if hits else None
    return hits, fails, mean_dist
