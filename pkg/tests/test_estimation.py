import numpy as np
import pytest

from phylex.core import ESTIMATED, EVALUATED, UNKNOWN
from phylex.estimation import (EstimatorConfig, Mode, complete_scores,
                               estimate_case, estimation_stats)
from phylex.phylogeny import Phylogeny

ANC = EstimatorConfig(Mode.ANCESTOR, depth_limit=10, fail_score=0.0)
REL = EstimatorConfig(Mode.RELATIVE, depth_limit=10, fail_score=0.0)


def test_mode_none_rejected():
    phylo = Phylogeny(2)
    a = phylo.register_birth("a")
    with pytest.raises(ValueError):
        estimate_case(phylo, a, 0, EstimatorConfig(Mode.NONE))


def test_own_record_wins_at_distance_zero():
    phylo = Phylogeny(2)
    a = phylo.register_birth("a")
    phylo.record_evaluation(a, 1, 0.6)
    assert estimate_case(phylo, a, 1, ANC) == (0.6, 0)
    assert estimate_case(phylo, a, 1, REL) == (0.6, 0)


def test_first_generation_fails_to_fail_score():
    phylo = Phylogeny(2)
    a = phylo.register_birth("a")
    cfg = EstimatorConfig(Mode.ANCESTOR, depth_limit=10, fail_score=-5.0)
    assert estimate_case(phylo, a, 0, cfg) == (-5.0, 11)


def test_cousin_distinguishes_modes():
    # root -> {parent -> start, uncle -> cousin}; only the cousin is evaluated.
    phylo = Phylogeny(2)
    root = phylo.register_birth("r")
    parent = phylo.register_birth("p", parent=root)
    uncle = phylo.register_birth("u", parent=root)
    start = phylo.register_birth("s", parent=parent)
    cousin = phylo.register_birth("c", parent=uncle)
    phylo.record_evaluation(cousin, 0, 0.9)
    assert estimate_case(phylo, start, 0, ANC) == (0.0, 11)  # off the lineage
    assert estimate_case(phylo, start, 0, REL) == (0.9, 4)


def test_complete_scores_mode_none_marks_unknown():
    phylo = Phylogeny(5)
    a = phylo.register_birth("a")
    rec = complete_scores(phylo, a, {0: 1.0, 3: 0.5}, 5, EstimatorConfig(Mode.NONE))
    assert list(rec.kind) == [EVALUATED, UNKNOWN, UNKNOWN, EVALUATED, UNKNOWN]
    assert rec.scores[0] == 1.0 and rec.scores[3] == 0.5


def test_complete_scores_fills_from_parent():
    phylo = Phylogeny(5)
    parent = phylo.register_birth("p")
    child = phylo.register_birth("c", parent=parent)
    for case in range(5):
        phylo.record_evaluation(parent, case, 10.0 + case)
    phylo.record_evaluation(child, 0, 99.0)
    rec = complete_scores(phylo, child, {0: 99.0}, 5, ANC)
    assert rec.kind[0] == EVALUATED and rec.scores[0] == 99.0
    assert (rec.kind[1:] == ESTIMATED).all()
    assert list(rec.scores[1:]) == [11.0, 12.0, 13.0, 14.0]
    assert (rec.distance[1:] == 1).all()


def test_depth_zero_exhausts_to_fail_score():
    phylo = Phylogeny(3)
    parent = phylo.register_birth("p")
    child = phylo.register_birth("c", parent=parent)
    phylo.record_evaluation(parent, 0, 1.0)
    cfg = EstimatorConfig(Mode.ANCESTOR, depth_limit=0, fail_score=0.0)
    rec = complete_scores(phylo, child, {}, 3, cfg)
    assert (rec.kind == ESTIMATED).all()
    assert (rec.scores == 0.0).all()
    assert (rec.distance == 1).all()  # depth_limit + 1 sentinel


def test_evaluated_positions_survive_estimation():
    phylo = Phylogeny(3)
    parent = phylo.register_birth("p")
    child = phylo.register_birth("c", parent=parent)
    for case in range(3):
        phylo.record_evaluation(parent, case, 0.123)
    rec = complete_scores(phylo, child, {1: 0.777}, 3, ANC)
    assert rec.scores[1] == 0.777 and rec.kind[1] == EVALUATED


def test_no_unknown_when_estimating():
    phylo = Phylogeny(4)
    a = phylo.register_birth("a")
    for cfg in (ANC, REL):
        rec = complete_scores(phylo, a, {2: 1.0}, 4, cfg)
        assert not rec.unknown_mask().any()


def build_random_annotated_chain(seed, length=12, num_cases=6):
    rng = np.random.default_rng(seed)
    phylo = Phylogeny(num_cases)
    ids = [phylo.register_birth("g0")]
    for i in range(1, length):
        ids.append(phylo.register_birth(f"g{i}", parent=ids[-1]))
    for tid in ids:
        for case in range(num_cases):
            if rng.random() < 0.25:
                phylo.record_evaluation(tid, case, float(rng.random()))
    return phylo, ids


@pytest.mark.parametrize("seed", range(8))
def test_monotone_refinement_in_depth(seed):
    phylo, ids = build_random_annotated_chain(seed)
    start = ids[-1]
    for case in range(phylo.num_cases):
        previous = None
        for depth in range(0, 14):
            cfg = EstimatorConfig(Mode.ANCESTOR, depth_limit=depth)
            score, dist = estimate_case(phylo, start, case, cfg)
            hit = dist <= depth
            if previous is not None and previous[0]:
                assert hit, "a hit must not flip back to a miss"
                assert (score, dist) == previous[1]
            if hit:
                previous = (True, (score, dist))


@pytest.mark.parametrize("seed", range(8))
def test_modes_agree_on_pure_chains(seed):
    phylo, ids = build_random_annotated_chain(seed)
    for tid in ids:
        for case in range(phylo.num_cases):
            for depth in (0, 2, 5, 10):
                anc = EstimatorConfig(Mode.ANCESTOR, depth_limit=depth)
                rel = EstimatorConfig(Mode.RELATIVE, depth_limit=depth)
                anc_hit = estimate_case(phylo, tid, case, anc)
                rel_hit = estimate_case(phylo, tid, case, rel)
                if tid == ids[-1]:  # leaf: no descendants, searches coincide
                    assert anc_hit == rel_hit


def test_complete_scores_matches_estimate_case():
    phylo, ids = build_random_annotated_chain(3)
    for cfg in (ANC, REL):
        rec = complete_scores(phylo, ids[-1], {0: 0.5}, phylo.num_cases, cfg)
        for case in range(1, phylo.num_cases):
            score, dist = estimate_case(phylo, ids[-1], case, cfg)
            assert rec.scores[case] == score
            assert rec.distance[case] == dist


def test_estimation_stats():
    phylo = Phylogeny(4)
    parent = phylo.register_birth("p")
    child = phylo.register_birth("c", parent=parent)
    phylo.record_evaluation(parent, 0, 1.0)
    cfg = EstimatorConfig(Mode.ANCESTOR, depth_limit=2)
    rec = complete_scores(phylo, child, {3: 1.0}, 4, cfg)
    hits, fails, mean_dist = estimation_stats(rec, cfg)
    assert hits == 1 and fails == 2
    assert mean_dist == 1.0
