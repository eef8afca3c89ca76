"""Generational loop: evaluation, score completion, selection,
reproduction, and phylogeny bookkeeping, with exact budget accounting.

Diagnostics runs stop on a generation cap; GP runs stop on a direct
training-case evaluation budget or when a program passes every training
and testing case. Estimated scores never count against the budget.

Run state is kept in population-by-case matrices; per-individual
estimation still walks the phylogeny, but everything else is batched.
"""

import csv
import dataclasses
import json
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import diagnostics, gp, kernels
from .core import (ESTIMATED, EVALUATED, GENE_MAX, UNKNOWN, RngStream,
                   mutate_gaussian_batch)
from .estimation import (EstimatorConfig, Mode, fill_from_ancestors,
                         fill_from_relatives)
from .phylogeny import Phylogeny
from .selection import (PlanKind, make_cohort_plan, make_downsample_plan,
                        make_full_plan, select_parents_from_matrices)

DIAGNOSTIC_PROBLEMS = ("contradictory", "multipath")
GP_PROBLEMS = ("median", "grade")

# Paper-parameterized defaults for the diagnostics substrate.
GENE_MUTATION_RATE = 0.007
GENE_MUTATION_SIGMA = 1.0

METRICS_COLUMNS = ("generation", "evaluations_used", "best_aggregate",
                   "satisfactory_coverage", "best_train_pass_count", "num_taxa",
                   "estimation_hits", "estimation_failures", "mean_estimate_distance")


class ConfigError(Exception):
    pass


@dataclass
class ExperimentConfig:
    problem: str
    seed: int
    pop_size: int
    subsampling: str = "full"          # full | downsample | cohort
    level: float = 1.0
    estimator: str = "none"            # none | ancestor | relative
    depth_limit: Optional[int] = None  # default: 10 diagnostics, 5 GP
    max_generations: Optional[int] = None
    max_evaluations: Optional[int] = None
    genome_length: int = 100
    gene_mutation_rate: float = GENE_MUTATION_RATE
    gene_mutation_sigma: float = GENE_MUTATION_SIGMA
    satisfaction_threshold: float = diagnostics.SATISFACTION_THRESHOLD
    output_dir: Optional[str] = None
    snapshot_interval: int = 0         # 0: snapshot only at termination
    collect_selections: bool = False   # keep per-generation parent arrays in the result

    def is_gp(self) -> bool:
        return self.problem in GP_PROBLEMS

    def effective_depth_limit(self) -> int:
        if self.depth_limit is not None:
            return self.depth_limit
        return 5 if self.is_gp() else 10

    def validate(self) -> None:
        if self.problem not in DIAGNOSTIC_PROBLEMS + GP_PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}")
        if self.subsampling not in ("full", "downsample", "cohort"):
            raise ConfigError(f"unknown subsampling {self.subsampling!r}")
        if self.estimator not in ("none", "ancestor", "relative"):
            raise ConfigError(f"unknown estimator {self.estimator!r}")
        if not 0.0 < self.level <= 1.0:
            raise ConfigError("level must be in (0, 1]")
        if self.pop_size < 1:
            raise ConfigError("pop_size must be >= 1")
        if self.is_gp():
            if self.max_evaluations is None or self.max_generations is not None:
                raise ConfigError("GP problems stop on max_evaluations (only)")
        else:
            if self.max_generations is None or self.max_evaluations is not None:
                raise ConfigError("diagnostic problems stop on max_generations (only)")
            if self.genome_length < 1:
                raise ConfigError("genome_length must be >= 1")


@dataclass
class BudgetLedger:
    evaluations_used: int = 0
    generations_completed: int = 0


@dataclass
class ExperimentResult:
    success: bool
    ledger: BudgetLedger
    final_metrics: dict
    output_files: list = field(default_factory=list)
    solution_generation: Optional[int] = None
    selection_trace: list = field(default_factory=list)


class Engine:
    """Holds all run state; drives one experiment to termination."""

    def __init__(self, config: ExperimentConfig):
        config.validate()
        self.cfg = config
        self.rng = RngStream(config.seed)
        self.ledger = BudgetLedger()
        self.is_gp = config.is_gp()

        if self.is_gp:
            self.problem = gp.build_problem(config.problem, self.rng)
            self.num_cases = len(self.problem.training)
            self.train_inputs, self.train_expected = self.problem.case_matrix(
                self.problem.training)
        else:
            self.problem = None
            self.num_cases = config.genome_length

        mode = Mode(config.estimator)
        self.estimator = EstimatorConfig(mode=mode,
                                         depth_limit=config.effective_depth_limit(),
                                         fail_score=0.0)
        self.phylo = Phylogeny(self.num_cases)
        self.programs = []           # GP only
        self.genes = None            # diagnostics only: (pop, G) matrix
        self.taxon_ids = []
        self._failed_solutions = set()
        self.solution = None
        self.solution_generation = None
        self.metrics_rows = []
        self.selection_trace = []
        self._init_population()

    def _init_population(self):
        gen = self.rng.mutation
        self.phylo.generation = 0
        if self.is_gp:
            for _ in range(self.cfg.pop_size):
                program = gp.random_program(gen, self.problem.max_len)
                self.programs.append(program)
                self.taxon_ids.append(
                    self.phylo.register_birth(gp.program_key(program), parent=None))
        else:
            self.genes = gen.random((self.cfg.pop_size, self.cfg.genome_length)) * GENE_MAX
            for row in self.genes:
                self.taxon_ids.append(
                    self.phylo.register_birth(row.tobytes(), parent=None))

    def _make_plan(self):
        if self.cfg.subsampling == "downsample":
            return make_downsample_plan(self.num_cases, self.cfg.level, self.rng)
        if self.cfg.subsampling == "cohort":
            return make_cohort_plan(self.cfg.pop_size, self.num_cases,
                                    self.cfg.level, self.rng)
        return make_full_plan(self.num_cases)

    def _evaluate_generation(self, generation: int):
        """Phases 1-3: plan, direct evaluation, score completion.

        Returns (plan, score/unknown matrices, per-individual direct
        pass/score vectors, full trait matrix for diagnostics).
        """
        plan = self._make_plan()
        pop = self.cfg.pop_size

        if self.is_gp:
            traits = None
        else:
            traits = diagnostics.translate_population(self.genes, self.cfg.problem)

        scores = np.zeros((pop, self.num_cases))
        kind = np.full((pop, self.num_cases), UNKNOWN, dtype=np.int8)
        distance = np.zeros((pop, self.num_cases), dtype=np.int32)
        direct_vals = []
        for i in range(pop):
            cases = plan.cases_for_individual(i)
            if self.is_gp:
                vals = gp.evaluate_cases(self.programs[i], self.train_inputs[cases],
                                         self.train_expected[cases],
                                         self.problem.max_steps)
            else:
                vals = traits[i, cases]
            self.phylo.record_evaluations(self.taxon_ids[i],
                                          (int(c) for c in cases), vals)
            scores[i, cases] = vals
            kind[i, cases] = EVALUATED
            direct_vals.append(vals)
        self.ledger.evaluations_used += plan.evaluations_per_generation(pop)

        if self.estimator.mode is not Mode.NONE:
            self._estimate_missing(plan, scores, kind, distance)

        self._emit_metrics(generation, kind, distance, direct_vals, traits)
        unknown = (kind == UNKNOWN).astype(np.uint8)
        return plan, scores, unknown, direct_vals, traits

    def _estimate_missing(self, plan, scores, kind, distance):
        cfg = self.estimator
        fill = fill_from_ancestors if cfg.mode is Mode.ANCESTOR else fill_from_relatives
        all_cases = set(range(self.num_cases))
        if plan.kind is PlanKind.COHORT:
            complements = [sorted(all_cases.difference(c.tolist()))
                           for c in plan.cohort_cases]
        else:
            complement = sorted(all_cases.difference(plan.sampled_cases.tolist()))
        for i in range(self.cfg.pop_size):
            missing = (complements[plan.cohort_of_individual[i]]
                       if plan.kind is PlanKind.COHORT else complement)
            if not missing:
                continue
            hits = fill(self.phylo, self.taxon_ids[i], missing, cfg.depth_limit)
            row_scores = scores[i]
            row_dist = distance[i]
            for case in missing:
                hit = hits.get(case)
                if hit is None:
                    row_scores[case] = cfg.fail_score
                    row_dist[case] = cfg.miss_distance
                else:
                    row_scores[case], row_dist[case] = hit
            kind[i, missing] = ESTIMATED

    def _emit_metrics(self, generation, kind, distance, direct_vals, traits):
        if self.estimator.mode is not Mode.NONE:
            est = kind == ESTIMATED
            fail_mask = est & (distance > self.estimator.depth_limit)
            hit_mask = est & ~fail_mask
            est_hits = int(hit_mask.sum())
            est_fails = int(fail_mask.sum())
            mean_distance = f"{distance[hit_mask].mean():.6f}" if est_hits else ""
            est_hits_col, est_fails_col = est_hits, est_fails
        else:
            est_hits_col = est_fails_col = mean_distance = ""

        if self.is_gp:
            best_agg = ""
            coverage = ""
            best_pass = f"{self._best_training_pass_count(direct_vals)}"
        else:
            best_agg = f"{diagnostics.best_aggregate_from_traits(traits):.6f}"
            coverage = f"{diagnostics.coverage_from_traits(traits, self.cfg.satisfaction_threshold)}"
            best_pass = ""

        self.metrics_rows.append((generation, self.ledger.evaluations_used, best_agg,
                                  coverage, best_pass, len(self.phylo),
                                  est_hits_col, est_fails_col, mean_distance))

    def _best_training_pass_count(self, direct_vals) -> int:
        """Full-training pass count of the generation's best-by-sample
        program; budget-free reporting metric."""
        fractions = [float(v.mean()) for v in direct_vals]
        best = int(np.argmax(fractions))
        passes = gp.evaluate_cases(self.programs[best], self.train_inputs,
                                   self.train_expected, self.problem.max_steps)
        return int(passes.sum())

    def _screen_for_solution(self, direct_vals, generation) -> bool:
        """Full-test (budget-free) every program that passed all of the
        training cases it was directly evaluated on, lowest index first."""
        for i in range(self.cfg.pop_size):
            if not direct_vals[i].all():
                continue
            key = gp.program_key(self.programs[i])
            if key in self._failed_solutions:
                continue
            if gp.check_solution(self.programs[i], self.problem):
                self.solution = self.programs[i].copy()
                self.solution_generation = generation
                return True
            self._failed_solutions.add(key)
        return False

    def _select_and_reproduce(self, plan, scores, unknown):
        """Phases 4-6: parent selection, asexual reproduction with
        mutation, and phylogeny bookkeeping."""
        estimation_active = self.estimator.mode is not Mode.NONE
        parents = select_parents_from_matrices(scores, unknown, plan,
                                               estimation_active,
                                               self.cfg.pop_size, self.rng)
        if self.cfg.collect_selections:
            self.selection_trace.append(parents.copy())

        self.phylo.generation += 1
        new_taxa = []
        if self.is_gp:
            new_programs = []
            for p in parents:
                child = gp.mutate_program(self.programs[p], self.rng,
                                          self.problem.max_len)
                new_programs.append(child)
                new_taxa.append(self.phylo.register_birth(gp.program_key(child),
                                                          parent=self.taxon_ids[p]))
            self.programs = new_programs
        else:
            children = mutate_gaussian_batch(self.genes[parents],
                                             self.cfg.gene_mutation_rate,
                                             self.cfg.gene_mutation_sigma, self.rng)
            for row, p in zip(children, parents):
                new_taxa.append(self.phylo.register_birth(row.tobytes(),
                                                          parent=self.taxon_ids[p]))
            self.genes = children
        for tid in self.taxon_ids:
            self.phylo.register_death(tid)
        self.phylo.prune_extinct()
        self.taxon_ids = new_taxa

    def _done(self, generation: int) -> bool:
        if self.cfg.max_generations is not None and generation >= self.cfg.max_generations:
            return True
        if (self.cfg.max_evaluations is not None
                and self.ledger.evaluations_used >= self.cfg.max_evaluations):
            return True
        return False

    def run(self, output_dir=None) -> ExperimentResult:
        outputs = []
        generation = 0
        while True:
            plan, scores, unknown, direct_vals, _ = self._evaluate_generation(generation)
            if (output_dir is not None and self.cfg.snapshot_interval > 0
                    and generation % self.cfg.snapshot_interval == 0):
                outputs.append(self._snapshot(output_dir, f"phylo_gen{generation:06d}.csv"))
            if self.is_gp and self._screen_for_solution(direct_vals, generation):
                break
            if self._done(generation):
                break
            self._select_and_reproduce(plan, scores, unknown)
            generation += 1
            self.ledger.generations_completed = generation

        if output_dir is not None:
            outputs.append(self._snapshot(output_dir, "phylo_final.csv"))
            outputs.append(self._write_metrics(output_dir))
            outputs.append(self._write_summary(output_dir))

        return ExperimentResult(success=self.solution is not None,
                                ledger=self.ledger,
                                final_metrics=dict(zip(METRICS_COLUMNS,
                                                       self.metrics_rows[-1])),
                                output_files=outputs,
                                solution_generation=self.solution_generation,
                                selection_trace=self.selection_trace)

    def _snapshot(self, output_dir, name):
        path = os.path.join(output_dir, name)
        self.phylo.write_snapshot(path)
        return path

    def _write_metrics(self, output_dir):
        path = os.path.join(output_dir, "metrics.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(METRICS_COLUMNS)
            writer.writerows(self.metrics_rows)
        return path

    def _write_summary(self, output_dir):
        path = os.path.join(output_dir, "summary.json")
        summary = {
            "config": dataclasses.asdict(self.cfg),
            "effective_depth_limit": self.cfg.effective_depth_limit(),
            "kernel_backend": kernels.backend_name(),
            "success": self.solution is not None,
            "solution_generation": self.solution_generation,
            "generations_completed": self.ledger.generations_completed,
            "evaluations_used": self.ledger.evaluations_used,
            "final_metrics": dict(zip(METRICS_COLUMNS, self.metrics_rows[-1])),
        }
        with open(path, "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run one configured experiment; writes outputs when an output
    directory is configured."""
    engine = Engine(config)
    output_dir = config.output_dir
    if output_dir is not None:
        os.makedirs(output_dir, exist_ok=True)
    return engine.run(output_dir)
