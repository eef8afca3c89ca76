"""Runtime phylogeny tracking at genotype granularity.

The tree is annotated with per-training-case evaluation results and
supports the two search primitives fitness estimation needs: walking up
the lineage for the nearest evaluated ancestor, and breadth-first search
over the whole tree for the nearest evaluated relative. Extinct branches
are pruned incrementally so the stored tree stays close to
O(tree height + extant taxa).
"""

import csv
from dataclasses import dataclass, field
from typing import Optional


@dataclass
class Taxon:
    """One node in the phylogeny: a distinct genotype and its annotations."""

    id: int
    parent: Optional[int]
    genotype_key: object
    origin_generation: int
    extant_count: int = 0
    children: set = field(default_factory=set)
    eval_record: dict = field(default_factory=dict)  # case index -> score

    def is_extant(self) -> bool:
        return self.extant_count > 0


class PhylogenyError(Exception):
    pass


class Phylogeny:
    """Genotype-level ancestry tree with evaluation annotations.

    Structural mutation (births, deaths, evaluation recording, pruning)
    is single-writer; between mutations the tree is read-only and the
    search operations may run concurrently.
    """

    def __init__(self, num_cases: int):
        if num_cases < 1:
            raise ValueError("num_cases must be >= 1")
        self.num_cases = num_cases
        self.taxa: dict[int, Taxon] = {}
        self.extant: dict = {}  # genotype key -> taxon id (last registered wins)
        self.generation = 0
        self._next_id = 0
        self._extinct_candidates: set[int] = set()

    def __len__(self):
        return len(self.taxa)

    def __contains__(self, taxon_id):
        return taxon_id in self.taxa

    def register_birth(self, genotype_key, parent: Optional[int] = None) -> int:
        """Record one new population member; returns its taxon id.

        Offspring whose genotype equals the parent's join the parent
        taxon. Root births with a genotype already extant join that
        taxon, so clones never spawn duplicate root taxa.
        """
        if parent is not None:
            ptax = self.taxa.get(parent)
            if ptax is None:
                raise PhylogenyError(f"unknown parent taxon {parent}")
            if genotype_key == ptax.genotype_key:
                ptax.extant_count += 1
                self.extant[genotype_key] = ptax.id
                return ptax.id
        elif genotype_key in self.extant:
            tax = self.taxa[self.extant[genotype_key]]
            tax.extant_count += 1
            return tax.id

        tid = self._next_id
        self._next_id += 1
        tax = Taxon(id=tid, parent=parent, genotype_key=genotype_key,
                    origin_generation=self.generation, extant_count=1)
        self.taxa[tid] = tax
        if parent is not None:
            self.taxa[parent].children.add(tid)
        self.extant[genotype_key] = tid
        return tid

    def register_death(self, taxon_id: int) -> None:
        tax = self.taxa.get(taxon_id)
        if tax is None:
            raise PhylogenyError(f"unknown taxon {taxon_id}")
        if tax.extant_count <= 0:
            raise PhylogenyError(f"taxon {taxon_id} has no living members")
        tax.extant_count -= 1
        if tax.extant_count == 0:
            self._extinct_candidates.add(taxon_id)
            if self.extant.get(tax.genotype_key) == taxon_id:
                del self.extant[tax.genotype_key]

    def record_evaluation(self, taxon_id: int, case_index: int, score: float) -> None:
        tax = self.taxa.get(taxon_id)
        if tax is None:
            raise PhylogenyError(f"unknown taxon {taxon_id}")
        if not 0 <= case_index < self.num_cases:
            raise PhylogenyError(f"case index {case_index} out of range [0, {self.num_cases})")
        tax.eval_record[case_index] = float(score)

    def record_evaluations(self, taxon_id: int, cases, scores) -> None:
        """Bulk record_evaluation; cases must all lie in range."""
        tax = self.taxa.get(taxon_id)
        if tax is None:
            raise PhylogenyError(f"unknown taxon {taxon_id}")
        tax.eval_record.update(zip(cases, scores))

    def prune_extinct(self) -> int:
        """Remove every extinct taxon with no extant descendant.

        Works upward from taxa whose last member died; amortized cost is
        proportional to the number of deaths since the last prune.
        """
        stack = list(self._extinct_candidates)
        self._extinct_candidates.clear()
        removed = 0
        while stack:
            tid = stack.pop()
            tax = self.taxa.get(tid)
            if tax is None or tax.extant_count > 0 or tax.children:
                continue
            del self.taxa[tid]
            removed += 1
            if tax.parent is not None:
                ptax = self.taxa.get(tax.parent)
                if ptax is not None:
                    ptax.children.discard(tid)
                    if ptax.extant_count == 0 and not ptax.children:
                        stack.append(ptax.id)
        return removed

    def nearest_evaluated_ancestor(self, start: int, case_index: int,
                                   max_depth: int) -> Optional[tuple[float, int]]:
        """Walk the lineage upward (the focal taxon is distance 0) and
        return (score, distance) for the first taxon whose record holds
        ``case_index``, or None if none lies within ``max_depth`` edges."""
        tax = self.taxa.get(start)
        if tax is None:
            raise PhylogenyError(f"unknown taxon {start}")
        depth = 0
        while tax is not None and depth <= max_depth:
            score = tax.eval_record.get(case_index)
            if score is not None:
                return score, depth
            if tax.parent is None:
                return None
            tax = self.taxa.get(tax.parent)
            depth += 1
        return None

    def nearest_evaluated_relative(self, start: int, case_index: int,
                                   max_distance: int) -> Optional[tuple[float, int]]:
        """Breadth-first search over undirected parent/child edges; ties at
        equal distance break toward the lowest taxon id."""
        if start not in self.taxa:
            raise PhylogenyError(f"unknown taxon {start}")
        visited = {start}
        frontier = [start]
        distance = 0
        while frontier and distance <= max_distance:
            hit = None
            for tid in sorted(frontier):
                score = self.taxa[tid].eval_record.get(case_index)
                if score is not None:
                    hit = (score, distance)
                    break
            if hit is not None:
                return hit
            nxt = []
            for tid in frontier:
                tax = self.taxa[tid]
                neighbors = list(tax.children)
                if tax.parent is not None and tax.parent in self.taxa:
                    neighbors.append(tax.parent)
                for nid in neighbors:
                    if nid not in visited:
                        visited.add(nid)
                        nxt.append(nid)
            frontier = nxt
            distance += 1
        return None

    def extant_ids(self) -> list[int]:
        return [tid for tid, tax in self.taxa.items() if tax.extant_count > 0]

    def total_extant(self) -> int:
        return sum(tax.extant_count for tax in self.taxa.values())

    def write_snapshot(self, path) -> None:
        """One CSV row per stored taxon: id, ancestor, origin, census, coverage."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", "ancestor_id", "origin_generation",
                             "extant_count", "num_evaluated_cases"])
            for tid in sorted(self.taxa):
                tax = self.taxa[tid]
                ancestor = "none" if tax.parent is None else tax.parent
                writer.writerow([tid, ancestor, tax.origin_generation,
                                 tax.extant_count, len(tax.eval_record)])
