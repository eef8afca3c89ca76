"""Genome-to-phenotype translation and population metrics for the two
selection-scheme diagnostics: contradictory objectives and multi-path
exploration.

Each trait position doubles as a lexicase training case; an individual's
score on case i is its phenotype trait i. Population metrics always
consume full phenotypes computed from genomes, independent of whatever
subsampling the selection side applied.
"""

from dataclasses import dataclass

import numpy as np

from .core import NumericGenome

SATISFACTION_THRESHOLD = 96.0


@dataclass(frozen=True)
class DiagnosticPhenotype:
    traits: np.ndarray       # float64, inactive positions exactly 0.0
    active_mask: np.ndarray  # bool


def translate_contradictory(genome: NumericGenome) -> DiagnosticPhenotype:
    """Only the largest gene (first index on ties) expresses as a trait."""
    traits, mask = _contradictory_traits(genome.genes[np.newaxis, :])
    return DiagnosticPhenotype(traits[0], mask[0])


def translate_multipath(genome: NumericGenome) -> DiagnosticPhenotype:
    """The largest gene starts an active region that extends rightward
    while each gene is <= its predecessor; only that region expresses."""
    traits, mask = _multipath_traits(genome.genes[np.newaxis, :])
    return DiagnosticPhenotype(traits[0], mask[0])


def _contradictory_traits(genes: np.ndarray):
    """Vectorized contradictory-objectives translation of a (P, G) matrix."""
    pop, g = genes.shape
    mask = np.zeros((pop, g), dtype=bool)
    mask[np.arange(pop), genes.argmax(axis=1)] = True
    return np.where(mask, genes, 0.0), mask


def _multipath_traits(genes: np.ndarray):
    """Vectorized multi-path translation of a (P, G) matrix."""
    pop, g = genes.shape
    mask = np.zeros((pop, g), dtype=bool)
    # rising[i, j] marks gene j+1 strictly exceeding gene j: region boundary
    rising = genes[:, 1:] > genes[:, :-1]
    starts = genes.argmax(axis=1)
    for i in range(pop):
        start = starts[i]
        tail = rising[i, start:]
        end = start + (int(tail.argmax()) + 1 if tail.any() else tail.size + 1)
        mask[i, start:end] = True
    return np.where(mask, genes, 0.0), mask


def translate_population(genes: np.ndarray, diagnostic: str) -> np.ndarray:
    """Trait matrix for a whole population; rows align with ``genes``."""
    if diagnostic == "contradictory":
        return _contradictory_traits(genes)[0]
    if diagnostic == "multipath":
        return _multipath_traits(genes)[0]
    raise ValueError(f"unknown diagnostic {diagnostic!r}")


def satisfactory_trait_coverage(phenotypes, threshold: float = SATISFACTION_THRESHOLD) -> int:
    """Number of distinct trait positions some population member pushes
    strictly above ``threshold``."""
    if not 0.0 < threshold < 100.0:
        raise ValueError("threshold must be in (0, 100)")
    phenotypes = list(phenotypes)
    if not phenotypes:
        return 0
    traits = np.stack([p.traits for p in phenotypes])
    return coverage_from_traits(traits, threshold)


def coverage_from_traits(traits: np.ndarray, threshold: float = SATISFACTION_THRESHOLD) -> int:
    return int((traits > threshold).any(axis=0).sum())


def best_aggregate(phenotypes) -> float:
    """Maximum over the population of the summed trait values."""
    phenotypes = list(phenotypes)
    if not phenotypes:
        raise ValueError("best_aggregate of an empty population")
    traits = np.stack([p.traits for p in phenotypes])
    return best_aggregate_from_traits(traits)


def best_aggregate_from_traits(traits: np.ndarray) -> float:
    return float(traits.sum(axis=1).max())
