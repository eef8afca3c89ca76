"""Shared domain types: numeric genomes, per-case score records, seeded RNG streams.

Score provenance is tracked per training case so that selection can tell
directly measured scores apart from phylogeny-based estimates and from
cases that were never evaluated at all.
"""

import zlib

import numpy as np

GENE_MIN = 0.0
GENE_MAX = 100.0

# Provenance markers for ScoreRecord.kind.
UNKNOWN = 0
EVALUATED = 1
ESTIMATED = 2


class RngStream:
    """Named, independent random substreams derived from one 64-bit seed.

    Each stochastic component of a run (mutation, subsampling, case
    shuffling, selection tie-breaking) draws from its own substream, so
    changing how one component consumes randomness cannot perturb the
    others. Identical seeds give bit-identical runs.
    """

    SUBSTREAMS = ("mutation", "subsampling", "shuffle", "tiebreak")

    def __init__(self, seed: int):
        self.seed = int(seed)
        for name in self.SUBSTREAMS:
            key = zlib.crc32(name.encode("ascii"))
            seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(key,))
            setattr(self, name, np.random.default_rng(seq))

    def __repr__(self):
        return f"RngStream(seed={self.seed})"


class NumericGenome:
    """Fixed-length sequence of real-valued genes, each in [0, 100]."""

    __slots__ = ("genes",)

    def __init__(self, genes):
        arr = np.array(genes, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("genome must be a non-empty 1-D sequence")
        if (arr < GENE_MIN).any() or (arr > GENE_MAX).any():
            raise ValueError(f"genes must lie in [{GENE_MIN}, {GENE_MAX}]")
        arr.flags.writeable = False
        self.genes = arr

    def __len__(self):
        return self.genes.size

    def __eq__(self, other):
        if not isinstance(other, NumericGenome):
            return NotImplemented
        return np.array_equal(self.genes, other.genes)

    def __hash__(self):
        return hash(self.key())

    def key(self) -> bytes:
        """Opaque hashable genotype key for phylogeny tracking."""
        return self.genes.tobytes()

    def __repr__(self):
        return f"NumericGenome(len={len(self)})"


class ScoreRecord:
    """Per-training-case scores plus provenance for one individual.

    ``kind[i]`` is one of UNKNOWN / EVALUATED / ESTIMATED; ``distance[i]``
    is meaningful only for estimated positions and holds the phylogeny
    distance of the estimate source (depth_limit + 1 marks an estimation
    failure that was filled with the fail score).
    """

    __slots__ = ("scores", "kind", "distance")

    def __init__(self, scores, kind, distance=None):
        scores = np.asarray(scores, dtype=np.float64)
        kind = np.asarray(kind, dtype=np.int8)
        if distance is None:
            distance = np.zeros(scores.size, dtype=np.int32)
        else:
            distance = np.asarray(distance, dtype=np.int32)
        if not (scores.shape == kind.shape == distance.shape) or scores.ndim != 1:
            raise ValueError("scores, kind, and distance must be equal-length 1-D arrays")
        self.scores = scores
        self.kind = kind
        self.distance = distance

    def __len__(self):
        return self.scores.size

    @classmethod
    def all_evaluated(cls, scores):
        scores = np.asarray(scores, dtype=np.float64)
        return cls(scores, np.full(scores.size, EVALUATED, dtype=np.int8))

    def usable_mask(self) -> np.ndarray:
        return self.kind != UNKNOWN

    def unknown_mask(self) -> np.ndarray:
        return self.kind == UNKNOWN


def mutate_gaussian(genome: NumericGenome, per_gene_rate: float, sigma: float,
                    rng: RngStream) -> NumericGenome:
    """Mutate each gene with probability ``per_gene_rate`` by adding a
    normal(0, sigma) draw, clamping the result back into [0, 100].

    Always consumes the same number of draws from the mutation substream
    regardless of which genes mutate, so downstream randomness is stable.
    """
    if not 0.0 <= per_gene_rate <= 1.0:
        raise ValueError("per_gene_rate must be in [0, 1]")
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    gen = rng.mutation
    n = len(genome)
    hits = gen.random(n) < per_gene_rate
    draws = gen.normal(0.0, sigma, size=n)
    genes = genome.genes + np.where(hits, draws, 0.0)
    np.clip(genes, GENE_MIN, GENE_MAX, out=genes)
    return NumericGenome(genes)


def mutate_gaussian_batch(genes: np.ndarray, per_gene_rate: float, sigma: float,
                          rng: RngStream) -> np.ndarray:
    """Batched mutate_gaussian over a (P, G) gene matrix.

    Draws randomness matrix-at-once, so per-individual draw interleaving
    differs from repeated mutate_gaussian calls; results are equally
    deterministic for a fixed seed.
    """
    if not 0.0 <= per_gene_rate <= 1.0:
        raise ValueError("per_gene_rate must be in [0, 1]")
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    gen = rng.mutation
    hits = gen.random(genes.shape) < per_gene_rate
    draws = gen.normal(0.0, sigma, size=genes.shape)
    out = genes + np.where(hits, draws, 0.0)
    np.clip(out, GENE_MIN, GENE_MAX, out=out)
    return out


def aggregate_score(record: ScoreRecord) -> float:
    """Sum of scores over non-Unknown positions; Unknown contributes zero."""
    return float(record.scores[record.usable_mask()].sum()) if len(record) else 0.0
