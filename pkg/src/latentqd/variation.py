"""Parent selection and genetic variation. Cross-over is disabled; the only
variation operator is Deb's polynomial mutation with post-hoc clamping."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from .container import Container
from .core import Genotype, random_genotypes

log = logging.getLogger(__name__)


class SelectorKind(enum.Enum):
    UNIFORM = "uniform"
    NOVELTY = "novelty"
    SURPRISE = "surprise"
    RANDOM = "random"


@dataclass
class MutationParams:
    eta_m: float = 10.0
    per_gene_rate: float = 0.05

    def __post_init__(self):
        if self.eta_m <= 0 or not (0.0 < self.per_gene_rate < 1.0):
            raise ValueError("invalid mutation parameters")


def polynomial_mutation(
    g: Genotype, p: MutationParams, rng: np.random.Generator
) -> Genotype:
    """Mutate each gene independently with probability per_gene_rate.

    For a mutated gene with draw u in [0, 1):
        delta = (2u)^(1/(eta+1)) - 1          if u < 0.5
        delta = 1 - (2(1-u))^(1/(eta+1))      otherwise
    gene += delta * (hi - lo), clamped into bounds.
    """
    length = len(g)
    mask = rng.random(length) < p.per_gene_rate
    u = rng.random(length)
    exponent = 1.0 / (p.eta_m + 1.0)
    delta = np.where(
        u < 0.5,
        (2.0 * u) ** exponent - 1.0,
        1.0 - (2.0 * (1.0 - u)) ** exponent,
    )
    values = g.values + mask * delta * (g.hi - g.lo)
    return g.with_values(np.clip(values, g.lo, g.hi))


def select_parents(
    container: Container | None,
    kind: SelectorKind,
    batch: int,
    rng: np.random.Generator,
    *,
    model=None,
    genotype_template: Genotype | None = None,
) -> list[Genotype]:
    """Draw `batch` parent genotypes with replacement.

    UNIFORM picks members equiprobably; NOVELTY weights by the k-NN novelty
    score recomputed against the current archive; SURPRISE weights by the
    encoder reconstruction error (requires `model`); RANDOM ignores the
    archive and samples fresh genotypes within the bounds of
    `genotype_template`. Zero or non-finite total weight falls back to
    uniform with a log signal.
    """
    if kind is SelectorKind.RANDOM:
        if genotype_template is None:
            raise ValueError("RANDOM selection needs a genotype template for bounds")
        return random_genotypes(
            rng, batch, len(genotype_template), genotype_template.lo, genotype_template.hi
        )
    if container is None or len(container) == 0:
        raise ValueError(f"{kind.value} selection needs a non-empty container")

    size = len(container)
    if kind is SelectorKind.UNIFORM:
        idx = rng.integers(0, size, size=batch)
    else:
        if kind is SelectorKind.NOVELTY:
            weights = container.refresh_novelties()
        else:
            if model is None:
                raise ValueError("SURPRISE selection needs the encoder model")
            stacked = np.stack([ind.sensory for ind in container])
            weights = np.asarray(model.reconstruction_error(stacked), dtype=np.float64)
            for ind, s in zip(container, weights):
                ind.surprise = float(s)
        total = weights.sum()
        if not np.isfinite(total) or total <= 0.0:
            log.warning(
                "%s weights degenerate (total=%s); falling back to uniform",
                kind.value,
                total,
            )
            idx = rng.integers(0, size, size=batch)
        else:
            idx = rng.choice(size, size=batch, replace=True, p=weights / total)
    members = container.individuals
    return [members[int(i)].genotype for i in idx]
