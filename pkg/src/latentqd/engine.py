"""Optimisation loops.

`run()` dispatches on the variant's algorithm:

- "aurora": the latent-descriptor QD loop. Each iteration selects a batch
  from the container, mutates, evaluates, encodes sensory data to latent
  descriptors and offers the offspring to the container. The encoder is
  retrained at iterations 10, 30, 60, ... (gaps grow linearly) and every
  member descriptor is then recomputed. Threshold control is either CSC
  (update every iteration, container re-filtered every t_c iterations) or
  VAT (threshold and container update only right after encoder updates).
- "hc_qd": same loop on the hand-coded descriptor, no encoder, CSC control.
- "random_search": fresh uniform genotypes each iteration offered to a
  CSC-managed hand-coded container; nothing is selected from the container.
- "novelty_search": generational population loop on hand-coded descriptors;
  the `ns_add` most novel offspring join the archive unconditionally each
  generation, so the archive grows linearly.
- "taxons": like novelty_search but descriptors come from the online-trained
  encoder; each generation adds the `taxons_q` most novel or most surprising
  offspring (criteria alternate, novelty first).

Iteration 1 of the container-based loops evaluates two uniform-random
batches (parents and offspring), so total evaluations = batch * (I + 1).
The CSC threshold is first initialised to 10% of the container's maximal
pairwise descriptor distance: right after the first encoder update for
latent variants, right after the first iteration for hand-coded ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .container import (
    D_MIN_FLOOR,
    Container,
    ContainerParams,
    csc_update_threshold,
    vat_update_threshold,
)
from .core import Genotype, Individual, RngStreams, random_genotypes
from .metrics import MetricsRecord, coverage, grid_mean_fitness
from .reduction import (
    AdamState,
    Autoencoder,
    TrainConfig,
    fc_autoencoder,
    pca_fit,
    schedule_iterations,
    train,
)
from .tasks import get_task
from .variation import MutationParams, SelectorKind, polynomial_mutation, select_parents

ALGORITHMS = ("aurora", "hc_qd", "novelty_search", "taxons", "random_search")
THRESHOLD_MODES = ("csc", "vat", "none")
D_MIN_INIT_FRACTION = 0.1


class VariantError(ValueError):
    """Inconsistent algorithm / selector / threshold combination."""


@dataclass(frozen=True)
class VariantSpec:
    algorithm: str
    selector: SelectorKind = SelectorKind.UNIFORM
    threshold_mode: str = "csc"
    descriptor_source: str = "unsupervised"  # "unsupervised" | "hand_coded"
    latent_dim: int = 2
    reduction: str = "autoencoder"  # "autoencoder" | "pca"

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise VariantError(f"unknown algorithm {self.algorithm!r}")
        if self.threshold_mode not in THRESHOLD_MODES:
            raise VariantError(f"unknown threshold mode {self.threshold_mode!r}")
        if self.descriptor_source not in ("unsupervised", "hand_coded"):
            raise VariantError(f"unknown descriptor source {self.descriptor_source!r}")
        if self.reduction not in ("autoencoder", "pca"):
            raise VariantError(f"unknown reduction method {self.reduction!r}")
        if self.threshold_mode == "vat" and self.descriptor_source != "unsupervised":
            raise VariantError("VAT needs a latent descriptor space")
        if self.selector is SelectorKind.SURPRISE and self.descriptor_source != "unsupervised":
            raise VariantError("surprise selection needs an encoder")
        if self.descriptor_source == "unsupervised" and self.latent_dim < 1:
            raise VariantError("latent_dim must be positive")
        rules = {
            "aurora": ("unsupervised", ("csc", "vat")),
            "hc_qd": ("hand_coded", ("csc",)),
            "random_search": ("hand_coded", ("csc",)),
            "novelty_search": ("hand_coded", ("none",)),
            "taxons": ("unsupervised", ("none",)),
        }
        source, modes = rules[self.algorithm]
        if self.descriptor_source != source:
            raise VariantError(f"{self.algorithm} requires {source} descriptors")
        if self.threshold_mode not in modes:
            raise VariantError(
                f"{self.algorithm} supports threshold modes {modes}, got {self.threshold_mode!r}"
            )
        if self.algorithm == "random_search" and self.selector is not SelectorKind.RANDOM:
            raise VariantError("random_search uses the random selector")
        if self.algorithm == "hc_qd" and self.selector is not SelectorKind.UNIFORM:
            raise VariantError("hc_qd uses the uniform selector")
        if self.algorithm == "aurora" and self.selector is SelectorKind.RANDOM:
            raise VariantError("aurora selects parents from the container")

    def label(self) -> str:
        suffix = "-pca" if self.reduction == "pca" else ""
        if self.algorithm == "aurora":
            return f"aurora-{self.threshold_mode}-{self.selector.value}-n{self.latent_dim}{suffix}"
        if self.algorithm == "taxons":
            return f"taxons-n{self.latent_dim}{suffix}"
        if self.algorithm == "hc_qd":
            return "hc-csc-uniform"
        return self.algorithm.replace("_", "-")


@dataclass
class RunConfig:
    task: str
    iterations: int
    seed: int = 1
    batch_size: int = 128
    n_target: int = 10_000
    knn_k: int = 15
    epsilon: float = 0.1
    k_csc: float = 5e-6
    k_vat: float | None = None  # default depends on the task
    t_c: int = 10
    metrics_cadence: int = 10
    train_epochs: int = 25
    train_minibatch: int = 64
    train_lr: float = 1e-3
    train_dtype: str = "float32"  # engine default: single-precision updates
    mutation_rate: float | None = None  # default depends on the task
    eta_m: float = 10.0
    taxons_q: int = 5
    ns_add: int = 5
    world_file: str | None = None

    def __post_init__(self):
        if self.iterations < 0 or self.batch_size < 1 or self.metrics_cadence < 1:
            raise ValueError("iterations, batch_size and metrics_cadence must be valid")


@dataclass
class RunResult:
    container: Container
    records: list[MetricsRecord]
    encoder: Autoencoder | None = None
    evaluations: int = 0
    encoder_update_iterations: list[int] = field(default_factory=list)


def run(cfg: RunConfig, variant: VariantSpec, task=None) -> RunResult:
    """Execute one run. `task` overrides the registry lookup (tests)."""
    variant.validate()
    if task is None:
        task = get_task(cfg.task, world_file=cfg.world_file)
    if variant.algorithm == "novelty_search":
        return _population_loop(cfg, variant, task, latent=False)
    if variant.algorithm == "taxons":
        return _population_loop(cfg, variant, task, latent=True)
    return _container_loop(cfg, variant, task)


def _container_params(cfg: RunConfig, task) -> ContainerParams:
    return ContainerParams(
        k=cfg.knn_k,
        epsilon=cfg.epsilon,
        n_target=cfg.n_target,
        k_csc=cfg.k_csc,
        k_vat=cfg.k_vat if cfg.k_vat is not None else task.k_vat,
        t_c=cfg.t_c,
    )


def _mutation_params(cfg: RunConfig, task) -> MutationParams:
    rate = cfg.mutation_rate if cfg.mutation_rate is not None else task.mutation_rate
    return MutationParams(eta_m=cfg.eta_m, per_gene_rate=rate)


def _record(iteration: int, container: Container, task) -> MetricsRecord:
    members = container.individuals
    return MetricsRecord(
        iteration=iteration,
        coverage_pct=coverage(members, task.bd_bounds),
        grid_mean_fitness=grid_mean_fitness(members, task.bd_bounds),
        container_size=len(container),
        d_min=container.d_min,
        cumulative_loss=container.cumulative_loss,
        updates=container.update_count,
    )


def _should_log(iteration: int, cfg: RunConfig) -> bool:
    return (
        iteration == 1
        or iteration % cfg.metrics_cadence == 0
        or iteration == cfg.iterations
    )


def _evaluate_all(task, genotypes: list[Genotype]):
    batch_fn = getattr(task, "evaluate_batch", None)
    if batch_fn is not None:
        return batch_fn(genotypes)
    return [task.evaluate(g) for g in genotypes]


def _container_loop(cfg: RunConfig, variant: VariantSpec, task) -> RunResult:
    streams = RngStreams(cfg.seed)
    rng_boot = streams.stream("bootstrap")
    rng_select = streams.stream("select")
    rng_mutate = streams.stream("mutate")

    unsupervised = variant.descriptor_source == "unsupervised"
    use_pca = unsupervised and variant.reduction == "pca"
    encoder = adam = train_rng = None
    schedule: set[int] = set()
    if unsupervised:
        if not use_pca:
            encoder = fc_autoencoder(
                task.sensory_dim, task.encoder_hidden, variant.latent_dim,
                streams.stream("encoder-init"),
            )
            adam = AdamState.for_model(encoder, cfg.train_lr)
            train_rng = streams.stream("encoder-train")
        schedule = set(schedule_iterations(cfg.iterations))
    train_cfg = TrainConfig(cfg.train_epochs, cfg.train_minibatch, cfg.train_lr, cfg.train_dtype)

    container = Container(_container_params(cfg, task))
    mut = _mutation_params(cfg, task)
    template = task.genotype_template()
    length, lo, hi = task.genotype_length, template.lo, template.hi

    records: list[MetricsRecord] = []
    encoder_updates: list[int] = []
    evaluations = 0
    d_min_ready = False

    for it in range(1, cfg.iterations + 1):
        if it == 1:
            batch = random_genotypes(rng_boot, cfg.batch_size, length, lo, hi)
            batch += random_genotypes(rng_boot, cfg.batch_size, length, lo, hi)
        elif variant.selector is SelectorKind.RANDOM:
            batch = select_parents(
                None, SelectorKind.RANDOM, cfg.batch_size, rng_select,
                genotype_template=template,
            )
        else:
            parents = select_parents(
                container, variant.selector, cfg.batch_size, rng_select, model=encoder
            )
            batch = [polynomial_mutation(p, mut, rng_mutate) for p in parents]

        evaluated = _evaluate_all(task, batch)
        if use_pca and encoder is None:
            # bootstrap projection from the first batch; refit at schedule points
            encoder = pca_fit(np.stack([sd for _, sd, _ in evaluated]), variant.latent_dim)
        for genotype, (fitness, sensory, bd) in zip(batch, evaluated):
            descriptor = encoder.encode(sensory) if unsupervised else bd.copy()
            container.try_add(
                Individual(genotype, fitness, sensory, descriptor, bd), iteration=it
            )
        evaluations += len(batch)

        encoder_updated = False
        if unsupervised and it in schedule:
            data = np.stack([ind.sensory for ind in container])
            if use_pca:
                encoder = pca_fit(data, variant.latent_dim)
            else:
                train(encoder, data, train_cfg, adam, train_rng)
            container.recompute_descriptors(encoder.encode)
            encoder_updated = True
            encoder_updates.append(it)

        if variant.threshold_mode == "csc":
            if not d_min_ready and (encoder_updated if unsupervised else it == 1):
                container.d_min = max(
                    D_MIN_INIT_FRACTION * container.max_pairwise_distance(), D_MIN_FLOOR
                )
                d_min_ready = True
            if d_min_ready:
                container.d_min = csc_update_threshold(
                    container.d_min, len(container), cfg.n_target, cfg.k_csc
                )
                if it % cfg.t_c == 0:
                    container.update()
        elif variant.threshold_mode == "vat" and encoder_updated:
            container.d_min = vat_update_threshold(
                container.max_pairwise_distance(),
                cfg.n_target,
                container.params.k_vat,
                variant.latent_dim,
            )
            container.update()

        if _should_log(it, cfg):
            records.append(_record(it, container, task))

    return RunResult(container, records, encoder, evaluations, encoder_updates)


def _knn_mean(dists: np.ndarray, k: int) -> float:
    if dists.size == 0:
        return float("inf")
    kk = min(k, dists.size)
    return float(np.mean(np.partition(dists, kk - 1)[:kk]))


def _novelties_against(
    candidates: np.ndarray, reference: np.ndarray, k: int, exclude_offset: int | None = None
) -> np.ndarray:
    """k-NN novelty of each candidate row against the reference rows.

    When candidates are themselves reference rows, `exclude_offset` gives the
    reference index of candidate 0 so each row skips itself.
    """
    out = np.empty(candidates.shape[0])
    for i in range(candidates.shape[0]):
        diff = reference - candidates[i]
        dists = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        if exclude_offset is not None:
            dists = np.delete(dists, exclude_offset + i)
        out[i] = _knn_mean(dists, k)
    return out


def _population_loop(cfg: RunConfig, variant: VariantSpec, task, latent: bool) -> RunResult:
    """Generational exploration loop with a linearly growing archive."""
    streams = RngStreams(cfg.seed)
    rng_boot = streams.stream("bootstrap")
    rng_select = streams.stream("select")
    rng_mutate = streams.stream("mutate")

    use_pca = latent and variant.reduction == "pca"
    encoder = adam = train_rng = None
    schedule: set[int] = set()
    if latent:
        if not use_pca:
            encoder = fc_autoencoder(
                task.sensory_dim, task.encoder_hidden, variant.latent_dim,
                streams.stream("encoder-init"),
            )
            adam = AdamState.for_model(encoder, cfg.train_lr)
            train_rng = streams.stream("encoder-train")
        schedule = set(schedule_iterations(cfg.iterations))
    train_cfg = TrainConfig(cfg.train_epochs, cfg.train_minibatch, cfg.train_lr, cfg.train_dtype)

    archive = Container(_container_params(cfg, task))
    mut = _mutation_params(cfg, task)
    template = task.genotype_template()
    n_add = cfg.taxons_q if variant.algorithm == "taxons" else cfg.ns_add
    k = cfg.knn_k

    def make_individuals(genotypes: list[Genotype]) -> list[Individual]:
        nonlocal encoder
        evaluated = _evaluate_all(task, genotypes)
        if use_pca and encoder is None:
            encoder = pca_fit(np.stack([sd for _, sd, _ in evaluated]), variant.latent_dim)
        out = []
        for genotype, (fitness, sensory, bd) in zip(genotypes, evaluated):
            descriptor = encoder.encode(sensory) if latent else bd.copy()
            out.append(Individual(genotype, fitness, sensory, descriptor, bd))
        return out

    population = make_individuals(
        random_genotypes(rng_boot, cfg.batch_size, task.genotype_length,
                         template.lo, template.hi)
    )
    evaluations = len(population)
    records: list[MetricsRecord] = []
    encoder_updates: list[int] = []

    for gen in range(1, cfg.iterations + 1):
        pop_desc = np.stack([ind.descriptor for ind in population])
        if len(archive):
            reference = np.vstack([archive.descriptors(), pop_desc])
        else:
            reference = pop_desc
        offset = len(archive)
        nov_pop = _novelties_against(pop_desc, reference, k, exclude_offset=offset)
        for ind, score in zip(population, nov_pop):
            ind.novelty = float(score)

        # novelty-proportional parent selection from the population
        finite = np.isfinite(nov_pop)
        total = nov_pop[finite].sum() if finite.any() else 0.0
        if not finite.all() or total <= 0.0:
            idx = rng_select.integers(0, len(population), size=cfg.batch_size)
        else:
            idx = rng_select.choice(
                len(population), size=cfg.batch_size, replace=True, p=nov_pop / total
            )
        offspring = make_individuals(
            [polynomial_mutation(population[int(i)].genotype, mut, rng_mutate) for i in idx]
        )
        evaluations += len(offspring)

        off_desc = np.stack([ind.descriptor for ind in offspring])
        nov_off = _novelties_against(off_desc, reference, k)
        for ind, score in zip(offspring, nov_off):
            ind.novelty = float(score)

        # archive additions: most novel, or for taxons alternating with most
        # surprising (novelty on odd generations)
        if variant.algorithm == "taxons" and gen % 2 == 0:
            scores = np.asarray(
                encoder.reconstruction_error(np.stack([o.sensory for o in offspring]))
            )
            for ind, s in zip(offspring, scores):
                ind.surprise = float(s)
        else:
            scores = nov_off
        order = np.argsort(-scores, kind="stable")
        for i in order[:n_add]:
            archive.append_unconditional(offspring[int(i)], iteration=gen)

        if variant.algorithm == "taxons":
            # offspring replace the least novel parents; with equal batch and
            # population sizes that is a full generational replacement
            population = offspring
        else:
            combined = population + offspring
            nov_all = np.concatenate([nov_pop, nov_off])
            keep = np.argsort(-nov_all, kind="stable")[: cfg.batch_size]
            population = [combined[int(i)] for i in keep]

        if latent and gen in schedule:
            data = np.stack([ind.sensory for ind in archive])
            if use_pca:
                if data.shape[0] >= variant.latent_dim:
                    encoder = pca_fit(data, variant.latent_dim)
            else:
                train(encoder, data, train_cfg, adam, train_rng)
            archive.recompute_descriptors(encoder.encode)
            for ind in population:
                ind.descriptor = np.asarray(encoder.encode(ind.sensory), dtype=np.float64)
                ind.novelty = None
            encoder_updates.append(gen)

        if _should_log(gen, cfg):
            records.append(_record(gen, archive, task))

    return RunResult(archive, records, encoder, evaluations, encoder_updates)
