"""Instrumented maze runs: latent statistics at each encoder update, over a
grid of training hyperparameters, on a given world file."""
import sys

import numpy as np

from latentqd.container import Container, csc_update_threshold
from latentqd.core import Individual, RngStreams, random_genotypes
from latentqd.engine import (
    D_MIN_INIT_FRACTION,
    RunConfig,
    _container_params,
    _mutation_params,
)
from latentqd.metrics import coverage
from latentqd.reduction import (
    AdamState,
    TrainConfig,
    fc_autoencoder,
    schedule_iterations,
    train,
)
from latentqd.tasks import get_task
from latentqd.variation import SelectorKind, polynomial_mutation, select_parents


def instrumented(iterations, seed, lr, epochs, minibatch, world=None, latent=5):
    cfg = RunConfig(task="maze", iterations=iterations, seed=seed, batch_size=64,
                    n_target=1000, train_epochs=epochs, train_lr=lr,
                    train_minibatch=minibatch, k_csc=5e-5, world_file=world)
    task = get_task("maze", world_file=world)
    streams = RngStreams(cfg.seed)
    rng_boot = streams.stream("bootstrap")
    rng_select = streams.stream("select")
    rng_mutate = streams.stream("mutate")
    encoder = fc_autoencoder(task.sensory_dim, task.encoder_hidden, latent,
                             streams.stream("encoder-init"))
    adam = AdamState.for_model(encoder, cfg.train_lr)
    train_rng = streams.stream("encoder-train")
    schedule = set(schedule_iterations(cfg.iterations))
    train_cfg = TrainConfig(cfg.train_epochs, cfg.train_minibatch, cfg.train_lr, "float32")
    container = Container(_container_params(cfg, task))
    mut = _mutation_params(cfg, task)
    template = task.genotype_template()
    d_min_ready = False

    for it in range(1, cfg.iterations + 1):
        if it == 1:
            batch = random_genotypes(rng_boot, cfg.batch_size, 42, template.lo, template.hi)
            batch += random_genotypes(rng_boot, cfg.batch_size, 42, template.lo, template.hi)
        else:
            parents = select_parents(container, SelectorKind.UNIFORM, cfg.batch_size, rng_select)
            batch = [polynomial_mutation(p, mut, rng_mutate) for p in parents]
        for genotype, (fitness, sensory, bd) in zip(batch, task.evaluate_batch(batch)):
            container.try_add(Individual(genotype, fitness, sensory,
                                         encoder.encode(sensory), bd), iteration=it)
        if it in schedule:
            data = np.stack([ind.sensory for ind in container])
            train(encoder, data, train_cfg, adam, train_rng)
            container.recompute_descriptors(encoder.encode)
            desc = container.descriptors()
            recon = float(np.mean(encoder.reconstruction_error(data)))
            cov = coverage(container.individuals, task.bd_bounds)
            print(f"  it {it:5d} size {len(container):5d} cov {cov:6.2f} "
                  f"recon {recon:.5f} latstd {desc.std(axis=0).mean():.4f} "
                  f"maxd {container.max_pairwise_distance():.3f} "
                  f"d_min {container.d_min if container.d_min is None else round(container.d_min, 5)}",
                  flush=True)
            if not d_min_ready:
                container.d_min = max(D_MIN_INIT_FRACTION * container.max_pairwise_distance(), 1e-9)
                d_min_ready = True
        if d_min_ready:
            container.d_min = csc_update_threshold(container.d_min, len(container),
                                                   cfg.n_target, cfg.k_csc)
            if it % cfg.t_c == 0:
                container.update()
    final_cov = coverage(container.individuals, task.bd_bounds)
    print(f"  FINAL size {len(container)} cov {final_cov:.2f}", flush=True)
    return final_cov


if __name__ == "__main__":
    iters = int(sys.argv[1]) if len(sys.argv) > 1 else 700
    world = sys.argv[2] if len(sys.argv) > 2 else None
    for tag, lr, epochs, mb in (
        ("base lr1e-3 ep12 mb64", 1e-3, 12, 64),
        ("gentle lr3e-4 ep12 mb64", 3e-4, 12, 64),
        ("long lr3e-4 ep25 mb64", 3e-4, 25, 64),
    ):
        print(f"== {tag} iters={iters} world={world}", flush=True)
        instrumented(iters, 1, lr, epochs, mb, world)
