"""A miniature end-to-end optimisation: latent-descriptor QD on the
air-hockey task, 120 iterations, printed metric progression. The same run
is reachable from the command line via

    latentqd run --config airhockey-small --set iterations=120 \
        --set replications=1 --set output_dir=runs/demo
"""

from latentqd.engine import RunConfig, VariantSpec, run
from latentqd.metrics import avg_container_loss
from latentqd.variation import SelectorKind

if __name__ == "__main__":
    cfg = RunConfig(
        task="airhockey", iterations=120, seed=1, batch_size=32, n_target=200,
        metrics_cadence=10,
    )
    variant = VariantSpec(
        algorithm="aurora", selector=SelectorKind.UNIFORM,
        threshold_mode="csc", latent_dim=2,
    )
    result = run(cfg, variant)
    print(f"{'iter':>5} {'size':>5} {'coverage%':>10} {'grid fitness':>13} {'d_min':>9}")
    for r in result.records:
        d = "-" if r.d_min is None else f"{r.d_min:.4f}"
        f = "-" if r.grid_mean_fitness is None else f"{r.grid_mean_fitness:.2f}"
        print(f"{r.iteration:>5} {r.container_size:>5} {r.coverage_pct:>10.2f} {f:>13} {d:>9}")
    print(f"\nevaluations: {result.evaluations}")
    print(f"encoder updates at: {result.encoder_update_iterations}")
    print(f"container loss per update: {avg_container_loss(result.container):.1f}")
