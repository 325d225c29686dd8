import json
import time

from latentqd.engine import RunConfig, VariantSpec, run
from latentqd.variation import SelectorKind

U = SelectorKind.UNIFORM
results = {}
for seed in (1, 2):
    cfg = RunConfig(task="maze", iterations=1500, seed=seed, batch_size=64,
                    n_target=1000, train_epochs=12, k_csc=5e-5)
    variant = VariantSpec(algorithm="aurora", selector=U, threshold_mode="csc", latent_dim=5)
    t0 = time.time()
    res = run(cfg, variant)
    results[f"maze_k5e-5_seed{seed}"] = {
        "minutes": round((time.time() - t0) / 60, 2),
        "final_size": len(res.container),
        "final_cov": res.records[-1].coverage_pct,
        "trace": [(r.iteration, r.container_size, round(r.coverage_pct, 2)) for r in res.records[::10]],
    }
    print(seed, results[f"maze_k5e-5_seed{seed}"]["final_size"],
          results[f"maze_k5e-5_seed{seed}"]["final_cov"], flush=True)
with open(".calib/results2.json", "w") as fh:
    json.dump(results, fh, indent=1)
print("DONE2")
