import json
import time

from latentqd.engine import RunConfig, VariantSpec, run
from latentqd.variation import SelectorKind

results = {}

def go(tag, cfg, variant):
    t0 = time.time()
    res = run(cfg, variant)
    dt = time.time() - t0
    results[tag] = {
        "minutes": round(dt / 60, 2),
        "final_size": len(res.container),
        "final_cov": res.records[-1].coverage_pct,
        "trace": [(r.iteration, r.container_size, round(r.coverage_pct, 2)) for r in res.records[::3]],
    }
    print(tag, json.dumps(results[tag])[:400], flush=True)

U = SelectorKind.UNIFORM
go("maze_aurora_seed1",
   RunConfig(task="maze", iterations=1500, seed=1, batch_size=64, n_target=1000, train_epochs=12),
   VariantSpec(algorithm="aurora", selector=U, threshold_mode="csc", latent_dim=5))
go("ah_aurora_seed1",
   RunConfig(task="airhockey", iterations=800, seed=1, batch_size=64, n_target=1000),
   VariantSpec(algorithm="aurora", selector=U, threshold_mode="csc", latent_dim=2))
go("ah_vat8_seed1",
   RunConfig(task="airhockey", iterations=800, seed=1, batch_size=64, n_target=1000),
   VariantSpec(algorithm="aurora", selector=U, threshold_mode="vat", latent_dim=8))
go("ah_csc8_seed1",
   RunConfig(task="airhockey", iterations=800, seed=1, batch_size=64, n_target=1000),
   VariantSpec(algorithm="aurora", selector=U, threshold_mode="csc", latent_dim=8))
go("maze_hc_seed1",
   RunConfig(task="maze", iterations=1500, seed=1, batch_size=64, n_target=1000),
   VariantSpec(algorithm="hc_qd", selector=U, threshold_mode="csc", descriptor_source="hand_coded"))
go("maze_random_seed1",
   RunConfig(task="maze", iterations=1500, seed=1, batch_size=64, n_target=1000),
   VariantSpec(algorithm="random_search", selector=SelectorKind.RANDOM, threshold_mode="csc", descriptor_source="hand_coded"))

with open(".calib/results.json", "w") as fh:
    json.dump(results, fh, indent=1)
print("DONE")
