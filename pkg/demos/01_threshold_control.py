"""Adaptive distance thresholds on a synthetic descriptor stream.

Feeds random 2-D descriptors into an unstructured archive and compares the
two size-control strategies: the multiplicative proportional rule (CSC,
updated every step, archive re-filtered every t_c steps) and the
volume-based rule (VAT, updated every `vat_every` steps). Both aim at the
same target size.
"""

import numpy as np

from latentqd.container import (
    Container,
    ContainerParams,
    csc_update_threshold,
    vat_update_threshold,
)
from latentqd.core import Genotype, Individual

TARGET = 300
STEPS = 4000
BATCH = 10


def make_individual(rng):
    bd = rng.normal(size=2)
    return Individual(
        genotype=Genotype(bd.copy(), -10.0, 10.0),
        fitness=float(rng.normal()),
        sensory=bd.copy(),
        descriptor=bd,
        hand_coded_bd=bd.copy(),
    )


def run_csc(seed=0):
    rng = np.random.default_rng(seed)
    c = Container(ContainerParams(n_target=TARGET, k_csc=5e-5, t_c=50))
    c.d_min = 0.05
    sizes = []
    for step in range(1, STEPS + 1):
        for _ in range(BATCH):
            c.try_add(make_individual(rng), iteration=step)
        c.d_min = csc_update_threshold(c.d_min, len(c), TARGET, c.params.k_csc)
        if step % c.params.t_c == 0:
            c.update()
        sizes.append(len(c))
    return c, sizes


def run_vat(seed=0, vat_every=200):
    rng = np.random.default_rng(seed)
    c = Container(ContainerParams(n_target=TARGET, k_vat=25.0))
    sizes = []
    for step in range(1, STEPS + 1):
        for _ in range(BATCH):
            c.try_add(make_individual(rng), iteration=step)
        if step % vat_every == 0:
            d = vat_update_threshold(c.max_pairwise_distance(), TARGET,
                                     c.params.k_vat, n=2)
            c.update(d_min=d)
        sizes.append(len(c))
    return c, sizes


def report(name, container, sizes):
    tail = sizes[-500:]
    print(f"{name:>4}: final size {sizes[-1]:4d}  "
          f"(tail mean {np.mean(tail):7.1f})  "
          f"d_min {container.d_min:.4f}  "
          f"lost/update {container.cumulative_loss / max(container.update_count, 1):.1f}")


if __name__ == "__main__":
    print(f"target size = {TARGET}, {STEPS} steps x {BATCH} candidates")
    c_csc, s_csc = run_csc()
    report("CSC", c_csc, s_csc)
    c_vat, s_vat = run_vat()
    report("VAT", c_vat, s_vat)
    print("\nsize every 500 steps:")
    print("step ", *[f"{s:>6d}" for s in range(500, STEPS + 1, 500)])
    print("CSC  ", *[f"{s_csc[i - 1]:>6d}" for i in range(500, STEPS + 1, 500)])
    print("VAT  ", *[f"{s_vat[i - 1]:>6d}" for i in range(500, STEPS + 1, 500)])
