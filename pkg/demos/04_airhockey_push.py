"""Air-hockey episodes: a do-nothing arm, a scripted sweep through the puck
spawn, and a random genotype. Shows the 50-sample puck trajectory that forms
the sensory data and the final-position descriptor deduced from it."""

import math

import numpy as np

from latentqd.core import Genotype, RngStreams
from latentqd.tasks.airhockey import evaluate_airhockey


def show(tag, genotype):
    fitness, sensory, bd = evaluate_airhockey(genotype)
    traj = sensory.reshape(-1, 2)
    moved = float(np.linalg.norm(traj[-1] - traj[0]))
    print(f"{tag:18s} fitness {fitness:9.3f}  final ({bd[0]: .3f}, {bd[1]: .3f})  "
          f"displacement {moved:.3f}")
    marks = [0, 9, 19, 29, 39, 49]
    for m in marks:
        print(f"    t={0.1 * (m + 1):3.1f}s  puck ({traj[m, 0]: .3f}, {traj[m, 1]: .3f})")
    assert sensory[-2] == bd[0] and sensory[-1] == bd[1]  # bd deducible from sd
    return bd


if __name__ == "__main__":
    bounds = (-math.pi, math.pi)
    zero = Genotype(np.zeros(8), *bounds)
    show("idle arm", zero)

    sweep = Genotype(
        np.array([math.pi / 2 - 0.3, 0, 0, 0, math.pi / 2 + 0.3, 0, 0, 0]), *bounds
    )
    show("sweep through", sweep)

    rng = RngStreams(3).stream("bootstrap")
    random_g = Genotype(rng.uniform(-math.pi, math.pi, 8), *bounds)
    show("random config", random_g)
