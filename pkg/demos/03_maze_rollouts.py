"""Maze task rollouts: drive a few random controllers and look at what the
optimiser sees -- energy fitness, final position, and the 64x64 top-down
image used as sensory data (printed as ASCII)."""

import numpy as np

from latentqd.core import RngStreams, random_genotypes
from latentqd.tasks.maze import GENOTYPE_LENGTH, IMAGE_SIZE, evaluate_maze, load_world

GLYPHS = {0.0: " ", 0.5: "+", 1.0: "@"}


def ascii_image(sensory):
    img = sensory.reshape(IMAGE_SIZE, IMAGE_SIZE)
    lines = []
    for row in img[::-2]:  # top of the arena first, halved vertically
        lines.append("".join(GLYPHS[v] for v in row))
    return "\n".join(lines)


if __name__ == "__main__":
    world = load_world()
    rng = RngStreams(7).stream("bootstrap")
    genotypes = random_genotypes(rng, 6, GENOTYPE_LENGTH, -5.0, 5.0)
    print(f"world: {world.walls.shape[0]} wall segments, start {world.start_pose}")
    results = []
    for i, g in enumerate(genotypes):
        fitness, sensory, bd = evaluate_maze(g, world)
        results.append((fitness, sensory, bd))
        print(f"controller {i}: fitness {fitness:10.1f}  final ({bd[0]:6.1f}, {bd[1]:6.1f})")

    far = max(range(len(results)), key=lambda i: results[i][2][0] + results[i][2][1])
    print(f"\nsensory image of controller {far} (walls '+', robot '@'):")
    print(ascii_image(results[far][1]))
