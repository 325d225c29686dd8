"""Task adapters: a uniform surface over the simulated environments."""

from __future__ import annotations

import math

import numpy as np

from ..core import Genotype
from . import airhockey, maze


class MazeTask:
    name = "maze"
    genotype_length = maze.GENOTYPE_LENGTH
    gene_lo = -maze.GENE_BOUND
    gene_hi = maze.GENE_BOUND
    sensory_dim = maze.IMAGE_SIZE * maze.IMAGE_SIZE
    bd_bounds = ((0.0, maze.ARENA_SIZE), (0.0, maze.ARENA_SIZE))
    encoder_hidden = [256, 64]
    mutation_rate = 0.05
    k_vat = 25.0

    def __init__(self, world_file=None):
        self.world = maze.load_world(world_file)

    def evaluate(self, genotype: Genotype):
        return maze.evaluate_maze(genotype, self.world)

    def evaluate_batch(self, genotypes: list[Genotype]):
        return maze.evaluate_maze_batch(genotypes, self.world)

    def genotype_template(self) -> Genotype:
        return Genotype(
            np.zeros(self.genotype_length), self.gene_lo, self.gene_hi
        )


class AirHockeyTask:
    name = "airhockey"
    genotype_length = airhockey.GENOTYPE_LENGTH
    gene_lo = -math.pi
    gene_hi = math.pi
    sensory_dim = airhockey.SENSORY_DIM
    bd_bounds = ((-1.0, 1.0), (-1.0, 1.0))
    encoder_hidden = [32, 8]
    mutation_rate = 0.15
    k_vat = 18.0

    def evaluate(self, genotype: Genotype):
        return airhockey.evaluate_airhockey(genotype)

    def genotype_template(self) -> Genotype:
        return Genotype(
            np.zeros(self.genotype_length), self.gene_lo, self.gene_hi
        )


def get_task(name: str, world_file=None):
    if name == "maze":
        return MazeTask(world_file)
    if name == "airhockey":
        return AirHockeyTask()
    raise ValueError(f"unknown task {name!r}")


TASK_NAMES = ("maze", "airhockey")
