"""Quality-diversity optimisation with online-learned latent behavioural
descriptors: unstructured archive with adaptive distance threshold (CSC /
VAT), from-scratch autoencoder, two simulated robotic tasks, baselines and
an experiment harness."""

from .container import Container, ContainerParams, csc_update_threshold, vat_update_threshold
from .core import Genotype, Individual, RngStreams, clamp_to_bounds, euclidean_distance
from .engine import RunConfig, RunResult, VariantSpec, run
from .metrics import avg_container_loss, coverage, grid_mean_fitness, trajectory_diversity
from .reduction import Autoencoder, TrainConfig, encoder_update_schedule, fc_autoencoder, pca_fit
from .variation import MutationParams, SelectorKind, polynomial_mutation, select_parents

__version__ = "0.1.0"

__all__ = [
    "Autoencoder",
    "Container",
    "ContainerParams",
    "Genotype",
    "Individual",
    "MutationParams",
    "RngStreams",
    "RunConfig",
    "RunResult",
    "SelectorKind",
    "TrainConfig",
    "VariantSpec",
    "avg_container_loss",
    "clamp_to_bounds",
    "coverage",
    "csc_update_threshold",
    "encoder_update_schedule",
    "euclidean_distance",
    "fc_autoencoder",
    "grid_mean_fitness",
    "pca_fit",
    "polynomial_mutation",
    "run",
    "select_parents",
    "trajectory_diversity",
    "vat_update_threshold",
]
