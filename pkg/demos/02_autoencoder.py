"""Latent descriptors from raw data: autoencoder vs PCA.

Samples points from a curved 2-D manifold embedded in 30 dimensions, trains
the fully-connected autoencoder down to 2 latents, and compares its
reconstruction error against a 2-component PCA. Also prints the growing
encoder-update schedule used during optimisation runs.
"""

import numpy as np

from latentqd.core import RngStreams
from latentqd.reduction import (
    AdamState,
    TrainConfig,
    fc_autoencoder,
    pca_fit,
    schedule_iterations,
    train,
)


def curved_manifold(n=400, dim=30, seed=0):
    rng = np.random.default_rng(seed)
    u = rng.uniform(-1, 1, size=n)
    v = rng.uniform(-1, 1, size=n)
    basis = rng.normal(size=(3, dim)) / np.sqrt(dim)
    return np.stack([u, v, u * u - v * v], axis=1) @ basis


if __name__ == "__main__":
    data = curved_manifold()
    streams = RngStreams(42)

    model = fc_autoencoder(30, [32, 8], 2, streams.stream("encoder-init"))
    adam = AdamState.for_model(model, 1e-3)
    print("training 30 -> [32, 8] -> 2 autoencoder on 400 samples")
    mse0 = float(np.mean(model.reconstruction_error(data)))
    print(f"  initial MSE {mse0:.5f}")
    for round_idx in range(4):
        train(model, data, TrainConfig(epochs=50, minibatch=32),
              adam, streams.stream("encoder-train"))
        mse = float(np.mean(model.reconstruction_error(data)))
        print(f"  after {50 * (round_idx + 1):3d} epochs: MSE {mse:.5f}")

    pca = pca_fit(data, 2)
    pca_mse = float(np.mean(pca.reconstruction_error(data)))
    print(f"PCA with 2 components: MSE {pca_mse:.5f} "
          "(linear floor; the curved component is invisible to it)")

    z = model.encode(data[:3])
    print("first three latent descriptors:")
    for row in z:
        print(f"  [{row[0]: .4f}, {row[1]: .4f}]")

    print("\nencoder update schedule within a 1500-iteration run:")
    print(" ", schedule_iterations(1500))
