"""Unstructured archive with k-NN novelty and an adaptive distance threshold.

Admission rule: a candidate joins the archive when its descriptor is farther
than `d_min` from every member; otherwise it competes with its single nearest
neighbour under exclusive epsilon-dominance. Two controllers adjust `d_min`
toward a target archive size: a multiplicative proportional rule driven by
the current size (CSC) and a volume-based estimate from the maximal pairwise
descriptor distance (VAT). A "container update" re-inserts every member under
the current threshold; members that fail re-admission are counted as lost.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import Individual

D_MIN_FLOOR = 1e-9


@dataclass
class ContainerParams:
    """Archive hyperparameters. `n_target` is the desired archive size."""

    k: int = 15
    epsilon: float = 0.1
    n_target: int = 10_000
    k_csc: float = 5e-6
    k_vat: float = 25.0
    t_c: int = 10

    def __post_init__(self):
        if self.k < 1 or self.n_target < 1 or self.t_c < 1:
            raise ValueError("k, n_target and t_c must be positive")
        if not (0.0 <= self.epsilon < 1.0):
            raise ValueError("epsilon must lie in [0, 1)")
        if self.k_csc <= 0 or self.k_vat <= 0:
            raise ValueError("k_csc and k_vat must be positive")


class AddStatus(enum.Enum):
    ADDED = "added"
    REPLACED = "replaced"
    REJECTED = "rejected"


@dataclass
class AddResult:
    status: AddStatus
    replaced: Individual | None = None

    @property
    def accepted(self) -> bool:
        return self.status is not AddStatus.REJECTED


def csc_update_threshold(
    d_min: float, size: int, n_target: int, k_csc: float, floor: float = D_MIN_FLOOR
) -> float:
    """Proportional size control: d_min *= 1 + k_csc * (size - n_target).

    Fixed point at size == n_target. Clamped below by `floor` because the
    multiplicative rule cannot recover from zero.
    """
    return max(d_min * (1.0 + k_csc * (size - n_target)), floor)


def vat_update_threshold(
    max_pairwise_bd_distance: float, n_target: int, k_vat: float, n: int
) -> float:
    """Volume-based threshold: max pairwise distance / (k_vat * n_target)^(1/n).

    `n` is the descriptor-space dimensionality.
    """
    if n < 1 or n_target < 1 or k_vat <= 0:
        raise ValueError("vat_update_threshold needs n >= 1, n_target >= 1, k_vat > 0")
    return max_pairwise_bd_distance / (k_vat * n_target) ** (1.0 / n)


class Container:
    """Ordered unstructured archive; single-writer.

    Iteration order is insertion order. Descriptors are mirrored into a
    contiguous matrix so that distance scans are vectorised; the k-NN search
    is an exact linear scan (swap in a spatial index here if archives ever
    outgrow desk scale).
    """

    def __init__(self, params: ContainerParams | None = None):
        self.params = params or ContainerParams()
        self.d_min: float | None = None
        self.cumulative_loss = 0
        self.update_count = 0
        self._inds: list[Individual] = []
        self._ages: list[int] = []
        self._iters: list[int] = []
        self._desc: np.ndarray | None = None  # (capacity, dim) mirror
        self._next_age = 0

    def __len__(self) -> int:
        return len(self._inds)

    def __iter__(self):
        return iter(self._inds)

    @property
    def individuals(self) -> list[Individual]:
        return list(self._inds)

    @property
    def descriptor_dim(self) -> int | None:
        return None if self._desc is None or not self._inds else self._desc.shape[1]

    def descriptors(self) -> np.ndarray:
        """(size, dim) view of all member descriptors."""
        if self._desc is None:
            return np.empty((0, 0))
        return self._desc[: len(self._inds)]

    def insertion_iteration(self, index: int) -> int:
        return self._iters[index]

    # -- internal bookkeeping ------------------------------------------------

    def _ensure_capacity(self, dim: int):
        if self._desc is None or self._desc.shape[1] != dim:
            cap = max(64, 2 * len(self._inds))
            desc = np.empty((cap, dim))
            for i, ind in enumerate(self._inds):
                desc[i] = ind.descriptor
            self._desc = desc
        elif len(self._inds) >= self._desc.shape[0]:
            grown = np.empty((2 * self._desc.shape[0], dim))
            grown[: len(self._inds)] = self._desc[: len(self._inds)]
            self._desc = grown

    def _append(self, ind: Individual, iteration: int, age: int | None = None):
        self._ensure_capacity(ind.descriptor.shape[0])
        self._desc[len(self._inds)] = ind.descriptor
        self._inds.append(ind)
        if age is None:
            age = self._next_age
            self._next_age += 1
        self._ages.append(age)
        self._iters.append(iteration)

    def _remove_at(self, index: int) -> Individual:
        old = self._inds.pop(index)
        self._ages.pop(index)
        self._iters.pop(index)
        n = len(self._inds)
        self._desc[index:n] = self._desc[index + 1 : n + 1]
        return old

    def _invalidate_novelty(self):
        for ind in self._inds:
            ind.novelty = None

    def _distances_to(self, bd: np.ndarray) -> np.ndarray:
        size = len(self._inds)
        diff = self._desc[:size] - bd
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))

    # -- novelty -------------------------------------------------------------

    def novelty_score(
        self, bd: np.ndarray, k: int | None = None, exclude_index: int | None = None
    ) -> float:
        """Mean distance to the min(k, size) nearest members.

        Empty container (after exclusion) scores +inf: always novel, insert
        unconditionally. Pass `exclude_index` when scoring a member against
        the rest of the archive.
        """
        k = self.params.k if k is None else k
        if not self._inds:
            return float("inf")
        dists = self._distances_to(np.asarray(bd, dtype=np.float64))
        if exclude_index is not None:
            dists = np.delete(dists, exclude_index)
        if dists.size == 0:
            return float("inf")
        kk = min(k, dists.size)
        nearest = np.partition(dists, kk - 1)[:kk]
        return float(np.mean(nearest))

    def refresh_novelties(self) -> np.ndarray:
        """Recompute and cache the novelty of every member (self excluded)."""
        size = len(self._inds)
        scores = np.empty(size)
        desc = self._desc[:size]
        for i in range(size):
            diff = desc - desc[i]
            dists = np.sqrt(np.einsum("ij,ij->i", diff, diff))
            dists = np.delete(dists, i)
            if dists.size == 0:
                scores[i] = np.inf
            else:
                kk = min(self.params.k, dists.size)
                scores[i] = np.mean(np.partition(dists, kk - 1)[:kk])
        for ind, s in zip(self._inds, scores):
            ind.novelty = float(s)
        return scores

    # -- admission -----------------------------------------------------------

    def try_add(self, ind: Individual, iteration: int = 0) -> AddResult:
        """Offer an individual to the archive.

        Added outright when its nearest neighbour is strictly farther than
        d_min (or when d_min is not yet initialised and the descriptor is not
        an exact duplicate). Otherwise the candidate faces its nearest
        neighbour under exclusive epsilon-dominance.
        """
        bd = ind.descriptor
        if self._inds and bd.shape[0] != self._desc.shape[1]:
            raise ValueError(
                f"descriptor dim {bd.shape[0]} != container dim {self._desc.shape[1]}"
            )
        if not self._inds:
            self._append(ind, iteration)
            self._invalidate_novelty()
            return AddResult(AddStatus.ADDED)

        dists = self._distances_to(bd)
        nn = int(np.argmin(dists))
        nn_dist = dists[nn]
        threshold = 0.0 if self.d_min is None else self.d_min
        if nn_dist > threshold:
            self._append(ind, iteration)
            self._invalidate_novelty()
            return AddResult(AddStatus.ADDED)
        return self._epsilon_dominance(ind, nn, iteration)

    def append_unconditional(self, ind: Individual, iteration: int = 0) -> None:
        """Insert without threshold or replacement checks.

        Used by archives that grow linearly (no removal, duplicates allowed);
        the admission invariants of `try_add` do not apply here.
        """
        self._append(ind, iteration)
        self._invalidate_novelty()

    def _epsilon_dominance(self, ind: Individual, nn: int, iteration: int) -> AddResult:
        """Replacement duel against the nearest neighbour.

        Both novelty scores are measured against the archive minus the
        incumbent. The challenger wins when it is weakly better on both
        novelty (within factor 1-eps) and fitness (within eps*|fitness|)
        and strictly better on at least one.
        """
        eps = self.params.epsilon
        old = self._inds[nn]
        nov_new = self.novelty_score(ind.descriptor, exclude_index=nn)
        nov_old = self.novelty_score(old.descriptor, exclude_index=nn)
        fit_bar = old.fitness - eps * abs(old.fitness)
        nov_bar = (1.0 - eps) * nov_old
        nov_ok = nov_new >= nov_bar
        fit_ok = ind.fitness >= fit_bar
        strict = nov_new > nov_bar or ind.fitness > fit_bar
        if nov_ok and fit_ok and strict:
            removed = self._remove_at(nn)
            self._append(ind, iteration)
            self._invalidate_novelty()
            return AddResult(AddStatus.REPLACED, replaced=removed)
        return AddResult(AddStatus.REJECTED)

    # -- maintenance ---------------------------------------------------------

    def max_pairwise_distance(self, block: int = 512) -> float:
        """Exact maximum descriptor distance over all pairs (0 if size < 2)."""
        size = len(self._inds)
        if size < 2:
            return 0.0
        desc = self._desc[:size]
        sq = np.einsum("ij,ij->i", desc, desc)
        best = 0.0
        for start in range(0, size, block):
            chunk = desc[start : start + block]
            d2 = sq[start : start + block, None] + sq[None, :] - 2.0 * chunk @ desc.T
            m = float(d2.max())
            if m > best:
                best = m
        return float(np.sqrt(max(best, 0.0)))

    def update(self, d_min: float | None = None) -> int:
        """Re-insert every member under the (possibly new) threshold.

        Members are processed in descending fitness order, ties broken by
        insertion age (older first); each re-entry goes through `try_add`.
        Returns the number of individuals lost.
        """
        if d_min is not None:
            self.d_min = d_min
        before = len(self._inds)
        order = sorted(
            range(before), key=lambda i: (-self._inds[i].fitness, self._ages[i])
        )
        entries = [(self._inds[i], self._ages[i], self._iters[i]) for i in order]
        self._inds = []
        self._ages = []
        self._iters = []
        for ind, age, it in entries:
            if not self._inds:
                self._append(ind, it, age=age)
                continue
            dists = self._distances_to(ind.descriptor)
            nn = int(np.argmin(dists))
            threshold = 0.0 if self.d_min is None else self.d_min
            if dists[nn] > threshold:
                self._append(ind, it, age=age)
            else:
                result = self._epsilon_dominance(ind, nn, it)
                if result.status is AddStatus.REPLACED:
                    # _epsilon_dominance appended with a fresh age; restore
                    self._ages[-1] = age
        lost = before - len(self._inds)
        self.cumulative_loss += lost
        self.update_count += 1
        self._invalidate_novelty()
        return lost

    def recompute_descriptors(self, encode) -> None:
        """Replace every member's descriptor with encode(sensory).

        `encode` may map a single vector or a (size, sensory_dim) batch.
        Membership is untouched; filtering happens at the next update.
        """
        if not self._inds:
            return
        stacked = np.stack([ind.sensory for ind in self._inds])
        out = np.asarray(encode(stacked), dtype=np.float64)
        if out.ndim != 2 or out.shape[0] != len(self._inds):
            out = np.stack(
                [np.asarray(encode(ind.sensory), dtype=np.float64) for ind in self._inds]
            )
        dim = out.shape[1]
        self._desc = None
        for ind, row in zip(self._inds, out):
            ind.descriptor = row.copy()
        self._ensure_capacity(dim)
        self._invalidate_novelty()


# -- dump format ---------------------------------------------------------------

DUMP_FIXED_COLUMNS = ["replication", "iteration", "fitness", "bd_0", "bd_1"]


def write_container_dump(container: Container, path, replication: int = 0) -> None:
    """One CSV row per member: replication, insertion iteration, fitness,
    hand-coded BD, descriptor, genotype."""
    inds = container.individuals
    n_desc = inds[0].descriptor.shape[0] if inds else 0
    n_gene = len(inds[0].genotype) if inds else 0
    header = (
        DUMP_FIXED_COLUMNS
        + [f"desc_{j}" for j in range(n_desc)]
        + [f"gene_{j}" for j in range(n_gene)]
    )
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for i, ind in enumerate(inds):
            row = [str(replication), str(container.insertion_iteration(i)), repr(ind.fitness)]
            row += [repr(float(v)) for v in ind.hand_coded_bd]
            row += [repr(float(v)) for v in ind.descriptor]
            row += [repr(float(v)) for v in ind.genotype.values]
            fh.write(",".join(row) + "\n")


@dataclass
class DumpRecord:
    replication: int
    iteration: int
    fitness: float
    hand_coded_bd: np.ndarray
    descriptor: np.ndarray
    genotype: np.ndarray


def read_container_dump(path) -> list[DumpRecord]:
    """Parse a container dump; raises ValueError naming the offending line."""
    records = []
    with open(path) as fh:
        header = fh.readline().strip()
        if not header:
            raise ValueError(f"{path}: line 1: missing header")
        cols = header.split(",")
        if cols[: len(DUMP_FIXED_COLUMNS)] != DUMP_FIXED_COLUMNS:
            raise ValueError(f"{path}: line 1: unexpected header {cols[:5]}")
        n_desc = sum(c.startswith("desc_") for c in cols)
        n_gene = sum(c.startswith("gene_") for c in cols)
        expected = len(DUMP_FIXED_COLUMNS) + n_desc + n_gene
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != expected:
                raise ValueError(
                    f"{path}: line {lineno}: expected {expected} fields, got {len(parts)}"
                )
            try:
                rep = int(parts[0])
                it = int(parts[1])
                values = [float(p) for p in parts[2:]]
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
            fit = values[0]
            bd = np.array(values[1:3])
            desc = np.array(values[3 : 3 + n_desc])
            genes = np.array(values[3 + n_desc :])
            records.append(DumpRecord(rep, it, fit, bd, desc, genes))
    return records
