"""Exact posterior over shift fields by exhaustive enumeration (tiny grids only)."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .grid import ShiftField, WrappedImage
from .model import ModelParams

MAX_EDGES = 12


class GridTooLargeError(ValueError):
    pass


@dataclass
class ExactPosterior:
    configs: np.ndarray        # (n_configs, n_edges) int8, a-edges then b-edges
    probabilities: np.ndarray  # (n_configs,)
    energies: np.ndarray       # (n_configs,)
    partition_value: float     # Z = sum exp(-E)
    log_partition: float
    map_config: ShiftField
    edge_marginals: tuple      # (alpha-like (R, C-1, 3), beta-like (R-1, C, 3))
    shape: tuple

    @property
    def map_probability(self) -> float:
        return float(self.probabilities.max())

    def shift_field(self, index: int) -> ShiftField:
        return _to_shift_field(self.configs[index], self.shape)


def _to_shift_field(config, shape):
    rows, cols = shape
    n_a = rows * (cols - 1)
    return ShiftField(config[:n_a].reshape(rows, cols - 1), config[n_a:].reshape(rows - 1, cols))


def enumerate_posterior(img: WrappedImage, params: ModelParams) -> ExactPosterior:
    """Evaluate exp(-joint_energy) over every shift configuration and normalize."""
    rows, cols = img.shape
    n_a = rows * (cols - 1)
    n_edges = n_a + (rows - 1) * cols
    if n_edges > MAX_EDGES:
        raise GridTooLargeError(f"{rows}x{cols} grid has {n_edges} edges; at most {MAX_EDGES} allowed")

    configs = np.array(list(itertools.product((-1, 0, 1), repeat=n_edges)), dtype=np.int8)
    a = configs[:, :n_a].reshape(-1, rows, cols - 1).astype(np.float64)
    b = configs[:, n_a:].reshape(-1, rows - 1, cols).astype(np.float64)
    c = a[:, :-1, :] + b[:, :, 1:] - a[:, 1:, :] - b[:, :, :-1]
    gx = img.dx()[None] - a
    gy = img.dy()[None] - b
    energies = (
        (c**2).sum(axis=(1, 2)) / params.temperature
        + params.data_weight * ((gx**2).sum(axis=(1, 2)) + (gy**2).sum(axis=(1, 2)))
    )
    e_min = energies.min()
    weights = np.exp(-(energies - e_min))
    total = weights.sum()
    probs = weights / total
    log_z = float(np.log(total) - e_min)

    onehot = np.eye(3)[configs.astype(np.intp) + 1]  # (n_configs, n_edges, 3)
    marg = np.einsum("n,nek->ek", probs, onehot)
    alpha = marg[:n_a].reshape(rows, cols - 1, 3)
    beta = marg[n_a:].reshape(rows - 1, cols, 3)

    best = int(np.argmax(probs))
    return ExactPosterior(
        configs=configs,
        probabilities=probs,
        energies=energies,
        partition_value=float(np.exp(log_z)),
        log_partition=log_z,
        map_config=_to_shift_field(configs[best], (rows, cols)),
        edge_marginals=(alpha, beta),
        shape=(rows, cols),
    )
