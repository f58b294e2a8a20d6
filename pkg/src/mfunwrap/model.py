"""Relaxed gradient-field MRF: joint energy and variational free energy.

The joint density over shifts and phases is ``p(a, b, phi) ~ exp(-E)`` with

    E = sum_plaquettes c**2 / T
        + (1 / 2 sigma**2) * (sum_a (dx - a)**2 + sum_b (dy - b)**2)

and the factorized beliefs ``alpha`` / ``beta`` give the free energy
``F = -H(q) + E_q[E]``. All log-probabilities here are unnormalized.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .grid import ShiftField, WrappedImage, curl

# k values in the order the last axis of a belief array stores them
K = np.array([-1.0, 0.0, 1.0])
PROB_FLOOR = 1e-12
DEFAULT_SIGMA = 0.3


@dataclass(frozen=True)
class ModelParams:
    temperature: float
    sigma: float = DEFAULT_SIGMA

    def __post_init__(self):
        if not (np.isfinite(self.temperature) and self.temperature > 0):
            raise ValueError(f"temperature must be positive, got {self.temperature}")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    @property
    def data_weight(self) -> float:
        return 1.0 / (2.0 * self.sigma**2)


@dataclass
class BeliefField:
    """Per-edge probability triples over k = -1, 0, 1.

    ``alpha`` has shape (R, C-1, 3) and ``beta`` (R-1, C, 3). The arrays are
    updated in place by the solver; use :meth:`copy` to snapshot.
    """

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        self.alpha = np.ascontiguousarray(self.alpha, dtype=np.float64)
        self.beta = np.ascontiguousarray(self.beta, dtype=np.float64)
        a, b = self.alpha, self.beta
        if a.ndim != 3 or b.ndim != 3 or a.shape[2] != 3 or b.shape[2] != 3:
            raise ValueError("belief arrays must have shape (..., ..., 3)")
        if b.shape[:2] != (a.shape[0] - 1, a.shape[1] + 1):
            raise ValueError(f"inconsistent belief shapes: alpha {a.shape}, beta {b.shape}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.alpha.shape[0], self.alpha.shape[1] + 1)

    @classmethod
    def uniform(cls, rows: int, cols: int) -> "BeliefField":
        return cls(
            np.full((rows, cols - 1, 3), 1.0 / 3.0),
            np.full((rows - 1, cols, 3), 1.0 / 3.0),
        )

    @classmethod
    def point_mass(cls, shifts: ShiftField) -> "BeliefField":
        """Deterministic beliefs concentrated on ``shifts``."""
        eye = np.eye(3)
        return cls(eye[shifts.a.astype(np.intp) + 1], eye[shifts.b.astype(np.intp) + 1])

    @classmethod
    def random(cls, rows: int, cols: int, rng: np.random.Generator) -> "BeliefField":
        return cls(
            rng.dirichlet(np.ones(3), size=(rows, cols - 1)),
            rng.dirichlet(np.ones(3), size=(rows - 1, cols)),
        )

    def copy(self) -> "BeliefField":
        return BeliefField(self.alpha.copy(), self.beta.copy())

    def validate(self, atol: float = 1e-9) -> None:
        for name, p in (("alpha", self.alpha), ("beta", self.beta)):
            if not np.all(np.isfinite(p)) or np.any(p < 0):
                raise ValueError(f"{name} has negative or non-finite entries")
            if not np.allclose(p.sum(axis=-1), 1.0, rtol=0, atol=atol):
                raise ValueError(f"{name} triples do not sum to 1")


def _check_shape(img: WrappedImage, shape: tuple[int, int]) -> None:
    if tuple(shape) != img.shape:
        raise ValueError(f"shape mismatch: image {img.shape}, field {tuple(shape)}")


def joint_energy(img: WrappedImage, shifts: ShiftField, params: ModelParams) -> float:
    """Energy ``E`` with ``p(a, b, phi) ~ exp(-E)``."""
    _check_shape(img, shifts.shape)
    c = curl(shifts).c
    gx = img.dx() - shifts.a
    gy = img.dy() - shifts.b
    prior = np.sum(c.astype(np.float64) ** 2) / params.temperature
    data = params.data_weight * (np.sum(gx**2) + np.sum(gy**2))
    return float(prior + data)


def _moments(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = p[..., 2] - p[..., 0]
    second = p[..., 2] + p[..., 0]
    return mean, second - mean**2


def negative_entropy(beliefs: BeliefField) -> float:
    """Sum of ``p log p`` over every triple (natural log, 0 log 0 = 0)."""
    return float(xlogy(beliefs.alpha, beliefs.alpha).sum() + xlogy(beliefs.beta, beliefs.beta).sum())


def expected_curl_sq_map(beliefs: BeliefField) -> np.ndarray:
    """E_q[c**2] for every plaquette, via means and variances of the four edges."""
    ma, va = _moments(beliefs.alpha)
    mb, vb = _moments(beliefs.beta)
    mean = ma[:-1, :] + mb[:, 1:] - ma[1:, :] - mb[:, :-1]
    var = va[:-1, :] + vb[:, 1:] + va[1:, :] + vb[:, :-1]
    return mean**2 + var


def expected_plaquette_curl_sq(beliefs: BeliefField, i: int, j: int) -> float:
    """E_q[(k + l - m - n)**2] for plaquette (i, j) by explicit 81-term sum.

    ``k ~ alpha[i, j]``, ``l ~ beta[i, j+1]``, ``m ~ alpha[i+1, j]``,
    ``n ~ beta[i, j]``.
    """
    rows, cols = beliefs.shape
    if not (0 <= i < rows - 1 and 0 <= j < cols - 1):
        raise IndexError(f"plaquette ({i}, {j}) outside a {rows}x{cols} grid")
    pk = beliefs.alpha[i, j]
    pl = beliefs.beta[i, j + 1]
    pm = beliefs.alpha[i + 1, j]
    pn = beliefs.beta[i, j]
    total = 0.0
    for (ik, k), (il, l), (im, m), (in_, n) in itertools.product(enumerate(K), repeat=4):
        total += pk[ik] * pl[il] * pm[im] * pn[in_] * (k + l - m - n) ** 2
    return float(total)


def data_cost(img: WrappedImage, beliefs: BeliefField) -> float:
    """Expected squared residual, unweighted."""
    dx = img.dx()[..., None] - K
    dy = img.dy()[..., None] - K
    return float(np.sum(beliefs.alpha * dx**2) + np.sum(beliefs.beta * dy**2))


def free_energy(img: WrappedImage, beliefs: BeliefField, params: ModelParams) -> float:
    """Variational free energy ``F = sum p log p + E_q[E]``."""
    _check_shape(img, beliefs.shape)
    beliefs.validate()
    plaquette = expected_curl_sq_map(beliefs).sum() / params.temperature
    return float(
        negative_entropy(beliefs) + plaquette + params.data_weight * data_cost(img, beliefs)
    )


def free_energy_terms(img: WrappedImage, beliefs: BeliefField, params: ModelParams) -> dict:
    """The three parts of ``F`` separately, for diagnostics."""
    return {
        "neg_entropy": negative_entropy(beliefs),
        "plaquette": float(expected_curl_sq_map(beliefs).sum() / params.temperature),
        "data": params.data_weight * data_cost(img, beliefs),
    }
