"""Mean-field minimization of the free energy with temperature annealing.

Each edge's belief triple is replaced by its exact minimizer given the other
triples (blockwise coordinate descent), so the free energy never increases
within a temperature. Temperatures are visited from hot to cold and the
beliefs are warm-started from one temperature to the next.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from . import _sweep_py, kernels
from .grid import ShiftField, WrappedImage, curl
from .model import BeliefField, DEFAULT_SIGMA, ModelParams, free_energy

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnnealSchedule:
    temperatures: tuple
    max_sweeps_per_temp: int = 10
    f_tolerance: float = 1e-7

    def __post_init__(self):
        temps = tuple(float(t) for t in self.temperatures)
        if not temps:
            raise ValueError("schedule needs at least one temperature")
        if any(not np.isfinite(t) or t <= 0 for t in temps):
            raise ValueError("temperatures must be positive and finite")
        if any(b >= a for a, b in zip(temps, temps[1:])):
            raise ValueError("temperatures must be strictly decreasing")
        if int(self.max_sweeps_per_temp) < 1:
            raise ValueError("max_sweeps_per_temp must be positive")
        if not self.f_tolerance > 0:
            raise ValueError("f_tolerance must be positive")
        object.__setattr__(self, "temperatures", temps)
        object.__setattr__(self, "max_sweeps_per_temp", int(self.max_sweeps_per_temp))

    @classmethod
    def geometric(cls, t_start=10.0, t_end=0.05, steps=20, max_sweeps_per_temp=10,
                  f_tolerance=1e-7) -> "AnnealSchedule":
        """``steps`` temperatures spaced geometrically from ``t_start`` to ``t_end``."""
        if steps < 1:
            raise ValueError("steps must be positive")
        if not (t_start > 0 and t_end > 0):
            raise ValueError("temperatures must be positive")
        if steps == 1:
            temps = (float(t_start),)
        else:
            temps = tuple(np.geomspace(t_start, t_end, steps))
        return cls(temps, max_sweeps_per_temp, f_tolerance)


DEFAULT_SCHEDULE = AnnealSchedule.geometric()


@dataclass
class TemperatureRecord:
    temperature: float
    sweeps: int
    free_energy: float
    curl_violations: int
    mean_entropy: float
    converged: bool
    entropy_start: float
    f_history: list = field(default_factory=list)

    @property
    def inv_temperature(self) -> float:
        return 1.0 / self.temperature


@dataclass
class SolveReport:
    records: list
    beliefs: BeliefField
    shifts: ShiftField
    converged: bool

    @property
    def violation_count(self) -> int:
        return curl(self.shifts).violation_count


def _edge_order(rows, cols, order="raster", rng=None):
    n = rows * (cols - 1) + (rows - 1) * cols
    ids = np.arange(n, dtype=np.int_)
    if order == "random":
        rng = rng if rng is not None else np.random.default_rng()
        rng.shuffle(ids)
    elif order != "raster":
        raise ValueError(f"unknown sweep order {order!r}")
    return ids


def coordinate_update(img: WrappedImage, beliefs: BeliefField, params: ModelParams,
                      edge: tuple) -> np.ndarray:
    """Exact minimizer of the free energy over one edge's triple.

    ``edge`` is ``("a", i, j)`` for a horizontal edge or ``("b", i, j)`` for a
    vertical one. Returns the new triple; ``beliefs`` is left unchanged.
    """
    kind, i, j = edge
    rows, cols = img.shape
    args = (beliefs.alpha, beliefs.beta, i, j, 1.0 / params.temperature, params.data_weight)
    if kind == "a":
        if not (0 <= i < rows and 0 <= j < cols - 1):
            raise IndexError(f"no horizontal edge ({i}, {j}) in a {rows}x{cols} grid")
        return np.array(_sweep_py.update_a(img.dx(), *args))
    if kind == "b":
        if not (0 <= i < rows - 1 and 0 <= j < cols):
            raise IndexError(f"no vertical edge ({i}, {j}) in a {rows}x{cols} grid")
        return np.array(_sweep_py.update_b(img.dy(), *args))
    raise ValueError(f"edge kind must be 'a' or 'b', got {kind!r}")


def _sweep_inplace(img, beliefs, params, order, backend=None):
    kernels.sweep_inplace(img.dx(), img.dy(), beliefs.alpha, beliefs.beta,
                          1.0 / params.temperature, params.data_weight, order, backend)


def sweep(img: WrappedImage, beliefs: BeliefField, params: ModelParams, order=None,
          backend=None):
    """One pass of coordinate updates over every edge.

    Returns ``(new_beliefs, F)``; the input beliefs are not modified.
    """
    out = beliefs.copy()
    if order is None:
        order = _edge_order(*img.shape)
    _sweep_inplace(img, out, params, order, backend)
    return out, free_energy(img, out, params)


def extract_map_shifts(beliefs: BeliefField) -> ShiftField:
    """Per-edge most probable shift; ties prefer 0, then +1, then -1."""
    # reorder to (k=0, k=1, k=-1) so argmax's first-hit rule gives the tie order
    perm = [1, 2, 0]
    values = np.array([0, 1, -1], dtype=np.int8)
    a = values[np.argmax(beliefs.alpha[..., perm], axis=-1)]
    b = values[np.argmax(beliefs.beta[..., perm], axis=-1)]
    return ShiftField(a, b)


def entropy_map(beliefs: BeliefField) -> tuple[np.ndarray, np.ndarray]:
    """Entropy in nats of every horizontal and vertical edge triple."""
    return (-xlogy(beliefs.alpha, beliefs.alpha).sum(axis=-1),
            -xlogy(beliefs.beta, beliefs.beta).sum(axis=-1))


def mean_entropy(beliefs: BeliefField) -> float:
    ea, eb = entropy_map(beliefs)
    return float((ea.sum() + eb.sum()) / (ea.size + eb.size))


def anneal(img: WrappedImage, schedule: AnnealSchedule = DEFAULT_SCHEDULE,
           sigma: float = DEFAULT_SIGMA, beliefs: BeliefField | None = None,
           order: str = "raster", seed=None, backend=None) -> SolveReport:
    """Anneal the temperature, converging the beliefs at each step.

    At every temperature, sweeps run until the relative change of F drops
    below ``schedule.f_tolerance`` or ``max_sweeps_per_temp`` is reached.
    ``converged`` in the report refers to the final temperature. Residual
    curl violations are reported, not raised.
    """
    rows, cols = img.shape
    if beliefs is None:
        beliefs = BeliefField.uniform(rows, cols)
    else:
        beliefs = beliefs.copy()
        if beliefs.shape != img.shape:
            raise ValueError(f"beliefs for {beliefs.shape} do not match image {img.shape}")
    rng = np.random.default_rng(seed)
    records = []
    for temp in schedule.temperatures:
        params = ModelParams(temp, sigma)
        f_prev = free_energy(img, beliefs, params)
        h_start = mean_entropy(beliefs)
        history = [f_prev]
        done = False
        sweeps = 0
        while sweeps < schedule.max_sweeps_per_temp:
            ids = _edge_order(rows, cols, order, rng)
            _sweep_inplace(img, beliefs, params, ids, backend)
            sweeps += 1
            f_new = free_energy(img, beliefs, params)
            history.append(f_new)
            change = abs(f_prev - f_new)
            f_prev = f_new
            if change <= schedule.f_tolerance * max(abs(f_new), 1e-300):
                done = True
                break
        shifts = extract_map_shifts(beliefs)
        rec = TemperatureRecord(
            temperature=temp,
            sweeps=sweeps,
            free_energy=f_prev,
            curl_violations=curl(shifts).violation_count,
            mean_entropy=mean_entropy(beliefs),
            converged=done,
            entropy_start=h_start,
            f_history=history,
        )
        log.debug("T=%.4g sweeps=%d F=%.6g violations=%d H=%.4g", temp, sweeps,
                  rec.free_energy, rec.curl_violations, rec.mean_entropy)
        records.append(rec)
    return SolveReport(records, beliefs, extract_map_shifts(beliefs), records[-1].converged)


def pixel_entropy(beliefs: BeliefField) -> np.ndarray:
    """Mean entropy of the edges touching each pixel, as an R x C raster."""
    ea, eb = entropy_map(beliefs)
    rows, cols = beliefs.shape
    total = np.zeros((rows, cols))
    count = np.zeros((rows, cols))
    total[:, :-1] += ea
    total[:, 1:] += ea
    count[:, :-1] += 1
    count[:, 1:] += 1
    total[:-1, :] += eb
    total[1:, :] += eb
    count[:-1, :] += 1
    count[1:, :] += 1
    return total / count
