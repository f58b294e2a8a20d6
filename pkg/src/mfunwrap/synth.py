"""Synthetic terrains with known ground truth, wrapping, and error metrics.

Terrain config files are plain text, one ``key = value`` per line::

    rows = 100
    cols = 100
    slope_row = 0.02        # wavelengths per pixel down the rows
    slope_col = 0.03        # wavelengths per pixel along a row
    bump = 40, 35, 2.0, 18  # center row, center col, amplitude, width (repeatable)
    noise_std = 0.0
    seed = 0

Blank lines and ``#`` comments are ignored. Bump width is the Gaussian
standard deviation in pixels.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .grid import ShiftField, WrappedImage, centered_wrap, wrap


@dataclass(frozen=True)
class Bump:
    row: float
    col: float
    amplitude: float
    width: float


@dataclass(frozen=True)
class TerrainSpec:
    rows: int = 100
    cols: int = 100
    slope_row: float = 0.02
    slope_col: float = 0.03
    bumps: tuple = field(default_factory=tuple)
    noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.rows < 2 or self.cols < 2:
            raise ValueError("terrain must be at least 2x2")
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")
        bumps = tuple(b if isinstance(b, Bump) else Bump(*b) for b in self.bumps)
        for b in bumps:
            if b.width <= 0:
                raise ValueError("bump width must be positive")
        object.__setattr__(self, "bumps", bumps)


def smooth_spec(rows: int = 100, cols: int = 100, seed: int = 0) -> TerrainSpec:
    """Noise-free ramp plus two Gaussian bumps, scaled to the grid size.

    At 100x100 this is a (0.02, 0.03) ramp with bumps of amplitude 2.0 and
    -1.5 and widths 18 and 25 pixels.
    """
    scale = min(rows, cols) / 100.0
    amp = min(1.0, float(np.sqrt(scale)))
    return TerrainSpec(
        rows=rows,
        cols=cols,
        slope_row=0.02,
        slope_col=0.03,
        bumps=(
            Bump(0.40 * rows, 0.35 * cols, 2.0 * amp, 18.0 * scale),
            Bump(0.68 * rows, 0.70 * cols, -1.5 * amp, 25.0 * scale),
        ),
        noise_std=0.0,
        seed=seed,
    )


def default_spec(rows: int = 100, cols: int = 100, seed: int = 0) -> TerrainSpec:
    """The smooth terrain with noise of std 0.1 wavelengths.

    The noise pushes a few neighbor differences past half a wavelength, so
    the greedy shifts carry curl violations that annealing has to remove.
    """
    return replace(smooth_spec(rows, cols, seed), noise_std=0.1)


def hard_spec(rows: int = 100, cols: int = 100, seed: int = 0) -> TerrainSpec:
    """The smooth terrain plus one steep, narrow bump and noise of std 0.05."""
    base = smooth_spec(rows, cols, seed)
    scale = min(rows, cols) / 100.0
    steep = Bump(0.25 * rows, 0.72 * cols, 3.0, max(4.0 * scale, 1.0))
    return replace(base, bumps=base.bumps + (steep,), noise_std=0.05)


PRESETS = {"default": default_spec, "smooth": smooth_spec, "hard": hard_spec}


def generate(spec: TerrainSpec) -> np.ndarray:
    """Ramp + bumps + Gaussian noise, deterministic for a given seed."""
    ii, jj = np.meshgrid(np.arange(spec.rows, dtype=np.float64),
                         np.arange(spec.cols, dtype=np.float64), indexing="ij")
    psi = spec.slope_row * ii + spec.slope_col * jj
    for b in spec.bumps:
        r2 = (ii - b.row) ** 2 + (jj - b.col) ** 2
        psi = psi + b.amplitude * np.exp(-r2 / (2.0 * b.width**2))
    if spec.noise_std > 0:
        rng = np.random.default_rng(spec.seed)
        psi = psi + rng.normal(0.0, spec.noise_std, size=psi.shape)
    return psi


class SmoothnessError(ValueError):
    """The surface is too steep for shifts in {-1, 0, 1}."""


def wrap_surface(surface: np.ndarray) -> tuple[WrappedImage, ShiftField]:
    """Wrap a surface and return the ground-truth shifts that undo it."""
    psi = np.asarray(surface, dtype=np.float64)
    dpx = np.diff(psi, axis=1)
    dpy = np.diff(psi, axis=0)
    steepest = max(np.abs(dpx).max(initial=0.0), np.abs(dpy).max(initial=0.0))
    if steepest >= 1.5:
        raise SmoothnessError(f"adjacent difference {steepest:.3g} >= 1.5 wavelengths")
    img = WrappedImage(wrap(psi))
    a = np.rint(img.dx() - dpx)
    b = np.rint(img.dy() - dpy)
    if np.abs(a).max(initial=0) > 1 or np.abs(b).max(initial=0) > 1:
        raise SmoothnessError("true shifts leave {-1, 0, 1}; surface too steep")
    return img, ShiftField(a.astype(np.int8), b.astype(np.int8))


def evaluate(truth: np.ndarray, estimate: np.ndarray) -> dict:
    """Compare an unwrapped estimate with the true surface.

    ``rmse`` and ``max_abs`` are taken after removing the best integer
    global offset; ``rmse_real_offset`` removes the best real offset
    instead. ``wrapped_rmse`` compares the two modulo 1.
    """
    truth = np.asarray(truth, dtype=np.float64)
    estimate = np.asarray(estimate, dtype=np.float64)
    if truth.shape != estimate.shape:
        raise ValueError(f"shape mismatch: {truth.shape} vs {estimate.shape}")
    diff = estimate - truth
    offset = float(np.rint(diff.mean()))
    dev = diff - offset
    max_abs = float(np.abs(dev).max())
    return {
        "exact_match": max_abs < 1e-6,
        "rmse": float(np.sqrt(np.mean(dev**2))),
        "max_abs": max_abs,
        "offset": int(offset),
        "rmse_real_offset": float(np.std(diff)),
        "wrapped_rmse": float(np.sqrt(np.mean(centered_wrap(diff) ** 2))),
    }


def wrapped_rmse(phi: np.ndarray, estimate: np.ndarray) -> float:
    """RMS of the circular difference between wrap(estimate) and ``phi``."""
    return float(np.sqrt(np.mean(centered_wrap(np.asarray(estimate) - np.asarray(phi)) ** 2)))


def _parse_value(key, value):
    if key in ("rows", "cols", "seed"):
        return int(value)
    if key == "bump":
        parts = [float(p) for p in value.replace(",", " ").split()]
        if len(parts) != 4:
            raise ValueError(f"bump needs 4 numbers, got {value!r}")
        return Bump(*parts)
    if key in ("slope_row", "slope_col", "noise_std"):
        return float(value)
    raise ValueError(f"unknown terrain key {key!r}")


def parse_spec(text: str) -> TerrainSpec:
    kwargs = {}
    bumps = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        parsed = _parse_value(key, value)
        if key == "bump":
            bumps.append(parsed)
        else:
            kwargs[key] = parsed
    return TerrainSpec(bumps=tuple(bumps), **kwargs)


def format_spec(spec: TerrainSpec) -> str:
    lines = [
        f"rows = {spec.rows}",
        f"cols = {spec.cols}",
        f"slope_row = {float(spec.slope_row)!r}",
        f"slope_col = {float(spec.slope_col)!r}",
    ]
    for b in spec.bumps:
        nums = ", ".join(repr(float(v)) for v in (b.row, b.col, b.amplitude, b.width))
        lines.append(f"bump = {nums}")
    lines += [f"noise_std = {float(spec.noise_std)!r}", f"seed = {spec.seed}"]
    return "\n".join(lines) + "\n"


def load_spec(path) -> TerrainSpec:
    with open(path) as fh:
        return parse_spec(fh.read())
