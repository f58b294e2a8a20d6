"""Grid geometry, wrapping arithmetic, shift fields and integration.

Conventions: ``i`` is the row and ``j`` the column. Horizontal shifts ``a``
live on the edges between ``(i, j)`` and ``(i, j+1)``; vertical shifts ``b``
on the edges between ``(i, j)`` and ``(i+1, j)``. Phases are measured in
wavelengths, so the wrapping period is 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

SHIFT_VALUES = (-1, 0, 1)


class CurlViolationError(ValueError):
    """Raised when a shift field with nonzero curl is integrated."""

    def __init__(self, violation_count: int):
        self.violation_count = int(violation_count)
        super().__init__(
            f"shift field has {self.violation_count} curl violation(s); "
            "use hybrid_unwrap for a least-squares surface instead"
        )


@dataclass(frozen=True)
class WrappedImage:
    """R x C raster of wrapped phases in [0, 1)."""

    phi: np.ndarray

    def __post_init__(self):
        phi = np.ascontiguousarray(self.phi, dtype=np.float64)
        if phi.ndim != 2:
            raise ValueError(f"wrapped image must be 2-D, got shape {phi.shape}")
        if phi.shape[0] < 2 or phi.shape[1] < 2:
            raise ValueError(f"wrapped image must be at least 2x2, got {phi.shape}")
        if not np.all(np.isfinite(phi)):
            raise ValueError("wrapped image contains non-finite values")
        if np.any(phi < 0.0) or np.any(phi >= 1.0):
            raise ValueError("wrapped phases must lie in [0, 1)")
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    @property
    def rows(self) -> int:
        return self.phi.shape[0]

    @property
    def cols(self) -> int:
        return self.phi.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.phi.shape

    def dx(self) -> np.ndarray:
        """Raw horizontal differences phi[i, j+1] - phi[i, j]."""
        return np.diff(self.phi, axis=1)

    def dy(self) -> np.ndarray:
        """Raw vertical differences phi[i+1, j] - phi[i, j]."""
        return np.diff(self.phi, axis=0)


@dataclass(frozen=True)
class ShiftField:
    """Integer shifts ``a`` (R x C-1) and ``b`` (R-1 x C), values in {-1, 0, 1}."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.a)
        b = np.ascontiguousarray(self.b)
        if a.ndim != 2 or b.ndim != 2:
            raise ValueError("shift rasters must be 2-D")
        rows, cols = a.shape[0], a.shape[1] + 1
        if b.shape != (rows - 1, cols):
            raise ValueError(
                f"inconsistent shift shapes: a {a.shape}, b {b.shape}"
            )
        for name, arr in (("a", a), ("b", b)):
            if arr.size and not np.all(np.isin(arr, SHIFT_VALUES)):
                raise ValueError(f"shift raster {name} has values outside {{-1, 0, 1}}")
        a = a.astype(np.int8)
        b = b.astype(np.int8)
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def shape(self) -> tuple[int, int]:
        """Shape of the pixel grid the shifts belong to."""
        return (self.a.shape[0], self.a.shape[1] + 1)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "ShiftField":
        return cls(np.zeros((rows, cols - 1), np.int8), np.zeros((rows - 1, cols), np.int8))

    def __eq__(self, other):
        if not isinstance(other, ShiftField):
            return NotImplemented
        return np.array_equal(self.a, other.a) and np.array_equal(self.b, other.b)

    __hash__ = None


class CurlMap(NamedTuple):
    c: np.ndarray
    violation_count: int


class GradientField(NamedTuple):
    gx: np.ndarray
    gy: np.ndarray


def wrap(x):
    """Map ``x`` into [0, 1) by subtracting its floor.

    Works on scalars and arrays; non-finite input raises ``ValueError``.
    """
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("wrap requires finite input")
    out = arr - np.floor(arr)
    # x slightly below an integer can round up to exactly 1.0
    out = np.where(out >= 1.0, 0.0, out)
    if np.ndim(x) == 0:
        return float(out)
    return out


def centered_wrap(x):
    """Map ``x`` into [-0.5, 0.5), keeping it congruent modulo 1."""
    arr = np.asarray(x, dtype=np.float64)
    out = arr - np.floor(arr + 0.5)
    if np.ndim(x) == 0:
        return float(out)
    return out


def local_shift_guess(d: float) -> int:
    """Shift k in {-1, 0, 1} closest to the raw difference ``d``.

    Ties at ``|d| == 0.5`` round away from zero.
    """
    d = float(d)
    if not math.isfinite(d) or abs(d) >= 1.0:
        raise ValueError(f"raw phase difference must lie in (-1, 1), got {d}")
    return int(math.copysign(math.floor(abs(d) + 0.5), d))


def _shift_guess_array(d: np.ndarray) -> np.ndarray:
    return (np.sign(d) * np.floor(np.abs(d) + 0.5)).astype(np.int8)


def greedy_shift_field(img: WrappedImage) -> ShiftField:
    """Pick every edge's shift independently by ``local_shift_guess``."""
    return ShiftField(_shift_guess_array(img.dx()), _shift_guess_array(img.dy()))


def curl(shifts: ShiftField) -> CurlMap:
    """Signed shift sum around every 2x2 plaquette.

    ``c[i, j] = a[i, j] + b[i, j+1] - a[i+1, j] - b[i, j]``.
    """
    a = shifts.a.astype(np.int64)
    b = shifts.b.astype(np.int64)
    c = a[:-1, :] + b[:, 1:] - a[1:, :] - b[:, :-1]
    return CurlMap(c, int(np.count_nonzero(c)))


def gradient_field(img: WrappedImage, shifts: ShiftField) -> GradientField:
    """Unwrapped pixel differences implied by the shifts (curl not checked)."""
    if shifts.shape != img.shape:
        raise ValueError(f"shift field for {shifts.shape} does not match image {img.shape}")
    return GradientField(img.dx() - shifts.a, img.dy() - shifts.b)


def integrate(img: WrappedImage, shifts: ShiftField, order: str = "row") -> np.ndarray:
    """Sum a curl-free shift field into an unwrapped surface.

    The surface is anchored at ``psi[0, 0] = phi[0, 0]``. With ``order="row"``
    row 0 is traversed left to right and then every column downward;
    ``order="col"`` walks column 0 down and then every row rightward. Both give
    the same surface for curl-free input.
    """
    cm = curl(shifts)
    if cm.violation_count:
        raise CurlViolationError(cm.violation_count)
    gx, gy = gradient_field(img, shifts)
    psi = np.empty(img.shape)
    psi[0, 0] = img.phi[0, 0]
    if order == "row":
        psi[0, 1:] = psi[0, 0] + np.cumsum(gx[0])
        psi[1:, :] = psi[0, :] + np.cumsum(gy, axis=0)
    elif order == "col":
        psi[1:, 0] = psi[0, 0] + np.cumsum(gy[:, 0])
        psi[:, 1:] = psi[:, :1] + np.cumsum(gx, axis=1)
    else:
        raise ValueError(f"unknown integration order {order!r}")
    return psi
