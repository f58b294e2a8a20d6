"""Least-squares (Poisson) unwrapping and the mean-field + least-squares hybrid."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .grid import GradientField, ShiftField, WrappedImage, centered_wrap, gradient_field


class LsqConvergenceError(RuntimeError):
    def __init__(self, residual, iterations):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"Poisson solver stopped after {iterations} iterations "
            f"with relative residual {residual:.3e}"
        )


def _grad_adjoint(gx, gy, shape):
    """D^T g for the forward-difference operator D = (d/dx, d/dy)."""
    out = np.zeros(shape)
    out[:, :-1] -= gx
    out[:, 1:] += gx
    out[:-1, :] -= gy
    out[1:, :] += gy
    return out


def _neumann_laplacian(psi):
    return _grad_adjoint(np.diff(psi, axis=1), np.diff(psi, axis=0), psi.shape)


@dataclass
class PoissonProblem:
    """Least-squares fit of a surface to a target gradient field.

    The normal equations ``D^T D psi = D^T g`` are a Poisson problem with
    Neumann boundaries, solved matrix-free by conjugate gradients.
    """

    target: GradientField
    tol: float = 1e-8
    max_iter: int | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return (self.target.gx.shape[0], self.target.gy.shape[1])

    def __post_init__(self):
        gx, gy = self.target
        rows, cols = gx.shape[0], gx.shape[1] + 1
        if gy.shape != (rows - 1, cols):
            raise ValueError(f"inconsistent gradient shapes {gx.shape}, {gy.shape}")
        if self.max_iter is None:
            self.max_iter = 10 * (rows + cols)

    def solve(self, mean: float = 0.0) -> np.ndarray:
        """Minimizing surface, shifted so its mean equals ``mean``."""
        shape = self.shape
        n = shape[0] * shape[1]
        rhs = _grad_adjoint(self.target.gx, self.target.gy, shape).ravel()
        # project out the constant null space so the system is consistent
        rhs -= rhs.mean()
        rhs_norm = np.linalg.norm(rhs)
        if rhs_norm == 0.0:
            return np.full(shape, float(mean))
        op = LinearOperator((n, n), matvec=lambda v: _neumann_laplacian(v.reshape(shape)).ravel(),
                            dtype=np.float64)
        iterations = 0

        def count(_):
            nonlocal iterations
            iterations += 1

        x, info = cg(op, rhs, rtol=self.tol, atol=0.0, maxiter=self.max_iter, callback=count)
        residual = np.linalg.norm(rhs - op.matvec(x)) / rhs_norm
        if info != 0 and residual > self.tol:
            raise LsqConvergenceError(residual, iterations)
        psi = x.reshape(shape)
        return psi - psi.mean() + mean


def wrapped_gradient(img: WrappedImage) -> GradientField:
    """Per-edge phase differences wrapped into [-0.5, 0.5)."""
    return GradientField(centered_wrap(img.dx()), centered_wrap(img.dy()))


def lsq_unwrap(img: WrappedImage, tol: float = 1e-8, max_iter=None) -> np.ndarray:
    """Unweighted least-squares unwrapping; the surface mean equals mean(phi)."""
    return PoissonProblem(wrapped_gradient(img), tol, max_iter).solve(img.phi.mean())


def hybrid_unwrap(img: WrappedImage, shifts: ShiftField, tol: float = 1e-8,
                  max_iter=None) -> np.ndarray:
    """Least-squares surface for the gradient field implied by ``shifts``.

    ``shifts`` may violate the zero-curl constraint; the least-squares fit
    then spreads the inconsistency instead of refusing.
    """
    return PoissonProblem(gradient_field(img, shifts), tol, max_iter).solve(img.phi.mean())
