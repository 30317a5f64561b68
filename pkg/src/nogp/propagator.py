"""Propagators of time-dependent Hamiltonians and Heisenberg-picture evolution."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import DimensionMismatch, NonHermitianSample
from .linalg import (HERM_TOL, SpectralDecomposition, as_observable, dagger,
                     expm_hermitian, hermitian_residual)


@dataclass(frozen=True)
class DrivenHamiltonian:
    """A T-periodic Hamiltonian ``t -> H(t)``.

    ``func`` must return a Hermitian matrix for every real ``t``.  Periodicity
    and Hermiticity are only checked at sample times (see :meth:`check`).
    """

    period: float
    func: Callable[[float], np.ndarray] = field(repr=False)
    label: str = ""

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self.func(t), dtype=complex)

    @property
    def dim(self) -> int:
        return self(0.0).shape[0]

    def sample(self, times) -> np.ndarray:
        return np.stack([self(float(t)) for t in np.asarray(times, dtype=float)])

    def check(self, times=None, tol: float = HERM_TOL) -> None:
        """Raise if any sample is non-Hermitian or breaks T-periodicity."""
        if times is None:
            times = np.linspace(0.0, self.period, 17)
        for t in np.asarray(times, dtype=float):
            h = self(t)
            if hermitian_residual(h) > tol:
                raise NonHermitianSample(f"H({t:.6g}) is not Hermitian")
            if np.max(np.abs(self(t + self.period) - h)) > tol:
                raise ValueError(f"H is not {self.period}-periodic at t={t:.6g}")

    def shifted(self, c: Callable[[float], float], label: str | None = None) -> "DrivenHamiltonian":
        """``H(t) + c(t) I``."""
        base = self.func
        d = self.dim
        return DrivenHamiltonian(self.period, lambda t: base(t) + c(t) * np.eye(d),
                                 label if label is not None else f"{self.label}+shift")


@dataclass(frozen=True)
class PropagatorGrid:
    """Samples ``U(t_i, 0)`` on a uniform grid ``0 = t_0 < ... < t_N``."""

    times: np.ndarray
    unitaries: np.ndarray

    @property
    def step_count(self) -> int:
        return len(self.times) - 1

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def dim(self) -> int:
        return self.unitaries.shape[-1]

    @property
    def final(self) -> np.ndarray:
        return self.unitaries[-1]

    def backward(self) -> np.ndarray:
        """``U(0, t_i) = U(t_i, 0)^dagger`` for every grid time."""
        return dagger(self.unitaries)


def _check_samples(hs: np.ndarray, times: np.ndarray, tol: float) -> None:
    res = np.max(np.abs(hs - dagger(hs)), axis=(1, 2))
    bad = np.flatnonzero(res > tol)
    if bad.size:
        i = int(bad[0])
        raise NonHermitianSample(f"H({times[i]:.6g}) has Hermiticity residual {res[i]:.3e}")


def evolve(h: DrivenHamiltonian, steps: int = 2000, t_final: float | None = None,
           herm_tol: float = HERM_TOL) -> PropagatorGrid:
    """Integrate ``i dU/dt = H(t) U`` with the exponential midpoint rule.

    Each step multiplies by ``exp(-i H(t_mid) dt)``, which is unitary to the
    accuracy of the Hermitian eigensolver; the global error is O(dt^2).
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    t_final = h.period if t_final is None else float(t_final)
    times = np.linspace(0.0, t_final, steps + 1)
    dt = times[1] - times[0]
    mids = times[:-1] + 0.5 * dt
    hs = h.sample(mids)
    _check_samples(hs, mids, herm_tol)
    step_u = expm_hermitian(0.5 * (hs + dagger(hs)), dt)

    d = hs.shape[-1]
    us = np.empty((steps + 1, d, d), dtype=complex)
    us[0] = np.eye(d)
    for i in range(steps):
        us[i + 1] = step_u[i] @ us[i]
    return PropagatorGrid(times, us)


def dyson_series(h: DrivenHamiltonian, t: float, order: int, substeps: int) -> np.ndarray:
    """Truncated Dyson series for ``U(t, 0)`` by nested trapezoid quadrature.

    Meant as a low-order reference, not as an integrator.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if substeps < 10 * order:
        raise ValueError("substeps must be at least 10 * order")
    s = np.linspace(0.0, t, substeps + 1)
    hs = h.sample(s)
    d = hs.shape[-1]
    term = np.broadcast_to(np.eye(d, dtype=complex), hs.shape)
    total = np.eye(d, dtype=complex)
    for _ in range(order):
        term = cumulative_trapezoid(-1j * hs @ term, s, axis=0, initial=0)
        total = total + term[-1]
    return total


def heisenberg_evolve(grid: PropagatorGrid, x0) -> np.ndarray:
    """``X(t_i) = U(0, t_i) X0 U(t_i, 0)`` stacked along the first axis."""
    x0 = as_observable(x0)
    if x0.shape[0] != grid.dim:
        raise DimensionMismatch(f"observable dim {x0.shape[0]} != propagator dim {grid.dim}")
    u = grid.unitaries
    return dagger(u) @ x0 @ u


def cyclicity_residual(grid: PropagatorGrid, spectrum: SpectralDecomposition) -> float:
    """``max_j max|U(0,T) E_j U(T,0) - E_j|`` at the last grid time."""
    if spectrum.dim != grid.dim:
        raise DimensionMismatch(f"spectrum dim {spectrum.dim} != propagator dim {grid.dim}")
    u = grid.final
    return max(float(np.max(np.abs(u.conj().T @ p @ u - p))) for p in spectrum.projections)
