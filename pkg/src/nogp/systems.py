"""Test systems with known propagators beyond the three-level model."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .linalg import dagger, expm_hermitian
from .propagator import DrivenHamiltonian


@dataclass(frozen=True)
class CyclicSystem:
    hamiltonian: DrivenHamiltonian
    observable: np.ndarray
    exact: Callable[[float], np.ndarray] = field(repr=False)


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return scale * 0.5 * (z + z.conj().T) / np.sqrt(d)


def random_cyclic_system(rng: np.random.Generator, eigenvalues=(1.0, 1.0, 2.0, 3.0),
                         period: float = 1.0, twist: float = 1.0) -> CyclicSystem:
    """A driven system whose observable returns to itself after one period.

    ``U(t, 0) = exp(-i a(t) Y) exp(-i b(t) D)`` where ``Y`` has integer
    spectrum and ``a`` runs from 0 to ``2 pi`` with vanishing end slopes, so
    ``U(T, 0) = exp(-i b(T) D)``; ``D`` commutes with the observable, which
    makes the evolution cyclic while the eigenspaces wander in between.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    d = len(lam)
    q = random_unitary(rng, d)
    x0 = q @ np.diag(lam) @ q.conj().T
    x0 = 0.5 * (x0 + x0.conj().T)

    p = random_unitary(rng, d)
    y = p @ np.diag(rng.integers(-1, 2, size=d).astype(float)) @ p.conj().T
    y = 0.5 * (y + y.conj().T)

    dq = np.zeros((d, d), dtype=complex)
    for val in np.unique(lam):
        idx = np.flatnonzero(lam == val)
        dq[np.ix_(idx, idx)] = random_hermitian(rng, len(idx))
    dmat = q @ dq @ q.conj().T
    dmat = 0.5 * (dmat + dmat.conj().T)

    T = float(period)

    def a(s):
        return np.pi * (1 - np.cos(np.pi * s))

    def a_dot(s):
        return np.pi ** 2 / T * np.sin(np.pi * s)

    def ham(t):
        s = (t / T) % 1.0
        r = expm_hermitian(y, a(s))
        h = a_dot(s) * y + twist / T * (r @ dmat @ dagger(r))
        return 0.5 * (h + dagger(h))

    def exact(t):
        s = t / T
        return expm_hermitian(y, a(s)) @ expm_hermitian(dmat, twist * s)

    return CyclicSystem(DrivenHamiltonian(T, ham, "random-cyclic"), x0, exact)


def commuting_drive(x0, f: Callable[[float], float] | None = None,
                    period: float = 1.0) -> DrivenHamiltonian:
    """``H(t) = f(t) X0``; every eigenspace stays put and every phase block is trivial."""
    x0 = np.asarray(x0, dtype=complex)
    if f is None:
        def f(t):
            return 1.0 + 0.5 * np.sin(2 * np.pi * t / period)
    return DrivenHamiltonian(period, lambda t: f(t) * x0, "commuting")
