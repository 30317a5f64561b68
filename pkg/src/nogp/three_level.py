"""Closed-form three-level model: a dark state plus a resonant bright/excited pair.

With ``|b> = conj(w0)|0> + conj(w1)|1>`` and the pulse area ``Phi(T) = pi`` the
evolution returns the observable ``l1 (|0><0| + |1><1|) + l2 |2><2|`` to
itself and imprints a one-qubit gate on the ``{|0>, |1>}`` block.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import simpson

from .linalg import SpectralDecomposition, dagger, spectral_decompose
from .propagator import DrivenHamiltonian

PULSE_SHAPES = ("const", "sin2", "bump")


@dataclass(frozen=True)
class Pulse:
    """Pulse ``Omega(t)`` on ``[0, T]`` with its running area ``Phi(t)``."""

    shape: str
    period: float
    rate: Callable[[float], float] = field(repr=False)
    area: Callable[[float], float] = field(repr=False)

    def __call__(self, t: float) -> float:
        return self.rate(t)


def make_pulse(shape: str = "const", period: float = 1.0) -> Pulse:
    """Pulses of total area pi, extended periodically beyond ``[0, T]``.

    ``bump`` is ``(12 pi / T) s (1 - s)^2`` with ``s = t / T``: smooth inside
    the period but skewed towards the start.
    """
    T = float(period)
    if T <= 0:
        raise ValueError("period must be positive")

    def frac(t):
        return (t / T) % 1.0

    def periodic_area(local):
        return lambda t: np.pi * np.floor(t / T) + local(frac(t))

    if shape == "const":
        return Pulse(shape, T, lambda t: np.pi / T, periodic_area(lambda s: np.pi * s))
    if shape == "sin2":
        return Pulse(shape, T, lambda t: 2 * np.pi / T * np.sin(np.pi * t / T) ** 2,
                     periodic_area(lambda s: np.pi * s - 0.5 * np.sin(2 * np.pi * s)))
    if shape == "bump":
        def rate(t):
            s = frac(t)
            return 12 * np.pi / T * s * (1 - s) ** 2
        return Pulse(shape, T, rate,
                     periodic_area(lambda s: 12 * np.pi * (s ** 2 / 2 - 2 * s ** 3 / 3 + s ** 4 / 4)))
    if shape == "zero":
        return Pulse(shape, T, lambda t: 0.0, lambda t: 0.0)
    raise ValueError(f"unknown pulse shape {shape!r}")


@dataclass(frozen=True)
class ThreeLevelParams:
    """Couplings ``(w0, w1)``, pulse, and the angles ``(phi, varphi)`` of the block-1 basis."""

    omega0: complex
    omega1: complex
    pulse: Pulse
    phi: float = 0.0
    varphi: float = 0.0
    check_area: bool = True

    def __post_init__(self):
        norm = abs(self.omega0) ** 2 + abs(self.omega1) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"|w0|^2 + |w1|^2 = {norm!r}, expected 1")
        if self.check_area and self.pulse.shape != "zero":
            t = np.linspace(0.0, self.period, 4001)
            area = simpson([self.pulse(x) for x in t], x=t)
            if abs(area - np.pi) > 1e-10:
                raise ValueError(f"pulse area {area!r} differs from pi")

    @property
    def period(self) -> float:
        return self.pulse.period

    @classmethod
    def from_gate_angles(cls, theta: float, vartheta: float, pulse: Pulse | str = "const",
                         period: float = 1.0) -> "ThreeLevelParams":
        """``w0 = e^{i vartheta} sin(theta/2)``, ``w1 = -cos(theta/2)``, computational basis."""
        if isinstance(pulse, str):
            pulse = make_pulse(pulse, period)
        return cls(np.exp(1j * vartheta) * np.sin(theta / 2), -np.cos(theta / 2), pulse)

    def bright(self) -> np.ndarray:
        return np.array([np.conj(self.omega0), np.conj(self.omega1), 0.0], dtype=complex)

    def dark(self) -> np.ndarray:
        return np.array([-self.omega1, self.omega0, 0.0], dtype=complex)

    def coupling(self) -> np.ndarray:
        """``K = |2><b| + |b><2|``."""
        b = self.bright()
        e2 = np.array([0, 0, 1], dtype=complex)
        return np.outer(e2, b.conj()) + np.outer(b, e2.conj())

    def block_basis(self) -> np.ndarray:
        """Columns ``psi_1, psi_2`` of the initial ``{|0>, |1>}`` basis (3 x 2)."""
        c, s = np.cos(self.phi / 2), np.sin(self.phi / 2)
        e = np.exp(1j * self.varphi)
        return np.array([[c, -s / e], [e * s, c], [0, 0]], dtype=complex)


def build_hamiltonian(p: ThreeLevelParams) -> DrivenHamiltonian:
    k = p.coupling()
    pulse = p.pulse
    return DrivenHamiltonian(p.period, lambda t: pulse(t) * k, f"three-level/{pulse.shape}")


def closed_form_propagator(p: ThreeLevelParams, t: float) -> np.ndarray:
    """``U(t, 0) = |d><d| + cos Phi (|b><b| + |2><2|) - i sin Phi K``."""
    d, b = p.dark(), p.bright()
    e2 = np.array([0, 0, 1], dtype=complex)
    phi = p.pulse.area(t)
    bright_pair = np.outer(b, b.conj()) + np.outer(e2, e2)
    return np.outer(d, d.conj()) + np.cos(phi) * bright_pair - 1j * np.sin(phi) * p.coupling()


def closed_form_g1(theta: float, vartheta: float) -> np.ndarray:
    """``n . sigma`` with ``n = (sin theta cos vartheta, sin theta sin vartheta, cos theta)``."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, np.exp(-1j * vartheta) * s],
                     [np.exp(1j * vartheta) * s, -c]], dtype=complex)


def general_basis_g1(p: ThreeLevelParams) -> np.ndarray:
    """Block-1 phase for the basis rotated by ``(phi, varphi)`` and arbitrary couplings."""
    w0, w1, f, v = p.omega0, p.omega1, p.phi, p.varphi
    a0, a1 = abs(w0) ** 2, abs(w1) ** 2
    ev = np.exp(1j * v)
    g11 = (a1 - a0) * np.cos(f) - (w0 * np.conj(w1) / ev + ev * np.conj(w0) * w1) * np.sin(f)
    g21 = (ev * (a0 - a1) * np.sin(f) - 2 * w0 * np.conj(w1) * np.cos(f / 2) ** 2
           + 2 * ev ** 2 * np.conj(w0) * w1 * np.sin(f / 2) ** 2)
    return np.array([[g11, np.conj(g21)], [g21, -g11]], dtype=complex)


def closed_form_g2() -> complex:
    return -1.0 + 0j


def observable(lam1: float = 1.0, lam2: float = 2.0) -> np.ndarray:
    """``X0 = lam1 (|0><0| + |1><1|) + lam2 |2><2|``."""
    if lam1 == lam2:
        raise ValueError("lam1 and lam2 must differ")
    return np.diag([lam1, lam1, lam2]).astype(complex)


def spectrum(p: ThreeLevelParams, lam1: float = 1.0, lam2: float = 2.0) -> SpectralDecomposition:
    """Decomposition of :func:`observable` with block 1 expressed in ``p.block_basis()``.

    The two-dimensional block is always listed first.
    """
    s = spectral_decompose(observable(min(lam1, lam2), max(lam1, lam2)))
    return s.with_block_basis(0, dagger(s.block(0)) @ p.block_basis())
