"""Gauge group, canonical connection and horizontal lifts on sampled unitary curves.

Curves in the unitary group are stored as :class:`LiftCurve` samples; tangent
vectors only ever appear as finite differences.  The partition frame is an
:class:`~nogp.linalg.EigenBasisPartition`, and "block-diagonal" always means
block-diagonal in that basis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import NogpResult
from .errors import GridTooCoarse, NotClosedBase, NotUnitary
from .linalg import (EigenBasisPartition, block_part, dagger, polar_unitary,
                     skew_part, unitary_residual)
from .propagator import PropagatorGrid


@dataclass(frozen=True)
class LiftCurve:
    times: np.ndarray
    unitaries: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        us = np.asarray(self.unitaries, dtype=complex)
        if us.ndim != 3 or len(us) != len(times):
            raise ValueError("need one unitary per sample time")
        res = float(np.max(np.abs(dagger(us) @ us - np.eye(us.shape[-1]))))
        if res > 1e-10:
            raise NotUnitary(f"lift sample off the unitary group by {res:.3e}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "unitaries", us)

    @property
    def start(self) -> np.ndarray:
        return self.unitaries[0]

    @property
    def end(self) -> np.ndarray:
        return self.unitaries[-1]


def _require_unitary(u, tol: float = 1e-8) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim < 2 or u.shape[-1] != u.shape[-2]:
        raise NotUnitary(f"expected square matrices, got shape {u.shape}")
    res = unitary_residual(u)
    if res > tol:
        raise NotUnitary(f"unitarity residual {res:.3e}")
    return u


def gauge_group_membership(u, frame: EigenBasisPartition, tol: float = 1e-8) -> bool:
    """Whether ``u`` is block-diagonal in the partition basis up to ``tol``."""
    u = _require_unitary(u)
    inner = frame.to_partition_basis(u)
    off = inner[~frame.block_mask()]
    return bool(off.size == 0 or np.max(np.abs(off)) <= tol)


def canonical_connection(p, q, frame: EigenBasisPartition) -> np.ndarray:
    """Block-diagonal part of ``p^{-1} q`` (``p`` unitary, stacks allowed)."""
    p = _require_unitary(p)
    return block_part(dagger(p) @ np.asarray(q, dtype=complex), frame)


def connection_along(lift: LiftCurve, frame: EigenBasisPartition,
                     hermitian_part: bool = False) -> np.ndarray:
    """Connection values at interior samples, tangent by central differences.

    Along a unitary curve ``U^dag dU/dt`` is skew-Hermitian; the Hermitian part
    of its central-difference estimate is pure truncation error and is
    dropped unless ``hermitian_part`` is set.
    """
    if len(lift.times) < 3:
        raise GridTooCoarse("need at least three samples")
    dt = lift.times[1] - lift.times[0]
    us = lift.unitaries
    tangent = (us[2:] - us[:-2]) / (2 * dt)
    omega = block_part(dagger(us[1:-1]) @ tangent, frame)
    return omega if hermitian_part else skew_part(omega)


def verify_horizontal(lift: LiftCurve, frame: EigenBasisPartition,
                      hermitian_part: bool = False) -> float:
    """Largest entry of the connection along the lift; ~0 for a horizontal lift."""
    return float(np.max(np.abs(connection_along(lift, frame, hermitian_part))))


def horizontal_lift(gamma: LiftCurve, frame: EigenBasisPartition) -> LiftCurve:
    """Horizontal lift through ``gamma(0)`` of the base curve of ``gamma``.

    The gauge correction follows ``G_{i+1} = P_i^dag G_i`` with ``P_i`` the
    unitary factor of the block-diagonal part of ``gamma_i^dag gamma_{i+1}``;
    ``P_i`` equals the midpoint exponential of the connection up to O(dt^3),
    and the discrete lift is exactly horizontal in the sense that each
    block of ``C_i^dag C_{i+1}`` is Hermitian positive.
    """
    us = gamma.unitaries
    v = frame.vectors
    mask = frame.block_mask()
    m = dagger(v) @ (dagger(us[:-1]) @ us[1:]) @ v
    steps = dagger(polar_unitary(np.where(mask, m, 0)))
    g = np.empty_like(us)
    g[0] = np.eye(us.shape[-1])
    for i in range(len(steps)):
        g[i + 1] = steps[i] @ g[i]
    g_full = v @ g @ dagger(v)
    return LiftCurve(gamma.times, us @ g_full)


def holonomy_from_lift(lift: LiftCurve, frame: EigenBasisPartition,
                       tol: float = 1e-8) -> np.ndarray:
    """``L(0)^{-1} L(T)``; raises :class:`NotClosedBase` if it leaves the gauge group."""
    g = dagger(lift.start) @ lift.end
    if not gauge_group_membership(g, frame, tol):
        raise NotClosedBase("end point is not in the fibre of the start point")
    return g


def schrodinger_lift(grid: PropagatorGrid) -> LiftCurve:
    """``t -> U(0, t)``, the lift traced by the evolved initial frame."""
    return LiftCurve(grid.times, grid.backward())


def parallel_lift(result: NogpResult) -> LiftCurve:
    """``t -> sum_j sum_k |psi~_k(t)><psi_k|`` built from the parallel frames."""
    s = result.spectrum
    frames = result.frames
    us = sum(f.vectors @ dagger(s.block(f.block)) for f in frames)
    return LiftCurve(frames[0].times, us)


def right_translate(lift: LiftCurve, g) -> LiftCurve:
    return LiftCurve(lift.times, lift.unitaries @ np.asarray(g, dtype=complex))


def repeat_loop(lift: LiftCurve, frame: EigenBasisPartition, times: int = 2) -> LiftCurve:
    """Lift of the base loop traversed ``times`` times.

    Each further traversal is the original lift right-translated by the
    accumulated end-point element, so the base curve repeats exactly.
    """
    h = holonomy_from_lift(lift, frame, tol=1e-6)
    t = lift.times
    period = t[-1] - t[0]
    ts, us = [t], [lift.unitaries]
    acc = np.eye(h.shape[0], dtype=complex)
    for k in range(1, times):
        acc = acc @ h
        ts.append(t[1:] + k * period)
        us.append(lift.unitaries[1:] @ acc)
    return LiftCurve(np.concatenate(ts), np.concatenate(us))
