"""Non-Abelian observable-geometric phases of a cyclic observable evolution.

Two independent routes are provided:

* the transport route (:func:`transport_coefficients` -> :func:`solve_transport`
  -> :func:`parallel_frame` -> :func:`extract_phase`), which only needs the
  Hamiltonian restricted to each initial eigenspace, and
* the loop route (:func:`closed_loop_frames` -> :func:`phase_via_loop_basis`),
  which never looks at the Hamiltonian and integrates the connection matrix of
  a closed frame of the moving eigenspaces.

:func:`nogp` runs the transport route end to end.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (DimensionMismatch, GridMismatch, NotClosed, NotCyclic,
                     NotCyclicSubspace, NotCyclicWarning)
from .linalg import (SpectralDecomposition, dagger, expm_hermitian, polar_unitary,
                     skew_part, spectral_decompose, unitary_log, unitary_residual)
from .propagator import DrivenHamiltonian, PropagatorGrid, cyclicity_residual, evolve


@dataclass(frozen=True)
class TransportCoefficients:
    """``C_j(t)[m, k] = <psi_m, H(t) psi_k>`` for the initial basis of block j."""

    block: int
    times: np.ndarray
    samples: np.ndarray
    midpoints: np.ndarray


@dataclass(frozen=True)
class ParallelFrame:
    """Frame ``psi~_k(t_i)`` of one moving eigenspace, shape ``(N+1, d, d_j)``."""

    block: int
    times: np.ndarray
    vectors: np.ndarray

    def gram_residual(self) -> float:
        g = dagger(self.vectors) @ self.vectors
        return float(np.max(np.abs(g - np.eye(g.shape[-1]))))

    def derivative_overlaps(self) -> np.ndarray:
        """Central-difference matrices ``<psi~_m(t_i), d psi~_k/dt>`` at interior times."""
        v = self.vectors
        dt = self.times[1] - self.times[0]
        return dagger(v[1:-1]) @ (v[2:] - v[:-2]) / (2 * dt)

    def parallel_residual(self) -> float:
        """Largest entry of the raw central-difference overlaps; O(dt^2) for a parallel frame."""
        if len(self.times) < 3:
            return 0.0
        return float(np.max(np.abs(self.derivative_overlaps())))

    def connection_residual(self) -> float:
        """Largest entry of the skew-Hermitian part of the overlaps.

        For an orthonormal frame the Hermitian part of the exact overlap matrix
        vanishes identically, so only the skew part carries the connection.
        """
        if len(self.times) < 3:
            return 0.0
        return float(np.max(np.abs(skew_part(self.derivative_overlaps()))))


@dataclass(frozen=True)
class NogpResult:
    blocks: tuple[np.ndarray, ...]
    holonomy: np.ndarray
    spectrum: SpectralDecomposition
    cyclicity: float
    parallel: float
    connection: float
    unitarity: float
    cyclic: bool
    steps: int
    frames: tuple[ParallelFrame, ...] = field(repr=False, default=())
    grid: PropagatorGrid | None = field(repr=False, default=None)


def default_cyclic_threshold(dim: int) -> float:
    return 1e-6 * dim


def transport_coefficients(h: DrivenHamiltonian, spectrum: SpectralDecomposition,
                           times) -> list[TransportCoefficients]:
    times = np.asarray(times, dtype=float)
    if h.dim != spectrum.dim:
        raise DimensionMismatch(f"Hamiltonian dim {h.dim} != observable dim {spectrum.dim}")
    dt = times[1] - times[0]
    hs = h.sample(times)
    hm = h.sample(times[:-1] + 0.5 * dt)
    out = []
    for j in range(spectrum.n_blocks):
        b = spectrum.block(j)
        c = dagger(b) @ hs @ b
        cm = dagger(b) @ hm @ b
        out.append(TransportCoefficients(j, times, 0.5 * (c + dagger(c)), 0.5 * (cm + dagger(cm))))
    return out


def solve_transport(c: TransportCoefficients) -> np.ndarray:
    """Solve ``i dV/dt = C(t) V``, ``V(0) = I`` by the exponential midpoint rule."""
    dt = c.times[1] - c.times[0]
    steps = expm_hermitian(c.midpoints, dt)
    dj = c.samples.shape[-1]
    v = np.empty((len(c.times), dj, dj), dtype=complex)
    v[0] = np.eye(dj)
    for i in range(len(steps)):
        v[i + 1] = steps[i] @ v[i]
    return v


def parallel_frame(grid: PropagatorGrid, v_j: np.ndarray, spectrum: SpectralDecomposition,
                   j: int) -> ParallelFrame:
    """``psi~_k(t) = sum_m V_j(t)[m, k] U(0, t) psi_m``."""
    if len(v_j) != len(grid.times):
        raise GridMismatch(f"transport solution has {len(v_j)} samples, grid has {len(grid.times)}")
    psi_t = grid.backward() @ spectrum.block(j)
    return ParallelFrame(j, grid.times, psi_t @ v_j)


def extract_phase(frames, spectrum: SpectralDecomposition, cyclicity: float | None = None,
                  threshold: float | None = None, strict: bool = False,
                  grid: PropagatorGrid | None = None) -> NogpResult:
    """Phase blocks ``G_j[m, k] = <psi_m, psi~_k(T)>`` and the holonomy operator.

    If the cyclicity residual exceeds ``threshold`` a :class:`NotCyclicWarning`
    is emitted and the result is flagged (or :class:`NotCyclic` is raised when
    ``strict``).
    """
    frames = tuple(frames)
    if threshold is None:
        threshold = default_cyclic_threshold(spectrum.dim)
    blocks = []
    hol = np.zeros((spectrum.dim, spectrum.dim), dtype=complex)
    for fr in frames:
        b = spectrum.block(fr.block)
        g = dagger(b) @ fr.vectors[-1]
        blocks.append(g)
        hol += b @ g @ dagger(b)

    cyclic = True
    if cyclicity is not None and cyclicity > threshold:
        cyclic = False
        msg = f"cyclicity residual {cyclicity:.3e} exceeds {threshold:.1e}"
        if strict:
            raise NotCyclic(msg)
        warnings.warn(msg, NotCyclicWarning, stacklevel=2)

    return NogpResult(
        blocks=tuple(blocks),
        holonomy=hol,
        spectrum=spectrum,
        cyclicity=float("nan") if cyclicity is None else float(cyclicity),
        parallel=max((f.parallel_residual() for f in frames), default=0.0),
        connection=max((f.connection_residual() for f in frames), default=0.0),
        unitarity=max([unitary_residual(g) for g in blocks] + [unitary_residual(hol)]),
        cyclic=cyclic,
        steps=len(frames[0].times) - 1 if frames else 0,
        frames=frames,
        grid=grid,
    )


def _as_spectrum(observable) -> SpectralDecomposition:
    if isinstance(observable, SpectralDecomposition):
        return observable
    return spectral_decompose(observable)


def _run(h, spectrum, steps, threshold, strict):
    grid = evolve(h, steps)
    coeffs = transport_coefficients(h, spectrum, grid.times)
    frames = [parallel_frame(grid, solve_transport(c), spectrum, c.block) for c in coeffs]
    return extract_phase(frames, spectrum, cyclicity_residual(grid, spectrum),
                         threshold, strict, grid=grid)


def nogp(h: DrivenHamiltonian, observable, steps: int = 2000, *, refine: bool = False,
         refine_tol: float = 1e-8, max_steps: int = 64000,
         threshold: float | None = None, strict: bool = False) -> NogpResult:
    """Phase blocks of ``observable`` (matrix or :class:`SpectralDecomposition`) under ``h``.

    With ``refine`` the step count is doubled until successive phase blocks
    agree to ``refine_tol`` or ``max_steps`` is reached.
    """
    spectrum = _as_spectrum(observable)
    res = _run(h, spectrum, steps, threshold, strict)
    while refine and steps * 2 <= max_steps:
        steps *= 2
        nxt = _run(h, spectrum, steps, threshold, strict)
        diff = max(float(np.max(np.abs(a - b))) for a, b in zip(res.blocks, nxt.blocks))
        res = nxt
        if diff < refine_tol:
            break
    return res


# -- loop route --------------------------------------------------------------

def closed_loop_frames(grid: PropagatorGrid, spectrum: SpectralDecomposition,
                       closing: str = "geodesic") -> tuple[list[np.ndarray], bool]:
    """Closed frames of the moving eigenspaces ``U(0, t) E_j``.

    The propagated frame ``psi(t) = U(0, t) psi`` ends at ``psi W_T``; it is
    closed by right-multiplying with ``exp(-f(t/T) log W_T)`` where ``f`` is
    linear (``"geodesic"``) or a cubic smoothstep (``"smoothstep"``).  Returns
    the frames and whether any eigenphase of ``W_T`` sat on the branch cut.
    """
    s = (grid.times - grid.times[0]) / (grid.times[-1] - grid.times[0])
    if closing == "geodesic":
        f = s
    elif closing == "smoothstep":
        f = s * s * (3 - 2 * s)
    else:
        raise ValueError(f"unknown closing {closing!r}")
    back = grid.backward()
    eye = np.eye(spectrum.dim)
    frames, flagged = [], False
    for j in range(spectrum.n_blocks):
        b = spectrum.block(j)
        psi = back @ b
        # a discrete evolution is only cyclic up to integrator error: rotate the
        # end subspace onto span(b) with the direct rotation (closest to I)
        pb, pe = b @ dagger(b), psi[-1] @ dagger(psi[-1])
        r_t = polar_unitary(pb @ pe + (eye - pb) @ (eye - pe))
        left = expm_hermitian(_hermitian_log(r_t)[0], -f)
        psi = left @ psi
        w_t = polar_unitary(dagger(b) @ psi[-1])
        gen, flag = _hermitian_log(w_t)
        flagged |= flag
        frames.append(psi @ expm_hermitian(gen, f))
    return frames, flagged


def _hermitian_log(w: np.ndarray) -> tuple[np.ndarray, bool]:
    # Hermitian K with w = exp(iK), principal branch
    log_w, flag = unitary_log(w)
    gen = -1j * log_w
    return 0.5 * (gen + dagger(gen)), flag


def _log_unitary_small(p: np.ndarray) -> np.ndarray:
    if p.shape[-1] == 1:
        return 1j * np.angle(p)
    return unitary_log(p)[0]


def connection_matrices(frame: np.ndarray, times, stencil: str = "log") -> np.ndarray:
    """Hermitian ``A(t) = i <psibar_m, d psibar_k/dt>`` at the step midpoints.

    ``"central"`` uses the skew part of ``psibar_i^dag psibar_{i+1} - I``;
    ``"log"`` uses the logarithm of that overlap's unitary factor.  Both are
    centred at ``t_i + dt/2`` and second order in ``dt``.
    """
    times = np.asarray(times, dtype=float)
    dt = times[1] - times[0]
    m = dagger(frame[:-1]) @ frame[1:]
    if stencil == "central":
        a = 1j * skew_part(m - np.eye(m.shape[-1])) / dt
    elif stencil == "log":
        p = polar_unitary(m)
        a = np.stack([1j * _log_unitary_small(pi) for pi in p]) / dt
    else:
        raise ValueError(f"unknown stencil {stencil!r}")
    return 0.5 * (a + dagger(a))


def phase_via_loop_basis(frames, times, closure_tol: float = 1e-8,
                         stencil: str = "log") -> list[np.ndarray]:
    """Phase blocks from closed per-block frames, independent of the Hamiltonian.

    Solves ``i dV/dt = -A(t) V`` with ``V(0) = I`` and returns ``V(T)``.
    """
    out = []
    dt = float(times[1] - times[0])
    for fr in frames:
        fr = np.asarray(fr)
        gap = float(np.max(np.abs(fr[-1] - fr[0])))
        if gap > closure_tol:
            raise NotClosed(f"frame endpoints differ by {gap:.3e}")
        a = connection_matrices(fr, times, stencil)
        steps = expm_hermitian(-a, dt)
        v = np.eye(fr.shape[-1], dtype=complex)
        for st in steps:
            v = st @ v
        out.append(v)
    return out


# -- state-evolution variant -------------------------------------------------

def state_evolution_phase(h: DrivenHamiltonian, grid: PropagatorGrid, subspace_basis,
                          tol: float = 1e-8) -> np.ndarray:
    """Geometric phase of a cyclic subspace of states ``span U(t) psi_k``.

    ``C(t)[m, k] = -<U(t) psi_m, H(t) U(t) psi_k>``, ``i dV/dt = C V`` and
    ``G[m, k] = <psi_m, psi~_k(T)>`` with ``psi~_k = sum_m V[m, k] U(t) psi_m``.
    """
    b = np.asarray(subspace_basis, dtype=complex)
    if b.ndim == 1:
        b = b[:, None]
    if b.shape[0] != grid.dim:
        raise DimensionMismatch(f"basis dim {b.shape[0]} != propagator dim {grid.dim}")
    psi = grid.unitaries @ b
    leak = psi[-1] - b @ (dagger(b) @ psi[-1])
    if float(np.max(np.abs(leak))) > tol:
        raise NotCyclicSubspace(f"U(T) moves the subspace by {np.max(np.abs(leak)):.3e}")
    # states at step midpoints by a half step of the same midpoint rule, which
    # keeps the transport consistent with the discrete propagator
    h_mid = h.sample(grid.times[:-1] + 0.5 * grid.dt)
    psi_mid = expm_hermitian(h_mid, 0.5 * grid.dt) @ psi[:-1]
    c_mid = -(dagger(psi_mid) @ h_mid @ psi_mid)
    c_mid = 0.5 * (c_mid + dagger(c_mid))
    steps = expm_hermitian(c_mid, grid.dt)
    v = np.eye(b.shape[1], dtype=complex)
    for st in steps:
        v = st @ v
    return dagger(b) @ psi[-1] @ v
