"""Dense complex matrix helpers: predicates, spectral decomposition, exponentials.

Observables are plain Hermitian ``numpy`` arrays; the functions here validate
them at the boundary and return immutable results.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateClustering, DimensionMismatch, NonHermitianInput

HERM_TOL = 1e-12


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(a, -1, -2))


def hermitian_residual(x: np.ndarray) -> float:
    x = np.asarray(x)
    return float(np.max(np.abs(x - dagger(x)))) if x.size else 0.0


def unitary_residual(u: np.ndarray) -> float:
    u = np.asarray(u)
    eye = np.eye(u.shape[-1])
    return float(np.max(np.abs(dagger(u) @ u - eye)))


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {u.shape}")
    return unitary_residual(u) <= tol


def as_observable(x, tol: float = HERM_TOL) -> np.ndarray:
    """Validate ``x`` as a finite square Hermitian matrix and return a complex copy."""
    x = np.array(x, dtype=complex)
    if x.ndim != 2 or x.shape[0] != x.shape[1] or x.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonHermitianInput("matrix has non-finite entries")
    res = hermitian_residual(x)
    if res > tol:
        raise NonHermitianInput(f"Hermiticity residual {res:.3e} exceeds {tol:.1e}")
    return 0.5 * (x + x.conj().T)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class EigenBasisPartition:
    """Orthonormal basis of C^d whose columns are grouped into consecutive blocks.

    Column ``offsets[j] + k`` is the k-th vector of block j.  The same object
    doubles as the partitioned frame used by the connection-geometry module.
    """

    vectors: np.ndarray
    sizes: tuple[int, ...]

    def __post_init__(self):
        vecs = _frozen(np.asarray(self.vectors, dtype=complex))
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if vecs.ndim != 2 or vecs.shape[0] != vecs.shape[1]:
            raise DimensionMismatch("basis must be a square matrix of column vectors")
        if sum(self.sizes) != vecs.shape[0] or min(self.sizes) < 1:
            raise DimensionMismatch(f"block sizes {self.sizes} do not partition dim {vecs.shape[0]}")

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(o) for o in np.concatenate([[0], np.cumsum(self.sizes)]))

    def block(self, j: int) -> np.ndarray:
        o = self.offsets
        return self.vectors[:, o[j]:o[j + 1]]

    def block_index(self, j: int, k: int) -> int:
        if not 0 <= k < self.sizes[j]:
            raise IndexError(f"block {j} has {self.sizes[j]} vectors")
        return self.offsets[j] + k

    def to_partition_basis(self, op: np.ndarray) -> np.ndarray:
        """Matrix of ``op`` in this basis (works on stacks of matrices)."""
        return dagger(self.vectors) @ op @ self.vectors

    def from_partition_basis(self, m: np.ndarray) -> np.ndarray:
        return self.vectors @ m @ dagger(self.vectors)

    def block_mask(self) -> np.ndarray:
        mask = np.zeros((self.dim, self.dim), dtype=bool)
        o = self.offsets
        for j in range(len(self.sizes)):
            mask[o[j]:o[j + 1], o[j]:o[j + 1]] = True
        return mask


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    projections: tuple[np.ndarray, ...]
    multiplicities: tuple[int, ...]
    basis: EigenBasisPartition
    delta_cluster: float

    @property
    def n_blocks(self) -> int:
        return len(self.multiplicities)

    @property
    def dim(self) -> int:
        return self.basis.dim

    def block(self, j: int) -> np.ndarray:
        return self.basis.block(j)

    def reconstruct(self) -> np.ndarray:
        return sum(lam * p for lam, p in zip(self.eigenvalues, self.projections))

    def with_block_basis(self, j: int, w: np.ndarray) -> "SpectralDecomposition":
        """Replace the basis of block ``j`` by ``psi @ w`` for a unitary ``w``."""
        w = np.asarray(w, dtype=complex)
        if w.shape != (self.multiplicities[j],) * 2:
            raise DimensionMismatch(f"block {j} needs a {self.multiplicities[j]}-square unitary")
        vecs = np.array(self.basis.vectors)
        o = self.basis.offsets
        vecs[:, o[j]:o[j + 1]] = vecs[:, o[j]:o[j + 1]] @ w
        return SpectralDecomposition(
            self.eigenvalues, self.projections, self.multiplicities,
            EigenBasisPartition(vecs, self.basis.sizes), self.delta_cluster,
        )


def _pivoted_basis(proj: np.ndarray, rank: int) -> np.ndarray:
    # Gram-Schmidt on the projector's columns, largest residual column first.
    resid = np.array(proj)
    out = np.empty((proj.shape[0], rank), dtype=complex)
    for k in range(rank):
        norms = np.linalg.norm(resid, axis=0)
        p = int(np.argmax(norms))
        q = resid[:, p] / norms[p]
        for _ in range(2):
            q = q - out[:, :k] @ (out[:, :k].conj().T @ q)
            q = q / np.linalg.norm(q)
        out[:, k] = q
        resid = resid - np.outer(q, q.conj() @ resid)
    return out


def spectral_decompose(x, delta_cluster: float | None = None,
                       herm_tol: float = HERM_TOL) -> SpectralDecomposition:
    """Spectral decomposition with clustering of nearly equal eigenvalues.

    Eigenvalues closer than ``delta_cluster`` (default ``1e-8 * (1 + ||x||)``)
    are merged into a single block.  Each block's basis is built from the
    columns of its spectral projection by pivoted Gram-Schmidt, so the result
    depends only on the projections and is reproducible bit for bit.
    """
    x = as_observable(x, herm_tol)
    d = x.shape[0]
    w, v = np.linalg.eigh(x)
    if delta_cluster is None:
        delta_cluster = 1e-8 * (1.0 + float(np.max(np.abs(w))))
    if delta_cluster <= 0:
        raise ValueError("delta_cluster must be positive")

    groups = []
    start = 0
    for i in range(1, d):
        if w[i] - w[i - 1] > delta_cluster:
            groups.append((start, i))
            start = i
    groups.append((start, d))

    eigenvalues, projections, mults, blocks = [], [], [], []
    for a, b in groups:
        if w[b - 1] - w[a] > 10 * delta_cluster:
            raise DegenerateClustering(
                f"eigenvalues {w[a]:.6g}..{w[b - 1]:.6g} chain within {delta_cluster:.1e} "
                f"but span more than 10x that"
            )
        vs = v[:, a:b]
        proj = vs @ vs.conj().T
        eigenvalues.append(float(np.mean(w[a:b])))
        projections.append(_frozen(proj))
        mults.append(b - a)
        blocks.append(_pivoted_basis(proj, b - a))

    basis = EigenBasisPartition(np.hstack(blocks), tuple(mults))
    return SpectralDecomposition(_frozen(np.array(eigenvalues)), tuple(projections),
                                 tuple(mults), basis, float(delta_cluster))


def skew_exp(h, tau: float, herm_tol: float = HERM_TOL) -> np.ndarray:
    """exp(-i h tau) through the eigendecomposition of the Hermitian matrix ``h``."""
    h = as_observable(h, herm_tol)
    return expm_hermitian(h, tau)


def expm_hermitian(h: np.ndarray, tau) -> np.ndarray:
    """exp(-i h tau) for a (stack of) Hermitian matrices, no validation.

    ``tau`` may be a scalar or broadcast against the leading stack axes.
    """
    w, v = np.linalg.eigh(h)
    phase = np.exp(-1j * w * np.asarray(tau)[..., None])
    return (v * phase[..., None, :]) @ dagger(v)


def polar_unitary(m: np.ndarray) -> np.ndarray:
    """Unitary factor of the polar decomposition (works on stacks)."""
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def unitary_log(w: np.ndarray, branch_eps: float = 1e-12) -> tuple[np.ndarray, bool]:
    """Principal logarithm of a unitary, eigenphases in (-pi, pi].

    Returns ``(log_w, flagged)`` where ``flagged`` marks an eigenphase that sat
    within ``branch_eps`` of the branch cut; such phases are put on ``+pi``.
    """
    t, z = scipy.linalg.schur(np.asarray(w, dtype=complex), output="complex")
    phases = np.angle(np.diag(t))
    near_cut = np.abs(phases) >= np.pi - branch_eps
    phases = np.where(near_cut, np.pi, phases)
    return (z * (1j * phases)) @ z.conj().T, bool(np.any(near_cut))


def block_part(m: np.ndarray, basis: EigenBasisPartition) -> np.ndarray:
    """Keep only the diagonal blocks of ``m`` in the partition basis (stack aware)."""
    inner = basis.to_partition_basis(m)
    return basis.from_partition_basis(np.where(basis.block_mask(), inner, 0))


def skew_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m - dagger(m))
