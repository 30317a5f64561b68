"""Non-Abelian geometric phases of periodically driven observables."""

__version__ = "0.1.0"

from .engine import NogpResult, nogp  # noqa: E402
from .linalg import SpectralDecomposition, is_unitary, skew_exp, spectral_decompose  # noqa: E402
from .propagator import DrivenHamiltonian, PropagatorGrid, evolve  # noqa: E402

__all__ = [
    "DrivenHamiltonian", "NogpResult", "PropagatorGrid", "SpectralDecomposition",
    "evolve", "is_unitary", "nogp", "skew_exp", "spectral_decompose",
]
