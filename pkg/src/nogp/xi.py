"""The completed zeta function on the critical line as a cosine transform.

``xi(E) = int_0^inf Phi(t) cos(E t / 2) dt`` with

    Phi(t) = 2 pi e^{5t/4} sum_{n>=1} (2 pi e^t n^2 - 3) n^2 exp(-pi n^2 e^t).

With this normalisation ``xi(E)`` equals the usual ``Xi(E) = xi(1/2 + iE)``
where ``xi(s) = s (s - 1) pi^{-s/2} Gamma(s/2) zeta(s) / 2``; in particular
``xi(0) = 0.4971207781883...``.  All arithmetic is double precision.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import StepTooCoarse, ToleranceNotMet

GL_NODES = 20
MAX_PANELS = 1 << 14
# exp(-x) underflows to zero for x beyond ~745
_UNDERFLOW = 745.0


@dataclass(frozen=True)
class XiEvaluation:
    E: float
    value: float
    series_terms: int
    quad_panels: int
    t_max: float
    err_bound: float


@dataclass(frozen=True)
class ZeroBracket:
    lo: float
    hi: float
    root: float
    tol: float


@lru_cache(maxsize=None)
def _gauss_legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


def _terms_needed(t: np.ndarray, n_max: int) -> np.ndarray:
    n = np.floor(np.sqrt(_UNDERFLOW / (np.pi * np.exp(t)))) + 1
    return np.clip(n, 1, n_max).astype(int)


def _phi_tail(t: np.ndarray, n: np.ndarray) -> np.ndarray:
    # terms beyond n are dominated by b_m = 2 pi e^t m^4 exp(-pi m^2 e^t), whose
    # ratio b_{m+1}/b_m is at most r for m >= n + 1
    x = np.exp(t)
    m = n + 1.0
    log_b = np.log(2 * np.pi) + t + 4 * np.log(m) - np.pi * m * m * x
    r = ((m + 1) / m) ** 4 * np.exp(-np.pi * (2 * m + 1) * x)
    return 2 * np.pi * np.exp(1.25 * t + log_b) / (1 - r)


def _phi_array(t: np.ndarray, n_max: int):
    t = np.asarray(t, dtype=float)
    n_used = _terms_needed(t, n_max)
    n = np.arange(1, n_max + 1, dtype=float)
    x = np.exp(t)[..., None]
    n2 = n * n
    terms = (2 * np.pi * x * n2 - 3) * n2 * np.exp(-np.pi * n2 * x)
    terms = np.where(n <= n_used[..., None], terms, 0.0)
    value = 2 * np.pi * np.exp(1.25 * t) * terms.sum(axis=-1)
    return value, _phi_tail(t, n_used.astype(float))


def phi(t: float, N: int = 64) -> tuple[float, float]:
    """Partial sum of ``Phi(t)`` and a bound on the omitted terms.

    Terms that underflow are skipped, so fewer than ``N`` may be summed for
    large ``t``; the bound always covers everything left out.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if N < 1:
        raise ValueError("N must be >= 1")
    v, b = _phi_array(np.array([t]), int(N))
    return float(v[0]), float(b[0])


def _panel_rule(E: float, t_max: float, panels: int, N: int):
    x, w = _gauss_legendre(GL_NODES)
    edges = np.linspace(0.0, t_max, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = (mid[:, None] + half[:, None] * x).ravel()
    wt = (half[:, None] * w).ravel()
    f, tail = _phi_array(t, N)
    integrand = f * np.cos(0.5 * E * t)
    return float(np.dot(wt, integrand)), float(np.dot(wt, tail)), float(np.dot(wt, np.abs(integrand)))


def _integral_tail(t_max: float) -> float:
    # Phi(t) <= 4.04 pi^2 e^{9t/4} exp(-pi e^t) for t >= 0; with u = e^t the
    # remainder is int_{u0}^inf u^{5/4} e^{-pi u} du <= u0^{5/4} e^{-pi u0} / (pi - 1.25/u0)
    u0 = math.exp(t_max)
    log_val = math.log(4.04 * math.pi ** 2) + 1.25 * t_max - math.pi * u0
    return math.exp(log_val) / (math.pi - 1.25 / u0) if log_val > -_UNDERFLOW else 0.0


def xi(E: float, t_max: float = 12.0, panels: int | None = None, N: int = 64,
       tol: float | None = None) -> XiEvaluation:
    """Evaluate ``xi(E)`` with a bound on its numerical error.

    Panels have width at most ``min(1, pi / |E|)``.  The quadrature error is
    estimated by comparison with a rule on half-width panels; the bound adds
    the series tail, the integral tail beyond ``t_max`` and a rounding term.
    With ``tol`` set the panel count is doubled until the bound meets it.
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    E = float(E)
    width = min(1.0, math.pi / abs(E)) if E else 1.0
    need = max(8, math.ceil(t_max / width - 1e-9))
    panels = need if panels is None else max(int(panels), need)
    if panels < 8:
        raise ValueError("panels must be >= 8")

    while True:
        coarse, _, _ = _panel_rule(E, t_max, panels, N)
        fine, series_tail, mass = _panel_rule(E, t_max, 2 * panels, N)
        err = (abs(fine - coarse) + series_tail + _integral_tail(t_max)
               + 64 * np.finfo(float).eps * mass)
        if tol is None or err <= tol:
            break
        if panels * 2 > MAX_PANELS:
            raise ToleranceNotMet(f"xi({E}) error bound {err:.3e} above {tol:.1e}")
        panels *= 2
    return XiEvaluation(E, fine, int(N), 2 * panels, float(t_max), float(err))


def xi_value(E: float, **kw) -> float:
    return xi(E, **kw).value


def _sign_changes(values: np.ndarray) -> np.ndarray:
    # interval k holds a root if the sign flips across it or its right end is an
    # exact zero; a zero at the very first sample is assigned to interval 0
    s = np.sign(values)
    hits = (s[:-1] != 0) & (s[:-1] * s[1:] <= 0)
    if len(s) > 1 and s[0] == 0 and s[1] != 0:
        hits[0] = True
    return np.flatnonzero(hits)


def _suspect_intervals(grid: np.ndarray, values: np.ndarray) -> set[int]:
    # a dip of |xi| towards zero without a sign change may hide a pair of roots:
    # flag it when the parabola through three samples crosses zero
    out = set()
    for i in range(1, len(grid) - 1):
        a, b, c = values[i - 1:i + 2]
        if (np.sign(a) == np.sign(b) == np.sign(c) != 0
                and abs(b) <= min(abs(a), abs(c)) and abs(b) < max(abs(a), abs(c))):
            h = grid[i] - grid[i - 1]
            curv = (a - 2 * b + c) / h ** 2
            slope = (c - a) / (2 * h)
            vmin = b - slope ** 2 / (2 * curv) if curv else b
            if np.sign(vmin) != np.sign(b):
                out.update((i - 1, i))
    return out


def _bisect(f, lo: float, hi: float, flo: float, tol: float) -> tuple[float, float]:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid - 0.25 * tol, mid + 0.25 * tol
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return lo, hi


def find_zeros(e_lo: float, e_hi: float, step: float = 0.25, tol: float = 1e-8,
               evaluate=None) -> list[ZeroBracket]:
    """Sign-change brackets of ``xi`` on ``[e_lo, e_hi]`` refined by bisection.

    Every sign-change interval, and every interval next to a suspicious dip of
    ``|xi|``, is rescanned at ``step / 10``; finding two sign changes where
    one step saw at most one emits :class:`StepTooCoarse` and splits the
    bracket.
    """
    if e_lo == e_hi:
        return []
    if e_lo > e_hi:
        raise ValueError("e_lo must not exceed e_hi")
    if step <= 0 or tol <= 0:
        raise ValueError("step and tol must be positive")
    f = evaluate or xi_value
    n = max(1, math.ceil((e_hi - e_lo) / step - 1e-9))
    grid = np.linspace(e_lo, e_hi, n + 1)
    values = np.array([f(e) for e in grid])

    brackets = []
    candidates = sorted(set(_sign_changes(values)) | _suspect_intervals(grid, values))
    for i in candidates:
        sub = np.linspace(grid[i], grid[i + 1], 11)
        sv = np.concatenate([[values[i]], [f(e) for e in sub[1:-1]], [values[i + 1]]])
        idx = _sign_changes(sv)
        if len(idx) > 1:
            warnings.warn(f"{len(idx)} sign changes of xi inside [{grid[i]:.6g}, {grid[i + 1]:.6g}]; "
                          "step too coarse, bracket split", StepTooCoarse, stacklevel=2)
        for k in idx:
            brackets.append((sub[k], sub[k + 1], sv[k]))

    out = []
    for lo, hi, flo in sorted(brackets):
        lo, hi = _bisect(f, lo, hi, flo, tol)
        out.append(ZeroBracket(float(lo), float(hi), float(0.5 * (lo + hi)), float(tol)))
    return out
