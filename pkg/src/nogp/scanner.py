"""Sweep the detuned three-level Floquet system over E and look for Riemann zeros.

``H_E(t) = xi(E) (|0><1| + |1><0|) + Omega(t) K``.  Where ``xi(E)`` vanishes
the system collapses to the three-level gate model, so the block-1 phase
equals ``n . sigma`` and the block-2 phase is ``-1``.  Each record carries the
distance to that gate; the zero flag needs both a closed loop and a gate hit.

Besides the uniform grid, a scan adds records at refined local minima of the
gate distance (found from the NOGP alone) and at the refined sign changes of
``xi``.  Zero clusters are maximal runs of flagged records in E order.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy.optimize import minimize_scalar

from . import __version__
from .engine import nogp
from .errors import NogpError, NotCyclicWarning
from .propagator import DrivenHamiltonian
from .three_level import (PULSE_SHAPES, ThreeLevelParams, closed_form_g1, make_pulse,
                          spectrum as three_level_spectrum)
from .xi import find_zeros, xi

FIELDS = ("E", "delta", "cyc_residual", "gate_distance", "g2_phase", "zero_flag", "status")


@dataclass(frozen=True)
class ScanConfig:
    e_min: float = 10.0
    e_max: float = 30.0
    e_step: float = 0.25
    pulse: str = "const"
    period: float = 1.0
    theta: float = 1.0
    vartheta: float = 0.5
    steps: int = 2000
    cyc_tol: float = 1e-6
    gate_tol: float = 1e-10
    gate_metric: str = "maxabs"
    refine: bool = True
    root_tol: float = 1e-10
    workers: int = 1
    out: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.e_min > self.e_max:
            raise ValueError("e_min must not exceed e_max")
        if self.e_step <= 0:
            raise ValueError("e_step must be positive")
        if min(self.cyc_tol, self.gate_tol, self.root_tol) <= 0:
            raise ValueError("tolerances must be positive")
        if self.pulse not in PULSE_SHAPES:
            raise ValueError(f"pulse must be one of {PULSE_SHAPES}")
        if self.gate_metric not in ("maxabs", "phase"):
            raise ValueError("gate_metric must be 'maxabs' or 'phase'")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be 'csv' or 'json'")
        if self.steps < 1 or self.workers < 1:
            raise ValueError("steps and workers must be >= 1")

    def params(self) -> ThreeLevelParams:
        return ThreeLevelParams.from_gate_angles(self.theta, self.vartheta,
                                                 make_pulse(self.pulse, self.period))

    def grid(self) -> np.ndarray:
        if self.e_min == self.e_max:
            return np.empty(0)
        n = max(1, math.ceil((self.e_max - self.e_min) / self.e_step - 1e-9))
        return np.linspace(self.e_min, self.e_max, n + 1)


@dataclass(frozen=True)
class ScanRecord:
    E: float
    delta: float
    cyc_residual: float
    gate_distance: float
    g2_phase: float
    zero_flag: bool
    status: str = "grid"


def build_floquet_hamiltonian(E: float, p: ThreeLevelParams,
                              delta: float | None = None) -> DrivenHamiltonian:
    """``H_E``; ``delta`` overrides ``xi(E)`` (a hook for tests and what-if runs)."""
    if delta is None:
        delta = xi(E).value
    k = p.coupling()
    x = np.zeros((3, 3), dtype=complex)
    x[0, 1] = x[1, 0] = delta
    pulse = p.pulse
    return DrivenHamiltonian(p.period, lambda t: x + pulse(t) * k, f"floquet/E={E:g}")


def gate_distance(g1: np.ndarray, target: np.ndarray, metric: str = "maxabs") -> float:
    if metric == "phase":
        ov = np.trace(target.conj().T @ g1)
        g1 = g1 * (np.conj(ov) / abs(ov) if abs(ov) else 1.0)
    return float(np.max(np.abs(g1 - target)))


def evaluate_point(E: float, cfg: ScanConfig, delta: float | None = None,
                   status: str = "grid") -> ScanRecord:
    """One scan record; failures are reported in ``status`` instead of raised."""
    try:
        if delta is None:
            delta = xi(E).value
        p = cfg.params()
        h = build_floquet_hamiltonian(E, p, delta)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NotCyclicWarning)
            res = nogp(h, three_level_spectrum(p), cfg.steps)
        gd = gate_distance(res.blocks[0], closed_form_g1(cfg.theta, cfg.vartheta), cfg.gate_metric)
        g2 = float(np.angle(res.blocks[1][0, 0]) % (2 * np.pi))
        flag = bool(res.cyclicity <= cfg.cyc_tol and gd <= cfg.gate_tol)
        return ScanRecord(float(E), float(delta), float(res.cyclicity), gd, g2, flag, status)
    except (NogpError, ValueError, ArithmeticError) as exc:
        nan = float("nan")
        d = nan if delta is None else float(delta)
        return ScanRecord(float(E), d, nan, nan, nan, False, f"error:{type(exc).__name__}")


def _evaluate_task(args):
    E, cfg, status = args
    return evaluate_point(E, cfg, status=status)


def _gate_objective(E, cfg):
    # squared so that Brent's parabolic steps see a smooth minimum rather than a kink
    return evaluate_point(E, cfg).gate_distance ** 2


def _refine_minimum(args):
    lo, hi, cfg = args
    res = minimize_scalar(_gate_objective, bounds=(lo, hi), args=(cfg,), method="bounded",
                          options={"xatol": cfg.root_tol})
    return evaluate_point(float(res.x), cfg, status="nogp-min")


def _run(pool, fn, items):
    if pool is None:
        return [fn(x) for x in items]
    return list(pool.map(fn, items))


def scan(cfg: ScanConfig) -> list[ScanRecord]:
    """Evaluate the grid, then refine; results are sorted by E and deterministic."""
    grid = cfg.grid()
    if grid.size == 0:
        return []
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        records = _run(pool, _evaluate_task, [(float(e), cfg, "grid") for e in grid])
        if cfg.refine:
            gd = np.array([r.gate_distance for r in records])
            mins = [i for i in range(1, len(gd) - 1)
                    if gd[i] <= gd[i - 1] and gd[i] <= gd[i + 1]]
            records += _run(pool, _refine_minimum,
                            [(float(grid[i - 1]), float(grid[i + 1]), cfg) for i in mins])
            roots = find_zeros(cfg.e_min, cfg.e_max, cfg.e_step, cfg.root_tol)
            records += _run(pool, _evaluate_task, [(z.root, cfg, "xi-root") for z in roots])
    finally:
        if pool is not None:
            pool.shutdown()
    return sorted(records, key=lambda r: (r.E, r.status))


def zero_clusters(records) -> list[list[ScanRecord]]:
    """Maximal runs of consecutive flagged records."""
    out, cur = [], []
    for r in records:
        if r.zero_flag:
            cur.append(r)
        elif cur:
            out.append(cur)
            cur = []
    if cur:
        out.append(cur)
    return out


def sign_change_brackets(records) -> list[tuple[float, float]]:
    """Adjacent grid records whose ``delta`` changes sign."""
    grid = [r for r in records if r.status == "grid"]
    return [(a.E, b.E) for a, b in zip(grid, grid[1:]) if a.delta * b.delta < 0]


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS)
    for r in records:
        w.writerow([_fmt(getattr(r, f)) for f in FIELDS])
    return buf.getvalue()


def metadata(cfg: ScanConfig | None) -> dict:
    import scipy
    meta = {
        "versions": {"nogp": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
    }
    if cfg is not None:
        meta["config"] = asdict(cfg)
        meta["tolerances"] = {"cyc_tol": cfg.cyc_tol, "gate_tol": cfg.gate_tol,
                              "root_tol": cfg.root_tol, "gate_metric": cfg.gate_metric}
    return meta


def to_json(records, meta: dict) -> str:
    doc = {"metadata": meta, "records": [{f: getattr(r, f) for f in FIELDS} for r in records]}
    return json.dumps(doc, indent=2) + "\n"


def emit(records, fmt: str, path, cfg: ScanConfig | None = None, meta: dict | None = None) -> None:
    """Write records as CSV or JSON; I/O failures raise ``OSError`` naming the path."""
    if fmt == "csv":
        text = to_csv(records)
    elif fmt == "json":
        text = to_json(records, meta if meta is not None else metadata(cfg))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write scan output: {exc.strerror}", os.fspath(path)) from exc


def _parse_value(name: str, text: str):
    if name == "zero_flag":
        return text == "true"
    if name == "status":
        return text
    return float(text)


def read_csv(path) -> list[ScanRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != FIELDS:
        raise ValueError(f"{path}: unexpected header")
    return [ScanRecord(**{f: _parse_value(f, v) for f, v in zip(FIELDS, row)}) for row in rows[1:]]


def read_json(path) -> tuple[list[ScanRecord], dict]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    names = {f.name for f in fields(ScanRecord)}
    records = [ScanRecord(**{k: v for k, v in rec.items() if k in names}) for rec in doc["records"]]
    return records, doc["metadata"]
