"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines appear under
"acceptance criteria" in the terminal summary.
"""
import time

import numpy as np
import pytest

from nogp import three_level as tl
from nogp.engine import closed_loop_frames, nogp, phase_via_loop_basis
from nogp.geometry import (canonical_connection, holonomy_from_lift, horizontal_lift,
                           parallel_lift, schrodinger_lift, verify_horizontal)
from nogp.linalg import EigenBasisPartition, block_part, dagger, spectral_decompose, unitary_residual
from nogp.propagator import evolve
from nogp.scanner import (ScanConfig, evaluate_point, scan, sign_change_brackets, to_csv,
                          zero_clusters)
from nogp.systems import commuting_drive, random_cyclic_system, random_unitary
from nogp.xi import find_zeros, xi_value

from conftest import maxabs, three_level_case
from oracles import completed_xi, critical_zeros


def closure_tol(shape):
    # the bump closes the loop only to O(dt^2), about 4e-7 at 2000 steps
    return 1e-6 if shape == "bump" else 1e-8


@pytest.fixture(scope="module")
def random_systems():
    rng = np.random.default_rng(7)
    return [random_cyclic_system(rng) for _ in range(5)]


def test_criterion_1_golden_gate(report):
    rng = np.random.default_rng(2024)
    pairs = np.column_stack([rng.uniform(0, np.pi, 20), rng.uniform(0, 2 * np.pi, 20)])
    e1 = e2 = 0.0
    t0 = time.perf_counter()
    for shape in tl.PULSE_SHAPES:
        for theta, vartheta in pairs:
            _, h, s = three_level_case(theta, vartheta, shape)
            r = nogp(h, s, 2000)
            e1 = max(e1, maxabs(r.blocks[0], tl.closed_form_g1(theta, vartheta)))
            e2 = max(e2, abs(r.blocks[1][0, 0] - tl.closed_form_g2()))
    elapsed = time.perf_counter() - t0
    ok = e1 <= 1e-6 and e2 <= 1e-8 and elapsed <= 10.0
    report(1, ok, f"|G1 - n.sigma| = {e1:.2e}, |G2 + 1| = {e2:.2e}, 60 runs in {elapsed:.2f}s")
    assert ok


def test_criterion_2_propagator(report):
    unit = 0.0
    for shape in tl.PULSE_SHAPES:
        g = evolve(three_level_case(shape=shape)[1], 2000)
        unit = max(unit, max(unitary_residual(u) for u in g.unitaries))
    p, h, _ = three_level_case(shape="const")
    g = evolve(h, 2000)
    closed = max(maxabs(u, tl.closed_form_propagator(p, t)) for t, u in zip(g.times, g.unitaries))
    # const and sin2 are integrated exactly in the pulse area, so the order is seen on the bump
    hb = three_level_case(shape="bump")[1]
    u = [evolve(hb, n).final for n in (500, 1000, 2000)]
    ratio = maxabs(u[0], u[1]) / maxabs(u[1], u[2])
    ok = unit <= 1e-10 and closed <= 1e-8 and 3.5 <= ratio <= 4.5
    report(2, ok, f"unitarity {unit:.2e}, vs closed form {closed:.2e}, doubling ratio {ratio:.3f}")
    assert ok


def test_criterion_3_dual_route(report, random_systems):
    worst_golden = worst_random = 0.0
    for shape in tl.PULSE_SHAPES:
        _, h, s = three_level_case(shape=shape)
        r = nogp(h, s, 2000)
        frames, _ = closed_loop_frames(r.grid, s)
        for ga, gt in zip(phase_via_loop_basis(frames, r.grid.times), r.blocks):
            worst_golden = max(worst_golden, maxabs(ga, gt))
    for sys in random_systems:
        r = nogp(sys.hamiltonian, sys.observable, 8000)
        frames, _ = closed_loop_frames(r.grid, r.spectrum)
        for ga, gt in zip(phase_via_loop_basis(frames, r.grid.times), r.blocks):
            worst_random = max(worst_random, maxabs(ga, gt))
    ok = worst_golden <= 1e-6 and worst_random <= 1e-6
    report(3, ok, f"three-level {worst_golden:.2e}, random 4-level (N=8000) {worst_random:.2e}")
    assert ok


def test_criterion_4_parallel_transport(report):
    conn = raw = 0.0
    for shape in tl.PULSE_SHAPES:
        _, h, s = three_level_case(shape=shape)
        r = nogp(h, s, 4000)
        conn, raw = max(conn, r.connection), max(raw, r.parallel)
    ok = conn <= 1e-6
    report(4, ok, f"connection residual {conn:.2e} (raw overlaps {raw:.2e}) at N=4000")
    assert ok


def test_criterion_5_invariances(report, random_systems):
    rng = np.random.default_rng(5)
    shift = basis = 0.0
    for shape in tl.PULSE_SHAPES:
        _, h, s = three_level_case(shape=shape)
        r0 = nogp(h, s, 2000)
        r1 = nogp(h.shifted(lambda t: 1.5 + 2 * np.cos(2 * np.pi * t)), s, 2000)
        shift = max(shift, max(maxabs(a, b) for a, b in zip(r0.blocks, r1.blocks)))
        w = random_unitary(rng, 2)
        g_w = nogp(h, s.with_block_basis(0, w), 2000).blocks[0]
        basis = max(basis, maxabs(g_w, dagger(w) @ r0.blocks[0] @ w))
    sys = random_systems[0]
    s = spectral_decompose(sys.observable)
    r0 = nogp(sys.hamiltonian, s, 2000, threshold=1e-4)
    r1 = nogp(sys.hamiltonian.shifted(lambda t: -0.7 + np.sin(2 * np.pi * t)), s, 2000, threshold=1e-4)
    shift = max(shift, max(maxabs(a, b) for a, b in zip(r0.blocks, r1.blocks)))
    w = random_unitary(rng, 2)
    g_w = nogp(sys.hamiltonian, s.with_block_basis(0, w), 2000, threshold=1e-4).blocks[0]
    basis = max(basis, maxabs(g_w, dagger(w) @ r0.blocks[0] @ w))
    x0 = np.diag([1.0, 1.0, 2.0, 3.0]).astype(complex)
    r = nogp(commuting_drive(x0), x0, 2000)
    trivial = max(maxabs(g, np.eye(len(g))) for g in r.blocks)
    ok = shift <= 1e-8 and basis <= 1e-8 and trivial <= 1e-8
    report(5, ok, f"energy shift {shift:.2e}, basis change {basis:.2e}, commuting drive {trivial:.2e}")
    assert ok


def test_criterion_6_geometry(report, random_systems):
    horiz = blocks = 0.0
    for shape in tl.PULSE_SHAPES:
        _, h, s = three_level_case(shape=shape)
        r = nogp(h, s, 2000)
        horiz = max(horiz, verify_horizontal(parallel_lift(r), s.basis))
        hl = horizontal_lift(schrodinger_lift(r.grid), s.basis)
        g = block_part(holonomy_from_lift(hl, s.basis, closure_tol(shape)), s.basis)
        blocks = max(blocks, maxabs(g, r.holonomy))
    for sys in random_systems[:2]:
        r = nogp(sys.hamiltonian, sys.observable, 8000)
        frame = r.spectrum.basis
        hl = horizontal_lift(schrodinger_lift(r.grid), frame)
        g = block_part(holonomy_from_lift(hl, frame, 1e-6), frame)
        blocks = max(blocks, maxabs(g, r.holonomy))
    rng = np.random.default_rng(6)
    gauge = 0.0
    for sizes in ((2, 1), (1, 2, 1), (3,), (2, 2)):
        d = sum(sizes)
        frame = EigenBasisPartition(random_unitary(rng, d), sizes)
        for _ in range(10):
            p = random_unitary(rng, d)
            q = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            inner = np.zeros((d, d), dtype=complex)
            o = frame.offsets
            for j, m in enumerate(sizes):
                inner[o[j]:o[j + 1], o[j]:o[j + 1]] = random_unitary(rng, m)
            g = frame.from_partition_basis(inner)
            lhs = canonical_connection(p @ g, q @ g, frame)
            rhs = dagger(g) @ canonical_connection(p, q, frame) @ g
            gauge = max(gauge, maxabs(lhs, rhs))
    ok = horiz <= 1e-6 and blocks <= 1e-6 and gauge <= 1e-10
    report(6, ok, f"horizontality {horiz:.2e}, lifted holonomy vs NOGP {blocks:.2e}, "
                  f"gauge law {gauge:.2e}")
    assert ok


def test_criterion_7_xi(report):
    t0 = time.perf_counter()
    sym = max(abs(xi_value(e) - xi_value(-e)) for e in np.linspace(0.5, 40.0, 25))
    x0 = abs(xi_value(0.0) - float(completed_xi(0).real))
    roots = [z.root for z in find_zeros(10.0, 30.0)]
    elapsed = time.perf_counter() - t0
    ref = critical_zeros(3)
    dev = max(abs(a - b) for a, b in zip(roots, ref)) if len(roots) == 3 else float("inf")
    ok = sym <= 1e-12 and x0 <= 1e-9 and len(roots) == 3 and dev <= 1e-4 and elapsed <= 60.0
    report(7, ok, f"symmetry {sym:.2e}, xi(0) vs oracle {x0:.2e}, {len(roots)} roots "
                  f"[{', '.join(f'{r:.6f}' for r in roots)}] max dev {dev:.2e}, {elapsed:.1f}s")
    assert ok


@pytest.fixture(scope="module")
def full_scan():
    cfg = ScanConfig(e_min=10.0, e_max=30.0, e_step=0.25, workers=4)
    t0 = time.perf_counter()
    records = scan(cfg)
    return cfg, records, time.perf_counter() - t0


def test_criterion_8_scan(report, full_scan):
    cfg, records, elapsed = full_scan
    clusters = zero_clusters(records)
    brackets = sign_change_brackets(records)
    matched = len(clusters) == len(brackets) and all(
        sum(lo <= r.E <= hi for r in c) == len(c) for c, (lo, hi) in zip(clusters, brackets))
    centres = [min(c, key=lambda r: r.gate_distance) for c in clusters]
    mids = [evaluate_point(0.5 * (a.E + b.E), cfg) for a, b in zip(centres, centres[1:])]
    ratios = []
    for k, z in enumerate(centres):
        near = [m.gate_distance for m in mids[max(0, k - 1):k + 1]]
        ratios.append(min(near) / max(z.gate_distance, np.finfo(float).tiny) if near else np.inf)
    worst = min(ratios) if ratios else 0.0
    ok = matched and len(clusters) > 0 and worst >= 10 and elapsed <= 300
    report(8, ok, f"{len(clusters)} clusters / {len(brackets)} brackets "
                  f"[{', '.join(f'{c.E:.6f}' for c in centres)}], min dip ratio {worst:.2e}, "
                  f"{len(records)} records in {elapsed:.1f}s (4 workers)")
    assert ok


def test_criterion_9_determinism(report, full_scan, tmp_path):
    cfg, records, _ = full_scan
    again = scan(cfg)
    a, b = to_csv(records).encode(), to_csv(again).encode()
    (tmp_path / "a.csv").write_bytes(a)
    (tmp_path / "b.csv").write_bytes(b)
    ok = (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    report(9, ok, f"two scans of {len(records)} records, CSV {len(a)} bytes, identical: {ok}")
    assert ok
