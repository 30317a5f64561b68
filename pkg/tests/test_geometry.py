import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nogp import three_level as tl
from nogp.engine import nogp
from nogp.errors import GridTooCoarse, NotClosedBase, NotUnitary
from nogp.geometry import (LiftCurve, canonical_connection, gauge_group_membership,
                           holonomy_from_lift, horizontal_lift, parallel_lift, repeat_loop,
                           right_translate, schrodinger_lift, verify_horizontal)
from nogp.linalg import EigenBasisPartition, block_part, dagger
from nogp.propagator import DrivenHamiltonian, evolve
from nogp.systems import random_unitary

from conftest import maxabs, three_level_case

FRAME_21 = EigenBasisPartition(np.eye(3), (2, 1))


def closure_tol(p):
    # the bump closes the loop only to O(dt^2), about 4e-7 at 2000 steps
    return 1e-6 if p.pulse.shape == "bump" else 1e-8


def block_diag_unitary(rng, frame):
    u = np.zeros((frame.dim, frame.dim), dtype=complex)
    o = frame.offsets
    for j, d in enumerate(frame.sizes):
        u[o[j]:o[j + 1], o[j]:o[j + 1]] = random_unitary(rng, d)
    return frame.from_partition_basis(u)


@st.composite
def frames(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    sizes = draw(st.lists(st.integers(1, 3), min_size=1, max_size=3))
    return EigenBasisPartition(random_unitary(rng, sum(sizes)), tuple(sizes)), rng


def detuned_hamiltonian(delta=0.497):
    p = tl.ThreeLevelParams.from_gate_angles(1.1, 0.4)
    k = p.coupling()
    x = np.zeros((3, 3), dtype=complex)
    x[0, 1] = x[1, 0] = delta
    return DrivenHamiltonian(1.0, lambda t: x + p.pulse(t) * k)


def test_membership_examples(rng):
    w = np.zeros((3, 3), dtype=complex)
    w[:2, :2] = random_unitary(rng, 2)
    w[2, 2] = np.exp(0.3j)
    assert gauge_group_membership(w, FRAME_21)
    swap = np.eye(3)[:, [2, 1, 0]]
    assert not gauge_group_membership(swap, FRAME_21)


def test_membership_requires_unitary():
    with pytest.raises(NotUnitary):
        gauge_group_membership(np.diag([1.0, 2.0, 1.0]), FRAME_21)


def test_membership_of_three_level_holonomy():
    _, h, s = three_level_case()
    assert gauge_group_membership(nogp(h, s).holonomy, s.basis)


def test_connection_examples(rng):
    q = np.zeros((3, 3), dtype=complex)
    q[:2, :2] = rng.standard_normal((2, 2))
    q[2, 2] = 0.7
    assert maxabs(canonical_connection(np.eye(3), q, FRAME_21), q) == 0.0
    off = np.zeros((3, 3), dtype=complex)
    off[0, 2], off[2, 1] = 1.0, -2j
    assert maxabs(canonical_connection(np.eye(3), off, FRAME_21)) == 0.0
    p = random_unitary(rng, 3)
    g = block_diag_unitary(rng, FRAME_21) - np.eye(3)
    assert maxabs(canonical_connection(p, p @ g, FRAME_21), g) <= 1e-14


def test_connection_requires_unitary():
    with pytest.raises(NotUnitary):
        canonical_connection(2 * np.eye(3), np.eye(3), FRAME_21)


@settings(max_examples=40, deadline=None)
@given(frames())
def test_connection_gauge_law_and_linearity(case):
    frame, rng = case
    d = frame.dim
    p = random_unitary(rng, d)
    q1, q2 = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)) for _ in range(2))
    g = block_diag_unitary(rng, frame)
    lhs = canonical_connection(p @ g, q1 @ g, frame)
    rhs = dagger(g) @ canonical_connection(p, q1, frame) @ g
    assert maxabs(lhs, rhs) <= 1e-10
    a = 0.3 - 1.7j
    lin = canonical_connection(p, q1 + a * q2, frame)
    assert maxabs(lin, canonical_connection(p, q1, frame) + a * canonical_connection(p, q2, frame)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(frames())
def test_free_action(case):
    frame, rng = case
    u = random_unitary(rng, frame.dim)
    g = block_diag_unitary(rng, frame)
    # u g = u has only the trivial solution, and u g determines g
    assert maxabs(dagger(u) @ (u @ g), g) <= 1e-12
    assert maxabs(dagger(u) @ u, np.eye(frame.dim)) <= 1e-12


def test_verify_horizontal_constant():
    u0 = random_unitary(np.random.default_rng(1), 3)
    lift = LiftCurve(np.linspace(0, 1, 11), np.broadcast_to(u0, (11, 3, 3)))
    assert verify_horizontal(lift, FRAME_21) == 0.0


def test_verify_horizontal_too_coarse():
    lift = LiftCurve(np.array([0.0, 1.0]), np.stack([np.eye(3)] * 2))
    with pytest.raises(GridTooCoarse):
        verify_horizontal(lift, FRAME_21)


def test_lift_must_be_unitary():
    with pytest.raises(NotUnitary):
        LiftCurve(np.array([0.0, 1.0]), np.stack([np.eye(3), 2 * np.eye(3)]))


def test_parallel_lift_is_horizontal(golden):
    _, h, s = golden
    r = nogp(h, s, 2000)
    assert verify_horizontal(parallel_lift(r), s.basis) <= 1e-6


def test_raw_lift_of_detuned_system_is_not_horizontal():
    # with the gate model itself the raw lift is already horizontal, so the
    # lower bound is checked on the detuned system
    _, _, s = three_level_case()
    grid = evolve(detuned_hamiltonian(), 2000)
    assert verify_horizontal(schrodinger_lift(grid), s.basis) > 1e-2


def test_horizontal_lift_of_horizontal_curve_is_unchanged(golden):
    _, h, s = golden
    pl = parallel_lift(nogp(h, s, 1000))
    assert maxabs(horizontal_lift(pl, s.basis).unitaries, pl.unitaries) <= 1e-10


def test_horizontal_lift_reproduces_parallel_frame(golden):
    p, h, s = golden
    r = nogp(h, s, 2000)
    hl = horizontal_lift(schrodinger_lift(r.grid), s.basis)
    assert maxabs(hl.unitaries, parallel_lift(r).unitaries) <= 1e-6
    assert maxabs(hl.start, np.eye(3)) == 0.0
    g = holonomy_from_lift(hl, s.basis, closure_tol(p))
    assert maxabs(g[:2, :2], tl.closed_form_g1(1.1, 0.4)) <= 1e-6
    assert abs(g[2, 2] + 1) <= 1e-8


def test_horizontal_lift_random_systems(cyclic_systems):
    for sys in cyclic_systems[:3]:
        r = nogp(sys.hamiltonian, sys.observable, 8000)
        frame = r.spectrum.basis
        raw = schrodinger_lift(r.grid)
        assert verify_horizontal(raw, frame) > 1e-1
        hl = horizontal_lift(raw, frame)
        assert verify_horizontal(hl, frame) <= 1e-9
        assert maxabs(hl.unitaries, parallel_lift(r).unitaries) <= 1e-6
        assert maxabs(holonomy_from_lift(hl, frame, tol=1e-6), r.holonomy) <= 1e-6


def test_horizontal_lift_idempotent(cyclic_systems):
    sys = cyclic_systems[4]
    r = nogp(sys.hamiltonian, sys.observable, 2000)
    frame = r.spectrum.basis
    once = horizontal_lift(schrodinger_lift(r.grid), frame)
    twice = horizontal_lift(once, frame)
    assert maxabs(once.unitaries, twice.unitaries) <= 1e-9


def test_holonomy_constant_lift():
    lift = LiftCurve(np.linspace(0, 1, 5), np.stack([np.eye(3)] * 5))
    assert maxabs(holonomy_from_lift(lift, FRAME_21), np.eye(3)) == 0.0


def test_holonomy_three_level_matches_nogp(golden):
    p, h, s = golden
    r = nogp(h, s, 2000)
    g = holonomy_from_lift(parallel_lift(r), s.basis, closure_tol(p))
    # any leakage out of the blocks is the numerical non-closure of the loop
    assert maxabs(block_part(g, s.basis), r.holonomy) <= 1e-8
    assert maxabs(g, r.holonomy) <= max(1e-8, 1.01 * r.cyclicity)


def test_holonomy_open_base_rejected():
    _, _, s = three_level_case()
    grid = evolve(detuned_hamiltonian(), 500)
    with pytest.raises(NotClosedBase):
        holonomy_from_lift(schrodinger_lift(grid), s.basis)


def test_loop_twice_three_level(golden):
    p, h, s = golden
    r = nogp(h, s, 2000)
    twice = horizontal_lift(repeat_loop(schrodinger_lift(r.grid), s.basis), s.basis)
    g2 = holonomy_from_lift(twice, s.basis, 2 * closure_tol(p))
    assert maxabs(block_part(g2, s.basis), r.holonomy @ r.holonomy) <= 1e-7


def test_loop_twice_random_system(cyclic_systems):
    sys = cyclic_systems[0]
    r = nogp(sys.hamiltonian, sys.observable, 16000)
    frame = r.spectrum.basis
    twice = horizontal_lift(repeat_loop(schrodinger_lift(r.grid), frame), frame)
    assert len(twice.times) == 2 * 16000 + 1
    assert maxabs(holonomy_from_lift(twice, frame, 1e-6), r.holonomy @ r.holonomy) <= 1e-6


def test_right_translation_preserves_horizontality(golden, rng):
    _, h, s = golden
    pl = parallel_lift(nogp(h, s, 1000))
    g = block_diag_unitary(rng, s.basis)
    moved = right_translate(pl, g)
    assert verify_horizontal(moved, s.basis) <= 1e-6
