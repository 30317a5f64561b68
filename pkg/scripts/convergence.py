"""Step-size study: propagator error, cyclicity and route agreement versus N."""
import argparse

import numpy as np

from nogp import three_level as tl
from nogp.engine import closed_loop_frames, nogp, phase_via_loop_basis
from nogp.propagator import evolve
from nogp.systems import random_cyclic_system


def route_gap(r):
    frames, _ = closed_loop_frames(r.grid, r.spectrum)
    return max(np.abs(a - b).max() for a, b in zip(phase_via_loop_basis(frames, r.grid.times), r.blocks))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, nargs="+", default=[500, 1000, 2000, 4000, 8000])
    ap.add_argument("--systems", type=int, default=2, help="random 4-level systems to include")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    p = tl.ThreeLevelParams.from_gate_angles(1.1, 0.4, "bump")
    h = tl.build_hamiltonian(p)
    ref = evolve(h, 4 * max(args.steps)).final
    rng = np.random.default_rng(args.seed)
    systems = [random_cyclic_system(rng) for _ in range(args.systems)]

    head = f"{'N':>6s} {'|U-U_ref|':>10s} {'cyc bump':>10s}" + "".join(
        f" {'gap sys' + str(k):>10s}" for k in range(len(systems)))
    print(head)
    prev = None
    for n in args.steps:
        err = np.abs(evolve(h, n).final - ref).max()
        r = nogp(h, tl.spectrum(p), n, threshold=1e-3)
        gaps = [route_gap(nogp(s.hamiltonian, s.observable, n, threshold=1e-3)) for s in systems]
        line = f"{n:6d} {err:10.2e} {r.cyclicity:10.2e}" + "".join(f" {g:10.2e}" for g in gaps)
        if prev is not None:
            line += f"   ratio {prev / err:.2f}"
        print(line)
        prev = err


if __name__ == "__main__":
    main()
