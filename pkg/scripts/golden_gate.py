"""Gate errors of the three-level model over random angles and all pulse shapes."""
import argparse
import time

import numpy as np

from nogp import three_level as tl
from nogp.engine import closed_loop_frames, nogp, phase_via_loop_basis


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pairs", type=int, default=20)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    angles = np.column_stack([rng.uniform(0, np.pi, args.pairs),
                              rng.uniform(0, 2 * np.pi, args.pairs)])
    print(f"{'pulse':6s} {'max|G1-n.s|':>12s} {'max|G2+1|':>12s} {'loop route':>12s} {'cyc':>10s} {'sec':>6s}")
    for shape in tl.PULSE_SHAPES:
        t0 = time.perf_counter()
        e1 = e2 = e3 = cyc = 0.0
        for theta, vartheta in angles:
            p = tl.ThreeLevelParams.from_gate_angles(theta, vartheta, shape)
            s = tl.spectrum(p)
            r = nogp(tl.build_hamiltonian(p), s, args.steps)
            e1 = max(e1, np.abs(r.blocks[0] - tl.closed_form_g1(theta, vartheta)).max())
            e2 = max(e2, abs(r.blocks[1][0, 0] + 1))
            frames, _ = closed_loop_frames(r.grid, s)
            loop = phase_via_loop_basis(frames, r.grid.times)
            e3 = max(e3, max(np.abs(a - b).max() for a, b in zip(loop, r.blocks)))
            cyc = max(cyc, r.cyclicity)
        print(f"{shape:6s} {e1:12.2e} {e2:12.2e} {e3:12.2e} {cyc:10.1e} {time.perf_counter() - t0:6.2f}")


if __name__ == "__main__":
    main()
