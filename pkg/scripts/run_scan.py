"""Scan E, print the detected zero clusters and compare them with xi sign changes."""
import argparse
import time

from nogp.scanner import ScanConfig, emit, scan, sign_change_brackets, zero_clusters
from nogp.xi import find_zeros


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--e-min", type=float, default=10.0)
    ap.add_argument("--e-max", type=float, default=30.0)
    ap.add_argument("--e-step", type=float, default=0.25)
    ap.add_argument("--pulse", default="const")
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--out", default=None, help="write records here (.csv or .json)")
    args = ap.parse_args()

    cfg = ScanConfig(e_min=args.e_min, e_max=args.e_max, e_step=args.e_step,
                     pulse=args.pulse, workers=args.workers)
    t0 = time.perf_counter()
    records = scan(cfg)
    print(f"{len(records)} records in {time.perf_counter() - t0:.1f}s")

    clusters = zero_clusters(records)
    brackets = sign_change_brackets(records)
    roots = find_zeros(cfg.e_min, cfg.e_max, cfg.e_step, 1e-10)
    print(f"{len(clusters)} clusters, {len(brackets)} sign-change brackets")
    for c, (lo, hi) in zip(clusters, brackets):
        best = min(c, key=lambda r: r.gate_distance)
        print(f"  [{lo:6.2f}, {hi:6.2f}]  E* = {best.E:.10f}  gate {best.gate_distance:.1e}  "
              f"cyc {best.cyc_residual:.1e}  records {len(c)}")
    print("xi roots: " + ", ".join(f"{z.root:.10f}" for z in roots))

    grid = [r for r in records if r.status == "grid"]
    print("\n    E       delta        gate")
    for r in grid[::4]:
        print(f"{r.E:6.2f} {r.delta:11.3e} {r.gate_distance:11.3e}")

    if args.out:
        emit(records, "json" if args.out.endswith(".json") else "csv", args.out, cfg)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
