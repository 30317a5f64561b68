"""Command line: ``nogp {scan,xi,zeros,selftest}``.

Exit codes: 0 success, 1 usage error, 2 tolerance failure, 3 I/O error.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import fields

import numpy as np

from .errors import ToleranceNotMet

EXIT_OK, EXIT_USAGE, EXIT_TOLERANCE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_config(path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment, dashes in keys become underscores."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


def _scan_config(args):
    from .scanner import ScanConfig

    values = {}
    if args.config:
        values.update(read_config(args.config))
    for f in fields(ScanConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    known = {f.name: f for f in fields(ScanConfig)}
    unknown = set(values) - set(known)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    defaults = ScanConfig()
    typed = {}
    for k, v in values.items():
        d = getattr(defaults, k)
        if isinstance(v, str) and not isinstance(d, str):
            if isinstance(d, bool):
                v = v.lower() in ("1", "true", "yes", "on")
            elif isinstance(d, int):
                v = int(v)
            elif d is None:
                pass
            else:
                v = float(v)
        typed[k] = v
    try:
        return ScanConfig(**typed)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def cmd_scan(args) -> int:
    from .scanner import emit, scan, to_csv, zero_clusters

    cfg = _scan_config(args)
    t0 = time.perf_counter()
    records = scan(cfg)
    elapsed = time.perf_counter() - t0
    if cfg.out:
        emit(records, cfg.format, cfg.out, cfg)
    elif cfg.format == "csv":
        sys.stdout.write(to_csv(records))
    else:
        from .scanner import metadata, to_json
        sys.stdout.write(to_json(records, metadata(cfg)))
    clusters = zero_clusters(records)
    centres = ", ".join(f"{min(c, key=lambda r: r.gate_distance).E:.9f}" for c in clusters)
    print(f"{len(records)} records, {len(clusters)} zero clusters [{centres}] in {elapsed:.1f}s",
          file=sys.stderr)
    return EXIT_OK


def cmd_xi(args) -> int:
    from .xi import xi

    r = xi(args.e, t_max=args.t_max, N=args.terms, tol=args.tol)
    print(f"xi({r.E:.17g}) = {r.value:.17g}")
    print(f"err_bound = {r.err_bound:.3e}")
    return EXIT_OK


def cmd_zeros(args) -> int:
    from .xi import find_zeros

    for z in find_zeros(args.e_min, args.e_max, args.step, args.tol):
        print(f"{z.root:.12f}  [{z.lo:.12f}, {z.hi:.12f}]")
    return EXIT_OK


def selftest(n_angles: int = 4, steps: int = 2000, seed: int = 0, out=None) -> bool:
    """Three-level gate at random angles and every pulse shape; True if all pass."""
    from .engine import nogp
    from .three_level import PULSE_SHAPES, ThreeLevelParams, build_hamiltonian, closed_form_g1, spectrum

    out = out or sys.stdout
    rng = np.random.default_rng(seed)
    ok = True
    for shape in PULSE_SHAPES:
        for _ in range(n_angles):
            theta, vartheta = rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi)
            p = ThreeLevelParams.from_gate_angles(theta, vartheta, shape)
            r = nogp(build_hamiltonian(p), spectrum(p), steps)
            e1 = float(np.max(np.abs(r.blocks[0] - closed_form_g1(theta, vartheta))))
            e2 = float(abs(r.blocks[1][0, 0] + 1))
            passed = e1 <= 1e-6 and e2 <= 1e-8
            ok &= passed
            print(f"{'PASS' if passed else 'FAIL'} {shape:5s} theta={theta:.4f} vartheta={vartheta:.4f} "
                  f"|G1-n.sigma|={e1:.2e} |G2+1|={e2:.2e}", file=out)
    return ok


def cmd_selftest(args) -> int:
    return EXIT_OK if selftest(args.angles, args.steps) else EXIT_TOLERANCE


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nogp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("scan", help="sweep E and detect zeros through the gate signature")
    s.add_argument("--config", help="key=value file; command-line flags override it")
    s.add_argument("--e-min", dest="e_min", type=float)
    s.add_argument("--e-max", dest="e_max", type=float)
    s.add_argument("--e-step", dest="e_step", type=float)
    s.add_argument("--pulse", choices=("const", "sin2", "bump"))
    s.add_argument("--period", type=float)
    s.add_argument("--theta", type=float)
    s.add_argument("--vartheta", type=float)
    s.add_argument("--steps", type=int)
    s.add_argument("--cyc-tol", dest="cyc_tol", type=float)
    s.add_argument("--gate-tol", dest="gate_tol", type=float)
    s.add_argument("--gate-metric", dest="gate_metric", choices=("maxabs", "phase"))
    s.add_argument("--workers", type=int)
    s.add_argument("--format", choices=("csv", "json"))
    s.add_argument("--out")
    s.set_defaults(func=cmd_scan)

    x = sub.add_parser("xi", help="evaluate xi(E) with an error bound")
    x.add_argument("--e", type=float, required=True)
    x.add_argument("--t-max", dest="t_max", type=float, default=12.0)
    x.add_argument("--terms", type=int, default=64)
    x.add_argument("--tol", type=float)
    x.set_defaults(func=cmd_xi)

    z = sub.add_parser("zeros", help="refined sign changes of xi")
    z.add_argument("--e-min", dest="e_min", type=float, required=True)
    z.add_argument("--e-max", dest="e_max", type=float, required=True)
    z.add_argument("--step", type=float, default=0.25)
    z.add_argument("--tol", type=float, default=1e-8)
    z.set_defaults(func=cmd_zeros)

    t = sub.add_parser("selftest", help="three-level gate check against closed forms")
    t.add_argument("--angles", type=int, default=4)
    t.add_argument("--steps", type=int, default=2000)
    t.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"nogp: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ToleranceNotMet as exc:
        print(f"nogp: tolerance not met: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except OSError as exc:
        print(f"nogp: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"nogp: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
