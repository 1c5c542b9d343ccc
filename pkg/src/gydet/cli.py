"""Command-line interface.

Subcommands:

  det     one determinant by any method; JSON record on stdout
  asym    asymptotic breakdown, optionally against the exact oracle; JSON
  bench   timing sweep over sizes for gy-a / dense; CSV with slope fits
  verify  cross-method check suite; pass/fail table, exit 3 on failure

Data goes to stdout, logs to stderr.  Exit codes: 0 success, 1 usage
error, 2 singular crossing, 3 failed verification.  Numbers are printed
with up to 17 significant digits so every float round-trips exactly.
Thread count comes from --threads or GYDET_THREADS; benchmarks default
to a single thread for stable scaling measurements.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from contextlib import contextmanager

USAGE_EXIT = 1
SINGULAR_EXIT = 2
VERIFY_EXIT = 3


def _format_float(x: float) -> str:
    # JSON has no inf/nan; absent diagnostics serialize as null
    if not math.isfinite(x):
        return "null"
    return f"{x:.17g}"


def json_17g(obj) -> str:
    """Minimal JSON writer formatting floats with %.17g (round-trip exact)."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, dict):
        inner = ", ".join(f"{json_17g(str(k))}: {json_17g(v)}" for k, v in obj.items())
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(json_17g(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj)!r}")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; this interface reserves 2 for
    # singular crossings, so remap.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


@contextmanager
def _thread_limit(n: int | None):
    if n is None:
        yield
        return
    try:
        from threadpoolctl import threadpool_limits

        with threadpool_limits(limits=n):
            yield
    except ImportError:
        # best effort: only effective if BLAS reads env at first import
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, str(n))
        yield


def _default_threads(args) -> int | None:
    if getattr(args, "threads", None) is not None:
        return args.threads
    env = os.environ.get("GYDET_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise SystemExit(USAGE_EXIT)
    return None


def _build_problem(args):
    """(spec, potential, descriptor, seed) from det/bench style flags."""
    from .lattice import LatticeSpec, PotentialField

    spec = LatticeSpec(d=args.dim, N=args.size_n, M=args.size_m)
    chosen = [
        name
        for name, val in (
            ("--mass2", args.mass2),
            ("--potential-file", args.potential_file),
            ("--random-seed", args.random_seed),
        )
        if val is not None
    ]
    if len(chosen) > 1:
        raise UsageError(f"conflicting potential flags: {', '.join(chosen)}")
    seed = None
    if args.potential_file is not None:
        pot = PotentialField.from_file(spec, args.potential_file)
        desc = f"file({args.potential_file})"
    elif args.random_seed is not None:
        lo, hi = args.random_range
        seed = args.random_seed
        pot = PotentialField.random_uniform(spec, seed=seed, lo=lo, hi=hi)
        desc = f"seeded-random(seed={seed}, lo={lo:g}, hi={hi:g})"
    else:
        m2 = args.mass2 if args.mass2 is not None else 0.0
        pot = PotentialField.constant(spec, m2)
        desc = f"constant(m2={m2:g})"
    return spec, pot, desc, seed


class UsageError(Exception):
    pass


def _compute_logdet(method: str, spec, pot, args):
    from . import gy, oracles
    from .logdet import dense_logdet
    from .lattice import build_interior_hamiltonian

    if method in ("eigenproduct", "sinh-product"):
        if pot.provenance[0] != "constant":
            raise UsageError(
                f"--method {method} needs a constant mass (it is a closed "
                "form for -Delta + m^2); it conflicts with "
                "--potential-file/--random-seed"
            )
        if spec.d != 2:
            raise UsageError(f"--method {method} is specific to --dim 2")
        m2 = pot.provenance[1]
        if m2 < 0:
            raise UsageError(f"--method {method} needs m2 >= 0")
        if method == "eigenproduct":
            return oracles.eigenproduct_logdet_2d(m2, spec.N, spec.M)
        return oracles.sinh_product_logdet(m2, spec.N, spec.M)
    if method == "dense":
        H = build_interior_hamiltonian(spec, pot, cap=args.dense_cap)
        return dense_logdet(H)
    if method == "gy-a":
        if spec.d == 1:
            return gy.scalar_logdet(pot.values[:, 0])
        return gy.matrix_logdet_aform(spec, pot)
    if method == "gy-y":
        # K = 1 matrix recursion doubles as the d = 1 growing-solution path
        return gy.matrix_logdet_yform(spec, pot)
    raise UsageError(f"unknown method {method}")


def cmd_det(args) -> int:
    spec, pot, desc, seed = _build_problem(args)
    t0 = time.perf_counter()
    ld = _compute_logdet(args.method, spec, pot, args)
    wall = time.perf_counter() - t0
    record = {
        "method": args.method,
        "inputs": {
            "d": spec.d,
            "N": spec.N,
            "M": spec.M,
            "potential": desc,
            "seed": seed,
        },
        "log_abs_det": ld.log_abs,
        "sign": ld.sign,
        "wall_time_seconds": wall,
        "diagnostics": {
            "min_pivot": ld.diagnostics.min_pivot,
            "rescale_count": ld.diagnostics.rescale_count,
            "method_tag": ld.method,
        },
    }
    print(json_17g(record))
    return 0


def cmd_asym(args) -> int:
    from . import asymptotics, oracles

    N, M = args.size_n, args.size_m
    if args.mass2 < 0:
        raise UsageError("--mass2 must be >= 0")
    if args.mass2 == 0.0:
        b = asymptotics.massless_asymptotic_logdet(N, M)
        regime = "massless"
    else:
        b = asymptotics.massive_asymptotic_logdet(args.mass2, N, M)
        regime = "massive"
    record = {
        "regime": regime,
        "inputs": {"mass2": args.mass2, "N": N, "M": M},
        "area_term": b.area_term,
        "perimeter_term": b.perimeter_term,
        "log_term": b.log_term,
        "constant_term": b.constant_term,
        "modular_term": b.modular_term,
        "total": b.total,
    }
    if args.with_exact:
        if args.mass2 == 0.0:
            exact = oracles.eigenproduct_logdet_2d(0.0, N, M)
        else:
            exact = oracles.sinh_product_logdet(args.mass2, N, M)
        record["exact"] = {
            "method": exact.method,
            "log_abs_det": exact.log_abs,
            "discrepancy": b.total - exact.log_abs,
        }
    print(json_17g(record))
    return 0


def _timed_median(fn, repeats: int, min_time: float) -> float:
    """Median of `repeats` calibrated timings: short calls run in batches
    sized so each measured batch lasts at least min_time."""
    fn()  # warmup (also JIT-loads LAPACK paths)
    times = []
    loops = 1
    for _ in range(repeats):
        while True:
            t0 = time.perf_counter()
            for _ in range(loops):
                fn()
            dt = time.perf_counter() - t0
            if dt >= min_time or loops >= 1 << 20:
                times.append(dt / loops)
                break
            growth = min(4.0, max(1.5, min_time / max(dt, 1e-9)))
            loops = max(loops + 1, int(loops * growth))
    times.sort()
    return times[len(times) // 2]


def cmd_bench(args) -> int:
    from . import gy
    from .lattice import LatticeSpec, PotentialField, build_interior_hamiltonian
    from .logdet import dense_logdet
    from .errors import SizeCapExceeded

    if args.dim != 2:
        raise UsageError("bench supports --dim 2 only")
    sizes = args.sizes
    methods = args.methods
    rows = []
    print("method,N,median_seconds,log_abs_det")
    for method in methods:
        fitted: list[tuple[int, float]] = []
        for n in sizes:
            spec = LatticeSpec(d=2, N=n, M=n)
            lo, hi = args.random_range
            pot = PotentialField.random_uniform(spec, seed=args.random_seed, lo=lo, hi=hi)
            if method == "dense":
                try:
                    H = build_interior_hamiltonian(spec, pot, cap=args.dense_cap)
                except SizeCapExceeded:
                    print(f"dense,{n},skipped,skipped")
                    continue
                fn = lambda: dense_logdet(H)
            elif method == "gy-a":
                fn = lambda: gy.matrix_logdet_aform(spec, pot)
            else:
                raise UsageError(f"bench method must be gy-a or dense, got {method}")
            med = _timed_median(fn, args.repeats, args.min_time)
            ld = fn()
            print(f"{method},{n},{_format_float(med)},{_format_float(ld.log_abs)}")
            fitted.append((n, med))
        if len(fitted) >= 2:
            import numpy as np

            x = np.log([n for n, _ in fitted])
            y = np.log([t for _, t in fitted])
            A = np.vstack([x, np.ones_like(x)]).T
            slope = float(np.linalg.lstsq(A, y, rcond=None)[0][0])
            ns = ",".join(str(n) for n, _ in fitted)
            print(f"# slope {method} {slope:.3f} (log-log fit over N={ns})")
        else:
            print(f"# slope {method} nan (fewer than two timed sizes)")
    return 0


def cmd_verify(args) -> int:
    from . import oracles
    from .verify import run_suite

    if args.corrupt_gamma:
        # fault-injection hook: prove a wrong dispersion relation is caught
        oracles.set_gamma_fault(args.corrupt_gamma)
    results = run_suite(quick=args.quick, out=sys.stdout)
    failures = [name for name, failure in results if failure is not None]
    if args.corrupt_gamma:
        oracles.set_gamma_fault(0.0)
    if failures:
        print(f"FAILED: {', '.join(failures)}", file=sys.stderr)
        return VERIFY_EXIT
    print(f"all {len(results)} checks passed")
    return 0


def _add_lattice_flags(p: argparse.ArgumentParser):
    p.add_argument("--dim", type=int, default=2, help="dimensionality d >= 1")
    p.add_argument("--size-n", type=int, required=True, help="longitudinal extent N")
    p.add_argument("--size-m", type=int, default=2, help="transverse extent M (per direction)")
    p.add_argument("--mass2", type=float, default=None, help="constant potential m^2")
    p.add_argument("--potential-file", default=None, help="site potential file")
    p.add_argument("--random-seed", type=int, default=None, help="seeded uniform potential")
    p.add_argument(
        "--random-range",
        type=float,
        nargs=2,
        default=(-1.0, 1.0),
        metavar=("LO", "HI"),
        help="uniform range for --random-seed (default -1 1)",
    )
    p.add_argument("--dense-cap", type=int, default=20000, help="dense row cap")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="gydet", description=__doc__.splitlines()[0])
    top.add_argument("--threads", type=int, default=None, help="BLAS thread cap")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("det", help="compute one determinant", parents=[])
    _add_lattice_flags(p)
    p.add_argument(
        "--method",
        choices=["gy-a", "gy-y", "dense", "eigenproduct", "sinh-product"],
        default="gy-a",
    )
    p.set_defaults(fn=cmd_det)

    p = sub.add_parser("asym", help="asymptotic breakdown")
    p.add_argument("--mass2", type=float, required=True, help="0 selects the massless route")
    p.add_argument("--size-n", type=int, required=True)
    p.add_argument("--size-m", type=int, required=True)
    p.add_argument("--with-exact", action="store_true", help="co-report the exact oracle")
    p.set_defaults(fn=cmd_asym)

    p = sub.add_parser("bench", help="scaling benchmark (CSV)")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument(
        "--sizes",
        type=lambda s: [int(t) for t in s.split(",")],
        required=True,
        help="comma list of N (= M) values",
    )
    p.add_argument(
        "--methods",
        type=lambda s: s.split(","),
        default=["gy-a", "dense"],
        help="comma list from {gy-a, dense}",
    )
    p.add_argument("--repeats", type=int, default=3, help="timings per row (median)")
    p.add_argument("--min-time", type=float, default=0.05, help="calibration floor per timing, seconds")
    p.add_argument("--random-seed", type=int, default=0)
    p.add_argument("--random-range", type=float, nargs=2, default=(-1.0, 1.0), metavar=("LO", "HI"))
    p.add_argument("--dense-cap", type=int, default=20000)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("verify", help="cross-method verification suite")
    p.add_argument("--quick", action="store_true", help="small-lattice subset")
    p.add_argument(
        "--corrupt-gamma",
        type=float,
        default=0.0,
        metavar="EPS",
        help="fault-injection test hook: perturb every gamma_k by a relative EPS",
    )
    p.set_defaults(fn=cmd_verify)
    return top


def main(argv=None) -> int:
    from .errors import GydetError, SingularCrossing

    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "bench" and args.threads is None and "GYDET_THREADS" not in os.environ:
        threads = 1  # stable single-threaded timings by default
    else:
        threads = _default_threads(args)
    try:
        with _thread_limit(threads):
            return args.fn(args)
    except UsageError as exc:
        print(f"gydet: error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except SingularCrossing as exc:
        print(f"gydet: singular crossing: {exc}", file=sys.stderr)
        return SINGULAR_EXIT
    except GydetError as exc:
        print(f"gydet: error: {exc}", file=sys.stderr)
        return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
