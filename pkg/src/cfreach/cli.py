"""Command-line entry point: ``cfreach <command> ...``.

Exit codes: 0 success, 1 usage or configuration error, 2 probabilistic
guarantee not witnessed by validation, 3 numerical failure (singular moment
matrix, non-finite trajectory), 4 too few samples for the requested degree.
"""
import argparse
import logging
import sys
import time

import numpy as np

from . import _backend
from .christoffel import fit
from .config import load_config
from .errors import (
    ConfigError,
    DimensionMismatch,
    InsufficientSamples,
    NonFiniteState,
    SingularMoment,
)
from .pac import ChernoffParams, PacParams, chernoff_sample_size, pac_sample_size
from .persist import load_estimator, report_text, save_estimator, save_report
from .sampler import atomic_write_text, generate_cloud, read_cloud, write_cloud
from .systems import monotone_interval
from .validator import validate, validate_points

log = logging.getLogger("cfreach")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_WITNESSED = 2
EXIT_NUMERICAL = 3
EXIT_INSUFFICIENT = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _u64(text):
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _require_out(args, cfg, key):
    path = args.out or cfg.outputs.get(key)
    if not path:
        raise ConfigError(f"no output path: pass --out or set output.{key} in the config")
    return path


def cmd_sample_size(args):
    if args.chernoff:
        margin, confidence = args.chernoff
        print(chernoff_sample_size(ChernoffParams(margin, confidence)))
        return EXIT_OK
    if None in (args.epsilon, args.delta, args.n, args.k):
        raise UsageError("sample-size needs --epsilon, --delta, --n and --k (or --chernoff)")
    try:
        params = PacParams(args.epsilon, args.delta, args.n, args.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(pac_sample_size(params))
    return EXIT_OK


def cmd_estimate(args):
    cfg = load_config(args.config)
    out_path = _require_out(args, cfg, "estimator")
    cloud_path = args.cloud_out or cfg.outputs.get("cloud")
    seed = cfg.train_seed if args.seed is None else args.seed
    n_samples = args.n_samples or cfg.n_samples()
    start = time.perf_counter()
    cloud = generate_cloud(cfg.problem, n_samples, seed, args.threads)
    sampled = time.perf_counter()
    meta = {
        "epsilon": cfg.epsilon,
        "delta": cfg.delta,
        "seed": seed,
        "system": cfg.problem.system.id,
        "system_digest": cfg.problem.digest(),
    }
    est = fit(cloud, cfg.k, normalize=cfg.normalize, threads=args.threads, meta=meta)
    done = time.perf_counter()
    save_estimator(out_path, est)
    if cloud_path:
        write_cloud(cloud_path, cloud)
    log.info(
        "N=%d m=%d alpha=%.6g jitter=%g sample=%.2fs fit=%.2fs backend=%s",
        n_samples, est.basis.size, est.alpha, est.meta["jitter"],
        sampled - start, done - sampled, _backend.kernels.NAME,
    )
    print(out_path)
    return EXIT_OK


def cmd_validate(args):
    cfg = load_config(args.config)
    est = load_estimator(args.estimator)
    if est.n != cfg.problem.dim:
        raise DimensionMismatch(
            f"estimator has dimension {est.n} but the config stores {cfg.problem.dim} states"
        )
    margin = args.margin if args.margin is not None else getattr(cfg.chernoff, "margin", None)
    confidence = (
        args.confidence if args.confidence is not None else getattr(cfg.chernoff, "confidence", None)
    )
    if margin is None or confidence is None:
        raise ConfigError("validation needs --margin and --confidence (or a [validate] table)")
    try:
        chernoff = ChernoffParams(margin, confidence)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    seed = cfg.validate_seed if args.seed is None else args.seed
    if args.cloud:
        cloud = read_cloud(args.cloud)
        report = validate_points(est, cloud.points, chernoff, cloud.seed, args.keep_outliers)
    else:
        report = validate(est, cfg.problem, chernoff, seed, args.keep_outliers, args.threads)
    target = 1.0 - cfg.epsilon
    extra = {"target_accuracy": target, "witnessed": report.certified_lower_bound >= target}
    prefix = args.out or cfg.outputs.get("report")
    if prefix:
        save_report(prefix, report, extra)
    sys.stdout.write(report_text(report, extra))
    return EXIT_OK if extra["witnessed"] else EXIT_NOT_WITNESSED


def grid_records(est, bounds, rows, cols, threads=1):
    """(rows*cols, 4) array of x1, x2, C(x), inside; row-major over x2 then x1."""
    if est.n != 2:
        raise DimensionMismatch(f"grids need a 2-D estimator, this one has n={est.n}")
    x1lo, x1hi, x2lo, x2hi = bounds
    if rows < 1 or cols < 1 or not (x1lo <= x1hi and x2lo <= x2hi):
        raise ValueError("grid needs positive resolution and ordered bounds")
    x1 = np.linspace(x1lo, x1hi, cols)
    x2 = np.linspace(x2lo, x2hi, rows)
    g2, g1 = np.meshgrid(x2, x1, indexing="ij")
    pts = np.column_stack([g1.ravel(), g2.ravel()])
    values = est.evaluate(pts, threads)
    return np.column_stack([pts, values, (values <= est.alpha).astype(float)])


def cmd_grid(args):
    est = load_estimator(args.estimator)
    records = grid_records(est, args.bounds, *args.resolution, threads=args.threads)
    lines = ["x1,x2,C,inside"]
    lines.extend(
        f"{float(r[0])!r},{float(r[1])!r},{float(r[2])!r},{int(r[3])}" for r in records
    )
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    print(args.out)
    return EXIT_OK


def cmd_interval(args):
    cfg = load_config(args.config)
    prob = cfg.problem
    if not prob.system.monotone:
        raise ConfigError(f"system {prob.system.id!r} is not monotone; no interval bound applies")
    lower, upper = monotone_interval(
        prob.system, prob.integ, prob.t0, prob.t1,
        prob.x0_lower, prob.x0_upper, prob.d_lower, prob.d_upper,
    )
    names = [f"x{i + 1}" for i in range(prob.system.state_dim)]
    if prob.projection is not None:
        idx = list(prob.projection)
        lower, upper, names = lower[idx], upper[idx], [names[i] for i in idx]
    text = "".join(
        f"{name} {float(lo)!r} {float(hi)!r}\n" for name, lo, hi in zip(names, lower, upper)
    )
    if args.out:
        atomic_write_text(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="cfreach", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample-size", help="PAC (or a-posteriori) sample count")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--chernoff", nargs=2, type=float, metavar=("MARGIN", "CONFIDENCE"))
    p.set_defaults(func=cmd_sample_size)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True)
        p.add_argument("--seed", type=_u64)
        p.add_argument("--threads", type=int, default=0, help="worker threads, 0 = all cores")
        p.add_argument("--out")

    p = sub.add_parser("estimate", help="sample, fit and save an estimator")
    common(p)
    p.add_argument("--cloud-out")
    p.add_argument("--n-samples", type=int)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("validate", help="a-posteriori accuracy on fresh samples")
    common(p)
    p.add_argument("--estimator", required=True)
    p.add_argument("--margin", type=float)
    p.add_argument("--confidence", type=float)
    p.add_argument("--cloud", help="validate on this cloud file instead of fresh samples")
    p.add_argument("--keep-outliers", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("grid", help="export C and membership on a 2-D grid")
    common(p, config=False)
    p.add_argument("--estimator", required=True)
    p.add_argument("--bounds", nargs=4, type=float, required=True,
                   metavar=("X1LO", "X1HI", "X2LO", "X2HI"))
    p.add_argument("--resolution", nargs=2, type=int, default=(200, 200), metavar=("ROWS", "COLS"))
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("interval", help="tight box for a monotone system")
    common(p)
    p.set_defaults(func=cmd_interval)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s: %(message)s",
    )
    if getattr(args, "out", None) is None and args.command == "grid":
        print("cfreach grid: --out is required", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except InsufficientSamples as exc:
        print(f"cfreach {args.command}: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    except (UsageError, ConfigError, DimensionMismatch, FileNotFoundError, ValueError) as exc:
        print(f"cfreach {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SingularMoment, NonFiniteState, ArithmeticError) as exc:
        print(f"cfreach {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
