"""Command-line interface.

One executable, one subcommand per pipeline stage:

    lacunary gen-sequence --kind geometric --base 2 --n 100 --out seq.csv
    lacunary fracparts --seed 7 --guard 64 --kind geometric --base 2 --n 2000 --out theta.csv
    lacunary spacings --theta theta.csv --level 1 --mode circular --bins 0.1:10 --out deltas.csv
    lacunary intervals --theta theta.csv --lambda 1.0 --trials 100000 --seed 3 --out occ.csv
    lacunary poisson --pdf --level 2 --grid 0:10:0.1 --out p2.csv
    lacunary correlate --theta theta.csv --k 2 --f bump --rho 1.0 --method windowed --out r2.json
    lacunary count --system homogeneous --r 3 --n 32 --kind geometric --base 2 --out counts.jsonl
    lacunary smallparts gmax --theta theta.csv
    lacunary smallparts lambda --a 3,24,192 --n 8 --out lambda.json
    lacunary experiment run --config exp.cfg --ledger runs.jsonl
    lacunary experiment report --id <record-id> --ledger runs.jsonl

Numeric CSV output uses 17 significant digits (30 for raw theta values);
exact rationals are printed as "p/q" strings.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np
import yaml

from . import correlations, counting, harness, poisson_model, smallparts, spacings
from .fracparts import OrderedPoints, frac_parts, required_precision, sample_alpha
from .sequences import SequenceSpec, generate, spec_from_dict


def _fmt(x, digits: int = 17) -> str:
    if isinstance(x, float):
        return format(x, f".{digits}g")
    return str(x)


def _write_csv(path: str, rows, digits: int = 17, header_comments=()):
    with open(path, "w", encoding="utf-8") as fh:
        for comment in header_comments:
            fh.write(f"# {comment}\n")
        for row in rows:
            fh.write(",".join(_fmt(c, digits) for c in row) + "\n")


def _spec_from_args(args) -> SequenceSpec:
    d = {"kind": args.kind}
    if args.kind == "geometric":
        d["base"] = args.base
    elif args.kind == "polynomial":
        d["degree"] = args.degree
    elif args.kind == "fibonacci":
        d["seed_pair"] = [int(v) for v in args.seed_pair.split(",")]
    elif args.kind == "explicit":
        if not args.values:
            raise SystemExit("explicit kind needs --values")
        d["values"] = [int(v) for v in args.values.split(",")]
    return spec_from_dict(d)


def _add_sequence_args(p: argparse.ArgumentParser):
    p.add_argument("--kind", default="geometric",
                   choices=["geometric", "fibonacci", "polynomial", "explicit"])
    p.add_argument("--base", type=int, default=2)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--seed-pair", default="1,2")
    p.add_argument("--values", default="")


def _load_theta(path: str) -> OrderedPoints:
    digest = "file"
    eps = 0.0
    theta = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("# ")
                if body.startswith("alpha_digest="):
                    digest = body.split("=", 1)[1]
                elif body.startswith("eps_theta="):
                    eps = float(body.split("=", 1)[1])
                continue
            if line.startswith("x,"):
                continue
            _, value = line.split(",")
            theta.append(float(value))
    return OrderedPoints.from_theta(np.array(theta), digest=digest, eps=eps)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_gen_sequence(args) -> int:
    spec = _spec_from_args(args)
    values = generate(spec, args.n)
    _write_csv(args.out, [("index", "value")] + [(i + 1, v) for i, v in enumerate(values)])
    print(f"wrote {args.n} values of {spec.label()} to {args.out}")
    return 0


def _cmd_fracparts(args) -> int:
    spec = _spec_from_args(args)
    values = generate(spec, args.n)
    precision = required_precision(spec, args.n, args.guard)
    alpha = sample_alpha(args.seed, precision)
    points = frac_parts(alpha, values, args.guard)
    comments = [
        f"alpha_digest={points.alpha_digest}",
        f"eps_theta={points.eps_theta!r}",
        f"seed={args.seed} precision_bits={precision} guard={args.guard}",
        f"sequence={spec.label()}",
    ]
    rows = [("x", "theta")] + [
        (x + 1, t) for x, t in enumerate(points.theta_by_index)
    ]
    _write_csv(args.out, rows, digits=30, header_comments=comments)
    print(f"wrote {args.n} fractional parts to {args.out}")
    return 0


def _cmd_spacings(args) -> int:
    points = _load_theta(args.theta)
    sample = spacings.normalized_spacings(points, args.level, args.mode)
    if args.raw:
        _write_csv(args.out, [("n", "delta")] + list(enumerate(sample.deltas, 1)))
    else:
        width, s_max = (float(v) for v in args.bins.split(":"))
        edges, counts, dens = spacings.spacing_histogram(sample, width, s_max)
        rows = [("s_lo", "s_hi", "count", "empirical_density", "model_density")]
        for i in range(len(dens)):
            mid = 0.5 * (edges[i] + edges[i + 1])
            rows.append((edges[i], edges[i + 1], int(counts[i]), dens[i],
                         poisson_model.level_spacing_pdf(args.level, mid)))
        rows.append((edges[-1], float("inf"), int(counts[-1]), "", ""))
        _write_csv(args.out, rows)
    print(f"wrote level-{args.level} {args.mode} spacings to {args.out}")
    return 0


def _cmd_intervals(args) -> int:
    points = _load_theta(args.theta)
    hist = spacings.interval_counts(points, args.lam, args.trials, args.seed)
    rows = [("k", "count", "frequency", "poisson_pmf")]
    for k, c in sorted(hist.counts.items()):
        rows.append((k, c, c / hist.trials, poisson_model.interval_count_pmf(args.lam, k)))
    _write_csv(args.out, rows)
    print(f"interval occupancy over {args.trials} trials: mean {hist.mean():.6f} "
          f"(lambda = {args.lam}); wrote {args.out}")
    return 0


def _cmd_poisson(args) -> int:
    lo, hi, step = (float(v) for v in args.grid.split(":"))
    grid = np.arange(lo, hi + step / 2, step)
    if args.pmf:
        rows = [("k", "pmf")] + [
            (k, poisson_model.interval_count_pmf(args.lam, k)) for k in range(args.kmax + 1)
        ]
    else:
        fn = poisson_model.level_spacing_cdf if args.cdf else poisson_model.level_spacing_pdf
        name = "cdf" if args.cdf else "pdf"
        rows = [("s", name)] + [(s, fn(args.level, float(s))) for s in grid]
    _write_csv(args.out, rows)
    print(f"wrote {args.out}")
    return 0


def _cmd_correlate(args) -> int:
    points = _load_theta(args.theta)
    f = correlations.TestFunction(kind=args.f, dim=args.k - 1, rho=args.rho)
    run = (correlations.correlation_direct if args.method == "windowed"
           else correlations.correlation_naive)
    res = run(points, args.k, f)
    payload = {
        "k": res.k,
        "n": res.n,
        "value": res.value,
        "tuple_count": res.tuple_count,
        "method": res.method,
        "f": {"kind": args.f, "rho": args.rho, "dim": args.k - 1,
              "integral": f.integral, "digest": res.f_digest},
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"R_{args.k} = {res.value!r} over {res.tuple_count} tuples; wrote {args.out}")
    return 0


def _cmd_count(args) -> int:
    spec = _spec_from_args(args)
    values = generate(spec, args.n)
    if args.system == "homogeneous":
        res = counting.count_homogeneous(args.r, args.n, values, args.variant)
    elif args.system == "pair-equation":
        res = counting.count_pair_equation(args.k, args.n, values)
    elif args.system == "contrast":
        res = counting.count_contrast_triple(args.n, values)
    else:
        raise SystemExit(f"unknown system {args.system}")
    payload = {
        "system": args.system,
        "n": args.n,
        "sequence": spec.describe(),
        "total": res.total,
        "degenerate": res.degenerate,
        "nondegenerate": res.nondegenerate,
        "elapsed": res.elapsed,
        "params": res.params,
    }
    with open(args.out, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, sort_keys=True) + "\n")
    print(f"{args.system} N={args.n}: {res.total} solutions; appended to {args.out}")
    return 0


def _cmd_smallparts(args) -> int:
    if args.smallparts_cmd == "gmax":
        points = _load_theta(args.theta)
        census = smallparts.g_max(points)
        print(f"G(N={census.n}) = {census.g_max} at beta = {census.argmax_beta!r}")
        return 0
    a = [int(v) for v in args.a.split(",")]
    union = smallparts.lambda_measure(a, args.n)
    measure = union.measure
    bound = Fraction(4 ** len(a), args.n ** len(a))
    payload = {
        "a": a,
        "n": args.n,
        "measure": f"{measure.numerator}/{measure.denominator}",
        "bound": f"{bound.numerator}/{bound.denominator}",
        "interval_count": len(union.intervals),
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(f"measure = {payload['measure']} (bound {payload['bound']}); "
          f"{len(union.intervals)} intervals")
    return 0


def _cmd_experiment(args) -> int:
    if args.experiment_cmd == "run":
        with open(args.config, encoding="utf-8") as fh:
            config = yaml.safe_load(fh)
        record = harness.run_experiment(config, ledger=args.ledger, workers=args.workers)
        print(f"recorded {record.record_id}")
        for key, val in record.summary.items():
            if isinstance(val, (int, float, str)):
                print(f"  {key} = {_fmt(val)}")
        if record.passed is not None:
            print(f"  thresholds: {'PASS' if record.passed else 'FAIL'}")
            return 0 if record.passed else 1
        return 0
    print(harness.report(args.ledger, args.id, args.out_dir))
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lacunary",
        description="spacing statistics of fractional parts of lacunary sequences",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen-sequence", help="materialize a sequence to CSV")
    _add_sequence_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gen_sequence)

    p = sub.add_parser("fracparts", help="compute fractional parts of a seeded alpha")
    _add_sequence_args(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--guard", type=int, default=64)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_fracparts)

    p = sub.add_parser("spacings", help="level-a spacing sample or histogram")
    p.add_argument("--theta", required=True)
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--mode", default="circular", choices=["circular", "linear"])
    p.add_argument("--bins", default="0.1:10")
    p.add_argument("--raw", action="store_true", help="emit raw deltas instead")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_spacings)

    p = sub.add_parser("intervals", help="random-arc occupancy histogram")
    p.add_argument("--theta", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_intervals)

    p = sub.add_parser("poisson", help="evaluate the Poisson reference laws")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--pdf", action="store_true")
    group.add_argument("--cdf", action="store_true")
    group.add_argument("--pmf", action="store_true")
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--kmax", type=int, default=10)
    p.add_argument("--grid", default="0:10:0.1")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_poisson)

    p = sub.add_parser("correlate", help="k-level correlation sum")
    p.add_argument("--theta", required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--f", default="bump", choices=["bump", "box", "triangle"])
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--method", default="windowed", choices=["windowed", "naive"])
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_correlate)

    p = sub.add_parser("count", help="exact Diophantine solution counts")
    _add_sequence_args(p)
    p.add_argument("--system", required=True,
                   choices=["homogeneous", "pair-equation", "contrast"])
    p.add_argument("--r", type=int, default=3)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--variant", default="distinct", choices=["distinct", "sys3"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_count)

    p = sub.add_parser("smallparts", help="window censuses and exact measures")
    ssub = p.add_subparsers(dest="smallparts_cmd", required=True)
    pg = ssub.add_parser("gmax", help="max points in any 2/N window")
    pg.add_argument("--theta", required=True)
    pl = ssub.add_parser("lambda", help="exact measure of the simultaneous-hit set")
    pl.add_argument("--a", required=True, help="comma-separated constraint integers")
    pl.add_argument("--n", type=int, required=True)
    pl.add_argument("--out", default="")
    p.set_defaults(fn=_cmd_smallparts)

    p = sub.add_parser("experiment", help="run or report recorded experiments")
    esub = p.add_subparsers(dest="experiment_cmd", required=True)
    pr = esub.add_parser("run")
    pr.add_argument("--config", required=True)
    pr.add_argument("--ledger", required=True)
    pr.add_argument("--workers", type=int, default=None)
    pe = esub.add_parser("report")
    pe.add_argument("--id", required=True)
    pe.add_argument("--ledger", required=True)
    pe.add_argument("--out-dir", default=".")
    p.set_defaults(fn=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
