"""Command-line interface.

Every subcommand is a thin shell over the library: identical inputs via
CLI and via Python produce identical outputs.  Exit codes: 0 success,
2 usage or validation failure, 3 numerical failure.
"""

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from . import covid, gee, matrices, montecarlo, structure
from .errors import GgmGofError, ParseError, RegionMappingError
from .gof import dn_statistic, empowered_statistic, node_statistic

USAGE_EXIT = 2
NUMERICAL_EXIT = 3


def _write_output(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")


def _report_payload(report, fmt):
    if fmt == "csv":
        d = report.to_dict()
        keys = [k for k in d if k not in ("argmax", "flagged_entries")]
        row = ",".join(str(d[k]) for k in keys)
        arg = f"\"({d['argmax'][0]}, {d['argmax'][1]})\""
        return ",".join(keys + ["argmax"]) + "\n" + row + "," + arg
    return report.to_json(indent=1)


def cmd_gen(args):
    if args.output is None:
        raise ValueError("gen requires --output PREFIX for the generated files")
    family = args.family
    provenance = {"family": family, "p": args.p}
    if family == "exp-band":
        M = matrices.banded_exponential_precision(args.p, args.s0, args.base)
        provenance.update(s0=args.s0, base=args.base)
    elif family == "poly-band":
        M = matrices.banded_polynomial_precision(args.p, args.s0, args.lam)
        provenance.update(s0=args.s0, lam=args.lam)
    elif family == "factor":
        if not args.u:
            raise ValueError("factor family requires at least one --u vector")
        alphas = args.alpha or [1.0] * len(args.u)
        if len(alphas) != len(args.u):
            raise ValueError("need as many --alpha values as --u vectors")
        terms = []
        for alpha, u_text in zip(alphas, args.u):
            u = np.zeros(args.p)
            parsed = [float(v) for v in u_text.split(",") if v.strip()]
            if len(parsed) > args.p:
                raise ValueError(f"factor vector longer than p={args.p}")
            u[: len(parsed)] = parsed
            terms.append((alpha, u))
        M = matrices.factor_precision(args.p, terms)
        provenance.update(alphas=list(alphas), vectors=[t for t in args.u])
    elif family == "identity":
        M = matrices.identity_precision(args.p)
    else:
        raise ValueError(f"unknown family {family!r}")
    matrices.save_matrix_csv(M, f"{args.output}.csv", provenance=provenance)
    structure.save_edge_set(
        structure.support_edge_set(M, 0.0), f"{args.output}.edges.json"
    )
    print(f"wrote {args.output}.csv, {args.output}.csv.meta.json, {args.output}.edges.json")
    return 0


def cmd_test(args):
    X = matrices.load_matrix_csv(args.data)
    edge_set = structure.load_edge_set(args.edges)
    if X.shape[1] != edge_set.p:
        raise ValueError(
            f"data has {X.shape[1]} columns but edge set expects {edge_set.p}"
        )
    gamma = None if args.gamma == "auto" else float(args.gamma)
    if args.variant == "plain":
        report = dn_statistic(X, edge_set, level=args.level, gamma=gamma)
    elif args.variant == "node":
        if args.node is None:
            raise ValueError("--variant node requires --node INDEX")
        report = node_statistic(X, edge_set, args.node, level=args.level)
    else:
        report = empowered_statistic(
            X,
            edge_set,
            cn=args.cn,
            delta_n=args.delta_n,
            cn_mode=args.cn_mode,
            level=args.level,
            gamma=gamma,
        )
    _write_output(_report_payload(report, args.format), args.output)
    return 0


def cmd_simulate(args):
    spec = montecarlo.load_simulation_spec(args.spec)
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    if args.level is not None:
        spec = dataclasses.replace(spec, level=args.level)
    n_jobs = args.threads
    if spec.variant == "both":
        result = montecarlo.run_comparison(spec, n_jobs=n_jobs)
        labeled = [("plain", result.plain), ("empowered", result.empowered)]
    else:
        result = montecarlo.run_experiment(spec, n_jobs=n_jobs)
        labeled = [(spec.variant, result)]
    if args.format == "json":
        payload = {
            label: {
                "rejection_rate": res.rejection_rate,
                "replications": res.replications,
                "mc_standard_error": res.mc_standard_error,
            }
            for label, res in labeled
        }
        _write_output(json.dumps(payload, indent=1), args.output)
    else:
        _write_output(montecarlo.results_csv(spec, labeled), args.output)
    return 0


def cmd_covid_prep(args):
    records = covid.load_nyt_csv(args.csv)
    panel = covid.weekly_aggregate(records, year=args.year)
    prefix = args.output or "covid"
    covid.write_panel_csv(panel, f"{prefix}.panel.csv")
    np.savetxt(
        f"{prefix}.covariates.csv",
        covid.region_dummies(panel),
        delimiter=",",
        fmt="%d",
    )
    covid.write_panel_meta(panel, f"{prefix}.meta.json")
    print(
        f"wrote {prefix}.panel.csv ({panel.values.shape[0]}x{panel.values.shape[1]}), "
        f"{prefix}.covariates.csv, {prefix}.meta.json"
    )
    return 0


def cmd_gee(args):
    problem = gee.GeeProblem(
        responses=matrices.load_matrix_csv(args.panel),
        covariates=matrices.load_matrix_csv(args.covariates),
        working_precision=matrices.load_matrix_csv(args.working_precision),
    )
    fit = gee.fit_gee(problem)
    payload = {
        "beta": fit.beta.tolist(),
        "se": fit.se.tolist(),
        "significant": [bool(v) for v in fit.significant],
    }
    if args.bootstrap:
        try:
            size_text, repeat_text = args.bootstrap.lower().split("x")
            subset_size, repeats = int(size_text), int(repeat_text)
        except ValueError as exc:
            raise ValueError(
                f"--bootstrap expects SIZExREPEATS (e.g. 40x100), got {args.bootstrap!r}"
            ) from exc
        summary = gee.subsample_bootstrap(
            problem, subset_size=subset_size, repeats=repeats, seed=args.seed or 0
        )
        payload["bootstrap"] = {
            "subset_size": summary.subset_size,
            "repeats": summary.repeats,
            "ave": summary.ave.tolist(),
            "sd": summary.sd.tolist(),
        }
    _write_output(json.dumps(payload, indent=1), args.output)
    return 0


def _common_flags():
    # A fresh parent per subcommand: argparse shares action objects across
    # parents, so per-subcommand set_defaults would otherwise leak.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master random seed")
    common.add_argument(
        "--threads",
        type=int,
        default=os.cpu_count() or 1,
        help="parallel workers for replication loops",
    )
    common.add_argument("--level", type=float, default=None, help="nominal test level")
    common.add_argument("--output", default=None, help="output path or prefix (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    return common


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ggmgof",
        description="Goodness-of-fit tests for Gaussian graphical model structures",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", parents=[_common_flags()], help="generate a precision matrix")
    p_gen.add_argument("--family", required=True,
                       choices=("exp-band", "poly-band", "factor", "identity"))
    p_gen.add_argument("--p", type=int, required=True)
    p_gen.add_argument("--s0", type=int, default=4)
    p_gen.add_argument("--base", type=float, default=0.6)
    p_gen.add_argument("--lam", type=float, default=2.0)
    p_gen.add_argument("--u", action="append", help="factor vector, comma separated")
    p_gen.add_argument("--alpha", action="append", type=float, help="factor weight")
    p_gen.set_defaults(func=cmd_gen)

    p_test = sub.add_parser("test", parents=[_common_flags()], help="test a structure on data")
    p_test.add_argument("data", help="dataset CSV, n rows x p columns, no header")
    p_test.add_argument("edges", help="edge-set JSON (1-based indices)")
    p_test.add_argument("--variant", choices=("plain", "empowered", "node"), default="plain")
    p_test.add_argument("--node", type=int, default=None)
    p_test.add_argument("--gamma", default="auto", help="'auto' or a numeric override")
    p_test.add_argument("--cn", type=float, default=0.05)
    p_test.add_argument("--delta-n", dest="delta_n", type=float, default=None)
    p_test.add_argument("--cn-mode", dest="cn_mode",
                        choices=("scaled", "constant"), default="scaled")
    p_test.set_defaults(func=cmd_test, level=0.05, format="json")

    p_sim = sub.add_parser("simulate", parents=[_common_flags()], help="run a Monte Carlo spec")
    p_sim.add_argument("spec", help="simulation spec JSON")
    p_sim.set_defaults(func=cmd_simulate, format="csv")

    p_covid = sub.add_parser("covid-prep", parents=[_common_flags()],
                             help="build the weekly panel from the NYT CSV")
    p_covid.add_argument("csv", help="NYT us-states.csv (cumulative cases)")
    p_covid.add_argument("--year", type=int, default=2021)
    p_covid.set_defaults(func=cmd_covid_prep)

    p_gee = sub.add_parser("gee", parents=[_common_flags()],
                           help="fit the regression under a working precision")
    p_gee.add_argument("panel", help="responses CSV (subjects x periods)")
    p_gee.add_argument("covariates", help="covariates CSV (subjects x variables)")
    p_gee.add_argument("working_precision", help="working precision CSV (periods x periods)")
    p_gee.add_argument("--bootstrap", default=None, metavar="SIZExREPEATS",
                       help="subsample bootstrap, e.g. 40x100")
    p_gee.set_defaults(func=cmd_gee)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, ParseError, RegionMappingError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except GgmGofError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NUMERICAL_EXIT


if __name__ == "__main__":
    sys.exit(main())
