"""Command-line interface.

Subcommands:
  eof       build an orthonormal basis from historical count data
  fit       sample the posterior of one model for a counts file
  classify  turn posterior draws (or counts, for classical tests) into
            per-region decisions
  study     run the simulation study grid

Every option can also be supplied through an environment variable named
ATTRIB_<OPTION> (for example ATTRIB_SEED=12); explicit flags win. Outputs
are deterministic for a fixed configuration and seed.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import metadata

import numpy as np

from . import classical, core, decisions, eof, mcmc, models, simstudy

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

ENV_PREFIX = "ATTRIB_"


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_CONFIG):
        super().__init__(message)
        self.code = code


def _version() -> str:
    try:
        return metadata.version("attrib")
    except metadata.PackageNotFoundError:
        return "unknown"


def _env_default(name: str, default=None):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), default)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=_env_default("seed", 0), help="RNG seed")
    p.add_argument("--jobs", type=int, default=_env_default("jobs", 1), help="worker processes")
    p.add_argument(
        "--out-dir", default=_env_default("out_dir", "."), help="directory for output files"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="attrib", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eof", help="build an EOF basis from historical counts")
    p.add_argument("--historical", required=True, help="historical.csv")
    p.add_argument("--month", type=int, required=True)
    p.add_argument("--scenario", required=True, help="scenario label in the historical file")
    p.add_argument("--out", default=None, help="basis CSV path (default <out-dir>/eof_<scenario>.csv)")
    p.add_argument(
        "--center-anomalies",
        action="store_true",
        help="also write the centered logit anomaly matrix",
    )
    _add_common(p)

    p = sub.add_parser("fit", help="sample a model posterior")
    p.add_argument("--model", required=True, choices=models.MODEL_IDS)
    p.add_argument("--counts", required=True, help="counts.csv")
    p.add_argument("--regions", default=None, help="regions.csv (with adjacency.csv beside it)")
    p.add_argument("--adjacency", default=None, help="adjacency.csv (default: alongside regions)")
    p.add_argument("--eof-f", default=None, help="factual-scenario basis CSV")
    p.add_argument("--eof-c", default=None, help="counterfactual-scenario basis CSV")
    p.add_argument("--iterations", type=int, default=_env_default("iterations", 20000))
    p.add_argument("--burn-in", type=int, default=_env_default("burn_in", 4000))
    p.add_argument("--thin", type=int, default=_env_default("thin", 4))
    p.add_argument("--out", default=None, help="draws CSV path (default <out-dir>/draws_<model>.csv)")
    _add_common(p)

    p = sub.add_parser("classify", help="decisions from draws or from counts")
    p.add_argument("--draws", default=None, help="draws CSV from `attrib fit`")
    p.add_argument("--counts", default=None, help="counts.csv, for --method lrt-bh / lrt-fwer")
    p.add_argument("--method", choices=("lrt-bh", "lrt-fwer"), default=None)
    p.add_argument("--rule", choices=("r1", "r2", "r3"), default="r1")
    p.add_argument("--hypothesis", default="rr>=1", help='null, e.g. "rr<=5" or "rr outside (0.5,2)"')
    p.add_argument("--alpha", type=float, default=_env_default("alpha", 0.1))
    p.add_argument("--lambda2", type=float, default=_env_default("lambda2", 9.0))
    p.add_argument("--gamma", type=float, default=_env_default("gamma", None))
    p.add_argument("--multi", action="store_true", help="eight-category classification")
    p.add_argument("--l", type=float, default=0.5, help="lower absence-of-evidence bound")
    p.add_argument("--u", type=float, default=2.0, help="upper absence-of-evidence bound")
    p.add_argument("--out", default=None, help="decisions JSON path (default <out-dir>/decisions.json)")
    _add_common(p)

    p = sub.add_parser("study", help="run the simulation study")
    p.add_argument("--states", nargs="+", default=["g-re"], choices=simstudy.TRUE_STATES)
    p.add_argument("--schemes", nargs="+", type=int, default=[2], choices=simstudy.SCHEMES)
    p.add_argument("--n-ens", nargs="+", type=int, default=[100])
    p.add_argument("--methods", nargs="+", default=["m1", "rnb", "lrt-bh"])
    p.add_argument("--rules", nargs="+", default=["r1"], choices=("r1", "r2", "r3"))
    p.add_argument("--n-rep", type=int, default=_env_default("n_rep", 20))
    p.add_argument("--regions", default=None, help="regions.csv (default: 68 synthetic regions)")
    p.add_argument("--n-regions", type=int, default=68, help="synthetic region count")
    p.add_argument(
        "--cap-fraction", type=float, default=1.0,
        help="confine synthetic regions to a polar cap covering this sphere fraction",
    )
    p.add_argument("--alpha", type=float, default=_env_default("alpha", 0.1))
    p.add_argument("--iterations", type=int, default=_env_default("iterations", 20000))
    p.add_argument("--burn-in", type=int, default=_env_default("burn_in", 4000))
    p.add_argument("--thin", type=int, default=_env_default("thin", 4))
    p.add_argument(
        "--full",
        action="store_true",
        help="run the full grid: all states, schemes, ensemble sizes and methods",
    )
    _add_common(p)

    return parser


def _load_regions(args, m_default: int | None = None) -> core.RegionSet:
    if getattr(args, "regions", None):
        adjacency = getattr(args, "adjacency", None)
        if adjacency is None:
            guess = os.path.join(os.path.dirname(args.regions), "adjacency.csv")
            adjacency = guess if os.path.exists(guess) else None
        return core.read_regions(args.regions, adjacency)
    if m_default is None:
        return None
    cap = float(getattr(args, "cap_fraction", 1.0))
    return core.fibonacci_sphere_regions(m_default, cap_fraction=cap)


def _cmd_eof(args) -> int:
    df = eof.read_historical(args.historical)
    ids, logits = eof.historical_logit_matrix(df, args.month, args.scenario)
    basis = eof.compute_eofs(eof.empirical_logit_cov(logits))
    out = args.out or os.path.join(args.out_dir, f"eof_{args.scenario}.csv")
    eig_out = os.path.splitext(out)[0] + "_eigenvalues.csv"
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    eof.write_basis(basis, ids, out, eig_out)
    if args.center_anomalies:
        import pandas as pd

        anom = logits - logits.mean(axis=1, keepdims=True)
        anom_out = os.path.splitext(out)[0] + "_anomalies.csv"
        pd.DataFrame(anom, index=pd.Index(ids, name="region_id")).to_csv(
            anom_out, float_format="%.12g"
        )
        print(f"wrote {anom_out}")
    print(f"wrote {out} ({basis.h.shape[0]} regions, {basis.p} components)")
    print(f"wrote {eig_out}")
    return 0


def _cmd_fit(args) -> int:
    ids, counts = core.read_counts(args.counts)
    spec = models.ModelSpec(args.model)
    regions = _load_regions(args)
    if spec.needs_geometry:
        if regions is None:
            raise CliError(f"model {args.model} needs --regions")
        if set(regions.ids) != set(ids):
            raise CliError("regions and counts disagree on region ids", EXIT_DATA)
    basis_f = basis_c = None
    if spec.uses_eofs:
        if not (args.eof_f and args.eof_c):
            raise CliError(f"model {args.model} needs --eof-f and --eof-c")
        ids_f, basis_f = eof.read_basis(args.eof_f)
        ids_c, basis_c = eof.read_basis(args.eof_c)
        if ids_f != ids or ids_c != ids:
            raise CliError("basis and counts region ids must match in order", EXIT_DATA)
    cfg = mcmc.ChainConfig(
        iterations=int(args.iterations),
        burn_in=int(args.burn_in),
        thin=int(args.thin),
        seed=int(args.seed),
    )
    draws = mcmc.run_chain(spec, counts, regions=regions, basis_f=basis_f, basis_c=basis_c, cfg=cfg)
    out = args.out or os.path.join(args.out_dir, f"draws_{args.model}.csv")
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    mcmc.write_draws(draws, ids, out)
    diag = {k: v for k, v in draws.diagnostics.items() if isinstance(v, (int, float, np.floating))}
    print(f"wrote {out} ({draws.p_f.shape[0]} stored samples, {len(ids)} regions)")
    for key in sorted(diag):
        print(f"  {key} = {diag[key]:.4g}")
    return 0


def _cmd_classify(args) -> int:
    if (args.draws is None) == (args.counts is None):
        raise CliError("give exactly one of --draws or --counts")
    out = args.out or os.path.join(args.out_dir, "decisions.json")
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)

    if args.counts is not None:
        if args.method is None:
            raise CliError("--counts needs --method lrt-bh or lrt-fwer")
        hyp = core.parse_hypothesis(args.hypothesis)
        if hyp.kind == "ratio-outside-interval":
            raise CliError("classical tests support one-sided ratio hypotheses only")
        ids, counts = core.read_counts(args.counts)
        pvals = []
        for i in range(counts.m):
            if hyp.kind == "ratio-leq":
                stat = classical.lrt_statistic(
                    counts.z_f[i], counts.n_f[i], counts.z_c[i], counts.n_c[i], hyp.c
                )
            else:
                # RR >= c is p_C / p_F <= 1/c with the scenarios swapped
                stat = classical.lrt_statistic(
                    counts.z_c[i], counts.n_c[i], counts.z_f[i], counts.n_f[i], 1.0 / hyp.c
                )
            pvals.append(classical.lrt_pvalue(stat))
        pvals = np.array(pvals)
        alpha = float(args.alpha)
        delta = (
            classical.bh_procedure(pvals, alpha)
            if args.method == "lrt-bh"
            else classical.bonferroni_procedure(pvals, alpha)
        )
        doc = {
            "method": args.method,
            "alpha": alpha,
            "hypothesis": args.hypothesis,
            "n_rejected": int(delta.sum()),
            "regions": [
                {"region_id": rid, "p_value": round(float(pvals[i]), 12), "delta": int(delta[i])}
                for i, rid in enumerate(ids)
            ],
        }
        with open(out, "w") as fh:
            fh.write(json.dumps(doc, indent=2, sort_keys=True))
        print(f"wrote {out} ({int(delta.sum())} rejections)")
        return 0

    ids, draws = mcmc.read_draws(args.draws)
    hyp = core.parse_hypothesis(args.hypothesis)
    pi = decisions.posterior_null_probs(draws.rr, hyp)
    alpha = float(args.alpha)
    if args.rule == "r1":
        outcome = decisions.rule_r1(pi, alpha)
    elif args.rule == "r2":
        outcome = decisions.rule_r2(pi, float(args.lambda2))
    else:
        gamma = float(args.gamma) if args.gamma is not None else 0.1 * len(ids)
        outcome = decisions.rule_r3(pi, gamma)
    multi = None
    if args.multi:
        multi = decisions.multi_category(draws.rr, float(args.l), float(args.u), alpha)
    with open(out, "w") as fh:
        fh.write(decisions.decisions_to_json(ids, outcome, pi, multi))
    print(f"wrote {out} ({outcome.n_rejected} rejections, rule {args.rule})")
    return 0


def _cmd_study(args) -> int:
    regions = _load_regions(args, m_default=int(args.n_regions))
    if args.full:
        cfg = simstudy.StudyConfig(
            states=simstudy.TRUE_STATES,
            schemes=simstudy.SCHEMES,
            n_ens_values=simstudy.ENSEMBLE_SIZES,
            methods=simstudy.BAYES_METHODS + simstudy.CLASSICAL_METHODS,
            rules=("r1", "r2", "r3"),
            n_rep=int(args.n_rep),
            seed=int(args.seed),
            alpha=float(args.alpha),
            chain=mcmc.ChainConfig(
                iterations=int(args.iterations), burn_in=int(args.burn_in), thin=int(args.thin)
            ),
        )
    else:
        cfg = simstudy.StudyConfig(
            states=tuple(args.states),
            schemes=tuple(args.schemes),
            n_ens_values=tuple(args.n_ens),
            methods=tuple(args.methods),
            rules=tuple(args.rules),
            n_rep=int(args.n_rep),
            seed=int(args.seed),
            alpha=float(args.alpha),
            chain=mcmc.ChainConfig(
                iterations=int(args.iterations), burn_in=int(args.burn_in), thin=int(args.thin)
            ),
        )
    df, failures = simstudy.run_study(cfg, regions, jobs=int(args.jobs))
    os.makedirs(args.out_dir, exist_ok=True)
    out = os.path.join(args.out_dir, "study_metrics.csv")
    df.to_csv(out, index=False, float_format="%.12g")
    print(f"wrote {out} ({len(df)} rows)")
    agg = simstudy.aggregate_metrics(df)
    print(agg.to_string(index=False))
    if failures:
        fail_out = os.path.join(args.out_dir, "study_failures.json")
        with open(fail_out, "w") as fh:
            fh.write(json.dumps(failures, indent=2))
        print(f"{len(failures)} replicate fits failed; see {fail_out}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


_COMMANDS = {"eof": _cmd_eof, "fit": _cmd_fit, "classify": _cmd_classify, "study": _cmd_study}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except core.DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (np.linalg.LinAlgError, FloatingPointError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
