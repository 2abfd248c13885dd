"""Command line entry point.

Subcommands: ``generate``, ``solve``, ``verify``, ``demo`` and ``sweep``.
Reports are JSON; a short human-readable summary goes to standard output
when the report is written to a file.

Exit status: 0 success, 1 bad input or I/O failure, 2 a certificate failed,
3 a minimizer did not converge.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Optional, Sequence

import numpy as np

from . import banach, constructions, euclid, hyperbolic, oracle
from .core import (
    HYPERBOLOID,
    Certificate,
    ColoredConfig,
    ConfigError,
    NormKind,
    TransversalPartition,
    inter_color_diameter,
    parts_of,
)
from .euclid import ConvergenceError
from .formats import config_to_dict, dumps, load_config, read_json, partition_from_dict, write_json
from .localsearch import SearchLimitError

log = logging.getLogger("tverberg")

EXIT_OK, EXIT_INPUT, EXIT_CERT, EXIT_CONVERGENCE = 0, 1, 2, 3
SPACES = ("euclid", "banach", "hyper")


@dataclass
class RunConfig:
    command: str
    space: str = "euclid"
    norm: NormKind = field(default_factory=NormKind.l2)
    input: Optional[str] = None
    output: Optional[str] = None
    partition: Optional[str] = None
    tol: float = 1e-7
    eps: Optional[float] = None
    seed: int = 0
    restarts: int = 1
    use_oracle: bool = False

    def __post_init__(self) -> None:
        if self.space not in SPACES:
            raise ConfigError(f"unknown space {self.space!r}")
        if self.tol <= 0 or (self.eps is not None and self.eps <= 0):
            raise ConfigError("tolerances must be positive")
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1")


def theoretical_bound(space: str, norm: NormKind, r: int) -> Optional[float]:
    if space == "euclid":
        return 1.0 / math.sqrt(2 * r)
    if space == "banach" and norm.is_inf:
        return 0.5
    return None


def _check_space(cfg: ColoredConfig, space: str) -> None:
    if (space == "hyper") != (cfg.model == HYPERBOLOID):
        raise ConfigError(f"space {space!r} does not fit a {cfg.model} instance")


def _search(cfg: ColoredConfig, run: RunConfig, init: TransversalPartition):
    if run.space == "euclid":
        return euclid.local_search_euclid(cfg, init, run.eps)
    if run.space == "banach":
        return banach.local_search_banach(cfg, run.norm, init, run.eps)
    return hyperbolic.local_search_hyper(cfg, init, run.eps)


def _certify(cfg: ColoredConfig, run: RunConfig, report) -> Certificate:
    if run.space == "euclid":
        return euclid.certify_euclidean_bound(cfg, report, run.tol)
    if run.space == "banach":
        if run.norm.is_inf:
            return banach.certify_linf_bound(cfg, report, run.tol)
        return banach.certify_pairwise(report, run.tol)
    return hyperbolic.certify_hyperbolic(cfg, report, run.tol)


def _report_for(cfg: ColoredConfig, run: RunConfig, partition: TransversalPartition):
    if run.space == "euclid":
        return euclid.euclid_report(cfg, partition)
    if run.space == "banach":
        return banach.banach_report(cfg, partition, run.norm)
    return hyperbolic.hyper_report(cfg, partition)


def solve_instance(cfg: ColoredConfig, run: RunConfig) -> dict:
    """Best of ``run.restarts`` swap searches (identity start, then seeded random starts)."""
    _check_space(cfg, run.space)
    rng = np.random.default_rng(run.seed)
    minimize = run.space == "hyper"
    best, objectives = None, []
    for attempt in range(run.restarts):
        init = TransversalPartition.identity(cfg.r, cfg.k) if attempt == 0 else TransversalPartition.random(cfg.r, cfg.k, rng)
        rep = _search(cfg, run, init)
        objectives.append(rep.objective)
        if best is None or (rep.objective < best.objective if minimize else rep.objective > best.objective):
            best = rep
    cert = _certify(cfg, run, best)
    out = {
        "space": run.space,
        "k": cfg.k,
        "r": cfg.r,
        "dim": cfg.dim,
        "assignment": best.partition.assignment,
        "objective": best.objective,
        "swap_count": best.swap_count,
        "restart_objectives": objectives,
        "theoretical_bound": theoretical_bound(run.space, run.norm, cfg.r),
        "bound_ratio": getattr(best, "bound_ratio", None),
        "residual": getattr(best, "residual", None),
        "common_point": best.common_point,
        "certificate": cert.to_dict(),
    }
    if run.space == "banach":
        out["norm"] = str(run.norm)
        out["pairwise_witness"] = best.pairwise_witness
    if run.use_oracle:
        kind = {"euclid": oracle.EUCLID_SUM, "banach": oracle.BANACH_SUM, "hyper": oracle.HYPER_SUM}[run.space]
        opt = oracle.global_opt(cfg, kind, run.norm)
        gap = best.objective - opt.best_objective
        out["oracle"] = opt.to_dict()
        out["oracle"]["local_within_optimum"] = bool(gap >= -1e-9 if minimize else gap <= 1e-9)
    return out


def verify_partition(cfg: ColoredConfig, partition: TransversalPartition, run: RunConfig) -> dict:
    _check_space(cfg, run.space)
    rep = _report_for(cfg, run, partition)
    cert = _certify(cfg, run, rep)
    if run.space == "banach":
        # pairwise intersection is only guaranteed through the swap inequality
        parts = parts_of(cfg, partition)
        ineq = banach.swap_inequality(parts, run.norm)
        bad = [(i, j) for i in range(cfg.k) for j in range(i + 1, cfg.k) if ineq[i, j] < -run.tol]
        cert.checks["swap_inequality"] = not bad
        for i, j in bad:
            cert.violations.append({"check": "swap_inequality", "parts": [i, j], "value": float(ineq[i, j])})
    return {
        "space": run.space,
        "assignment": partition.assignment,
        "objective": rep.objective,
        "residual": getattr(rep, "residual", None),
        "bound_ratio": getattr(rep, "bound_ratio", None),
        "theoretical_bound": theoretical_bound(run.space, run.norm, cfg.r),
        "certificate": cert.to_dict(),
    }


def _sweep_trial(args: tuple) -> dict:
    space, norm_text, k, r, dim, trial, seed, tol = args
    norm = NormKind.parse(norm_text)
    inst_seed = int(np.random.SeedSequence([seed, k, r, trial]).generate_state(1)[0])
    if space == "hyper":
        cfg = constructions.gen_hyperbolic(k, r, dim, inst_seed)
    else:
        cfg = constructions.gen_gaussian(k, r, dim, inst_seed)
    run = RunConfig("solve", space=space, norm=norm, tol=tol, seed=inst_seed)
    rep = solve_instance(cfg, run)
    return {
        "k": k,
        "r": r,
        "trial": trial,
        "bound_ratio": rep["bound_ratio"],
        "residual": rep["residual"],
        "passed": rep["certificate"]["passed"],
        "swap_count": rep["swap_count"],
    }


def sweep(
    space: str,
    k_range: Sequence[int],
    r_range: Sequence[int],
    dim: int,
    trials: int,
    seed: int = 0,
    norm: Optional[NormKind] = None,
    tol: float = 1e-7,
    jobs: int = 1,
) -> dict:
    """Per-(k, r) worst bound ratio and residual over seeded random trials."""
    norm = norm or NormKind.l2()
    tasks = [(space, str(norm), k, r, dim, t, seed, tol) for k in k_range for r in r_range for t in range(trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_trial, tasks))
    else:
        rows = [_sweep_trial(t) for t in tasks]
    rows.sort(key=lambda row: (row["k"], row["r"], row["trial"]))
    groups = []
    for k in k_range:
        for r in r_range:
            sel = [row for row in rows if row["k"] == k and row["r"] == r]
            ratios = [row["bound_ratio"] for row in sel if row["bound_ratio"] is not None]
            residuals = [row["residual"] for row in sel if row["residual"] is not None]
            bound = theoretical_bound(space, norm, r)
            groups.append(
                {
                    "k": k,
                    "r": r,
                    "trials": len(sel),
                    "max_bound_ratio": max(ratios) if ratios else None,
                    "theoretical_bound": bound,
                    "max_residual": max(residuals) if residuals else None,
                    "all_passed": all(row["passed"] for row in sel),
                }
            )
    return {"space": space, "norm": str(norm), "dim": dim, "seed": seed, "groups": groups, "trials": rows}


def _sweep_csv(result: dict) -> str:
    buf = io.StringIO()
    fields = ["k", "r", "trials", "max_bound_ratio", "theoretical_bound", "max_residual", "all_passed"]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for g in result["groups"]:
        writer.writerow(g)
    return buf.getvalue()


def _parse_range(text: str) -> list[int]:
    """``"2-5"`` -> ``[2, 3, 4, 5]``; ``"2,4"`` -> ``[2, 4]``."""
    out: list[int] = []
    for chunk in text.split(","):
        if "-" in chunk:
            lo, hi = chunk.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(chunk))
    return out


def _norm_from_args(args) -> NormKind:
    if getattr(args, "p", None) is not None and args.command != "generate":
        return NormKind(args.p)
    return NormKind.parse(getattr(args, "norm", "l2"))


def _emit(report: dict, out: Optional[str], summary: str) -> None:
    report = dict(report)
    report["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    if out:
        write_json(out, report)
        print(summary)
    else:
        print(dumps(report))


def _solve_summary(rep: dict) -> str:
    cert = rep["certificate"]
    lines = [f"{cert['name']}: {'PASS' if cert['passed'] else 'FAIL'}", f"objective     {rep['objective']:.12g}"]
    if rep.get("residual") is not None:
        lines.append(f"residual      {rep['residual']:.6g}")
    if rep.get("bound_ratio") is not None:
        lines.append(f"bound ratio   {rep['bound_ratio']:.12g}")
    if rep.get("theoretical_bound") is not None:
        lines.append(f"theoretical   {rep['theoretical_bound']:.12g}")
    for v in cert["violations"]:
        lines.append(f"violation: {v}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tverberg", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, inp=True):
        p.add_argument("--space", choices=SPACES, default="euclid")
        p.add_argument("--norm", default="l2", help="l1, l2, linf, l<p> (banach space)")
        p.add_argument("--p", type=float, default=None, help="l_p exponent; overrides --norm")
        p.add_argument("--tol", type=float, default=1e-7)
        p.add_argument("--eps", type=float, default=None, help="swap acceptance threshold")
        p.add_argument("--seed", type=int, default=0)
        if inp:
            p.add_argument("--in", dest="input", required=True)
        p.add_argument("--out", default=None)

    g = sub.add_parser("generate", help="write an instance")
    g.add_argument("--kind", choices=constructions.KINDS, default=constructions.GAUSSIAN)
    g.add_argument("--k", type=int, default=3)
    g.add_argument("--r", type=int, default=2)
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--p", type=float, default=2.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=None)

    s = sub.add_parser("solve", help="run the swap search and certify the result")
    common(s)
    s.add_argument("--restarts", type=int, default=1)
    s.add_argument("--oracle", action="store_true", help="cross-check against exhaustive enumeration")

    v = sub.add_parser("verify", help="certify a given partition")
    common(v)
    v.add_argument("--partition", required=True, help="partition JSON or a solve report")

    d = sub.add_parser("demo", help="print a certificate for an extremal construction")
    d.add_argument("--kind", choices=(constructions.SPHERICAL_SQUARE, constructions.LINF_EMBEDDING,
                                      constructions.LP_ORTHOGONAL_SIMPLICES), default=constructions.SPHERICAL_SQUARE)
    d.add_argument("--k", type=int, default=2)
    d.add_argument("--r", type=int, default=2)
    d.add_argument("--out", default=None)

    w = sub.add_parser("sweep", help="bound ratios over random instances")
    common(w, inp=False)
    w.add_argument("--k-range", default="2-4")
    w.add_argument("--r-range", default="2-3")
    w.add_argument("--dim", type=int, default=3)
    w.add_argument("--trials", type=int, default=10)
    w.add_argument("--jobs", type=int, default=1)
    w.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


def _demo(args) -> tuple[dict, Certificate]:
    if args.kind == constructions.SPHERICAL_SQUARE:
        cert = constructions.spherical_square_demo()
        return {"kind": args.kind, "certificate": cert.to_dict()}, cert
    if args.kind == constructions.LINF_EMBEDDING:
        cfg = constructions.gen_linf_embedding(args.k, args.r)
        run = RunConfig("solve", space="banach", norm=NormKind.linf())
        rep = solve_instance(cfg, run)
        cert = Certificate("max-norm tightness")
        diam = rep["certificate"]["values"]["diameter"]
        cert.checks["diameter_is_2"] = diam == 2.0
        cert.checks["linf_certificate"] = rep["certificate"]["passed"]
        cert.values.update(diameter=diam, bound_ratio=rep["bound_ratio"], theoretical_bound=0.5)
        return {"kind": args.kind, "solve": rep, "certificate": cert.to_dict()}, cert
    cfg = constructions.gen_lp_orthogonal_simplices(args.k, args.r, 2.0)
    diam = inter_color_diameter(cfg)
    radii = [oracle.best_ball_radius(cfg, part) for part in oracle.enumerate_partitions(cfg, cap=10**4)]
    cert = Certificate("orthogonal simplices lower bound")
    ratio = min(radii) / diam
    cert.values.update(min_ratio=ratio, upper_bound=1 / math.sqrt(2 * args.r), lower_bound=2**-0.5 * args.r**-0.5)
    cert.checks["ratio_at_least_lower_bound"] = ratio >= cert.values["lower_bound"] - 1e-6
    return {"kind": args.kind, "certificate": cert.to_dict()}, cert


def run(args: argparse.Namespace) -> int:
    if args.command == "generate":
        spec = constructions.InstanceSpec(args.kind, args.k, args.r, args.dim, args.p, args.seed)
        cfg = spec.build()
        data = config_to_dict(cfg)
        if args.out:
            write_json(args.out, data)
            print(f"wrote {args.kind} instance k={cfg.k} r={cfg.r} dim={cfg.dim} to {args.out}")
        else:
            print(dumps(data))
        return EXIT_OK

    if args.command == "demo":
        report, cert = _demo(args)
        _emit(report, args.out, cert.summary())
        if not args.out:
            print(cert.summary(), file=sys.stderr)
        return EXIT_OK if cert.passed else EXIT_CERT

    norm = _norm_from_args(args)
    if args.command == "sweep":
        result = sweep(
            args.space, _parse_range(args.k_range), _parse_range(args.r_range), args.dim, args.trials,
            args.seed, norm, args.tol, args.jobs,
        )
        ok = all(g["all_passed"] for g in result["groups"])
        if args.format == "csv":
            text = _sweep_csv(result)
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
        else:
            lines = [
                f"k={g['k']} r={g['r']} max ratio={g['max_bound_ratio']} bound={g['theoretical_bound']} "
                f"max residual={g['max_residual']} {'PASS' if g['all_passed'] else 'FAIL'}"
                for g in result["groups"]
            ]
            _emit(result, args.out, "\n".join(lines))
        return EXIT_OK if ok else EXIT_CERT

    cfgrun = RunConfig(
        args.command, space=args.space, norm=norm, input=args.input, output=args.out,
        partition=getattr(args, "partition", None), tol=args.tol, eps=args.eps, seed=args.seed,
        restarts=getattr(args, "restarts", 1), use_oracle=getattr(args, "oracle", False),
    )
    cfg = load_config(cfgrun.input)
    if args.command == "solve":
        report = solve_instance(cfg, cfgrun)
    else:
        report = verify_partition(cfg, partition_from_dict(read_json(cfgrun.partition)), cfgrun)
    _emit(report, cfgrun.output, _solve_summary(report))
    passed = report["certificate"]["passed"] and report.get("oracle", {}).get("local_within_optimum", True)
    if not passed:
        for v in report["certificate"]["violations"]:
            print(f"violation: {v}", file=sys.stderr)
    return EXIT_OK if passed else EXIT_CERT


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return run(args)
    except ConvergenceError as exc:
        log.error("did not converge: %s", exc)
        return EXIT_CONVERGENCE
    except SearchLimitError as exc:
        log.error("%s", exc)
        return EXIT_CONVERGENCE
    except (ConfigError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
