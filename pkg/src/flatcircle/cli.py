"""Experiment driver.

Each subcommand runs the pipeline up to one analysis stage and writes
deterministic CSV/JSON artifacts into the output directory.  A manifest
keyed by the config hash lets later invocations reuse the tuned parameter
instead of re-running the bisection.

Exit codes: 0 ok, 2 config error, 3 precision exhausted, 4 structure
violation.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import json
import os
import sys
from fractions import Fraction

from .config import ExperimentConfig, load_config
from .errors import (ConfigError, FlatCircleError, PrecisionExhausted,
                     StructureViolation)
from .maps import FlatCircleMap, MapParams
from .partition import order_check, partition_rows, split_defect, \
    validate_structure
from .pipeline import PipelineResult, default_template, run_pipeline, tune_map
from .precision import PrecisionContext
from .recurrence import verify_matrix_bounds
from .reporting import fmt_decimal, svg_line_chart, write_csv, write_json
from .rotation import certify_bracket, final_bracket
from .scalings import scaling_rows
from .stats import log_decay_fit

_STAGES = ("partition", "scalings", "recurrence", "dimension")


def _tag(ell: str) -> str:
    return ell.replace(".", "_")


def _manifest_path(out_dir: str) -> str:
    return os.path.join(out_dir, "manifest.json")


def _read_manifest(out_dir: str) -> dict:
    try:
        with open(_manifest_path(out_dir)) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError):
        return {}


def _update_manifest(out_dir: str, cfg: ExperimentConfig, ell: str,
                     stage: str, files: list):
    man = _read_manifest(out_dir)
    if man.get("config_hash") != cfg.hash():
        man = {"config_hash": cfg.hash(), "runs": {}}
    runs = man.setdefault("runs", {})
    entry = runs.setdefault(ell, {"stages": [], "files": []})
    if stage not in entry["stages"]:
        entry["stages"].append(stage)
        entry["stages"].sort()
    for f in files:
        if f not in entry["files"]:
            entry["files"].append(f)
    entry["files"].sort()
    write_json(_manifest_path(out_dir), man)


def _cached_params(out_dir: str, cfg: ExperimentConfig, ell: str,
                   ctx: PrecisionContext) -> MapParams | None:
    man = _read_manifest(out_dir)
    if man.get("config_hash") != cfg.hash():
        return None
    path = os.path.join(out_dir, f"tuned_ell{_tag(ell)}.txt")
    try:
        with open(path) as fh:
            m = FlatCircleMap.from_text(fh.read())
    except (OSError, FlatCircleError, KeyError, ValueError):
        return None
    return m.params if m.ctx.bits == ctx.bits else None


def _write_tuned(out_dir: str, cfg: ExperimentConfig, ell: str,
                 params: MapParams, ctx: PrecisionContext) -> list:
    target = cfg.continued_fraction()
    lo, hi = final_bracket(target, cfg.depth)
    m = FlatCircleMap(params, ctx)
    tag = _tag(ell)
    txt = os.path.join(out_dir, f"tuned_ell{tag}.txt")
    with open(txt + ".tmp", "w") as fh:
        fh.write(m.to_text())
    os.replace(txt + ".tmp", txt)
    meta = os.path.join(out_dir, f"tune_ell{tag}.json")
    write_json(meta, {
        "ell": ell,
        "depth": cfg.depth,
        "rotation_lower": [lo.numerator, lo.denominator],
        "rotation_upper": [hi.numerator, hi.denominator],
        "certified": certify_bracket(m, lo, hi),
    })
    return [os.path.basename(txt), os.path.basename(meta)]


def _write_partition(out_dir: str, cfg: ExperimentConfig, ell: str,
                     res: PipelineResult) -> list:
    tag = _tag(ell)
    rows = []
    with res.ctx:
        running = res.flank_ratio_running_min()
        for n in sorted(res.partitions):
            part = res.partitions[n]
            ok = defect = ""
            if n + 1 in res.partitions:
                rep = validate_structure(part, res.partitions[n + 1],
                                         res.conv)
                ok = str(rep.ok)
                defect = fmt_decimal(split_defect(
                    part, res.partitions[n + 1], res.preims, res.conv))
            rows.append((n, len(part.long_gaps()), len(part.short_gaps()),
                         part.max_gap_length(), part.min_gap_length(),
                         running[n - 1], ok, defect))
    levels = os.path.join(out_dir, f"partition_ell{tag}.csv")
    write_csv(levels, ("n", "long_gaps", "short_gaps", "max_gap", "min_gap",
                       "flank_ratio_running_min", "refines_next", "split_defect"),
              rows)
    deepest = res.partitions[max(res.partitions)]
    detail = os.path.join(out_dir, f"partition_detail_ell{tag}.csv")
    with res.ctx:
        detail_rows = partition_rows(deepest, res.preims)
    write_csv(detail, ("index", "type", "left", "right", "length"),
              detail_rows)
    lo, _hi = final_bracket(res.target, cfg.depth)
    order = os.path.join(out_dir, f"order_ell{tag}.json")
    write_json(order, {"ell": ell, "points": len(res.orbit.points),
                       "order_preserved": order_check(res.orbit, lo)})
    return [os.path.basename(p) for p in (levels, detail, order)]


def _write_scalings(out_dir: str, ell: str, res: PipelineResult) -> list:
    path = os.path.join(out_dir, f"scalings_ell{_tag(ell)}.csv")
    write_csv(path, ("n", "a_n", "q_n", "tau", "alpha", "k", "sigma", "s",
                     "beta", "gamma"), scaling_rows(res.scalings))
    return [os.path.basename(path)]


def _write_recurrence(out_dir: str, ell: str, res: PipelineResult) -> list:
    rec = res.recurrence
    path = os.path.join(out_dir, f"recurrence_ell{_tag(ell)}.json")
    obj = {
        "ell": ell,
        "nu": {str(n): v for n, v in rec.nu.items()},
        "residuals": {str(n): v for n, v in rec.residuals.items()},
        "k1": rec.k1,
        "residual_variation": rec.residual_variation,
        "product_norm_fit": {"slope": rec.product_norm_fit.slope,
                             "r2": rec.product_norm_fit.r2},
        "implied_constants": {k: {str(n): v for n, v in d.items()}
                              for k, d in rec.implied_constants.items()},
    }
    if float(res.ell) >= 3:
        bounds = verify_matrix_bounds(res.ell)
        obj["matrix_bounds"] = {
            "rho_w": bounds.rho_w,
            "worst_u1u2": bounds.worst_u1u2,
            "worst_u2u2": bounds.worst_u2u2,
            "worst_chain_excess": bounds.worst_chain_excess,
            "norm_eps_drift": bounds.norm_eps_drift,
            "ok": bounds.ok,
        }
    write_json(path, obj)
    return [os.path.basename(path)]


def _write_dimension(out_dir: str, ell: str, res: PipelineResult) -> list:
    path = os.path.join(out_dir, f"dimension_ell{_tag(ell)}.json")
    obj = {"ell": ell, "tree_depth": res.tree.depth()}
    if res.frostman is not None:
        fr = res.frostman
        obj["frostman"] = {
            "lambda1_fit": fr.lambda1_fit, "lambda2_fit": fr.lambda2_fit,
            "lambda1_envelope": fr.lambda1_envelope, "alpha": fr.alpha,
            "max_mass_ratio": fr.max_mass_ratio,
            "covering_constant": fr.covering_constant,
            "levels_used": fr.levels_used, "ok": fr.ok,
        }
    obj["box"] = {
        "estimate": res.box.estimate,
        "r2": res.box.fit.r2,
        "confidence_band": res.box.confidence_band,
        "counts": [[d, n] for d, n in res.box.counts],
    }
    write_json(path, obj)
    return [os.path.basename(path)]


def _regime_verdict(res: PipelineResult) -> dict:
    series = res.scalings
    ns = list(series.ns())
    taus = [float(series.tau[n]) for n in ns]
    alphas = [float(series.alpha[n]) for n in ns]
    tau_fit = log_decay_fit(taus, ns)
    alpha_fit = log_decay_fit(alphas, ns)
    half = len(taus) // 2
    bounded = min(taus[half:]) >= 0.5 * min(taus[:half]) and min(taus) > 0
    return {
        "tau_slope": tau_fit.slope, "tau_r2": tau_fit.r2,
        "alpha_slope": alpha_fit.slope, "alpha_r2": alpha_fit.r2,
        "tau_decays": tau_fit.slope < -0.1 and tau_fit.r2 > 0.9,
        "tau_bounded_away": bounded,
        "regime": "degenerate" if tau_fit.slope < -0.1 and tau_fit.r2 > 0.9
                  else "nondegenerate",
    }


def _run_ell(cfg: ExperimentConfig, ell: str, stages: tuple) -> dict:
    """Run one ell through the requested stages; returns the summary."""
    ctx = PrecisionContext(bits=cfg.precision)
    target = cfg.continued_fraction()
    template = default_template(ell, ctx, a=cfg.a, b=cfg.b, c=cfg.c)
    params = _cached_params(cfg.out_dir, cfg, ell, ctx)
    fresh = params is None
    if fresh:
        params = tune_map(template, target, cfg.depth, ctx)
    res = run_pipeline(template, target, cfg.n_max, ctx, depth=cfg.depth,
                       stages=stages, tuned=params)
    files = _write_tuned(cfg.out_dir, cfg, ell, params, ctx)
    _update_manifest(cfg.out_dir, cfg, ell, "tune", files)
    summary = {"ell": ell, "c": fmt_decimal(params.c)}
    if "partition" in stages:
        files = _write_partition(cfg.out_dir, cfg, ell, res)
        _update_manifest(cfg.out_dir, cfg, ell, "partition", files)
        with ctx:
            summary["max_gap_deepest"] = \
                res.partitions[cfg.n_max].max_gap_length()
    if "scalings" in stages:
        files = _write_scalings(cfg.out_dir, ell, res)
        _update_manifest(cfg.out_dir, cfg, ell, "scalings", files)
        summary["regime_verdict"] = _regime_verdict(res)
    if "recurrence" in stages:
        files = _write_recurrence(cfg.out_dir, ell, res)
        _update_manifest(cfg.out_dir, cfg, ell, "recurrence", files)
        summary["k1"] = res.recurrence.k1
        summary["residual_variation"] = res.recurrence.residual_variation
    if "dimension" in stages:
        files = _write_dimension(cfg.out_dir, ell, res)
        _update_manifest(cfg.out_dir, cfg, ell, "dimension", files)
        summary["box_dimension"] = res.box.estimate
        if res.frostman is not None:
            summary["frostman_alpha"] = res.frostman.alpha
    return summary


def _run_stages(cfg: ExperimentConfig, stages: tuple, jobs: int) -> dict:
    os.makedirs(cfg.out_dir, exist_ok=True)
    summaries = {}
    if jobs > 1 and len(cfg.ells) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as ex:
            futs = {e: ex.submit(_run_ell, cfg, e, stages) for e in cfg.ells}
            for e, fut in futs.items():
                summaries[e] = fut.result()
    else:
        for e in cfg.ells:
            summaries[e] = _run_ell(cfg, e, stages)
    return summaries


# ---------------------------------------------------------------------------
# subcommands

def cmd_stage(cfg: ExperimentConfig, args) -> int:
    upto = _STAGES.index(args.command) + 1 if args.command in _STAGES else 0
    stages = _STAGES[:upto]
    _run_stages(cfg, stages, args.jobs)
    return 0


def cmd_run_all(cfg: ExperimentConfig, args) -> int:
    summaries = _run_stages(cfg, _STAGES, args.jobs)
    write_json(os.path.join(cfg.out_dir, "summary.json"),
               {"config_hash": cfg.hash(), "target": cfg.target,
                "n_max": cfg.n_max, "depth": cfg.depth,
                "precision": cfg.precision, "ells": summaries})
    return 0


def _read_csv_column(path: str, name: str) -> list:
    import csv
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    return [float(r[name]) for r in rows]


def cmd_plot(cfg: ExperimentConfig, args) -> int:
    man = _read_manifest(cfg.out_dir)
    if man.get("config_hash") != cfg.hash():
        raise ConfigError("no outputs for this config; run 'run-all' first")
    kinds = (args.kind,) if args.kind else ("tau", "gaps", "boxcount")
    for kind in kinds:
        series = {}
        for e in cfg.ells:
            tag = _tag(e)
            if kind == "tau":
                path = os.path.join(cfg.out_dir, f"scalings_ell{tag}.csv")
                ns = _read_csv_column(path, "n")
                ys = _read_csv_column(path, "tau")
                series[f"ell={e}"] = list(zip(ns, ys))
            elif kind == "gaps":
                path = os.path.join(cfg.out_dir, f"partition_ell{tag}.csv")
                ns = _read_csv_column(path, "n")
                import math
                ys = [math.log(v) for v in
                      _read_csv_column(path, "max_gap")]
                series[f"ell={e}"] = list(zip(ns, ys))
            elif kind == "boxcount":
                path = os.path.join(cfg.out_dir, f"dimension_ell{tag}.json")
                import math
                with open(path) as fh:
                    counts = json.load(fh)["box"]["counts"]
                series[f"ell={e}"] = [(math.log(1 / d), math.log(n))
                                      for d, n in counts]
            else:
                raise ConfigError(f"unknown plot kind {kind!r}")
        titles = {"tau": ("flat-gap scaling ratio", "n", "tau_n"),
                  "gaps": ("largest gap per level", "n", "log max gap"),
                  "boxcount": ("box counts", "log 1/delta", "log N(delta)")}
        title, xl, yl = titles[kind]
        svg_line_chart(os.path.join(cfg.out_dir, f"plot_{kind}.svg"),
                       series, title, xl, yl)
    return 0


def cmd_report(cfg: ExperimentConfig, args) -> int:
    path = os.path.join(cfg.out_dir, "summary.json")
    try:
        with open(path) as fh:
            summary = json.load(fh)
    except OSError:
        raise ConfigError("summary.json missing; run 'run-all' first") \
            from None
    lines = [f"target: {summary['target']}   n_max: {summary['n_max']}   "
             f"depth: {summary['depth']}   precision: "
             f"{summary['precision']} bits", ""]
    for e, s in sorted(summary["ells"].items(), key=lambda kv: float(kv[0])):
        lines.append(f"ell = {e}")
        lines.append(f"  tuned c = {s['c']}")
        t1 = s.get("regime_verdict")
        if t1:
            lines.append(f"  regime: {t1['regime']} "
                         f"(tau slope {t1['tau_slope']:.4f}, "
                         f"r2 {t1['tau_r2']:.4f})")
        if "k1" in s:
            lines.append(f"  recurrence K1 = {_dec(s['k1'])}, "
                         f"residual variation "
                         f"{s['residual_variation']:.4f}")
        if "box_dimension" in s:
            lines.append(f"  box dimension = {s['box_dimension']:.4f}")
        if "frostman_alpha" in s:
            lines.append(f"  frostman exponent alpha = "
                         f"{s['frostman_alpha']:.4f}")
        lines.append("")
    text = "\n".join(lines)
    with open(os.path.join(cfg.out_dir, "report.txt"), "w") as fh:
        fh.write(text + "\n")
    print(text)
    return 0


def _dec(v):
    return v["dec"] if isinstance(v, dict) else v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flatcircle",
        description="numerical experiments for circle maps with a flat spot")
    parser.add_argument("--config", metavar="PATH",
                        help="INI config file ([map]/[run]/[output])")
    parser.add_argument("--precision", type=int, metavar="BITS")
    parser.add_argument("--depth", type=int, metavar="N",
                        help="tuning depth (continued-fraction stages)")
    parser.add_argument("--out", metavar="DIR", help="output directory")
    parser.add_argument("--jobs", type=int, default=1, metavar="K",
                        help="parallel workers over ell values")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("tune", cmd_stage), ("partition", cmd_stage),
                     ("scalings", cmd_stage), ("recurrence", cmd_stage),
                     ("dimension", cmd_stage), ("run-all", cmd_run_all),
                     ("report", cmd_report)):
        p = sub.add_parser(name)
        p.set_defaults(func=fn)
    p = sub.add_parser("plot")
    p.add_argument("--kind", choices=("tau", "gaps", "boxcount"))
    p.set_defaults(func=cmd_plot)
    return parser


def _resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    updates = {}
    if args.precision is not None:
        updates["precision"] = args.precision
    if args.depth is not None:
        updates["depth"] = args.depth
    if args.out is not None:
        updates["out_dir"] = args.out
    if updates:
        cfg = dataclasses.replace(cfg, **updates)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
        return args.func(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PrecisionExhausted as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return 3
    except StructureViolation as exc:
        print(f"structure violation: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
