"""Command-line front end.

Subcommands:

  analytic   evaluate the scenario's formula selectors and report
             occupancy, loss, mean level, and mean time in system
  simulate   run the configured system and report estimates with
             batch-means confidence intervals
  compare    run the system and check every analytic value against the
             simulation's confidence intervals (PASS/FAIL per level)
  couple     run the capped system and its uncapped companion on one
             input stream and verify the cap identity event by event
  table1     recompute the reference loss-probability table and flag
             inconsistent cells

Exit status: 0 on success, 1 when a comparison check fails or the
coupling identity is violated, 2 for configuration or usage errors.
With `--out <dir>`, each command writes machine-readable CSV/JSON and
rendered figures beside the human-readable report on standard output.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np
from scipy import stats as sstats

from . import plots
from . import table1 as t1
from .config import ConfigError, Scenario, evaluate_selector, load_scenario
from .randomness import DEFAULT_SEED
from .simulate import (
    MIN_IDLE_SAMPLES,
    CouplingViolation,
    SimEstimates,
    compare_idle_periods,
    run,
    run_coupled,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpsloss",
        description="Loss systems under limited processor sharing: "
                    "closed forms, simulation, and cross-checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, trace=True, replications=True, warmup=True):
        p.add_argument("--config", metavar="<path>", required=True,
                       help="scenario JSON document")
        p.add_argument("--seed", metavar="<u64>", type=int,
                       help="override the scenario seed")
        p.add_argument("--horizon", metavar="<arrivals>", type=int,
                       help="override the scenario horizon")
        if warmup:
            p.add_argument("--warmup", metavar="<arrivals>", type=int,
                           help="override the warm-up arrival count")
        if replications:
            p.add_argument("--replications", metavar="<k>", type=int,
                           help="independent replications (stream indices 0..k-1)")
        p.add_argument("--out", metavar="<dir>",
                       help="directory for CSV/JSON artifacts and figures")
        if trace:
            p.add_argument("--trace", action="store_true",
                           help="emit one record per event")

    p = sub.add_parser("analytic", help="evaluate closed forms")
    p.add_argument("--config", metavar="<path>", required=True)
    p.add_argument("--out", metavar="<dir>")

    add_common(sub.add_parser("simulate", help="simulate and estimate"))
    add_common(sub.add_parser("compare",
                              help="check closed forms against simulation"))
    add_common(sub.add_parser("couple",
                              help="verify the capped/uncapped identity"),
               trace=False, replications=False, warmup=False)

    p = sub.add_parser("table1", help="recompute the reference table")
    p.add_argument("--out", metavar="<dir>")
    return parser


# ---------------------------------------------------------------------------
# shared helpers


def _resolve_run_params(scenario: Scenario, args, need_horizon=True,
                        use_warmup=True):
    horizon = getattr(args, "horizon", None)
    if horizon is None:
        horizon = scenario.horizon
    if horizon is not None and horizon < 1:
        raise ConfigError("horizon must be a positive arrival count",
                          args.config, "horizon")
    if need_horizon and horizon is None:
        raise ConfigError("no horizon given: set 'horizon' in the scenario "
                          "or pass --horizon", args.config)
    warmup = None
    if use_warmup:
        warmup = getattr(args, "warmup", None)
        if warmup is None:
            warmup = scenario.warmup
        if warmup is not None and warmup < 0:
            raise ConfigError("warmup must be nonnegative", args.config,
                              "warmup")
        if warmup is not None and horizon is not None and warmup >= horizon:
            raise ConfigError(f"warmup {warmup} must stay below the horizon "
                              f"{horizon}", args.config, "warmup")
    seed = getattr(args, "seed", None)
    if seed is None:
        seed = scenario.seed
    if seed is None:
        seed = DEFAULT_SEED
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must fit in 64 bits", args.config, "seed")
    reps = getattr(args, "replications", None)
    if reps is None:
        reps = scenario.replications
    if reps < 1:
        raise ConfigError("replications must be at least 1", args.config,
                          "replications")
    return horizon, warmup, seed, reps


def _describe_spec(spec) -> str:
    rates = spec.rates
    rate_s = (f"constant {rates.at(0):g}" if rates.is_constant
              else "per level " + "/".join(f"{r:g}" for r in rates.rates))
    return (f"n={spec.n}, arrivals {rate_s}, per-job rates "
            + "/".join(f"{c:g}" for c in spec.profile.c)
            + f", lengths {spec.length_law!r}, {spec.discipline.value},"
              f" {spec.variant.value}")


def _out_dir(args) -> Path | None:
    out = getattr(args, "out", None)
    if out is None:
        return None
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _merge_estimates(ests: list[SimEstimates]):
    """Across-replication means; CIs across replications when there are
    at least two, else the single run's batch-means CIs."""
    k = len(ests)
    occ = np.array([e.occupancy for e in ests])
    losses = np.array([e.loss_prob for e in ests])
    sojourns = np.array([e.sojourn_all for e in ests])
    if k >= 2:
        q = float(sstats.t.ppf(0.975, k - 1))
        occ_ci = q * occ.std(axis=0, ddof=1) / math.sqrt(k)
        loss_ci = q * float(losses.std(ddof=1)) / math.sqrt(k)
    else:
        occ_ci = np.array(ests[0].occupancy_ci_half)
        loss_ci = ests[0].loss_ci_half
    return {
        "replications": k,
        "occupancy": tuple(map(float, occ.mean(axis=0))),
        "occupancy_ci_half": tuple(map(float, occ_ci)),
        "loss": float(losses.mean()),
        "loss_ci_half": float(loss_ci),
        "sojourn_all": float(sojourns.mean()),
    }


def _fmt_probs(probs) -> str:
    return "  ".join(f"p{i}={p:.6f}" for i, p in enumerate(probs))


def _write_trace(traces: list[list[str]], out: Path | None) -> None:
    if out is not None:
        for i, tr in enumerate(traces):
            (out / f"trace_rep{i}.txt").write_text("\n".join(tr) + "\n")
    else:
        for i, tr in enumerate(traces):
            print(f"# trace, replication {i}")
            for line in tr:
                print(line)


def _run_replications(spec, horizon, warmup, seed, reps, want_trace):
    ests, traces = [], []
    for i in range(reps):
        tr = [] if want_trace else None
        ests.append(run(spec, horizon, warmup=warmup, seed=seed, stream=i,
                        trace=tr))
        if want_trace:
            traces.append(tr)
    return ests, traces


# ---------------------------------------------------------------------------
# subcommands


def cmd_analytic(args) -> int:
    scenario = load_scenario(args.config)
    if not scenario.formulas:
        raise ConfigError("no formulas selected: add a 'formulas' list",
                          args.config, "formulas")
    out = _out_dir(args)
    results = [evaluate_selector(sel, scenario.spec) for sel in scenario.formulas]

    print(f"scenario: {scenario.name}")
    print(f"system:   {_describe_spec(scenario.spec)}")
    for r in results:
        print(f"\n[{r.selector}]")
        print(f"  occupancy:  {_fmt_probs(r.dist.p)}")
        print(f"  loss:       {r.loss:.6f}")
        print(f"  mean level: {r.mean_level:.6f}")
        if r.sojourn is None:
            print("  mean time in system: undefined (no arrivals)")
        else:
            print(f"  mean time in system: {r.sojourn:.6f}")

    if out is not None:
        lines = ["selector,level,probability"]
        for r in results:
            lines += [f"{r.selector},{i},{p!r}" for i, p in enumerate(r.dist.p)]
        (out / "analytic.csv").write_text("\n".join(lines) + "\n")
        payload = {
            "scenario": scenario.name,
            "results": {
                r.selector: {
                    "occupancy": list(r.dist.p),
                    "loss": r.loss,
                    "mean_level": r.mean_level,
                    "sojourn": r.sojourn,
                }
                for r in results
            },
        }
        (out / "analytic.json").write_text(json.dumps(payload, indent=2) + "\n")
        plots.save_occupancy_plot({r.selector: r.dist.p for r in results},
                                  None, out / "analytic_occupancy.png")
        print(f"\nartifacts written to {out}")
    return 0


def cmd_simulate(args) -> int:
    scenario = load_scenario(args.config)
    horizon, warmup, seed, reps = _resolve_run_params(scenario, args)
    out = _out_dir(args)
    ests, traces = _run_replications(scenario.spec, horizon, warmup, seed,
                                     reps, args.trace)
    merged = _merge_estimates(ests)

    print(f"scenario: {scenario.name}")
    print(f"system:   {_describe_spec(scenario.spec)}")
    print(f"run:      horizon {horizon} arrivals, seed {seed}, "
          f"{reps} replication(s)")
    for i, e in enumerate(ests):
        print(f"\nreplication {i} (stream {i}):")
        print(f"  occupancy:  {_fmt_probs(e.occupancy)}")
        print(f"  arrivals seen at levels: {_fmt_probs(e.seen)}")
        print(f"  loss:       {e.loss_prob:.6f} +- {e.loss_ci_half:.6f}")
        print(f"  sojourn:    served {e.sojourn_served:.6f}, "
              f"all arrivals {e.sojourn_all:.6f}")
        print(f"  counts:     {e.counts}")
        print(f"  idle periods collected: {len(e.idle_periods)}")
    if reps > 1:
        print("\nacross replications:")
        print(f"  occupancy:  {_fmt_probs(merged['occupancy'])}")
        print(f"  loss:       {merged['loss']:.6f} +- {merged['loss_ci_half']:.6f}")
        print(f"  sojourn (all arrivals): {merged['sojourn_all']:.6f}")

    if args.trace:
        _write_trace(traces, out)
    if out is not None:
        lines = ["rep,level,occupancy,ci_half,seen"]
        for i, e in enumerate(ests):
            lines += [
                f"{i},{lvl},{occ!r},{ci!r},{seen!r}"
                for lvl, (occ, ci, seen)
                in enumerate(zip(e.occupancy, e.occupancy_ci_half, e.seen))
            ]
        (out / "simulate_occupancy.csv").write_text("\n".join(lines) + "\n")
        payload = {
            "scenario": scenario.name,
            "horizon": horizon,
            "seed": seed,
            "replications": [
                {
                    "occupancy": list(e.occupancy),
                    "occupancy_ci_half": list(e.occupancy_ci_half),
                    "seen": list(e.seen),
                    "loss": e.loss_prob,
                    "loss_ci_half": e.loss_ci_half,
                    "sojourn_served": e.sojourn_served,
                    "sojourn_displaced": e.sojourn_displaced,
                    "sojourn_all": e.sojourn_all,
                    "counts": e.counts,
                    "totals": e.totals,
                    "idle_samples": len(e.idle_periods),
                }
                for e in ests
            ],
            "merged": merged,
        }
        (out / "simulate_summary.json").write_text(
            json.dumps(payload, indent=2, allow_nan=True) + "\n")
        if reps == 1:
            plots.save_occupancy_plot({}, ests[0],
                                      out / "occupancy_simulated.png")
        else:
            plots.save_occupancy_plot(
                {f"replication {i}": e.occupancy for i, e in enumerate(ests)},
                None, out / "occupancy_simulated.png")
        print(f"\nartifacts written to {out}")
    return 0


def _check_levels(analytic_p, merged) -> list[dict]:
    rows = []
    for lvl, p in enumerate(analytic_p):
        p_hat = merged["occupancy"][lvl]
        ci = merged["occupancy_ci_half"][lvl]
        tol = ci if math.isfinite(ci) else 0.0
        dev = abs(p_hat - p)
        rows.append({
            "level": lvl, "analytic": p, "simulated": p_hat,
            "ci_half": ci, "abs_dev": dev,
            "pass": bool(dev <= tol + 1e-12),
        })
    return rows


def _idle_comparison(spec, ests, reps):
    """Idle-period test when it is meaningful: constant positive rate
    and two replications with enough samples."""
    lam = spec.rates.at(0) if spec.rates.is_constant else None
    if lam is None or lam <= 0:
        return None, "skipped: state-dependent or zero arrival rate"
    if reps < 2:
        return None, "skipped: needs at least 2 replications"
    a, b = ests[0].idle_periods, ests[1].idle_periods
    if min(len(a), len(b)) < MIN_IDLE_SAMPLES:
        return None, (f"skipped: {len(a)}/{len(b)} samples, "
                      f"need {MIN_IDLE_SAMPLES} each")
    return compare_idle_periods(a, b, lam=lam), None


def cmd_compare(args) -> int:
    scenario = load_scenario(args.config)
    if not scenario.formulas:
        raise ConfigError("nothing to compare: add a 'formulas' list",
                          args.config, "formulas")
    horizon, warmup, seed, reps = _resolve_run_params(scenario, args)
    out = _out_dir(args)
    ests, traces = _run_replications(scenario.spec, horizon, warmup, seed,
                                     reps, args.trace)
    merged = _merge_estimates(ests)
    results = [evaluate_selector(sel, scenario.spec) for sel in scenario.formulas]

    print(f"scenario: {scenario.name}")
    print(f"system:   {_describe_spec(scenario.spec)}")
    print(f"run:      horizon {horizon} arrivals, seed {seed}, "
          f"{reps} replication(s)")

    failed = False
    report = {}
    for r in results:
        rows = _check_levels(r.dist.p, merged)
        loss_ci = merged["loss_ci_half"]
        loss_tol = loss_ci if math.isfinite(loss_ci) else 0.0
        loss_dev = abs(merged["loss"] - r.loss)
        loss_pass = bool(loss_dev <= loss_tol + 1e-12)
        ok = loss_pass and all(row["pass"] for row in rows)
        failed = failed or not ok

        print(f"\n[{r.selector}] {'PASS' if ok else 'FAIL'}")
        for row in rows:
            print(f"  level {row['level']}: analytic {row['analytic']:.6f}  "
                  f"simulated {row['simulated']:.6f} +- {row['ci_half']:.6f}  "
                  f"{'PASS' if row['pass'] else 'FAIL'}")
        print(f"  loss: analytic {r.loss:.6f}  simulated {merged['loss']:.6f} "
              f"+- {loss_ci:.6f}  {'PASS' if loss_pass else 'FAIL'}")
        if r.sojourn is not None:
            print(f"  mean time in system: analytic {r.sojourn:.6f}  "
                  f"simulated {merged['sojourn_all']:.6f}")
        report[r.selector] = {
            "levels": rows,
            "loss": {"analytic": r.loss, "simulated": merged["loss"],
                     "ci_half": loss_ci, "pass": loss_pass},
            "sojourn": {"analytic": r.sojourn,
                        "simulated": merged["sojourn_all"]},
            "pass": ok,
        }

    idle_res, idle_note = _idle_comparison(scenario.spec, ests, reps)
    if idle_res is None:
        print(f"\nidle-period test: {idle_note}")
        idle_payload = {"performed": False, "note": idle_note}
    else:
        ok = idle_res.passed and all(okk for _, _, okk in idle_res.reference)
        failed = failed or not ok
        print(f"\nidle-period test: {'PASS' if ok else 'FAIL'} "
              f"(two-sample p={idle_res.p_value:.4f}; reference p="
              + ", ".join(f"{p:.4f}" for _, p, _ in idle_res.reference) + ")")
        idle_payload = {
            "performed": True,
            "two_sample": {"statistic": idle_res.statistic,
                           "p_value": idle_res.p_value,
                           "pass": idle_res.passed},
            "reference": [
                {"statistic": s, "p_value": p, "pass": okk}
                for s, p, okk in idle_res.reference
            ],
            "pass": ok,
        }

    verdict = "FAIL" if failed else "PASS"
    print(f"\nverdict: {verdict}")

    if args.trace:
        _write_trace(traces, out)
    if out is not None:
        lines = ["selector,level,analytic,simulated,ci_half,abs_dev,pass"]
        for sel, block in report.items():
            lines += [
                f"{sel},{row['level']},{row['analytic']!r},"
                f"{row['simulated']!r},{row['ci_half']!r},{row['abs_dev']!r},"
                f"{int(row['pass'])}"
                for row in block["levels"]
            ]
        (out / "compare.csv").write_text("\n".join(lines) + "\n")
        payload = {
            "scenario": scenario.name,
            "horizon": horizon,
            "seed": seed,
            "replications": reps,
            "selectors": report,
            "idle": idle_payload,
            "verdict": verdict,
        }
        (out / "compare.json").write_text(
            json.dumps(payload, indent=2, allow_nan=True) + "\n")
        est0 = dataclasses.replace(
            ests[0],
            occupancy=merged["occupancy"],
            occupancy_ci_half=merged["occupancy_ci_half"],
        )
        plots.save_occupancy_plot({r.selector: r.dist.p for r in results},
                                  est0, out / "occupancy_compare.png")
        if len(ests[0].idle_periods):
            lam = (scenario.spec.rates.at(0)
                   if scenario.spec.rates.is_constant else None)
            plots.save_idle_plot(ests[0].idle_periods, lam,
                                 out / "idle_periods.png")
        print(f"artifacts written to {out}")
    return 1 if failed else 0


def cmd_couple(args) -> int:
    scenario = load_scenario(args.config)
    horizon, _, seed, _ = _resolve_run_params(scenario, args, use_warmup=False)
    out = _out_dir(args)
    print(f"scenario: {scenario.name}")
    print(f"system:   {_describe_spec(scenario.spec)}")
    print(f"run:      {horizon} events, seed {seed}")
    try:
        report = run_coupled(scenario.spec, horizon, seed=seed)
    except ValueError as e:
        raise ConfigError(str(e), args.config) from e
    except CouplingViolation as e:
        print(f"\nverdict: VIOLATION at t={e.time!r}")
        print(e)
        print("recent events:")
        for line in e.trace:
            print(f"  {line}")
        return 1

    print(f"\nevents: {report.events} ({report.arrivals} arrivals, "
          f"{report.completions} completions), duration {report.duration:.3f}")
    print(f"uncapped level reached {report.max_uncapped_level} "
          f"(cap n={report.n}); checks: {report.checks}")
    print("\ntime-average occupancy (uncapped folded at n):")
    for lvl, (a, b) in enumerate(zip(report.occupancy_capped,
                                     report.occupancy_uncapped)):
        print(f"  level {lvl}: capped {a:.6f}  uncapped {b:.6f}")
    print(f"\nverdict: OK ({report.violations} violations in "
          f"{report.checks} checks)")

    if out is not None:
        lines = ["level,capped,uncapped"]
        lines += [f"{lvl},{a!r},{b!r}"
                  for lvl, (a, b) in enumerate(zip(report.occupancy_capped,
                                                   report.occupancy_uncapped))]
        (out / "couple.csv").write_text("\n".join(lines) + "\n")
        payload = {
            "scenario": scenario.name,
            "events": report.events,
            "arrivals": report.arrivals,
            "completions": report.completions,
            "duration": report.duration,
            "max_uncapped_level": report.max_uncapped_level,
            "checks": report.checks,
            "violations": report.violations,
            "occupancy_capped": list(report.occupancy_capped),
            "occupancy_uncapped": list(report.occupancy_uncapped),
            "verdict": "OK",
        }
        (out / "couple.json").write_text(json.dumps(payload, indent=2) + "\n")
        plots.save_coupling_plot(report, out / "occupancy_coupled.png")
        print(f"artifacts written to {out}")
    return 0


def cmd_table1(args) -> int:
    out = _out_dir(args)
    rows = t1.build_table()
    sweep = t1.build_sweep()
    print(t1.render_text(rows, sweep))
    if out is not None:
        (out / "table1.csv").write_text("\n".join(t1.csv_lines(rows)) + "\n")
        (out / "table1.txt").write_text(t1.render_text(rows, sweep))
        plots.save_table_deviation_plot(list(rows),
                                        out / "table1_deviations.png")
        print(f"artifacts written to {out}")
    return 0


_COMMANDS = {
    "analytic": cmd_analytic,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "couple": cmd_couple,
    "table1": cmd_table1,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
