"""Command-line front end.

Subcommands::

    optimize   load or generate a scenario, run the optimizer, write a
               self-contained result record and print a summary
    simulate   reconstruct the pipeline for a decision (from a result file
               or freshly optimized), export trace/Gantt files
    sweep      grid of (variable value, seed, scheme) cells -> CSV table

Exit codes: 0 success, 2 input error, 3 infeasible problem.  Every command
is deterministic for fixed flags and seeds.
"""

from __future__ import annotations

import argparse
import statistics
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import yaml

from .baselines import (SCHEMES, latency_epsl, latency_psl, latency_sl,
                        report_c2p2sl)
from .errors import (InfeasibleDecisionError, InfeasibleProblemError,
                     ScenarioFormatError, ScenarioValidationError)
from .link_model import link_rates
from .optimizer import SolverTolerances, default_decision, run_ao
from .scenario import (Scenario, load_scenario, random_scenario,
                       scenario_to_dict)
from .schedule_sim import export_gantt, export_trace_table, simulate
from .timing import Decision, check_constraints, evaluate

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3


def _add_scenario_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", metavar="PATH", help="scenario file (YAML)")
    parser.add_argument("--seed", type=int, help="generator seed (with --ues)")
    parser.add_argument("--ues", type=int, default=8,
                        help="number of UEs for the generator (default 8)")


def _resolve_scenario(args) -> Scenario:
    if args.scenario is not None:
        return load_scenario(args.scenario)
    if args.seed is None:
        raise ScenarioValidationError("scenario", "provide --scenario PATH or --seed N")
    return random_scenario(args.ues, args.seed)


def _fmt(value: float) -> str:
    return f"{value:.9g}"


def _decision_dict(decision: Decision) -> dict:
    return {
        "cut_layer": decision.cut_layer,
        "micro_batches": decision.micro_batches,
        "batch_split": list(decision.batch_split),
        "slot_alloc": [float(t) for t in decision.slot_alloc],
    }


def _decision_from_dict(doc: dict) -> Decision:
    try:
        return Decision(
            cut_layer=int(doc["cut_layer"]),
            micro_batches=int(doc["micro_batches"]),
            batch_split=tuple(int(v) for v in doc["batch_split"]),
            slot_alloc=tuple(float(v) for v in doc["slot_alloc"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioFormatError(f"bad decision record: {exc}", "decision") from exc


def cmd_optimize(args) -> int:
    scenario = _resolve_scenario(args)
    tolerances = SolverTolerances(ao_epsilon=args.epsilon)
    state = run_ao(scenario, tolerances)
    rates = link_rates(scenario)
    timing = evaluate(scenario, state.decision, rates)
    report = check_constraints(scenario, state.decision, rates)

    print(f"scenario: {scenario.num_ues} UEs, batch {scenario.total_batch}, "
          f"bandwidth {_fmt(scenario.channel.bandwidth)} Hz")
    print(f"decision: cut_layer={state.decision.cut_layer} "
          f"micro_batches={state.decision.micro_batches}")
    print(f"  batch_split: {list(state.decision.batch_split)}")
    print(f"  slot_alloc:  [{', '.join(_fmt(t) for t in state.decision.slot_alloc)}] s")
    print(f"bubble_rate: {_fmt(state.bubble_rate)}")
    print(f"idle: {_fmt(timing.idle)} s  work: {_fmt(timing.work)} s  "
          f"per-batch: {_fmt(timing.idle + timing.work)} s")
    print(f"iterations: {state.iteration}")
    print("constraints:")
    print(report.summary())

    if args.out:
        record = {
            "scenario": scenario_to_dict(scenario),
            "decision": _decision_dict(state.decision),
            "bubble_rate": state.bubble_rate,
            "timing": {
                "idle": timing.idle,
                "work": timing.work,
                "per_batch_latency": timing.idle + timing.work,
            },
            "constraints": [
                {"name": c.name, "passed": bool(c.passed), "slack": float(c.slack)}
                for c in report.checks
            ],
            "history": [[m, br] for m, br in state.history],
        }
        Path(args.out).write_text(yaml.safe_dump(record, sort_keys=True))
        print(f"result written to {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    scenario = _resolve_scenario(args)
    rates = link_rates(scenario)
    if args.decision:
        doc = yaml.safe_load(Path(args.decision).read_text())
        if not isinstance(doc, dict):
            raise ScenarioFormatError("decision file must be a mapping", "decision")
        decision = _decision_from_dict(doc.get("decision", doc))
    else:
        decision = run_ao(scenario).decision

    report = check_constraints(scenario, decision, rates)
    if not report.all_passed:
        failed = ", ".join(c.name for c in report.failed())
        if not args.force:
            print(f"decision infeasible ({failed}); rerun with --force to simulate anyway",
                  file=sys.stderr)
            print(report.summary(), file=sys.stderr)
            return EXIT_INFEASIBLE
        print(f"warning: simulating an infeasible decision (violated: {failed})")

    timing = evaluate(scenario, decision, rates)
    trace = simulate(scenario, decision, rates, timing)
    analytic = timing.idle + timing.work
    print(f"makespan: {_fmt(trace.makespan)} s")
    print(f"bs_idle:  {_fmt(trace.bs_idle)} s")
    print(f"analytic idle+work: {_fmt(analytic)} s")
    if trace.makespan > analytic * (1.0 + 1e-9):
        print("warning: pipeline stalls beyond the analytic model "
              "(feed constraints violated)")
    if args.trace:
        export_trace_table(trace, args.trace)
        print(f"trace written to {args.trace}")
    if args.gantt:
        export_gantt(trace, args.gantt)
        print(f"gantt written to {args.gantt}")
    return EXIT_OK


@dataclass(frozen=True)
class SweepSpec:
    variable: str                 # "ue_count" | "bandwidth"
    values: tuple
    seeds: tuple[int, ...]
    schemes: tuple[str, ...]

    def __post_init__(self):
        if self.variable not in ("ue_count", "bandwidth"):
            raise ScenarioValidationError("sweep", f"unknown variable {self.variable!r}")
        if not self.values or not self.seeds or not self.schemes:
            raise ScenarioValidationError("sweep", "values, seeds and schemes must be non-empty")
        if self.variable == "bandwidth" and any(v <= 0 for v in self.values):
            raise ScenarioValidationError("sweep", "bandwidth values must be positive")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ScenarioValidationError("schemes", f"unknown scheme {s!r}")


def parse_sweep_spec(text: str, seeds_text: str, schemes_text: str) -> SweepSpec:
    if "=" not in text:
        raise ScenarioValidationError("sweep", "expected VAR=v1,v2,...")
    variable, _, raw = text.partition("=")
    variable = variable.strip()
    try:
        if variable == "ue_count":
            values = tuple(int(v) for v in raw.split(","))
        else:
            values = tuple(float(v) for v in raw.split(","))
    except ValueError:
        raise ScenarioValidationError("sweep", f"bad value list {raw!r}") from None
    seeds_text = seeds_text.strip()
    if "," in seeds_text:
        seeds = tuple(int(s) for s in seeds_text.split(","))
    else:
        seeds = tuple(range(int(seeds_text)))
    schemes = tuple(s.strip() for s in schemes_text.split(","))
    return SweepSpec(variable=variable, values=values, seeds=seeds, schemes=schemes)


CSV_HEADER = ("variable,value,seed,scheme,status,per_batch_latency_s,"
              "bubble_rate,cut_layer,micro_batches")


def _sweep_cell(scenario: Scenario, schemes: tuple[str, ...]) -> dict[str, tuple]:
    """Latency/bubble-rate records per scheme for one (value, seed) cell."""
    rates = link_rates(scenario)
    out: dict[str, tuple] = {}
    try:
        state = run_ao(scenario, rates=rates)
        decision = state.decision
        feasible = True
    except InfeasibleProblemError:
        decision = None
        feasible = False

    if feasible:
        cut = decision.cut_layer
        slots = decision.slot_alloc
        trace = simulate(scenario, decision, rates)
        out["c2p2sl"] = ("ok", trace.makespan, state.bubble_rate,
                         cut, decision.micro_batches)
    else:
        # baselines still need a cut and slots: pick the psl-best cut under
        # uniform slots so infeasible cells keep comparable baselines
        n = scenario.num_ues
        slots = tuple([scenario.channel.frame_length / n] * n)
        cut = min(range(1, scenario.model.num_layers),
                  key=lambda c: latency_psl(scenario, c, slots, rates=rates).per_batch_latency)
        out["c2p2sl"] = ("infeasible", None, None, None, None)

    for scheme in ("sl", "psl", "epsl"):
        if scheme == "sl":
            rep = latency_sl(scenario, cut, rates=rates)
        elif scheme == "psl":
            rep = latency_psl(scenario, cut, slots, rates=rates)
        else:
            rep = latency_epsl(scenario, cut, slots, rates=rates)
        out[scheme] = ("ok", rep.per_batch_latency, rep.bubble_rate, cut, 1)
    return {s: out[s] for s in schemes if s in out}


def cmd_sweep(args) -> int:
    spec = parse_sweep_spec(args.sweep, args.seeds, args.schemes)
    rows = []
    reductions = []
    for value in spec.values:
        for seed in spec.seeds:
            if spec.variable == "ue_count":
                scenario = random_scenario(int(value), seed)
            else:
                base = random_scenario(args.ues, seed)
                scenario = replace(base, channel=replace(base.channel, bandwidth=float(value)))
            cell = _sweep_cell(scenario, spec.schemes)
            for scheme in spec.schemes:
                status, latency, br, cut, k = cell[scheme]
                rows.append((spec.variable, value, seed, scheme, status,
                             latency, br, cut, k))
            if ("c2p2sl" in cell and "psl" in cell
                    and cell["c2p2sl"][0] == "ok"):
                reductions.append(1.0 - cell["c2p2sl"][1] / cell["psl"][1])

    rows.sort(key=lambda r: (r[1], r[2], SCHEMES.index(r[3])))
    lines = [CSV_HEADER]
    for variable, value, seed, scheme, status, latency, br, cut, k in rows:
        lines.append(",".join([
            variable, _fmt(value) if isinstance(value, float) else str(value),
            str(seed), scheme, status,
            _fmt(latency) if latency is not None else "",
            _fmt(br) if br is not None else "",
            str(cut) if cut is not None else "",
            str(k) if k is not None else "",
        ]))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"{len(rows)} rows written to {args.out}")
    else:
        print(text, end="")
    if reductions:
        median = statistics.median(reductions)
        print(f"median c2p2sl vs psl latency reduction: {median * 100.0:.2f}% "
              f"over {len(reductions)} feasible cells")
    else:
        print("median c2p2sl vs psl latency reduction: n/a (no feasible cells)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splitpipe",
        description="Model, simulate and optimize pipeline-parallel split "
                    "learning over a TDMA cell.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_opt = sub.add_parser("optimize", help="run the alternating optimizer")
    _add_scenario_flags(p_opt)
    p_opt.add_argument("--epsilon", type=float, default=1e-3,
                       help="bubble-rate convergence tolerance (default 1e-3)")
    p_opt.add_argument("--out", metavar="PATH", help="write the result record (YAML)")
    p_opt.set_defaults(func=cmd_optimize)

    p_sim = sub.add_parser("simulate", help="reconstruct the pipeline schedule")
    _add_scenario_flags(p_sim)
    p_sim.add_argument("--decision", metavar="PATH",
                       help="decision or optimize-result file (default: optimize first)")
    p_sim.add_argument("--gantt", metavar="PATH", help="write an SVG chart")
    p_sim.add_argument("--trace", metavar="PATH", help="write the block table")
    p_sim.add_argument("--force", action="store_true",
                       help="simulate even if the decision is infeasible")
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="latency comparison over a parameter grid")
    p_sweep.add_argument("--sweep", required=True, metavar="VAR=V1,V2,...",
                         help="ue_count=4,6,8 or bandwidth=100e6,200e6")
    p_sweep.add_argument("--seeds", default="20",
                         help="seed count N (0..N-1) or explicit list 0,1,2")
    p_sweep.add_argument("--schemes", default=",".join(SCHEMES),
                         help=f"comma list from {','.join(SCHEMES)}")
    p_sweep.add_argument("--ues", type=int, default=8,
                         help="UE count for bandwidth sweeps (default 8)")
    p_sweep.add_argument("--out", metavar="PATH", help="write the CSV table")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioFormatError, ScenarioValidationError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InfeasibleProblemError, InfeasibleDecisionError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        if isinstance(exc, InfeasibleProblemError) and exc.diagnostics:
            print(f"diagnostics: {exc.diagnostics}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
