"""Event-level reconstruction of the training pipeline.

Each UE owns one compute stream (FP then, after the gradients arrive, BP)
and two radio streams (uplink, downlink).  The base station interleaves one
forward pass and one backward pass per micro-batch.  Event rules:

1. UE i runs FP_1..FP_k back to back.
2. UT_m of UE i starts when FP_m is done and its previous upload finished.
   Distinct UEs' uploads may overlap in wall time: the TDMA duty cycle is
   already folded into the per-micro-batch transmission times.
3. The BS starts FP_m once every UE's UT_m has arrived and its own previous
   block ended, then runs BP_m immediately after (one-forward-one-backward).
4. Downlink transfers start only after ALL uplink traffic has finished
   (uplink priority on the shared band), after BP_m produced the gradients,
   and after the UE's previous download.
5. UE i runs BP_m when DT_m landed and its compute stream is free.

The makespan is the end of the last UE backward pass.  Whenever the
forward-stage and backward-stage feed constraints (C3 and C4) hold, the
makespan equals the analytic idle+work total from the timing module.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

from .link_model import LinkRates
from .scenario import Scenario
from .timing import Decision, TimingBreakdown, evaluate


class TaskBlock(NamedTuple):
    """One scheduled block; ``actor`` is "UE<i>", "UL<i>", "DL<i>" or "BS"."""

    actor: str
    kind: str           # FP | UT | DT | BP
    micro_batch: int    # 1-based
    start: float
    end: float


@dataclass(frozen=True, slots=True)
class ScheduleTrace:
    blocks: tuple[TaskBlock, ...]
    makespan: float
    bs_idle: float


def _actor_rank(actor: str) -> tuple[int, int]:
    if actor == "BS":
        return (1, 0)
    kind_rank = {"UE": 0, "UL": 1, "DL": 2}[actor[:2]]
    return (0, int(actor[2:]) * 3 + kind_rank)


def simulate(scenario: Scenario, decision: Decision,
             rates: tuple[LinkRates, ...] | None = None,
             timing: TimingBreakdown | None = None) -> ScheduleTrace:
    """Reconstruct the full pipeline for one batch and return its trace."""
    if timing is None:
        timing = evaluate(scenario, decision, rates)
    k = decision.micro_batches
    active = [i for i in range(scenario.num_ues) if decision.batch_split[i] > 0]
    blocks: list[TaskBlock] = []

    # Forward stage: per-UE FP chain and upload chain.
    ut_end: dict[int, list[float]] = {}
    for i in active:
        ue_id = scenario.ues[i].id
        fwd = timing.ue_fwd[i]
        up = timing.ue_up[i]
        ends = []
        prev_up = 0.0
        for m in range(1, k + 1):
            fp_start = (m - 1) * fwd
            fp_end = m * fwd
            blocks.append(TaskBlock(f"UE{ue_id}", "FP", m, fp_start, fp_end))
            ut_start = max(fp_end, prev_up)
            prev_up = ut_start + up
            ends.append(prev_up)
            blocks.append(TaskBlock(f"UL{ue_id}", "UT", m, ut_start, prev_up))
        ut_end[i] = ends

    # Base station: 1F1B chain gated on the arrival of each micro-batch.
    bs_prev = 0.0
    bp_end = [0.0] * (k + 1)
    for m in range(1, k + 1):
        arrivals = max(ut_end[i][m - 1] for i in active)
        fp_start = max(arrivals, bs_prev)
        fp_end = fp_start + timing.bs_fwd
        blocks.append(TaskBlock("BS", "FP", m, fp_start, fp_end))
        bs_prev = fp_end + timing.bs_bwd
        blocks.append(TaskBlock("BS", "BP", m, fp_end, bs_prev))
        bp_end[m] = bs_prev

    # Backward stage: downloads wait for all uplink traffic to clear.
    uplink_clear = max(ut_end[i][k - 1] for i in active)
    makespan = 0.0
    for i in active:
        ue_id = scenario.ues[i].id
        down = timing.ue_down[i]
        bwd = timing.ue_bwd[i]
        prev_dt = 0.0
        prev_compute = k * timing.ue_fwd[i]
        for m in range(1, k + 1):
            dt_start = max(bp_end[m], uplink_clear, prev_dt)
            prev_dt = dt_start + down
            blocks.append(TaskBlock(f"DL{ue_id}", "DT", m, dt_start, prev_dt))
            bp_start = max(prev_dt, prev_compute)
            prev_compute = bp_start + bwd
            blocks.append(TaskBlock(f"UE{ue_id}", "BP", m, bp_start, prev_compute))
        makespan = max(makespan, prev_compute)

    blocks.sort(key=lambda b: (b.start, _actor_rank(b.actor), b.micro_batch))
    bs_busy = k * (timing.bs_fwd + timing.bs_bwd)
    return ScheduleTrace(blocks=tuple(blocks), makespan=makespan,
                         bs_idle=makespan - bs_busy)


# --------------------------------------------------------------------------
# Exports

def export_trace_table(trace: ScheduleTrace, path: str | Path) -> None:
    """Write the trace as a diff-friendly text table, one block per line."""
    lines = ["actor kind micro_batch start end"]
    for b in trace.blocks:
        lines.append(f"{b.actor} {b.kind} {b.micro_batch} {b.start:.9g} {b.end:.9g}")
    Path(path).write_text("\n".join(lines) + "\n")


_KIND_COLOR = {"FP": "#4e79a7", "BP": "#f28e2b", "UT": "#59a14f", "DT": "#e15759"}
_ROW_H = 22
_BAR_H = 16
_LEFT = 64
_WIDTH = 1000


def export_gantt(trace: ScheduleTrace, path: str | Path) -> None:
    """Render the trace as an SVG chart, one row per actor.

    Rows are ordered UE_1..UE_n, then uplink and downlink rows, then the
    base station; actors without blocks are omitted.  Output bytes depend
    only on the trace.
    """
    if not trace.blocks:
        raise ValueError("cannot render an empty trace")
    actors = sorted({b.actor for b in trace.blocks}, key=_gantt_row_rank)
    row_of = {a: r for r, a in enumerate(actors)}
    height = len(actors) * _ROW_H + 40
    scale = (_WIDTH - _LEFT - 10) / trace.makespan if trace.makespan > 0 else 1.0

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{height}" '
        f'font-family="monospace" font-size="10">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{height}" fill="white"/>',
    ]
    for actor in actors:
        y = 20 + row_of[actor] * _ROW_H
        parts.append(f'<text x="4" y="{y + 12}">{actor}</text>')
    for b in trace.blocks:
        x = _LEFT + b.start * scale
        w = max((b.end - b.start) * scale, 0.5)
        y = 20 + row_of[b.actor] * _ROW_H + (_ROW_H - _BAR_H) / 2
        color = _KIND_COLOR[b.kind]
        label = f"{b.kind}{b.micro_batch}"
        parts.append(
            f'<rect class="block" x="{x:.3f}" y="{y:.1f}" width="{w:.3f}" '
            f'height="{_BAR_H}" fill="{color}" stroke="#333" stroke-width="0.4">'
            f'<title>{b.actor} {label} [{b.start:.6g}, {b.end:.6g}]</title></rect>')
        if w > 24:
            parts.append(f'<text x="{x + 2:.3f}" y="{y + 11:.1f}" fill="white">{label}</text>')
    parts.append(
        f'<text x="{_LEFT}" y="{height - 8}">makespan {trace.makespan:.6g} s, '
        f'bs idle {trace.bs_idle:.6g} s</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


def _gantt_row_rank(actor: str) -> tuple[int, int]:
    if actor == "BS":
        return (3, 0)
    group = {"UE": 0, "UL": 1, "DL": 2}[actor[:2]]
    return (group, int(actor[2:]))
