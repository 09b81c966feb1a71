"""Per-batch latency models for the comparison schemes.

These are minimal latency readings of each scheme's description, built on
the same link/timing primitives as the pipelined scheme so comparisons
isolate scheduling effects:

* sl: the BS trains with one UE at a time; per-UE round trips add up, each
  UE gets the whole frame during its turn.
* psl: all UEs run each stage in parallel; stages are strictly sequential,
  so the batch takes the sum of per-stage maxima.
* epsl: psl with the BS backward pass and the downlink volume shrunk by a
  gradient-aggregation factor (1/n by default).
* c2p2sl: the pipelined scheme itself, reported from its timing breakdown.

Batch shares default to a uniform split.  Synchronization and
model-averaging traffic is outside these models.
"""

from __future__ import annotations

from dataclasses import dataclass

from .link_model import LinkRates, link_rates
from .scenario import Scenario
from .timing import Decision, evaluate, uniform_batch_split

SCHEMES = ("sl", "psl", "epsl", "c2p2sl")


@dataclass(frozen=True, slots=True)
class BaselineReport:
    scheme: str
    per_batch_latency: float
    components: dict[str, float]

    @property
    def bs_busy(self) -> float:
        return self.components.get("bs_fwd", 0.0) + self.components.get("bs_bwd", 0.0)

    @property
    def bubble_rate(self) -> float:
        """Idle fraction of the BS under this scheme's latency model."""
        if self.per_batch_latency <= 0.0:
            return 0.0
        return (self.per_batch_latency - self.bs_busy) / self.per_batch_latency


def _stage_times(scenario: Scenario, cut: int, batch_split, slot_alloc,
                 rates: tuple[LinkRates, ...]):
    """Single-shot (k=1) per-UE stage durations for the staged baselines."""
    decision = Decision(cut_layer=cut, micro_batches=1,
                        batch_split=tuple(batch_split),
                        slot_alloc=tuple(slot_alloc))
    return evaluate(scenario, decision, rates)


def latency_sl(scenario: Scenario, cut: int,
               batch_split=None,
               rates: tuple[LinkRates, ...] | None = None) -> BaselineReport:
    """Sequential training: the sum of per-UE full round trips."""
    if rates is None:
        rates = link_rates(scenario)
    n = scenario.num_ues
    if batch_split is None:
        batch_split = uniform_batch_split(scenario.total_batch, n)
    frame = scenario.channel.frame_length
    components = {"ue_fwd": 0.0, "uplink": 0.0, "bs_fwd": 0.0,
                  "bs_bwd": 0.0, "downlink": 0.0, "ue_bwd": 0.0}
    for i in range(n):
        b_i = batch_split[i]
        if b_i == 0:
            continue
        solo = [0] * n
        solo[i] = b_i
        slots = [0.0] * n
        slots[i] = frame  # the active UE owns the whole frame during its turn
        timing = _stage_times(scenario, cut, solo, slots, rates)
        components["ue_fwd"] += timing.ue_fwd[i]
        components["uplink"] += timing.ue_up[i]
        components["bs_fwd"] += timing.bs_fwd
        components["bs_bwd"] += timing.bs_bwd
        components["downlink"] += timing.ue_down[i]
        components["ue_bwd"] += timing.ue_bwd[i]
    return BaselineReport("sl", sum(components.values()), components)


def latency_psl(scenario: Scenario, cut: int, slot_alloc,
                batch_split=None,
                rates: tuple[LinkRates, ...] | None = None) -> BaselineReport:
    """Parallel UEs, strictly sequential stages: sum of per-stage maxima."""
    if rates is None:
        rates = link_rates(scenario)
    if batch_split is None:
        batch_split = uniform_batch_split(scenario.total_batch, scenario.num_ues)
    timing = _stage_times(scenario, cut, batch_split, slot_alloc, rates)
    components = {
        "ue_fwd": max(timing.ue_fwd),
        "uplink": max(timing.ue_up),
        "bs_fwd": timing.bs_fwd,
        "bs_bwd": timing.bs_bwd,
        "downlink": max(timing.ue_down),
        "ue_bwd": max(timing.ue_bwd),
    }
    return BaselineReport("psl", sum(components.values()), components)


def latency_epsl(scenario: Scenario, cut: int, slot_alloc,
                 aggregation_factor: float | None = None,
                 batch_split=None,
                 rates: tuple[LinkRates, ...] | None = None) -> BaselineReport:
    """psl with gradient aggregation shrinking BS backward and downlink."""
    if aggregation_factor is None:
        aggregation_factor = 1.0 / scenario.num_ues
    if not (0.0 < aggregation_factor <= 1.0):
        raise ValueError(
            f"aggregation_factor must be in (0, 1], got {aggregation_factor}")
    base = latency_psl(scenario, cut, slot_alloc, batch_split, rates)
    components = dict(base.components)
    components["bs_bwd"] *= aggregation_factor
    components["downlink"] *= aggregation_factor
    return BaselineReport("epsl", sum(components.values()), components)


def report_c2p2sl(scenario: Scenario, decision: Decision,
                  rates: tuple[LinkRates, ...] | None = None) -> BaselineReport:
    """The pipelined scheme's analytic per-batch latency (idle + work)."""
    timing = evaluate(scenario, decision, rates)
    components = {
        "pipeline_fill": timing.idle,
        "bs_fwd": decision.micro_batches * timing.bs_fwd,
        "bs_bwd": decision.micro_batches * timing.bs_bwd,
    }
    return BaselineReport("c2p2sl", sum(components.values()), components)
