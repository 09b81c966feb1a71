"""Per-micro-batch timing model, constraint checks and the bubble rate.

For a decision (cut layer l, micro-batch count k, batch split b, slot
allocation tau) the per-micro-batch durations are

    ue_fwd_i  = b_i * sum_{j<=l} cF_j / (k * f_i)
    ue_up_i   = b_i * (s_l + s_0) * T / (k * r_up_i * tau_i)
    bs_fwd    = (sum_i b_i) * sum_{j>l} cF_j / (k * f_B)
    bs_bwd    = (sum_i b_i) * sum_{j>l} cB_j / (k * f_B)
    ue_down_i = b_i * s_l * T / (k * r_dn_i * tau_i)
    ue_bwd_i  = b_i * sum_{j<=l} cB_j / (k * f_i)

The TDMA duty cycle T/tau_i is folded into the transmission times, so UEs'
radio blocks may overlap in wall time.  UEs holding no data (b_i = 0)
contribute nothing to any maximum and are exempt from the storage check.

The base station is busy for k*(bs_fwd+bs_bwd) per batch and idles for
max_i(fwd+up) during pipeline fill plus max_i(down+bwd) during drain; the
bubble rate is idle/(idle+work).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InfeasibleDecisionError
from .link_model import LinkRates, link_rates
from .scenario import Scenario


@dataclass(frozen=True, slots=True)
class Decision:
    """Optimization variables for one training round.

    ``batch_split`` are integer sample counts per UE; ``slot_alloc`` are
    per-frame slot lengths in seconds.  ``micro_batches`` never exceeds the
    smallest positive batch share so every micro-batch holds at least one
    sample per participating UE.
    """

    cut_layer: int
    micro_batches: int
    batch_split: tuple[int, ...]
    slot_alloc: tuple[float, ...]

    def __post_init__(self):
        if self.cut_layer < 1:
            raise InfeasibleDecisionError(f"cut_layer must be >= 1, got {self.cut_layer}")
        if self.micro_batches < 1:
            raise InfeasibleDecisionError(f"micro_batches must be >= 1, got {self.micro_batches}")
        if len(self.batch_split) != len(self.slot_alloc):
            raise InfeasibleDecisionError("batch_split and slot_alloc lengths differ")
        positive = []
        for i, (b_i, tau_i) in enumerate(zip(self.batch_split, self.slot_alloc)):
            if b_i < 0:
                raise InfeasibleDecisionError(f"batch_split[{i}] must be >= 0, got {b_i}")
            if tau_i < 0.0:
                raise InfeasibleDecisionError(f"slot_alloc[{i}] must be >= 0, got {tau_i}")
            if b_i > 0:
                if tau_i <= 0.0:
                    raise InfeasibleDecisionError(
                        f"UE index {i} holds {b_i} samples but has a zero time slot")
                positive.append(b_i)
        if positive and self.micro_batches > min(positive):
            raise InfeasibleDecisionError(
                f"micro_batches {self.micro_batches} exceeds the smallest positive "
                f"batch share {min(positive)}")


@dataclass(frozen=True, slots=True)
class TimingBreakdown:
    """All per-micro-batch durations plus the idle/work aggregates."""

    ue_fwd: tuple[float, ...]
    ue_up: tuple[float, ...]
    bs_fwd: float
    bs_bwd: float
    ue_down: tuple[float, ...]
    ue_bwd: tuple[float, ...]
    idle: float
    work: float
    bubble_rate: float


@dataclass(frozen=True, slots=True)
class ConstraintCheck:
    name: str
    passed: bool
    slack: float
    detail: str


@dataclass(frozen=True, slots=True)
class ConstraintReport:
    checks: tuple[ConstraintCheck, ...]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> ConstraintCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def failed(self) -> tuple[ConstraintCheck, ...]:
        return tuple(c for c in self.checks if not c.passed)

    def summary(self) -> str:
        return "\n".join(
            f"  {c.name}: {'pass' if c.passed else 'FAIL'}  slack={c.slack:.6g}  {c.detail}"
            for c in self.checks)


def uniform_batch_split(total: int, n: int) -> tuple[int, ...]:
    """Split ``total`` samples over ``n`` UEs as evenly as possible."""
    base, extra = divmod(total, n)
    return tuple(base + 1 if i < extra else base for i in range(n))


def evaluate(scenario: Scenario, decision: Decision,
             rates: tuple[LinkRates, ...] | None = None) -> TimingBreakdown:
    """All per-micro-batch durations and the bubble rate for a decision."""
    model = scenario.model
    n = scenario.num_ues
    cut = decision.cut_layer
    k = decision.micro_batches
    if len(decision.batch_split) != n:
        raise InfeasibleDecisionError(
            f"decision has {len(decision.batch_split)} UE entries, scenario has {n}")
    if cut > model.num_layers - 1:
        raise InfeasibleDecisionError(
            f"cut_layer {cut} out of range 1..{model.num_layers - 1}")
    if rates is None:
        rates = link_rates(scenario)

    s_l = model.cut_activation_bits(cut)
    s_0 = model.label_bits
    pre_f = model.prefix_fwd(cut)
    pre_b = model.prefix_bwd(cut)
    suf_f = model.suffix_fwd(cut)
    suf_b = model.suffix_bwd(cut)
    f_bs = scenario.bs.flops_per_second()
    frame = scenario.channel.frame_length

    ue_fwd = [0.0] * n
    ue_up = [0.0] * n
    ue_down = [0.0] * n
    ue_bwd = [0.0] * n
    max_fwd_up = 0.0
    max_down_bwd = 0.0
    total_b = 0
    for i in range(n):
        b_i = decision.batch_split[i]
        if b_i == 0:
            continue
        total_b += b_i
        tau_i = decision.slot_alloc[i]
        if tau_i <= 0.0:
            raise InfeasibleDecisionError(
                f"UE index {i} holds {b_i} samples but has a zero time slot")
        f_i = scenario.ues[i].flops_per_second()
        duty = frame / (k * tau_i)
        ue_fwd[i] = b_i * pre_f / (k * f_i)
        ue_up[i] = b_i * (s_l + s_0) * duty / rates[i].uplink
        ue_down[i] = b_i * s_l * duty / rates[i].downlink
        ue_bwd[i] = b_i * pre_b / (k * f_i)
        max_fwd_up = max(max_fwd_up, ue_fwd[i] + ue_up[i])
        max_down_bwd = max(max_down_bwd, ue_down[i] + ue_bwd[i])

    bs_fwd = total_b * suf_f / (k * f_bs)
    bs_bwd = total_b * suf_b / (k * f_bs)
    idle = max_fwd_up + max_down_bwd
    work = k * (bs_fwd + bs_bwd)
    denom = idle + work
    bubble = idle / denom if denom > 0.0 else 0.0
    return TimingBreakdown(
        ue_fwd=tuple(ue_fwd), ue_up=tuple(ue_up),
        bs_fwd=bs_fwd, bs_bwd=bs_bwd,
        ue_down=tuple(ue_down), ue_bwd=tuple(ue_bwd),
        idle=idle, work=work, bubble_rate=bubble)


def bubble_rate(scenario: Scenario, decision: Decision,
                rates: tuple[LinkRates, ...] | None = None) -> float:
    """Idle fraction of the base station for this decision."""
    return evaluate(scenario, decision, rates).bubble_rate


_REL_EPS = 1e-9


def check_constraints(scenario: Scenario, decision: Decision,
                      rates: tuple[LinkRates, ...] | None = None) -> ConstraintReport:
    """Pass/fail plus slack for every constraint C1..C6.

    Infeasibility is a report, not an error; slacks are RHS - LHS so a
    negative slack marks the violation margin.
    """
    model = scenario.model
    n = scenario.num_ues
    cut = decision.cut_layer
    k = decision.micro_batches
    num_layers = model.num_layers
    checks: list[ConstraintCheck] = []

    # C1: cut position range
    c1_ok = 1 <= cut <= num_layers - 1
    c1_slack = float(min(cut - 1, num_layers - 1 - cut))
    checks.append(ConstraintCheck(
        "C1", c1_ok, c1_slack, f"cut layer {cut} in [1, {num_layers - 1}]"))

    # C5: batch conservation
    total_split = sum(decision.batch_split)
    c5_ok = total_split == scenario.total_batch and min(decision.batch_split) >= 0
    c5_slack = -abs(float(total_split - scenario.total_batch))
    if c5_ok:
        c5_slack = 0.0
    checks.append(ConstraintCheck(
        "C5", c5_ok, c5_slack,
        f"sum(batch_split)={total_split} vs batch={scenario.total_batch}"))

    # C6: slot budget
    frame = scenario.channel.frame_length
    tau_sum = sum(decision.slot_alloc)
    c6_slack = frame - tau_sum
    c6_ok = tau_sum <= frame * (1.0 + _REL_EPS) and min(decision.slot_alloc) >= 0.0
    checks.append(ConstraintCheck(
        "C6", c6_ok, c6_slack, f"sum(slots)={tau_sum:.6g}s vs frame={frame:.6g}s"))

    if not c1_ok:
        # remaining checks need a valid cut index
        checks.append(ConstraintCheck("C2", False, 0.0, "skipped: C1 failed"))
        checks.append(ConstraintCheck("C3", False, 0.0, "skipped: C1 failed"))
        checks.append(ConstraintCheck("C4", False, 0.0, "skipped: C1 failed"))
        return ConstraintReport(tuple(checks))

    # C2: storage limit per participating UE
    per_sample = model.prefix_fwd(cut) + model.prefix_bwd(cut)
    c2_slack = float("inf")
    c2_worst = "no participating UE"
    c2_ok = True
    for i in range(n):
        b_i = decision.batch_split[i]
        if b_i <= 0:
            continue
        budget = scenario.ues[i].storage_budget
        slack = budget - per_sample * b_i
        if slack < c2_slack:
            c2_slack = slack
            c2_worst = f"UE index {i}: load={per_sample * b_i:.6g} budget={budget:.6g}"
        if slack < -_REL_EPS * max(budget, 1.0):
            c2_ok = False
    if c2_slack == float("inf"):
        c2_slack = 0.0
    checks.append(ConstraintCheck("C2", c2_ok, c2_slack, c2_worst))

    timing = evaluate(scenario, decision, rates)
    bs_pair = timing.bs_fwd + timing.bs_bwd
    max_fwd = max(timing.ue_fwd)
    max_up = max(timing.ue_up)
    max_down = max(timing.ue_down)

    # C3: forward stage keeps the BS fed
    c3_lhs = max(max_fwd, max_up)
    c3_slack = bs_pair - c3_lhs
    checks.append(ConstraintCheck(
        "C3", c3_slack >= -_REL_EPS * max(bs_pair, 1e-30), c3_slack,
        f"max(fwd,up)={c3_lhs:.6g}s vs bs pair={bs_pair:.6g}s"))

    # C4: backward stage drains without stalling the final micro-batch
    c4_lhs = (k - 1) * (max_up + max_down)
    c4_rhs = k * bs_pair
    c4_slack = c4_rhs - c4_lhs
    checks.append(ConstraintCheck(
        "C4", c4_slack >= -_REL_EPS * max(c4_rhs, 1e-30), c4_slack,
        f"(k-1)(max_up+max_down)={c4_lhs:.6g}s vs k*bs pair={c4_rhs:.6g}s"))

    order = {"C1": 0, "C2": 1, "C3": 2, "C4": 3, "C5": 4, "C6": 5}
    checks.sort(key=lambda c: order[c.name])
    return ConstraintReport(tuple(checks))
