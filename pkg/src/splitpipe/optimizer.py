"""Joint split-and-allocation optimizer.

The bubble rate is minimized by alternating over three subproblems with the
other variables held fixed:

1. cut layer and micro-batch count: enumerate every cut position that
   respects storage (C2) and the forward-feed bound (C3), give each the
   largest micro-batch count the backward-drain bound (C4) admits, keep the
   bubble-rate argmin;
2. batch split: a linear program in the per-UE sample counts plus four
   stage-maximum auxiliaries, solved exactly by dense simplex and rounded
   to integers by comparing floor/ceiling combinations;
3. slot allocation: a four-variable convex program over the stage maxima
   (t1, t2, t3, t4); each UE's minimal feasible slot is a max of
   hyperbolic terms in those maxima and the frame budget couples them.

A candidate produced by any subproblem is kept only if it does not
increase the bubble rate, so the recorded history is non-increasing and
every recorded decision is feasible.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleProblemError
from .link_model import LinkRates, link_rates
from .scenario import Scenario
from .simplex import solve_lp
from .timing import (Decision, check_constraints, evaluate,
                     uniform_batch_split)

_REL = 1e-9


@dataclass(frozen=True, slots=True)
class SolverTolerances:
    ao_epsilon: float = 1e-3        # stop when successive bubble rates differ by <= this
    lp_feas_tol: float = 1e-9
    convex_obj_tol: float = 1e-6    # relative objective accuracy of the slot solver

    def __post_init__(self):
        for name in ("ao_epsilon", "lp_feas_tol", "convex_obj_tol"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True, slots=True)
class AOState:
    iteration: int
    decision: Decision
    bubble_rate: float
    history: tuple[tuple[int, float], ...]


# --------------------------------------------------------------------------
# Shared per-cut coefficient bundle


class _Coeffs:
    """Per-sample cost coefficients for a fixed cut layer.

    ``up[i]``/``dn[i]`` carry the frame factor, so the transmission time of
    UE i is  b_i * up[i] / (k * tau_i).
    """

    __slots__ = ("n", "fwd", "bwd", "up", "dn", "bs_pair", "storage", "per_sample_store")

    def __init__(self, scenario: Scenario, cut: int, rates: tuple[LinkRates, ...]):
        model = scenario.model
        frame = scenario.channel.frame_length
        s_l = model.cut_activation_bits(cut)
        s_0 = model.label_bits
        pre_f = model.prefix_fwd(cut)
        pre_b = model.prefix_bwd(cut)
        self.n = scenario.num_ues
        self.fwd = [pre_f / ue.flops_per_second() for ue in scenario.ues]
        self.bwd = [pre_b / ue.flops_per_second() for ue in scenario.ues]
        self.up = [(s_l + s_0) * frame / r.uplink for r in rates]
        self.dn = [s_l * frame / r.downlink for r in rates]
        self.bs_pair = (model.suffix_fwd(cut) + model.suffix_bwd(cut)) / scenario.bs.flops_per_second()
        self.storage = [ue.storage_budget for ue in scenario.ues]
        self.per_sample_store = pre_f + pre_b


def _positive_indices(batch_split) -> list[int]:
    return [i for i, b in enumerate(batch_split) if b > 0]


# --------------------------------------------------------------------------
# Micro-batch count


def micro_batches_for_ratio(eta: float, k_max: int) -> int:
    """Largest k <= k_max the drain bound admits for a work/transfer ratio eta."""
    if eta >= 1.0:
        return max(k_max, 1)
    k = math.floor(1.0 / (1.0 - eta) + 1e-9)
    return max(1, min(k_max, k))


def optimal_k(scenario: Scenario, cut: int, batch_split, slot_alloc,
              rates: tuple[LinkRates, ...] | None = None,
              variant: str = "c4") -> int:
    """Largest micro-batch count satisfying the backward-drain bound C4.

    ``variant="c4"`` uses the exact C4 ratio (BS pair time over the sum of
    the uplink and downlink stage maxima, evaluated at k=1).  ``variant=
    "lemma"`` uses the per-UE combined ratio (equivalently the BS pair time
    over the smallest per-UE transfer sum), which can exceed what C4 admits.
    """
    if rates is None:
        rates = link_rates(scenario)
    active = _positive_indices(batch_split)
    if not active:
        raise ValueError("batch split assigns no samples to any UE")
    co = _Coeffs(scenario, cut, rates)
    total_b = sum(batch_split)
    work1 = total_b * co.bs_pair
    up1 = []
    dn1 = []
    for i in active:
        tau = slot_alloc[i]
        if tau > 0.0:
            up1.append(batch_split[i] * co.up[i] / tau)
            dn1.append(batch_split[i] * co.dn[i] / tau)
        else:
            up1.append(math.inf)
            dn1.append(math.inf)
    if variant == "c4":
        denom = max(up1) + max(dn1)
    elif variant == "lemma":
        denom = min(u + d for u, d in zip(up1, dn1))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    k_max = min(batch_split[i] for i in active)
    if denom == 0.0:
        return max(1, k_max)
    if math.isinf(denom):
        return 1
    return micro_batches_for_ratio(work1 / denom, k_max)


# --------------------------------------------------------------------------
# Cut-layer enumeration


def enumerate_split(scenario: Scenario, batch_split, slot_alloc,
                    rates: tuple[LinkRates, ...] | None = None,
                    variant: str = "c4") -> tuple[int, int]:
    """Bubble-rate argmin over feasible cut layers, ties toward smaller cut."""
    if rates is None:
        rates = link_rates(scenario)
    active = _positive_indices(batch_split)
    if not active:
        raise ValueError("batch split assigns no samples to any UE")
    num_layers = scenario.model.num_layers
    best: tuple[float, int, int] | None = None
    reasons: dict[int, list[str]] = {}
    for cut in range(1, num_layers):
        co = _Coeffs(scenario, cut, rates)
        failed = []
        if any(co.per_sample_store * batch_split[i] >
               co.storage[i] * (1.0 + _REL) for i in active):
            failed.append("C2")
        total_b = sum(batch_split)
        work1 = total_b * co.bs_pair
        max_fwd1 = max(batch_split[i] * co.fwd[i] for i in active)
        max_up1 = max(
            batch_split[i] * co.up[i] / slot_alloc[i] if slot_alloc[i] > 0.0 else math.inf
            for i in active)
        if max(max_fwd1, max_up1) > work1 * (1.0 + _REL):
            failed.append("C3")
        if failed:
            reasons[cut] = failed
            continue
        k = optimal_k(scenario, cut, batch_split, slot_alloc, rates, variant)
        decision = Decision(cut_layer=cut, micro_batches=k,
                            batch_split=tuple(batch_split),
                            slot_alloc=tuple(slot_alloc))
        br = evaluate(scenario, decision, rates).bubble_rate
        if best is None or br < best[0]:
            best = (br, cut, k)
    if best is None:
        raise InfeasibleProblemError(
            "no cut layer satisfies C2 and C3 for the given split and slots",
            diagnostics={"per_cut": reasons})
    return best[1], best[2]


# --------------------------------------------------------------------------
# Batch-size partition (linear program + integer rounding)

_LATTICE_LIMIT = 50000


def _stage_objective(co: _Coeffs, k: int, batch_split, slot_alloc,
                     active: list[int]) -> float:
    """max_i(fwd+up) + max_i(down+bwd): the quantity the partition minimizes."""
    m1 = 0.0
    m2 = 0.0
    for i in active:
        b_i = batch_split[i]
        tau = slot_alloc[i]
        m1 = max(m1, b_i * (co.fwd[i] + co.up[i] / tau) / k)
        m2 = max(m2, b_i * (co.dn[i] / tau + co.bwd[i]) / k)
    return m1 + m2


def _batch_feasible(co: _Coeffs, k: int, total_batch: int, batch_split,
                    slot_alloc) -> tuple[bool, list[str]]:
    """Feasibility of C2/C3/C4/C5 for a candidate integer split."""
    failed = []
    if sum(batch_split) != total_batch or min(batch_split) < 0:
        failed.append("C5")
    active = [i for i, b in enumerate(batch_split) if b > 0]
    if not active:
        return (not failed, failed)
    if any(co.per_sample_store * batch_split[i] > co.storage[i] * (1.0 + _REL)
           for i in active):
        failed.append("C2")
    work1 = sum(batch_split) * co.bs_pair
    max_fwd = max(batch_split[i] * co.fwd[i] for i in active)
    max_up = max(batch_split[i] * co.up[i] / slot_alloc[i] for i in active)
    max_dn = max(batch_split[i] * co.dn[i] / slot_alloc[i] for i in active)
    if max(max_fwd, max_up) > work1 * (1.0 + _REL):
        failed.append("C3")
    if (k - 1) * (max_up + max_dn) > k * work1 * (1.0 + _REL):
        failed.append("C4")
    return (not failed, failed)


def solve_batch_partition(scenario: Scenario, cut: int, k: int, slot_alloc,
                          tolerances: SolverTolerances | None = None,
                          rates: tuple[LinkRates, ...] | None = None) -> tuple[int, ...]:
    """Integer batch split minimizing the idle stage maxima at fixed (l, k, tau).

    Solves the LP relaxation exactly, then compares floor/ceiling roundings
    that preserve the batch total and returns the best feasible one.
    """
    if rates is None:
        rates = link_rates(scenario)
    if tolerances is None:
        tolerances = SolverTolerances()
    n = scenario.num_ues
    total_batch = scenario.total_batch
    co = _Coeffs(scenario, cut, rates)
    active = [i for i in range(n) if slot_alloc[i] > 0.0]
    if not active:
        raise InfeasibleProblemError("every UE has a zero slot; nowhere to place the batch")

    # one column per active UE, plus t1, t2, t3, t4.
    na = len(active)
    width = na + 4
    it1, it2, it3, it4 = na, na + 1, na + 2, na + 3
    rows_ub = []
    rhs_ub = []

    def row(coeffs: dict[int, float], rhs: float):
        r = np.zeros(width)
        for j, v in coeffs.items():
            r[j] = v
        rows_ub.append(r)
        rhs_ub.append(rhs)

    for col, i in enumerate(active):
        tau = slot_alloc[i]
        up_i = co.up[i] / tau
        dn_i = co.dn[i] / tau
        # C2: storage
        row({col: co.per_sample_store}, co.storage[i])
        # C3: fwd and uplink must not outpace the BS pair
        r = np.zeros(width)
        r[:na] = -co.bs_pair
        r[col] += co.fwd[i]
        rows_ub.append(r)
        rhs_ub.append(0.0)
        r = np.zeros(width)
        r[:na] = -co.bs_pair
        r[col] += up_i
        rows_ub.append(r)
        rhs_ub.append(0.0)
        # C7..C10: stage maxima
        row({col: (co.fwd[i] + up_i) / k, it1: -1.0}, 0.0)
        row({col: (dn_i + co.bwd[i]) / k, it2: -1.0}, 0.0)
        row({col: up_i / k, it3: -1.0}, 0.0)
        row({col: dn_i / k, it4: -1.0}, 0.0)
    if k >= 2:
        r = np.zeros(width)
        r[:na] = -co.bs_pair
        r[it3] = float(k - 1)
        r[it4] = float(k - 1)
        rows_ub.append(r)
        rhs_ub.append(0.0)

    A_eq = np.zeros((1, width))
    A_eq[0, :na] = 1.0
    c = np.zeros(width)
    c[it1] = 1.0
    c[it2] = 1.0

    result = solve_lp(c, A_ub=np.array(rows_ub), b_ub=np.array(rhs_ub),
                      A_eq=A_eq, b_eq=np.array([float(total_batch)]))
    if result.status != "optimal":
        cap_total = sum(co.storage[i] / co.per_sample_store for i in active)
        raise InfeasibleProblemError(
            "batch partition LP infeasible",
            diagnostics={
                "storage_cap_total": cap_total,
                "total_batch": total_batch,
                "storage_binding": cap_total < total_batch,
            })

    relaxed = [0.0] * n
    for col, i in enumerate(active):
        relaxed[i] = float(result.x[col])

    candidates = _integer_candidates(relaxed, total_batch, active)
    best = None
    for cand in candidates:
        ok, _ = _batch_feasible(co, k, total_batch, cand, slot_alloc)
        if not ok:
            continue
        obj = _stage_objective(co, k, cand, slot_alloc, _positive_indices(cand))
        key = (obj, cand)
        if best is None or key < best:
            best = key
    if best is None:
        raise InfeasibleProblemError(
            "no integer rounding of the relaxed batch split is feasible",
            diagnostics={"relaxed": relaxed})
    return best[1]


def _integer_candidates(relaxed: list[float], total: int,
                        active: list[int]) -> list[tuple[int, ...]]:
    """Floor/ceiling roundings of the relaxed split that sum to the total.

    Always includes the largest-fractional-part rounding; adds the full
    floor/ceil lattice when it is small enough to enumerate.
    """
    n = len(relaxed)
    floors = [0] * n
    fracs = [0.0] * n
    for i in active:
        v = relaxed[i]
        f = math.floor(v + 1e-9)
        floors[i] = max(f, 0)
        fracs[i] = max(v - floors[i], 0.0)
    residue = total - sum(floors)

    candidates: list[tuple[int, ...]] = []
    main = list(floors)
    if residue >= 0:
        order = sorted(active, key=lambda i: (-fracs[i], i))
        for i in order[:residue]:
            main[i] += 1
        extra = residue - len(order)
        idx = 0
        while extra > 0:  # residue exceeds the candidate count: keep topping up
            main[order[idx % len(order)]] += 1
            extra -= 1
            idx += 1
    else:
        order = sorted(active, key=lambda i: (fracs[i], i))
        need = -residue
        for i in itertools.cycle(order):
            if need == 0:
                break
            if main[i] > 0:
                main[i] -= 1
                need -= 1
    if sum(main) == total:
        candidates.append(tuple(main))

    fractional = [i for i in active if 1e-9 < fracs[i] < 1.0 - 1e-9]
    if 0 <= residue <= len(fractional):
        count = math.comb(len(fractional), residue)
        if count <= _LATTICE_LIMIT:
            for chosen in itertools.combinations(fractional, residue):
                cand = list(floors)
                for i in chosen:
                    cand[i] += 1
                candidates.append(tuple(cand))
    # dedupe, keep deterministic order
    seen = set()
    unique = []
    for cand in candidates:
        if cand not in seen:
            seen.add(cand)
            unique.append(cand)
    return unique


# --------------------------------------------------------------------------
# Slot allocation (four-variable convex program)


class _SlotProblem:
    """min t1+t2 subject to the frame budget on the per-UE minimal slots.

    For each UE the minimal feasible slot is
        g_i = max(U_i * max(1/W, 1/(t1-F_i)),   # uplink: C3~, C7, C9
                  D_i * max(1/t4, 1/(t2-B_i)),  # downlink: C8, C10
                  U_i / t3)
    with t3+t4 bounded by k/(k-1) of the BS pair when k >= 2 and free
    otherwise.  Everything is convex in (t1..t4).
    """

    def __init__(self, F, B, U, D, W, k, frame):
        self.F = F
        self.B = B
        self.U = U
        self.D = D
        self.W = W
        self.k = k
        self.frame = frame
        self.S = k * W / (k - 1) if k >= 2 else None
        self.maxF = max(F)
        self.maxB = max(B)
        self.sumU = sum(U)
        self.sumD = sum(D)
        self._t3 = (self.S / 2.0) if self.S is not None else None

    # ---- inner minimization over the t3/t4 split (k >= 2 only)

    def _inner_t3(self, m: list[float]) -> tuple[float, float]:
        """Minimize sum_i max(m_i, U_i/t3, D_i/(S-t3)); returns (value, t3*).

        Within a fixed active set the sum is const + P/t3 + Q/(S-t3), whose
        minimizer is closed-form; iterate until the active set reproduces
        itself, with a sign bracket on the derivative as the safety net.
        """
        S = self.S
        U = self.U
        D = self.D
        lo = S * 1e-12
        hi = S * (1.0 - 1e-12)
        if self.sumU == 0.0:
            x = lo
            return sum(max(mi, d / (S - x)) for mi, d in zip(m, D)), x
        if self.sumD == 0.0:
            x = hi
            return sum(max(mi, u / x) for mi, u in zip(m, U)), x
        x = min(max(self._t3, lo), hi)
        last = None
        for _ in range(40):
            P = 0.0
            Q = 0.0
            sx = S - x
            for mi, u, d in zip(m, U, D):
                a = u / x
                bb = d / sx
                if a > mi and a >= bb:
                    P += u
                elif bb > mi:
                    Q += d
            if last == (P, Q):
                break  # self-consistent active set: x is its exact minimizer
            if Q / (sx * sx) - P / (x * x) < 0.0:
                lo = x
            else:
                hi = x
            if hi - lo <= 1e-13 * S:
                break
            if P > 0.0 and Q > 0.0:
                sp = math.sqrt(P)
                xn = S * sp / (sp + math.sqrt(Q))
                if lo < xn < hi:
                    last = (P, Q)
                else:
                    xn = 0.5 * (lo + hi)
                    last = None
            else:
                xn = 0.5 * (lo + hi)
                last = None
            x = xn
        self._t3 = x
        sx = S - x
        return sum(max(mi, u / x, d / sx) for mi, u, d in zip(m, U, D)), x

    # ---- budget requirement and its t2 sensitivity

    def budget(self, t1: float, t2: float) -> tuple[float, float]:
        """(sum of minimal slots, d/dt2 of that sum) at stage targets (t1, t2)."""
        W = self.W
        p = []
        q = []
        for f, b, u, d in zip(self.F, self.B, self.U, self.D):
            if u > 0.0:
                inv = 1.0 / W
                if t1 < f + W:
                    if t1 <= f:
                        return math.inf, 0.0
                    inv = 1.0 / (t1 - f)
                p.append(u * inv)
            else:
                p.append(0.0)
            if d > 0.0:
                if t2 == math.inf:
                    q.append(0.0)
                elif t2 <= b:
                    return math.inf, 0.0
                else:
                    q.append(d / (t2 - b))
            else:
                q.append(0.0)

        if self.S is None:
            total = 0.0
            slope = 0.0
            for pi, qi, b, d in zip(p, q, self.B, self.D):
                if qi > pi:
                    total += qi
                    if t2 != math.inf:
                        slope -= d / ((t2 - b) * (t2 - b))
                else:
                    total += pi
            return total, slope
        m = [max(pi, qi) for pi, qi in zip(p, q)]
        total, t3 = self._inner_t3(m)
        sx = self.S - t3
        slope = 0.0
        if t2 != math.inf:
            for pi, qi, b, u, d in zip(p, q, self.B, self.U, self.D):
                if qi > pi and qi >= u / t3 and qi >= d / sx:
                    slope -= d / ((t2 - b) * (t2 - b))
        return total, slope

    def min_t2(self, t1: float) -> float:
        """Smallest t2 with the budget within the frame; inf if unattainable.

        Newton on the convex decreasing budget: starting left of the root
        it approaches monotonically from the infeasible side, and a start
        right of the root lands back on the left after one step.
        """
        frame = self.frame
        if self.sumD == 0.0:
            total, _ = self.budget(t1, math.inf)
            return self.maxB if total <= frame * (1.0 + 1e-12) else math.inf
        cold = self.maxB + max(d / frame for d in self.D if d > 0.0)
        t2 = self._t2 if self._t2 is not None else cold
        value, slope = self.budget(t1, t2)
        converged = False
        for _ in range(50):
            gap = value - frame
            if abs(gap) <= frame * 1e-11:
                converged = True
                break
            if gap > 0.0 and slope >= -1e-300:
                return math.inf  # budget flat but above the frame: unattainable
            if slope >= -1e-300:
                break  # below the frame on a flat stretch: t2 is small enough
            t2 = t2 - gap / slope
            value, slope = self.budget(t1, t2)
        if not converged and value > frame * (1.0 + 1e-11):
            return math.inf
        # land strictly on the feasible side of the budget
        for _ in range(40):
            value, slope = self.budget(t1, t2)
            if value <= frame * (1.0 + 1e-12):
                break
            step = (value - frame) / -slope if slope < 0.0 else t2 * 1e-12
            t2 += max(step * 1.0000001, t2 * 1e-15)
        self._t2 = t2
        return t2

    def slots(self, t1: float, t2: float) -> tuple[list[float], float, float]:
        """Per-UE minimal slots at (t1, t2); returns (g, t3, t4)."""
        W = self.W
        if self.S is None:
            t3 = W
            t4 = math.inf
        else:
            p = []
            q = []
            for f, b, u, d in zip(self.F, self.B, self.U, self.D):
                pi = 0.0
                if u > 0.0:
                    inv = max(1.0 / W, 1.0 / (t1 - f)) if t1 < f + W else 1.0 / W
                    pi = u * inv
                qi = d / (t2 - b) if (d > 0.0 and t2 > b) else 0.0
                p.append(pi)
                q.append(qi)
            _, t3 = self._inner_t3([max(a, c) for a, c in zip(p, q)])
            t4 = self.S - t3
        g = []
        for f, b, u, d in zip(self.F, self.B, self.U, self.D):
            req = 0.0
            if u > 0.0:
                req = u * max(1.0 / W, 1.0 / (t1 - f))
                if self.S is not None:
                    req = max(req, u / t3)
            if d > 0.0:
                need = d / (t2 - b)
                if t4 != math.inf:
                    need = max(need, d / t4)
                req = max(req, need)
            g.append(req)
        return g, t3, t4


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(fn, lo: float, hi: float, iterations: int):
    """Golden-section minimum of a unimodal fn on [lo, hi]."""
    a, b = lo, hi
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1 = fn(x1)
    f2 = fn(x2)
    for _ in range(iterations):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = fn(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def solve_slot_allocation(scenario: Scenario, cut: int, k: int, batch_split,
                          tolerances: SolverTolerances | None = None,
                          rates: tuple[LinkRates, ...] | None = None) -> tuple[float, ...]:
    """Slot allocation minimizing the idle stage maxima at fixed (l, k, b).

    Returns each UE's minimal feasible slot at the optimal stage targets;
    UEs without samples get a zero slot.
    """
    if rates is None:
        rates = link_rates(scenario)
    if tolerances is None:
        tolerances = SolverTolerances()
    n = scenario.num_ues
    active = _positive_indices(batch_split)
    if not active:
        raise ValueError("batch split assigns no samples to any UE")
    co = _Coeffs(scenario, cut, rates)
    frame = scenario.channel.frame_length
    total_b = sum(batch_split)

    F = [batch_split[i] * co.fwd[i] / k for i in active]
    B = [batch_split[i] * co.bwd[i] / k for i in active]
    U = [batch_split[i] * co.up[i] / k for i in active]
    D = [batch_split[i] * co.dn[i] / k for i in active]
    W = total_b * co.bs_pair / k
    problem = _SlotProblem(F, B, U, D, W, k, frame)

    floor_budget, _ = problem.budget(problem.maxF + W, math.inf)
    if floor_budget > frame * (1.0 + 1e-12):
        raise InfeasibleProblemError(
            "frame budget exhausted: even unbounded stage targets need "
            f"{floor_budget:.6g}s of slots per {frame:.6g}s frame",
            diagnostics={"min_budget": floor_budget, "frame": frame})

    if problem.sumU == 0.0:
        t1_star = problem.maxF
        t2_star = problem.min_t2(t1_star)
    else:
        lo = max(f for f, u in zip(F, U) if u > 0.0)
        hi = problem.maxF + W
        span = hi - lo
        lo_guard = lo + span * 1e-12

        def h(t1: float) -> float:
            t2 = problem.min_t2(t1)
            return t1 + t2 if t2 != math.inf else math.inf

        iterations = max(8, min(40, int(math.ceil(
            math.log(max(tolerances.convex_obj_tol * 0.01, 1e-12)) / math.log(_INVPHI)))))
        t1_star, _ = _golden_min(h, lo_guard, hi, iterations)
        t1_star = max(t1_star, problem.maxF)
        t2_star = problem.min_t2(t1_star)
    if t2_star == math.inf:
        raise InfeasibleProblemError("slot allocation failed to meet the frame budget")

    g, _, _ = problem.slots(t1_star, t2_star)
    total = sum(g)
    if total > frame * (1.0 + _REL):
        raise InfeasibleProblemError(
            f"slot allocation exceeds the frame: {total:.9g}s > {frame:.9g}s")

    tau = [0.0] * n
    zero_payload = []
    for g_i, i in zip(g, active):
        if g_i > 0.0:
            tau[i] = g_i
        else:
            zero_payload.append(i)
    if zero_payload:
        # sample-holding UEs with nothing to transmit still need a nonzero slot
        spare = max(frame - total, 0.0)
        share = spare / (2 * len(zero_payload)) if spare > 0.0 else frame * 1e-13
        for i in zero_payload:
            tau[i] = share
    return tuple(tau)


# --------------------------------------------------------------------------
# Alternating optimization


def default_decision(scenario: Scenario) -> Decision:
    """Mid-cut, single micro-batch, uniform split and slots."""
    num_layers = scenario.model.num_layers
    cut = min(max(round(num_layers / 2), 1), num_layers - 1)
    n = scenario.num_ues
    return Decision(
        cut_layer=cut,
        micro_batches=1,
        batch_split=uniform_batch_split(scenario.total_batch, n),
        slot_alloc=tuple([scenario.channel.frame_length / n] * n),
    )


def _repair_init(scenario: Scenario, rates, tolerances) -> Decision:
    n = scenario.num_ues
    tau0 = tuple([scenario.channel.frame_length / n] * n)
    failures: dict[int, str] = {}
    for cut in range(1, scenario.model.num_layers):
        try:
            b = solve_batch_partition(scenario, cut, 1, tau0, tolerances, rates)
            tau = solve_slot_allocation(scenario, cut, 1, b, tolerances, rates)
            decision = Decision(cut, 1, b, tau)
        except InfeasibleProblemError as exc:
            failures[cut] = str(exc)
            continue
        if check_constraints(scenario, decision, rates).all_passed:
            return decision
        failures[cut] = "repaired decision still violates constraints"
    raise InfeasibleProblemError(
        "scenario admits no feasible decision at any cut layer",
        diagnostics={"per_cut": failures})


def run_ao(scenario: Scenario, tolerances: SolverTolerances | None = None,
           init: Decision | None = None, max_iterations: int = 50,
           rates: tuple[LinkRates, ...] | None = None,
           variant: str = "c4") -> AOState:
    """Alternating optimization until the bubble rate stops improving.

    Each outer iteration re-solves the three subproblems; a subproblem
    result is adopted only when it keeps the decision feasible and does not
    worsen the bubble rate, so the history is non-increasing.
    """
    if rates is None:
        rates = link_rates(scenario)
    if tolerances is None:
        tolerances = SolverTolerances()
    incumbent = init if init is not None else default_decision(scenario)
    if not check_constraints(scenario, incumbent, rates).all_passed:
        incumbent = _repair_init(scenario, rates, tolerances)
    br = evaluate(scenario, incumbent, rates).bubble_rate

    history: list[tuple[int, float]] = []
    prev_br = br
    iteration = 0
    for iteration in range(1, max_iterations + 1):
        cut, k = enumerate_split(scenario, incumbent.batch_split,
                                 incumbent.slot_alloc, rates, variant)
        candidate = Decision(cut, k, incumbent.batch_split, incumbent.slot_alloc)
        cand_br = evaluate(scenario, candidate, rates).bubble_rate
        if cand_br <= br:
            incumbent, br = candidate, cand_br

        try:
            split = solve_batch_partition(scenario, incumbent.cut_layer,
                                          incumbent.micro_batches,
                                          incumbent.slot_alloc, tolerances, rates)
            positive = [b for b in split if b > 0]
            k2 = min(incumbent.micro_batches, min(positive)) if positive else 1
            candidate = Decision(incumbent.cut_layer, k2, split, incumbent.slot_alloc)
            cand_br = evaluate(scenario, candidate, rates).bubble_rate
            if cand_br <= br and check_constraints(scenario, candidate, rates).all_passed:
                incumbent, br = candidate, cand_br
        except InfeasibleProblemError:
            pass

        try:
            tau = solve_slot_allocation(scenario, incumbent.cut_layer,
                                        incumbent.micro_batches,
                                        incumbent.batch_split, tolerances, rates)
            candidate = Decision(incumbent.cut_layer, incumbent.micro_batches,
                                 incumbent.batch_split, tau)
            cand_br = evaluate(scenario, candidate, rates).bubble_rate
            if cand_br <= br and check_constraints(scenario, candidate, rates).all_passed:
                incumbent, br = candidate, cand_br
        except InfeasibleProblemError:
            pass

        history.append((iteration, br))
        if abs(prev_br - br) <= tolerances.ao_epsilon:
            break
        prev_br = br

    return AOState(iteration=iteration, decision=incumbent, bubble_rate=br,
                   history=tuple(history))
