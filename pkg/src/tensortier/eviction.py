"""Greedy eviction scheduling.

Repeatedly scores every remaining inactive period, picks the candidate with
the best benefit/cost ratio, and books its eviction and prefetch windows on
the channel lanes. Benefit is the pressure-above-capacity area the freed
interval removes; cost is the two transfer times. Iteration stops once the
pressure curve fits GPU memory, no candidate helps, or periods run out.

Times on the unrolled axis: a wrapping period's prefetch lands in the next
iteration's prefix (window values >= total_us map into [0, total) mod total).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

from tensortier.config import Channel, DeviceConfig, Direction
from tensortier.curve import (StepCurve, wrap_add, wrap_max, wrap_pieces,
                              wrap_window_overflow_area)
from tensortier.reservations import ChannelReservations
from tensortier.vitality import (InactivePeriod, VitalityAnalysis,
                                 initial_pressure_curve, transfer_time)


class CapacityViolationError(RuntimeError):
    """Internal guard: applying a candidate would break a state invariant."""


class Destination(enum.Enum):
    SSD = "ssd"
    HOST = "host"

    @property
    def channel(self) -> Channel:
        return Channel.SSD if self is Destination.SSD else Channel.HOST


@dataclass(frozen=True)
class EvictionCandidate:
    period: InactivePeriod
    size_bytes: int          # page-padded
    dest: Destination
    evict_start: int
    evict_end: int
    prefetch_start: int      # unrolled (>= total_us when the period wraps)
    prefetch_end: int
    benefit: int             # byte*us of overflow removed by the freed interval
    cost_us: int

    def owner(self):
        return (self.period.tensor_id, self.period.start_us)


@dataclass
class PlanItem:
    tensor_id: int
    period_start: int
    period_end: int
    wraps: bool
    dest: Destination
    evict_start: int
    evict_end: int
    prefetch_start: int
    prefetch_end: int
    benefit: int
    cost_us: int
    latest_safe_us: int | None = None
    scheduled_us: int | None = None

    def owner(self):
        return (self.tensor_id, self.period_start)


@dataclass
class MigrationPlan:
    total_us: int
    items: list[PlanItem] = field(default_factory=list)
    residual_overflow: int = 0
    unschedulable: list[tuple[int, int, int]] = field(default_factory=list)
    infeasible: bool = False


@dataclass
class SchedulerState:
    """Planner bookkeeping shared by the eviction and prefetch stages."""

    total_us: int
    pressure: StepCurve
    reservations: ChannelReservations
    host_occupancy: StepCurve
    ssd_occupancy: int = 0


@dataclass
class SchedulingResult:
    plan: MigrationPlan
    state: SchedulerState


def score_candidate(period: InactivePeriod, size: int, dest: Destination,
                    state: SchedulerState, config: DeviceConfig):
    """Windows, benefit, and cost for evicting this period to dest.

    Returns None when no feasible eviction/prefetch window pair exists (or a
    capacity bound already rules the destination out).
    """
    total = state.total_us
    spec = config.channel(dest.channel)
    e_dur = transfer_time(size, spec, Direction.FROM_DEVICE)
    p_dur = transfer_time(size, spec, Direction.TO_DEVICE)
    from_lane = state.reservations.lane(dest.channel, Direction.FROM_DEVICE)
    to_lane = state.reservations.lane(dest.channel, Direction.TO_DEVICE)

    if period.wraps_iteration:
        # eviction completes inside this iteration, prefetch lands entirely
        # in the next iteration's prefix
        e0 = from_lane.earliest_slot(e_dur, period.start_us, hi=total)
        if e0 is None:
            return None
        deadline_rel = period.end_us - total
        p0_rel = to_lane.latest_slot(p_dur, deadline_rel)
        if p0_rel is None:
            return None
        p0 = p0_rel + total
    else:
        e0 = from_lane.earliest_slot(e_dur, period.start_us)
        p0 = to_lane.latest_slot(p_dur, period.end_us)
        if p0 is None:
            return None
    e1 = e0 + e_dur
    if e1 > p0:
        return None

    if dest is Destination.HOST:
        if wrap_max(state.host_occupancy, e1, p0) + size > config.host_mem_bytes:
            return None
    else:
        if state.ssd_occupancy + size > config.ssd_capacity_bytes:
            return None

    benefit = wrap_window_overflow_area(state.pressure, config.gpu_mem_bytes,
                                        size, e1, p0)
    return EvictionCandidate(period, size, dest, e0, e1, p0, p0 + p_dur,
                             benefit, e_dur + p_dur)


def _ssd_utilization_high(period: InactivePeriod, state: SchedulerState,
                          config: DeviceConfig) -> bool:
    """Is either SSD lane busier than the threshold inside the period?"""
    window = period.end_us - period.start_us
    if window <= 0:
        return False
    pieces = wrap_pieces(period.start_us, period.end_us, state.total_us)
    for direction in Direction:
        lane = state.reservations.lane(Channel.SSD, direction)
        busy = sum(lane.busy_within(a, b) for a, b in pieces)
        if busy > config.hp_utilization_threshold * window:
            return True
    return False


def choose_destination(period: InactivePeriod, size: int,
                       state: SchedulerState, config: DeviceConfig,
                       allow_host: bool = True):
    """SSD first; fall back to host when the SSD route is under pressure.

    High pressure means: no feasible SSD windows, a freed interval that no
    longer removes any overflow (zero benefit), or SSD-lane utilization in
    the period beyond the threshold. Returns None when the period cannot be
    scheduled anywhere (drop).
    """
    ssd = score_candidate(period, size, Destination.SSD, state, config)
    high_pressure = (ssd is None or ssd.benefit == 0
                     or _ssd_utilization_high(period, state, config))
    if not high_pressure or not allow_host:
        return ssd
    host = score_candidate(period, size, Destination.HOST, state, config)
    return host if host is not None else ssd


def _better(a: EvictionCandidate, b: EvictionCandidate) -> bool:
    """Strictly better benefit/cost ratio, with deterministic tie-breaks."""
    lhs = a.benefit * b.cost_us
    rhs = b.benefit * a.cost_us
    if lhs != rhs:
        return lhs > rhs
    if a.benefit != b.benefit:
        return a.benefit > b.benefit
    if a.period.start_us != b.period.start_us:
        return a.period.start_us < b.period.start_us
    return a.period.tensor_id < b.period.tensor_id


def select_best(candidates) -> EvictionCandidate:
    """Argmax of benefit/cost; ties break to larger benefit, earlier period
    start, then smaller tensor id."""
    best = None
    for cand in candidates:
        if best is None or _better(cand, best):
            best = cand
    if best is None:
        raise ValueError("select_best on empty candidate list")
    return best


def apply_candidate(cand: EvictionCandidate, state: SchedulerState,
                    config: DeviceConfig) -> None:
    """Book the windows and update pressure and occupancy."""
    total = state.total_us
    owner = cand.owner()
    chan = cand.dest.channel
    state.reservations.lane(chan, Direction.FROM_DEVICE).reserve(
        cand.evict_start, cand.evict_end, owner)
    if cand.prefetch_start >= total:
        state.reservations.lane(chan, Direction.TO_DEVICE).reserve(
            cand.prefetch_start - total, cand.prefetch_end - total, owner)
    else:
        state.reservations.lane(chan, Direction.TO_DEVICE).reserve(
            cand.prefetch_start, cand.prefetch_end, owner)
    wrap_add(state.pressure, cand.evict_end, cand.prefetch_start, -cand.size_bytes)
    if any(v < 0 for _, v in state.pressure.breakpoints()):
        raise CapacityViolationError("negative pressure after apply")
    if cand.dest is Destination.HOST:
        wrap_add(state.host_occupancy, cand.evict_end, cand.prefetch_start,
                 cand.size_bytes)
        if state.host_occupancy.max_value() > config.host_mem_bytes:
            raise CapacityViolationError("host occupancy above host_mem_bytes")
    else:
        state.ssd_occupancy += cand.size_bytes
        if state.ssd_occupancy > config.ssd_capacity_bytes:
            raise CapacityViolationError("ssd occupancy above capacity")


def item_from_candidate(cand: EvictionCandidate) -> PlanItem:
    return PlanItem(
        tensor_id=cand.period.tensor_id,
        period_start=cand.period.start_us,
        period_end=cand.period.end_us,
        wraps=cand.period.wraps_iteration,
        dest=cand.dest,
        evict_start=cand.evict_start,
        evict_end=cand.evict_end,
        prefetch_start=cand.prefetch_start,
        prefetch_end=cand.prefetch_end,
        benefit=cand.benefit,
        cost_us=cand.cost_us,
    )


def _windows_overlap(pa: InactivePeriod, pb: InactivePeriod, total: int) -> bool:
    """Circular overlap of two period windows on the iteration axis."""
    for a0, a1 in wrap_pieces(pa.start_us, pa.end_us, total):
        for b0, b1 in wrap_pieces(pb.start_us, pb.end_us, total):
            if a0 < b1 and b0 < a1:
                return True
    return False


def schedule_evictions(analysis: VitalityAnalysis, config: DeviceConfig, *,
                       allow_host: bool = True,
                       use_cache: bool = True) -> SchedulingResult:
    """Iterative greedy selection over all inactive periods."""
    total = analysis.timeline.total_us
    state = SchedulerState(
        total_us=total,
        pressure=initial_pressure_curve(analysis, config),
        reservations=ChannelReservations(),
        host_occupancy=StepCurve(total),
    )
    plan = MigrationPlan(total_us=total)

    remaining = {
        (p.tensor_id, p.start_us): p
        for p in sorted(analysis.periods,
                        key=lambda p: (p.start_us, p.tensor_id, p.end_us))
    }
    sizes = {tid: config.padded(t.size_bytes)
             for tid, t in analysis.trace.tensors.items()}
    cache: dict[tuple[int, int], EvictionCandidate | None] = {}

    while remaining and state.pressure.max_value() > config.gpu_mem_bytes:
        candidates = []
        dropped = []
        for key, period in remaining.items():
            if key in cache:
                cand = cache[key]
            else:
                cand = choose_destination(period, sizes[period.tensor_id],
                                          state, config, allow_host)
                cache[key] = cand
            if cand is None:
                dropped.append(key)
            else:
                candidates.append(cand)
        for key in dropped:
            period = remaining.pop(key)
            plan.unschedulable.append((period.tensor_id, period.start_us,
                                       period.end_us))
            del cache[key]

        useful = [c for c in candidates if c.benefit > 0]
        if not useful:
            break
        best = select_best(useful)
        apply_candidate(best, state, config)
        plan.items.append(item_from_candidate(best))
        del remaining[best.owner()]
        del cache[best.owner()]
        if not use_cache:
            cache.clear()
            continue
        # Booked windows and the pressure delta lie inside the picked
        # period's circular window, so entries elsewhere stay valid. The
        # SSD byte count is global state, so recheck that bound too.
        stale = [key for key, cand in cache.items()
                 if _windows_overlap(remaining[key], best.period, total)
                 or (cand is not None and cand.dest is Destination.SSD
                     and state.ssd_occupancy + cand.size_bytes
                     > config.ssd_capacity_bytes)]
        for key in stale:
            del cache[key]

    plan.residual_overflow = state.pressure.overflow_area(config.gpu_mem_bytes)
    return SchedulingResult(plan=plan, state=state)


def plan_to_json(plan: MigrationPlan) -> str:
    doc = {
        "evictions": [
            {
                "tensor_id": it.tensor_id,
                "period": [it.period_start, it.period_end],
                "wraps": it.wraps,
                "dest": it.dest.value,
                "evict": [it.evict_start, it.evict_end],
                "prefetch": [it.prefetch_start, it.prefetch_end],
                "benefit": it.benefit,
                "cost_us": it.cost_us,
                "latest_safe_us": it.latest_safe_us,
                "scheduled_us": it.scheduled_us,
            }
            for it in plan.items
        ],
        "residual_overflow": plan.residual_overflow,
        "unschedulable": [
            {"tensor_id": tid, "period": [s, e]}
            for tid, s, e in plan.unschedulable
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def plan_from_json(raw: str | bytes, total_us: int) -> MigrationPlan:
    doc = json.loads(raw)
    plan = MigrationPlan(total_us=total_us)
    for ev in doc["evictions"]:
        plan.items.append(PlanItem(
            tensor_id=ev["tensor_id"],
            period_start=ev["period"][0],
            period_end=ev["period"][1],
            wraps=ev["wraps"],
            dest=Destination(ev["dest"]),
            evict_start=ev["evict"][0],
            evict_end=ev["evict"][1],
            prefetch_start=ev["prefetch"][0],
            prefetch_end=ev["prefetch"][1],
            benefit=ev["benefit"],
            cost_us=ev["cost_us"],
            latest_safe_us=ev["latest_safe_us"],
            scheduled_us=ev["scheduled_us"],
        ))
    plan.residual_overflow = doc["residual_overflow"]
    plan.unschedulable = [(u["tensor_id"], u["period"][0], u["period"][1])
                          for u in doc["unschedulable"]]
    return plan
