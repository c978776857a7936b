"""Tensor vitality analysis.

Walks a trace once to decide which tensors pre-exist the iteration (global)
and which are born and die inside it, then derives per-tensor lifetimes,
inactive periods, and the GPU memory pressure curve the planner works
against. All times are integer microseconds on the single-iteration axis;
global tensors additionally get a wrapping period whose end lies in the next
replay (end_us > total_us).
"""

from __future__ import annotations

from dataclasses import dataclass

from tensortier.config import Channel, ChannelSpec, DeviceConfig, Direction
from tensortier.curve import StepCurve
from tensortier.trace import TensorKind, WorkloadTrace


@dataclass(frozen=True)
class Timeline:
    """Kernel start/end times for one iteration of the trace."""

    starts: tuple[int, ...]
    ends: tuple[int, ...]
    total_us: int

    @classmethod
    def from_trace(cls, trace: WorkloadTrace) -> "Timeline":
        starts, ends = [], []
        now = 0
        for k in trace.kernels:
            starts.append(now)
            now += k.duration_us
            ends.append(now)
        return cls(tuple(starts), tuple(ends), now)


@dataclass(frozen=True)
class TensorLifetime:
    tensor_id: int
    birth_kernel: int      # first kernel that references the tensor
    death_kernel: int      # last kernel that references it
    is_global: bool


@dataclass(frozen=True)
class InactivePeriod:
    """A span where the tensor is inactive but not dead.

    start_us is the end of the last kernel using it; end_us the start of the
    next one. For a wrapping period end_us = total_us + start(first use),
    i.e. the next use lies in the following iteration.
    """

    tensor_id: int
    start_us: int
    end_us: int
    wraps_iteration: bool = False

    def length_us(self) -> int:
        return self.end_us - self.start_us


@dataclass(frozen=True)
class VitalityAnalysis:
    trace: WorkloadTrace
    timeline: Timeline
    lifetimes: dict[int, TensorLifetime]
    periods: tuple[InactivePeriod, ...]


def _uses(trace: WorkloadTrace) -> dict[int, list[int]]:
    """Sorted kernel indices referencing each tensor."""
    uses: dict[int, list[int]] = {tid: [] for tid in trace.tensors}
    for k in trace.kernels:
        for tid in k.tensors():
            if not uses[tid] or uses[tid][-1] != k.index:
                uses[tid].append(k.index)
    return uses


def classify_tensors(trace: WorkloadTrace) -> dict[int, bool]:
    """tensor id -> is_global.

    Explicit kinds are preserved; unspecified tensors are global iff some
    kernel reads them strictly before any kernel writes them.
    """
    out = {}
    first_read: dict[int, int] = {}
    first_write: dict[int, int] = {}
    for k in trace.kernels:
        for tid in k.inputs:
            first_read.setdefault(tid, k.index)
        for tid in k.outputs:
            first_write.setdefault(tid, k.index)
    for tid, desc in trace.tensors.items():
        if desc.kind is TensorKind.GLOBAL:
            out[tid] = True
        elif desc.kind is TensorKind.INTERMEDIATE:
            out[tid] = False
        else:
            r = first_read.get(tid)
            w = first_write.get(tid)
            out[tid] = r is not None and (w is None or r < w)
    return out


def compute_lifetimes(trace: WorkloadTrace) -> dict[int, TensorLifetime]:
    kinds = classify_tensors(trace)
    uses = _uses(trace)
    out = {}
    for tid, refs in uses.items():
        if refs:
            out[tid] = TensorLifetime(tid, refs[0], refs[-1], kinds[tid])
    return out


def compute_inactive_periods(trace: WorkloadTrace,
                             timeline: Timeline) -> tuple[InactivePeriod, ...]:
    """All non-empty inactive periods, ordered by (tensor id, start)."""
    kinds = classify_tensors(trace)
    uses = _uses(trace)
    periods = []
    for tid in sorted(uses):
        refs = uses[tid]
        if not refs:
            continue
        for k1, k2 in zip(refs, refs[1:]):
            start = timeline.ends[k1]
            end = timeline.starts[k2]
            if start < end:
                periods.append(InactivePeriod(tid, start, end))
        if kinds[tid]:
            # the tensor survives into the next replay of the trace
            start = timeline.ends[refs[-1]]
            end = timeline.total_us + timeline.starts[refs[0]]
            if start < end:
                periods.append(InactivePeriod(tid, start, end, wraps_iteration=True))
    return tuple(periods)


def analyze(trace: WorkloadTrace) -> VitalityAnalysis:
    timeline = Timeline.from_trace(trace)
    return VitalityAnalysis(
        trace=trace,
        timeline=timeline,
        lifetimes=compute_lifetimes(trace),
        periods=compute_inactive_periods(trace, timeline),
    )


def initial_pressure_curve(analysis: VitalityAnalysis,
                           config: DeviceConfig) -> StepCurve:
    """GPU memory pressure with no migrations planned.

    A tensor occupies memory from the start of its birth kernel to the end of
    its death kernel; global tensors span the whole iteration. Sizes are
    padded to whole pages.
    """
    timeline = analysis.timeline
    curve = StepCurve(timeline.total_us)
    for life in analysis.lifetimes.values():
        size = config.padded(analysis.trace.tensors[life.tensor_id].size_bytes)
        if life.is_global:
            curve.add(0, timeline.total_us, size)
        else:
            curve.add(timeline.starts[life.birth_kernel],
                      timeline.ends[life.death_kernel], size)
    return curve


def transfer_time(size_bytes: int, spec: ChannelSpec, direction: Direction) -> int:
    """Latency plus ceil(size / bandwidth), in whole microseconds."""
    bw = spec.bw(direction)
    return spec.latency(direction) + -(-size_bytes // bw)


@dataclass(frozen=True)
class KernelOccupancy:
    kernel_index: int
    name: str
    active_bytes: int     # inputs + outputs of the kernel itself
    total_bytes: int      # everything live while it runs

    def active_fraction(self) -> float:
        return self.active_bytes / self.total_bytes if self.total_bytes else 0.0


@dataclass(frozen=True)
class CharacterizationReport:
    occupancy: tuple[KernelOccupancy, ...]
    periods: tuple[InactivePeriod, ...]


def characterize(analysis: VitalityAnalysis,
                 config: DeviceConfig) -> CharacterizationReport:
    """Active-vs-total bytes per kernel plus the period population."""
    trace = analysis.trace
    curve = initial_pressure_curve(analysis, config)
    rows = []
    for k in trace.kernels:
        active = sum(config.padded(trace.tensors[t].size_bytes) for t in k.tensors())
        total = curve.max_over(analysis.timeline.starts[k.index],
                               analysis.timeline.ends[k.index])
        rows.append(KernelOccupancy(k.index, k.name, active, total))
    return CharacterizationReport(tuple(rows), analysis.periods)
