"""Instruction stream emission.

Flattens a migration plan onto the kernel sequence as a text program: one
KERNEL line per kernel plus G10 directives (alloc, free, pre_evict,
prefetch) placed in the gaps between kernels. Allocations sit before the
kernel that writes the tensor, frees after the kernel that last uses it,
pre-evictions after the last kernel to finish before the transfer starts,
and prefetches before the kernel that needs the tensor back. Issue tags
(@t) carry the planned start times, folded into one iteration.

Sizes in the text are the raw tensor sizes; page rounding is an engine
concern.
"""

from __future__ import annotations

import bisect
import enum
from dataclasses import dataclass

from tensortier.eviction import Destination, MigrationPlan
from tensortier.trace import WorkloadTrace
from tensortier.vitality import Timeline, compute_lifetimes


class InconsistentPlanError(ValueError):
    """Plan references times or tensors the trace cannot anchor."""


class ProgramParseError(ValueError):
    pass


class Op(enum.Enum):
    ALLOC = "alloc"
    FREE = "free"
    PREFETCH = "prefetch"
    PRE_EVICT = "pre_evict"


# tie order for instructions sharing an issue time in one gap
_PRECEDENCE = {Op.FREE: 0, Op.PRE_EVICT: 1, Op.ALLOC: 2, Op.PREFETCH: 3}


@dataclass(frozen=True)
class MigrationInstruction:
    op: Op
    tensor_id: int
    size_bytes: int
    issue_us: int
    dest: Destination | None = None   # pre_evict only

    def line(self) -> str:
        if self.op is Op.PRE_EVICT:
            return (f"G10 {self.op.value} {self.tensor_id} {self.size_bytes} "
                    f"{self.dest.value} @{self.issue_us}")
        return (f"G10 {self.op.value} {self.tensor_id} {self.size_bytes} "
                f"@{self.issue_us}")


@dataclass(frozen=True)
class ProgramKernel:
    index: int
    name: str
    duration_us: int

    def line(self) -> str:
        return f"KERNEL {self.index} {self.name} {self.duration_us}"


@dataclass(frozen=True)
class Program:
    """n kernels and n+1 gaps; gap k precedes kernel k."""

    kernels: tuple[ProgramKernel, ...]
    gaps: tuple[tuple[MigrationInstruction, ...], ...]

    def __post_init__(self):
        if len(self.gaps) != len(self.kernels) + 1:
            raise InconsistentPlanError("gap count must be kernel count + 1")

    def instructions(self):
        for gap in self.gaps:
            yield from gap

    def validate_alternation(self) -> None:
        """Each tensor's pre_evict and prefetch directives must alternate
        when the program is read as one turn of a repeating loop. A prefetch
        may precede its pre_evict in stream order: that is a transfer folded
        across the iteration boundary."""
        ops: dict[int, list[Op]] = {}
        for ins in self.instructions():
            if ins.op in (Op.PRE_EVICT, Op.PREFETCH):
                ops.setdefault(ins.tensor_id, []).append(ins.op)
        for tid, seq in ops.items():
            if Op.PRE_EVICT not in seq:
                raise InconsistentPlanError(
                    f"tensor {tid}: prefetch without pre_evict")
            first = seq.index(Op.PRE_EVICT)
            rotated = seq[first:] + seq[:first]
            for pos, op in enumerate(rotated):
                want = Op.PRE_EVICT if pos % 2 == 0 else Op.PREFETCH
                if op is not want:
                    raise InconsistentPlanError(
                        f"tensor {tid}: out-of-order migration directives")
            if len(rotated) % 2:
                raise InconsistentPlanError(
                    f"tensor {tid}: pre_evict without matching prefetch")


def _sorted_gap(instructions) -> tuple[MigrationInstruction, ...]:
    return tuple(sorted(instructions,
                        key=lambda i: (i.issue_us, _PRECEDENCE[i.op],
                                       i.tensor_id)))


def emit_program(trace: WorkloadTrace, plan: MigrationPlan) -> Program:
    timeline = Timeline.from_trace(trace)
    total = timeline.total_us
    if plan.total_us != total:
        raise InconsistentPlanError("plan and trace disagree on iteration length")
    n = len(trace.kernels)
    gaps: list[list[MigrationInstruction]] = [[] for _ in range(n + 1)]
    start_index = {timeline.starts[k]: k for k in range(n)}

    for life in compute_lifetimes(trace).values():
        tensor = trace.tensors[life.tensor_id]
        if life.is_global:
            gaps[0].append(MigrationInstruction(
                Op.ALLOC, tensor.id, tensor.size_bytes, 0))
            continue
        gaps[life.birth_kernel].append(MigrationInstruction(
            Op.ALLOC, tensor.id, tensor.size_bytes,
            timeline.starts[life.birth_kernel]))
        gaps[life.death_kernel + 1].append(MigrationInstruction(
            Op.FREE, tensor.id, tensor.size_bytes,
            timeline.ends[life.death_kernel]))

    for item in plan.items:
        if item.tensor_id not in trace.tensors:
            raise InconsistentPlanError(f"plan tensor {item.tensor_id} not in trace")
        size = trace.tensors[item.tensor_id].size_bytes
        # after the last kernel already finished when the eviction starts
        k = bisect.bisect_right(timeline.ends, item.evict_start)
        if k == 0:
            raise InconsistentPlanError(
                f"eviction at {item.evict_start} precedes every kernel end")
        gaps[k].append(MigrationInstruction(
            Op.PRE_EVICT, item.tensor_id, size, item.evict_start,
            dest=item.dest))

        consumer_start = item.period_end - total if item.wraps else item.period_end
        consumer = start_index.get(consumer_start)
        if consumer is None:
            raise InconsistentPlanError(
                f"no kernel starts at {consumer_start} for tensor {item.tensor_id}")
        issue = item.scheduled_us
        if issue is None:
            raise InconsistentPlanError("plan item missing a scheduled time")
        if issue >= total:
            issue -= total
        gaps[consumer].append(MigrationInstruction(
            Op.PREFETCH, item.tensor_id, size, issue))

    kernels = tuple(ProgramKernel(k.index, k.name, k.duration_us)
                    for k in trace.kernels)
    return Program(kernels, tuple(_sorted_gap(g) for g in gaps))


def serialize_program(program: Program) -> str:
    lines = []
    for k, kernel in enumerate(program.kernels):
        lines.extend(ins.line() for ins in program.gaps[k])
        lines.append(kernel.line())
    lines.extend(ins.line() for ins in program.gaps[-1])
    return "\n".join(lines) + "\n"


def _parse_int(token: str, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ProgramParseError(f"bad {what}: {token!r}") from None


def parse_program(raw: str | bytes) -> Program:
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    kernels: list[ProgramKernel] = []
    gaps: list[list[MigrationInstruction]] = [[]]
    for lineno, line in enumerate(raw.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "KERNEL":
            if len(parts) < 4:
                raise ProgramParseError(f"line {lineno}: short KERNEL line")
            index = _parse_int(parts[1], "kernel index")
            if index != len(kernels):
                raise ProgramParseError(
                    f"line {lineno}: kernel index {index}, expected {len(kernels)}")
            duration = _parse_int(parts[-1], "duration")
            kernels.append(ProgramKernel(index, " ".join(parts[2:-1]), duration))
            gaps.append([])
        elif parts[0] == "G10":
            if len(parts) < 5 or not parts[-1].startswith("@"):
                raise ProgramParseError(f"line {lineno}: malformed directive")
            try:
                op = Op(parts[1])
            except ValueError:
                raise ProgramParseError(
                    f"line {lineno}: unknown op {parts[1]!r}") from None
            dest = None
            if op is Op.PRE_EVICT:
                if len(parts) != 6:
                    raise ProgramParseError(f"line {lineno}: pre_evict needs a target")
                try:
                    dest = Destination(parts[4])
                except ValueError:
                    raise ProgramParseError(
                        f"line {lineno}: unknown target {parts[4]!r}") from None
            elif len(parts) != 5:
                raise ProgramParseError(f"line {lineno}: malformed directive")
            gaps[-1].append(MigrationInstruction(
                op, _parse_int(parts[2], "tensor id"),
                _parse_int(parts[3], "size"),
                _parse_int(parts[-1][1:], "issue time"), dest=dest))
        else:
            raise ProgramParseError(f"line {lineno}: unknown record {parts[0]!r}")
    return Program(tuple(kernels), tuple(tuple(g) for g in gaps))
