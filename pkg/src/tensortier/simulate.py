"""Discrete-event execution of an instrumented program on the memory tiers.

One compute stream walks the program: allocations and frees run at their
stream position, kernels run when every tensor they touch is on device.
Migration directives are armed when their iteration begins and fire at
their planned absolute times (never earlier), joining the per-channel,
per-direction transfer lanes. A kernel that needs a tensor with a transfer
already pending simply waits for it; a kernel that needs a tensor nobody is
moving takes a demand fault, serviced in pinned-memory-sized chunks with a
fixed handling overhead per chunk, queued at the head of the inbound lane.

GPU bytes are charged when an inbound transfer starts and released when an
outbound transfer finishes, mirroring the planner's accounting. All engine
arithmetic uses page-padded sizes.
"""

from __future__ import annotations

import hashlib
import heapq
import random
from collections import deque
from dataclasses import dataclass, field

from tensortier.config import Channel, DeviceConfig, Direction
from tensortier.eviction import Destination
from tensortier.instrument import Op, Program
from tensortier.trace import WorkloadTrace
from tensortier.vitality import transfer_time


class SimulationError(RuntimeError):
    """The machine cannot make progress (e.g. a working set over capacity)."""


class ProgramInconsistentError(ValueError):
    """Program and trace disagree."""


GPU = "gpu"
HOST = "host"
SSD = "ssd"

_LOC_CHANNEL = {HOST: Channel.HOST, SSD: Channel.SSD}

# heap ranks: transfer completions resolve first, then armed directives,
# then the compute stream
_R_COMPLETE = 0
_R_TRIGGER = 1
_R_STREAM = 2


@dataclass
class Traffic:
    ssd_read: int = 0
    ssd_write: int = 0
    host_in: int = 0
    host_out: int = 0


@dataclass(frozen=True)
class KernelStat:
    instance: int
    iteration: int
    kernel_index: int
    name: str
    start_us: int
    end_us: int
    stall_us: int


@dataclass
class SimResult:
    policy: str
    total_us: int
    compute_us: int
    stall_us: int
    overlap_us: int
    faults: int
    traffic: Traffic
    kernels: list[KernelStat]
    stall_breakdown: dict[str, int]
    fault_log: list[tuple[int, int, int]]   # (iteration, kernel, tensor)
    event_log_sha256: str
    events: list[str] | None = None


class _Tensor:
    __slots__ = ("id", "size", "loc", "pending_in", "pending_out",
                 "last_use", "retry_fetch")

    def __init__(self, tid: int, size: int):
        self.id = tid
        self.size = size                 # padded
        self.loc: str | None = None
        self.pending_in = False
        self.pending_out = False
        self.last_use = -1
        self.retry_fetch = None          # directive to re-arm after evict lands

    @property
    def resident(self) -> bool:
        return self.loc == GPU and not self.pending_out


class _Xfer:
    __slots__ = ("tensor", "channel", "direction", "nbytes", "kind",
                 "extra_us", "tail_bytes", "need", "evict_for_space",
                 "dest_loc")

    def __init__(self, tensor: _Tensor, channel: Channel, direction: Direction,
                 nbytes: int, kind: str, *, extra_us: int = 0,
                 tail_bytes: int = 0, need: int = 0,
                 evict_for_space: bool = False, dest_loc: str | None = None):
        self.tensor = tensor
        self.channel = channel
        self.direction = direction
        self.nbytes = nbytes
        self.kind = kind                 # prefetch | evict | fault
        self.extra_us = extra_us
        self.tail_bytes = tail_bytes     # fault bytes still to move after this
        self.need = need                 # GPU bytes to reserve at lane head
        self.evict_for_space = evict_for_space
        self.dest_loc = dest_loc


class _Lane:
    __slots__ = ("channel", "direction", "spec", "queue", "current", "ends_at",
                 "started_at")

    def __init__(self, channel: Channel, direction: Direction, spec):
        self.channel = channel
        self.direction = direction
        self.spec = spec
        self.queue: deque[_Xfer] = deque()
        self.current: _Xfer | None = None
        self.ends_at = 0
        self.started_at = 0

    def duration(self, xfer: _Xfer) -> int:
        return transfer_time(xfer.nbytes, self.spec, self.direction) + xfer.extra_us


class _Engine:
    def __init__(self, trace: WorkloadTrace, program: Program,
                 config: DeviceConfig, *, policy: str,
                 durations=None, initial_locations=None,
                 allow_host_fallback: bool = True,
                 on_kernel_start=None, keep_events: bool = False):
        _check_program(trace, program)
        self.trace = trace
        self.program = program
        self.config = config
        self.policy = policy
        self.allow_host_fallback = allow_host_fallback
        self.on_kernel_start = on_kernel_start
        self.keep_events = keep_events

        n = len(program.kernels)
        self.iterations = config.num_iterations
        if durations is None:
            durations = [[k.duration_us for k in program.kernels]
                         for _ in range(self.iterations)]
        if (len(durations) != self.iterations
                or any(len(row) != n for row in durations)):
            raise ProgramInconsistentError("durations shape mismatch")
        self.durations = durations

        self.tensors = {tid: _Tensor(tid, config.padded(t.size_bytes))
                        for tid, t in trace.tensors.items()}
        for kernel in trace.kernels:
            need = sum(self.tensors[tid].size for tid in kernel.tensors())
            if need > config.gpu_mem_bytes:
                raise SimulationError(
                    f"kernel {kernel.index} working set ({need} bytes) "
                    f"cannot fit in GPU memory")
        self.free = config.gpu_mem_bytes
        self.host_used = 0
        self.ssd_used = 0
        for tid, loc in sorted((initial_locations or {}).items()):
            tensor = self.tensors[tid]
            tensor.loc = loc
            if loc == GPU:
                if tensor.size > self.free:
                    raise SimulationError("initial placement over GPU capacity")
                self.free -= tensor.size
            elif loc == HOST:
                self.host_used += tensor.size
            elif loc == SSD:
                self.ssd_used += tensor.size
            else:
                raise ValueError(f"bad initial location {loc!r}")

        self.lanes = [
            _Lane(ch, d, config.channel(ch))
            for ch in (Channel.HOST, Channel.SSD) for d in Direction
        ]
        self._lane_map = {(l.channel, l.direction): l for l in self.lanes}
        self.parked: list[_Xfer] = []

        self.now = 0
        self.events: list = []
        self._seq = 0
        self._advance_armed = False

        # stream cursor: per-iteration flat list of alloc/free/kernel steps
        self.stream = _flatten(program)
        self.iter_index = 0
        self.pos = 0
        self.iter_started = False
        self.running = None              # (kernel_index, end_us, active set, defers)
        self.block_started: int | None = None
        self.block_cause = "none"
        self.finished = False
        self.last_kernel_end = 0

        self.traffic = Traffic()
        self.kernel_stats: list[KernelStat] = []
        self.kernel_spans: list[tuple[int, int]] = []
        self.fault_log: list[tuple[int, int, int]] = []
        self.faults = 0
        self.overlap_us = 0
        self.stall_breakdown: dict[str, int] = {}
        self._hash = hashlib.sha256()
        self._event_lines: list[str] | None = [] if keep_events else None
        self.prev_end = 0                # end of previous kernel instance

    # -- event plumbing -----------------------------------------------------

    def _push(self, t: int, rank: int, fn, *args) -> None:
        self._seq += 1
        heapq.heappush(self.events, (t, rank, self._seq, fn, args))

    def _log(self, text: str) -> None:
        line = f"{self.now} {text}"
        self._hash.update(line.encode())
        self._hash.update(b"\n")
        if self._event_lines is not None:
            self._event_lines.append(line)

    def _arm_advance(self, cause: str) -> None:
        if not self._advance_armed and not self.finished:
            self._advance_armed = True
            self._push(self.now, _R_STREAM, self._advance_event, cause)

    def _advance_event(self, cause: str) -> None:
        self._advance_armed = False
        self._advance(cause)

    # -- lanes --------------------------------------------------------------

    def lane(self, channel: Channel, direction: Direction) -> _Lane:
        return self._lane_map[(channel, direction)]

    def _kick(self, lane: _Lane) -> None:
        while lane.current is None and lane.queue:
            head = lane.queue[0]
            if head.need:
                if head.need > self.free:
                    if head.evict_for_space:
                        self._lru_evict(head.need - self.free, cause="prefetch")
                    lane.queue.popleft()
                    self.parked.append(head)
                    self._log(f"park {head.kind} t{head.tensor.id}")
                    continue
                self.free -= head.need
                head.need = 0
            lane.queue.popleft()
            lane.current = head
            lane.started_at = self.now
            lane.ends_at = self.now + lane.duration(head)
            self._log(f"xfer_start {head.kind} t{head.tensor.id} "
                      f"{head.channel.value}/{head.direction.value} {head.nbytes}")
            self._push(lane.ends_at, _R_COMPLETE, self._complete, lane)
            return

    def _complete(self, lane: _Lane) -> None:
        xfer = lane.current
        lane.current = None
        tensor = xfer.tensor
        self._count_traffic(xfer)
        self._add_overlap(lane.started_at, self.now)
        self._log(f"xfer_done {xfer.kind} t{tensor.id}")

        freed = False
        if xfer.direction is Direction.FROM_DEVICE:
            self.free += tensor.size
            tensor.loc = xfer.dest_loc
            tensor.pending_out = False
            if xfer.dest_loc == HOST:
                self.host_used += tensor.size
            else:
                self.ssd_used += tensor.size
            freed = True
            if tensor.retry_fetch is not None:
                directive, iteration = tensor.retry_fetch
                tensor.retry_fetch = None
                self._trigger(directive, iteration)
        elif xfer.tail_bytes:
            # next fault chunk keeps the lane head
            nb = min(self.config.fault_chunk_bytes, xfer.tail_bytes)
            lane.queue.appendleft(_Xfer(
                tensor, xfer.channel, xfer.direction, nb, xfer.kind,
                extra_us=xfer.extra_us, tail_bytes=xfer.tail_bytes - nb))
        else:
            if tensor.loc == HOST:
                self.host_used -= tensor.size
            elif tensor.loc == SSD:
                self.ssd_used -= tensor.size
            tensor.loc = GPU
            tensor.pending_in = False

        if freed:
            self._unpark()
        self._kick(lane)
        self._arm_advance(xfer.kind)

    def _unpark(self) -> None:
        if not self.parked:
            return
        waiting, self.parked = self.parked, []
        by_lane: dict[tuple, list[_Xfer]] = {}
        for xfer in waiting:
            by_lane.setdefault((xfer.channel, xfer.direction), []).append(xfer)
        for key, items in by_lane.items():
            self._lane_map[key].queue.extendleft(reversed(items))
        for lane in self.lanes:
            self._kick(lane)

    def _count_traffic(self, xfer: _Xfer) -> None:
        if xfer.channel is Channel.SSD:
            if xfer.direction is Direction.TO_DEVICE:
                self.traffic.ssd_read += xfer.nbytes
            else:
                self.traffic.ssd_write += xfer.nbytes
        else:
            if xfer.direction is Direction.TO_DEVICE:
                self.traffic.host_in += xfer.nbytes
            else:
                self.traffic.host_out += xfer.nbytes

    def _add_overlap(self, start: int, end: int) -> None:
        for k_start, k_end in reversed(self.kernel_spans):
            if k_end <= start:
                break
            lo = max(start, k_start)
            hi = min(end, k_end)
            if lo < hi:
                self.overlap_us += hi - lo
        if self.running is not None:
            lo = max(start, self.running["start"])
            if lo < end:
                self.overlap_us += end - lo

    # -- migrations ----------------------------------------------------------

    def _enqueue_fetch(self, tensor: _Tensor, kind: str, *,
                       front: bool = False, evict_for_space: bool = False) -> None:
        channel = _LOC_CHANNEL[tensor.loc]
        lane = self.lane(channel, Direction.TO_DEVICE)
        tensor.pending_in = True
        if kind == "fault":
            nb = min(self.config.fault_chunk_bytes, tensor.size)
            lane.queue.appendleft(_Xfer(
                tensor, channel, Direction.TO_DEVICE, nb, "fault",
                extra_us=self.config.fault_handling_us,
                tail_bytes=tensor.size - nb, need=tensor.size))
        else:
            xfer = _Xfer(tensor, channel, Direction.TO_DEVICE, tensor.size,
                         kind, need=tensor.size, evict_for_space=evict_for_space)
            if front:
                lane.queue.appendleft(xfer)
            else:
                lane.queue.append(xfer)
        self._kick(lane)

    def _enqueue_evict(self, tensor: _Tensor, dest_loc: str, kind: str, *,
                       front: bool = False) -> None:
        channel = _LOC_CHANNEL[dest_loc]
        lane = self.lane(channel, Direction.FROM_DEVICE)
        tensor.pending_out = True
        xfer = _Xfer(tensor, channel, Direction.FROM_DEVICE, tensor.size,
                     kind, dest_loc=dest_loc)
        if front:
            lane.queue.appendleft(xfer)
        else:
            lane.queue.append(xfer)
        self._kick(lane)

    def _fallback_dest(self, tensor: _Tensor) -> str:
        if (self.allow_host_fallback
                and self.host_used + tensor.size <= self.config.host_mem_bytes):
            return HOST
        if self.ssd_used + tensor.size > self.config.ssd_capacity_bytes:
            raise SimulationError("no tier can hold the evicted tensor")
        return SSD

    def _lru_evict(self, deficit: int, cause: str) -> bool:
        """Queue least-recently-used victims worth at least deficit bytes.

        Returns True if enough bytes are already on their way out (counting
        transfers queued before this call)."""
        pinned = set()
        if self.running is not None:
            pinned |= self.running["tensors"]
        item = self.stream[self.pos] if self.pos < len(self.stream) else None
        if item is not None and item[0] == "kernel":
            pinned |= self.trace.kernels[item[1]].tensors()

        outgoing = sum(t.size for t in self.tensors.values() if t.pending_out)
        if outgoing >= deficit:
            return True
        victims = sorted(
            (t for t in self.tensors.values()
             if t.resident and not t.pending_in and t.id not in pinned),
            key=lambda t: (t.last_use, t.id))
        for victim in victims:
            if outgoing >= deficit:
                break
            self._log(f"lru_evict t{victim.id} cause {cause}")
            self._enqueue_evict(victim, self._fallback_dest(victim),
                                "evict", front=True)
            outgoing += victim.size
        return outgoing >= deficit

    # -- armed directives ----------------------------------------------------

    def _arm_iteration(self, iteration: int) -> None:
        # issue times are offsets into the iteration; anchoring them to the
        # actual start keeps the planned stagger even when replay slips
        for ins in self.program.instructions():
            if ins.op in (Op.PRE_EVICT, Op.PREFETCH):
                when = self.now + ins.issue_us
                self._push(when, _R_TRIGGER, self._trigger, ins, iteration)

    def _trigger(self, ins, iteration: int) -> None:
        tensor = self.tensors[ins.tensor_id]
        if ins.op is Op.PRE_EVICT:
            if tensor.loc != GPU or tensor.pending_in or tensor.pending_out:
                self._log(f"skip pre_evict t{tensor.id}")
                return
            if (self.running is not None
                    and tensor.id in self.running["tensors"]):
                self.running["defers"].append((ins, iteration))
                self._log(f"defer pre_evict t{tensor.id}")
                return
            dest = HOST if ins.dest is Destination.HOST else SSD
            if dest == HOST and (self.host_used + tensor.size
                                 > self.config.host_mem_bytes):
                dest = SSD
            if (dest == SSD and self.ssd_used + tensor.size
                    > self.config.ssd_capacity_bytes):
                raise SimulationError("planned eviction has no room")
            self._enqueue_evict(tensor, dest, "evict")
        else:
            # an eviction still in flight (or parked behind the running
            # kernel) is this prefetch's partner: hold and re-fire once it
            # completes rather than dropping the reload
            deferred_evict = (self.running is not None and any(
                d.op is Op.PRE_EVICT and d.tensor_id == tensor.id
                for d, _ in self.running["defers"]))
            if tensor.pending_out or deferred_evict:
                tensor.retry_fetch = (ins, iteration)
                self._log(f"hold prefetch t{tensor.id}")
                return
            # loc None: replay slipped behind the plan and the tensor has
            # not been (re)born this iteration, so there is nothing to move
            if tensor.loc in (GPU, None) or tensor.pending_in:
                self._log(f"skip prefetch t{tensor.id}")
                return
            self._enqueue_fetch(tensor, "prefetch")

    # -- compute stream ------------------------------------------------------

    def _advance(self, cause: str) -> None:
        while not self.finished:
            if self.running is not None:
                return
            if self.pos == 0 and not self.iter_started:
                self.iter_started = True
                self._log(f"iteration {self.iter_index}")
                self._arm_iteration(self.iter_index)
            if self.pos >= len(self.stream):
                self.iter_index += 1
                if self.iter_index >= self.iterations:
                    self.finished = True
                    self._log("done")
                    return
                self.pos = 0
                self.iter_started = False
                continue
            kind, payload = self.stream[self.pos]
            if kind == "alloc":
                if not self._do_alloc(payload, cause):
                    return
                self.pos += 1
            elif kind == "free":
                if not self._do_free(payload):
                    return
                self.pos += 1
            else:
                # _start_kernel advances the cursor itself once it launches
                if not self._start_kernel(payload, cause):
                    return

    def _note_block(self, cause: str) -> None:
        if self.block_started is None:
            self.block_started = self.now
        self.block_cause = cause

    def _resolve_block(self, cause: str) -> None:
        if self.block_started is not None:
            waited = self.now - self.block_started
            if waited:
                self.stall_breakdown[cause] = (
                    self.stall_breakdown.get(cause, 0) + waited)
            self.block_started = None

    def _do_alloc(self, ins, cause: str) -> bool:
        tensor = self.tensors[ins.tensor_id]
        if tensor.loc is not None or tensor.pending_in or tensor.pending_out:
            return True
        if tensor.size > self.free:
            # evict what can go now; a short result is not fatal, the next
            # transfer completion retries and true wedges hit the drain check
            self._note_block("alloc")
            self._lru_evict(tensor.size - self.free, cause="alloc")
            return False
        self._resolve_block(cause if cause != "none" else "alloc")
        self.free -= tensor.size
        tensor.loc = GPU
        self._log(f"alloc t{tensor.id}")
        return True

    def _do_free(self, ins) -> bool:
        tensor = self.tensors[ins.tensor_id]
        if tensor.pending_in or tensor.pending_out:
            self._note_block("free")
            return False
        self._resolve_block("free")
        loc = tensor.loc
        tensor.loc = None
        tensor.last_use = -1
        # log before _unpark so a transfer funded by this free appears
        # after the free that paid for it
        self._log(f"free t{tensor.id}")
        if loc == GPU:
            self.free += tensor.size
            self._unpark()
        elif loc == HOST:
            self.host_used -= tensor.size
        elif loc == SSD:
            self.ssd_used -= tensor.size
        return True

    def _start_kernel(self, k: int, cause: str) -> bool:
        needed = sorted(self.trace.kernels[k].tensors())
        missing = []
        for tid in needed:
            tensor = self.tensors[tid]
            if tensor.loc == GPU and not tensor.pending_out:
                continue
            missing.append(tensor)
        if missing:
            self._note_block(cause if cause != "none" else "wait")
            for tensor in missing:
                if tensor.pending_in or tensor.pending_out:
                    continue
                if tensor.loc is None:
                    raise SimulationError(
                        f"kernel {k} touches unallocated tensor {tensor.id}")
                self.faults += 1
                self.fault_log.append((self.iter_index, k, tensor.id))
                self._log(f"fault t{tensor.id} kernel {k}")
                self._enqueue_fetch(tensor, "fault")
            # transfers stuck waiting for space block this kernel: make room
            deficit = sum(t.size for t in missing
                          if t.pending_in and self._is_parked(t))
            if deficit:
                over = deficit - self.free
                if over <= 0:
                    self._unpark()
                else:
                    self._lru_evict(over, cause="wait")
            return False

        start = self.now
        stall = start - self.prev_end
        if self.block_started is not None:
            self._resolve_block(self.block_cause if cause == "none" else cause)
        instance = self.iter_index * len(self.program.kernels) + k
        dur = self.durations[self.iter_index][k]
        end = start + dur
        step = instance
        active = frozenset(needed)
        for tid in needed:
            self.tensors[tid].last_use = step
        self.running = {"kernel": k, "start": start, "end": end,
                        "tensors": active, "defers": []}
        self.kernel_stats.append(KernelStat(
            instance, self.iter_index, k, self.program.kernels[k].name,
            start, end, stall))
        self._log(f"kernel_start {k} iter {self.iter_index}")
        if self.on_kernel_start is not None:
            self.on_kernel_start(self, self.iter_index, k)
        self.pos += 1
        self._push(end, _R_STREAM, self._end_kernel)
        return False

    def _is_parked(self, tensor: _Tensor) -> bool:
        return any(x.tensor is tensor for x in self.parked)

    def _end_kernel(self) -> None:
        info = self.running
        self.running = None
        self.prev_end = self.now
        self.last_kernel_end = self.now
        self.kernel_spans.append((info["start"], info["end"]))
        self._log(f"kernel_end {info['kernel']}")
        for ins, iteration in info["defers"]:
            self._trigger(ins, iteration)
        self._advance("none")

    # -- runtime hook surface -------------------------------------------------

    def runtime_prefetch(self, tid: int) -> None:
        """Queue a best-effort fetch of an off-device tensor, evicting
        least-recently-used tensors if it needs room."""
        tensor = self.tensors[tid]
        if tensor.loc in (GPU, None) or tensor.pending_in or tensor.pending_out:
            return
        self._enqueue_fetch(tensor, "prefetch", evict_for_space=True)

    # -- driver ----------------------------------------------------------------

    def run(self) -> SimResult:
        self._arm_advance("none")
        while self.events:
            t, _rank, _seq, fn, args = heapq.heappop(self.events)
            if t < self.now:
                raise SimulationError("event time went backwards")
            self.now = t
            fn(*args)
        if not self.finished:
            raise SimulationError("deadlock: event queue drained mid-program")
        compute = sum(sum(row) for row in self.durations)
        total = self.last_kernel_end
        stall = sum(ks.stall_us for ks in self.kernel_stats)
        return SimResult(
            policy=self.policy,
            total_us=total,
            compute_us=compute,
            stall_us=stall,
            overlap_us=self.overlap_us,
            faults=self.faults,
            traffic=self.traffic,
            kernels=self.kernel_stats,
            stall_breakdown=dict(sorted(self.stall_breakdown.items())),
            fault_log=self.fault_log,
            event_log_sha256=self._hash.hexdigest(),
            events=self._event_lines,
        )


def _flatten(program: Program):
    stream = []
    for k in range(len(program.kernels)):
        for ins in program.gaps[k]:
            if ins.op is Op.ALLOC:
                stream.append(("alloc", ins))
            elif ins.op is Op.FREE:
                stream.append(("free", ins))
        stream.append(("kernel", k))
    for ins in program.gaps[-1]:
        if ins.op is Op.ALLOC:
            stream.append(("alloc", ins))
        elif ins.op is Op.FREE:
            stream.append(("free", ins))
    return stream


def _check_program(trace: WorkloadTrace, program: Program) -> None:
    if len(program.kernels) != len(trace.kernels):
        raise ProgramInconsistentError("kernel count mismatch")
    for pk, tk in zip(program.kernels, trace.kernels):
        if (pk.index, pk.name, pk.duration_us) != (tk.index, tk.name,
                                                   tk.duration_us):
            raise ProgramInconsistentError(f"kernel {pk.index} mismatch")
    for ins in program.instructions():
        if ins.tensor_id not in trace.tensors:
            raise ProgramInconsistentError(
                f"directive names unknown tensor {ins.tensor_id}")


def simulate(trace: WorkloadTrace, program: Program, config: DeviceConfig, *,
             policy: str = "g10", durations=None, initial_locations=None,
             allow_host_fallback: bool = True, on_kernel_start=None,
             keep_events: bool = False) -> SimResult:
    engine = _Engine(trace, program, config, policy=policy,
                     durations=durations, initial_locations=initial_locations,
                     allow_host_fallback=allow_host_fallback,
                     on_kernel_start=on_kernel_start, keep_events=keep_events)
    return engine.run()


def ideal_run(trace: WorkloadTrace, config: DeviceConfig,
              durations=None) -> SimResult:
    """Compute-only reference: kernels back to back, no migration at all."""
    n = len(trace.kernels)
    if durations is None:
        durations = [[k.duration_us for k in trace.kernels]
                     for _ in range(config.num_iterations)]
    stats = []
    clock = 0
    digest = hashlib.sha256()
    for j, row in enumerate(durations):
        for k in range(n):
            end = clock + row[k]
            stats.append(KernelStat(j * n + k, j, k, trace.kernels[k].name,
                                    clock, end, 0))
            digest.update(f"{clock} kernel {k}\n".encode())
            clock = end
    total = clock
    return SimResult(
        policy="ideal", total_us=total, compute_us=total, stall_us=0,
        overlap_us=0, faults=0, traffic=Traffic(), kernels=stats,
        stall_breakdown={}, fault_log=[],
        event_log_sha256=digest.hexdigest(), events=None)


def perturb_durations(trace: WorkloadTrace, noise_pct: float, seed: int,
                      iterations: int) -> list[list[int]]:
    """Per-instance kernel durations drawn uniformly within +-noise_pct."""
    rng = random.Random(seed)
    out = []
    for _ in range(iterations):
        row = []
        for kernel in trace.kernels:
            f = rng.uniform(1.0 - noise_pct, 1.0 + noise_pct)
            row.append(max(1, round(kernel.duration_us * f)))
        out.append(row)
    return out


def ssd_lifetime_years(capacity_bytes: int, write_bytes_per_us: float, *,
                       dwpd: float = 30.0, rated_days: float = 1825.0) -> float:
    """Years until the drive's rated write endurance is consumed at the
    given sustained write rate."""
    if write_bytes_per_us <= 0:
        raise ValueError("write rate must be positive")
    endurance_bytes = dwpd * rated_days * capacity_bytes
    lifetime_us = endurance_bytes / write_bytes_per_us
    return lifetime_us / 1e6 / (365.0 * 86400.0)
