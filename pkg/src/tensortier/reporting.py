"""CSV and JSON rendering of analysis and simulation results.

Every table is built as rows first so it can go to a file in a result
directory or be streamed to stdout as sections separated by `# <name>`
comment lines.
"""

from __future__ import annotations

import csv
import io
import json
import os

from tensortier.simulate import SimResult
from tensortier.trace import WorkloadTrace
from tensortier.vitality import CharacterizationReport


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def render_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def characterization_tables(report: CharacterizationReport,
                            trace: WorkloadTrace) -> dict[str, str]:
    occupancy_rows = [[o.kernel_index, o.name, o.active_bytes, o.total_bytes]
                      for o in report.occupancy]

    lengths = sorted(p.length_us() for p in report.periods)
    cdf_rows = []
    n = len(lengths)
    for i, length in enumerate(lengths):
        if i + 1 < n and lengths[i + 1] == length:
            continue
        cdf_rows.append([length, (i + 1) / n])

    scatter_rows = [[p.tensor_id, trace.tensors[p.tensor_id].size_bytes,
                     p.length_us()] for p in report.periods]

    return {
        "active_vs_total.csv": render_csv(
            ["kernel_index", "name", "active_bytes", "total_bytes"],
            occupancy_rows),
        "period_cdf.csv": render_csv(["length_us", "cum_fraction"], cdf_rows),
        "period_scatter.csv": render_csv(
            ["tensor_id", "size_bytes", "length_us"], scatter_rows),
    }


def simulation_tables(result: SimResult, ideal_us: int) -> dict[str, str]:
    kernel_rows = []
    for ks in result.kernels:
        duration = ks.end_us - ks.start_us
        slowdown = (ks.stall_us + duration) / duration
        kernel_rows.append([ks.instance, ks.start_us, ks.end_us, ks.stall_us,
                            slowdown])
    summary_rows = [[result.policy, result.total_us, ideal_us,
                     result.compute_us, result.overlap_us, result.stall_us,
                     result.faults]]
    t = result.traffic
    traffic_rows = [[t.ssd_read, t.ssd_write, t.host_in, t.host_out]]
    return {
        "kernels.csv": render_csv(
            ["index", "start", "end", "stall_us", "slowdown"], kernel_rows),
        "summary.csv": render_csv(
            ["policy", "total_us", "ideal_us", "compute_us", "overlap_us",
             "stall_us", "faults"], summary_rows),
        "traffic.csv": render_csv(
            ["ssd_read", "ssd_write", "host_in", "host_out"], traffic_rows),
    }


def result_json(result: SimResult, ideal_us: int) -> str:
    doc = {
        "policy": result.policy,
        "total_us": result.total_us,
        "ideal_us": ideal_us,
        "compute_us": result.compute_us,
        "overlap_us": result.overlap_us,
        "stall_us": result.stall_us,
        "faults": result.faults,
        "traffic": {
            "ssd_read": result.traffic.ssd_read,
            "ssd_write": result.traffic.ssd_write,
            "host_in": result.traffic.host_in,
            "host_out": result.traffic.host_out,
        },
        "stall_breakdown": result.stall_breakdown,
        "event_log_sha256": result.event_log_sha256,
    }
    return json.dumps(doc, indent=2) + "\n"


def write_tables(tables: dict[str, str], out: str) -> None:
    """out is a directory, or '-' to stream sections to stdout."""
    if out == "-":
        import sys
        for name in sorted(tables):
            sys.stdout.write(f"# {name}\n")
            sys.stdout.write(tables[name])
        return
    os.makedirs(out, exist_ok=True)
    for name, text in tables.items():
        with open(os.path.join(out, name), "w", encoding="utf-8") as fh:
            fh.write(text)
