"""Machine-readable evaluation reports: one dict schema, three renderings.

Reports are plain JSON-native dicts so the JSON form round-trips losslessly.
Rendering is deterministic (sorted keys) so replayed evaluations produce
byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json

REPORT_SCHEMA_VERSION = 1


def build_report(
    command: str,
    inputs: dict,
    results: dict,
    details: list | None = None,
    timing_s: float | None = None,
) -> dict:
    """Assemble a report envelope. ``timing_s`` stays ``None`` in replay mode
    so deterministic runs stay byte-identical."""
    from . import __version__

    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "tool": {"name": "condcap", "version": __version__},
        "command": command,
        "inputs": inputs,
        "results": results,
        "timing_s": timing_s,
    }
    if details is not None:
        report["details"] = details
    return report


def _flatten(value, prefix: str = "") -> list[tuple[str, object]]:
    if isinstance(value, dict):
        rows: list[tuple[str, object]] = []
        for key in sorted(value):
            rows.extend(_flatten(value[key], f"{prefix}{key}."))
        return rows
    if isinstance(value, list):
        rows = []
        for i, item in enumerate(value):
            rows.extend(_flatten(item, f"{prefix}{i}."))
        return rows
    return [(prefix[:-1], value)]


def render_report(report: dict, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["key", "value"])
        for key, value in _flatten(report):
            writer.writerow([key, "" if value is None else value])
        return buffer.getvalue()
    if fmt == "markdown":
        lines = ["| key | value |", "| --- | --- |"]
        for key, value in _flatten(report):
            lines.append(f"| {key} | {'' if value is None else value} |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")
