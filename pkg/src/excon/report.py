"""Deterministic JSON reports for the command line frontend.

Reports are plain dicts built in a fixed key order and serialized with
json.dumps, so identical inputs give byte-identical output.  Field
scalars are rendered as exact strings ('p/q' over Q, canonical residues
mod p); dimensions and degrees stay integers.  The timings entry is null
unless explicitly requested, keeping default reports reproducible.
"""

from __future__ import annotations

import json

SCHEMA = "excon-report/1"
TOOL = "excon 0.1.0"


def scalar_str(field, x):
    return field.fmt(x)


def vector_strs(field, vec):
    return [field.fmt(v) for v in vec]


def new_report(command, field, inputs):
    return {
        "schema": SCHEMA,
        "tool": TOOL,
        "command": command,
        "field": field.name(),
        "inputs": inputs,
        "verdicts": {},
        "timings": None,
    }


def verdict(status, **extra):
    out = {"status": status}
    out.update(extra)
    return out


def render(report):
    return json.dumps(report, indent=2) + "\n"


def render_error(kind, message):
    return json.dumps({"schema": SCHEMA, "tool": TOOL, "error": kind,
                       "message": message}, indent=2) + "\n"


def human_lines(report):
    """Plain-text rendering, one line per verdict."""
    lines = [f"{report['command']} over {report['field']}"]
    for key, v in report["verdicts"].items():
        parts = [f"  {key}: {v['status']}"]
        for k2, v2 in v.items():
            if k2 != "status":
                parts.append(f"{k2}={v2}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"
