"""CSV emission and the run manifest.

Every result file is a header row plus one row per record.  Floats are
formatted with nine significant digits (%.9g), which makes re-runs of the
same configuration byte-identical.  A JSON manifest (config echo, master
seed, package version, wall clock) is written next to each result file;
wall clock lives only there so the CSV stays reproducible.
"""
from __future__ import annotations

import json
from typing import Any, Mapping, Sequence


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def emit_csv(rows: Sequence[Mapping[str, Any]], fieldnames: Sequence[str],
             path: str) -> None:
    """Write records to ``path``; an empty record list yields a header-only file."""
    lines = [",".join(fieldnames)]
    for row in rows:
        lines.append(",".join(_format_value(row[name]) for name in fieldnames))
    try:
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write result CSV {path!r}: {exc}") from exc


def manifest_path(result_path: str) -> str:
    return result_path + ".manifest.json"


def write_manifest(result_path: str, config: Mapping[str, Any],
                   master_seed: int, wall_clock_s: float) -> None:
    from .. import __version__
    payload = {
        "config": config,
        "master_seed": master_seed,
        "version": __version__,
        "wall_clock_s": wall_clock_s,
        "result": result_path,
    }
    path = manifest_path(result_path)
    try:
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write run manifest {path!r}: {exc}") from exc
