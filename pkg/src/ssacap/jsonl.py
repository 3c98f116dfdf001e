"""JSON-Lines files with an optional single provenance header line."""

from __future__ import annotations

import json
from typing import Any, Dict, Iterable, List, Optional, Tuple


def read_jsonl(path) -> Tuple[Optional[Dict[str, Any]], List[Dict[str, Any]]]:
    """Return (provenance, rows). The header, if present, is the first line
    and is a one-key object {"provenance": {...}}."""
    provenance = None
    rows = []
    with open(path) as f:
        for i, line in enumerate(f):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if i == 0 and isinstance(obj, dict) and set(obj) == {"provenance"}:
                provenance = obj["provenance"]
                continue
            rows.append(obj)
    return provenance, rows


def write_jsonl(path, rows: Iterable[Any], provenance: Optional[Dict[str, Any]] = None) -> None:
    with open(path, "w") as f:
        if provenance is not None:
            f.write(json.dumps({"provenance": provenance}, sort_keys=True) + "\n")
        for row in rows:
            f.write(json.dumps(row, sort_keys=True) + "\n")
