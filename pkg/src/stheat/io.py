"""Report emission: JSON summaries, CSV tables, content hashing."""

from __future__ import annotations

import csv
import hashlib
import json
import os

SCHEMA_VERSION = 1

__all__ = ["SCHEMA_VERSION", "content_hash", "write_json", "write_csv"]


def _canonical(obj):
    """JSON-serializable canonical form (sorted keys, plain types)."""
    return json.dumps(obj, sort_keys=True, default=_coerce)


def _coerce(obj):
    import numpy as np

    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj)!r}")


def content_hash(obj):
    """Git-style SHA-1 of the canonical JSON encoding of obj."""
    payload = _canonical(obj).encode()
    blob = b"blob %d\0" % len(payload) + payload
    return hashlib.sha1(blob).hexdigest()


def write_json(path, report):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, default=_coerce)
        fh.write("\n")


def write_csv(path, header, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
