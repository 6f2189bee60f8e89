"""Checkpoints and tabular output.

Checkpoints are ``.npz`` containers of complex128 coefficient arrays plus a
JSON metadata string (box, variant, time, parameters). Arrays are stored
uncompressed, so a save/load round trip is bit-exact.
"""
import csv
import json
import math
from pathlib import Path

import numpy as np

from . import spectral as sp
from .diagnostics import SCHEMA_NAME, SCHEMA_VERSION
from .params import Variant

CHECKPOINT_FORMAT = "nsmhall.checkpoint"
CHECKPOINT_VERSION = 1


def save_fields(target, box, fields, meta=None):
    """Write named spectral fields; ``target`` is a path or a binary file object."""
    header = {"format": CHECKPOINT_FORMAT, "version": CHECKPOINT_VERSION,
              "box": box.to_dict(), "fields": sorted(fields), "meta": meta or {}}
    arrays = {f"field_{k}": np.ascontiguousarray(f.coeffs) for k, f in fields.items()}
    arrays["header"] = np.array(json.dumps(header, sort_keys=True))
    if isinstance(target, (str, Path)):
        Path(target).parent.mkdir(parents=True, exist_ok=True)
        with open(target, "wb") as fh:
            np.savez(fh, **arrays)
    else:
        np.savez(target, **arrays)


def load_fields(source):
    """Inverse of :func:`save_fields`; returns ``(box, fields, meta)``."""
    with np.load(source, allow_pickle=False) as data:
        header = json.loads(str(data["header"]))
        if header.get("format") != CHECKPOINT_FORMAT:
            raise ValueError("not an nsmhall checkpoint")
        box = sp.BoxSpec(**header["box"])
        fields = {k: sp.SpectralField(box, data[f"field_{k}"].copy()) for k in header["fields"]}
    return box, fields, header["meta"]


def save_state(target, state, params=None, meta=None):
    """Checkpoint a :class:`~nsmhall.dynamics.SimState` (``j`` included when cached)."""
    fields = dict(state.fields())
    if state.j is not None:
        fields["j"] = state.j
    info = {"variant": state.variant.value, "t": state.t, "ohm_iters": state.ohm_iters}
    if params is not None:
        info["params"] = params.to_dict()
    info.update(meta or {})
    save_fields(target, state.box, fields, info)


def load_state(source):
    """Load a checkpoint written by :func:`save_state`; returns ``(state, meta)``."""
    from .dynamics import SimState

    _, fields, meta = load_fields(source)
    state = SimState(Variant(meta["variant"]), float(meta["t"]), fields["v"], fields["B"],
                     fields.get("E"), fields.get("j"), int(meta.get("ohm_iters", 0)))
    return state, meta


def states_identical(a, b):
    """Bitwise equality of every field and the clock."""
    fa, fb = a.fields(), b.fields()
    if a.t != b.t or a.variant != b.variant or set(fa) != set(fb):
        return False
    return all(np.array_equal(fa[k].coeffs, fb[k].coeffs) for k in fa)


def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, (np.floating,)):
        return _clean(float(value))
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def write_rows_csv(path, rows):
    """Write dicts as CSV; the header is the union of keys in first-seen order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    keys = []
    for r in rows:
        for k in r:
            if k not in keys:
                keys.append(k)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for r in rows:
            w.writerow({k: r.get(k, "") for k in keys})
    return path


def read_rows_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_records_csv(path, records):
    return write_rows_csv(path, [r.flat() for r in records])


def write_records_jsonl(path, records):
    """One JSON object per record, preceded by a schema header line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(json.dumps({"schema": SCHEMA_NAME, "schema_version": SCHEMA_VERSION,
                             "kind": "header"}) + "\n")
        for r in records:
            fh.write(json.dumps(_clean(r.to_json()), sort_keys=True) + "\n")
    return path


def read_records_jsonl(path):
    with open(path) as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    header, body = lines[0], lines[1:]
    if header.get("schema") != SCHEMA_NAME:
        raise ValueError("unknown diagnostics schema")
    return header, body


def write_json(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(data), indent=2, sort_keys=True) + "\n")
    return path
