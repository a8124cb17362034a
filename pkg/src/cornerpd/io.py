"""File formats used by the command line.

* matrix JSON: ``{"n": N, "data": [[...], ...]}`` (row-major)
* acf JSON: ``{"rho": [...], "m": M}`` (``m`` optional, default 1)
* event CSV: header ``time,source``; trajectory CSV: header ``time,state``
  (times written with 17 significant digits)
"""

import csv
import json

import numpy as np

from cornerpd.errors import ValidationError


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from None


def matrix_to_json(a):
    a = np.asarray(a, dtype=np.float64)
    return {"n": int(a.shape[0]), "data": a.tolist()}


def matrix_from_json(doc, name="matrix"):
    if not isinstance(doc, dict) or "data" not in doc:
        raise ValidationError(f'{name} JSON needs a "data" field')
    try:
        a = np.array(doc["data"], dtype=np.float64)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} data is not a numeric matrix") from None
    if a.ndim != 2:
        raise ValidationError(f"{name} data must be a list of rows")
    if "n" in doc and doc["n"] != a.shape[0]:
        raise ValidationError(f'{name} "n" = {doc["n"]} does not match {a.shape[0]} rows')
    return a


def read_matrix(path):
    return matrix_from_json(_load_json(path), path)


def read_json(path):
    return _load_json(path)


def read_acf(path):
    doc = _load_json(path)
    if not isinstance(doc, dict) or "rho" not in doc:
        raise ValidationError(f'{path}: acf JSON needs a "rho" field')
    return parse_floats(doc["rho"]), int(doc.get("m", 1))


def parse_floats(text):
    """Comma-separated numbers (or an already-parsed list) to a float array."""
    if isinstance(text, str):
        items = [t for t in text.replace(" ", "").split(",") if t]
    else:
        items = list(text)
    try:
        return np.array([float(t) for t in items], dtype=np.float64)
    except (TypeError, ValueError):
        raise ValidationError(f"cannot parse numbers from {text!r}") from None


def read_series(path):
    """Numbers separated by newlines and/or commas."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    vals = parse_floats(text.replace("\n", ","))
    if vals.size and np.all(vals == np.round(vals)):
        return vals.astype(np.int64)
    return vals


def _fmt(t):
    return format(float(t), ".17g")


def write_events(path, stream):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time", "source"])
        for t, s in zip(stream.times, stream.sources):
            w.writerow([_fmt(t), int(s)])


def read_events(path):
    """Return ``(times, sources)`` arrays from an event CSV."""
    rows = _read_csv(path, ["time", "source"])
    try:
        t = np.array([float(r[0]) for r in rows], dtype=np.float64)
        s = np.array([int(r[1]) for r in rows], dtype=np.int64)
    except (ValueError, IndexError):
        raise ValidationError(f"{path}: malformed row") from None
    return t, s


def write_trajectory(path, traj):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time", "state"])
        for t, s in zip(traj.times, traj.states):
            w.writerow([_fmt(t), s.item() if hasattr(s, "item") else s])


def _read_csv(path, header):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    if not rows or [h.strip() for h in rows[0]] != header:
        raise ValidationError(f"{path}: expected header {','.join(header)}")
    return [r for r in rows[1:] if r]


def dumps(doc):
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(_plain(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj
