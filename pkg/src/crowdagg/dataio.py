"""File ingestion and wire formats.

Handles three text formats plus the JSON result payloads:

* label CSV: header row of label names, body rows of comma-separated 0/1;
* a minimal ARFF subset (numeric or {0,1}-nominal attributes, dense or
  sparse data rows) from which named label columns are extracted;
* annotation CSV with header ``annotator,instance,labels`` where
  ``labels`` is a C-character 0/1 string.

All loaders reject malformed input with a file:line message instead of
coercing it.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

import numpy as np

from .data import AnnotationSet, as_label_matrix
from .errors import DataError

_ARFF_ATTRIBUTE = re.compile(
    r"@attribute\s+(?:'([^']*)'|\"([^\"]*)\"|(\S+))\s+(.+)", re.IGNORECASE
)


@dataclass(frozen=True)
class DatasetDescriptor:
    """Shape and label names of a loaded dataset."""

    name: str
    num_labels: int
    num_instances: int
    label_names: list

    def __post_init__(self):
        if len(self.label_names) != self.num_labels:
            raise DataError("label_names length does not match num_labels")
        if len(set(self.label_names)) != self.num_labels:
            raise DataError("label names must be unique")


def _read_text_lines(path):
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    return text.replace("\r\n", "\n").replace("\r", "\n").split("\n")


def load_label_matrix_csv(path):
    """Load a label CSV into (DatasetDescriptor, N x C uint8 matrix)."""
    lines = _read_text_lines(path)
    while lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise DataError(f"{path}:1: empty file, expected a header of label names")
    names = [cell.strip() for cell in lines[0].split(",")]
    if any(not n for n in names):
        raise DataError(f"{path}:1: empty label name in header")
    if len(set(names)) != len(names):
        raise DataError(f"{path}:1: duplicate label names in header")
    num_labels = len(names)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = [cell.strip() for cell in line.split(",")]
        if len(cells) != num_labels:
            raise DataError(
                f"{path}:{lineno}: expected {num_labels} cells, got {len(cells)}"
            )
        row = []
        for cell in cells:
            if cell not in ("0", "1"):
                raise DataError(f"{path}:{lineno}: non-binary cell {cell!r}")
            row.append(int(cell))
        rows.append(row)
    matrix = np.array(rows, dtype=np.uint8).reshape(len(rows), num_labels)
    descriptor = DatasetDescriptor(
        name=str(path), num_labels=num_labels, num_instances=len(rows), label_names=names
    )
    return descriptor, matrix


def write_label_matrix_csv(path, label_names, matrix):
    """Inverse of load_label_matrix_csv."""
    matrix = as_label_matrix(matrix)
    if matrix.shape[1] != len(label_names):
        raise DataError("label_names length does not match matrix width")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(label_names) + "\n")
        for row in matrix:
            fh.write(",".join(str(int(v)) for v in row) + "\n")


def read_label_names(path):
    """Read one label name per line, skipping blanks."""
    names = [line.strip() for line in _read_text_lines(path)]
    names = [n for n in names if n]
    if not names:
        raise DataError(f"{path}: no label names found")
    return names


def _parse_binary_token(token, path, lineno):
    try:
        value = float(token)
    except ValueError:
        raise DataError(f"{path}:{lineno}: non-binary label value {token!r}") from None
    if value not in (0.0, 1.0):
        raise DataError(f"{path}:{lineno}: label value {token!r} outside {{0, 1}}")
    return int(value)


def load_mulan_arff(path, label_names):
    """Extract named label columns from a minimal ARFF file.

    Supports @relation / @attribute / @data directives (case-insensitive),
    '%' comment lines, numeric and nominal attribute types, and both dense
    and sparse ("{index value, ...}") data rows. Only the named label
    columns are parsed; they must be 0/1-valued. Omitted sparse entries
    default to 0.
    """
    lines = _read_text_lines(path)
    attr_names = []
    data_rows = []
    in_data = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if in_data:
            data_rows.append((lineno, line))
            continue
        lowered = line.lower()
        if lowered.startswith("@attribute"):
            match = _ARFF_ATTRIBUTE.match(line)
            if not match:
                raise DataError(f"{path}:{lineno}: malformed @attribute line")
            attr_names.append(next(g for g in match.groups()[:3] if g is not None))
        elif lowered.startswith("@data"):
            in_data = True
        elif lowered.startswith("@relation"):
            continue
        else:
            raise DataError(f"{path}:{lineno}: unrecognized directive {line.split()[0]!r}")
    if not in_data:
        raise DataError(f"{path}: missing @data section")
    if len(set(attr_names)) != len(attr_names):
        raise DataError(f"{path}: duplicate attribute names")
    label_index = {}
    for name in label_names:
        if name not in attr_names:
            raise DataError(f"{path}: label {name!r} is not an attribute")
        label_index[attr_names.index(name)] = len(label_index)

    num_attrs = len(attr_names)
    rows = []
    for lineno, line in data_rows:
        row = [0] * len(label_names)
        if line.startswith("{"):
            if not line.endswith("}"):
                raise DataError(f"{path}:{lineno}: unterminated sparse row")
            inner = line[1:-1].strip()
            entries = [e.strip() for e in inner.split(",")] if inner else []
            for entry in entries:
                parts = entry.split(None, 1)
                if len(parts) != 2:
                    raise DataError(f"{path}:{lineno}: malformed sparse entry {entry!r}")
                try:
                    idx = int(parts[0])
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: non-integer sparse index {parts[0]!r}"
                    ) from None
                if not 0 <= idx < num_attrs:
                    raise DataError(f"{path}:{lineno}: sparse index {idx} out of range")
                if idx in label_index:
                    row[label_index[idx]] = _parse_binary_token(parts[1], path, lineno)
        else:
            cells = [c.strip() for c in line.split(",")]
            if len(cells) != num_attrs:
                raise DataError(
                    f"{path}:{lineno}: expected {num_attrs} values, got {len(cells)}"
                )
            for idx, pos in label_index.items():
                row[pos] = _parse_binary_token(cells[idx], path, lineno)
        rows.append(row)
    matrix = np.array(rows, dtype=np.uint8).reshape(len(rows), len(label_names))
    descriptor = DatasetDescriptor(
        name=str(path),
        num_labels=len(label_names),
        num_instances=len(rows),
        label_names=list(label_names),
    )
    return descriptor, matrix


ANNOTATION_HEADER = "annotator,instance,labels"


def read_annotations(path, num_instances=None, num_labels=None, num_annotators=None):
    """Read the annotation wire format into an AnnotationSet.

    Dimensions not supplied are inferred from the records (max id + 1 and
    the label-string width), so trailing unlabeled instances or annotators
    need explicit counts.
    """
    lines = _read_text_lines(path)
    while lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].strip() != ANNOTATION_HEADER:
        raise DataError(f"{path}:1: expected header {ANNOTATION_HEADER!r}")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != 3:
            raise DataError(f"{path}:{lineno}: expected 3 fields, got {len(cells)}")
        try:
            annotator = int(cells[0])
            instance = int(cells[1])
        except ValueError:
            raise DataError(f"{path}:{lineno}: non-integer id") from None
        bits = cells[2].strip()
        if num_labels is None:
            num_labels = len(bits)
        if len(bits) != num_labels or any(ch not in "01" for ch in bits):
            raise DataError(
                f"{path}:{lineno}: labels must be a {num_labels}-character 0/1 string"
            )
        records.append((annotator, instance, [int(ch) for ch in bits]))
    if num_labels is None:
        raise DataError(f"{path}: no records and no explicit num_labels")
    if num_instances is None:
        num_instances = 1 + max((r[1] for r in records), default=-1)
    if num_annotators is None:
        num_annotators = 1 + max((r[0] for r in records), default=-1)
    try:
        return AnnotationSet.from_records(records, num_instances, num_labels, num_annotators)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from exc


def write_annotations(annotations: AnnotationSet, path):
    """Write the annotation wire format (records in canonical order)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(ANNOTATION_HEADER + "\n")
        for annotator, instance, bits in annotations.records():
            fh.write(f"{annotator},{instance},{''.join(str(int(b)) for b in bits)}\n")


def write_result(path, payload: dict):
    """Write a fit-result payload as JSON."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def read_result(path) -> dict:
    """Read a fit-result payload written by write_result."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(payload, dict) or "model" not in payload:
        raise DataError(f"{path}: not a result payload")
    return payload
