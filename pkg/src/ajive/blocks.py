"""Multi-block data model and delimited-text ingestion.

A block is a ``d x n`` matrix: rows are features, columns are the objects
shared by every block.
"""

from __future__ import annotations

import configparser
import csv
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "DataBlock",
    "MultiBlockDataset",
    "DatasetError",
    "ReadOptions",
    "read_matrix",
    "write_matrix",
    "load_dataset",
    "load_manifest",
    "write_manifest",
    "center_rows",
]


class DatasetError(ValueError):
    pass


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DataBlock:
    name: str
    values: np.ndarray
    feature_labels: tuple[str, ...] | None = None
    object_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        values = _readonly(self.values)
        if values.ndim != 2:
            raise DatasetError(f"block {self.name!r}: expected a 2-d matrix, got shape {values.shape}")
        d, n = values.shape
        if d < 1 or n < 2:
            raise DatasetError(f"block {self.name!r}: need at least 1 feature and 2 objects, got {d}x{n}")
        if not np.all(np.isfinite(values)):
            raise DatasetError(f"block {self.name!r}: missing or non-finite values are not supported")
        object.__setattr__(self, "values", values)
        for attr, size in (("feature_labels", d), ("object_labels", n)):
            labels = getattr(self, attr)
            if labels is None:
                continue
            labels = tuple(str(x) for x in labels)
            if len(labels) != size:
                raise DatasetError(f"block {self.name!r}: {attr} has {len(labels)} entries, expected {size}")
            object.__setattr__(self, attr, labels)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def n_features(self) -> int:
        return self.values.shape[0]

    @property
    def n_objects(self) -> int:
        return self.values.shape[1]

    def with_values(self, values) -> "DataBlock":
        return replace(self, values=values)


@dataclass(frozen=True)
class MultiBlockDataset:
    blocks: tuple[DataBlock, ...]
    object_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if len(blocks) < 2:
            raise DatasetError(f"need at least 2 blocks, got {len(blocks)}")
        n = blocks[0].n_objects
        for b in blocks[1:]:
            if b.n_objects != n:
                raise DatasetError(
                    f"dimension mismatch: block {blocks[0].name!r} has {n} objects, "
                    f"block {b.name!r} has {b.n_objects}"
                )
        names = [b.name for b in blocks]
        if len(set(names)) != len(names):
            raise DatasetError(f"block names must be unique, got {names}")
        labels = self.object_labels
        for b in blocks:
            if b.object_labels is None:
                continue
            if labels is None:
                labels = b.object_labels
            elif tuple(labels) != b.object_labels:
                raise DatasetError(f"object labels of block {b.name!r} disagree with the other blocks")
        if labels is not None:
            labels = tuple(str(x) for x in labels)
            if len(labels) != n:
                raise DatasetError(f"object_labels has {len(labels)} entries, expected {n}")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "object_labels", labels)

    @classmethod
    def from_arrays(cls, arrays, names: Sequence[str] | None = None) -> "MultiBlockDataset":
        arrays = list(arrays)
        names = names or [f"block{i + 1}" for i in range(len(arrays))]
        return cls(tuple(DataBlock(nm, a) for nm, a in zip(names, arrays)))

    @property
    def n_objects(self) -> int:
        return self.blocks[0].n_objects

    @property
    def names(self) -> list[str]:
        return [b.name for b in self.blocks]

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __getitem__(self, key) -> DataBlock:
        if isinstance(key, str):
            for b in self.blocks:
                if b.name == key:
                    return b
            raise KeyError(key)
        return self.blocks[key]


def center_rows(block: DataBlock) -> DataBlock:
    """Subtract each feature's mean over objects."""
    x = block.values
    return block.with_values(x - x.mean(axis=1, keepdims=True))


# ---------------------------------------------------------------------------
# delimited text


@dataclass
class ReadOptions:
    """``None`` means autodetect."""

    delimiter: str | None = None
    header: bool | None = None
    index: bool | None = None


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _sniff_delimiter(first_line: str) -> str:
    return "\t" if "\t" in first_line else ","


def read_matrix(path, options: ReadOptions | None = None):
    """Read a delimited-text matrix.

    Returns ``(values, feature_labels, object_labels)``; label entries are
    ``None`` when absent.
    """
    options = options or ReadOptions()
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"{path}: no such file")
    with open(path, newline="") as fh:
        text = fh.read()
    lines = text.splitlines()
    if not any(line.strip() for line in lines):
        raise DatasetError(f"{path}: file is empty")
    delim = options.delimiter or _sniff_delimiter(lines[0])
    rows = [r for r in csv.reader(lines, delimiter=delim) if any(c.strip() for c in r)]
    rows = [[c.strip() for c in r] for r in rows]

    header = options.header
    if header is None:
        header = any(not _is_number(c) for c in rows[0][1:]) or (
            len(rows[0]) > 0 and rows[0][0] == "" and len(rows) > 1
        )
    body = rows[1:] if header else rows
    if not body:
        raise DatasetError(f"{path}: no data rows")
    index = options.index
    if index is None:
        index = any(not _is_number(r[0]) for r in body)

    feature_labels = [r[0] for r in body] if index else None
    cells = [r[1:] for r in body] if index else body
    width = len(cells[0])
    values = np.empty((len(cells), width))
    for i, row in enumerate(cells):
        if len(row) != width:
            raise DatasetError(f"{path}: row {i + 1} has {len(row)} values, expected {width}")
        for j, c in enumerate(row):
            if c == "":
                raise DatasetError(f"{path}: missing value at row {i + 1}, column {j + 1}")
            try:
                values[i, j] = float(c)
            except ValueError:
                raise DatasetError(f"{path}: non-numeric cell {c!r} at row {i + 1}, column {j + 1}") from None
    if not np.all(np.isfinite(values)):
        raise DatasetError(f"{path}: non-finite values are not supported")

    object_labels = None
    if header:
        head = rows[0][1:] if index else rows[0]
        if index and len(rows[0]) == width:
            # header without a corner cell
            head = rows[0]
        if len(head) != width:
            raise DatasetError(f"{path}: header has {len(head)} labels, expected {width}")
        object_labels = head
    return values, feature_labels, object_labels


def write_matrix(path, values, feature_labels=None, object_labels=None, delimiter: str = ","):
    """Write a matrix so that :func:`read_matrix` recovers it exactly (17 significant digits)."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        if object_labels is not None:
            w.writerow((["feature"] if feature_labels is not None else []) + list(object_labels))
        for i, row in enumerate(values):
            cells = [repr(float(v)) for v in row]
            if feature_labels is not None:
                cells = [feature_labels[i]] + cells
            w.writerow(cells)


def load_dataset(paths, names=None, options: ReadOptions | None = None, center=None) -> MultiBlockDataset:
    """Load one block per file.

    ``center`` is an optional per-block sequence of booleans (or a dict by
    name); blocks are never centered unless asked.
    """
    paths = [Path(p) for p in paths]
    if len(paths) < 2:
        raise DatasetError(f"need at least 2 block files, got {len(paths)}")
    names = list(names) if names is not None else [p.stem for p in paths]
    blocks = []
    for i, (nm, p) in enumerate(zip(names, paths)):
        values, flabels, olabels = read_matrix(p, options)
        block = DataBlock(nm, values, flabels, olabels)
        flag = center.get(nm, False) if isinstance(center, dict) else (center[i] if center else False)
        if flag:
            block = center_rows(block)
        blocks.append(block)
    return MultiBlockDataset(tuple(blocks))


_TRUE = {"1", "yes", "true", "on", "y"}
_FALSE = {"0", "no", "false", "off", "n", ""}


def _parse_bool(value: str | None, what: str) -> bool | None:
    if value is None:
        return None
    v = value.strip().lower()
    if v in ("auto",):
        return None
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise DatasetError(f"cannot read {what}={value!r} as yes/no")


def load_manifest(path, center_override=None) -> MultiBlockDataset:
    """Load a dataset from an INI manifest, one section per block::

        [X]
        path = X.csv
        center = no

    Relative paths resolve against the manifest's directory. Optional keys:
    ``center``, ``header``, ``index`` (yes/no/auto), ``delimiter``.
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"manifest {path} does not exist")
    cfg = configparser.ConfigParser()
    cfg.read(path)
    sections = cfg.sections()
    if len(sections) < 2:
        raise DatasetError(f"manifest {path} lists {len(sections)} blocks, need at least 2")
    center_override = center_override or {}
    blocks = []
    for name in sections:
        sec = cfg[name]
        if "path" not in sec:
            raise DatasetError(f"manifest {path}: block {name!r} has no path")
        p = Path(os.path.expanduser(sec["path"]))
        if not p.is_absolute():
            p = path.parent / p
        opts = ReadOptions(
            delimiter=sec.get("delimiter") or None,
            header=_parse_bool(sec.get("header"), "header"),
            index=_parse_bool(sec.get("index"), "index"),
        )
        values, flabels, olabels = read_matrix(p, opts)
        block = DataBlock(name, values, flabels, olabels)
        flag = center_override.get(name, _parse_bool(sec.get("center", "no"), "center"))
        if flag:
            block = center_rows(block)
        blocks.append(block)
    return MultiBlockDataset(tuple(blocks))


def write_manifest(path, entries: dict, center: dict | None = None):
    """Write a manifest mapping block name -> file path."""
    cfg = configparser.ConfigParser()
    center = center or {}
    for name, p in entries.items():
        cfg[name] = {"path": str(p), "center": "yes" if center.get(name) else "no"}
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        cfg.write(fh)
