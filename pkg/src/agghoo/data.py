"""Breast-cancer Wisconsin (original) data and CSV import/export.

The bundled file follows the UCI ``breast-cancer-wisconsin.data`` layout:
sample id, nine integer attributes in 1..10 (``?`` when missing) and a
class code, 2 for benign and 4 for malignant.  The id is dropped and the
class code mapped to 0/1, giving 9 real-valued features.
"""

from __future__ import annotations

import csv
import hashlib
import io
import logging
import os
import urllib.request
from importlib import resources

import numpy as np

from .core import Dataset

log = logging.getLogger(__name__)

UCI_URL = (
    "https://archive.ics.uci.edu/ml/machine-learning-databases/"
    "breast-cancer-wisconsin/breast-cancer-wisconsin.data"
)
BUNDLED_SHA256 = "402c585309c399237740f635ef9919dc512cca12cbeb20de5e563a4593f22b64"
LABEL_CODES = {2: 0, 4: 1}
N_ATTRIBUTES = 9
MISSING_POLICIES = ("impute-median", "drop-rows")


class DataFormatError(ValueError):
    pass


def bundled_path() -> str:
    return str(resources.files("agghoo") / "datasets" / "breast-cancer-wisconsin.data")


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def fetch_breast_cancer(dest, url: str = UCI_URL, sha256: str | None = None) -> str:
    """Download the UCI file to ``dest`` and verify its checksum when one is given."""
    with urllib.request.urlopen(url, timeout=60) as resp:
        payload = resp.read()
    digest = hashlib.sha256(payload).hexdigest()
    if sha256 is not None and digest != sha256:
        raise DataFormatError(f"checksum mismatch for {url}: {digest}")
    with open(dest, "wb") as fh:
        fh.write(payload)
    return digest


def parse_breast_cancer(text: str):
    """Rows of ``(attributes with NaN for '?', label)``; strict about the layout."""
    feats, labels = [], []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != N_ATTRIBUTES + 2:
            raise DataFormatError(f"line {lineno}: expected {N_ATTRIBUTES + 2} fields, got {len(row)}")
        values = []
        for cell in row[1:-1]:
            cell = cell.strip()
            if cell == "?":
                values.append(np.nan)
                continue
            try:
                values.append(float(int(cell)))
            except ValueError:
                raise DataFormatError(f"line {lineno}: bad attribute value {cell!r}") from None
        try:
            code = int(row[-1].strip())
        except ValueError:
            raise DataFormatError(f"line {lineno}: bad class code {row[-1]!r}") from None
        if code not in LABEL_CODES:
            raise DataFormatError(f"line {lineno}: unknown class code {code}")
        feats.append(values)
        labels.append(LABEL_CODES[code])
    if not feats:
        raise DataFormatError("no data rows")
    return np.array(feats, dtype=np.float64), np.array(labels, dtype=np.int64)


def load_breast_cancer(source=None, missing_policy: str = "impute-median") -> Dataset:
    """Load the Wisconsin data from ``source`` (default: the bundled copy).

    ``missing_policy`` is ``"impute-median"`` (replace ``?`` by the median of
    the observed values of its column; keeps all 699 rows) or
    ``"drop-rows"`` (683 rows remain).
    """
    if missing_policy not in MISSING_POLICIES:
        raise ValueError(f"missing_policy must be one of {MISSING_POLICIES}")
    path = bundled_path() if source is None else os.fspath(source)
    try:
        with open(path, encoding="ascii") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc
    log.info("loading %s (sha256 %s)", path, hashlib.sha256(text.encode()).hexdigest())
    X, y = parse_breast_cancer(text)
    missing = np.isnan(X)
    if missing_policy == "drop-rows":
        keep = ~missing.any(axis=1)
        X, y = X[keep], y[keep]
    elif missing.any():
        for j in np.flatnonzero(missing.any(axis=0)):
            col = X[:, j]
            col[np.isnan(col)] = np.median(col[~np.isnan(col)])
    return Dataset(X, y, 2)


def train_test_resplit(data: Dataset, train_n: int, seed) -> tuple[Dataset, Dataset]:
    """Uniform random partition into ``train_n`` training rows and the rest."""
    if not 1 <= train_n < data.n:
        raise ValueError(f"train_n must lie in [1, {data.n})")
    perm = np.random.default_rng(seed).permutation(data.n)
    return data.subset(np.sort(perm[:train_n])), data.subset(np.sort(perm[train_n:]))


def write_csv(data: Dataset, path) -> None:
    """One row per observation, features then the label; ``repr`` floats round-trip exactly."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{j + 1}" for j in range(data.dim)] + [f"label(M={data.class_count})"])
        for x, y in zip(data.features.tolist(), data.labels.tolist()):
            w.writerow([repr(v) for v in x] + [y])


def read_csv(path) -> Dataset:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataFormatError(f"{path}: empty file")
    head = rows[0][-1]
    try:
        M = int(head[head.index("M=") + 2 : head.rindex(")")])
    except ValueError:
        raise DataFormatError(f"{path}: header lacks the class count") from None
    body = [r for r in rows[1:] if r]
    X = np.array([[float(v) for v in r[:-1]] for r in body], dtype=np.float64)
    y = np.array([int(r[-1]) for r in body], dtype=np.int64)
    return Dataset(X, y, M)
