"""Benchmark datasets: bundled CSVs for the small sets, IDX files for MNIST.

Small datasets are split 80/20 stratified under a seed; MNIST uses its standard
60k/10k partition with the test images serving as validation. Features are
z-scored with training-partition statistics only.
"""
from __future__ import annotations

import csv
import gzip
import hashlib
import struct
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

MANIFEST = "datasets.sha256"
SMALL_DATASETS = ("iris", "wine", "breast_cancer", "digits")
DATASET_NAMES = SMALL_DATASETS + ("mnist",)

# (feature dimension, class count) per dataset
SHAPES = {
    "iris": (4, 3),
    "wine": (13, 3),
    "breast_cancer": (30, 2),
    "digits": (64, 10),
    "mnist": (784, 10),
}

MNIST_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "val_images": "t10k-images-idx3-ubyte",
    "val_labels": "t10k-labels-idx1-ubyte",
}
IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
MNIST_VARIANCE_FLOOR = 1e-3


class DatasetError(Exception):
    pass


class IntegrityError(DatasetError):
    pass


class SplitError(DatasetError):
    pass


@dataclass
class DatasetSplit:
    train_x: np.ndarray
    train_y: np.ndarray
    val_x: np.ndarray
    val_y: np.ndarray
    n_classes: int
    name: str = ""
    train_idx: np.ndarray | None = None
    val_idx: np.ndarray | None = None

    @property
    def d(self) -> int:
        return self.train_x.shape[1]

    def __post_init__(self):
        if len(self.train_y) == 0 or len(self.val_y) == 0:
            raise DatasetError("both partitions must be nonempty")
        if self.train_x.shape[1] != self.val_x.shape[1]:
            raise DatasetError("train and validation feature counts differ")
        for y in (self.train_y, self.val_y):
            if y.min() < 0 or y.max() >= self.n_classes:
                raise DatasetError(f"labels must lie in [0, {self.n_classes})")


def bundled_data_dir() -> Path:
    return Path(str(resources.files("hqnas") / "data"))


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def read_manifest(data_dir: Path) -> dict[str, str]:
    path = Path(data_dir) / MANIFEST
    if not path.exists():
        return {}
    entries = {}
    for line in path.read_text().splitlines():
        if line.strip():
            digest, name = line.split(maxsplit=1)
            entries[name.strip().lstrip("*")] = digest.lower()
    return entries


def verify_file(path: Path, manifest: dict[str, str]):
    if not path.exists():
        raise DatasetError(f"missing dataset file: {path}")
    expected = manifest.get(path.name)
    if expected is not None and sha256_file(path) != expected:
        raise IntegrityError(f"checksum mismatch for {path}")


def read_csv(path: Path) -> tuple[np.ndarray, np.ndarray]:
    """Features and integer labels from a CSV whose last column is ``label``."""
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
        header, body = rows[0], rows[1:]
        if header[-1] != "label":
            raise ValueError("last column must be 'label'")
        x = np.array([[float(v) for v in r[:-1]] for r in body])
        y = np.array([int(r[-1]) for r in body])
    except (OSError, IndexError, ValueError) as exc:
        raise DatasetError(f"cannot parse {path}: {exc}") from exc
    if x.ndim != 2 or x.shape[1] != len(header) - 1:
        raise DatasetError(f"ragged rows in {path}")
    return x, y


def write_csv(path: Path, x: np.ndarray, y: np.ndarray, feature_names=None):
    names = feature_names or [f"x{i}" for i in range(x.shape[1])]
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(list(names) + ["label"])
        for row, label in zip(x, y):
            w.writerow([repr(float(v)) if not float(v).is_integer() else str(int(v)) for v in row]
                       + [int(label)])


def _open_maybe_gz(path: Path):
    if path.exists():
        return open(path, "rb")
    gz = path.with_name(path.name + ".gz")
    if gz.exists():
        return gzip.open(gz, "rb")
    raise DatasetError(f"missing dataset file: {path}")


def read_idx_images(path: Path) -> np.ndarray:
    with _open_maybe_gz(Path(path)) as f:
        header = f.read(16)
        if len(header) < 16:
            raise DatasetError(f"truncated IDX header in {path}")
        magic, count, rows, cols = struct.unpack(">IIII", header)
        if magic != IDX_IMAGES_MAGIC:
            raise DatasetError(f"bad magic 0x{magic:08x} in {path}")
        raw = f.read()
    if len(raw) != count * rows * cols:
        raise DatasetError(f"{path}: expected {count * rows * cols} pixel bytes, got {len(raw)}")
    return np.frombuffer(raw, dtype=np.uint8).reshape(count, rows, cols)


def read_idx_labels(path: Path) -> np.ndarray:
    with _open_maybe_gz(Path(path)) as f:
        header = f.read(8)
        if len(header) < 8:
            raise DatasetError(f"truncated IDX header in {path}")
        magic, count = struct.unpack(">II", header)
        if magic != IDX_LABELS_MAGIC:
            raise DatasetError(f"bad magic 0x{magic:08x} in {path}")
        raw = f.read()
    if len(raw) != count:
        raise DatasetError(f"{path}: expected {count} labels, got {len(raw)}")
    return np.frombuffer(raw, dtype=np.uint8).astype(np.int64)


def write_idx_images(path: Path, images: np.ndarray):
    images = np.asarray(images, dtype=np.uint8)
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, *images.shape))
        f.write(images.tobytes())


def write_idx_labels(path: Path, labels: np.ndarray):
    labels = np.asarray(labels, dtype=np.uint8)
    with open(path, "wb") as f:
        f.write(struct.pack(">II", IDX_LABELS_MAGIC, len(labels)))
        f.write(labels.tobytes())


def stratified_split(x, y, val_fraction: float, seed: int) -> DatasetSplit:
    """Per-class proportional train/validation split (no feature scaling)."""
    if not 0 < val_fraction < 1:
        raise SplitError("val_fraction must lie strictly between 0 and 1")
    x, y = np.asarray(x, dtype=float), np.asarray(y)
    classes, counts = np.unique(y, return_counts=True)
    if np.any(counts < 2):
        raise SplitError(f"classes with fewer than 2 samples: {classes[counts < 2].tolist()}")
    rng = np.random.default_rng(seed)
    train_idx, val_idx = [], []
    for c, count in zip(classes, counts):
        members = rng.permutation(np.flatnonzero(y == c))
        n_val = min(max(int(round(count * val_fraction)), 1), count - 1)
        val_idx.append(members[:n_val])
        train_idx.append(members[n_val:])
    train_idx = np.sort(np.concatenate(train_idx))
    val_idx = np.sort(np.concatenate(val_idx))
    return DatasetSplit(x[train_idx], y[train_idx], x[val_idx], y[val_idx],
                        n_classes=int(y.max()) + 1, train_idx=train_idx, val_idx=val_idx)


def standardize(split: DatasetSplit, variance_floor: float = 0.0) -> DatasetSplit:
    """Z-score both partitions with training statistics; constant features only get centred."""
    mean = split.train_x.mean(axis=0)
    var = split.train_x.var(axis=0)
    if variance_floor > 0:
        var = np.maximum(var, variance_floor)
    std = np.sqrt(var)
    std[std == 0] = 1.0
    split.train_x = (split.train_x - mean) / std
    split.val_x = (split.val_x - mean) / std
    return split


def load(name: str, data_dir=None, seed: int = 0, val_fraction: float = 0.2) -> DatasetSplit:
    name = name.lower()
    if name not in DATASET_NAMES:
        raise DatasetError(f"unknown dataset {name!r}; choose from {', '.join(DATASET_NAMES)}")
    if name == "mnist":
        if data_dir is None:
            raise DatasetError("MNIST needs a data_dir holding the IDX files")
        return load_mnist(data_dir)
    data_dir = Path(data_dir) if data_dir is not None else bundled_data_dir()
    path = data_dir / f"{name}.csv"
    verify_file(path, read_manifest(data_dir))
    x, y = read_csv(path)
    split = stratified_split(x, y, val_fraction, seed)
    split.name = name
    return standardize(split)


def load_mnist(data_dir) -> DatasetSplit:
    data_dir = Path(data_dir)
    manifest = read_manifest(data_dir)
    arrays = {}
    for key, fname in MNIST_FILES.items():
        path = data_dir / fname
        if not path.exists() and (data_dir / (fname + ".gz")).exists():
            path = data_dir / (fname + ".gz")
        verify_file(path, manifest)
        reader = read_idx_images if key.endswith("images") else read_idx_labels
        arrays[key] = reader(data_dir / fname)
    train_x = arrays["train_images"].reshape(len(arrays["train_images"]), -1) / 255.0
    val_x = arrays["val_images"].reshape(len(arrays["val_images"]), -1) / 255.0
    split = DatasetSplit(train_x, arrays["train_labels"], val_x, arrays["val_labels"],
                         n_classes=10, name="mnist")
    return standardize(split, variance_floor=MNIST_VARIANCE_FLOOR)
