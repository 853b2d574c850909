import gzip
import shutil

import numpy as np
import pytest

from hqnas import datasets
from hqnas.datasets import (MNIST_FILES, DatasetError, IntegrityError, SplitError, load,
                            sha256_file, stratified_split, write_idx_images, write_idx_labels)


@pytest.mark.parametrize("name, n, d, c", [
    ("iris", 150, 4, 3),
    ("wine", 178, 13, 3),
    ("breast_cancer", 569, 30, 2),
    ("digits", 1797, 64, 10),
])
def test_bundled_shapes(name, n, d, c):
    split = load(name)
    assert len(split.train_y) + len(split.val_y) == n
    assert split.d == d == datasets.SHAPES[name][0]
    assert split.n_classes == c
    assert set(np.unique(split.val_y)) == set(range(c))
    assert len(split.val_y) == pytest.approx(0.2 * n, abs=c)


def test_standardized_with_train_statistics():
    split = load("wine", seed=3)
    assert np.all(np.abs(split.train_x.mean(axis=0)) < 1e-9)
    np.testing.assert_allclose(split.train_x.var(axis=0), 1.0, atol=1e-6)
    # validation partition shares the transform, so it is only approximately standardized
    assert np.all(np.abs(split.val_x.mean(axis=0)) < 1.0)


def test_load_is_deterministic_and_seeded():
    a, b, c = load("iris", seed=5), load("iris", seed=5), load("iris", seed=6)
    np.testing.assert_array_equal(a.val_idx, b.val_idx)
    np.testing.assert_array_equal(a.train_x, b.train_x)
    assert not np.array_equal(a.val_idx, c.val_idx)


def test_unknown_dataset():
    with pytest.raises(DatasetError):
        load("cifar")


def copy_bundle(tmp_path, name="iris"):
    src = datasets.bundled_data_dir()
    shutil.copy(src / f"{name}.csv", tmp_path)
    shutil.copy(src / datasets.MANIFEST, tmp_path)
    return tmp_path


def test_checksum_mismatch(tmp_path):
    d = copy_bundle(tmp_path)
    with open(d / "iris.csv", "a") as f:
        f.write("0,0,0,0,0\n")
    with pytest.raises(IntegrityError):
        load("iris", data_dir=d)


def test_missing_file_is_named(tmp_path):
    d = copy_bundle(tmp_path)
    with pytest.raises(DatasetError, match="wine.csv"):
        load("wine", data_dir=d)


def test_corrupt_csv_is_named(tmp_path):
    (tmp_path / "iris.csv").write_text("a,b,label\n1,2,x\n")
    with pytest.raises(DatasetError, match="iris.csv"):
        load("iris", data_dir=tmp_path)


# -- splitting ----------------------------------------------------------------

def test_balanced_split_example():
    x = np.arange(200, dtype=float).reshape(100, 2)
    y = np.repeat([0, 1], 50)
    s = stratified_split(x, y, 0.2, seed=0)
    assert (len(s.train_y), len(s.val_y)) == (80, 20)
    assert np.bincount(s.val_y).tolist() == [10, 10]


def test_split_partitions_indices():
    rng = np.random.default_rng(1)
    y = rng.integers(0, 4, 137)
    y[:8] = [0, 0, 1, 1, 2, 2, 3, 3]
    x = rng.normal(size=(137, 3))
    for seed in range(5):
        s = stratified_split(x, y, 0.25, seed)
        both = np.concatenate([s.train_idx, s.val_idx])
        assert sorted(both.tolist()) == list(range(137))
        np.testing.assert_array_equal(s.train_x, x[s.train_idx])
        np.testing.assert_array_equal(s.val_y, y[s.val_idx])
        s2 = stratified_split(x, y, 0.25, seed)
        np.testing.assert_array_equal(s.val_idx, s2.val_idx)


def test_singleton_class_rejected():
    with pytest.raises(SplitError):
        stratified_split(np.zeros((5, 1)), np.array([0, 0, 0, 0, 1]), 0.2, 0)
    with pytest.raises(SplitError):
        stratified_split(np.zeros((4, 1)), np.array([0, 0, 1, 1]), 1.0, 0)


# -- MNIST IDX ------------------------------------------------------------------

def fake_mnist(tmp_path, n_train=50, n_val=20, compress=False):
    rng = np.random.default_rng(2)
    parts = {
        "train_images": rng.integers(0, 256, (n_train, 28, 28)),
        "train_labels": np.arange(n_train) % 10,
        "val_images": rng.integers(0, 256, (n_val, 28, 28)),
        "val_labels": np.arange(n_val) % 10,
    }
    parts["train_images"][:, 0, 0] = 0  # a constant pixel exercises the variance floor
    for key, fname in MNIST_FILES.items():
        writer = write_idx_images if key.endswith("images") else write_idx_labels
        path = tmp_path / fname
        writer(path, parts[key])
        if compress:
            with open(path, "rb") as src, gzip.open(str(path) + ".gz", "wb") as dst:
                dst.write(src.read())
            path.unlink()
    return parts


@pytest.mark.parametrize("compress", [False, True])
def test_mnist_from_idx(tmp_path, compress):
    parts = fake_mnist(tmp_path, compress=compress)
    split = load("mnist", data_dir=tmp_path)
    assert split.train_x.shape == (50, 784) and split.val_x.shape == (20, 784)
    assert split.n_classes == 10
    np.testing.assert_array_equal(split.val_y, parts["val_labels"])
    assert np.all(np.isfinite(split.train_x))
    assert np.all(split.train_x[:, 0] == 0)


def test_mnist_checksum_and_errors(tmp_path):
    fake_mnist(tmp_path)
    names = list(MNIST_FILES.values())
    manifest = "".join(f"{sha256_file(tmp_path / n)}  {n}\n" for n in names)
    (tmp_path / datasets.MANIFEST).write_text(manifest)
    load("mnist", data_dir=tmp_path)
    data = bytearray((tmp_path / names[1]).read_bytes())
    data[-1] ^= 1
    (tmp_path / names[1]).write_bytes(bytes(data))
    with pytest.raises(IntegrityError):
        load("mnist", data_dir=tmp_path)
    (tmp_path / names[0]).unlink()
    with pytest.raises(DatasetError, match=names[0]):
        load("mnist", data_dir=tmp_path)
    with pytest.raises(DatasetError):
        load("mnist")


def test_idx_magic_checked(tmp_path):
    write_idx_labels(tmp_path / "labels", np.arange(5))
    with pytest.raises(DatasetError, match="magic"):
        datasets.read_idx_images(tmp_path / "labels")
