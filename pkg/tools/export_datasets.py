"""Regenerate the bundled small-dataset CSVs and their checksum manifest.

Needs scikit-learn, which ships these four datasets; the package itself does not.

    python tools/export_datasets.py
"""
from pathlib import Path

from sklearn import datasets as skd

from hqnas.datasets import MANIFEST, sha256_file, write_csv

OUT = Path(__file__).resolve().parents[1] / "src" / "hqnas" / "data"

LOADERS = {
    "iris": skd.load_iris,
    "wine": skd.load_wine,
    "breast_cancer": skd.load_breast_cancer,
    "digits": skd.load_digits,
}


def clean(name):
    return "".join(c if c.isalnum() else "_" for c in name).strip("_")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    lines = []
    for name, loader in LOADERS.items():
        bunch = loader()
        names = [clean(str(n)) for n in bunch.feature_names]
        path = OUT / f"{name}.csv"
        write_csv(path, bunch.data, bunch.target, names)
        lines.append(f"{sha256_file(path)}  {path.name}")
        print(path, bunch.data.shape)
    (OUT / MANIFEST).write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
