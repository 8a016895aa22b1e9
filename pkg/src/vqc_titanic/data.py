"""Loading, cleaning, scaling and splitting the titanic3 passenger table."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from sklearn.preprocessing import MinMaxScaler

RAW_COLUMNS = (
    "pclass", "survived", "name", "sex", "age", "sibsp", "parch",
    "ticket", "fare", "cabin", "embarked", "boat", "body", "home.dest",
)
FEATURES = ("pclass", "sex", "age", "sibsp", "parch")
SEX_CODES = {"female": 0, "male": 1}


class DataFormatError(ValueError):
    pass


def titanic3_path() -> Path:
    """Path of the bundled titanic3 table (1309 passengers)."""
    return Path(resources.files("vqc_titanic") / "datasets" / "titanic3.csv")


@dataclass(frozen=True)
class RawRecord:
    pclass: int
    survived: int
    name: str
    sex: str
    age: Optional[float]
    sibsp: Optional[int]
    parch: Optional[int]
    ticket: str = ""
    fare: Optional[float] = None
    cabin: Optional[str] = None
    embarked: Optional[str] = None
    boat: Optional[str] = None
    body: Optional[int] = None
    home_dest: Optional[str] = None


def _opt(value: str, cast):
    value = value.strip()
    return None if value in ("", "?", "NA") else cast(value)


def _int(value: str) -> int:
    return int(float(value))


def load_raw(path) -> List[RawRecord]:
    """Parse a titanic3 CSV with a header row. Missing cells become ``None``."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        unknown = set(header) - set(RAW_COLUMNS)
        if unknown:
            raise DataFormatError(f"{path}: unknown columns {sorted(unknown)}")
        missing = set(RAW_COLUMNS) - set(header)
        if missing:
            raise DataFormatError(f"{path}: missing columns {sorted(missing)}")
        records = []
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(header):
                raise DataFormatError(
                    f"{path}:{line}: expected {len(header)} fields, found {len(row)}"
                )
            cell = dict(zip(header, row))
            try:
                rec = RawRecord(
                    pclass=_int(cell["pclass"]),
                    survived=_int(cell["survived"]),
                    name=cell["name"],
                    sex=cell["sex"].strip(),
                    age=_opt(cell["age"], float),
                    sibsp=_opt(cell["sibsp"], _int),
                    parch=_opt(cell["parch"], _int),
                    ticket=cell["ticket"],
                    fare=_opt(cell["fare"], float),
                    cabin=_opt(cell["cabin"], str),
                    embarked=_opt(cell["embarked"], str),
                    boat=_opt(cell["boat"], str),
                    body=_opt(cell["body"], _int),
                    home_dest=_opt(cell["home.dest"], str),
                )
            except ValueError as exc:
                raise DataFormatError(f"{path}:{line}: {exc}") from None
            if rec.survived not in (0, 1) or rec.pclass not in (1, 2, 3):
                raise DataFormatError(f"{path}:{line}: survived/pclass out of range")
            if rec.sex not in SEX_CODES:
                raise DataFormatError(f"{path}:{line}: unknown sex {rec.sex!r}")
            records.append(rec)
    if not records:
        raise DataFormatError(f"{path}: no data rows")
    return records


@dataclass(frozen=True)
class Dataset:
    """Scaled feature matrix (columns in :data:`FEATURES` order) and 0/1 labels.

    ``raw_features`` keeps the unscaled, imputed values so a split can refit
    the scaler on its training rows.
    """

    features: np.ndarray
    labels: np.ndarray
    scaler_params: Tuple[Tuple[float, float], ...]
    raw_features: Optional[np.ndarray] = None
    n_imputed: int = 0
    imputed_age: float = math.nan

    def __len__(self):
        return self.labels.shape[0]

    @property
    def label_counts(self):
        return {0: int(np.sum(self.labels == 0)), 1: int(np.sum(self.labels == 1))}

    def take(self, idx) -> "Dataset":
        raw = None if self.raw_features is None else self.raw_features[idx]
        return replace(self, features=self.features[idx], labels=self.labels[idx], raw_features=raw)


def fit_scaler(raw: np.ndarray) -> MinMaxScaler:
    scaler = MinMaxScaler().fit(raw)
    flat = np.flatnonzero(scaler.data_range_ == 0)
    if flat.size:
        names = [FEATURES[i] if raw.shape[1] == len(FEATURES) else str(i) for i in flat]
        warnings.warn(f"zero-range columns {names} scale to 0", RuntimeWarning, stacklevel=2)
    return scaler


def scale(raw: np.ndarray, params: Sequence[Tuple[float, float]]) -> np.ndarray:
    """Min-max transform with stored ``(min, max)`` pairs; zero range maps to 0."""
    lo = np.array([p[0] for p in params])
    span = np.array([p[1] - p[0] for p in params])
    span = np.where(span == 0, 1.0, span)
    return (np.asarray(raw, dtype=np.float64) - lo) / span


def clean(records: Sequence[RawRecord]) -> Dataset:
    """Keep five features, impute mean age, encode sex, min-max scale each column."""
    if not records:
        raise ValueError("no records to clean")
    ages = [r.age for r in records if r.age is not None]
    mean_age = float(np.mean(ages)) if ages else 0.0
    n_imputed = len(records) - len(ages)

    rows, labels = [], []
    patched = 0
    for r in records:
        sibsp, parch = r.sibsp, r.parch
        if sibsp is None or parch is None:
            patched += 1
        rows.append((
            r.pclass,
            SEX_CODES[r.sex],
            mean_age if r.age is None else r.age,
            0 if sibsp is None else sibsp,
            0 if parch is None else parch,
        ))
        labels.append(r.survived)
    if patched:
        warnings.warn(f"{patched} records missing sibsp/parch; treated as 0", RuntimeWarning, stacklevel=2)

    raw = np.array(rows, dtype=np.float64)
    scaler = fit_scaler(raw)
    params = tuple((float(a), float(b)) for a, b in zip(scaler.data_min_, scaler.data_max_))
    return Dataset(
        features=scale(raw, params),
        labels=np.array(labels, dtype=int),
        scaler_params=params,
        raw_features=raw,
        n_imputed=n_imputed,
        imputed_age=mean_age,
    )


def load_titanic3(path=None) -> Dataset:
    return clean(load_raw(titanic3_path() if path is None else path))


def n_train_rows(n: int, train_fraction: float) -> int:
    # tolerance guards products such as 100 * 0.29 = 28.999999999999996
    return int(math.floor(n * train_fraction + 1e-9))


def split(
    data: Dataset,
    train_fraction: float,
    seed: int,
    stratify: bool = False,
    refit_scaler: bool = False,
):
    """Seeded shuffle, first ``floor(N * f)`` rows train, the rest test.

    With ``stratify`` the shuffle is done per class and the training share of
    each class is ``floor(n_c * f)``. With ``refit_scaler`` both halves are
    rescaled with min/max taken from the training rows only.
    """
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    n = len(data)
    rng = np.random.default_rng(seed)
    if stratify:
        train_idx, test_idx = [], []
        for c in (0, 1):
            members = np.flatnonzero(data.labels == c)
            members = members[rng.permutation(members.size)]
            k = n_train_rows(members.size, train_fraction)
            train_idx.append(members[:k])
            test_idx.append(members[k:])
        train_idx = np.sort(np.concatenate(train_idx))
        test_idx = np.sort(np.concatenate(test_idx))
    else:
        perm = rng.permutation(n)
        k = n_train_rows(n, train_fraction)
        train_idx, test_idx = perm[:k], perm[k:]
    if train_idx.size == 0 or test_idx.size == 0:
        raise ValueError(f"train_fraction={train_fraction} leaves an empty side for N={n}")

    train, test = data.take(train_idx), data.take(test_idx)
    if refit_scaler:
        if data.raw_features is None:
            raise ValueError("refit_scaler needs raw_features")
        scaler = fit_scaler(train.raw_features)
        params = tuple((float(a), float(b)) for a, b in zip(scaler.data_min_, scaler.data_max_))
        train = replace(train, features=scale(train.raw_features, params), scaler_params=params)
        test = replace(test, features=scale(test.raw_features, params), scaler_params=params)
    return train, test


def write_dataset(data: Dataset, path) -> None:
    """Audit dump: five scaled features plus the label, full float precision."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FEATURES + ("survived",))
        for row, label in zip(data.features, data.labels):
            w.writerow([repr(float(v)) for v in row] + [int(label)])


def read_dataset(path) -> Dataset:
    """Read a dump written by :func:`write_dataset` (scaler params are taken as identity)."""
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if table.shape[1] != len(FEATURES) + 1:
        raise DataFormatError(f"{path}: expected {len(FEATURES) + 1} columns")
    feats = table[:, :-1]
    return Dataset(
        features=feats,
        labels=table[:, -1].astype(int),
        scaler_params=tuple((0.0, 1.0) for _ in FEATURES),
        raw_features=feats.copy(),
    )
