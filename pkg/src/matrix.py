# Copyright 2023 Canonical Ltd.
# See LICENSE file for licensing details.

"""Feature vectors and feature matrices, plus their CSV and line-delimited file forms.

A matrix file has a header row `id[,label],<feature names...>` and one row per instance. Values
are written with repr(), so reading a matrix back yields bit-identical floats, and the -1
sentinel appears verbatim.
"""

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

ID_COLUMN = "id"
LABEL_COLUMN = "label"


class FeatureError(Exception):
    """Exception raised for invalid feature requests or extraction preconditions."""


class MatrixFileError(FeatureError):
    """Exception raised when a matrix file cannot be read or is malformed."""


@dataclass(frozen=True)
class FeatureVector:
    """Named feature values of one instance, in catalog order."""

    instance_id: str
    values: Dict[str, float]

    def __getitem__(self, name: str) -> float:
        """Value of a named feature."""
        return self.values[name]

    def __len__(self) -> int:
        """Number of features."""
        return len(self.values)

    @property
    def names(self) -> List[str]:
        """Feature names in order."""
        return list(self.values)


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Feature values of a dataset: one row per instance, one column per feature."""

    ids: Tuple[str, ...]
    names: Tuple[str, ...]
    values: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(len(self.ids), len(self.names))
        if not np.all(np.isfinite(values)):
            raise FeatureError("feature matrix holds non-finite values")
        if len(set(self.names)) != len(self.names):
            raise FeatureError("feature matrix holds duplicate feature names")
        values.setflags(write=False)
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", values)

        if self.labels is not None:
            labels = np.array(self.labels, dtype=np.int64).reshape(-1)
            if len(labels) != len(self.ids):
                raise FeatureError(f"{len(labels)} labels for {len(self.ids)} rows")
            if not np.all((labels == 0) | (labels == 1)):
                raise FeatureError("labels must be 0 or 1")
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        """Number of instances."""
        return len(self.ids)

    @property
    def labeled(self) -> bool:
        """Whether labels are attached."""
        return self.labels is not None

    @classmethod
    def from_vectors(
        cls,
        vectors: Sequence[FeatureVector],
        names: Sequence[str],
        labels: Optional[Sequence[int]] = None,
    ) -> "FeatureMatrix":
        """Stacks feature vectors whose keys equal `names`."""
        for vector in vectors:
            if vector.names != list(names):
                raise FeatureError(f"vector {vector.instance_id} does not follow the catalog")
        values = np.array(
            [[vector.values[name] for name in names] for vector in vectors], dtype=np.float64
        )
        return cls(
            ids=tuple(vector.instance_id for vector in vectors),
            names=tuple(names),
            values=values.reshape(len(vectors), len(names)),
            labels=None if labels is None else np.asarray(labels),
        )

    def index_of(self, name: str) -> int:
        """Column index of a feature."""
        try:
            return self.names.index(name)
        except ValueError:
            raise FeatureError(f"unknown feature {name!r}")

    def column(self, name: str) -> np.ndarray:
        """Values of one feature across all instances."""
        return self.values[:, self.index_of(name)]

    def missing_features(self, names: Iterable[str]) -> List[str]:
        """Names that are not columns of this matrix, in the given order."""
        present = set(self.names)
        return [name for name in names if name not in present]

    def select(self, names: Sequence[str]) -> "FeatureMatrix":
        """Returns a matrix restricted to the given columns, in the given order.

        Raises:
            FeatureError: when a name is not a column of this matrix or the selection is empty.
        """
        if not names:
            raise FeatureError("empty feature selection")
        missing = self.missing_features(names)
        if missing:
            raise FeatureError(f"unknown features: {', '.join(missing)}")
        indices = [self.names.index(name) for name in names]
        return FeatureMatrix(
            ids=self.ids, names=tuple(names), values=self.values[:, indices], labels=self.labels
        )

    def take(self, rows: Sequence[int]) -> "FeatureMatrix":
        """Returns a matrix holding the given rows, in the given order."""
        rows = np.asarray(rows, dtype=np.int64)
        return FeatureMatrix(
            ids=tuple(self.ids[row] for row in rows),
            names=self.names,
            values=self.values[rows],
            labels=None if self.labels is None else self.labels[rows],
        )

    def row(self, index: int) -> FeatureVector:
        """Feature vector of one instance."""
        return FeatureVector(
            instance_id=self.ids[index],
            values={name: float(value) for name, value in zip(self.names, self.values[index])},
        )

    def write_csv(self, path: Union[str, Path]) -> None:
        """Writes the matrix as comma-separated values."""
        header = [ID_COLUMN] + ([LABEL_COLUMN] if self.labeled else []) + list(self.names)
        with open(path, "w", encoding="utf-8", newline="") as file:
            writer = csv.writer(file, lineterminator="\n")
            writer.writerow(header)
            for index, instance_id in enumerate(self.ids):
                prefix = [instance_id]
                if self.labeled:
                    prefix.append(str(int(self.labels[index])))
                writer.writerow(prefix + [repr(float(value)) for value in self.values[index]])
        logger.info(f"wrote {len(self)}x{len(self.names)} feature matrix to {path}")

    @classmethod
    def read_csv(cls, path: Union[str, Path]) -> "FeatureMatrix":
        """Reads a matrix written by write_csv.

        Raises:
            MatrixFileError: when the file cannot be read or a row is malformed.
        """
        try:
            with open(path, "r", encoding="utf-8", newline="") as file:
                rows = list(csv.reader(file))
        except (OSError, UnicodeDecodeError, csv.Error) as err:
            raise MatrixFileError(f"unable to read feature matrix {path}: {err}")
        if not rows or not rows[0] or rows[0][0] != ID_COLUMN:
            raise MatrixFileError(f"{path}: missing {ID_COLUMN!r} header")

        header = rows[0]
        labeled = len(header) > 1 and header[1] == LABEL_COLUMN
        offset = 2 if labeled else 1
        names = header[offset:]

        ids, labels, values = [], [], []
        for line_number, row in enumerate(rows[1:], start=2):
            if len(row) != len(header):
                raise MatrixFileError(
                    f"{path}:{line_number}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                if labeled:
                    labels.append(int(row[1]))
                values.append([float(value) for value in row[offset:]])
            except ValueError as err:
                raise MatrixFileError(f"{path}:{line_number}: {err}")
            ids.append(row[0])

        try:
            matrix = cls(
                ids=tuple(ids),
                names=tuple(names),
                values=np.array(values, dtype=np.float64).reshape(len(ids), len(names)),
                labels=np.array(labels, dtype=np.int64) if labeled else None,
            )
        except FeatureError as err:
            raise MatrixFileError(f"{path}: {err}")
        logger.info(f"read {len(matrix)}x{len(names)} feature matrix from {path}")
        return matrix

    def write_jsonl(self, path: Union[str, Path]) -> None:
        """Writes one record per instance with its id, label and named feature values."""
        with open(path, "w", encoding="utf-8") as file:
            for index in range(len(self)):
                vector = self.row(index)
                record = {"instance_id": vector.instance_id}
                if self.labeled:
                    record[LABEL_COLUMN] = int(self.labels[index])
                record["features"] = vector.values
                file.write(json.dumps(record))
                file.write("\n")

    def write_metadata(
        self, path: Union[str, Path], run_config: Dict, catalog_version: int
    ) -> None:
        """Writes the sidecar describing how the matrix was produced."""
        metadata = {
            "catalog_version": catalog_version,
            "instances": len(self),
            "features": len(self.names),
            "labeled": self.labeled,
            "run_config": run_config,
        }
        with open(path, "w", encoding="utf-8") as file:
            file.write(json.dumps(metadata, indent=2, sort_keys=True))
            file.write("\n")
