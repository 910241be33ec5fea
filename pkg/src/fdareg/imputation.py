"""Non-functional missing-data baselines on a common grid.

Vectors live on a fixed p-point grid with a boolean mask of observed
entries. Mean imputation fills a hole with the column mean over observed
values; k-NN imputation ranks donor samples by the missing-aware distance

    d(x, y) = (1 / |nm(x) & nm(y)|) * sum_{j in nm(x) & nm(y)} (x_j - y_j)^2

(nm(x) = indices observed in x) and fills a hole with the unweighted mean of
the k nearest donors that observe the coordinate. Expert scaling centers and
normalizes each sample over its own observed entries, mirroring functional
centering/reduction without any function representation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ImputationError, IncomparableSampleError, ScalingError, ValidationError
from .fdata import Dataset


@dataclass(frozen=True)
class MaskedVector:
    """A p-vector on the common grid plus the set of observed indices."""

    values: np.ndarray
    mask: np.ndarray  # True where observed

    def __post_init__(self):
        if self.values.shape != self.mask.shape or self.values.ndim != 1:
            raise ValidationError("values and mask must be 1-d with equal length")
        if not np.any(self.mask):
            raise ValidationError("a masked vector needs at least one observed entry")
        self.values.setflags(write=False)
        self.mask.setflags(write=False)

    @property
    def observed(self) -> np.ndarray:
        return np.flatnonzero(self.mask)


def masked_matrix_from_dataset(dataset: Dataset, grid: np.ndarray, atol: float = 1e-9):
    """Map a (possibly holed) dataset onto grid-aligned value/mask matrices.

    Every sample abscissa must coincide with a grid point (the holes
    benchmark only removes points, it never moves them).
    """
    grid = np.asarray(grid, dtype=float)
    p = grid.size
    n = len(dataset)
    values = np.zeros((n, p))
    mask = np.zeros((n, p), dtype=bool)
    for i, f in enumerate(dataset.functions):
        idx = np.searchsorted(grid, f.x)
        idx = np.clip(idx, 0, p - 1)
        left = np.clip(idx - 1, 0, p - 1)
        idx = np.where(np.abs(grid[left] - f.x) < np.abs(grid[idx] - f.x), left, idx)
        if not np.allclose(grid[idx], f.x, atol=atol, rtol=0):
            raise ValidationError(
                f"function {f.id} has samples off the common grid"
            )
        values[i, idx] = f.y
        mask[i, idx] = True
    return values, mask


class MeanImputer:
    """Column means over the observed entries of the fitted data."""

    def __init__(self):
        self.column_means_ = None

    def fit(self, values: np.ndarray, mask: np.ndarray) -> "MeanImputer":
        mask = np.asarray(mask, dtype=bool)
        counts = mask.sum(axis=0)
        if np.any(counts == 0):
            cols = np.flatnonzero(counts == 0)
            raise ImputationError(
                f"columns {cols.tolist()} are observed in no sample; "
                "their mean is undefined"
            )
        sums = np.where(mask, values, 0.0).sum(axis=0)
        self.column_means_ = sums / counts
        return self

    def transform(self, values: np.ndarray, mask: np.ndarray) -> np.ndarray:
        out = np.array(values, dtype=float)
        mask = np.asarray(mask, dtype=bool)
        out[~mask] = np.broadcast_to(self.column_means_, out.shape)[~mask]
        return out


class KnnImputer:
    """Nearest-donor imputation under the missing-aware distance.

    Donors come from the fitted data; for each hole the k nearest donors
    observing that coordinate contribute their unweighted mean. Distance
    ties break toward the lower donor index. When fewer than k donors
    qualify, all qualifying ones are used with a warning.
    """

    def __init__(self, k: int):
        if k < 1:
            raise ValidationError("k must be >= 1")
        self.k = int(k)
        self.values_ = None
        self.mask_ = None

    def fit(self, values: np.ndarray, mask: np.ndarray) -> "KnnImputer":
        self.values_ = np.array(values, dtype=float)
        self.mask_ = np.asarray(mask, dtype=bool)
        return self

    def _distances(self, x: np.ndarray, m: np.ndarray, skip: int | None) -> np.ndarray:
        shared = self.mask_ & m[None, :]
        counts = shared.sum(axis=1)
        diff = np.where(shared, self.values_ - x[None, :], 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            d = np.einsum("ij,ij->i", diff, diff) / counts
        d[counts == 0] = np.inf
        if skip is not None:
            d[skip] = np.inf
        return d

    def transform(
        self, values: np.ndarray, mask: np.ndarray, is_fit_data: bool = False
    ) -> np.ndarray:
        """Fill holes row by row.

        With ``is_fit_data=True`` row i never donates to itself (used when
        imputing the very matrix the imputer was fitted on).
        """
        out = np.array(values, dtype=float)
        mask = np.asarray(mask, dtype=bool)
        for i in range(out.shape[0]):
            holes = np.flatnonzero(~mask[i])
            if holes.size == 0:
                continue
            d = self._distances(out[i], mask[i], skip=i if is_fit_data else None)
            if not np.any(np.isfinite(d)):
                raise IncomparableSampleError(
                    f"sample {i} shares no observed coordinate with any donor"
                )
            order = np.lexsort((np.arange(d.size), d))  # distance, then index
            for j in holes:
                donors = order[self.mask_[order[:], j] & np.isfinite(d[order])]
                if donors.size == 0:
                    raise ImputationError(
                        f"no donor observes coordinate {j} for sample {i}"
                    )
                if donors.size < self.k:
                    warnings.warn(
                        f"only {donors.size} donors observe coordinate {j} "
                        f"for sample {i}; using all of them",
                        stacklevel=2,
                    )
                use = donors[: self.k]
                out[i, j] = float(np.mean(self.values_[use, j]))
        return out


def mean_impute(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """One-shot mean imputation of a dataset (fit and fill the same data)."""
    return MeanImputer().fit(values, mask).transform(values, mask)


def knn_impute(values: np.ndarray, mask: np.ndarray, k: int) -> np.ndarray:
    """One-shot k-NN imputation of a dataset (donors are its own rows)."""
    imp = KnnImputer(k).fit(values, mask)
    return imp.transform(values, mask, is_fit_data=True)


def expert_scale(mv: MaskedVector) -> MaskedVector:
    """Center and normalize observed entries over the observed index set.

    Observed entries become ``(x_i - mean) / sqrt(sum (x_j - mean)^2)``
    with both statistics over ``nm(x)``; the mask is unchanged and missing
    entries stay untouched. Raises :class:`ScalingError` when fewer than 2
    entries are observed or the observed values are constant.
    """
    obs = mv.observed
    if obs.size < 2:
        raise ScalingError("expert scaling needs at least 2 observed entries")
    x = mv.values[obs]
    mean = float(np.mean(x))
    dev = x - mean
    denom = float(np.sqrt(dev @ dev))
    if denom < 1e-12 * max(1.0, float(np.max(np.abs(x)))):
        raise ScalingError("observed values are constant; scaling is undefined")
    out = np.array(mv.values, dtype=float)
    out[obs] = dev / denom
    return MaskedVector(out, np.array(mv.mask))


def expert_scale_matrix(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Row-wise expert scaling of a masked matrix."""
    out = np.array(values, dtype=float)
    for i in range(out.shape[0]):
        mv = expert_scale(MaskedVector(out[i].copy(), np.asarray(mask[i], dtype=bool)))
        out[i] = mv.values
    return out
