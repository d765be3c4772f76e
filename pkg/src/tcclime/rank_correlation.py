"""Kendall-tau rank statistics and correlation-matrix estimators.

The tau statistic here is the plain U-statistic (tau-a): pairs tied in either
coordinate contribute sign 0 and no tie correction is applied. Three
evaluation paths exist (naive double loop, merge-sort counting, sign-matrix
GEMM); all three produce bit-identical results because each computes the
exact integer pair count before a single final division.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import (
    DataError,
    DimensionMismatch,
    EmptyInformativeSet,
    LengthMismatch,
    TooFewSamples,
    ZeroVariance,
)

__all__ = [
    "StudyDataset",
    "RankCorrelation",
    "kendall_tau_pair",
    "rank_correlation_matrix",
    "pearson_correlation_matrix",
    "weighted_aux_correlation",
    "save_dataset_csv",
    "load_dataset_csv",
]

# Naive double loop below this sample size, merge-sort counting above.
NAIVE_MAX_N = 64
# The sign-matrix GEMM path accumulates integer-valued float32 sums; partial
# sums stay below 2^24 (exactly representable) only while n^2 <= 2^24.
_GEMM_MAX_N = 4096
_GEMM_MEM_BYTES = 256 * 2**20


@dataclass
class StudyDataset:
    """One study's observations, rows = samples, columns = variables.

    Treated as read-only after construction. ``kind`` is "target" or
    "auxiliary"; ``label`` identifies the study in messages and manifests.
    """

    values: np.ndarray
    label: str = "target"
    kind: str = "target"
    columns: tuple[str, ...] | None = None
    dropped_rows: int = 0

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 2:
            raise DataError(f"dataset {self.label!r}: expected 2-D data, got shape {arr.shape}")
        if arr.shape[0] < 2:
            raise TooFewSamples(f"dataset {self.label!r}: need at least 2 rows, got {arr.shape[0]}")
        if not np.all(np.isfinite(arr)):
            bad = np.argwhere(~np.isfinite(arr))[0]
            raise DataError(
                f"dataset {self.label!r}: non-finite value at row {bad[0] + 1}, column {bad[1] + 1}"
            )
        if self.columns is not None:
            self.columns = tuple(self.columns)
            if len(self.columns) != arr.shape[1]:
                raise DimensionMismatch(
                    f"dataset {self.label!r}: {len(self.columns)} column names for {arr.shape[1]} columns"
                )
        self.values = arr

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]

    def subset(self, rows):
        """New dataset restricted to the given row indices."""
        return replace(self, values=self.values[np.asarray(rows)], dropped_rows=0)


@dataclass(frozen=True)
class RankCorrelation:
    """A correlation-matrix estimate together with its source sample count."""

    s_hat: np.ndarray
    source_n: int


def _validated_pair(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1:
        raise DataError("kendall_tau_pair expects 1-D vectors")
    if x.size != y.size:
        raise LengthMismatch(f"length {x.size} vs {y.size}")
    if x.size < 2:
        raise TooFewSamples(f"need at least 2 samples, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DataError("kendall_tau_pair requires finite values")
    return x, y


def _numerator2_naive(x, y):
    # Sum of sign products over all ordered pairs = 2*(concordant - discordant).
    # Every term is -1/0/1, so the float sum is an exact integer.
    dx = np.sign(x[:, None] - x[None, :])
    dy = np.sign(y[:, None] - y[None, :])
    return float(np.sum(dx * dy))


def _tied_pair_count(breaks):
    """Number of within-run pairs given run breaks (True where a new run starts)."""
    idx = np.nonzero(breaks)[0]
    lengths = np.diff(np.concatenate(([0], idx + 1, [breaks.size + 1])))
    return int(np.sum(lengths * (lengths - 1) // 2))


def _count_inversions(a):
    """Sorted copy of ``a`` and the number of strict inversions, by merge counting."""
    n = a.size
    if n <= 1:
        return a, 0
    mid = n // 2
    left, c_left = _count_inversions(a[:mid])
    right, c_right = _count_inversions(a[mid:])
    # For each right element, count strictly greater left elements.
    pos = np.searchsorted(left, right, side="right")
    cross = int(left.size) * int(right.size) - int(pos.sum())
    merged = np.concatenate((left, right))
    merged.sort()
    return merged, c_left + c_right + cross


def _numerator_merge(x, y):
    """Exact integer concordant-minus-discordant count in O(n log n)."""
    n = x.size
    order = np.lexsort((y, x))
    xs = x[order]
    ys = y[order]
    n0 = n * (n - 1) // 2
    bx = np.diff(xs) != 0
    n1 = _tied_pair_count(bx)
    n2 = _tied_pair_count(np.diff(np.sort(y)) != 0)
    n3 = _tied_pair_count(bx | (np.diff(ys) != 0))
    # Within x-tie groups ys is sorted, so inversions pair strictly
    # increasing x with strictly decreasing y: the discordant count.
    swaps = _count_inversions(ys)[1]
    return n0 - n1 - n2 + n3 - 2 * swaps


def kendall_tau_pair(x, y, method="auto"):
    """Kendall tau-a of two equal-length vectors.

    ``method`` is "auto" (size-based), "naive" (O(n^2) double loop) or
    "fast" (merge-sort counting). The two paths agree bit-for-bit.
    """
    x, y = _validated_pair(x, y)
    n = x.size
    if method == "auto":
        method = "naive" if n <= NAIVE_MAX_N else "fast"
    if method == "naive":
        num2 = _numerator2_naive(x, y)
    elif method == "fast":
        num2 = 2.0 * _numerator_merge(x, y)
    else:
        raise DataError(f"unknown tau method {method!r}")
    return num2 / (n * (n - 1))


def _values_of(data, caller):
    if isinstance(data, StudyDataset):
        return data.values
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2:
        raise DataError(f"{caller}: expected 2-D data, got shape {arr.shape}")
    if arr.shape[0] < 2:
        raise TooFewSamples(f"{caller}: need at least 2 rows, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{caller}: data must be finite")
    return arr


def _tau_matrix_gemm(x):
    """All pairwise tau numerators via one sign-matrix product.

    Row j of the sign matrix lists sign(x_mj - x_m'j) over ordered sample
    pairs; the Gram matrix then holds integer-valued sums, exact in float32
    for n <= 4096.
    """
    n, p = x.shape
    signs = np.empty((p, n * n), dtype=np.float32)
    for j in range(p):
        col = x[:, j]
        signs[j] = np.sign(col[:, None] - col[None, :]).ravel()
    gram = signs @ signs.T
    return gram.astype(np.float64)


def _tau_matrix_pairs(x):
    n, p = x.shape
    num2 = np.zeros((p, p))
    for i in range(p):
        for j in range(i + 1, p):
            num2[i, j] = num2[j, i] = 2.0 * _numerator_merge(x[:, i], x[:, j])
    return num2


def rank_correlation_matrix(data):
    """Rank-based correlation estimate sin(pi/2 * tau_ij), unit diagonal.

    ``data`` is a StudyDataset or a plain n x p array. Returns a
    RankCorrelation carrying the matrix and the sample count.
    """
    x = _values_of(data, "rank_correlation_matrix")
    n, p = x.shape
    scratch = p * n * n * 4 + n * n * 8
    if n <= _GEMM_MAX_N and scratch <= _GEMM_MEM_BYTES:
        num2 = _tau_matrix_gemm(x)
    else:
        num2 = _tau_matrix_pairs(x)
    tau = num2 / (n * (n - 1))
    s_hat = np.sin(np.pi / 2 * tau)
    np.fill_diagonal(s_hat, 1.0)
    return RankCorrelation(s_hat, n)


def pearson_correlation_matrix(data):
    """Sample Pearson correlation matrix with exact unit diagonal."""
    x = _values_of(data, "pearson_correlation_matrix")
    centered = x - x.mean(axis=0)
    scale = np.sqrt(np.sum(centered * centered, axis=0))
    if np.any(scale == 0):
        bad = int(np.argmin(scale))
        raise ZeroVariance(f"column {bad + 1} is constant")
    corr = (centered.T @ centered) / np.outer(scale, scale)
    corr = np.clip((corr + corr.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return corr


def weighted_aux_correlation(mats, sizes=None):
    """Sample-size weighted average of correlation matrices.

    ``mats`` is a list of RankCorrelation (sizes taken from them) or plain
    matrices with ``sizes`` given. Weights are n_k / sum(n_k). Computed in
    anchored form (first matrix plus weighted deviations) so identical
    inputs return the first matrix bit-for-bit.
    """
    mats = list(mats)
    if not mats:
        raise EmptyInformativeSet("weighted_aux_correlation needs at least one study")
    if sizes is None:
        sizes = [m.source_n for m in mats]
        mats = [m.s_hat for m in mats]
    sizes = [int(s) for s in sizes]
    if len(sizes) != len(mats):
        raise DimensionMismatch(f"{len(mats)} matrices but {len(sizes)} sizes")
    if any(s < 1 for s in sizes):
        raise DataError("study sizes must be positive")
    first = np.asarray(mats[0], dtype=float)
    p = first.shape[0]
    total = float(sum(sizes))
    out = first.copy()
    for mat, n_k in zip(mats[1:], sizes[1:]):
        mat = np.asarray(mat, dtype=float)
        if mat.shape != first.shape:
            raise DimensionMismatch(f"correlation shapes differ: {mat.shape} vs {first.shape}")
        out += (n_k / total) * (mat - first)
    np.fill_diagonal(out, 1.0)
    return out


_MISSING_TOKENS = {"", "na", "nan", "null", "none"}


def save_dataset_csv(path, dataset):
    """Write a StudyDataset as CSV: header row, then one row per observation."""
    names = dataset.columns or tuple(f"x{j + 1}" for j in range(dataset.p))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in dataset.values:
            writer.writerow([format(v, ".17g") for v in row])


def load_dataset_csv(path, label=None, kind="target"):
    """Read a dataset CSV (header + numeric rows) into a StudyDataset.

    Rows containing missing cells (empty, na, nan, null) are dropped; any
    other non-numeric cell raises DataError naming the row and column.
    """
    path = str(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        names = tuple(h.strip() for h in header)
        p = len(names)
        rows = []
        dropped = 0
        for r_idx, raw in enumerate(reader, start=2):
            if not raw:
                continue
            if len(raw) != p:
                raise DataError(f"{path}: line {r_idx} has {len(raw)} cells, expected {p}")
            parsed = np.empty(p)
            keep = True
            for c_idx, cell in enumerate(raw):
                token = cell.strip()
                if token.lower() in _MISSING_TOKENS:
                    keep = False
                    break
                try:
                    parsed[c_idx] = float(token)
                except ValueError:
                    raise DataError(
                        f"{path}: line {r_idx}, column {names[c_idx]!r}: "
                        f"non-numeric value {cell!r}"
                    ) from None
            if keep:
                rows.append(parsed)
            else:
                dropped += 1
    if len(rows) < 2:
        raise TooFewSamples(f"{path}: only {len(rows)} usable rows after ingestion")
    return StudyDataset(
        np.vstack(rows),
        label=label if label is not None else path,
        kind=kind,
        columns=names,
        dropped_rows=dropped,
    )
