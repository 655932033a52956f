"""Datasets, partitions, LIBSVM I/O and synthetic generators.

Data is held as a CSR matrix (one row per example) so the compiled kernels
can walk rows directly. ``SparseVector`` is a lightweight per-row view.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np
import scipy.sparse as sp

from .exceptions import ConfigError, EmptyDatasetError, ParseError, ZeroDataError


@dataclass(frozen=True)
class SparseVector:
    indices: np.ndarray
    values: np.ndarray
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=np.int64))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values differ in length")
        if len(self.indices):
            if np.any(np.diff(self.indices) <= 0):
                raise ValueError("indices must be strictly increasing")
            if self.indices[0] < 0 or self.indices[-1] >= self.dim:
                raise ValueError("index out of range")
        if np.any(self.values == 0):
            raise ValueError("explicit zeros are not stored")

    def to_dense(self):
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out

    def norm(self):
        return float(np.sqrt(np.dot(self.values, self.values)))


def _freeze(a):
    a.flags.writeable = False
    return a


class Dataset:
    """n labelled examples in R^d, stored row-wise as CSR.

    Parameters
    ----------
    X : array-like or sparse matrix of shape (n, d)
    y : array-like of shape (n,)
    scale : float
        Global factor the rows were already divided by (1.0 if unscaled).
    """

    def __init__(self, X, y, scale=1.0):
        X = sp.csr_matrix(X, dtype=np.float64)
        X.eliminate_zeros()
        X.sort_indices()
        y = np.asarray(y, dtype=np.float64).ravel()
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"{X.shape[0]} rows but {y.shape[0]} labels")
        if not np.all(np.isfinite(y)):
            raise ValueError("labels must be finite")
        if not np.all(np.isfinite(X.data)):
            raise ValueError("features must be finite")
        for a in (X.data, X.indices, X.indptr):
            _freeze(a)
        self.X = X
        self.y = _freeze(y)
        self.scale = float(scale)
        self.sq_norms = _freeze(np.asarray(X.multiply(X).sum(axis=1)).ravel())

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def dim(self):
        return self.X.shape[1]

    @property
    def labels(self):
        return self.y

    @property
    def max_norm(self):
        if self.n == 0:
            return 0.0
        return float(np.sqrt(self.sq_norms.max()))

    @property
    def points(self):
        X = self.X
        return [
            SparseVector(X.indices[X.indptr[i]:X.indptr[i + 1]].copy(),
                         X.data[X.indptr[i]:X.indptr[i + 1]].copy(), self.dim)
            for i in range(self.n)
        ]

    def check_nonempty(self):
        if self.n == 0:
            raise EmptyDatasetError()
        return self

    def check_binary(self):
        if not np.all(np.abs(self.y) == 1.0):
            raise ValueError("classification losses need labels in {-1, +1}")
        return self

    def fingerprint(self):
        h = hashlib.sha256()
        for a in (self.X.indptr, self.X.indices, self.X.data, self.y):
            h.update(np.ascontiguousarray(a).tobytes())
        h.update(str(self.X.shape).encode())
        return h.hexdigest()[:16]

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.X.shape == other.X.shape
                and np.array_equal(self.y, other.y)
                and np.array_equal(self.X.indptr, other.X.indptr)
                and np.array_equal(self.X.indices, other.X.indices)
                and np.array_equal(self.X.data, other.X.data))

    def __repr__(self):
        return f"Dataset(n={self.n}, d={self.dim}, nnz={self.X.nnz})"


@dataclass(frozen=True)
class Partition:
    blocks: tuple = field()

    def __post_init__(self):
        if len(self.blocks) < 1:
            raise ValueError("need at least one block")
        object.__setattr__(self, "blocks", tuple(_freeze(np.asarray(b, dtype=np.int64))
                                                 for b in self.blocks))

    @property
    def K(self):
        return len(self.blocks)

    @property
    def sizes(self):
        return tuple(len(b) for b in self.blocks)

    @property
    def n_tilde(self):
        return max(self.sizes)

    @property
    def n(self):
        return sum(self.sizes)

    def owner(self):
        """Array mapping each example index to its block id."""
        out = np.empty(self.n, dtype=np.int64)
        for k, b in enumerate(self.blocks):
            out[b] = k
        return out

    def validate(self, n=None):
        n = self.n if n is None else n
        allidx = np.concatenate(self.blocks) if self.K else np.empty(0, np.int64)
        if len(allidx) != n or not np.array_equal(np.sort(allidx), np.arange(n)):
            raise ConfigError("partition blocks must be disjoint and cover 0..n-1")
        return self


def partition_uniform(n, K, seed=0, shuffle=True):
    """Shuffle 0..n-1 and cut into K contiguous chunks of near-equal size."""
    if K < 1:
        raise ConfigError("K must be >= 1")
    if K > n:
        raise ConfigError(f"cannot split {n} examples over K={K} workers")
    order = np.arange(n)
    if shuffle:
        order = np.random.default_rng(seed).permutation(n)
    return Partition(tuple(np.sort(c) for c in np.array_split(order, K)))


def scale_to_unit_norm(ds):
    """Divide every point by the largest point norm M; returns (scaled, M)."""
    ds.check_nonempty()
    M = ds.max_norm
    if M == 0.0:
        raise ZeroDataError()
    out = Dataset(ds.X / M, ds.y, scale=ds.scale * M)
    return out, M


# ---------------------------------------------------------------- LIBSVM I/O

def parse_libsvm(text, n_features=None):
    """Parse LIBSVM text (``<label> <idx>:<val> ...`` with 1-based idx).

    ``text`` may be a string or an open text stream.
    """
    if isinstance(text, str):
        text = io.StringIO(text)
    labels, indptr, indices, values = [], [0], [], []
    max_idx = 0
    for lineno, raw in enumerate(text, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            labels.append(float(tokens[0]))
        except ValueError:
            raise ParseError(f"bad label {tokens[0]!r}", lineno) from None
        prev = 0
        for tok in tokens[1:]:
            idx_s, sep, val_s = tok.partition(":")
            if not sep:
                raise ParseError(f"expected idx:val, got {tok!r}", lineno)
            try:
                idx, val = int(idx_s), float(val_s)
            except ValueError:
                raise ParseError(f"bad feature {tok!r}", lineno) from None
            if idx < 1:
                raise ParseError(f"indices are 1-based, got {idx}", lineno)
            if idx <= prev:
                raise ParseError("feature indices must be strictly ascending", lineno)
            prev = idx
            if val != 0.0:
                indices.append(idx - 1)
                values.append(val)
        max_idx = max(max_idx, prev)
        indptr.append(len(indices))
    d = max_idx
    if n_features is not None:
        if n_features < max_idx:
            raise ParseError(f"feature index {max_idx} exceeds n_features={n_features}")
        d = n_features
    X = sp.csr_matrix((np.asarray(values, dtype=np.float64),
                       np.asarray(indices, dtype=np.int64),
                       np.asarray(indptr, dtype=np.int64)),
                      shape=(len(labels), d))
    return Dataset(X, labels)


def load_libsvm(path, n_features=None):
    with open(path) as fh:
        return parse_libsvm(fh, n_features=n_features)


def _fmt(x):
    return repr(float(x))


def dump_libsvm(ds, stream: TextIO | None = None):
    """Write ``ds`` in LIBSVM format; returns the text if no stream is given."""
    out = io.StringIO() if stream is None else stream
    X = ds.X
    for i in range(ds.n):
        lo, hi = X.indptr[i], X.indptr[i + 1]
        feats = " ".join(f"{j + 1}:{_fmt(v)}" for j, v in zip(X.indices[lo:hi], X.data[lo:hi]))
        out.write(f"{_fmt(ds.y[i])} {feats}".rstrip() + "\n")
    if stream is None:
        return out.getvalue()
    return None


# ---------------------------------------------------------- synthetic data

def gen_synthetic(n, d, sparsity=1.0, label_noise=0.0, seed=0):
    """Gaussian features at density ``sparsity``, labels from a random hyperplane.

    Labels are flipped with probability ``label_noise``; the result is scaled
    to unit max norm.
    """
    if n < 1 or d < 1:
        raise ConfigError("n and d must be positive")
    if not 0 < sparsity <= 1:
        raise ConfigError("sparsity must be in (0, 1]")
    if not 0 <= label_noise <= 1:
        raise ConfigError("label_noise must be in [0, 1]")
    rng = np.random.default_rng(seed)
    if sparsity == 1.0:
        X = sp.csr_matrix(rng.standard_normal((n, d)))
    else:
        X = sp.random(n, d, density=sparsity, format="csr", random_state=rng,
                      data_rvs=rng.standard_normal)
    normal = rng.standard_normal(d)
    y = np.sign(X @ normal)
    y[y == 0] = 1.0
    flip = rng.random(n) < label_noise
    y[flip] = -y[flip]
    ds = Dataset(X, y)
    if ds.max_norm == 0.0:
        return ds
    return scale_to_unit_norm(ds)[0]


def gen_orthogonal_blocks(K, n_per_block, d_per_block, seed=0, label_noise=0.0):
    """Each block's points live on a private coordinate slice.

    Returns (dataset, partition) with block k = rows k*n_per_block ... .
    """
    rng = np.random.default_rng(seed)
    n, d = K * n_per_block, K * d_per_block
    X = np.zeros((n, d))
    for k in range(K):
        rows = slice(k * n_per_block, (k + 1) * n_per_block)
        X[rows, k * d_per_block:(k + 1) * d_per_block] = rng.standard_normal((n_per_block, d_per_block))
    y = np.sign(X @ rng.standard_normal(d))
    y[y == 0] = 1.0
    flip = rng.random(n) < label_noise
    y[flip] = -y[flip]
    ds, _ = scale_to_unit_norm(Dataset(X, y))
    blocks = tuple(np.arange(k * n_per_block, (k + 1) * n_per_block) for k in range(K))
    return ds, Partition(blocks)


def subset(ds, rows: Iterable[int]):
    rows = np.asarray(list(rows), dtype=np.int64)
    return Dataset(ds.X[rows], ds.y[rows], scale=ds.scale)
