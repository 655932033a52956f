"""scikit-learn estimators wrapping the distributed solvers.

Each estimator simulates K workers on a random partition of the rows,
runs the chosen method, and exposes the usual linear-model attributes::

    >>> from distcocoa import CocoaClassifier
    >>> clf = CocoaClassifier(lam=1e-3, n_workers=4, n_rounds=50).fit(X, y)  # doctest: +SKIP
    >>> clf.trace_.final.gap  # doctest: +SKIP
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.linear_model._base import LinearClassifierMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .baselines import BaselineConfig, run_baseline
from .cocoa import CocoaConfig, run_cocoa
from .data import Dataset, partition_uniform, scale_to_unit_norm
from .local_solvers import LocalSolverConfig
from .objectives import LossModel
from .runtime import Runtime
from .validation import binary_targets, check_beta, check_count, check_positive


class _DistributedLinearClassifier(LinearClassifierMixin, BaseEstimator):
    _loss_choices = ("hinge",)

    def _prepare(self, X, y):
        X, y = validate_data(self, X, y, accept_sparse="csr", dtype=np.float64)
        check_positive(self.lam, "lam")
        check_count(self.n_workers, "n_workers")
        check_count(self.n_rounds, "n_rounds")
        if self.loss not in self._loss_choices:
            raise ValueError(f"loss must be one of {self._loss_choices}, got {self.loss!r}")
        self.classes_, signed = binary_targets(y)
        ds = Dataset(X, signed)
        scale = 1.0
        if self.normalize and ds.max_norm > 0:
            ds, scale = scale_to_unit_norm(ds)
        K = min(self.n_workers, ds.n)
        seed = 0 if self.random_state is None else int(self.random_state)
        partition = partition_uniform(ds.n, K, seed=seed, shuffle=self.shuffle)
        return ds, partition, scale, seed

    def _finish(self, trace, scale, partition):
        self.coef_ = (trace.w / scale).reshape(1, -1)
        self.intercept_ = np.zeros(1)
        self.scale_ = scale
        self.partition_ = partition
        self.trace_ = trace
        self.ledger_ = trace.ledger
        self.n_iter_ = trace.final.round
        return self

    def objective(self):
        """Final (primal, dual, gap) on the scaled training problem."""
        check_is_fitted(self)
        r = self.trace_.final
        return r.primal, r.dual, r.gap

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.classifier_tags.multi_class = False
        tags.input_tags.sparse = True
        return tags


class CocoaClassifier(_DistributedLinearClassifier):
    """Linear classifier trained by communication-efficient distributed dual ascent.

    Parameters
    ----------
    lam : float
        l2 regularization strength.
    loss : {"hinge", "smoothed_hinge", "logistic"}
    smoothing : float
        Width of the quadratic smoothing for ``loss="smoothed_hinge"``.
    n_workers : int
        Number of simulated workers K (capped at n_samples).
    local_iters : int or None
        Inner coordinate steps H per worker and round; ``None`` means one
        pass over the local block.
    beta : float
        Merge scale in [1, K]; 1 averages the worker updates.
    n_rounds : int
        Maximum number of communication rounds.
    tol : float or None
        Stop once the duality gap falls below ``tol``.
    normalize : bool
        Divide all rows by the largest row norm before solving.
    executor : {"serial", "threads"}
    """

    _loss_choices = ("hinge", "smoothed_hinge", "logistic")

    def __init__(self, lam=1e-3, loss="hinge", smoothing=1.0, n_workers=4,
                 local_iters=None, beta=1.0, n_rounds=100, tol=1e-4,
                 normalize=True, shuffle=True, executor="serial", random_state=None):
        self.lam = lam
        self.loss = loss
        self.smoothing = smoothing
        self.n_workers = n_workers
        self.local_iters = local_iters
        self.beta = beta
        self.n_rounds = n_rounds
        self.tol = tol
        self.normalize = normalize
        self.shuffle = shuffle
        self.executor = executor
        self.random_state = random_state

    def fit(self, X, y):
        ds, partition, scale, seed = self._prepare(X, y)
        H = self.local_iters if self.local_iters is not None else partition.n_tilde
        check_count(H, "local_iters")
        check_beta(self.beta, partition.K)
        cfg = CocoaConfig(T=self.n_rounds, beta_K=float(self.beta), lam=float(self.lam),
                          local=LocalSolverConfig(H=H), seed=seed, gap_tol=self.tol)
        model = LossModel(self.loss, self.smoothing)
        with Runtime(partition.K, ds.dim, executor=self.executor) as rt:
            trace = run_cocoa(ds, partition, model, cfg, runtime=rt)
        self._finish(trace, scale, partition)
        self.dual_coef_ = trace.alpha.copy()
        return self


class _BaselineClassifier(_DistributedLinearClassifier):
    _method = None

    def __init__(self, lam=1e-3, loss="hinge", n_workers=4, batch_size=10, beta=1.0,
                 n_rounds=100, normalize=True, shuffle=True, executor="serial",
                 random_state=None):
        self.lam = lam
        self.loss = loss
        self.n_workers = n_workers
        self.batch_size = batch_size
        self.beta = beta
        self.n_rounds = n_rounds
        self.normalize = normalize
        self.shuffle = shuffle
        self.executor = executor
        self.random_state = random_state

    def fit(self, X, y):
        ds, partition, scale, seed = self._prepare(X, y)
        H = check_count(self.batch_size, "batch_size")
        if self._method != "local_sgd":
            H = min(H, min(partition.sizes))
        cfg = BaselineConfig(method=self._method, H=H, beta=float(self.beta), T=self.n_rounds,
                             lam=float(self.lam), seed=seed)
        with Runtime(partition.K, ds.dim, executor=self.executor) as rt:
            trace = run_baseline(ds, partition, LossModel(self.loss), cfg, runtime=rt)
        self._finish(trace, scale, partition)
        if trace.alpha is not None:
            self.dual_coef_ = trace.alpha.copy()
        return self


class MiniBatchCDClassifier(_BaselineClassifier):
    """Mini-batch dual coordinate ascent; ``beta`` ranges over [1, K * batch_size]."""

    _method = "minibatch_cd"
    _loss_choices = ("hinge", "smoothed_hinge", "logistic")


class MiniBatchSGDClassifier(_BaselineClassifier):
    """Mini-batch Pegasos (hinge loss only)."""

    _method = "minibatch_sgd"


class LocalSGDClassifier(_BaselineClassifier):
    """Pegasos with local updates and per-round model averaging (hinge loss only)."""

    _method = "local_sgd"
