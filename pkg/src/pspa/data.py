"""Labeled / unlabeled data containers for the three prediction modes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

MODES = ("labels", "covariates", "both")

# (labeled fields, unlabeled fields) each mode needs
_REQUIRED = {
    "labels": (("y", "X", "fhat"), ("X", "fhat")),
    "covariates": (("y", "X", "qhat"), ("y", "qhat")),
    "both": (("y", "X", "fhat", "qhat"), ("fhat", "qhat")),
}


def _vec(a, name):
    if a is None:
        return None
    # contiguous copies keep reductions independent of how the caller sliced the input
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 1:
        a = a.reshape(-1)
    if not np.all(np.isfinite(a)):
        raise DataError(f"{name} contains non-finite values")
    return a


def _mat(a, name):
    if a is None:
        return None
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise DataError(f"{name} must be a 2-d array")
    if not np.all(np.isfinite(a)):
        raise DataError(f"{name} contains non-finite values")
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Labeled rows (y, X, fhat, qhat) plus unlabeled rows carrying predictions.

    Only the predictions of the black-box model are stored; the raw auxiliary
    variables it was applied to are not needed. Missing unlabeled data
    (N = 0) is allowed and gives ``rho = inf``; only the classical estimator
    can run on such a dataset.
    """

    mode: str
    y: np.ndarray
    X: np.ndarray
    fhat: np.ndarray | None = None
    qhat: np.ndarray | None = None
    y_unlabeled: np.ndarray | None = None
    X_unlabeled: np.ndarray | None = None
    fhat_unlabeled: np.ndarray | None = None
    qhat_unlabeled: np.ndarray | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise DataError(f"mode must be one of {MODES}, got {self.mode!r}")
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        y = _vec(self.y, "y")
        if y is None:
            raise DataError("labeled outcome y is required")
        n = y.shape[0]
        set_("y", y)
        set_("X", _mat(self.X if self.X is not None else np.zeros((n, 0)), "X"))
        set_("fhat", _vec(self.fhat, "fhat"))
        set_("qhat", _mat(self.qhat, "qhat"))

        lengths = [
            len(v)
            for v in (self.y_unlabeled, self.X_unlabeled, self.fhat_unlabeled, self.qhat_unlabeled)
            if v is not None
        ]
        N = lengths[0] if lengths else 0
        set_("y_unlabeled", _vec(self.y_unlabeled, "y_unlabeled"))
        set_("X_unlabeled", _mat(self.X_unlabeled, "X_unlabeled"))
        set_("fhat_unlabeled", _vec(self.fhat_unlabeled, "fhat_unlabeled"))
        set_("qhat_unlabeled", _mat(self.qhat_unlabeled, "qhat_unlabeled"))
        if self.X_unlabeled is None and self.X.shape[1] == 0 and N > 0 and self.mode == "labels":
            set_("X_unlabeled", np.zeros((N, 0)))

        if n < 2:
            raise DataError(f"need at least 2 labeled rows, got {n}")
        for name in ("X", "fhat", "qhat"):
            v = getattr(self, name)
            if v is not None and v.shape[0] != n:
                raise DataError(f"{name} has {v.shape[0]} rows, y has {n}")
        for name in ("y_unlabeled", "X_unlabeled", "fhat_unlabeled", "qhat_unlabeled"):
            v = getattr(self, name)
            if v is not None and v.shape[0] != N:
                raise DataError(f"{name} has {v.shape[0]} rows, expected {N}")
        d = self.X.shape[1]
        for name in ("qhat", "X_unlabeled", "qhat_unlabeled"):
            v = getattr(self, name)
            if v is not None and v.shape[0] and v.shape[1] != d:
                raise DataError(f"{name} has {v.shape[1]} columns, X has {d}")

        lab, unl = _REQUIRED[self.mode]
        for name in lab:
            if name != "X" and getattr(self, name) is None:
                raise DataError(f"mode {self.mode!r} needs labeled {name}")
        if N > 0:
            for name in unl:
                if getattr(self, name + "_unlabeled") is None:
                    raise DataError(f"mode {self.mode!r} needs unlabeled {name}")

    @property
    def n(self):
        return self.y.shape[0]

    @property
    def N(self):
        for v in (self.y_unlabeled, self.X_unlabeled, self.fhat_unlabeled, self.qhat_unlabeled):
            if v is not None:
                return v.shape[0]
        return 0

    @property
    def rho(self):
        return self.n / self.N if self.N else float("inf")

    @property
    def d(self):
        return self.X.shape[1]

    def gold(self):
        """(y, X) for the gold-standard score on labeled rows."""
        return self.y, self.X

    def surrogate_labeled(self):
        """(outcome, covariates) plugged into psi for the labeled surrogate score."""
        if self.mode == "labels":
            return self.fhat, self.X
        if self.mode == "covariates":
            return self.y, self.qhat
        return self.fhat, self.qhat

    def surrogate_unlabeled(self):
        if self.N == 0:
            raise DataError("dataset has no unlabeled rows")
        if self.mode == "labels":
            return self.fhat_unlabeled, self.X_unlabeled
        if self.mode == "covariates":
            return self.y_unlabeled, self.qhat_unlabeled
        return self.fhat_unlabeled, self.qhat_unlabeled

    def labeled_only(self):
        """Copy of this dataset with the unlabeled rows dropped."""
        return Dataset(mode=self.mode, y=self.y, X=self.X, fhat=self.fhat, qhat=self.qhat)
