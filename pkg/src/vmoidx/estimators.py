"""Estimator-style wrappers: configure in ``__init__``, compute in ``fit``.

Hyperparameters are plain constructor arguments so ``get_params`` and
``set_params`` work as in scikit-learn.  Fitted state ends with ``_``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from . import fields as F_
from .extension import extend_boundary_datum
from .geometry import get_surface
from .index import morse_check
from .qtensor import mollify_q
from .vmo import mollify, vmo_index


def _check_fitted(est, attr):
    if not hasattr(est, attr):
        raise NotFittedError(f"{type(est).__name__} is not fitted; call fit first")


def _points(X):
    P = np.asarray(X, dtype=float)
    if P.ndim == 0 or P.shape[-1] != 3:
        raise ValueError(f"expected points of shape (..., 3), got {P.shape}")
    if not np.all(np.isfinite(P)):
        raise ValueError("points must be finite")
    return P


class MorseIndex(BaseEstimator):
    """Index, inward boundary index and Morse residual of a tangent field."""

    def __init__(self, grid=64, zero_tol=F_.ZERO_TOL, jac_tol=F_.JAC_TOL, band=1e-9,
                 budget=None):
        self.grid = grid
        self.zero_tol = zero_tol
        self.jac_tol = jac_tol
        self.band = band
        self.budget = budget

    def fit(self, field, y=None):
        for name in ("zero_tol", "jac_tol", "band"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        rep = morse_check(field.surface, field, self.budget, self.grid, self.zero_tol,
                          self.jac_tol, self.band)
        self.report_ = rep
        self.chi_ = rep.chi
        self.ind_ = rep.ind
        self.ind_minus_ = rep.ind_minus
        self.residual_ = rep.morse_residual
        self.zeros_ = rep.zero_list
        return self

    def summary(self):
        _check_fitted(self, "report_")
        return self.report_.as_dict()


class VMOMollifier(BaseEstimator, TransformerMixin):
    """Averaged field ``u_eps`` of a (possibly discontinuous) field."""

    def __init__(self, eps=0.05, n=8):
        self.eps = eps
        self.n = n

    def fit(self, field, datum=None):
        self.surface_ = field.surface
        self.mollified_ = mollify(field.surface, field, datum, self.eps, self.n)
        return self

    def transform(self, X):
        _check_fitted(self, "mollified_")
        return self.mollified_.u_eps(_points(X))


class VMOIndex(BaseEstimator):
    """Certified index pair of the mollified fields over a decreasing eps grid."""

    def __init__(self, eps_grid=None, certify_last=4, n=8, grid=48):
        self.eps_grid = eps_grid
        self.certify_last = certify_last
        self.n = n
        self.grid = grid

    def fit(self, field, datum=None):
        res = vmo_index(field.surface, field, datum, self.eps_grid, self.certify_last,
                        self.n, self.grid)
        self.result_ = res
        self.ind_ = res.report.ind
        self.ind_minus_ = res.report.ind_minus
        self.residual_ = res.report.morse_residual
        return self


class BoundaryExtender(BaseEstimator, TransformerMixin):
    """Nowhere-vanishing extension of a boundary datum with norm bounds."""

    def __init__(self, c1=None, c2=None, seed=0, scan=128, grid=64):
        self.c1 = c1
        self.c2 = c2
        self.seed = seed
        self.scan = scan
        self.grid = grid

    def fit(self, datum, y=None):
        res = extend_boundary_datum(get_surface(datum.surface), datum, self.c1, self.c2,
                                    self.seed, self.scan, self.grid)
        self.field_ = res.field
        self.report_ = res.report
        return self

    def transform(self, X):
        _check_fitted(self, "field_")
        return self.field_(_points(X))


class QMollifier(BaseEstimator, TransformerMixin):
    """Averaged Q-tensor field, projected back onto tangent traceless tensors."""

    def __init__(self, eps=0.1, n=8, check=True):
        self.eps = eps
        self.n = n
        self.check = check

    def fit(self, linefield, y=None):
        self.linefield_ = mollify_q(linefield.surface, linefield, self.eps, self.n, self.check)
        return self

    def transform(self, X):
        _check_fitted(self, "linefield_")
        return self.linefield_.q(_points(X))
