from __future__ import annotations

import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from vmoidx.estimators import (BoundaryExtender, MorseIndex, QMollifier, VMOIndex,
                               VMOMollifier)
from vmoidx.fields import BoundaryDatum, TangentField
from vmoidx.presets import preset_linefield


def test_params_round_trip():
    est = MorseIndex(grid=32)
    assert est.get_params()["grid"] == 32
    est.set_params(jac_tol=1e-6)
    assert est.jac_tol == 1e-6
    assert VMOMollifier(eps=0.02).get_params() == {"eps": 0.02, "n": 8}


def test_morse_index_fit(disk):
    est = MorseIndex().fit(TangentField.from_expression(disk, "(y, x)"))
    assert (est.ind_, est.ind_minus_, est.residual_, est.chi_) == (-1, 2, 0, 1)
    assert len(est.zeros_) == 1
    assert est.summary()["morse_residual"] == 0


def test_bad_tolerance_is_rejected(disk):
    with pytest.raises(ValueError):
        MorseIndex(zero_tol=0).fit(TangentField.from_expression(disk, "(y, x)"))


def test_unfitted_estimators_raise():
    for est in (VMOMollifier(), BoundaryExtender(), QMollifier()):
        with pytest.raises(NotFittedError):
            est.transform(np.zeros((1, 3)))
    with pytest.raises(NotFittedError):
        MorseIndex().summary()


def test_mollifier_transform(disk):
    v = TangentField.from_expression(disk, "(-y, x)")
    P = np.array([[0.2, 0.1, 0.0]])
    assert np.allclose(VMOMollifier(eps=0.05).fit(v).transform(P), v(P), atol=1e-13)
    with pytest.raises(ValueError):
        VMOMollifier(eps=0.05).fit(v).transform(np.zeros((1, 2)))


def test_vmo_index_estimator(disk):
    est = VMOIndex(eps_grid=[0.1, 0.05, 0.025], certify_last=3).fit(
        TangentField.from_expression(disk, "(-y, x)"))
    assert (est.ind_, est.ind_minus_, est.residual_) == (1, 0, 0)


def test_extender(disk):
    g = BoundaryDatum.from_expression(disk, "(0, 1)")
    est = BoundaryExtender().fit(g)
    assert est.report_["certified"]
    w = est.transform(np.array([[0.0, 0.0, 0.0], [0.3, -0.4, 0.0]]))
    assert np.linalg.norm(w, axis=-1).min() > 0


def test_q_mollifier(torus):
    est = QMollifier(eps=0.05).fit(preset_linefield("figure2-n0"))
    Q = est.transform(torus.charts[0].embed(np.array([[0.3, 0.4]])))
    assert Q.shape == (1, 3, 3)
