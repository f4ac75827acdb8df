import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cascade_renyi import (
    MalformedCM,
    StandardFormCM,
    canonicalize,
    diagnostics,
    is_physical,
    ppt_symplectic_eigenvalue,
    renyi2_entropy,
    symplectic_eigenvalues,
)
from cascade_renyi.gaussian import product_gap, require_physical
from cascade_renyi.oracles import random_physical_cm, symplectic_eigensolver_dense

VACUUM = StandardFormCM(1.0, 1.0, 0.0, 0.0)
TMSV = StandardFormCM(1.25, 1.25, 0.75, -0.75)


def test_vacuum_spectrum():
    assert symplectic_eigenvalues(VACUUM) == (1.0, 1.0)
    assert ppt_symplectic_eigenvalue(VACUUM) == 1.0
    assert renyi2_entropy(VACUUM) == 0.0


def test_tmsv_is_pure_and_entangled():
    lo, hi = symplectic_eigenvalues(TMSV)
    assert lo == pytest.approx(1.0, abs=1e-14)
    assert hi == pytest.approx(1.0, abs=1e-14)
    assert ppt_symplectic_eigenvalue(TMSV) == pytest.approx(0.5, abs=1e-14)
    assert renyi2_entropy(TMSV) == pytest.approx(0.0, abs=1e-14)


def test_thermal_product_state():
    cm = StandardFormCM(3.0, 2.0, 0.0, 0.0)
    assert symplectic_eigenvalues(cm) == pytest.approx((2.0, 3.0))
    assert renyi2_entropy(cm) == pytest.approx(math.log(6.0))
    assert renyi2_entropy(cm.matrix()) == pytest.approx(math.log(6.0))


def test_diagnostics_fields():
    d = diagnostics(StandardFormCM(3.0, 2.0, 0.9, -0.9))
    assert d.s == 2.5 and d.d == 0.5
    assert d.g == pytest.approx(6.0 - 0.81)


def test_canonicalize_doubles():
    cm = canonicalize(StandardFormCM(0.5, 0.75, 0.1, -0.1))
    assert (cm.a, cm.b, cm.c, cm.c_prime) == (1.0, 1.5, 0.2, -0.2)


def test_half_unit_vacuum_is_unphysical_in_vacuum_units():
    assert not is_physical(StandardFormCM(0.5, 0.5, 0.0, 0.0))
    with pytest.raises(MalformedCM):
        require_physical(StandardFormCM(0.5, 0.5, 0.0, 0.0))


def test_non_finite_rejected():
    with pytest.raises(MalformedCM):
        StandardFormCM(float("nan"), 1.0, 0.0, 0.0)


def test_non_positive_definite_rejected():
    with pytest.raises(MalformedCM):
        symplectic_eigenvalues(StandardFormCM(1.0, 1.0, 2.0, 2.0))
    with pytest.raises(MalformedCM):
        renyi2_entropy(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_swapped_exchanges_modes():
    cm = StandardFormCM(3.0, 2.0, 0.9, -0.3)
    assert cm.swapped() == StandardFormCM(2.0, 3.0, 0.9, -0.3)
    assert cm.swapped().det == pytest.approx(cm.det)


def test_array_fields_broadcast():
    cm = StandardFormCM(np.array([1.0, 3.0]), np.array([1.0, 2.0]), np.zeros(2), np.zeros(2))
    lo, hi = symplectic_eigenvalues(cm)
    np.testing.assert_allclose(lo, [1.0, 2.0])
    np.testing.assert_allclose(hi, [1.0, 3.0])
    assert is_physical(cm).tolist() == [True, True]


def test_product_gap_matches_exact_arithmetic():
    a, b = 463899125.37, 463756268.51
    c = math.sqrt(a * b) - 40.0
    exact = Fraction(a) * Fraction(b) - Fraction(c) ** 2
    assert float(product_gap(a, b, c)) == pytest.approx(float(exact), rel=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_invariant_spectrum_matches_dense(seed):
    cm = random_physical_cm(np.random.default_rng(seed), 1)
    cm = StandardFormCM(*(float(v[0]) for v in (cm.a, cm.b, cm.c, cm.c_prime)))
    lo, hi = symplectic_eigenvalues(cm)
    dlo, dhi = symplectic_eigensolver_dense(cm)
    assert abs(lo - dlo) <= 1e-10 and abs(hi - dhi) <= 1e-10
    assert lo >= 1.0 - 1e-9


@settings(max_examples=100, deadline=None)
@given(
    st.floats(1.0, 50.0), st.floats(1.0, 50.0), st.floats(-1.0, 1.0), st.floats(-1.0, 1.0)
)
def test_eigenvalue_product_is_sqrt_det(a, b, x, y):
    bound = math.sqrt(a * b)
    cm = StandardFormCM(a, b, x * bound * 0.999, y * bound * 0.999)
    lo, hi = symplectic_eigenvalues(cm, tol=1e-6)
    assert lo * hi == pytest.approx(math.sqrt(cm.det), rel=1e-9)


def test_both_eigenvalues_below_one_is_unphysical():
    # positive definite, satisfies Delta <= 1 + det, but nu_plus < 1 too
    cm = StandardFormCM(3.089686315, 3.421620261, 3.217150927, -3.217150927)
    assert symplectic_eigenvalues(cm)[1] < 1
    assert not is_physical(cm)


def test_negative_gaps_rejected_even_with_positive_det():
    cm = StandardFormCM(1.0, 1.0, 2.0, 2.0)
    assert cm.det > 0
    assert not is_physical(cm)
