import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cascade_renyi import (
    ETA_EPS,
    DriftUnstable,
    InvalidParams,
    LaserParams,
    MomentState,
    NonConvergence,
    build_covariance,
    drift_stability,
    gain_coefficient,
    integrate_to_steady_state,
    moment_derivatives,
    steady_state,
    steady_state_closed_form,
    steady_state_linear_solve,
)
from cascade_renyi.laser import affine_drift

KAPPA = 3.85
GOLDEN = LaserParams(KAPPA, 200.0, 0.35, 5.0)


def test_gain_coefficient():
    assert gain_coefficient(22.0, 43.0, 20.0) == pytest.approx(203.39, rel=1e-12)
    assert gain_coefficient(0.0, 43.0, 20.0) == 0.0
    with pytest.raises(InvalidParams):
        gain_coefficient(22.0, 43.0, 0.0)
    with pytest.raises(InvalidParams):
        gain_coefficient(-1.0, 43.0, 20.0)


@pytest.mark.parametrize(
    "kwargs, field",
    [
        (dict(kappa=0.0, gain=1.0, eta=0.5, n_th=1.0), "kappa"),
        (dict(kappa=1.0, gain=-1.0, eta=0.5, n_th=1.0), "gain"),
        (dict(kappa=1.0, gain=1.0, eta=1.5, n_th=1.0), "eta"),
        (dict(kappa=1.0, gain=1.0, eta=0.5, n_th=-2.0), "n_th"),
        (dict(kappa=1.0, gain=float("nan"), eta=0.5, n_th=1.0), "gain"),
    ],
)
def test_invalid_params_name_the_field(kwargs, field):
    with pytest.raises(InvalidParams, match=field):
        LaserParams(**kwargs)


def test_golden_moments():
    m = steady_state_closed_form(GOLDEN)
    assert m.n1 == pytest.approx(27.1026133009885, rel=1e-12)
    assert m.n2 == pytest.approx(12.6814894011915, rel=1e-12)
    assert m.m12 == pytest.approx(18.5916771983177, rel=1e-12)


def test_golden_covariance():
    cm = build_covariance(GOLDEN)
    assert cm.a == pytest.approx(55.205226601976776, rel=1e-12)
    assert cm.b == pytest.approx(26.362978802383005, rel=1e-12)
    assert cm.c == pytest.approx(37.18335439663524, rel=1e-12)
    assert cm.c_prime == -cm.c


def test_drift_stability():
    trace, det = drift_stability(GOLDEN)
    assert trace == pytest.approx(-(2 * KAPPA + 70.0) / 2)
    assert det == pytest.approx(KAPPA * (KAPPA + 70.0) / 4)
    # the same numbers as the 2x2 first-moment block of the full drift
    M, _ = affine_drift(GOLDEN)
    block = M[np.ix_([10, 12], [10, 12])]
    assert np.trace(block) == pytest.approx(trace)
    assert np.linalg.det(block) == pytest.approx(det)


@pytest.mark.parametrize("eta", [0.0, 0.001, 0.01, 0.5, 1.0])
@pytest.mark.parametrize("gain", [100.0, 50000.0])
def test_full_drift_is_stable(eta, gain):
    M, _ = affine_drift(LaserParams(KAPPA, gain, eta, 5.0))
    assert np.linalg.eigvals(M).real.max() == pytest.approx(-KAPPA / 2, rel=1e-6)


def test_closed_form_rejects_eta_zero():
    with pytest.raises(InvalidParams):
        steady_state_closed_form(LaserParams(KAPPA, 200.0, 0.0, 5.0))


@pytest.mark.parametrize("eta", [0.02, 0.35, 0.9, 1.0])
@pytest.mark.parametrize("nth", [0.0, 5.0, 100.0])
def test_closed_form_matches_linear_solve(eta, nth):
    p = LaserParams(KAPPA, 1000.0, eta, nth)
    cf, ls = steady_state_closed_form(p), steady_state_linear_solve(p)
    scale = max(abs(cf.n1), 1.0)
    for x, y in ((cf.n1, ls.n1), (cf.n2, ls.n2), (cf.m12, ls.m12)):
        assert abs(x - y) <= 1e-9 * scale


def _rational_steady_state(k, A, e, n):
    # exact solution of the three coupled stationary equations, factored by hand
    den = 4 * (A * e + k) * (A * e + 2 * k)
    n1 = (
        -3 * A**2 * e**2 + 2 * A**2 * e * n + 2 * A**2 * e + 2 * A**2 * n + A**2
        + 8 * A * e * k * n - 4 * A * e * k + 4 * A * k * n + 4 * A * k + 8 * k**2 * n
    ) / den
    n2 = -(
        A**2 * e**2 + 2 * A**2 * e * n - 2 * A**2 * n - A**2
        - 8 * A * e * k * n + 4 * A * k * n - 8 * k**2 * n
    ) / den
    m12 = A * math.sqrt(1 - e**2) * (A * e + 2 * A * n + A + 2 * k) / den
    return n1, n2, m12


@pytest.mark.parametrize("eta", [0.0, 1e-12, 1e-9, 1e-6, 1e-3, 0.3, 1.0])
@pytest.mark.parametrize("gain", [100.0, 50000.0])
def test_linear_solve_matches_rational_form(eta, gain):
    m = steady_state_linear_solve(LaserParams(KAPPA, gain, eta, 5.0))
    n1, n2, m12 = _rational_steady_state(KAPPA, gain, eta, 5.0)
    assert m.n1 == pytest.approx(n1, rel=1e-7)
    assert m.n2 == pytest.approx(n2, rel=1e-7)
    assert m.m12.real == pytest.approx(m12, rel=1e-7)


@pytest.mark.parametrize("eta", [0.01, 0.2, 0.7, 1.0])
def test_closed_form_matches_rational_form(eta):
    m = steady_state_closed_form(LaserParams(KAPPA, 1000.0, eta, 5.0))
    assert (m.n1, m.n2, m.m12) == pytest.approx(_rational_steady_state(KAPPA, 1000.0, eta, 5.0), rel=1e-9)


def test_linear_solve_continuous_at_eta_zero():
    at0 = steady_state_linear_solve(LaserParams(KAPPA, 50000.0, 0.0, 5.0))
    assert np.isfinite(at0.n1) and at0.n1 > 0
    # steep (slope ~ A^3/kappa^3) but continuous: the gap shrinks linearly
    gaps = []
    for eta in (1e-9, 1e-8, 1e-7):
        m = steady_state_linear_solve(LaserParams(KAPPA, 50000.0, eta, 5.0))
        assert np.isfinite(m.n1)
        gaps.append(abs(m.n1 - at0.n1))
    assert gaps[1] / gaps[0] == pytest.approx(10.0, rel=0.05)
    assert gaps[2] / gaps[1] == pytest.approx(10.0, rel=0.05)
    # near eta = 0 the closed form is lossy; steady_state switches to the solve
    m = steady_state(LaserParams(KAPPA, 50000.0, ETA_EPS / 2, 5.0))
    ls = steady_state_linear_solve(LaserParams(KAPPA, 50000.0, ETA_EPS / 2, 5.0))
    assert m.n1 == ls.n1


def test_integration_reaches_closed_form():
    state, info = integrate_to_steady_state(GOLDEN, full_output=True)
    cf = steady_state_closed_form(GOLDEN)
    assert state.n1 == pytest.approx(cf.n1, rel=1e-6)
    assert state.m12.real == pytest.approx(cf.m12, rel=1e-6)
    assert info["residual"] <= 1e-8 * np.linalg.norm(state.to_vector())
    assert info["max_abs"].n1 >= state.n1 * (1 - 1e-9)


def test_integration_gives_up():
    with pytest.raises(NonConvergence):
        integrate_to_steady_state(GOLDEN, max_time=0.01)


def test_first_moments_decay():
    start = MomentState(1.0, 2.0, 0.5j, alpha1=1 + 1j, alpha2=-0.5)
    state = integrate_to_steady_state(GOLDEN, first_moments=True, initial=start)
    assert abs(state.alpha1) < 1e-6 and abs(state.alpha2) < 1e-6
    assert state.n1 == pytest.approx(steady_state_closed_form(GOLDEN).n1, rel=1e-6)


def test_vectorized_steady_state():
    etas = np.array([0.0, 0.005, 0.35, 1.0])
    m = steady_state(LaserParams(KAPPA, 1000.0, etas, 5.0))
    for i, eta in enumerate(etas):
        ref = steady_state(LaserParams(KAPPA, 1000.0, float(eta), 5.0))
        assert m.n1[i] == pytest.approx(ref.n1, rel=1e-14)


def test_no_gain_gives_thermal_state():
    m = steady_state(LaserParams(KAPPA, 0.0, 0.4, 3.0))
    assert (m.n1, m.n2) == pytest.approx((3.0, 3.0))
    assert m.m12 == pytest.approx(0.0, abs=1e-12)


def test_unstable_drift_is_reported():
    with pytest.raises(DriftUnstable):
        steady_state_linear_solve(LaserParams(np.float64(1e-300), 0.0, 0.5, 0.0))


@settings(max_examples=60, deadline=None)
@given(st.floats(0.02, 1.0), st.floats(1.0, 50000.0), st.floats(0.0, 200.0))
def test_covariance_is_physical_with_asymmetry_law(eta, gain, nth):
    p = LaserParams(KAPPA, gain, eta, nth)
    cm = build_covariance(p)
    # a - b in vacuum units is twice the photon-number imbalance
    expected = gain * (1 - eta + 2 * nth) / (2 * (KAPPA + gain * eta))
    assert (cm.a - cm.b) / 2 == pytest.approx(expected, rel=1e-8, abs=1e-9)


# Fock-space check of every moment equation against the master equation


def _liouvillian_rates(p: LaserParams, dim=8, seed=0):
    lower = np.diag(np.sqrt(np.arange(1, dim)), 1)
    eye = np.eye(dim)
    s1, s2 = np.kron(lower, eye), np.kron(eye, lower)

    def dag(x):
        return x.conj().T

    def dissipator(op, rho):
        return 2 * op @ rho @ dag(op) - dag(op) @ op @ rho - rho @ dag(op) @ op

    k, A, n, eta = p.kappa, p.gain, p.n_th, p.eta
    r11, r33, r13 = (1 - eta) / 2, (1 + eta) / 2, math.sqrt(1 - eta**2) / 2

    def liouvillian(rho):
        out = k * (n + 1) / 2 * dissipator(s1, rho) + k * n / 2 * dissipator(dag(s2), rho)
        out += 0.5 * (A * r11 + k * n) * dissipator(dag(s1), rho)
        out += 0.5 * (A * r33 + k * (n + 1)) * dissipator(s2, rho)
        out += A * r13 / 2 * (
            rho @ dag(s1) @ dag(s2) - 2 * dag(s1) @ rho @ dag(s2) + dag(s1) @ dag(s2) @ rho
            - 2 * s2 @ rho @ s1 + s1 @ s2 @ rho + rho @ s1 @ s2
        )
        return out

    # random state on low Fock numbers so truncation never matters
    rng = np.random.default_rng(seed)
    low = [i * dim + j for i in range(3) for j in range(3)]
    g = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    rho = np.zeros((dim * dim, dim * dim), complex)
    rho[np.ix_(low, low)] = g @ dag(g) / np.trace(g @ dag(g))
    drho = liouvillian(rho)

    ops = dict(
        n1=dag(s1) @ s1, n2=dag(s2) @ s2, m12=s1 @ s2, p12=s1 @ dag(s2),
        sq1=s1 @ s1, sq2=s2 @ s2, alpha1=s1, alpha2=s2,
    )
    state = MomentState(**{k_: np.trace(rho @ op) for k_, op in ops.items()})
    rates = {k_: np.trace(drho @ op) for k_, op in ops.items()}
    state = MomentState(
        state.n1.real, state.n2.real, *(getattr(state, f) for f in MomentState._FIELDS[2:])
    )
    return state, rates


@pytest.mark.parametrize("eta", [0.0, 0.3, 0.8])
def test_moment_equations_match_master_equation(eta):
    p = LaserParams(KAPPA, 7.0, eta, 0.7)
    state, rates = _liouvillian_rates(p)
    derived = moment_derivatives(state, p)
    for name in MomentState._FIELDS:
        assert complex(getattr(derived, name)) == pytest.approx(rates[name], abs=1e-10), name
