"""Nondegenerate three-level cascade laser in a common thermal bath.

Rates are in kHz and times in ms. The atomic degrees of freedom are already
eliminated; the model is the closed set of moment equations for the two
cavity modes. Parameter fields may be numpy arrays, in which case the
steady-state and covariance routines broadcast over them.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DriftUnstable, InvalidParams, NonConvergence
from .gaussian import StandardFormCM, _out, canonicalize, require_physical
from .integrate import integrate_affine

# below this inversion the closed forms lose digits to 1/eta^2 cancellation
ETA_EPS = 0.01


def gain_coefficient(rate, coupling, gamma):
    """Linear gain ``A = 2 r v^2 / gamma^2`` (all in kHz)."""
    if rate < 0 or coupling < 0:
        raise InvalidParams("injection rate and coupling must be non-negative")
    if gamma <= 0:
        raise InvalidParams("gamma must be positive")
    return 2.0 * rate * coupling**2 / gamma**2


@dataclass(frozen=True)
class LaserParams:
    kappa: float
    gain: float
    eta: float
    n_th: float

    def __post_init__(self):
        checks = (
            ("kappa", lambda v: v > 0, "must be > 0"),
            ("gain", lambda v: v >= 0, "must be >= 0"),
            ("eta", lambda v: (v >= 0) & (v <= 1), "must lie in [0, 1]"),
            ("n_th", lambda v: v >= 0, "must be >= 0"),
        )
        for name, ok, msg in checks:
            value = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(value)) or not np.all(ok(value)):
                raise InvalidParams(f"{name} {msg} (got {getattr(self, name)!r})")

    @classmethod
    def from_atomic(cls, kappa, rate, coupling, gamma, eta, n_th):
        return cls(kappa, gain_coefficient(rate, coupling, gamma), eta, n_th)


@dataclass(frozen=True)
class AtomicState:
    rho11: float
    rho33: float
    rho13: float

    @classmethod
    def from_eta(cls, eta):
        eta = np.asarray(eta, dtype=float)
        return cls(
            rho11=_out((1.0 - eta) / 2.0),
            rho33=_out((1.0 + eta) / 2.0),
            rho13=_out(np.sqrt(np.maximum(1.0 - eta**2, 0.0)) / 2.0),
        )


@dataclass(frozen=True)
class MomentState:
    """Second moments (and optionally first moments) of the cavity modes."""

    n1: float
    n2: float
    m12: complex
    p12: complex = 0j
    sq1: complex = 0j
    sq2: complex = 0j
    alpha1: complex = 0j
    alpha2: complex = 0j

    _FIELDS = ("n1", "n2", "m12", "p12", "sq1", "sq2", "alpha1", "alpha2")

    def to_vector(self) -> np.ndarray:
        v = [self.n1, self.n2]
        for name in self._FIELDS[2:]:
            z = complex(getattr(self, name))
            v += [z.real, z.imag]
        return np.array(v, dtype=float)

    @classmethod
    def from_vector(cls, v) -> "MomentState":
        v = np.asarray(v, dtype=float)
        cplx = [complex(v[i], v[i + 1]) for i in range(2, 14, 2)]
        return cls(float(v[0]), float(v[1]), *cplx)

    @classmethod
    def vacuum(cls) -> "MomentState":
        return cls(0.0, 0.0, 0j)


def _rhs(s: MomentState, p: LaserParams, inhomogeneous=True) -> MomentState:
    at = AtomicState.from_eta(p.eta)
    phi1 = p.kappa - p.gain * at.rho11
    phi2 = p.kappa + p.gain * at.rho33
    g = p.gain * at.rho13
    src = 1.0 if inhomogeneous else 0.0
    conj = np.conj
    # <s1^dag s2> = conj(p12) and <s2^dag^2> = conj(sq2). The <s1^2> equation
    # couples to <s1 s2^dag> = p12 (tracing the master equation against s1^2);
    # conj(p12) there would make the homogeneous block unstable for small eta.
    return MomentState(
        n1=-phi1 * s.n1 - 0.5 * g * (conj(s.m12) + s.m12).real
        + src * (p.gain * at.rho11 + p.kappa * p.n_th),
        n2=-phi2 * s.n2 + 0.5 * g * (conj(s.m12) + s.m12).real + src * p.kappa * p.n_th,
        m12=-0.5 * (phi1 + phi2) * s.m12 + 0.5 * g * (s.n1 - s.n2 + src),
        p12=-0.5 * (phi1 + phi2) * s.p12 + 0.5 * g * (s.sq1 - conj(s.sq2)),
        sq1=-phi1 * s.sq1 - g * s.p12,
        sq2=-phi2 * s.sq2 + g * conj(s.p12),
        alpha1=-0.5 * phi1 * s.alpha1 - 0.5 * g * conj(s.alpha2),
        alpha2=-0.5 * phi2 * s.alpha2 + 0.5 * g * conj(s.alpha1),
    )


def moment_derivatives(state: MomentState, p: LaserParams) -> MomentState:
    """Time derivatives of all moments, returned as a MomentState of rates."""
    return _rhs(state, p)


def _scalar(p: LaserParams):
    if any(np.ndim(getattr(p, k)) for k in ("kappa", "gain", "eta", "n_th")):
        raise TypeError("this routine needs scalar LaserParams")


def affine_drift(p: LaserParams):
    """Real 14x14 drift matrix and forcing vector acting on ``MomentState.to_vector``."""
    _scalar(p)
    n = 14
    M = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        M[:, j] = _rhs(MomentState.from_vector(e), p, inhomogeneous=False).to_vector()
    f = _rhs(MomentState.from_vector(np.zeros(n)), p).to_vector()
    return M, f


def drift_stability(p: LaserParams):
    """Trace and determinant of the first-moment drift for (<s1>, <s2^dag>).

    Stable iff trace < 0 and det > 0; det simplifies to kappa (kappa + A eta) / 4.
    """
    trace = -(2.0 * np.asarray(p.kappa) + np.multiply(p.gain, p.eta)) / 2.0
    det = np.asarray(p.kappa) * (np.asarray(p.kappa) + np.multiply(p.gain, p.eta)) / 4.0
    return _out(trace), _out(det)


def steady_state_closed_form(p: LaserParams) -> MomentState:
    """Steady-state n1, n2 and <s1 s2> in closed form.

    Each term diverges as 1/eta^2 and the sum is finite, so accuracy degrades
    as eta -> 0 and eta = 0 itself is rejected.
    """
    eta = np.asarray(p.eta, dtype=float)
    if np.any(eta <= 0):
        raise InvalidParams("closed form is undefined at eta = 0; use steady_state_linear_solve")
    A, k, n = (np.asarray(v, dtype=float) for v in (p.gain, p.kappa, p.n_th))
    e2 = eta**2
    root = np.sqrt(1.0 - e2)
    common = (A * eta * (eta - 1.0) + 2.0 * k * n) / (4.0 * (k + A * eta) * e2)
    last = (4.0 * k * n - A * eta) / (2.0 * (2.0 * k + A * eta) * e2)
    n1 = n * (eta + 1.0) / (2.0 * e2) + common * (1.0 - eta) + (e2 - 1.0) * last
    n2 = -n * (eta - 1.0) / (2.0 * e2) + common * (1.0 + eta) + (e2 - 1.0) * last
    m12 = n * root / (2.0 * e2) + common * root - root * last
    return MomentState(_out(n1), _out(n2), _out(m12))


def steady_state_linear_solve(p: LaserParams) -> MomentState:
    """Solve the stationary second-moment equations directly (valid at eta = 0)."""
    kappa, gain, eta, n_th = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (p.kappa, p.gain, p.eta, p.n_th))
    )
    if kappa.ndim:
        flat = [
            steady_state_linear_solve(LaserParams(*vals)).to_vector()
            for vals in zip(kappa.ravel(), gain.ravel(), eta.ravel(), n_th.ravel())
        ]
        v = np.array(flat).reshape(kappa.shape + (14,))
        return MomentState(
            v[..., 0], v[..., 1], v[..., 2] + 1j * v[..., 3], v[..., 4] + 1j * v[..., 5],
            v[..., 6] + 1j * v[..., 7], v[..., 8] + 1j * v[..., 9],
        )
    trace, det = drift_stability(p)
    if not (trace < 0 and det > 0):
        raise DriftUnstable(f"drift not stable: trace={trace}, det={det}")
    M, f = affine_drift(p)
    # second moments only; the first moments are homogeneous and vanish
    Ms, fs = M[:10, :10], f[:10]
    if np.linalg.cond(Ms) > 1e13:
        raise DriftUnstable("stationary moment system is singular")
    # near threshold cond(Ms) ~ 1e12; refine with extended-precision residuals
    sol = np.linalg.solve(Ms, -fs)
    Ml, fl = Ms.astype(np.longdouble), fs.astype(np.longdouble)
    for _ in range(3):
        resid = Ml @ sol.astype(np.longdouble) + fl
        sol = sol - np.linalg.solve(Ms, resid.astype(float))
    x = np.zeros(14)
    x[:10] = sol
    return MomentState.from_vector(x)


def integrate_to_steady_state(
    p: LaserParams,
    rel_tol: float = 1e-8,
    max_time: float | None = None,
    initial: MomentState | None = None,
    first_moments: bool = False,
    full_output: bool = False,
):
    """Integrate the moment equations from the vacuum until they settle.

    Settled means ``|rates| <= rel_tol * |state|`` (rates in kHz) held for
    ``2 / kappa`` ms. First moments are carried only with ``first_moments``;
    from the vacuum they stay zero.
    With ``full_output`` also returns a dict with time, step count, residual
    and the per-component maximum modulus seen along the trajectory.
    """
    _scalar(p)
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    if max_time is None:
        max_time = 2000.0 / p.kappa
    x0 = (initial or MomentState.vacuum()).to_vector()
    M, f = affine_drift(p)
    dim = 14 if first_moments else 10
    h_max = 0.1 / (2.0 * p.kappa + p.gain * p.eta)
    x, t, steps, settled, residual, max_abs = integrate_affine(
        M[:dim, :dim], f[:dim], x0[:dim], t_max=max_time, h_max=h_max,
        steady_tol=rel_tol, hold_time=2.0 / p.kappa,
    )
    if not settled:
        raise NonConvergence(
            f"moments did not settle within {max_time} ms (residual {residual:.3e})", residual
        )
    state = MomentState.from_vector(np.pad(x, (0, 14 - dim)))
    if full_output:
        info = {"time": t, "steps": steps, "residual": residual,
                "max_abs": MomentState.from_vector(np.pad(max_abs, (0, 14 - dim)))}
        return state, info
    return state


def steady_state(p: LaserParams) -> MomentState:
    """Closed form for eta >= ETA_EPS, direct linear solve below it."""
    eta = np.asarray(p.eta, dtype=float)
    low = eta < ETA_EPS
    if eta.ndim == 0:
        return steady_state_linear_solve(p) if low else steady_state_closed_form(p)
    kappa, gain, eta, n_th = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (p.kappa, p.gain, p.eta, p.n_th))
    )
    low = eta < ETA_EPS
    out = [np.zeros(eta.shape) for _ in range(3)]
    if np.any(~low):
        hi = steady_state_closed_form(LaserParams(kappa[~low], gain[~low], eta[~low], n_th[~low]))
        for arr, val in zip(out, (hi.n1, hi.n2, np.real(hi.m12))):
            arr[~low] = val
    if np.any(low):
        lo = steady_state_linear_solve(LaserParams(kappa[low], gain[low], eta[low], n_th[low]))
        for arr, val in zip(out, (lo.n1, lo.n2, np.real(lo.m12))):
            arr[low] = val
    return MomentState(out[0], out[1], out[2])


def build_covariance(p: LaserParams, moments: MomentState | None = None) -> StandardFormCM:
    """Stationary CM in vacuum units: a = 2 n1 + 1, b = 2 n2 + 1, c = -c' = 2 Re<s1 s2>."""
    m = steady_state(p) if moments is None else moments
    c = np.real(m.m12)
    raw = StandardFormCM(_out(np.asarray(m.n1) + 0.5), _out(np.asarray(m.n2) + 0.5),
                         _out(c), _out(-c))
    cm = canonicalize(raw)
    require_physical(cm)
    return cm
