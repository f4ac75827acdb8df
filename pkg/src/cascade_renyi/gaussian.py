"""Covariance-matrix algebra for two-mode Gaussian states in standard form.

All routines work in vacuum units (vacuum covariance matrix = identity).
Fields of :class:`StandardFormCM` may be floats or equally shaped numpy
arrays; every function here broadcasts over them and returns floats for
scalar input.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MalformedCM

PHYSICAL_TOL = 1e-9


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


_SPLIT = 134217729.0  # 2**27 + 1


def _two_product(x, y):
    """``x*y`` as an unevaluated sum ``p + e`` (Dekker)."""
    p = x * y
    hx = _SPLIT * x
    hx = hx - (hx - x)
    lx = x - hx
    hy = _SPLIT * y
    hy = hy - (hy - y)
    ly = y - hy
    e = ((hx * hy - p) + hx * ly + lx * hy) + lx * ly
    return p, e


def product_gap(a, b, c):
    """``a*b - c*c`` without cancellation; near-pure and near-threshold
    states have both products close to each other."""
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    p1, e1 = _two_product(a, b)
    p2, e2 = _two_product(c, c)
    return (p1 - p2) + (e1 - e2)


@dataclass(frozen=True)
class StandardFormCM:
    """Two-mode covariance matrix with blocks ``a*I``, ``b*I`` and ``diag(c, c_prime)``."""

    a: float
    b: float
    c: float
    c_prime: float

    def __post_init__(self):
        for name in ("a", "b", "c", "c_prime"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise MalformedCM(f"{name} must be finite")

    @property
    def det_a(self):
        return np.square(self.a)

    @property
    def det_b(self):
        return np.square(self.b)

    @property
    def det_cross(self):
        return np.multiply(self.c, self.c_prime)

    @property
    def gaps(self):
        """``(ab - c^2, ab - c'^2)``; their product is det V."""
        return product_gap(self.a, self.b, self.c), product_gap(self.a, self.b, self.c_prime)

    @property
    def det(self):
        g, gp = self.gaps
        return _out(g * gp)

    def swapped(self) -> "StandardFormCM":
        """Exchange the roles of modes A and B."""
        return StandardFormCM(self.b, self.a, self.c, self.c_prime)

    def matrix(self) -> np.ndarray:
        """Dense 4x4 matrix in (x1, p1, x2, p2) ordering; scalar fields only."""
        a, b, c, cp = (float(v) for v in (self.a, self.b, self.c, self.c_prime))
        return np.array(
            [
                [a, 0.0, c, 0.0],
                [0.0, a, 0.0, cp],
                [c, 0.0, b, 0.0],
                [0.0, cp, 0.0, b],
            ]
        )


@dataclass(frozen=True)
class SymplecticDiagnostics:
    nu_minus: float
    nu_plus: float
    nu_tilde_minus: float
    s: float
    d: float
    g: float


def _symplectic_pair(delta, det, tol):
    delta = np.asarray(delta, dtype=float)
    det = np.asarray(det, dtype=float)
    disc = delta**2 - 4.0 * det
    if np.any(disc < -tol * np.maximum(delta**2, 1.0)):
        raise MalformedCM("negative symplectic discriminant; matrix is not a valid CM")
    if np.any(det <= 0) or np.any(delta <= 0):
        raise MalformedCM("covariance matrix is not positive definite")
    root = np.sqrt(np.maximum(disc, 0.0))
    big = (delta + root) / 2.0
    # 2*det/(delta+root) avoids cancellation in (delta-root)/2
    small = det / big
    return np.sqrt(small), np.sqrt(big)


def _require_positive_definite(cm):
    # det V > 0 alone also admits two negative gaps
    g, gp = cm.gaps
    if np.any(g <= 0) or np.any(gp <= 0) or np.any(np.asarray(cm.a) <= 0):
        raise MalformedCM("covariance matrix is not positive definite")


def symplectic_eigenvalues(cm: StandardFormCM, tol: float = PHYSICAL_TOL):
    """Return ``(nu_minus, nu_plus)`` from the invariants Delta and det V."""
    _require_positive_definite(cm)
    delta = np.square(cm.a) + np.square(cm.b) + 2.0 * cm.det_cross
    lo, hi = _symplectic_pair(delta, cm.det, tol)
    return _out(lo), _out(hi)


def ppt_symplectic_eigenvalue(cm: StandardFormCM, tol: float = PHYSICAL_TOL):
    """Smallest symplectic eigenvalue of the partially transposed CM.

    The state is separable iff the returned value is >= 1.
    """
    _require_positive_definite(cm)
    delta = np.square(cm.a) + np.square(cm.b) - 2.0 * cm.det_cross
    lo, _ = _symplectic_pair(delta, cm.det, tol)
    return _out(lo)


def diagnostics(cm: StandardFormCM) -> SymplecticDiagnostics:
    nu_minus, nu_plus = symplectic_eigenvalues(cm)
    return SymplecticDiagnostics(
        nu_minus=nu_minus,
        nu_plus=nu_plus,
        nu_tilde_minus=ppt_symplectic_eigenvalue(cm),
        s=_out((np.asarray(cm.a) + cm.b) / 2.0),
        d=_out((np.asarray(cm.a) - cm.b) / 2.0),
        g=_out(np.sqrt(cm.det)),
    )


def is_physical(cm: StandardFormCM, tol: float = PHYSICAL_TOL):
    """Elementwise physicality test: V > 0 and nu_minus >= 1.

    Uses the equivalent ``Delta <= 1 + det V`` with ``det V >= 1`` (the
    first alone also admits both eigenvalues below 1), which stays accurate
    for near-pure states where the eigenvalue formula loses half its digits.
    """
    a, b = np.asarray(cm.a, dtype=float), np.asarray(cm.b, dtype=float)
    g, gp = cm.gaps
    det = g * gp
    delta = a**2 + b**2 + 2.0 * np.asarray(cm.det_cross, dtype=float)
    ok = (g > 0) & (gp > 0) & (a >= 1 - tol) & (b >= 1 - tol)
    ok &= (1.0 + det - delta >= -tol * (1.0 + det)) & (det >= 1.0 - tol)
    return bool(ok) if ok.ndim == 0 else ok


def require_physical(cm: StandardFormCM, tol: float = PHYSICAL_TOL) -> None:
    if not np.all(is_physical(cm, tol)):
        raise MalformedCM(f"unphysical covariance matrix: {cm!r}")


def renyi2_entropy(cm) -> float:
    """Gaussian Renyi-2 entropy ``0.5*ln det(cm)`` in nats.

    Accepts a :class:`StandardFormCM` or any square CM as an array.
    """
    if isinstance(cm, StandardFormCM):
        det = np.asarray(cm.det, dtype=float)
    else:
        cm = np.atleast_2d(np.asarray(cm, dtype=float))
        det = np.linalg.det(cm)
    if np.any(det <= 0):
        raise MalformedCM("CM determinant must be positive")
    return _out(0.5 * np.log(det))


def canonicalize(raw: StandardFormCM) -> StandardFormCM:
    """Convert a CM built with vacuum variance 1/2 to vacuum units."""
    return StandardFormCM(
        *(_out(2.0 * np.asarray(v, dtype=float)) for v in (raw.a, raw.b, raw.c, raw.c_prime))
    )
