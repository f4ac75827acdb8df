"""Closed-form Gaussian Renyi-2 correlation measures (nats).

Inputs are :class:`~cascade_renyi.gaussian.StandardFormCM` in vacuum units.
"Measure B" quantities (``C_left``, ``D_left``) condition mode A on a
Gaussian measurement of mode B; "measure A" ones are obtained by swapping
the modes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MalformedCM
from .gaussian import (
    StandardFormCM,
    SymplecticDiagnostics,
    _out,
    diagnostics,
    require_physical,
)

# below this, b^2 - 1 is treated as the pure-B limit (c, c' -> 0)
_B_DEGENERATE = 1e-12


@dataclass(frozen=True)
class CorrelationReport:
    E_R: float
    I_R: float
    C_left: float
    C_right: float
    D_left: float
    D_right: float
    diagnostics: SymplecticDiagnostics


def _fields(cm):
    return tuple(np.asarray(v, dtype=float) for v in (cm.a, cm.b, cm.c, cm.c_prime))


def _oriented(cm: StandardFormCM, measured: str) -> StandardFormCM:
    if measured == "B":
        return cm
    if measured == "A":
        return cm.swapped()
    raise ValueError(f"measured must be 'A' or 'B', got {measured!r}")


def is_squeezed_thermal(cm: StandardFormCM, tol: float = 1e-9):
    _, _, c, cp = _fields(cm)
    return np.abs(c + cp) <= tol * np.maximum(1.0, np.abs(c))


def mutual_information(cm: StandardFormCM):
    require_physical(cm)
    a, b, _, _ = _fields(cm)
    return _out(0.5 * np.log(a**2 * b**2 / np.asarray(cm.det, dtype=float)))


def entanglement_renyi2(cm: StandardFormCM):
    """Renyi-2 entanglement of a two-mode squeezed thermal state (``c' = -c``).

    Zero on the separable side ``g >= 2s - 1``; otherwise
    ``ln[((g+1)s - sqrt(((g-1)^2 - 4d^2)(s^2 - d^2 - g))) / (2(d^2 + g))]``,
    which gives ``ln a`` on pure states and vanishes at ``g = 2s - 1``.
    """
    require_physical(cm)
    if not np.all(is_squeezed_thermal(cm)):
        raise MalformedCM("Renyi-2 entanglement closed form needs c' = -c")
    a, b, _, _ = _fields(cm)
    s, d = (a + b) / 2.0, (a - b) / 2.0
    g = np.sqrt(np.asarray(cm.det, dtype=float))
    entangled = g < 2.0 * s - 1.0
    t1 = (g - 1.0) ** 2 - 4.0 * d**2
    t2 = s**2 - d**2 - g
    if np.any(entangled & (t1 < -1e-9 * np.maximum(1.0, g**2))):
        raise RuntimeError("entangled branch reached with (g-1)^2 < 4d^2")
    root = np.sqrt(np.maximum(t1, 0.0) * np.maximum(t2, 0.0))
    val = np.log(((g + 1.0) * s - root) / (2.0 * (d**2 + g)))
    return _out(np.where(entangled, np.maximum(val, 0.0), 0.0))


def measurement_infimum(cm: StandardFormCM):
    """Infimum over Gaussian measurements on B of det of A's conditional CM.

    The first (homodyne) branch is ``a(a - max(c^2, c'^2)/b)``: the formula
    must be invariant under ``c <-> c'`` (rotating both modes by pi/2), and
    with ``c`` in place of the larger coupling it would leave nonzero
    discord when ``c = 0``. Verified against brute force in ``oracles``.
    """
    require_physical(cm)
    a, b, c, cp = _fields(cm)
    c2, cp2 = c**2, cp**2
    branch = (a * b**2 * cp2 - c2 * (a + b * cp2)) * (a * b**2 * c2 - cp2 * (a + b * c2))
    homodyne = a * (a - np.maximum(c2, cp2) / b)
    b21 = b**2 - 1.0
    degenerate = b21 <= _B_DEGENERATE
    safe = np.where(degenerate, 1.0, b21)
    gap, gap_p = cm.gaps
    # a(b^2 - 1) - b c^2 = b(ab - c^2) - a
    inner = (b * gap_p - a) * (b * gap - a)
    general = ((np.abs(c * cp) + np.sqrt(np.maximum(inner, 0.0))) / safe) ** 2
    out = np.where(branch < 0, homodyne, general)
    return _out(np.where(degenerate, a**2, out))


def classical_correlations(cm: StandardFormCM, measured: str = "B"):
    cm = _oriented(cm, measured)
    a = np.asarray(cm.a, dtype=float)
    return _out(0.5 * np.log(a**2 / measurement_infimum(cm)))


def discord(cm: StandardFormCM, measured: str = "B"):
    """Renyi-2 discord; ``measured="B"`` gives D_left, ``"A"`` gives D_right."""
    cm = _oriented(cm, measured)
    b = np.asarray(cm.b, dtype=float)
    return _out(0.5 * np.log(b**2 * measurement_infimum(cm) / np.asarray(cm.det, dtype=float)))


def discord_asymmetry(cm: StandardFormCM):
    """Closed form of D_left - D_right for squeezed thermal states."""
    require_physical(cm)
    if not np.all(is_squeezed_thermal(cm)):
        raise MalformedCM("discord asymmetry closed form needs c' = -c")
    a, b, _, _ = _fields(cm)
    ab, gap = a * b, np.asarray(cm.gaps[0])
    if np.any(gap + b <= 0) or np.any(gap + a <= 0):
        raise MalformedCM("ab + b - c^2 must be positive")
    return _out(np.log((ab + b) * (gap + a) / ((ab + a) * (gap + b))))


def correlation_report(cm: StandardFormCM) -> CorrelationReport:
    return CorrelationReport(
        E_R=entanglement_renyi2(cm),
        I_R=mutual_information(cm),
        C_left=classical_correlations(cm, "B"),
        C_right=classical_correlations(cm, "A"),
        D_left=discord(cm, "B"),
        D_right=discord(cm, "A"),
        diagnostics=diagnostics(cm),
    )
